#pragma once

#include "eqir/complexity.hpp"
#include "eqir/corpus.hpp"

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace eqir {

struct PerQueryScores {
    std::map<std::string, double> ndcg;
    std::size_t k = 10;
    /// Run queries left out because the qrels hold no relevant document.
    std::size_t dropped = 0;
};

struct AggregateStats {
    double mu = 0.0;
    /// Population standard deviation.
    double sigma = 0.0;
    /// sigma / mu; empty when mu == 0.
    std::optional<double> cv;
};

struct BucketPoint {
    std::size_t bucket = 0;
    double mean_complexity = 0.0;
    double mean_ndcg = 0.0;
    std::size_t count = 0;
};

using BucketCurve = std::vector<BucketPoint>;

struct SignificanceResult {
    double raw_p = 1.0;
    double adjusted_p = 1.0;
    std::size_t comparisons = 1;
    std::size_t resamples = 0;
    std::uint64_t seed = 0;
    double observed = 0.0;
};

/// NDCG@k with gain 2^rel - 1 and discount log2(rank + 1). The ideal DCG
/// comes from the judged grades. Throws DataError("no relevant documents")
/// when no grade is >= 1.
double ndcg_at_k(std::span<const std::string> ranking, const std::map<std::string, int>& judged,
                 std::size_t k);

/// Scores every run query that has a relevant judgment; judged queries
/// missing from the run score 0.
PerQueryScores evaluate_run(const RunRanking& run, const Qrels& qrels, std::size_t k = 10);

AggregateStats aggregate(const PerQueryScores& scores);
AggregateStats aggregate(std::span<const double> values);

/// Unweighted mean of per-dataset mu, sigma and cv.
AggregateStats average_datasets(std::span<const AggregateStats> per_dataset);

/// Mean complexity and mean NDCG per complexity bucket.
BucketCurve bucket_curve(const PerQueryScores& scores,
                         const std::vector<ComplexityProfile>& profiles, std::size_t k_buckets);

/// max - min of the bucket NDCG means.
double curve_gap(const BucketCurve& curve);

/// Two-sided paired sign-flip permutation test on per-query differences,
/// Bonferroni-adjusted for m comparisons.
SignificanceResult paired_significance(const PerQueryScores& a, const PerQueryScores& b,
                                       std::size_t resamples, std::uint64_t seed,
                                       std::size_t m = 1);

/// Writes summary.txt, per_query.tsv and curve.tsv into `dir`.
void emit_report(const AggregateStats& stats, const BucketCurve& curve,
                 const PerQueryScores& per_query, const std::vector<ComplexityProfile>& profiles,
                 const std::string& dir);

} // namespace eqir
