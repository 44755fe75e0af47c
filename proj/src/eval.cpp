#include "eqir/eval.hpp"

#include "eqir/common.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>

namespace eqir {
namespace {

double gain(int grade)
{
    return std::exp2(static_cast<double>(grade)) - 1.0;
}

double discount(std::size_t rank)
{
    return std::log2(static_cast<double>(rank) + 1.0);
}

void write_text(const std::filesystem::path& path, const std::string& content)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw DataError("cannot write " + path.string());
    }
    out << content;
    if (!out) {
        throw DataError("write failed for " + path.string());
    }
}

} // namespace

double ndcg_at_k(std::span<const std::string> ranking, const std::map<std::string, int>& judged,
                 std::size_t k)
{
    if (k < 1) {
        throw UsageError("k must be >= 1");
    }
    std::vector<int> grades;
    for (const auto& [doc, grade] : judged) {
        if (grade > 0) {
            grades.push_back(grade);
        }
    }
    if (grades.empty()) {
        throw DataError("no relevant documents");
    }
    std::sort(grades.begin(), grades.end(), std::greater<>());
    double ideal = 0.0;
    for (std::size_t i = 0; i < std::min(k, grades.size()); ++i) {
        ideal += gain(grades[i]) / discount(i + 1);
    }
    double dcg = 0.0;
    for (std::size_t i = 0; i < std::min(k, ranking.size()); ++i) {
        auto it = judged.find(ranking[i]);
        if (it != judged.end() && it->second > 0) {
            dcg += gain(it->second) / discount(i + 1);
        }
    }
    return dcg / ideal;
}

PerQueryScores evaluate_run(const RunRanking& run, const Qrels& qrels, std::size_t k)
{
    auto has_relevant = [](const std::map<std::string, int>& judged) {
        return std::any_of(judged.begin(), judged.end(),
                           [](const auto& kv) { return kv.second > 0; });
    };
    PerQueryScores out;
    out.k = k;
    for (const auto& [qid, ranked] : run.entries) {
        auto it = qrels.find(qid);
        if (it == qrels.end() || !has_relevant(it->second)) {
            ++out.dropped;
            continue;
        }
        std::vector<std::string> ids;
        ids.reserve(ranked.size());
        for (const auto& r : ranked) {
            ids.push_back(r.doc_id);
        }
        out.ndcg[qid] = ndcg_at_k(ids, it->second, k);
    }
    for (const auto& [qid, judged] : qrels) {
        if (!run.entries.contains(qid) && has_relevant(judged)) {
            out.ndcg[qid] = 0.0;
        }
    }
    return out;
}

AggregateStats aggregate(std::span<const double> values)
{
    if (values.size() < 2) {
        throw DataError("aggregate needs at least 2 queries");
    }
    const double n = static_cast<double>(values.size());
    double sum = 0.0;
    for (double v : values) {
        sum += v;
    }
    AggregateStats s;
    s.mu = sum / n;
    double ss = 0.0;
    for (double v : values) {
        ss += (v - s.mu) * (v - s.mu);
    }
    s.sigma = std::sqrt(ss / n);
    if (s.mu > 0.0) {
        s.cv = s.sigma / s.mu;
    }
    return s;
}

AggregateStats aggregate(const PerQueryScores& scores)
{
    std::vector<double> values;
    values.reserve(scores.ndcg.size());
    for (const auto& [qid, v] : scores.ndcg) {
        values.push_back(v);
    }
    return aggregate(values);
}

AggregateStats average_datasets(std::span<const AggregateStats> per_dataset)
{
    if (per_dataset.empty()) {
        throw DataError("no datasets to average");
    }
    AggregateStats out;
    double cv_total = 0.0;
    bool cv_defined = true;
    for (const auto& s : per_dataset) {
        out.mu += s.mu;
        out.sigma += s.sigma;
        cv_defined = cv_defined && s.cv.has_value();
        cv_total += s.cv.value_or(0.0);
    }
    const double n = static_cast<double>(per_dataset.size());
    out.mu /= n;
    out.sigma /= n;
    if (cv_defined) {
        out.cv = cv_total / n;
    }
    return out;
}

BucketCurve bucket_curve(const PerQueryScores& scores,
                         const std::vector<ComplexityProfile>& profiles, std::size_t k_buckets)
{
    std::map<std::string, const ComplexityProfile*> by_id;
    for (const auto& p : profiles) {
        by_id[p.query_id] = &p;
    }
    std::string missing;
    std::vector<ComplexityProfile> scored;
    for (const auto& [qid, v] : scores.ndcg) {
        auto it = by_id.find(qid);
        if (it == by_id.end()) {
            missing += (missing.empty() ? "" : ", ") + qid;
            continue;
        }
        scored.push_back(*it->second);
    }
    if (!missing.empty()) {
        throw DataError("no complexity profile for queries: " + missing);
    }
    const auto buckets = assign_buckets(scored, k_buckets);
    BucketCurve curve(k_buckets);
    for (std::size_t b = 0; b < k_buckets; ++b) {
        curve[b].bucket = b;
    }
    for (const auto& p : scored) {
        auto& point = curve[buckets.at(p.query_id)];
        point.mean_complexity += p.score;
        point.mean_ndcg += scores.ndcg.at(p.query_id);
        ++point.count;
    }
    for (auto& point : curve) {
        point.mean_complexity /= static_cast<double>(point.count);
        point.mean_ndcg /= static_cast<double>(point.count);
    }
    return curve;
}

double curve_gap(const BucketCurve& curve)
{
    if (curve.empty()) {
        return 0.0;
    }
    auto [lo, hi] = std::minmax_element(
        curve.begin(), curve.end(),
        [](const BucketPoint& a, const BucketPoint& b) { return a.mean_ndcg < b.mean_ndcg; });
    return hi->mean_ndcg - lo->mean_ndcg;
}

SignificanceResult paired_significance(const PerQueryScores& a, const PerQueryScores& b,
                                       std::size_t resamples, std::uint64_t seed, std::size_t m)
{
    if (resamples < 1000) {
        throw UsageError("need at least 1000 resamples");
    }
    if (m < 1) {
        throw UsageError("comparison count must be >= 1");
    }
    std::string mismatch;
    for (const auto& [qid, v] : a.ndcg) {
        if (!b.ndcg.contains(qid)) {
            mismatch += " " + qid;
        }
    }
    for (const auto& [qid, v] : b.ndcg) {
        if (!a.ndcg.contains(qid)) {
            mismatch += " " + qid;
        }
    }
    if (!mismatch.empty() || a.ndcg.empty()) {
        throw DataError("paired test needs identical query sets; unmatched:" + mismatch);
    }

    std::vector<double> diffs;
    for (const auto& [qid, v] : a.ndcg) {
        diffs.push_back(v - b.ndcg.at(qid));
    }
    const double n = static_cast<double>(diffs.size());
    double total = 0.0;
    for (double d : diffs) {
        total += d;
    }
    const double observed = std::abs(total / n);
    const double threshold = observed - 1e-12 * std::max(1.0, observed);

    std::size_t extreme = 0;
    for (std::size_t r = 0; r < resamples; ++r) {
        const std::uint64_t stream = mix_seed(seed, r);
        std::uint64_t bits = 0;
        double s = 0.0;
        for (std::size_t i = 0; i < diffs.size(); ++i) {
            if (i % 64 == 0) {
                bits = mix_seed(stream, i / 64);
            }
            s += (bits & 1U) ? -diffs[i] : diffs[i];
            bits >>= 1U;
        }
        if (std::abs(s / n) >= threshold) {
            ++extreme;
        }
    }
    SignificanceResult out;
    out.raw_p = static_cast<double>(extreme + 1) / static_cast<double>(resamples + 1);
    out.adjusted_p = std::min(1.0, static_cast<double>(m) * out.raw_p);
    out.comparisons = m;
    out.resamples = resamples;
    out.seed = seed;
    out.observed = observed;
    return out;
}

void emit_report(const AggregateStats& stats, const BucketCurve& curve,
                 const PerQueryScores& per_query, const std::vector<ComplexityProfile>& profiles,
                 const std::string& dir)
{
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        throw DataError("cannot create " + dir + ": " + ec.message());
    }
    const std::filesystem::path root(dir);

    std::string summary;
    summary += "mu=" + format_double(stats.mu) + "\n";
    summary += "sigma=" + format_double(stats.sigma) + "\n";
    summary += "cv=" + (stats.cv ? format_double(*stats.cv) : std::string("NA")) + "\n";
    summary += "n_queries=" + std::to_string(per_query.ndcg.size()) + "\n";
    summary += "k=" + std::to_string(per_query.k) + "\n";
    std::string curve_tsv = "bucket\tmean_complexity\tmean_ndcg\tcount\n";
    for (const auto& p : curve) {
        const std::string row = std::to_string(p.bucket) + "\t" + format_double(p.mean_complexity)
                                + "\t" + format_double(p.mean_ndcg) + "\t"
                                + std::to_string(p.count) + "\n";
        summary += row;
        curve_tsv += row;
    }

    std::map<std::string, double> complexity;
    for (const auto& p : profiles) {
        complexity[p.query_id] = p.score;
    }
    std::string per_query_tsv = "query_id\tcomplexity_score\tndcg\n";
    for (const auto& [qid, v] : per_query.ndcg) {
        auto it = complexity.find(qid);
        per_query_tsv += qid + "\t"
                         + (it == complexity.end() ? std::string("NA") : format_double(it->second))
                         + "\t" + format_double(v) + "\n";
    }

    write_text(root / "summary.txt", summary);
    write_text(root / "per_query.tsv", per_query_tsv);
    write_text(root / "curve.tsv", curve_tsv);
}

} // namespace eqir
