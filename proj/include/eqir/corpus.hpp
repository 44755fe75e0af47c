#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace eqir {

struct Document {
    std::string id;
    std::string title;
    std::string text;

    /// Title and body joined for indexing.
    std::string full_text() const { return title.empty() ? text : title + " " + text; }
    bool operator==(const Document&) const = default;
};

struct Query {
    std::string id;
    std::string text;
    bool operator==(const Query&) const = default;
};

/// query id -> doc id -> grade. Unjudged pairs count as grade 0.
using Qrels = std::map<std::string, std::map<std::string, int>>;

struct TrainingBatch {
    Query query;
    Document positive;
    std::vector<Document> negatives;
};

struct RankedDoc {
    std::string doc_id;
    double score = 0.0;
    bool operator==(const RankedDoc&) const = default;
};

/// Per-query rankings, best first.
struct RunRanking {
    std::map<std::string, std::vector<RankedDoc>> entries;
    std::string tag;
};

std::vector<Document> load_corpus(const std::string& path);
std::vector<Query> load_queries(const std::string& path);
Qrels load_qrels(const std::string& path);

void write_corpus(const std::vector<Document>& docs, const std::string& path);
void write_queries(const std::vector<Query>& queries, const std::string& path);
void write_qrels(const Qrels& qrels, const std::string& path);

struct BatchSet {
    std::vector<TrainingBatch> batches;
    /// Queries dropped because no document has grade >= 1.
    std::size_t skipped_queries = 0;
};

/// One batch per (query, positive) pair with `n` negatives drawn uniformly
/// without replacement from the documents not judged relevant for the query.
BatchSet make_batches(const std::vector<Query>& queries, const Qrels& qrels,
                      const std::vector<Document>& corpus, std::size_t n, std::uint64_t seed);

/// TREC six-column format, scores with six decimals.
void write_run(const RunRanking& run, const std::string& path);
std::string format_run(const RunRanking& run);

/// Reads a TREC run. Queries whose rank column is not 1..n in file order are
/// re-sorted by score (stable) and listed in `warnings` when provided.
RunRanking read_run(const std::string& path, std::vector<std::string>* warnings = nullptr);

} // namespace eqir
