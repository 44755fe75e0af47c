#pragma once

#include "eqir/corpus.hpp"
#include "eqir/encoder.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace eqir {

struct Posting {
    std::size_t doc = 0;
    std::size_t tf = 0;
};

/// Inverted index over lowercased index terms of title + text.
struct Bm25Index {
    std::unordered_map<std::string, std::vector<Posting>> postings;
    std::vector<std::size_t> doc_lengths;
    double avg_doc_length = 0.0;
    std::size_t doc_count = 0;
    std::unordered_map<std::string, std::size_t> doc_frequencies;
    std::vector<std::string> doc_ids;

    std::size_t df(const std::string& term) const;
    double idf(const std::string& term) const;
};

struct RetrievalConfig {
    double k1 = 1.2;
    double b = 0.75;
    std::size_t top_k = 100;

    void validate() const;
};

Bm25Index build_bm25(const std::vector<Document>& corpus);

/// Sum over distinct query terms of idf * tf (k1 + 1) / (tf + k1 (1 - b + b len/avglen)),
/// idf = ln(1 + (N - df + 0.5) / (df + 0.5)). Best first, ties by doc id.
std::vector<RankedDoc> bm25_search(const Bm25Index& index, std::string_view query,
                                   const RetrievalConfig& config);

RunRanking bm25_run(const Bm25Index& index, const std::vector<Query>& queries,
                    const RetrievalConfig& config, std::size_t threads = 1);

/// Doc-side embeddings of the whole corpus, one row per document.
Matrix embed_corpus(const EncoderParams& params, const Vocabulary& vocab,
                    const std::vector<Document>& corpus, std::size_t threads = 1);

/// Exhaustive dot-product ranking; top_k per query, ties by doc id.
RunRanking dense_search(const EncoderParams& params, const Vocabulary& vocab,
                        const std::vector<Document>& corpus, const std::vector<Query>& queries,
                        std::size_t top_k, std::size_t threads = 1);

/// Ranks precomputed document vectors against one query vector.
std::vector<RankedDoc> rank_by_dot(std::span<const double> query, const Matrix& doc_vectors,
                                   const std::vector<Document>& corpus, std::size_t top_k);

} // namespace eqir
