#pragma once

#include "eqir/corpus.hpp"

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace eqir {

/// Shape of a generated dataset.
struct SynthSpec {
    /// Concepts; each has a document-side word and a query-side synonym.
    std::size_t concepts = 24;
    /// Concepts per document, and named by each of its queries. No two
    /// documents share the same concept set.
    std::size_t concepts_per_doc = 3;
    /// Queries sharing one target document, all of the same tier. Simple
    /// documents are shared more widely, which is what makes them cheap to learn.
    std::size_t queries_per_doc = 2;
    std::size_t simple_queries_per_doc = 5;
    /// Document filler words drawn per document.
    std::size_t doc_filler_min = 3;
    std::size_t doc_filler_max = 6;
    std::size_t doc_filler_vocab = 20;
    /// Query-side filler nouns used by complex queries.
    std::size_t query_filler_vocab = 40;
    /// Documents that no query targets.
    std::size_t distractors = 100;
    /// Share of distractors that also carry the artifact token.
    double distractor_artifact_rate = 0.0;
    /// Document words of unrelated concepts named by each complex query.
    std::size_t decoys = 1;
    /// Share of complex queries that mention the artifact token.
    double complex_artifact_rate = 0.5;
    double test_fraction = 1.0 / 3.0;
    std::string artifact = "zqx";
};

/// Linguistic tier of a generated query. Simple queries are short,
/// verb-less and carry the artifact token; complex ones use subordinate
/// clauses and synonyms of the document's words.
enum class QueryKind { simple, medium, complex };

std::string_view query_kind_name(QueryKind kind);

struct SyntheticDataset {
    std::vector<Document> corpus;
    std::vector<Query> queries;
    Qrels qrels;
    std::vector<std::string> train_ids;
    std::vector<std::string> test_ids;
    std::map<std::string, QueryKind> kinds;

    std::vector<Query> select(const std::vector<std::string>& ids) const;
    Qrels qrels_for(const std::vector<std::string>& ids) const;
};

/// Deterministic in (seed, n_queries, spec). Every query has exactly one
/// relevant document. Throws UsageError when n_queries < 40.
SyntheticDataset generate_synthetic_biased(std::uint64_t seed, std::size_t n_queries,
                                           const SynthSpec& spec = {});

/// BEIR layout: corpus.jsonl, queries.jsonl, qrels/{train,test}.tsv and
/// kinds.tsv (query id, kind).
void write_synthetic(const SyntheticDataset& data, const std::string& dir);

} // namespace eqir
