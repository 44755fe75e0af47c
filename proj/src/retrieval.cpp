#include "eqir/retrieval.hpp"

#include "eqir/common.hpp"
#include "eqir/text_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace eqir {
namespace {

bool better(const RankedDoc& a, const RankedDoc& b)
{
    if (a.score != b.score) {
        return a.score > b.score;
    }
    return a.doc_id < b.doc_id;
}

void keep_top(std::vector<RankedDoc>& ranked, std::size_t top_k)
{
    if (ranked.size() > top_k) {
        std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(top_k),
                          ranked.end(), better);
        ranked.resize(top_k);
    } else {
        std::sort(ranked.begin(), ranked.end(), better);
    }
}

} // namespace

std::size_t Bm25Index::df(const std::string& term) const
{
    auto it = doc_frequencies.find(term);
    return it == doc_frequencies.end() ? 0 : it->second;
}

double Bm25Index::idf(const std::string& term) const
{
    const double n = static_cast<double>(doc_count);
    const double f = static_cast<double>(df(term));
    return std::log(1.0 + (n - f + 0.5) / (f + 0.5));
}

void RetrievalConfig::validate() const
{
    if (!(k1 > 0.0)) {
        throw UsageError("k1 must be > 0");
    }
    if (!(b >= 0.0 && b <= 1.0)) {
        throw UsageError("b must be in [0,1]");
    }
    if (top_k < 1) {
        throw UsageError("top-k must be >= 1");
    }
}

Bm25Index build_bm25(const std::vector<Document>& corpus)
{
    if (corpus.empty()) {
        throw DataError("cannot index an empty corpus");
    }
    Bm25Index index;
    index.doc_count = corpus.size();
    std::size_t total = 0;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        const auto terms = index_terms(corpus[i].full_text());
        index.doc_ids.push_back(corpus[i].id);
        index.doc_lengths.push_back(terms.size());
        total += terms.size();
        std::map<std::string, std::size_t> tf;
        for (const auto& t : terms) {
            ++tf[t];
        }
        for (const auto& [term, count] : tf) {
            index.postings[term].push_back({i, count});
            ++index.doc_frequencies[term];
        }
    }
    index.avg_doc_length = static_cast<double>(total) / static_cast<double>(corpus.size());
    return index;
}

std::vector<RankedDoc> bm25_search(const Bm25Index& index, std::string_view query,
                                   const RetrievalConfig& config)
{
    config.validate();
    const auto terms = index_terms(query);
    const std::set<std::string> unique(terms.begin(), terms.end());
    std::vector<double> scores(index.doc_count, 0.0);
    std::vector<bool> touched(index.doc_count, false);
    for (const auto& term : unique) {
        auto it = index.postings.find(term);
        if (it == index.postings.end()) {
            continue;
        }
        const double idf = index.idf(term);
        for (const auto& p : it->second) {
            const double tf = static_cast<double>(p.tf);
            const double len = static_cast<double>(index.doc_lengths[p.doc]);
            const double norm = index.avg_doc_length > 0.0 ? len / index.avg_doc_length : 0.0;
            scores[p.doc] += idf * tf * (config.k1 + 1.0)
                             / (tf + config.k1 * (1.0 - config.b + config.b * norm));
            touched[p.doc] = true;
        }
    }
    std::vector<RankedDoc> ranked;
    for (std::size_t d = 0; d < index.doc_count; ++d) {
        if (touched[d]) {
            ranked.push_back({index.doc_ids[d], scores[d]});
        }
    }
    keep_top(ranked, config.top_k);
    return ranked;
}

RunRanking bm25_run(const Bm25Index& index, const std::vector<Query>& queries,
                    const RetrievalConfig& config, std::size_t threads)
{
    std::vector<std::vector<RankedDoc>> results(queries.size());
    parallel_for(queries.size(), threads,
                 [&](std::size_t i) { results[i] = bm25_search(index, queries[i].text, config); });
    RunRanking run;
    for (std::size_t i = 0; i < queries.size(); ++i) {
        run.entries[queries[i].id] = std::move(results[i]);
    }
    return run;
}

Matrix embed_corpus(const EncoderParams& params, const Vocabulary& vocab,
                    const std::vector<Document>& corpus, std::size_t threads)
{
    Matrix out(corpus.size(), params.dim);
    parallel_for(corpus.size(), threads, [&](std::size_t i) {
        const auto h = encode(params, vocab, corpus[i].full_text(), Side::document);
        std::copy(h.begin(), h.end(), out.row(i).begin());
    });
    return out;
}

std::vector<RankedDoc> rank_by_dot(std::span<const double> query, const Matrix& doc_vectors,
                                   const std::vector<Document>& corpus, std::size_t top_k)
{
    std::vector<RankedDoc> ranked;
    ranked.reserve(corpus.size());
    for (std::size_t d = 0; d < corpus.size(); ++d) {
        ranked.push_back({corpus[d].id, dot(query, doc_vectors.row(d))});
    }
    keep_top(ranked, top_k);
    return ranked;
}

RunRanking dense_search(const EncoderParams& params, const Vocabulary& vocab,
                        const std::vector<Document>& corpus, const std::vector<Query>& queries,
                        std::size_t top_k, std::size_t threads)
{
    if (top_k < 1) {
        throw UsageError("top-k must be >= 1");
    }
    const auto docs = embed_corpus(params, vocab, corpus, threads);
    std::vector<std::vector<RankedDoc>> results(queries.size());
    parallel_for(queries.size(), threads, [&](std::size_t i) {
        const auto hq = encode(params, vocab, queries[i].text, Side::query);
        results[i] = rank_by_dot(hq, docs, corpus, top_k);
    });
    RunRanking run;
    for (std::size_t i = 0; i < queries.size(); ++i) {
        run.entries[queries[i].id] = std::move(results[i]);
    }
    return run;
}

} // namespace eqir
