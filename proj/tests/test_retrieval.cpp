#include "eqir/common.hpp"
#include "eqir/retrieval.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace eqir;

namespace {

std::vector<Document> docs(const std::vector<std::string>& texts)
{
    std::vector<Document> out;
    for (std::size_t i = 0; i < texts.size(); ++i) {
        out.push_back({"d" + std::to_string(i), "", texts[i]});
    }
    return out;
}

double score_of(const std::vector<RankedDoc>& ranked, const std::string& id)
{
    for (const auto& r : ranked) {
        if (r.doc_id == id) {
            return r.score;
        }
    }
    return 0.0;
}

} // namespace

TEST(Bm25Index, Counts)
{
    const auto index = build_bm25(docs({"a b", "a"}));
    EXPECT_EQ(index.df("a"), 2u);
    EXPECT_EQ(index.df("b"), 1u);
    EXPECT_DOUBLE_EQ(index.avg_doc_length, 1.5);

    const auto dup = build_bm25(docs({"x x y"}));
    EXPECT_EQ(dup.postings.at("x").front().tf, 2u);

    const auto with_empty = build_bm25(docs({"a b c", ""}));
    EXPECT_EQ(with_empty.doc_lengths[1], 0u);
    EXPECT_DOUBLE_EQ(with_empty.avg_doc_length, 1.5);

    EXPECT_THROW(build_bm25({}), DataError);
}

TEST(Bm25Search, SingleDocumentHandCase)
{
    const auto ranked = bm25_search(build_bm25(docs({"cat"})), "cat", {});
    ASSERT_EQ(ranked.size(), 1u);
    EXPECT_NEAR(ranked[0].score, std::log(4.0 / 3.0), 1e-9);
}

TEST(Bm25Search, AbsentTermsAndTies)
{
    const auto index = build_bm25(docs({"apple pie", "apple tart", "plum"}));
    EXPECT_TRUE(bm25_search(index, "kiwi", {}).empty());
    const auto ranked = bm25_search(index, "apple kiwi", {});
    ASSERT_EQ(ranked.size(), 2u);
    EXPECT_EQ(ranked[0].doc_id, "d0");
    EXPECT_EQ(ranked[1].doc_id, "d1");
    EXPECT_EQ(ranked[0].score, ranked[1].score);
}

TEST(Bm25Search, TermFrequencyMonotone)
{
    std::mt19937_64 rng(2024);
    const std::vector<std::string> words = {"alpha", "beta", "gamma", "delta", "eps", "zeta"};
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<std::string> texts;
        const std::size_t n_docs = 2 + rng() % 8;
        const std::size_t len = 3 + rng() % 6;
        for (std::size_t i = 0; i < n_docs; ++i) {
            std::string t;
            for (std::size_t k = 0; k < len; ++k) {
                t += words[1 + rng() % (words.size() - 1)] + " ";
            }
            texts.push_back(t);
        }
        // Two equal-length documents: "alpha" once versus twice.
        std::string once = "alpha", twice = "alpha alpha";
        for (std::size_t k = 1; k < len; ++k) {
            once += " " + words[1 + rng() % (words.size() - 1)];
        }
        for (std::size_t k = 2; k < len; ++k) {
            twice += " " + words[1 + rng() % (words.size() - 1)];
        }
        texts.push_back(once);
        texts.push_back(twice);
        const auto corpus = docs(texts);
        RetrievalConfig cfg;
        cfg.top_k = corpus.size();
        const auto ranked = bm25_search(build_bm25(corpus), "alpha", cfg);
        EXPECT_GT(score_of(ranked, corpus[corpus.size() - 1].id),
                  score_of(ranked, corpus[corpus.size() - 2].id))
            << "trial " << trial;
        for (const auto& r : ranked) {
            EXPECT_GE(r.score, 0.0);
        }
    }
}

TEST(RetrievalConfig, Validation)
{
    RetrievalConfig c;
    c.k1 = 0;
    EXPECT_THROW(c.validate(), UsageError);
    c = {};
    c.b = 1.5;
    EXPECT_THROW(c.validate(), UsageError);
    c = {};
    c.top_k = 0;
    EXPECT_THROW(c.validate(), UsageError);
}

TEST(DenseSearch, OrthonormalCorpus)
{
    // Token i of the vocabulary embeds to e_i on both sides.
    Vocabulary vocab;
    for (const char* t : {"w1", "w2", "w3", "w4"}) {
        vocab.add(t);
    }
    EncoderParams p;
    p.dim = 5;
    p.query_embeddings = Matrix(5, 5);
    p.doc_embeddings = Matrix(5, 5);
    for (std::size_t i = 0; i < 5; ++i) {
        p.query_embeddings.row(i)[i] = 1.0;
        p.doc_embeddings.row(i)[i] = 1.0;
    }
    const auto corpus = docs({"w1", "w2", "w3", "w4"});
    const std::vector<Query> queries = {{"q", "w3"}};
    const auto run = dense_search(p, vocab, corpus, queries, 100);
    const auto& ranked = run.entries.at("q");
    ASSERT_EQ(ranked.size(), 4u);
    EXPECT_EQ(ranked[0].doc_id, "d2");
    EXPECT_DOUBLE_EQ(ranked[0].score, 1.0);
    // Remaining zero scores fall back to doc id order.
    EXPECT_EQ(ranked[1].doc_id, "d0");
    EXPECT_EQ(ranked[3].doc_id, "d3");
}

TEST(DenseSearch, MatchesBruteForceAcrossThreads)
{
    std::mt19937_64 rng(5);
    std::vector<std::string> texts;
    const std::vector<std::string> words = {"a", "b", "c", "d", "e", "f", "g"};
    for (int i = 0; i < 60; ++i) {
        std::string t;
        for (int k = 0; k < 4; ++k) {
            t += words[rng() % words.size()] + " ";
        }
        texts.push_back(t);
    }
    const auto corpus = docs(texts);
    const auto vocab = build_vocab(texts);
    const auto p = init_params(vocab.size(), 6, 77);
    std::vector<Query> queries;
    for (int i = 0; i < 12; ++i) {
        queries.push_back({"q" + std::to_string(i), words[i % 7] + " " + words[(i * 3) % 7]});
    }
    const auto one = dense_search(p, vocab, corpus, queries, 10, 1);
    const auto many = dense_search(p, vocab, corpus, queries, 10, 4);
    EXPECT_EQ(one.entries, many.entries);

    for (const auto& q : queries) {
        std::vector<RankedDoc> all;
        const auto hq = encode(p, vocab, q.text, Side::query);
        for (const auto& d : corpus) {
            all.push_back({d.id, dot(hq, encode(p, vocab, d.text, Side::document))});
        }
        std::sort(all.begin(), all.end(), [](const RankedDoc& x, const RankedDoc& y) {
            return x.score != y.score ? x.score > y.score : x.doc_id < y.doc_id;
        });
        all.resize(10);
        EXPECT_EQ(one.entries.at(q.id), all);
    }
}

TEST(Bm25Run, ThreadIndependent)
{
    const auto corpus = docs({"red apple", "green apple pie", "red car", "blue car fast"});
    const std::vector<Query> queries = {{"q1", "red apple"}, {"q2", "fast car"}, {"q3", "pie"}};
    const auto index = build_bm25(corpus);
    EXPECT_EQ(bm25_run(index, queries, {}, 1).entries, bm25_run(index, queries, {}, 3).entries);
}
