#include "eqir/common.hpp"
#include "eqir/encoder.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

using namespace eqir;

namespace {

/// V x d params whose query and document row i are both e_(i mod d).
EncoderParams basis_params(std::size_t v, std::size_t d)
{
    EncoderParams p;
    p.dim = d;
    p.query_embeddings = Matrix(v, d);
    p.doc_embeddings = Matrix(v, d);
    for (std::size_t i = 0; i < v; ++i) {
        p.query_embeddings.row(i)[i % d] = 1.0;
        p.doc_embeddings.row(i)[i % d] = 1.0;
    }
    return p;
}

} // namespace

TEST(Vocab, MinCountThreshold)
{
    const auto v = build_vocab({"a a b"}, 2);
    EXPECT_EQ(v.size(), 2u);
    EXPECT_EQ(v.id("a"), 1u);
    EXPECT_EQ(v.id("b"), 0u);
    EXPECT_EQ(v.token(0), kUnkToken);
}

TEST(Vocab, OrderAndTies)
{
    EXPECT_EQ(build_vocab({"x y z"}, 1).size(), 4u);
    const auto v = build_vocab({"y x y x w"}, 1);
    EXPECT_EQ(v.id("x"), 1u);
    EXPECT_EQ(v.id("y"), 2u);
    EXPECT_EQ(v.id("w"), 3u);
    EXPECT_EQ(build_vocab(std::vector<std::string>{}, 1).size(), 1u);
}

TEST(Vocab, SaveLoadRoundTrip)
{
    testutil::TempDir dir;
    const auto v = build_vocab({"the cat sat on the mat"}, 1);
    v.save(dir.file("v.tsv"));
    EXPECT_EQ(Vocabulary::load(dir.file("v.tsv")), v);
}

TEST(Encode, MeanOfRows)
{
    const auto vocab = build_vocab({"a b"}, 1);
    auto p = init_params(vocab.size(), 4, 3);
    const auto ra = p.query_embeddings.row(vocab.id("a"));
    const auto rb = p.query_embeddings.row(vocab.id("b"));
    const auto one = encode(p, vocab, "a", Side::query);
    EXPECT_TRUE(std::equal(one.begin(), one.end(), ra.begin()));
    const auto two = encode(p, vocab, "a b", Side::query);
    for (std::size_t i = 0; i < 4; ++i) {
        EXPECT_DOUBLE_EQ(two[i], (ra[i] + rb[i]) / 2);
    }
    const auto unk = encode(p, vocab, "zz qq", Side::document);
    const auto r0 = p.doc_embeddings.row(0);
    for (std::size_t i = 0; i < 4; ++i) {
        EXPECT_DOUBLE_EQ(unk[i], r0[i]);
    }
    const auto empty = encode(p, vocab, "", Side::query);
    EXPECT_EQ(empty, std::vector<double>(4, 0.0));
}

TEST(Encode, PermutationInvariant)
{
    const auto vocab = build_vocab({"a b c d"}, 1);
    const auto p = init_params(vocab.size(), 8, 11);
    const auto x = encode(p, vocab, "a b c d", Side::query);
    const auto y = encode(p, vocab, "d b a c", Side::query);
    for (std::size_t i = 0; i < x.size(); ++i) {
        EXPECT_NEAR(x[i], y[i], 1e-15);
    }
}

TEST(InitParams, RangeAndDeterminism)
{
    const auto a = init_params(10, 8, 5);
    EXPECT_EQ(params_digest(a), params_digest(init_params(10, 8, 5)));
    EXPECT_NE(params_digest(a), params_digest(init_params(10, 8, 6)));
    for (double x : a.query_embeddings.data()) {
        EXPECT_LE(std::abs(x), 0.5 / 8);
    }
    EXPECT_THROW(init_params(10, 1, 5), UsageError);
}

TEST(ScoreBatch, DotProductLogits)
{
    auto p = basis_params(3, 2);
    EncodedBatch batch;
    batch.query = {0};
    batch.candidates = {{0}, {1}};
    EXPECT_EQ(score_batch(p, batch).values, (std::vector<double>{1.0, 0.0}));

    for (auto& x : p.doc_embeddings.data()) {
        x *= 2;
    }
    EXPECT_EQ(score_batch(p, batch).values, (std::vector<double>{2.0, 0.0}));

    for (auto& x : p.query_embeddings.data()) {
        x = 0;
    }
    EXPECT_EQ(score_batch(p, batch).values, (std::vector<double>{0.0, 0.0}));
}

TEST(ScoreBatch, FromTextBatch)
{
    const auto vocab = build_vocab({"red blue green"}, 1);
    const auto p = init_params(vocab.size(), 4, 1);
    TrainingBatch b{{"q", "red"}, {"d1", "", "red"}, {{"d2", "", "blue"}}};
    const auto logits = score_batch(p, vocab, b).values;
    const auto hq = encode(p, vocab, "red", Side::query);
    EXPECT_DOUBLE_EQ(logits[0], dot(hq, encode(p, vocab, "red", Side::document)));
    EXPECT_DOUBLE_EQ(logits[1], dot(hq, encode(p, vocab, "blue", Side::document)));
}

TEST(Checkpoint, RoundTripAndHeader)
{
    testutil::TempDir dir;
    auto p = init_params(7, 3, 9, Role::biased);
    save_params(p, dir.file("m.eqir"));
    const auto back = load_params(dir.file("m.eqir"));
    EXPECT_EQ(back.query_embeddings, p.query_embeddings);
    EXPECT_EQ(back.doc_embeddings, p.doc_embeddings);
    EXPECT_EQ(back.role, Role::biased);
    EXPECT_EQ(back.dim, 3u);

    const auto bytes = serialize_params(p);
    EXPECT_EQ(bytes.substr(0, 5), "EQIR1");
    EXPECT_EQ(bytes.size(), 5u + 8 + 8 + 1 + 2 * 7 * 3 * 8);
    EXPECT_THROW(deserialize_params(bytes.substr(0, bytes.size() - 1)), DataError);
    EXPECT_THROW(deserialize_params("NOPE1" + bytes.substr(5)), DataError);
}
