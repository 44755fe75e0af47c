#include "eqir/common.hpp"
#include "eqir/synthetic.hpp"
#include "eqir/training.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

using namespace eqir;

namespace {

struct Toy {
    Vocabulary vocab;
    std::vector<TrainingBatch> batches;
    std::vector<EncodedBatch> encoded;
};

/// 50 training batches from a 75-query synthetic set.
const Toy& toy()
{
    static const Toy t = [] {
        Toy out;
        const auto data = generate_synthetic_biased(5, 75);
        const auto queries = data.select(data.train_ids);
        out.vocab = build_vocab(data.corpus, queries);
        out.batches = make_batches(queries, data.qrels_for(data.train_ids), data.corpus, 3, 5)
                          .batches;
        out.encoded = encode_batches(out.vocab, out.batches);
        return out;
    }();
    return t;
}

TrainConfig small_config()
{
    TrainConfig c;
    c.dim = 8;
    c.epochs = 6;
    c.n_negatives = 3;
    c.seed = 9;
    return c;
}

/// Two-candidate batch over a 3-token vocabulary: query token 0, positive
/// token 1, negative token 2.
EncodedBatch two_candidate_batch()
{
    EncodedBatch b;
    b.query = {0};
    b.candidates = {{1}, {2}};
    return b;
}

/// Biased learner with logits [s, 0] on two_candidate_batch().
EncoderParams biased_with_margin(double s)
{
    EncoderParams p;
    p.dim = 2;
    p.role = Role::biased;
    p.frozen = true;
    p.query_embeddings = Matrix(3, 2);
    p.doc_embeddings = Matrix(3, 2);
    p.query_embeddings.row(0)[0] = 1.0;
    p.doc_embeddings.row(1)[0] = s;
    return p;
}

} // namespace

TEST(ContrastiveLoss, HandCases)
{
    EXPECT_NEAR(contrastive_loss({std::vector<double>(8, 0.3)}), std::log(8.0), 1e-12);
    EXPECT_NEAR(contrastive_loss({{10, -10}}), 2.0611536e-9, 1e-15);
    const double base = contrastive_loss({{0.2, -1.0, 0.7}});
    EXPECT_NEAR(contrastive_loss({{100.2, 99.0, 100.7}}), base, 1e-12);
    EXPECT_THROW(contrastive_loss({{1.0, std::numeric_limits<double>::quiet_NaN()}}), DataError);
    EXPECT_THROW(contrastive_loss({{1.0}}), UsageError);
}

TEST(Gradients, MatchFiniteDifferencesOnRandomInstances)
{
    for (std::uint64_t seed = 1; seed <= 120; ++seed) {
        const auto g = oracle::random_instance(seed);
        const auto plain = contrastive_grad(g.batch, g.robust);
        EXPECT_LT(oracle::max_relative_error(g, plain, oracle::plain_loss), 1e-4) << seed;
        const auto step = debiased_grad(g.batch, g.robust, g.biased, g.alpha);
        EXPECT_LT(oracle::max_relative_error(g, step.grad, oracle::debiased_loss), 1e-4) << seed;
        EXPECT_NEAR(step.loss, oracle::debiased_loss(g, g.robust), 1e-12) << seed;
    }
}

TEST(Gradients, VanishWhenPositiveDominates)
{
    EncoderParams p = biased_with_margin(60.0);
    p.frozen = false;
    p.role = Role::robust;
    EXPECT_LT(contrastive_grad(two_candidate_batch(), p).squared_norm(), 1e-40);
}

TEST(Gradients, DuplicateQueryTokenSumsShares)
{
    const auto p = init_params(4, 3, 21);
    EncodedBatch b;
    b.query = {1, 1, 2};
    b.candidates = {{0}, {3}};
    const auto grad = contrastive_grad(b, p);
    const auto probs = softmax(score_batch(p, b).values);
    for (std::size_t k = 0; k < 3; ++k) {
        const double dhq = (probs[0] - 1.0) * p.doc_embeddings.row(0)[k]
                           + probs[1] * p.doc_embeddings.row(3)[k];
        EXPECT_NEAR(grad.query_rows.at(1)[k], 2.0 / 3.0 * dhq, 1e-14);
        EXPECT_NEAR(grad.query_rows.at(2)[k], 1.0 / 3.0 * dhq, 1e-14);
    }
}

TEST(Optimizer, ZeroGradientLeavesParams)
{
    auto p = init_params(3, 2, 1);
    const auto before = p.query_embeddings;
    auto state = AdamState::for_params(p);
    SparseGrad g;
    g.query_rows[1] = {0.0, 0.0};
    optimizer_step(p, g, state, TrainConfig{});
    EXPECT_EQ(p.query_embeddings, before);
}

TEST(Optimizer, FirstStepMovesByLearningRate)
{
    auto p = init_params(1, 2, 1);
    const double before = p.query_embeddings.row(0)[0];
    auto state = AdamState::for_params(p);
    SparseGrad g;
    g.query_rows[0] = {1.0, 0.0};
    TrainConfig c;
    c.learning_rate = 0.1;
    optimizer_step(p, g, state, c);
    EXPECT_NEAR(before - p.query_embeddings.row(0)[0], 0.1, 1e-8);
    EXPECT_EQ(state.step, 1u);
}

TEST(Optimizer, DecoupledDecayShrinksTouchedRows)
{
    auto p = init_params(2, 2, 4);
    const auto before = p.query_embeddings;
    auto state = AdamState::for_params(p);
    SparseGrad g;
    g.query_rows[0] = {0.0, 0.0};
    TrainConfig c;
    c.learning_rate = 0.1;
    c.weight_decay = 0.5;
    optimizer_step(p, g, state, c);
    for (std::size_t k = 0; k < 2; ++k) {
        EXPECT_NEAR(p.query_embeddings.row(0)[k], before.row(0)[k] * (1 - 0.1 * 0.5), 1e-15);
        EXPECT_EQ(p.query_embeddings.row(1)[k], before.row(1)[k]);
    }
}

TEST(Optimizer, RefusesFrozenParams)
{
    auto p = init_params(2, 2, 4);
    p.frozen = true;
    auto state = AdamState::for_params(p);
    EXPECT_THROW(optimizer_step(p, {}, state, TrainConfig{}), UsageError);
}

TEST(TrainPlain, DeterministicAndZeroEpochs)
{
    const auto& t = toy();
    const auto a = train_plain(t.encoded, t.vocab.size(), small_config());
    const auto b = train_plain(t.encoded, t.vocab.size(), small_config());
    EXPECT_EQ(serialize_params(a.params), serialize_params(b.params));

    auto zero = small_config();
    zero.epochs = 0;
    const auto z = train_plain(t.encoded, t.vocab.size(), zero);
    EXPECT_EQ(serialize_params(z.params),
              serialize_params(init_params(t.vocab.size(), zero.dim, zero.seed)));
    EXPECT_TRUE(z.loss_trace.empty());

    EXPECT_THROW(train_plain({}, t.vocab.size(), small_config()), DataError);
}

TEST(TrainPlain, LossSettlesAfterSecondEpoch)
{
    const auto& t = toy();
    ASSERT_EQ(t.encoded.size(), 50u);
    auto c = small_config();
    c.epochs = 12;
    const auto trace = train_plain(t.encoded, t.vocab.size(), c).loss_trace;
    for (std::size_t e = 2; e < trace.size(); ++e) {
        EXPECT_LE(trace[e], trace[e - 1] * 1.05) << "epoch " << e + 1;
    }
    EXPECT_LT(trace.back(), trace.front());
}

TEST(TrainConfig, Validation)
{
    TrainConfig c;
    c.learning_rate = 0;
    EXPECT_THROW(c.validate(), UsageError);
    c = {};
    c.beta1 = 1.0;
    EXPECT_THROW(c.validate(), UsageError);
    DebiasConfig d;
    d.alpha = 1.5;
    try {
        d.validate();
        FAIL();
    } catch (const UsageError& e) {
        EXPECT_EQ(std::string(e.what()), "alpha must be in [0,1]");
    }
}

TEST(BiasedLearners, StrategyBudgets)
{
    EXPECT_EQ(less_data_subset(100, 0.2, 3).size(), 20u);
    EXPECT_EQ(reduced_epochs(10, 0.2), 2u);
    EXPECT_EQ(reduced_epochs(20, 0.2), 4u);
    EXPECT_EQ(reduced_epochs(7, 0.2), 2u);
    EXPECT_EQ(weak_dimension(16, 0), 4u);
    EXPECT_EQ(weak_dimension(4, 0), 2u);
    const auto subset = less_data_subset(100, 0.2, 3);
    EXPECT_TRUE(std::is_sorted(subset.begin(), subset.end()));
    EXPECT_EQ(std::set<std::size_t>(subset.begin(), subset.end()).size(), 20u);
    EXPECT_FALSE(parse_strategy("bogus").has_value());
    EXPECT_EQ(parse_strategy("less_data"), BiasStrategy::less_data);
}

TEST(BiasedLearners, FrozenBiasedAndShaped)
{
    const auto& t = toy();
    for (auto s : {BiasStrategy::amplified_constructs, BiasStrategy::weaker_model,
                   BiasStrategy::fewer_iterations, BiasStrategy::less_data}) {
        DebiasConfig d;
        d.strategy = s;
        const auto r = make_biased_learner(t.batches, t.vocab, small_config(), d);
        EXPECT_TRUE(r.params.frozen);
        EXPECT_EQ(r.params.role, Role::biased);
        EXPECT_EQ(r.params.vocab_size(), t.vocab.size());
        EXPECT_EQ(r.params.dim, s == BiasStrategy::weaker_model ? 2u : 8u);
        EXPECT_EQ(r.loss_trace.size(), s == BiasStrategy::fewer_iterations ? 2u : 6u);
    }
}

TEST(PoeCombine, HandCases)
{
    const std::vector<double> zb = {2.0, -1.0, 0.5};
    const std::vector<double> zr = {0.3, 0.1, -0.4};
    const auto zero = poe_combine(zb, zr, 0.0);
    EXPECT_EQ(zero.z_d, zero.z_r);

    const auto uniform = poe_combine(std::vector<double>(3, 1.7), zr, 0.6);
    for (std::size_t j = 0; j < 3; ++j) {
        EXPECT_NEAR(uniform.z_d[j], uniform.z_r[j], 1e-12);
    }

    const auto hand = poe_combine(std::vector<double>{std::log(0.9), std::log(0.1)},
                                  std::vector<double>{0.0, 0.0}, 1.0);
    EXPECT_NEAR(hand.z_d[0], 0.9, 1e-12);
    EXPECT_NEAR(hand.z_d[1], 0.1, 1e-12);
}

TEST(PoeCombine, NormalisedAndFiniteForLargeLogits)
{
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> zb(4), zr(4);
        for (auto* v : {&zb, &zr}) {
            for (auto& x : *v) {
                x = static_cast<double>(rng() % 1001) - 500.0;
            }
        }
        const double alpha = static_cast<double>(rng() % 101) / 100.0;
        const auto c = poe_combine(zb, zr, alpha);
        for (const auto* dist : {&c.z_b, &c.z_r, &c.z_d}) {
            double sum = 0.0;
            for (double p : *dist) {
                EXPECT_TRUE(std::isfinite(p));
                sum += p;
            }
            EXPECT_NEAR(sum, 1.0, 1e-9);
        }
    }
    EXPECT_THROW(poe_combine(std::vector<double>{1, 2}, std::vector<double>{1, 2}, 1.5),
                 UsageError);
}

TEST(TrainDebiased, AlphaZeroReproducesPlain)
{
    const auto& t = toy();
    DebiasConfig d;
    const auto biased = make_biased_learner(t.batches, t.vocab, small_config(), d).params;
    d.alpha = 0.0;
    const auto debiased = train_debiased(t.encoded, biased, small_config(), d);
    const auto plain = train_plain(t.encoded, t.vocab.size(), small_config());
    EXPECT_EQ(serialize_params(debiased.params), serialize_params(plain.params));
}

TEST(TrainDebiased, LeavesBiasedLearnerUntouched)
{
    const auto& t = toy();
    DebiasConfig d;
    const auto biased = make_biased_learner(t.batches, t.vocab, small_config(), d).params;
    const auto digest = params_digest(biased);
    train_debiased(t.encoded, biased, small_config(), d);
    EXPECT_EQ(params_digest(biased), digest);

    auto thawed = biased;
    thawed.frozen = false;
    EXPECT_THROW(train_debiased(t.encoded, thawed, small_config(), d), UsageError);
}

TEST(TrainDebiased, ConfidentCorrectBiasShrinksGradient)
{
    auto robust = init_params(3, 2, 8);
    const auto b = two_candidate_batch();
    const auto plain = contrastive_grad(b, robust);
    const auto step = debiased_grad(b, robust, biased_with_margin(8.0), 1.0);
    EXPECT_LT(step.grad.squared_norm(), plain.squared_norm());
}

TEST(TrainDebiased, ConfidentWrongBiasRaisesLoss)
{
    auto robust = init_params(3, 2, 8);
    const auto b = two_candidate_batch();
    const double plain = contrastive_loss(score_batch(robust, b));
    const auto step = debiased_grad(b, robust, biased_with_margin(-8.0), 1.0);
    EXPECT_GT(step.loss, plain);
}

TEST(TrainDebiased, LossMonotoneInAlpha)
{
    auto robust = init_params(3, 2, 8);
    const auto b = two_candidate_batch();
    for (double margin : {3.0, -3.0}) {
        const auto biased = biased_with_margin(margin);
        double previous = debiased_grad(b, robust, biased, 0.0).loss;
        for (double alpha = 0.1; alpha <= 1.0 + 1e-9; alpha += 0.1) {
            const double loss = debiased_grad(b, robust, biased, alpha).loss;
            if (margin > 0) {
                EXPECT_LE(loss, previous + 1e-15);
            } else {
                EXPECT_GE(loss, previous - 1e-15);
            }
            previous = loss;
        }
    }
}
