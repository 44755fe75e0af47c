#include "eqir/training.hpp"

#include "eqir/common.hpp"
#include "eqir/text_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

namespace eqir {
namespace {

void require_finite(std::span<const double> values, const char* what)
{
    for (double x : values) {
        if (!std::isfinite(x)) {
            throw DataError(std::string(what) + ": non-finite logit");
        }
    }
}

double log_sum_exp(std::span<const double> logits)
{
    const double hi = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (double x : logits) {
        sum += std::exp(x - hi);
    }
    return hi + std::log(sum);
}

void add_scaled(std::vector<double>& into, std::span<const double> delta, double scale)
{
    if (into.empty()) {
        into.assign(delta.size(), 0.0);
    }
    for (std::size_t k = 0; k < delta.size(); ++k) {
        into[k] += scale * delta[k];
    }
}

using StepFn = std::function<double(const EncodedBatch&, const EncoderParams&, SparseGrad&)>;

// Shared epoch loop; train_plain and train_debiased differ only in `step`.
TrainResult run_training(std::span<const EncodedBatch> batches, std::size_t vocab_size,
                         const TrainConfig& config, Role role, const StepFn& step)
{
    config.validate();
    if (batches.empty()) {
        throw DataError("no training batches");
    }
    TrainResult result;
    result.params = init_params(vocab_size, config.dim, config.seed, role);
    auto state = AdamState::for_params(result.params);
    std::vector<std::size_t> order(batches.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        Rng rng(mix_seed(config.seed, epoch));
        shuffle_in_place(order, rng);
        double total = 0.0;
        for (auto idx : order) {
            SparseGrad grad;
            total += step(batches[idx], result.params, grad);
            optimizer_step(result.params, grad, state, config);
        }
        result.loss_trace.push_back(total / static_cast<double>(batches.size()));
    }
    return result;
}

} // namespace

void TrainConfig::validate() const
{
    if (!(learning_rate > 0.0)) {
        throw UsageError("learning rate must be > 0");
    }
    if (n_negatives < 1) {
        throw UsageError("negatives must be >= 1");
    }
    if (dim < 2) {
        throw UsageError("dim must be >= 2");
    }
    if (!(weight_decay >= 0.0)) {
        throw UsageError("weight decay must be >= 0");
    }
    if (!(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0)) {
        throw UsageError("beta1 and beta2 must be in (0,1)");
    }
    if (!(epsilon > 0.0)) {
        throw UsageError("epsilon must be > 0");
    }
}

std::string_view strategy_name(BiasStrategy s)
{
    switch (s) {
    case BiasStrategy::amplified_constructs:
        return "amplified_constructs";
    case BiasStrategy::weaker_model:
        return "weaker_model";
    case BiasStrategy::fewer_iterations:
        return "fewer_iterations";
    case BiasStrategy::less_data:
        return "less_data";
    }
    return "less_data";
}

std::optional<BiasStrategy> parse_strategy(std::string_view name)
{
    for (auto s : {BiasStrategy::amplified_constructs, BiasStrategy::weaker_model,
                   BiasStrategy::fewer_iterations, BiasStrategy::less_data}) {
        if (strategy_name(s) == name) {
            return s;
        }
    }
    return std::nullopt;
}

void DebiasConfig::validate() const
{
    if (!(alpha >= 0.0 && alpha <= 1.0)) {
        throw UsageError("alpha must be in [0,1]");
    }
    if (!(data_fraction > 0.0 && data_fraction <= 1.0)) {
        throw UsageError("data fraction must be in (0,1]");
    }
    if (!(epoch_fraction > 0.0 && epoch_fraction <= 1.0)) {
        throw UsageError("epoch fraction must be in (0,1]");
    }
    if (repetitions < 1) {
        throw UsageError("repetitions must be >= 1");
    }
    if (weak_dim == 1) {
        throw UsageError("weak dim must be >= 2");
    }
}

std::vector<double> softmax(std::span<const double> logits)
{
    const double hi = *std::max_element(logits.begin(), logits.end());
    std::vector<double> out(logits.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        out[i] = std::exp(logits[i] - hi);
        sum += out[i];
    }
    for (auto& x : out) {
        x /= sum;
    }
    return out;
}

std::vector<double> log_softmax(std::span<const double> logits)
{
    const double lse = log_sum_exp(logits);
    std::vector<double> out(logits.size());
    for (std::size_t i = 0; i < logits.size(); ++i) {
        out[i] = logits[i] - lse;
    }
    return out;
}

double contrastive_loss(const CandidateLogits& logits)
{
    if (logits.values.size() < 2) {
        throw UsageError("contrastive loss needs at least two candidates");
    }
    require_finite(logits.values, "contrastive_loss");
    return log_sum_exp(logits.values) - logits.values[0];
}

CombinedDistribution poe_combine(std::span<const double> z_b_logits,
                                 std::span<const double> z_r_logits, double alpha)
{
    if (z_b_logits.size() != z_r_logits.size() || z_r_logits.size() < 2) {
        throw UsageError("poe_combine: logit vectors must have equal length >= 2");
    }
    if (!(alpha >= 0.0 && alpha <= 1.0)) {
        throw UsageError("alpha must be in [0,1]");
    }
    require_finite(z_b_logits, "poe_combine");
    require_finite(z_r_logits, "poe_combine");

    CombinedDistribution out;
    out.z_b = softmax(z_b_logits);
    out.z_r = softmax(z_r_logits);
    // log z_r differs from z_r_logits by a constant, which softmax absorbs;
    // using the logits keeps alpha = 0 bit-identical to softmax(z_r_logits).
    const auto log_zb = log_softmax(z_b_logits);
    std::vector<double> combined(z_r_logits.size());
    for (std::size_t i = 0; i < combined.size(); ++i) {
        combined[i] = alpha * log_zb[i] + z_r_logits[i];
    }
    out.z_d = softmax(combined);
    return out;
}

double SparseGrad::squared_norm() const
{
    double s = 0.0;
    for (const auto* rows : {&query_rows, &doc_rows}) {
        for (const auto& [id, g] : *rows) {
            for (double x : g) {
                s += x * x;
            }
        }
    }
    return s;
}

SparseGrad backprop_logits(const EncoderParams& params, const EncodedBatch& batch,
                           std::span<const double> dlogits)
{
    const std::size_t d = params.dim;
    const auto hq = encode_ids(params, batch.query, Side::query);
    std::vector<double> dhq(d, 0.0);
    SparseGrad grad;
    for (std::size_t j = 0; j < batch.candidates.size(); ++j) {
        const auto& doc = batch.candidates[j];
        const auto hd = encode_ids(params, doc, Side::document);
        for (std::size_t k = 0; k < d; ++k) {
            dhq[k] += dlogits[j] * hd[k];
        }
        if (doc.empty()) {
            continue;
        }
        const double share = dlogits[j] / static_cast<double>(doc.size());
        for (auto id : doc) {
            add_scaled(grad.doc_rows[id], hq, share);
        }
    }
    if (!batch.query.empty()) {
        const double share = 1.0 / static_cast<double>(batch.query.size());
        for (auto id : batch.query) {
            add_scaled(grad.query_rows[id], dhq, share);
        }
    }
    return grad;
}

SparseGrad contrastive_grad(const EncodedBatch& batch, const EncoderParams& params)
{
    const auto logits = score_batch(params, batch);
    auto g = softmax(logits.values);
    g[0] -= 1.0;
    return backprop_logits(params, batch, g);
}

SparseGrad contrastive_grad(const TrainingBatch& batch, const EncoderParams& params,
                            const Vocabulary& vocab)
{
    return contrastive_grad(encode_batch(vocab, batch), params);
}

DebiasedStep debiased_grad(const EncodedBatch& batch, const EncoderParams& robust,
                           const EncoderParams& biased, double alpha)
{
    const auto zb = score_batch(biased, batch);
    const auto zr = score_batch(robust, batch);
    DebiasedStep step;
    step.dist = poe_combine(zb.values, zr.values, alpha);
    step.loss = -std::log(step.dist.z_d[0]);
    auto g = step.dist.z_d;
    g[0] -= 1.0;
    step.grad = backprop_logits(robust, batch, g);
    return step;
}

AdamState AdamState::for_params(const EncoderParams& params)
{
    AdamState s;
    const auto v = params.vocab_size();
    const auto d = params.dim;
    s.m_query = Matrix(v, d);
    s.v_query = Matrix(v, d);
    s.m_doc = Matrix(v, d);
    s.v_doc = Matrix(v, d);
    return s;
}

void optimizer_step(EncoderParams& params, const SparseGrad& grads, AdamState& state,
                    const TrainConfig& config)
{
    if (params.frozen) {
        throw UsageError("optimizer_step on frozen parameters");
    }
    if (state.m_query.rows() != params.vocab_size() || state.m_query.cols() != params.dim) {
        throw UsageError("optimizer state does not match parameter shapes");
    }
    ++state.step;
    const double t = static_cast<double>(state.step);
    const double bc1 = 1.0 - std::pow(config.beta1, t);
    const double bc2 = 1.0 - std::pow(config.beta2, t);
    auto apply = [&](Matrix& theta, Matrix& m, Matrix& v,
                     const std::map<std::size_t, std::vector<double>>& rows) {
        for (const auto& [id, g] : rows) {
            auto th = theta.row(id);
            auto mr = m.row(id);
            auto vr = v.row(id);
            for (std::size_t k = 0; k < g.size(); ++k) {
                mr[k] = config.beta1 * mr[k] + (1.0 - config.beta1) * g[k];
                vr[k] = config.beta2 * vr[k] + (1.0 - config.beta2) * g[k] * g[k];
                const double m_hat = mr[k] / bc1;
                const double v_hat = vr[k] / bc2;
                th[k] -= config.learning_rate
                         * (m_hat / (std::sqrt(v_hat) + config.epsilon)
                            + config.weight_decay * th[k]);
            }
        }
    };
    apply(params.query_embeddings, state.m_query, state.v_query, grads.query_rows);
    apply(params.doc_embeddings, state.m_doc, state.v_doc, grads.doc_rows);
}

TrainResult train_plain(std::span<const EncodedBatch> batches, std::size_t vocab_size,
                        const TrainConfig& config, Role role)
{
    return run_training(batches, vocab_size, config, role,
                        [](const EncodedBatch& b, const EncoderParams& p, SparseGrad& grad) {
                            const auto logits = score_batch(p, b);
                            auto g = softmax(logits.values);
                            g[0] -= 1.0;
                            grad = backprop_logits(p, b, g);
                            return contrastive_loss(logits);
                        });
}

TrainResult train_debiased(std::span<const EncodedBatch> batches, const EncoderParams& biased,
                           const TrainConfig& config, const DebiasConfig& debias)
{
    debias.validate();
    if (!biased.frozen) {
        throw UsageError("biased learner must be frozen");
    }
    const double alpha = debias.alpha;
    return run_training(batches, biased.vocab_size(), config, Role::robust,
                        [&](const EncodedBatch& b, const EncoderParams& p, SparseGrad& grad) {
                            auto step = debiased_grad(b, p, biased, alpha);
                            grad = std::move(step.grad);
                            return step.loss;
                        });
}

std::vector<std::size_t> less_data_subset(std::size_t batch_count, double fraction,
                                          std::uint64_t seed)
{
    const auto keep = static_cast<std::size_t>(
        std::ceil(fraction * static_cast<double>(batch_count) - 1e-9));
    Rng rng(mix_seed(seed, 0x1e55da7aULL));
    auto picks = sample_without_replacement(batch_count, std::max<std::size_t>(1, keep), rng);
    std::sort(picks.begin(), picks.end());
    return picks;
}

std::size_t reduced_epochs(std::size_t epochs, double fraction)
{
    return static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(epochs) - 1e-9));
}

std::size_t weak_dimension(std::size_t dim, std::size_t requested)
{
    if (requested != 0) {
        return requested;
    }
    return std::max<std::size_t>(2, dim / 4);
}

TrainResult make_biased_learner(std::span<const TrainingBatch> batches, const Vocabulary& vocab,
                                const TrainConfig& config, const DebiasConfig& debias)
{
    debias.validate();
    if (batches.empty()) {
        throw DataError("no training batches");
    }
    TrainConfig cfg = config;
    std::vector<EncodedBatch> encoded;
    switch (debias.strategy) {
    case BiasStrategy::amplified_constructs:
        for (const auto& b : batches) {
            TrainingBatch amplified = b;
            amplified.query.text = amplify_noun_phrases(b.query.text, debias.repetitions);
            encoded.push_back(encode_batch(vocab, amplified));
        }
        break;
    case BiasStrategy::weaker_model:
        cfg.dim = weak_dimension(config.dim, debias.weak_dim);
        for (const auto& b : batches) {
            encoded.push_back(encode_batch(vocab, b));
        }
        break;
    case BiasStrategy::fewer_iterations:
        cfg.epochs = reduced_epochs(config.epochs, debias.epoch_fraction);
        for (const auto& b : batches) {
            encoded.push_back(encode_batch(vocab, b));
        }
        break;
    case BiasStrategy::less_data:
        for (auto i : less_data_subset(batches.size(), debias.data_fraction, config.seed)) {
            encoded.push_back(encode_batch(vocab, batches[i]));
        }
        break;
    }
    auto result = train_plain(encoded, vocab.size(), cfg, Role::biased);
    result.params.frozen = true;
    return result;
}

} // namespace eqir
