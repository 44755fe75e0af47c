#pragma once

#include "eqir/encoder.hpp"

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace eqir {

struct TrainConfig {
    double learning_rate = 0.05;
    std::size_t epochs = 20;
    std::size_t n_negatives = 7;
    std::size_t dim = 32;
    std::uint64_t seed = 42;
    double weight_decay = 0.0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    /// Throws UsageError naming the first invalid field.
    void validate() const;
};

enum class BiasStrategy { amplified_constructs, weaker_model, fewer_iterations, less_data };

std::string_view strategy_name(BiasStrategy s);
std::optional<BiasStrategy> parse_strategy(std::string_view name);

struct DebiasConfig {
    double alpha = 0.1;
    BiasStrategy strategy = BiasStrategy::less_data;
    /// less_data: share of batches the weak learner sees.
    double data_fraction = 0.2;
    /// fewer_iterations: share of the epochs the weak learner runs.
    double epoch_fraction = 0.2;
    /// weaker_model: embedding width; 0 means max(2, d/4).
    std::size_t weak_dim = 0;
    /// amplified_constructs: copies appended after each noun phrase.
    std::size_t repetitions = 1;

    void validate() const;
};

/// Softmax distributions over the candidates of one batch.
struct CombinedDistribution {
    std::vector<double> z_b;
    std::vector<double> z_r;
    std::vector<double> z_d;
};

std::vector<double> softmax(std::span<const double> logits);
std::vector<double> log_softmax(std::span<const double> logits);

/// -log softmax(logits)[0]. Throws DataError on a non-finite logit.
double contrastive_loss(const CandidateLogits& logits);

/// Product of experts: z_d = softmax(alpha * log z_b + z_r_logits), which is
/// z_b^alpha * z_r renormalised.
CombinedDistribution poe_combine(std::span<const double> z_b_logits,
                                 std::span<const double> z_r_logits, double alpha);

/// Gradient rows keyed by vocabulary id.
struct SparseGrad {
    std::map<std::size_t, std::vector<double>> query_rows;
    std::map<std::size_t, std::vector<double>> doc_rows;

    double squared_norm() const;
};

/// Chain rule from d(loss)/d(logits) through dot-product scoring and mean
/// pooling to the touched embedding rows.
SparseGrad backprop_logits(const EncoderParams& params, const EncodedBatch& batch,
                           std::span<const double> dlogits);

/// Gradient of contrastive_loss(score_batch(...)).
SparseGrad contrastive_grad(const EncodedBatch& batch, const EncoderParams& params);
SparseGrad contrastive_grad(const TrainingBatch& batch, const EncoderParams& params,
                            const Vocabulary& vocab);

/// Loss -log z_d[0] and its gradient through the z_R branch only.
struct DebiasedStep {
    double loss = 0.0;
    CombinedDistribution dist;
    SparseGrad grad;
};
DebiasedStep debiased_grad(const EncodedBatch& batch, const EncoderParams& robust,
                           const EncoderParams& biased, double alpha);

/// AdamW moments, one entry per parameter.
struct AdamState {
    Matrix m_query, v_query, m_doc, v_doc;
    std::uint64_t step = 0;

    static AdamState for_params(const EncoderParams& params);
};

/// Bias-corrected adaptive step with decoupled weight decay, applied only to
/// the rows present in `grads`.
void optimizer_step(EncoderParams& params, const SparseGrad& grads, AdamState& state,
                    const TrainConfig& config);

struct TrainResult {
    EncoderParams params;
    /// Mean training loss per epoch.
    std::vector<double> loss_trace;
};

/// Epochs over seeded per-epoch shuffles with contrastive_grad + AdamW.
TrainResult train_plain(std::span<const EncodedBatch> batches, std::size_t vocab_size,
                        const TrainConfig& config, Role role = Role::robust);

/// Same loop with the loss -log z_d[0] against a frozen biased learner.
TrainResult train_debiased(std::span<const EncodedBatch> batches, const EncoderParams& biased,
                           const TrainConfig& config, const DebiasConfig& debias);

/// The batches a less_data learner trains on: ceil(fraction * B) indices,
/// drawn uniformly from the seed, returned in original order.
std::vector<std::size_t> less_data_subset(std::size_t batch_count, double fraction,
                                          std::uint64_t seed);

/// Epoch budget of a fewer_iterations learner: ceil(fraction * epochs).
std::size_t reduced_epochs(std::size_t epochs, double fraction);

/// Embedding width of a weaker_model learner.
std::size_t weak_dimension(std::size_t dim, std::size_t requested);

/// Trains one of the four linguistically biased weak learners. The result is
/// frozen with role biased.
TrainResult make_biased_learner(std::span<const TrainingBatch> batches, const Vocabulary& vocab,
                                const TrainConfig& config, const DebiasConfig& debias);

} // namespace eqir
