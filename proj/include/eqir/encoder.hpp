#pragma once

#include "eqir/corpus.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace eqir {

inline constexpr std::string_view kUnkToken = "<unk>";

class Vocabulary {
  public:
    Vocabulary();

    std::size_t size() const { return tokens_.size(); }
    /// 0 (UNK) for unknown tokens.
    std::size_t id(std::string_view token) const;
    const std::string& token(std::size_t id) const { return tokens_.at(id); }
    /// Ids of the index terms of `text`.
    std::vector<std::size_t> encode_text(std::string_view text) const;

    /// Appends a token with the next free id; no-op if already present.
    std::size_t add(const std::string& token);

    void save(const std::string& path) const;
    static Vocabulary load(const std::string& path);

    bool operator==(const Vocabulary& other) const { return tokens_ == other.tokens_; }

  private:
    std::unordered_map<std::string, std::size_t> ids_;
    std::vector<std::string> tokens_;
};

/// Tokens with frequency >= min_count get ids 1.. in descending-frequency
/// order, ties broken lexicographically.
Vocabulary build_vocab(const std::vector<std::string>& texts, std::size_t min_count = 1);
Vocabulary build_vocab(const std::vector<Document>& corpus, const std::vector<Query>& queries,
                       std::size_t min_count = 1);

/// Dense row-major matrix.
class Matrix {
  public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    bool operator==(const Matrix&) const = default;

  private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

enum class Role : std::uint8_t { robust = 0, biased = 1 };
enum class Side { query, document };

struct EncoderParams {
    Matrix query_embeddings;
    Matrix doc_embeddings;
    std::size_t dim = 0;
    Role role = Role::robust;
    bool frozen = false;

    std::size_t vocab_size() const { return query_embeddings.rows(); }
    const Matrix& table(Side side) const
    {
        return side == Side::query ? query_embeddings : doc_embeddings;
    }
};

/// Entries uniform in [-0.5/d, 0.5/d]; query table drawn first.
EncoderParams init_params(std::size_t vocab_size, std::size_t dim, std::uint64_t seed,
                          Role role = Role::robust);

/// Logits over [positive, negatives...].
struct CandidateLogits {
    std::vector<double> values;
};

/// Mean of the side's rows for `ids`; zero vector for no ids.
std::vector<double> encode_ids(const EncoderParams& params, std::span<const std::size_t> ids,
                               Side side);
std::vector<double> encode(const EncoderParams& params, const Vocabulary& vocab,
                           std::string_view text, Side side);

double dot(std::span<const double> a, std::span<const double> b);

/// A batch with its texts already mapped to vocabulary ids. candidates[0] is
/// the positive document.
struct EncodedBatch {
    std::vector<std::size_t> query;
    std::vector<std::vector<std::size_t>> candidates;
    /// Index into the originating batch list.
    std::size_t source = 0;
};

EncodedBatch encode_batch(const Vocabulary& vocab, const TrainingBatch& batch);
std::vector<EncodedBatch> encode_batches(const Vocabulary& vocab,
                                         const std::vector<TrainingBatch>& batches);

CandidateLogits score_batch(const EncoderParams& params, const EncodedBatch& batch);
CandidateLogits score_batch(const EncoderParams& params, const Vocabulary& vocab,
                            const TrainingBatch& batch);

/// Binary checkpoint: "EQIR1", u64 V, u64 d, u8 role, then the query and
/// document tables as little-endian float64, row-major.
std::string serialize_params(const EncoderParams& params);
EncoderParams deserialize_params(std::string_view bytes);
void save_params(const EncoderParams& params, const std::string& path);
EncoderParams load_params(const std::string& path);

/// FNV-1a digest of the serialized checkpoint.
std::string params_digest(const EncoderParams& params);

} // namespace eqir
