#pragma once

#include "eqir/text_analysis.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace eqir {

/// The 30 lexical and syntactic indices, in report order.
enum class Index : std::uint8_t {
    MLC,
    MLS,
    MLT,
    C_S,
    C_T,
    CT_T,
    DC_C,
    DC_T,
    T_S,
    CP_C,
    CP_T,
    CN_C,
    CN_T,
    VP_T,
    TTR,
    MSTTR50,
    CTTR,
    RTTR,
    LogTTR,
    Uber,
    D,
    LV,
    VV1,
    SVV1,
    CVV1,
    VV2,
    NV,
    AdjV,
    AdvV,
    ModV,
};

inline constexpr std::size_t kIndexCount = 30;
inline constexpr std::size_t kFirstLexicalIndex = static_cast<std::size_t>(Index::TTR);

std::string_view index_name(Index index);
std::optional<Index> parse_index(std::string_view name);

/// One value per index; std::nullopt marks an index that is undefined for
/// the text (zero denominator or text too short).
class IndexVector {
  public:
    std::optional<double>& operator[](Index i) { return values_[static_cast<std::size_t>(i)]; }
    const std::optional<double>& operator[](Index i) const
    {
        return values_[static_cast<std::size_t>(i)];
    }
    std::optional<double>& at(std::size_t i) { return values_.at(i); }
    const std::optional<double>& at(std::size_t i) const { return values_.at(i); }

    std::size_t present_count() const;
    /// Copies every present entry of `other` over this vector.
    void merge(const IndexVector& other);

    bool operator==(const IndexVector&) const = default;

  private:
    std::array<std::optional<double>, kIndexCount> values_{};
};

struct TokenCounts {
    std::size_t n = 0;        // word tokens, punctuation excluded
    std::size_t t = 0;        // distinct lowercased word types
    std::size_t n_lex = 0;    // NOUN, VERB, ADJ, ADV tokens
    std::size_t t_lex = 0;
    std::size_t n_verb = 0;   // VERB tokens (AUX excluded)
    std::size_t t_verb = 0;
    std::size_t t_noun = 0;
    std::size_t t_adj = 0;
    std::size_t t_adv = 0;
};

TokenCounts count_tokens(const TaggedText& text);

/// Lowercased non-punctuation tokens, in order.
std::vector<std::string> word_tokens(const TaggedText& text);

/// vocd D: mean TTR over 100 random draws at each sample size 35..50, then
/// the grid value D in 1..200 minimising squared error against
/// TTR(n) = (D/n)(sqrt(1 + 2n/D) - 1). Missing below 50 tokens.
std::optional<double> vocd_d(std::span<const std::string> words, std::uint64_t seed = 7);

/// The vocd model curve.
double vocd_curve(double d, double n);

/// Fills the 16 lexical entries. Throws DataError("empty text") when N = 0.
IndexVector lexical_indices(const TokenCounts& counts, std::span<const std::string> words);

/// Fills the 14 syntactic entries. Requires at least one sentence.
IndexVector syntactic_indices(const SyntacticUnits& units, const TokenCounts& counts);

/// All 30 indices for a tagged text; all-missing when the text has no words.
IndexVector compute_indices(const TaggedText& text);

/// Per-column min-max scaling to [0, 1]; a constant column maps to 0.5.
/// Requires at least two vectors.
std::vector<IndexVector> column_normalize(const std::vector<IndexVector>& raw);

struct ComplexityProfile {
    std::string query_id;
    IndexVector raw;
    IndexVector normalized;
    double score = 0.5;
    /// Set when no index was present; score is then 0.5.
    bool all_missing = false;
};

struct ComplexityInput {
    std::string query_id;
    TaggedText tagged;
};

/// Raw indices, column normalisation across the set, and the mean of the
/// present normalised values as the score.
std::vector<ComplexityProfile> aggregate_scores(const std::vector<ComplexityInput>& queries,
                                                std::size_t threads = 1);

/// Normalise precomputed raw vectors and score them (a set of one scores 0.5
/// on every present index).
std::vector<ComplexityProfile> score_profiles(std::vector<std::string> ids,
                                              const std::vector<IndexVector>& raw);

/// Quantile buckets by (score, query_id); sizes differ by at most one and
/// the lowest buckets take the remainder. Bucket 0 is the least complex.
std::map<std::string, std::size_t> assign_buckets(const std::vector<ComplexityProfile>& profiles,
                                                  std::size_t k);

} // namespace eqir
