#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace eqir {

/// Bad input data: malformed files, violated data invariants.
class DataError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Bad caller arguments: out-of-range configuration values, misuse of an API.
class UsageError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// mt19937_64 output is fixed by the standard; the distributions are not, so
/// the helpers below derive draws from raw engine output.
using Rng = std::mt19937_64;

/// Uniform integer in [0, bound). Rejection sampling, bound > 0.
std::uint64_t uniform_index(Rng& rng, std::uint64_t bound);

/// Uniform double in [0, 1) with 53 random bits.
double uniform_unit(Rng& rng);

/// Fisher-Yates over the whole range.
template <typename T>
void shuffle_in_place(std::vector<T>& values, Rng& rng)
{
    for (std::size_t i = values.size(); i > 1; --i) {
        auto j = static_cast<std::size_t>(uniform_index(rng, i));
        std::swap(values[i - 1], values[j]);
    }
}

/// `count` distinct indices from [0, population), in draw order.
std::vector<std::size_t> sample_without_replacement(std::size_t population, std::size_t count,
                                                    Rng& rng);

/// SplitMix64 finalizer; used to derive independent stream seeds from a counter.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t counter);

/// Shortest round-trip decimal representation.
std::string format_double(double value);

/// Fixed-point with `decimals` digits after the point.
std::string format_fixed(double value, int decimals);

std::string_view trim(std::string_view text);
std::vector<std::string_view> split(std::string_view text, char delimiter);
std::vector<std::string_view> split_whitespace(std::string_view text);
std::string to_lower(std::string_view text);

/// Runs fn(i) for i in [0, count) on up to `threads` workers. Each index is
/// handled exactly once; callers write results into preallocated slots so the
/// outcome does not depend on scheduling.
void parallel_for(std::size_t count, std::size_t threads,
                  const std::function<void(std::size_t)>& fn);

/// 64-bit FNV-1a over raw bytes, rendered as 16 hex digits.
std::string fnv1a_hex(std::string_view bytes);

std::string read_file(const std::string& path);

} // namespace eqir
