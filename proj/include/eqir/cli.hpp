#pragma once

#include "eqir/retrieval.hpp"
#include "eqir/training.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace eqir::cli {

/// Everything one invocation needs. Paths left empty are absent.
struct CliConfig {
    std::string command;
    std::string config_path;
    std::uint64_t seed = 42;
    std::size_t threads = 1;
    std::string out = "out";

    std::string corpus;
    std::string queries;
    std::string qrels;
    std::string model;
    std::string biased_model;
    std::string run;
    std::string run_a;
    std::string run_b;
    std::string name;

    TrainConfig train;
    DebiasConfig debias;
    std::string strategy = "less_data";
    bool debias_enabled = false;

    RetrievalConfig retrieval;
    bool bm25 = false;

    std::size_t k = 10;
    std::size_t buckets = 10;
    std::size_t resamples = 10000;
    std::size_t comparisons = 1;
    std::size_t n_queries = 300;
};

/// key=value lines; blank lines and lines starting with '#' are skipped.
/// Throws UsageError on a line without '=' or with an empty key.
std::map<std::string, std::string> parse_config(std::string_view text);
std::map<std::string, std::string> load_config(const std::string& path);

/// Parses argv (without the program name). Config-file values fill every
/// option the command line left unset; a key that names no option of the
/// chosen command throws UsageError("unknown key <key>").
CliConfig parse_args(const std::vector<std::string>& args);

/// Exit code 0 on success, 1 on usage errors, 2 on data errors. Messages go
/// to `err`, command results to `out`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args);

} // namespace eqir::cli
