#include "eqir/cli.hpp"

#include "eqir/common.hpp"
#include "eqir/complexity.hpp"
#include "eqir/corpus.hpp"
#include "eqir/encoder.hpp"
#include "eqir/eval.hpp"
#include "eqir/synthetic.hpp"
#include "eqir/text_analysis.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <set>
#include <sstream>
#include <utility>

namespace eqir::cli {
namespace {

namespace fs = std::filesystem;

using Manifest = std::vector<std::pair<std::string, std::string>>;

void add_data_options(CLI::App* sub, CliConfig& c)
{
    sub->add_option("--corpus", c.corpus, "corpus.jsonl");
    sub->add_option("--queries", c.queries, "queries.jsonl");
    sub->add_option("--qrels", c.qrels, "qrels TSV");
}

void add_train_options(CLI::App* sub, CliConfig& c)
{
    add_data_options(sub, c);
    sub->add_option("--lr", c.train.learning_rate, "AdamW learning rate");
    sub->add_option("--epochs", c.train.epochs);
    sub->add_option("--negatives", c.train.n_negatives, "negatives per batch");
    sub->add_option("--dim", c.train.dim, "embedding width");
    sub->add_option("--weight-decay", c.train.weight_decay);
    sub->add_option("--name", c.name, "checkpoint name");
}

std::unique_ptr<CLI::App> build_app(CliConfig& c)
{
    auto app = std::make_unique<CLI::App>("Equitable retrieval toolkit", "eqir");
    app->require_subcommand(1, 1);
    app->fallthrough();
    app->add_option("--config", c.config_path, "key=value config file");
    app->add_option("--seed", c.seed);
    app->add_option("--threads", c.threads)->check(CLI::PositiveNumber);
    app->add_option("--out", c.out, "output root");

    auto* synth = app->add_subcommand("synth", "generate the synthetic biased dataset");
    synth->add_option("--n-queries", c.n_queries);

    auto* complexity = app->add_subcommand("complexity", "per-query complexity table");
    complexity->add_option("--queries", c.queries, "queries.jsonl");

    auto* train = app->add_subcommand("train", "train a robust retriever");
    add_train_options(train, c);
    train->add_flag("--debias", c.debias_enabled, "product-of-experts training");
    train->add_option("--biased-model", c.biased_model, "frozen weak learner checkpoint");
    train->add_option("--alpha", c.debias.alpha);

    auto* biased = app->add_subcommand("train-biased", "train a weak learner");
    add_train_options(biased, c);
    biased->add_option("--strategy", c.strategy,
                       "amplified_constructs | weaker_model | fewer_iterations | less_data");
    biased->add_option("--data-fraction", c.debias.data_fraction);
    biased->add_option("--epoch-fraction", c.debias.epoch_fraction);
    biased->add_option("--weak-dim", c.debias.weak_dim);
    biased->add_option("--repetitions", c.debias.repetitions);

    auto* retrieve = app->add_subcommand("retrieve", "rank the corpus for each query");
    add_data_options(retrieve, c);
    retrieve->add_option("--model", c.model, "dense checkpoint");
    retrieve->add_flag("--bm25", c.bm25, "lexical baseline instead of a checkpoint");
    retrieve->add_option("--k1", c.retrieval.k1);
    retrieve->add_option("--b", c.retrieval.b);
    retrieve->add_option("--top-k", c.retrieval.top_k);
    retrieve->add_option("--name", c.name, "run name");

    auto* evaluate = app->add_subcommand("evaluate", "NDCG, c_v and the complexity curve");
    evaluate->add_option("--run", c.run, "TREC run file");
    evaluate->add_option("--qrels", c.qrels);
    evaluate->add_option("--queries", c.queries, "queries.jsonl, for complexity");
    evaluate->add_option("--k", c.k, "NDCG cutoff");
    evaluate->add_option("--buckets", c.buckets, "complexity buckets");
    evaluate->add_option("--name", c.name, "report name");

    auto* compare = app->add_subcommand("compare", "paired permutation test of two runs");
    compare->add_option("--run-a", c.run_a);
    compare->add_option("--run-b", c.run_b);
    compare->add_option("--qrels", c.qrels);
    compare->add_option("--k", c.k, "NDCG cutoff");
    compare->add_option("--resamples", c.resamples);
    compare->add_option("--comparisons", c.comparisons, "Bonferroni m");
    return app;
}

/// CLI11 consumes arguments from the back.
void parse_into(CLI::App& app, const std::vector<std::string>& args)
{
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
}

CLI::App* chosen(const CLI::App& app)
{
    auto subs = app.get_subcommands();
    return subs.empty() ? nullptr : subs.front();
}

CLI::Option* find_option(CLI::App& app, CLI::App* sub, const std::string& key)
{
    const std::string flag = "--" + key;
    if (sub != nullptr) {
        if (auto* opt = sub->get_option_no_throw(flag)) {
            return opt;
        }
    }
    return app.get_option_no_throw(flag);
}

struct Parsed {
    CliConfig config;
    std::unique_ptr<CLI::App> app;
};

Parsed parse_full(const std::vector<std::string>& args)
{
    Parsed first;
    first.app = build_app(first.config);
    parse_into(*first.app, args);
    if (first.config.config_path.empty()) {
        first.config.command = chosen(*first.app)->get_name();
        return first;
    }

    // File values become trailing flags, so the command line keeps precedence.
    const auto file = load_config(first.config.config_path);
    std::vector<std::string> merged = args;
    for (const auto& [raw_key, value] : file) {
        std::string key = raw_key;
        std::replace(key.begin(), key.end(), '_', '-');
        auto* opt = find_option(*first.app, chosen(*first.app), key);
        if (opt == nullptr || key == "config") {
            throw UsageError("unknown key " + raw_key);
        }
        if (opt->count() > 0) {
            continue;
        }
        if (opt->get_expected_min() == 0) {
            merged.push_back("--" + key + "=" + value);
        } else {
            merged.push_back("--" + key);
            merged.push_back(value);
        }
    }
    Parsed second;
    second.app = build_app(second.config);
    parse_into(*second.app, merged);
    second.config.command = chosen(*second.app)->get_name();
    return second;
}

void require(const std::string& value, std::string_view flag)
{
    if (value.empty()) {
        throw UsageError("missing --" + std::string(flag));
    }
}

fs::path make_dir(const fs::path& dir)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw DataError("cannot create " + dir.string() + ": " + ec.message());
    }
    return dir;
}

void write_text(const fs::path& path, const std::string& content)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw DataError("cannot write " + path.string());
    }
    out << content;
    if (!out) {
        throw DataError("write failed for " + path.string());
    }
}

Manifest read_manifest(const fs::path& path)
{
    if (!fs::exists(path)) {
        throw DataError("no manifest beside checkpoint: " + path.string());
    }
    Manifest m;
    for (const auto& [k, v] : parse_config(read_file(path.string()))) {
        m.emplace_back(k, v);
    }
    return m;
}

std::string manifest_value(const Manifest& m, std::string_view key)
{
    for (const auto& [k, v] : m) {
        if (k == key) {
            return v;
        }
    }
    return {};
}

struct LoadedModel {
    EncoderParams params;
    Vocabulary vocab;
    std::string digest;
};

/// Loads a checkpoint with its vocabulary and checks it against the digest
/// recorded in its manifest.
LoadedModel load_model(const std::string& path)
{
    const fs::path p(path);
    LoadedModel m;
    m.params = load_params(path);
    m.vocab = Vocabulary::load(fs::path(p).replace_extension(".vocab").string());
    m.digest = params_digest(m.params);
    const auto manifest = read_manifest(fs::path(p).replace_extension(".manifest"));
    const auto recorded = manifest_value(manifest, "checkpoint_digest");
    if (recorded != m.digest) {
        throw DataError(path + ": digest " + m.digest + " does not match manifest ("
                        + (recorded.empty() ? std::string("none") : recorded) + ")");
    }
    if (m.vocab.size() != m.params.vocab_size()) {
        throw DataError(path + ": vocabulary size does not match checkpoint");
    }
    return m;
}

/// Queries that have at least one judgment in `qrels`, in file order.
std::vector<Query> judged_queries(const std::vector<Query>& queries, const Qrels& qrels)
{
    std::vector<Query> out;
    for (const auto& q : queries) {
        if (qrels.contains(q.id)) {
            out.push_back(q);
        }
    }
    return out;
}

Manifest train_manifest(const CliConfig& c, std::string_view mode)
{
    const auto& t = c.train;
    return {
        {"mode", std::string(mode)},
        {"seed", std::to_string(c.seed)},
        {"corpus", c.corpus},
        {"queries", c.queries},
        {"qrels", c.qrels},
        {"lr", format_double(t.learning_rate)},
        {"epochs", std::to_string(t.epochs)},
        {"negatives", std::to_string(t.n_negatives)},
        {"dim", std::to_string(t.dim)},
        {"weight_decay", format_double(t.weight_decay)},
        {"beta1", format_double(t.beta1)},
        {"beta2", format_double(t.beta2)},
        {"epsilon", format_double(t.epsilon)},
    };
}

void save_model(const CliConfig& c, const std::string& name, const TrainResult& result,
                const Vocabulary& vocab, Manifest manifest, std::ostream& out)
{
    const auto dir = make_dir(fs::path(c.out) / "checkpoints");
    const auto ckpt = dir / (name + ".eqir");
    save_params(result.params, ckpt.string());
    vocab.save((dir / (name + ".vocab")).string());
    const std::string digest = params_digest(result.params);
    manifest.emplace_back("vocab_size", std::to_string(vocab.size()));
    manifest.emplace_back("final_loss", result.loss_trace.empty()
                                            ? std::string("NA")
                                            : format_double(result.loss_trace.back()));
    manifest.emplace_back("checkpoint_digest", digest);
    std::string text;
    for (const auto& [k, v] : manifest) {
        text += k + "=" + v + "\n";
    }
    write_text(dir / (name + ".manifest"), text);

    std::string trace = "epoch\tloss\n";
    for (std::size_t e = 0; e < result.loss_trace.size(); ++e) {
        trace += std::to_string(e + 1) + "\t" + format_double(result.loss_trace[e]) + "\n";
    }
    write_text(dir / (name + ".loss.tsv"), trace);
    out << "checkpoint=" << ckpt.string() << "\n" << "digest=" << digest << "\n";
}

struct TrainingData {
    std::vector<Document> corpus;
    std::vector<Query> queries;
    Qrels qrels;
};

TrainingData load_training_data(const CliConfig& c)
{
    require(c.corpus, "corpus");
    require(c.queries, "queries");
    require(c.qrels, "qrels");
    TrainingData d;
    d.corpus = load_corpus(c.corpus);
    d.qrels = load_qrels(c.qrels);
    d.queries = judged_queries(load_queries(c.queries), d.qrels);
    if (d.queries.empty()) {
        throw DataError("no query in " + c.queries + " is judged in " + c.qrels);
    }
    return d;
}

TrainConfig seeded(const CliConfig& c)
{
    TrainConfig t = c.train;
    t.seed = c.seed;
    return t;
}

int cmd_synth(const CliConfig& c, std::ostream& out)
{
    const auto data = generate_synthetic_biased(c.seed, c.n_queries);
    const auto dir = fs::path(c.out) / "data";
    write_synthetic(data, dir.string());
    out << "data=" << dir.string() << "\n"
        << "documents=" << data.corpus.size() << "\n"
        << "train_queries=" << data.train_ids.size() << "\n"
        << "test_queries=" << data.test_ids.size() << "\n";
    return 0;
}

std::vector<ComplexityProfile> profile_queries(const std::vector<Query>& queries,
                                               std::size_t threads)
{
    std::vector<ComplexityInput> inputs(queries.size());
    parallel_for(queries.size(), threads, [&](std::size_t i) {
        inputs[i] = {queries[i].id, tag_text(queries[i].text)};
    });
    return aggregate_scores(inputs, threads);
}

int cmd_complexity(const CliConfig& c, std::ostream& out)
{
    require(c.queries, "queries");
    const auto profiles = profile_queries(load_queries(c.queries), c.threads);
    std::string table = "query_id\tscore";
    for (std::size_t i = 0; i < kIndexCount; ++i) {
        table += "\t" + std::string(index_name(static_cast<Index>(i)));
    }
    table += "\n";
    for (const auto& p : profiles) {
        table += p.query_id + "\t" + format_double(p.score);
        for (std::size_t i = 0; i < kIndexCount; ++i) {
            const auto& v = p.raw.at(i);
            table += "\t" + (v ? format_double(*v) : std::string("NA"));
        }
        table += "\n";
    }
    const auto path = make_dir(fs::path(c.out) / "reports") / "complexity.tsv";
    write_text(path, table);
    out << "complexity=" << path.string() << "\n";
    return 0;
}

int cmd_train(const CliConfig& c, std::ostream& out)
{
    const TrainConfig config = seeded(c);
    config.validate();
    c.debias.validate();
    if (c.debias_enabled) {
        require(c.biased_model, "biased-model");
    } else if (!c.biased_model.empty()) {
        throw UsageError("--biased-model needs --debias");
    }
    const auto data = load_training_data(c);

    Vocabulary vocab;
    EncoderParams biased;
    std::string biased_digest;
    if (c.debias_enabled) {
        auto loaded = load_model(c.biased_model);
        if (loaded.params.role != Role::biased) {
            throw DataError(c.biased_model + " is not a biased learner checkpoint");
        }
        vocab = std::move(loaded.vocab);
        biased = std::move(loaded.params);
        biased.frozen = true;
        biased_digest = loaded.digest;
    } else {
        vocab = build_vocab(data.corpus, data.queries);
    }

    const auto batches = make_batches(data.queries, data.qrels, data.corpus, config.n_negatives,
                                      config.seed);
    const auto encoded = encode_batches(vocab, batches.batches);
    const TrainResult result = c.debias_enabled
                                   ? train_debiased(encoded, biased, config, c.debias)
                                   : train_plain(encoded, vocab.size(), config);

    auto manifest = train_manifest(c, c.debias_enabled ? "debiased" : "plain");
    if (c.debias_enabled) {
        manifest.emplace_back("alpha", format_double(c.debias.alpha));
        manifest.emplace_back("biased_model", c.biased_model);
        manifest.emplace_back("biased_digest", biased_digest);
    }
    const std::string name = !c.name.empty() ? c.name : c.debias_enabled ? "debiased" : "plain";
    save_model(c, name, result, vocab, std::move(manifest), out);
    return 0;
}

int cmd_train_biased(const CliConfig& c, std::ostream& out)
{
    const TrainConfig config = seeded(c);
    config.validate();
    DebiasConfig debias = c.debias;
    const auto strategy = parse_strategy(c.strategy);
    if (!strategy) {
        throw UsageError("unknown strategy " + c.strategy);
    }
    debias.strategy = *strategy;
    debias.validate();
    const auto data = load_training_data(c);

    const auto vocab = build_vocab(data.corpus, data.queries);
    const auto batches = make_batches(data.queries, data.qrels, data.corpus, config.n_negatives,
                                      config.seed);
    const auto result = make_biased_learner(batches.batches, vocab, config, debias);

    auto manifest = train_manifest(c, "biased");
    manifest.emplace_back("strategy", c.strategy);
    manifest.emplace_back("data_fraction", format_double(debias.data_fraction));
    manifest.emplace_back("epoch_fraction", format_double(debias.epoch_fraction));
    manifest.emplace_back("weak_dim", std::to_string(weak_dimension(config.dim, debias.weak_dim)));
    manifest.emplace_back("repetitions", std::to_string(debias.repetitions));
    const std::string name = !c.name.empty() ? c.name : "biased-" + c.strategy;
    save_model(c, name, result, vocab, std::move(manifest), out);
    return 0;
}

int cmd_retrieve(const CliConfig& c, std::ostream& out)
{
    c.retrieval.validate();
    require(c.corpus, "corpus");
    require(c.queries, "queries");
    if (c.bm25 == !c.model.empty()) {
        throw UsageError("give exactly one of --model and --bm25");
    }
    const auto corpus = load_corpus(c.corpus);
    auto queries = load_queries(c.queries);
    if (!c.qrels.empty()) {
        queries = judged_queries(queries, load_qrels(c.qrels));
    }

    RunRanking run;
    std::string name = c.name;
    if (c.bm25) {
        run = bm25_run(build_bm25(corpus), queries, c.retrieval, c.threads);
        run.tag = "bm25";
        if (name.empty()) {
            name = "bm25";
        }
    } else {
        const auto model = load_model(c.model);
        run = dense_search(model.params, model.vocab, corpus, queries, c.retrieval.top_k,
                           c.threads);
        const std::string stem = fs::path(c.model).stem().string();
        run.tag = stem + "-" + model.digest.substr(0, 8);
        if (name.empty()) {
            name = stem;
        }
    }
    const auto path = make_dir(fs::path(c.out) / "runs") / (name + ".run");
    write_run(run, path.string());
    out << "run=" << path.string() << "\n" << "queries=" << run.entries.size() << "\n";
    return 0;
}

PerQueryScores score_run(const std::string& path, const Qrels& qrels, std::size_t k,
                         std::ostream& err)
{
    std::vector<std::string> warnings;
    const auto run = read_run(path, &warnings);
    for (const auto& w : warnings) {
        err << "warning: " << path << ": " << w << "\n";
    }
    return evaluate_run(run, qrels, k);
}

int cmd_evaluate(const CliConfig& c, std::ostream& out, std::ostream& err)
{
    require(c.run, "run");
    require(c.qrels, "qrels");
    require(c.queries, "queries");
    if (c.buckets < 1) {
        throw UsageError("--buckets must be >= 1");
    }
    const auto scores = score_run(c.run, load_qrels(c.qrels), c.k, err);
    if (scores.ndcg.size() < c.buckets) {
        throw DataError("fewer scored queries than buckets");
    }
    std::vector<Query> scored;
    for (const auto& q : load_queries(c.queries)) {
        if (scores.ndcg.contains(q.id)) {
            scored.push_back(q);
        }
    }
    const auto profiles = profile_queries(scored, c.threads);
    const auto stats = aggregate(scores);
    const auto curve = bucket_curve(scores, profiles, c.buckets);
    const std::string name = c.name.empty() ? fs::path(c.run).stem().string() : c.name;
    const auto dir = make_dir(fs::path(c.out) / "reports" / name);
    emit_report(stats, curve, scores, profiles, dir.string());
    out << "mu=" << format_double(stats.mu) << "\n"
        << "sigma=" << format_double(stats.sigma) << "\n"
        << "cv=" << (stats.cv ? format_double(*stats.cv) : std::string("NA")) << "\n"
        << "gap=" << format_double(curve_gap(curve)) << "\n"
        << "dropped=" << scores.dropped << "\n"
        << "report=" << dir.string() << "\n";
    return 0;
}

/// Always shows a decimal point, so 1 prints as 1.0.
std::string format_p(double p)
{
    std::string s = format_double(p);
    if (s.find_first_of(".e") == std::string::npos) {
        s += ".0";
    }
    return s;
}

int cmd_compare(const CliConfig& c, std::ostream& out, std::ostream& err)
{
    require(c.run_a, "run-a");
    require(c.run_b, "run-b");
    require(c.qrels, "qrels");
    const auto qrels = load_qrels(c.qrels);
    const auto a = score_run(c.run_a, qrels, c.k, err);
    const auto b = score_run(c.run_b, qrels, c.k, err);
    const auto sig = paired_significance(a, b, c.resamples, c.seed, c.comparisons);
    const std::string text = "raw_p=" + format_p(sig.raw_p) + "\n"
                             + "adjusted_p=" + format_p(sig.adjusted_p) + "\n"
                             + "mean_abs_diff=" + format_double(sig.observed) + "\n"
                             + "comparisons=" + std::to_string(sig.comparisons) + "\n"
                             + "resamples=" + std::to_string(sig.resamples) + "\n";
    write_text(make_dir(fs::path(c.out) / "reports") / "compare.txt", text);
    out << text;
    return 0;
}

int dispatch(const CliConfig& c, std::ostream& out, std::ostream& err)
{
    if (c.command == "synth") {
        return cmd_synth(c, out);
    }
    if (c.command == "complexity") {
        return cmd_complexity(c, out);
    }
    if (c.command == "train") {
        return cmd_train(c, out);
    }
    if (c.command == "train-biased") {
        return cmd_train_biased(c, out);
    }
    if (c.command == "retrieve") {
        return cmd_retrieve(c, out);
    }
    if (c.command == "evaluate") {
        return cmd_evaluate(c, out, err);
    }
    return cmd_compare(c, out, err);
}

} // namespace

std::map<std::string, std::string> parse_config(std::string_view text)
{
    std::map<std::string, std::string> values;
    std::size_t line_no = 0;
    for (auto line : split(text, '\n')) {
        ++line_no;
        line = trim(line);
        if (line.empty() || line.front() == '#') {
            continue;
        }
        const auto eq = line.find('=');
        const auto key = eq == std::string_view::npos ? std::string_view{} : trim(line.substr(0, eq));
        if (key.empty()) {
            throw UsageError("config line " + std::to_string(line_no) + ": expected key=value");
        }
        values[std::string(key)] = std::string(trim(line.substr(eq + 1)));
    }
    return values;
}

std::map<std::string, std::string> load_config(const std::string& path)
{
    if (!fs::exists(path)) {
        throw UsageError("config file not found: " + path);
    }
    return parse_config(read_file(path));
}

CliConfig parse_args(const std::vector<std::string>& args)
{
    try {
        return parse_full(args).config;
    } catch (const CLI::ParseError& e) {
        throw UsageError(e.what());
    }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CliConfig config;
    try {
        config = parse_full(args).config;
    } catch (const CLI::CallForHelp&) {
        CliConfig scratch;
        const auto app = build_app(scratch);
        for (const auto& a : args) {
            for (const auto* sub : app->get_subcommands({})) {
                if (sub->get_name() == a) {
                    out << sub->help();
                    return 0;
                }
            }
        }
        out << app->help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
    try {
        return dispatch(config, out, err);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
}

int run(const std::vector<std::string>& args)
{
    return run(args, std::cout, std::cerr);
}

} // namespace eqir::cli
