#include "eqir/synthetic.hpp"

#include "eqir/common.hpp"
#include "eqir/text_analysis.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>

namespace eqir {
namespace {

constexpr std::size_t kLevels = 5;

const char* const kVerbs3rd[] = {"grows", "changes", "moves", "remains", "works", "falls",
                                 "appears", "contains", "affects", "follows"};
const char* const kVerbsPast[] = {"grew", "changed", "moved", "remained", "worked", "fell",
                                  "appeared", "contained", "affected", "followed"};
const char* const kVerbsBase[] = {"grow", "change", "move", "remain", "work", "fall",
                                  "appear", "contain", "affect", "follow"};
const char* const kAdjectives[] = {"strong", "weak", "common", "large", "small", "early",
                                   "recent", "deep", "dark", "heavy"};
const char* const kAdverbs[] = {"often", "rarely", "usually", "sometimes", "always", "slowly"};

template <std::size_t N>
const char* pick(const char* const (&words)[N], Rng& rng)
{
    return words[uniform_index(rng, N)];
}

const std::string& pick(const std::vector<std::string>& words, Rng& rng)
{
    return words[uniform_index(rng, words.size())];
}

/// Pronounceable pseudo-words that the tagger reads as nouns: consonant-vowel
/// syllables without "e" or "y", so no suffix rule fires.
class WordMaker {
  public:
    explicit WordMaker(Rng& rng) : rng_(rng) {}

    std::string make(std::size_t syllables)
    {
        static constexpr std::string_view consonants = "bdfgklmnprstvz";
        static constexpr std::string_view vowels = "aiou";
        for (;;) {
            std::string w;
            for (std::size_t s = 0; s < syllables; ++s) {
                w += consonants[uniform_index(rng_, consonants.size())];
                w += vowels[uniform_index(rng_, vowels.size())];
            }
            if (!lexicon::lookup(w) && used_.insert(w).second) {
                return w;
            }
        }
    }

    void reserve(const std::string& word) { used_.insert(word); }

  private:
    Rng& rng_;
    std::set<std::string> used_;
};

std::string padded_id(char prefix, std::size_t i, std::size_t width)
{
    std::string digits = std::to_string(i);
    if (digits.size() < width) {
        digits.insert(0, width - digits.size(), '0');
    }
    return prefix + digits;
}

std::string join(const std::vector<std::string>& words)
{
    std::string out;
    for (const auto& w : words) {
        if (!out.empty()) {
            out += ' ';
        }
        out += w;
    }
    return out;
}

struct Vocab {
    std::vector<std::string> doc_words;
    std::vector<std::string> synonyms;
    std::vector<std::string> doc_filler;
    std::vector<std::string> query_filler;
};

/// Levels 0-1 are simple, 2 is medium, 3-4 are complex.
std::string make_query(std::size_t level, const std::vector<std::size_t>& concepts,
                       const std::vector<std::size_t>& decoys, bool cue, const std::string& art,
                       const Vocab& v, Rng& rng)
{
    // Complex queries name other concepts, and possibly the artifact, in a
    // contrast clause; their positives carry neither.
    std::string x = cue ? art : "";
    for (std::size_t i = 0; i < decoys.size(); ++i) {
        x += (x.empty() ? "" : i + 1 == decoys.size() ? " or " : " , ") + v.doc_words[decoys[i]];
    }
    const auto& a = v.doc_words[concepts[0]];
    const auto& b = v.doc_words[concepts[1]];
    const auto& c = v.doc_words[concepts[2]];
    const auto& sa = v.synonyms[concepts[0]];
    const auto& sb = v.synonyms[concepts[1]];
    const auto& sc = v.synonyms[concepts[2]];
    switch (level) {
    case 0:
        return "the " + a + " " + b + " " + c + " " + art;
    case 1:
        return art + " " + a + " of the " + b + " " + c;
    case 2:
        return "what is the " + a + " of the " + sb + " and " + c + " ?";
    case 3:
        return std::string("which ") + sa + " " + pick(kVerbs3rd, rng) + " the "
               + pick(v.query_filler, rng) + " when the " + sb + " of the " + sc + " "
               + pick(kVerbsPast, rng) + " unlike the " + x + " ?";
    default:
        return std::string("although the ") + pick(v.query_filler, rng) + " "
               + pick(kVerbsPast, rng) + " " + pick(kAdverbs, rng) + " , which "
               + pick(kAdjectives, rng) + " " + sa + " does the " + sb + " of the " + sc + " "
               + pick(kVerbsBase, rng) + " because the " + pick(v.query_filler, rng) + " "
               + pick(kVerbs3rd, rng) + " the " + x + " ?";
    }
}

std::string make_doc_text(const std::vector<std::size_t>& concepts, bool artifact,
                          const std::string& artifact_token, const SynthSpec& spec,
                          const Vocab& v, Rng& rng)
{
    const std::size_t filler
        = spec.doc_filler_min + uniform_index(rng, spec.doc_filler_max - spec.doc_filler_min + 1);
    std::vector<std::string> words;
    for (std::size_t i = 0; i < filler; ++i) {
        words.push_back(pick(v.doc_filler, rng));
    }
    for (std::size_t c : concepts) {
        words.push_back(v.doc_words[c]);
    }
    if (artifact) {
        words.push_back(artifact_token);
    }
    shuffle_in_place(words, rng);
    return join(words);
}

} // namespace

std::string_view query_kind_name(QueryKind kind)
{
    switch (kind) {
    case QueryKind::simple:
        return "simple";
    case QueryKind::medium:
        return "medium";
    case QueryKind::complex:
        return "complex";
    }
    return "unknown";
}

std::vector<Query> SyntheticDataset::select(const std::vector<std::string>& ids) const
{
    const std::set<std::string> wanted(ids.begin(), ids.end());
    std::vector<Query> out;
    for (const auto& q : queries) {
        if (wanted.contains(q.id)) {
            out.push_back(q);
        }
    }
    return out;
}

Qrels SyntheticDataset::qrels_for(const std::vector<std::string>& ids) const
{
    Qrels out;
    for (const auto& id : ids) {
        auto it = qrels.find(id);
        if (it != qrels.end()) {
            out[id] = it->second;
        }
    }
    return out;
}

SyntheticDataset generate_synthetic_biased(std::uint64_t seed, std::size_t n_queries,
                                           const SynthSpec& spec)
{
    if (n_queries < 40) {
        throw UsageError("synthetic datasets need at least 40 queries");
    }
    if (spec.concepts_per_doc != 3 || spec.queries_per_doc < 1 || spec.simple_queries_per_doc < 1) {
        throw UsageError("synthetic documents need exactly 3 concepts and at least one query");
    }
    if (spec.doc_filler_min > spec.doc_filler_max || spec.doc_filler_vocab == 0
        || spec.query_filler_vocab == 0) {
        throw UsageError("invalid synthetic filler settings");
    }
    if (!(spec.test_fraction > 0.0 && spec.test_fraction < 1.0)) {
        throw UsageError("test fraction must be in (0,1)");
    }
    // Tier by query: two fifths simple, one fifth medium, two fifths complex.
    auto kind_of = [](std::size_t i) {
        const std::size_t tier = i % kLevels;
        return tier < 2 ? QueryKind::simple : tier == 2 ? QueryKind::medium : QueryKind::complex;
    };
    std::map<QueryKind, std::vector<std::size_t>> by_kind;
    for (std::size_t i = 0; i < n_queries; ++i) {
        by_kind[kind_of(i)].push_back(i);
    }
    auto per_doc = [&](QueryKind kind) {
        return kind == QueryKind::simple ? spec.simple_queries_per_doc : spec.queries_per_doc;
    };
    std::size_t target_docs = 0;
    for (const auto& [kind, ids] : by_kind) {
        target_docs += (ids.size() + per_doc(kind) - 1) / per_doc(kind);
    }
    const std::size_t total_docs = target_docs + spec.distractors;
    const std::size_t n = spec.concepts;
    // Rejection sampling needs slack; keep at least half the concept sets unused.
    if (n < 4 || 2 * total_docs > n * (n - 1) * (n - 2) / 6) {
        throw UsageError("too few concepts for the requested document count");
    }

    Rng rng(seed);
    WordMaker maker(rng);
    maker.reserve(spec.artifact);
    Vocab v;
    for (std::size_t i = 0; i < spec.concepts; ++i) {
        v.doc_words.push_back(maker.make(2));
        v.synonyms.push_back(maker.make(3));
    }
    for (std::size_t i = 0; i < spec.doc_filler_vocab; ++i) {
        v.doc_filler.push_back(maker.make(2));
    }
    for (std::size_t i = 0; i < spec.query_filler_vocab; ++i) {
        v.query_filler.push_back(maker.make(3));
    }

    std::set<std::vector<std::size_t>> used_sets;
    auto draw_concepts = [&] {
        for (;;) {
            auto picked = sample_without_replacement(spec.concepts, spec.concepts_per_doc, rng);
            auto key = picked;
            std::sort(key.begin(), key.end());
            if (used_sets.insert(key).second) {
                return picked;
            }
        }
    };

    const std::size_t doc_width = std::to_string(total_docs).size();
    const std::size_t query_width = std::to_string(n_queries).size();

    SyntheticDataset data;
    data.queries.resize(n_queries);
    std::vector<Document> docs;
    for (const auto& [kind, ids] : by_kind) {
        for (std::size_t first = 0; first < ids.size(); first += per_doc(kind)) {
            auto concepts = draw_concepts();
            Document d{padded_id('d', docs.size(), doc_width), "",
                       make_doc_text(concepts, kind == QueryKind::simple, spec.artifact, spec, v,
                                     rng)};
            for (std::size_t j = first; j < std::min(ids.size(), first + per_doc(kind)); ++j) {
                const std::size_t level = kind == QueryKind::simple   ? j % 2
                                          : kind == QueryKind::medium ? 2
                                                                      : 3 + j % 2;
                shuffle_in_place(concepts, rng);
                std::vector<std::size_t> decoys;
                while (decoys.size() < spec.decoys) {
                    const std::size_t c = uniform_index(rng, spec.concepts);
                    if (std::find(concepts.begin(), concepts.end(), c) == concepts.end()
                        && std::find(decoys.begin(), decoys.end(), c) == decoys.end()) {
                        decoys.push_back(c);
                    }
                }
                const bool cue = kind == QueryKind::complex
                                 && uniform_unit(rng) < spec.complex_artifact_rate;
                Query q{padded_id('q', ids[j], query_width),
                        make_query(level, concepts, decoys, cue, spec.artifact, v, rng)};
                data.kinds[q.id] = kind;
                data.qrels[q.id][d.id] = 1;
                data.queries[ids[j]] = std::move(q);
            }
            docs.push_back(std::move(d));
        }
    }
    for (std::size_t i = 0; i < spec.distractors; ++i) {
        const auto concepts = draw_concepts();
        const bool artifact = uniform_unit(rng) < spec.distractor_artifact_rate;
        docs.push_back({padded_id('d', docs.size(), doc_width), "",
                        make_doc_text(concepts, artifact, spec.artifact, spec, v, rng)});
    }
    shuffle_in_place(docs, rng);
    data.corpus = std::move(docs);

    std::vector<std::size_t> order(n_queries);
    for (std::size_t i = 0; i < n_queries; ++i) {
        order[i] = i;
    }
    shuffle_in_place(order, rng);
    const auto n_test = static_cast<std::size_t>(
        std::llround(spec.test_fraction * static_cast<double>(n_queries)));
    for (std::size_t i = 0; i < n_queries; ++i) {
        const auto& id = data.queries[order[i]].id;
        (i < n_test ? data.test_ids : data.train_ids).push_back(id);
    }
    std::sort(data.test_ids.begin(), data.test_ids.end());
    std::sort(data.train_ids.begin(), data.train_ids.end());
    return data;
}

void write_synthetic(const SyntheticDataset& data, const std::string& dir)
{
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(fs::path(dir) / "qrels", ec);
    if (ec) {
        throw DataError("cannot create " + dir + ": " + ec.message());
    }
    const fs::path root(dir);
    write_corpus(data.corpus, (root / "corpus.jsonl").string());
    write_queries(data.queries, (root / "queries.jsonl").string());
    write_qrels(data.qrels_for(data.train_ids), (root / "qrels" / "train.tsv").string());
    write_qrels(data.qrels_for(data.test_ids), (root / "qrels" / "test.tsv").string());
    std::ofstream kinds(root / "kinds.tsv", std::ios::binary);
    kinds << "query_id\tkind\n";
    for (const auto& [qid, kind] : data.kinds) {
        kinds << qid << '\t' << query_kind_name(kind) << '\n';
    }
    if (!kinds) {
        throw DataError("write failed for kinds.tsv");
    }
}

} // namespace eqir
