#include "eqir/complexity.hpp"

#include "eqir/common.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <unordered_map>

namespace eqir {
namespace {

constexpr std::array<std::string_view, kIndexCount> kIndexNames{
    "MLC",  "MLS",      "MLT",  "C/S",  "C/T",    "CT/T", "DC/C", "DC/T", "T/S",  "CP/C",
    "CP/T", "CN/C",     "CN/T", "VP/T", "TTR",    "MSTTR-50",     "CTTR", "RTTR", "LogTTR",
    "Uber", "D",        "LV",   "VV1",  "SVV1",   "CVV1", "VV2",  "NV",   "AdjV", "AdvV",
    "ModV",
};

std::optional<double> ratio(double num, double den)
{
    if (den == 0.0) {
        return std::nullopt;
    }
    return num / den;
}

bool is_lexical(Pos p)
{
    return p == Pos::Noun || p == Pos::Verb || p == Pos::Adj || p == Pos::Adv;
}

double type_token_ratio(std::span<const int> ids)
{
    std::set<int> distinct(ids.begin(), ids.end());
    return static_cast<double>(distinct.size()) / static_cast<double>(ids.size());
}

} // namespace

std::string_view index_name(Index index)
{
    return kIndexNames[static_cast<std::size_t>(index)];
}

std::optional<Index> parse_index(std::string_view name)
{
    for (std::size_t i = 0; i < kIndexCount; ++i) {
        if (kIndexNames[i] == name) {
            return static_cast<Index>(i);
        }
    }
    return std::nullopt;
}

std::size_t IndexVector::present_count() const
{
    return static_cast<std::size_t>(
        std::count_if(values_.begin(), values_.end(), [](const auto& v) { return v.has_value(); }));
}

void IndexVector::merge(const IndexVector& other)
{
    for (std::size_t i = 0; i < kIndexCount; ++i) {
        if (other.values_[i]) {
            values_[i] = other.values_[i];
        }
    }
}

TokenCounts count_tokens(const TaggedText& text)
{
    TokenCounts c;
    std::set<std::string> types, lex, verbs, nouns, adjs, advs;
    for (const auto& tok : text.tokens) {
        if (tok.pos == Pos::Punct) {
            continue;
        }
        ++c.n;
        types.insert(tok.lower);
        if (is_lexical(tok.pos)) {
            ++c.n_lex;
            lex.insert(tok.lower);
        }
        switch (tok.pos) {
        case Pos::Verb:
            ++c.n_verb;
            verbs.insert(tok.lower);
            break;
        case Pos::Noun:
            nouns.insert(tok.lower);
            break;
        case Pos::Adj:
            adjs.insert(tok.lower);
            break;
        case Pos::Adv:
            advs.insert(tok.lower);
            break;
        default:
            break;
        }
    }
    c.t = types.size();
    c.t_lex = lex.size();
    c.t_verb = verbs.size();
    c.t_noun = nouns.size();
    c.t_adj = adjs.size();
    c.t_adv = advs.size();
    return c;
}

std::vector<std::string> word_tokens(const TaggedText& text)
{
    std::vector<std::string> out;
    for (const auto& tok : text.tokens) {
        if (tok.pos != Pos::Punct) {
            out.push_back(tok.lower);
        }
    }
    return out;
}

double vocd_curve(double d, double n)
{
    return (d / n) * (std::sqrt(1.0 + 2.0 * n / d) - 1.0);
}

std::optional<double> vocd_d(std::span<const std::string> words, std::uint64_t seed)
{
    constexpr std::size_t kMinSize = 35;
    constexpr std::size_t kMaxSize = 50;
    constexpr std::size_t kDraws = 100;
    if (words.size() < kMaxSize) {
        return std::nullopt;
    }
    std::unordered_map<std::string_view, int> ids;
    std::vector<int> coded;
    coded.reserve(words.size());
    for (const auto& w : words) {
        auto [it, inserted] = ids.emplace(w, static_cast<int>(ids.size()));
        coded.push_back(it->second);
    }

    Rng rng(seed);
    std::vector<double> mean_ttr;
    std::vector<int> sample;
    for (std::size_t size = kMinSize; size <= kMaxSize; ++size) {
        double total = 0.0;
        for (std::size_t draw = 0; draw < kDraws; ++draw) {
            auto picks = sample_without_replacement(coded.size(), size, rng);
            sample.clear();
            for (auto p : picks) {
                sample.push_back(coded[p]);
            }
            total += type_token_ratio(sample);
        }
        mean_ttr.push_back(total / static_cast<double>(kDraws));
    }

    double best_d = 1.0;
    double best_err = std::numeric_limits<double>::infinity();
    for (int d = 1; d <= 200; ++d) {
        double err = 0.0;
        for (std::size_t k = 0; k < mean_ttr.size(); ++k) {
            const double n = static_cast<double>(kMinSize + k);
            const double diff = mean_ttr[k] - vocd_curve(d, n);
            err += diff * diff;
        }
        if (err < best_err) {
            best_err = err;
            best_d = d;
        }
    }
    return best_d;
}

IndexVector lexical_indices(const TokenCounts& c, std::span<const std::string> words)
{
    if (c.n == 0) {
        throw DataError("empty text");
    }
    const double n = static_cast<double>(c.n);
    const double t = static_cast<double>(c.t);
    const double n_lex = static_cast<double>(c.n_lex);
    const double n_verb = static_cast<double>(c.n_verb);
    const double t_verb = static_cast<double>(c.t_verb);

    IndexVector v;
    v[Index::TTR] = t / n;
    v[Index::RTTR] = t / std::sqrt(n);
    v[Index::CTTR] = t / std::sqrt(2.0 * n);
    if (c.n > 1) {
        v[Index::LogTTR] = std::log(t) / std::log(n);
    }
    if (c.t != c.n && c.t != 1) {
        v[Index::Uber] = std::log(2.0 * n) / std::log(n / t);
    }

    constexpr std::size_t kSegment = 50;
    if (words.size() < kSegment) {
        v[Index::MSTTR50] = v[Index::TTR];
    } else {
        std::unordered_map<std::string_view, int> ids;
        std::vector<int> coded;
        for (const auto& w : words) {
            coded.push_back(ids.emplace(w, static_cast<int>(ids.size())).first->second);
        }
        const std::size_t segments = coded.size() / kSegment;
        double total = 0.0;
        for (std::size_t s = 0; s < segments; ++s) {
            total += type_token_ratio(std::span<const int>(coded).subspan(s * kSegment, kSegment));
        }
        v[Index::MSTTR50] = total / static_cast<double>(segments);
    }
    v[Index::D] = vocd_d(words);

    v[Index::LV] = ratio(static_cast<double>(c.t_lex), n_lex);
    v[Index::VV1] = ratio(t_verb, n_verb);
    v[Index::SVV1] = ratio(t_verb * t_verb, n_verb);
    v[Index::CVV1] = ratio(t_verb, std::sqrt(2.0 * n_verb));
    v[Index::VV2] = ratio(t_verb, n_lex);
    v[Index::NV] = ratio(static_cast<double>(c.t_noun), n_lex);
    v[Index::AdjV] = ratio(static_cast<double>(c.t_adj), n_lex);
    v[Index::AdvV] = ratio(static_cast<double>(c.t_adv), n_lex);
    v[Index::ModV] = ratio(static_cast<double>(c.t_adj + c.t_adv), n_lex);
    return v;
}

IndexVector syntactic_indices(const SyntacticUnits& u, const TokenCounts& c)
{
    if (u.sentences == 0) {
        throw DataError("syntactic indices need at least one sentence");
    }
    const double n = static_cast<double>(c.n);
    const double clauses = static_cast<double>(u.clauses);
    const double s = static_cast<double>(u.sentences);
    const double tu = static_cast<double>(u.t_units);

    IndexVector v;
    v[Index::MLC] = ratio(n, clauses);
    v[Index::MLS] = ratio(n, s);
    v[Index::MLT] = ratio(n, tu);
    v[Index::C_S] = ratio(clauses, s);
    v[Index::C_T] = ratio(clauses, tu);
    v[Index::CT_T] = ratio(static_cast<double>(u.complex_t_units), tu);
    v[Index::DC_C] = ratio(static_cast<double>(u.dependent_clauses), clauses);
    v[Index::DC_T] = ratio(static_cast<double>(u.dependent_clauses), tu);
    v[Index::T_S] = ratio(tu, s);
    v[Index::CP_C] = ratio(static_cast<double>(u.coordinate_phrases), clauses);
    v[Index::CP_T] = ratio(static_cast<double>(u.coordinate_phrases), tu);
    v[Index::CN_C] = ratio(static_cast<double>(u.complex_nominals), clauses);
    v[Index::CN_T] = ratio(static_cast<double>(u.complex_nominals), tu);
    v[Index::VP_T] = ratio(static_cast<double>(u.verb_phrases), tu);
    return v;
}

IndexVector compute_indices(const TaggedText& text)
{
    const auto counts = count_tokens(text);
    if (counts.n == 0 || text.sentences.empty()) {
        return {};
    }
    const auto words = word_tokens(text);
    auto v = syntactic_indices(segment_units(text), counts);
    v.merge(lexical_indices(counts, words));
    return v;
}

namespace {

std::vector<IndexVector> normalize_columns(const std::vector<IndexVector>& raw)
{
    std::vector<IndexVector> out(raw.size());
    for (std::size_t col = 0; col < kIndexCount; ++col) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -std::numeric_limits<double>::infinity();
        for (const auto& r : raw) {
            if (const auto& x = r.at(col)) {
                lo = std::min(lo, *x);
                hi = std::max(hi, *x);
            }
        }
        for (std::size_t row = 0; row < raw.size(); ++row) {
            const auto& x = raw[row].at(col);
            if (!x) {
                continue;
            }
            out[row].at(col) = hi > lo ? (*x - lo) / (hi - lo) : 0.5;
        }
    }
    return out;
}

} // namespace

std::vector<IndexVector> column_normalize(const std::vector<IndexVector>& raw)
{
    if (raw.size() < 2) {
        throw DataError("column_normalize needs at least 2 profiles");
    }
    bool shared = false;
    for (std::size_t col = 0; col < kIndexCount && !shared; ++col) {
        std::size_t present = 0;
        for (const auto& r : raw) {
            present += r.at(col).has_value() ? 1 : 0;
        }
        shared = present >= 2;
    }
    if (!shared) {
        throw DataError("column_normalize: no index is present in two or more profiles");
    }
    return normalize_columns(raw);
}

std::vector<ComplexityProfile> score_profiles(std::vector<std::string> ids,
                                              const std::vector<IndexVector>& raw)
{
    if (raw.empty()) {
        throw DataError("empty query set");
    }
    if (ids.size() != raw.size()) {
        throw UsageError("score_profiles: ids and vectors differ in length");
    }
    const auto normalized = normalize_columns(raw);
    std::vector<ComplexityProfile> out(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        auto& p = out[i];
        p.query_id = std::move(ids[i]);
        p.raw = raw[i];
        p.normalized = normalized[i];
        double total = 0.0;
        std::size_t present = 0;
        for (std::size_t col = 0; col < kIndexCount; ++col) {
            if (const auto& x = p.normalized.at(col)) {
                total += *x;
                ++present;
            }
        }
        p.all_missing = present == 0;
        p.score = present == 0 ? 0.5 : total / static_cast<double>(present);
    }
    return out;
}

std::vector<ComplexityProfile> aggregate_scores(const std::vector<ComplexityInput>& queries,
                                                std::size_t threads)
{
    if (queries.empty()) {
        throw DataError("empty query set");
    }
    std::vector<IndexVector> raw(queries.size());
    parallel_for(queries.size(), threads,
                 [&](std::size_t i) { raw[i] = compute_indices(queries[i].tagged); });
    std::vector<std::string> ids;
    ids.reserve(queries.size());
    for (const auto& q : queries) {
        ids.push_back(q.query_id);
    }
    return score_profiles(std::move(ids), raw);
}

std::map<std::string, std::size_t> assign_buckets(const std::vector<ComplexityProfile>& profiles,
                                                  std::size_t k)
{
    if (k < 2) {
        throw UsageError("bucket count must be at least 2");
    }
    if (profiles.size() < k) {
        throw DataError("need at least " + std::to_string(k) + " profiles for " + std::to_string(k)
                        + " buckets, got " + std::to_string(profiles.size()));
    }
    std::vector<const ComplexityProfile*> order;
    for (const auto& p : profiles) {
        order.push_back(&p);
    }
    std::sort(order.begin(), order.end(), [](const auto* a, const auto* b) {
        if (a->score != b->score) {
            return a->score < b->score;
        }
        return a->query_id < b->query_id;
    });
    const std::size_t base = profiles.size() / k;
    const std::size_t extra = profiles.size() % k;
    std::map<std::string, std::size_t> out;
    std::size_t pos = 0;
    for (std::size_t b = 0; b < k; ++b) {
        const std::size_t size = base + (b < extra ? 1 : 0);
        for (std::size_t i = 0; i < size; ++i) {
            out[order[pos++]->query_id] = b;
        }
    }
    return out;
}

} // namespace eqir
