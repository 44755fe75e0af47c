#include "eqir/text_analysis.hpp"

#include "eqir/common.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>

namespace eqir {
namespace {

constexpr std::array<std::pair<Pos, std::string_view>, 14> kPosNames{{
    {Pos::Noun, "NOUN"},
    {Pos::Verb, "VERB"},
    {Pos::Aux, "AUX"},
    {Pos::Adj, "ADJ"},
    {Pos::Adv, "ADV"},
    {Pos::Det, "DET"},
    {Pos::Adp, "ADP"},
    {Pos::Pron, "PRON"},
    {Pos::Cconj, "CCONJ"},
    {Pos::Sconj, "SCONJ"},
    {Pos::Num, "NUM"},
    {Pos::Part, "PART"},
    {Pos::Punct, "PUNCT"},
    {Pos::X, "X"},
}};

bool is_punct_char(char c)
{
    return std::ispunct(static_cast<unsigned char>(c)) != 0;
}

bool is_numeral(std::string_view token)
{
    bool digit = false;
    for (char c : token) {
        if (std::isdigit(static_cast<unsigned char>(c))) {
            digit = true;
        } else if (c != '.' && c != ',' && c != '-' && c != '/' && c != '%') {
            return false;
        }
    }
    return digit;
}

enum class TagSource { lexicon, suffix, fallback };

struct SuffixRule {
    std::string_view suffix;
    Pos pos;
};

constexpr std::array<SuffixRule, 14> kSuffixRules{{
    {"ly", Pos::Adv},
    {"ing", Pos::Verb},
    {"ed", Pos::Verb},
    {"ize", Pos::Verb},
    {"ate", Pos::Verb},
    {"ous", Pos::Adj},
    {"ful", Pos::Adj},
    {"ive", Pos::Adj},
    {"able", Pos::Adj},
    {"tion", Pos::Noun},
    {"ment", Pos::Noun},
    {"ness", Pos::Noun},
    {"ity", Pos::Noun},
    {"izes", Pos::Verb},
}};

std::pair<Pos, TagSource> tag_word(std::string_view surface, std::string_view lower)
{
    if (is_punctuation_token(surface)) {
        return {Pos::Punct, TagSource::lexicon};
    }
    if (auto hit = lexicon::lookup(lower)) {
        return {*hit, TagSource::lexicon};
    }
    if (is_numeral(lower)) {
        return {Pos::Num, TagSource::suffix};
    }
    for (const auto& rule : kSuffixRules) {
        // Require a stem of at least two characters.
        if (lower.size() >= rule.suffix.size() + 2 && lower.ends_with(rule.suffix)) {
            return {rule.pos, TagSource::suffix};
        }
    }
    return {Pos::Noun, TagSource::fallback};
}

bool is_terminal(std::string_view surface)
{
    return surface == "." || surface == "!" || surface == "?";
}

bool starts_upper(std::string_view surface)
{
    return !surface.empty() && std::isupper(static_cast<unsigned char>(surface.front())) != 0;
}

bool is_relative_marker(const Token& t)
{
    static constexpr std::array<std::string_view, 7> kRelatives{
        "who", "which", "that", "whose", "whom", "where", "when"};
    if (t.pos != Pos::Pron && t.pos != Pos::Sconj) {
        return false;
    }
    return std::find(kRelatives.begin(), kRelatives.end(), t.lower) != kRelatives.end();
}

struct VerbGroup {
    Span span;
    bool has_verb = false;
    bool finite = false;
    bool dependent = false;
};

// Maximal AUX* (PART)? VERB+ or AUX+ runs within [begin, end).
std::vector<VerbGroup> verb_groups(const std::vector<Token>& tokens, Span sentence)
{
    std::vector<VerbGroup> groups;
    std::size_t i = sentence.begin;
    while (i < sentence.end) {
        const Pos p = tokens[i].pos;
        if (p != Pos::Aux && p != Pos::Verb) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < sentence.end && tokens[j].pos == Pos::Aux) {
            ++j;
        }
        if (j > i && j + 1 < sentence.end && tokens[j].pos == Pos::Part
            && tokens[j + 1].pos == Pos::Verb) {
            ++j;
        }
        bool has_verb = false;
        while (j < sentence.end && tokens[j].pos == Pos::Verb) {
            has_verb = true;
            ++j;
        }
        VerbGroup g;
        g.span = {i, j};
        g.has_verb = has_verb;
        g.finite = !(i > sentence.begin && tokens[i - 1].pos == Pos::Part
                     && tokens[i - 1].lower == "to");
        groups.push_back(g);
        i = j;
    }
    return groups;
}

} // namespace

std::string_view pos_name(Pos pos)
{
    for (const auto& [p, name] : kPosNames) {
        if (p == pos) {
            return name;
        }
    }
    return "X";
}

std::optional<Pos> parse_pos(std::string_view name)
{
    for (const auto& [p, n] : kPosNames) {
        if (n == name) {
            return p;
        }
    }
    return std::nullopt;
}

bool is_punctuation_token(std::string_view token)
{
    return !token.empty() && std::all_of(token.begin(), token.end(), is_punct_char);
}

std::vector<std::string> tokenize(std::string_view text)
{
    std::vector<std::string> out;
    for (auto word : split_whitespace(text)) {
        std::size_t lead = 0;
        while (lead < word.size() && is_punct_char(word[lead])) {
            ++lead;
        }
        if (lead == word.size()) {
            for (char c : word) {
                out.emplace_back(1, c);
            }
            continue;
        }
        std::size_t trail = word.size();
        while (trail > lead && is_punct_char(word[trail - 1])) {
            --trail;
        }
        for (std::size_t k = 0; k < lead; ++k) {
            out.emplace_back(1, word[k]);
        }
        out.emplace_back(word.substr(lead, trail - lead));
        for (std::size_t k = trail; k < word.size(); ++k) {
            out.emplace_back(1, word[k]);
        }
    }
    return out;
}

std::vector<std::string> index_terms(std::string_view text)
{
    std::vector<std::string> out;
    for (auto& tok : tokenize(text)) {
        if (!is_punctuation_token(tok)) {
            out.push_back(to_lower(tok));
        }
    }
    return out;
}

TaggedText pos_tag(const std::vector<std::string>& tokens)
{
    TaggedText out;
    out.tokens.reserve(tokens.size());
    std::vector<TagSource> sources;
    sources.reserve(tokens.size());
    for (const auto& surface : tokens) {
        Token t;
        t.surface = surface;
        t.lower = to_lower(surface);
        auto [pos, source] = tag_word(t.surface, t.lower);
        t.pos = pos;
        out.tokens.push_back(std::move(t));
        sources.push_back(source);
    }

    // A verb reading directly after a determiner, adjective, adposition or
    // numeral is nominal ("the use", "of running"); -ed forms there are
    // participial adjectives ("the tired dog").
    for (std::size_t i = 1; i < out.tokens.size(); ++i) {
        auto& t = out.tokens[i];
        if (t.pos != Pos::Verb) {
            continue;
        }
        const Pos prev = out.tokens[i - 1].pos;
        if (prev == Pos::Det || prev == Pos::Adj || prev == Pos::Adp || prev == Pos::Num) {
            const bool participle = sources[i] == TagSource::suffix && t.lower.ends_with("ed");
            t.pos = participle ? Pos::Adj : Pos::Noun;
        }
    }

    std::size_t start = 0;
    const std::size_t n = out.tokens.size();
    for (std::size_t i = 0; i < n; ++i) {
        const auto& surface = out.tokens[i].surface;
        if (!is_terminal(surface)) {
            continue;
        }
        if (i + 1 < n && is_terminal(out.tokens[i + 1].surface)) {
            continue;
        }
        if (surface == "." && i > 0 && lexicon::is_abbreviation(out.tokens[i - 1].lower)) {
            continue;
        }
        if (i + 1 == n || starts_upper(out.tokens[i + 1].surface)) {
            out.sentences.push_back({start, i + 1});
            start = i + 1;
        }
    }
    if (start < n) {
        out.sentences.push_back({start, n});
    }
    return out;
}

TaggedText parse_pretagged(std::istream& in)
{
    TaggedText out;
    std::string line;
    std::size_t line_no = 0;
    std::size_t start = 0;
    auto close_sentence = [&] {
        if (out.tokens.size() > start) {
            out.sentences.push_back({start, out.tokens.size()});
            start = out.tokens.size();
        }
    };
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (trim(line).empty()) {
            close_sentence();
            continue;
        }
        auto fields = split(line, '\t');
        if (fields.size() != 2 || fields[0].empty()) {
            throw DataError("line " + std::to_string(line_no) + ": expected surface<TAB>tag");
        }
        auto pos = parse_pos(trim(fields[1]));
        if (!pos) {
            throw DataError("line " + std::to_string(line_no) + ": unknown tag "
                            + std::string(trim(fields[1])));
        }
        Token t;
        t.surface = std::string(fields[0]);
        t.lower = to_lower(t.surface);
        t.pos = *pos;
        out.tokens.push_back(std::move(t));
    }
    close_sentence();
    return out;
}

TaggedText load_pretagged(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open " + path);
    }
    return parse_pretagged(in);
}

std::vector<Span> noun_phrase_spans(const TaggedText& text)
{
    const auto& tokens = text.tokens;
    std::vector<Span> spans;
    for (const auto& sentence : text.sentences) {
        std::size_t i = sentence.begin;
        while (i < sentence.end) {
            std::size_t j = i;
            if (j < sentence.end && tokens[j].pos == Pos::Det) {
                ++j;
            }
            if (j < sentence.end && tokens[j].pos == Pos::Num) {
                ++j;
            }
            while (j < sentence.end && tokens[j].pos == Pos::Adj) {
                ++j;
            }
            const std::size_t nouns_begin = j;
            while (j < sentence.end && tokens[j].pos == Pos::Noun) {
                ++j;
            }
            if (j > nouns_begin) {
                spans.push_back({i, j});
                i = j;
            } else {
                ++i;
            }
        }
    }
    return spans;
}

SyntacticUnits segment_units(const TaggedText& text)
{
    const auto& tokens = text.tokens;
    SyntacticUnits units;
    units.sentences = text.sentences.size();
    units.noun_phrase_spans = noun_phrase_spans(text);

    for (const auto& np : units.noun_phrase_spans) {
        std::size_t nouns = 0;
        bool adj = false;
        for (std::size_t i = np.begin; i < np.end; ++i) {
            nouns += tokens[i].pos == Pos::Noun ? 1 : 0;
            adj = adj || tokens[i].pos == Pos::Adj;
        }
        if (adj || nouns >= 2) {
            ++units.complex_nominals;
        }
    }

    std::vector<int> np_of(tokens.size(), -1);
    for (std::size_t k = 0; k < units.noun_phrase_spans.size(); ++k) {
        for (std::size_t i = units.noun_phrase_spans[k].begin; i < units.noun_phrase_spans[k].end;
             ++i) {
            np_of[i] = static_cast<int>(k);
        }
    }
    auto head_class = [&](std::size_t i) {
        if (np_of[i] >= 0) {
            return Pos::Noun;
        }
        if (tokens[i].pos == Pos::Aux) {
            return Pos::Verb;
        }
        return tokens[i].pos;
    };

    for (const auto& sentence : text.sentences) {
        auto groups = verb_groups(tokens, sentence);
        units.verb_phrases += groups.size();

        std::size_t boundary = sentence.begin;
        for (auto& g : groups) {
            if (!g.finite) {
                continue;
            }
            ++units.clauses;
            for (std::size_t i = boundary; i < g.span.begin; ++i) {
                if (tokens[i].pos == Pos::Sconj || is_relative_marker(tokens[i])) {
                    g.dependent = true;
                    break;
                }
            }
            if (g.dependent) {
                ++units.dependent_clauses;
            }
            boundary = g.span.end;
        }

        auto has_finite = [&](std::size_t from, std::size_t to) {
            return std::any_of(groups.begin(), groups.end(), [&](const VerbGroup& g) {
                return g.finite && g.span.begin >= from && g.span.begin < to;
            });
        };

        std::vector<std::size_t> conj;
        for (std::size_t i = sentence.begin; i < sentence.end; ++i) {
            if (tokens[i].pos == Pos::Cconj) {
                conj.push_back(i);
            }
        }

        // T-unit boundaries: coordinators with a finite clause in the
        // current T-unit so far and another before the next coordinator.
        std::vector<std::size_t> cuts;
        std::size_t unit_start = sentence.begin;
        for (std::size_t k = 0; k < conj.size(); ++k) {
            const std::size_t p = conj[k];
            const std::size_t next = k + 1 < conj.size() ? conj[k + 1] : sentence.end;
            if (has_finite(unit_start, p) && has_finite(p + 1, next)) {
                cuts.push_back(p);
                unit_start = p + 1;
                continue;
            }
            std::size_t left = p;
            while (left > sentence.begin && tokens[left - 1].pos == Pos::Punct) {
                --left;
            }
            std::size_t right = p + 1;
            while (right < sentence.end && tokens[right].pos == Pos::Punct) {
                ++right;
            }
            if (left > sentence.begin && right < sentence.end
                && head_class(left - 1) == head_class(right)) {
                ++units.coordinate_phrases;
            }
        }

        units.t_units += cuts.size() + 1;
        std::size_t begin = sentence.begin;
        for (std::size_t k = 0; k <= cuts.size(); ++k) {
            const std::size_t end = k < cuts.size() ? cuts[k] : sentence.end;
            const bool complex = std::any_of(groups.begin(), groups.end(), [&](const VerbGroup& g) {
                return g.dependent && g.span.begin >= begin && g.span.begin < end;
            });
            if (complex) {
                ++units.complex_t_units;
            }
            begin = end + 1;
        }
    }
    return units;
}

std::string amplify_noun_phrases(std::string_view text, std::size_t repetitions)
{
    const auto tagged = tag_text(text);
    const auto spans = noun_phrase_spans(tagged);
    std::vector<std::string_view> out;
    std::size_t next_span = 0;
    for (std::size_t i = 0; i < tagged.tokens.size(); ++i) {
        out.push_back(tagged.tokens[i].surface);
        if (next_span < spans.size() && spans[next_span].end == i + 1) {
            const auto& span = spans[next_span];
            for (std::size_t r = 0; r < repetitions; ++r) {
                for (std::size_t k = span.begin; k < span.end; ++k) {
                    out.push_back(tagged.tokens[k].surface);
                }
            }
            ++next_span;
        }
    }
    std::string joined;
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (i > 0) {
            joined.push_back(' ');
        }
        joined.append(out[i]);
    }
    return joined;
}

} // namespace eqir
