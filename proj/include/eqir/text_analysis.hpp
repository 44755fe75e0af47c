#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace eqir {

/// Coarse part-of-speech tagset.
enum class Pos : std::uint8_t {
    Noun,
    Verb,
    Aux,
    Adj,
    Adv,
    Det,
    Adp,
    Pron,
    Cconj,
    Sconj,
    Num,
    Part,
    Punct,
    X,
};

std::string_view pos_name(Pos pos);
std::optional<Pos> parse_pos(std::string_view name);

struct Token {
    std::string surface;
    std::string lower;
    Pos pos = Pos::X;
};

/// Half-open token range [begin, end).
struct Span {
    std::size_t begin = 0;
    std::size_t end = 0;

    std::size_t size() const { return end - begin; }
    bool contains(std::size_t i) const { return i >= begin && i < end; }
    bool operator==(const Span&) const = default;
};

struct TaggedText {
    std::vector<Token> tokens;
    /// Partition of [0, tokens.size()) into non-empty sentences.
    std::vector<Span> sentences;
};

/// Counts of the syntactic units behind the clause/T-unit indices.
struct SyntacticUnits {
    std::size_t clauses = 0;
    std::size_t t_units = 0;
    std::size_t complex_t_units = 0;
    std::size_t dependent_clauses = 0;
    std::size_t coordinate_phrases = 0;
    std::size_t complex_nominals = 0;
    std::size_t verb_phrases = 0;
    std::size_t sentences = 0;
    std::vector<Span> noun_phrase_spans;
};

/// Whitespace split, then leading/trailing punctuation peeled off one
/// character per token. Intra-word hyphens and apostrophes stay.
std::vector<std::string> tokenize(std::string_view text);

/// Lowercased tokens with punctuation-only tokens removed. The term stream
/// used by the encoders and BM25.
std::vector<std::string> index_terms(std::string_view text);

bool is_punctuation_token(std::string_view token);

/// Lexicon, then suffix rules, then NOUN; followed by sentence splitting.
TaggedText pos_tag(const std::vector<std::string>& tokens);

inline TaggedText tag_text(std::string_view text) { return pos_tag(tokenize(text)); }

/// `surface<TAB>TAG` lines, blank line between sentences.
TaggedText parse_pretagged(std::istream& in);
TaggedText load_pretagged(const std::string& path);

/// Maximal DET? NUM? ADJ* NOUN+ runs inside each sentence.
std::vector<Span> noun_phrase_spans(const TaggedText& text);

SyntacticUnits segment_units(const TaggedText& text);

/// Every maximal noun phrase is followed by `repetitions` copies of itself.
/// Output tokens are joined by single spaces.
std::string amplify_noun_phrases(std::string_view text, std::size_t repetitions = 1);

namespace lexicon {

/// Closed-class words plus a small list of frequent open-class verbs,
/// adjectives and adverbs. Keys are lowercase.
std::optional<Pos> lookup(std::string_view lower);

/// Whether `lower` is on the abbreviation guard list (without the period).
bool is_abbreviation(std::string_view lower);

} // namespace lexicon

} // namespace eqir
