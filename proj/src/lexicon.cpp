#include "eqir/text_analysis.hpp"

#include <initializer_list>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>

namespace eqir::lexicon {
namespace {

struct VerbForms {
    const char* base;
    std::initializer_list<const char*> irregular;
};

// Base forms; -s and -ed forms are generated, irregular forms listed.
const VerbForms kVerbs[] = {
    {"run", {"ran"}},          {"jump", {}},           {"go", {"went", "gone"}},
    {"make", {"made"}},        {"take", {"took", "taken"}},
    {"get", {"got", "gotten"}}, {"give", {"gave", "given"}},
    {"find", {"found"}},       {"know", {"knew", "known"}},
    {"think", {"thought"}},    {"see", {"saw", "seen"}},
    {"come", {"came"}},        {"want", {}},           {"look", {}},
    {"use", {}},               {"work", {}},           {"call", {}},
    {"try", {}},               {"ask", {}},            {"need", {}},
    {"feel", {"felt"}},        {"become", {"became"}}, {"leave", {"left"}},
    {"put", {}},               {"mean", {"meant"}},    {"keep", {"kept"}},
    {"let", {}},               {"begin", {"began", "begun"}},
    {"seem", {}},              {"help", {}},           {"talk", {}},
    {"turn", {}},              {"start", {}},          {"show", {"shown"}},
    {"hear", {"heard"}},       {"play", {}},           {"move", {}},
    {"live", {}},              {"believe", {}},        {"bring", {"brought"}},
    {"happen", {}},            {"write", {"wrote", "written"}},
    {"provide", {}},           {"sit", {"sat"}},       {"stand", {"stood"}},
    {"lose", {"lost"}},        {"pay", {"paid"}},      {"meet", {"met"}},
    {"include", {}},           {"continue", {}},       {"set", {}},
    {"learn", {}},             {"change", {}},         {"lead", {"led"}},
    {"understand", {"understood"}},                    {"watch", {}},
    {"follow", {}},            {"stop", {}},           {"create", {}},
    {"speak", {"spoke", "spoken"}},                    {"read", {}},
    {"allow", {}},             {"add", {}},            {"spend", {"spent"}},
    {"grow", {"grew", "grown"}},                       {"open", {}},
    {"walk", {}},              {"win", {"won"}},       {"offer", {}},
    {"remember", {}},          {"love", {}},           {"consider", {}},
    {"appear", {}},            {"buy", {"bought"}},    {"wait", {}},
    {"serve", {}},             {"die", {}},            {"send", {"sent"}},
    {"expect", {}},            {"build", {"built"}},   {"stay", {}},
    {"fall", {"fell", "fallen"}},                      {"cut", {}},
    {"reach", {}},             {"kill", {}},           {"remain", {}},
    {"suggest", {}},           {"raise", {}},          {"pass", {}},
    {"sell", {"sold"}},        {"require", {}},        {"report", {}},
    {"decide", {}},            {"pull", {}},           {"eat", {"ate", "eaten"}},
    {"drink", {"drank", "drunk"}},                     {"cause", {}},
    {"treat", {}},             {"affect", {}},         {"prevent", {}},
    {"reduce", {}},            {"increase", {}},       {"improve", {}},
    {"explain", {}},           {"describe", {}},       {"contain", {}},
    {"produce", {}},           {"protect", {}},        {"compare", {}},
    {"measure", {}},           {"rain", {}},           {"bark", {}},
    {"swim", {"swam", "swum"}}, {"fly", {"flew", "flown"}},
    {"drive", {"drove", "driven"}},                    {"sleep", {"slept"}},
    {"cook", {}},              {"cost", {}},           {"fix", {}},
    {"choose", {"chose", "chosen"}},                   {"sing", {"sang", "sung"}},
    {"draw", {"drew", "drawn"}}, {"break", {"broke", "broken"}},
    {"catch", {"caught"}},     {"teach", {"taught"}},  {"fight", {"fought"}},
    {"throw", {"threw", "thrown"}},                    {"wear", {"wore", "worn"}},
    {"hold", {"held"}},        {"tell", {"told"}},     {"say", {"said"}},
    {"like", {}},              {"prefer", {}},         {"invest", {}},
    {"borrow", {}},            {"lend", {"lent"}},     {"save", {}},
    {"search", {}},            {"study", {}},          {"apply", {}},
    {"rely", {}},              {"reply", {}},          {"depend", {}},
    {"occur", {}},             {"differ", {}},         {"exist", {}},
    {"work", {}},              {"mix", {}},            {"wash", {}},
};

const char* const kDeterminers[] = {
    "the", "a", "an", "this", "these", "those", "every", "each", "some", "any",
    "no", "all", "both", "either", "neither", "another", "my", "your", "his",
    "its", "our", "their", "much", "many", "few", "several",
};

const char* const kPronouns[] = {
    "i", "you", "he", "she", "it", "we", "they", "me", "him", "her", "us", "them",
    "myself", "yourself", "himself", "herself", "itself", "ourselves", "themselves",
    "who", "whom", "whose", "which", "what", "that", "whoever", "whatever",
    "someone", "something", "anyone", "anything", "everyone", "everything",
    "nobody", "nothing", "mine", "yours", "hers", "ours", "theirs",
};

const char* const kAdpositions[] = {
    "of", "in", "on", "at", "by", "for", "with", "from", "into", "onto", "about",
    "over", "under", "between", "among", "through", "during", "without", "within",
    "against", "toward", "towards", "upon", "across", "behind", "beyond", "near",
    "per", "via", "than", "as", "after", "before", "around", "along", "despite",
    "off", "up", "down", "out", "versus",
};

const char* const kCoordinators[] = {"and", "or", "but", "nor"};

const char* const kSubordinators[] = {
    "although", "though", "because", "if", "unless", "since", "while", "whereas",
    "whether", "until", "till", "when", "where", "whenever", "wherever",
};

const char* const kAuxiliaries[] = {
    "be", "am", "is", "are", "was", "were", "been", "being", "have", "has", "had",
    "having", "do", "does", "did", "will", "would", "shall", "should", "can",
    "could", "may", "might", "must", "cannot", "isn't", "aren't", "wasn't",
    "weren't", "don't", "doesn't", "didn't", "haven't", "hasn't", "hadn't",
    "won't", "wouldn't", "can't", "couldn't", "shouldn't", "mustn't",
};

const char* const kParticles[] = {"to", "not", "n't"};

const char* const kAdverbs[] = {
    "very", "also", "too", "often", "always", "never", "sometimes", "usually",
    "here", "there", "now", "then", "how", "why", "quite", "rather", "just",
    "only", "even", "still", "already", "soon", "again", "almost", "ever", "yet",
    "so", "well", "however", "therefore", "thus", "perhaps", "maybe", "more",
    "most", "less", "least", "fast", "today", "tomorrow", "yesterday", "away",
    "together", "else", "instead", "indeed", "once", "twice",
};

const char* const kAdjectives[] = {
    "good", "bad", "best", "better", "worse", "worst", "new", "old", "big",
    "small", "large", "little", "long", "short", "high", "low", "great", "young",
    "quick", "slow", "red", "blue", "green", "black", "white", "yellow", "brown",
    "gray", "grey", "hot", "cold", "warm", "cool", "easy", "difficult", "simple",
    "hard", "important", "different", "same", "other", "main", "major", "minor",
    "common", "recent", "early", "late", "free", "full", "empty", "real", "true",
    "false", "possible", "certain", "clear", "strong", "weak", "healthy", "sick",
    "safe", "rich", "poor", "cheap", "expensive", "human", "social", "public",
    "private", "local", "national", "general", "specific", "similar", "entire",
    "whole", "likely", "able", "sure", "ready", "happy", "sad", "dark", "light",
    "heavy", "deep", "wide", "top", "next", "last", "first", "second", "third",
    "final", "own", "such", "daily", "weekly", "monthly", "yearly", "accurate",
    "appropriate", "adequate", "separate", "ultimate", "fine", "nice", "tall",
};

const char* const kNumbers[] = {
    "zero", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine",
    "ten", "eleven", "twelve", "twenty", "thirty", "forty", "fifty", "hundred",
    "thousand", "million", "billion",
};

// Nouns that the suffix rules would otherwise mis-tag.
const char* const kNouns[] = {
    "thing", "king", "ring", "spring", "string", "morning", "evening", "ceiling",
    "wing", "building", "meeting", "family", "italy", "supply", "state", "date",
    "rate", "climate", "senate", "estate", "plate", "candidate", "seed", "speed",
    "bed", "feed", "weed", "update", "debate", "chocolate", "water", "data",
};

const char* const kAbbreviations[] = {
    "mr", "mrs", "ms", "dr", "prof", "sr", "jr", "st", "vs", "etc", "e.g", "i.e",
    "inc", "ltd", "co", "corp", "no", "fig", "approx", "dept", "est", "u.s", "a.m",
    "p.m", "jan", "feb", "mar", "apr", "jun", "jul", "aug", "sep", "sept", "oct",
    "nov", "dec", "mt", "gen", "gov", "sen", "rep",
};

bool is_vowel(char c)
{
    return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u';
}

std::string third_person(const std::string& base)
{
    auto ends = [&](std::string_view s) { return base.ends_with(s); };
    if (ends("s") || ends("sh") || ends("ch") || ends("x") || ends("z") || ends("o")) {
        return base + "es";
    }
    if (base.size() > 1 && base.back() == 'y' && !is_vowel(base[base.size() - 2])) {
        return base.substr(0, base.size() - 1) + "ies";
    }
    return base + "s";
}

std::string past_regular(const std::string& base)
{
    if (base.back() == 'e') {
        return base + "d";
    }
    if (base.size() > 1 && base.back() == 'y' && !is_vowel(base[base.size() - 2])) {
        return base.substr(0, base.size() - 1) + "ied";
    }
    return base + "ed";
}

std::unordered_map<std::string, Pos> build_table()
{
    std::unordered_map<std::string, Pos> table;
    // Open-class verbs first so closed-class entries win on overlap.
    for (const auto& v : kVerbs) {
        std::string base = v.base;
        table[base] = Pos::Verb;
        table[third_person(base)] = Pos::Verb;
        table[past_regular(base)] = Pos::Verb;
        for (const char* form : v.irregular) {
            table[form] = Pos::Verb;
        }
    }
    auto put = [&](const auto& words, Pos pos) {
        for (const char* w : words) {
            table[w] = pos;
        }
    };
    put(kNouns, Pos::Noun);
    put(kAdjectives, Pos::Adj);
    put(kAdverbs, Pos::Adv);
    put(kNumbers, Pos::Num);
    put(kDeterminers, Pos::Det);
    put(kPronouns, Pos::Pron);
    put(kAdpositions, Pos::Adp);
    put(kCoordinators, Pos::Cconj);
    put(kSubordinators, Pos::Sconj);
    put(kAuxiliaries, Pos::Aux);
    put(kParticles, Pos::Part);
    return table;
}

const std::unordered_map<std::string, Pos>& table()
{
    static const auto t = build_table();
    return t;
}

} // namespace

std::optional<Pos> lookup(std::string_view lower)
{
    const auto& t = table();
    auto it = t.find(std::string(lower));
    if (it == t.end()) {
        return std::nullopt;
    }
    return it->second;
}

bool is_abbreviation(std::string_view lower)
{
    static const std::unordered_set<std::string_view> abbreviations(std::begin(kAbbreviations),
                                                                    std::end(kAbbreviations));
    return abbreviations.contains(lower);
}

} // namespace eqir::lexicon
