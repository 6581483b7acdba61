#include "triplescore/trigger.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <stdexcept>

#include "triplescore/rng.hpp"

namespace triplescore {

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

bool is_word_char(unsigned char c) { return std::isalnum(c) || c >= 0x80; }

bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

bool is_consonant(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) &&
           std::string("aeiou").find(static_cast<char>(std::tolower(static_cast<unsigned char>(c)))) ==
               std::string::npos;
}

void add_term(std::set<std::string>& out, const std::string& term) {
    std::string t = lower(term);
    if (t.empty()) return;
    out.insert(t);
}

}  // namespace

std::string pluralize(const std::string& word) {
    std::string w = lower(word);
    if (w.empty()) return w;
    if (ends_with(w, "s") || ends_with(w, "x") || ends_with(w, "z") || ends_with(w, "ch") ||
        ends_with(w, "sh"))
        return w + "es";
    if (w.size() >= 2 && w.back() == 'y' && is_consonant(w[w.size() - 2]))
        return w.substr(0, w.size() - 1) + "ies";
    return w + "s";
}

TriggerLexicon build_lexicon(const TermMap& base_terms, const TermMap& synonyms,
                             const TermMap& hyponyms, const TermMap& manual_additions) {
    TriggerLexicon lex;
    for (const auto& [type, terms] : base_terms) {
        if (terms.empty()) throw std::runtime_error("build_lexicon: no base term for type " + type);
        auto& out = lex.triggers[type];
        for (const auto& t : terms) {
            add_term(out, t);
            add_term(out, pluralize(t));
        }
        for (const TermMap* extra : {&synonyms, &hyponyms}) {
            auto it = extra->find(type);
            if (it == extra->end()) continue;
            for (const auto& t : it->second) {
                add_term(out, t);
                add_term(out, pluralize(t));
            }
        }
        auto it = manual_additions.find(type);
        if (it != manual_additions.end())
            for (const auto& t : it->second) add_term(out, t);
    }
    return lex;
}

TermMap load_term_map(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    TermMap out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos || tab == 0 || tab + 1 >= line.size())
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": expected type_id<TAB>term");
        out[line.substr(0, tab)].push_back(line.substr(tab + 1));
    }
    return out;
}

TriggerLexicon load_lexicon(const std::string& path) {
    TriggerLexicon lex;
    for (const auto& [type, terms] : load_term_map(path)) {
        auto& out = lex.triggers[type];
        for (const auto& t : terms) add_term(out, t);
    }
    return lex;
}

void write_lexicon(const std::string& path, const TriggerLexicon& lexicon) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    for (const auto& [type, terms] : lexicon.triggers)
        for (const auto& t : terms) out << type << '\t' << t << '\n';
}

std::vector<std::string> load_abbreviations(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    std::vector<std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        out.push_back(lower(line));
    }
    return out;
}

std::pair<std::string, std::string> split_first_sentence(
    const std::string& description, const std::vector<std::string>& abbreviations) {
    const std::string& s = description;
    for (std::size_t i = 0; i < s.size(); ++i) {
        char c = s[i];
        if (c != '.' && c != '!' && c != '?') continue;
        if (c == '.') {
            // token ending at i, terminator included
            std::size_t j = i;
            while (j > 0 && !std::isspace(static_cast<unsigned char>(s[j - 1]))) --j;
            std::string word = lower(s.substr(j, i - j + 1));
            // single-letter initials like "J." never end a sentence
            if (word.size() == 2 && std::isalpha(static_cast<unsigned char>(word[0]))) continue;
            if (std::find(abbreviations.begin(), abbreviations.end(), word) !=
                abbreviations.end())
                continue;
        }
        std::size_t k = i + 1;
        if (k == s.size()) return {s, ""};
        if (!std::isspace(static_cast<unsigned char>(s[k]))) continue;
        while (k < s.size() && std::isspace(static_cast<unsigned char>(s[k]))) ++k;
        if (k == s.size()) return {s.substr(0, i + 1), ""};
        if (std::isupper(static_cast<unsigned char>(s[k])))
            return {s.substr(0, i + 1), s.substr(k)};
    }
    return {s, ""};
}

bool detect(const TriggerLexicon& lexicon, const TypeId& type, const std::string& text) {
    auto it = lexicon.triggers.find(type);
    if (it == lexicon.triggers.end())
        throw std::runtime_error("detect: unknown type " + type);
    if (text.empty()) return false;
    std::string haystack = lower(text);
    for (const auto& trig : it->second) {
        std::size_t pos = 0;
        while ((pos = haystack.find(trig, pos)) != std::string::npos) {
            bool left_ok = pos == 0 || !is_word_char(static_cast<unsigned char>(haystack[pos - 1]));
            std::size_t end = pos + trig.size();
            bool right_ok =
                end == haystack.size() || !is_word_char(static_cast<unsigned char>(haystack[end]));
            if (left_ok && right_ok) return true;
            ++pos;
        }
    }
    return false;
}

int refine(int ensemble_score, TargetRelation relation, bool in_first_sentence,
           bool in_description) {
    if (ensemble_score < kMinScore || ensemble_score > kMaxScore)
        throw std::runtime_error("refine: score out of range");
    if (in_first_sentence && !in_description)
        throw std::runtime_error("refine: first-sentence hit without description hit");
    int score = ensemble_score;
    if (in_first_sentence && score < 5) score = 5;
    if (relation == TargetRelation::nationality && !in_description && score > 2) score = 2;
    return score;
}

int twd_alone(TargetRelation relation, bool in_first_sentence, bool in_description,
              std::uint64_t seed) {
    (void)relation;  // rules are relation-independent for this baseline
    if (in_first_sentence && !in_description)
        throw std::runtime_error("twd_alone: first-sentence hit without description hit");
    if (in_first_sentence) return 5;
    if (!in_description) return 2;
    std::uint64_t s = seed;
    return splitmix64(s) & 1 ? 4 : 3;
}

}  // namespace triplescore
