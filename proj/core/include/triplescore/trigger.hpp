#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "triplescore/types.hpp"

namespace triplescore {

using TermMap = std::map<TypeId, std::vector<std::string>>;

struct TriggerLexicon {
    std::map<TypeId, std::set<std::string>> triggers;  // lowercase surface strings

    bool has_type(const TypeId& t) const { return triggers.count(t) > 0; }
};

// +"es" after s/x/z/ch/sh, consonant+"y" -> "ies", else +"s".
std::string pluralize(const std::string& word);

// Union of base terms, plurals, synonyms, hyponyms (each pluralized too)
// and manual additions, lowercased and deduplicated.
TriggerLexicon build_lexicon(const TermMap& base_terms, const TermMap& synonyms,
                             const TermMap& hyponyms, const TermMap& manual_additions);

// Lexicon / term-map file: type_id<TAB>term per line.
TermMap load_term_map(const std::string& path);
TriggerLexicon load_lexicon(const std::string& path);
void write_lexicon(const std::string& path, const TriggerLexicon& lexicon);

std::vector<std::string> load_abbreviations(const std::string& path);

// Split at the first '.', '!' or '?' followed by whitespace + uppercase (or
// end of text), skipping known abbreviations and single-letter initials.
std::pair<std::string, std::string> split_first_sentence(
    const std::string& description, const std::vector<std::string>& abbreviations);

// Whole-word, case-insensitive exact match of any trigger of `type` in text.
bool detect(const TriggerLexicon& lexicon, const TypeId& type, const std::string& text);

// Rule i: first-sentence hit and score < 5 -> 5.
// Rule ii (nationality only): no description hit and score > 2 -> 2.
int refine(int ensemble_score, TargetRelation relation, bool in_first_sentence,
           bool in_description);

// Baseline scored from trigger detection only: 5 / 2 / seeded coin on {3,4}.
int twd_alone(TargetRelation relation, bool in_first_sentence, bool in_description,
              std::uint64_t seed);

}  // namespace triplescore
