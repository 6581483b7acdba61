#pragma once

#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "triplescore/types.hpp"

namespace triplescore {

// Tokenization: split on whitespace, strip surrounding punctuation,
// lowercase (ASCII), drop empty and pure-punctuation tokens.
std::vector<std::string> tokenize(const std::string& text);

std::set<std::string> load_stoplist(const std::string& path);

struct CorpusLoadResult {
    AnnotatedCorpus corpus;
    std::map<PersonId, TokenCounts> associated_text;
    std::map<PersonId, std::int64_t> popularity;
};

// Sentence file: sentence_id<TAB>text<TAB>m1<TAB>m2..., mK = person:start:end.
// A sentence's tokens are aggregated once per mentioned person; popularity
// counts every mention. `known_persons`, when nonempty, rejects mentions of
// ids outside the set.
CorpusLoadResult load_sentences(const std::string& path, const std::set<std::string>& stoplist,
                                const std::set<PersonId>& known_persons = {});

// KB file: person<TAB>type. Deduplicated, first-occurrence order.
std::vector<KbAssertion> load_kb(const std::string& path);

// Gold file: person<TAB>type<TAB>score with score in [0,7].
std::vector<GoldTriple> load_gold(const std::string& path);

// Descriptions: person<TAB>text. Later duplicates overwrite earlier ones;
// `warn` is invoked once per overwrite.
std::map<PersonId, std::string> load_descriptions(
    const std::string& path, const std::function<void(const std::string&)>& warn = {});

struct KgTriple {
    EntityId head;
    RelationId relation;
    EntityId tail;

    bool operator==(const KgTriple&) const = default;
    auto operator<=>(const KgTriple&) const = default;
};

// KG triples: head<TAB>relation<TAB>tail.
std::vector<KgTriple> load_kg_triples(const std::string& path);

void write_kb(const std::string& path, const std::vector<KbAssertion>& kb);

}  // namespace triplescore
