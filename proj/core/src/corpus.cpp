#include "triplescore/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

namespace triplescore {

namespace {

std::ifstream open_or_throw(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    return in;
}

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = line.find('\t', start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

[[noreturn]] void line_error(const std::string& path, std::size_t lineno, const std::string& what) {
    throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " + what);
}

bool is_punct_byte(unsigned char c) { return c < 0x80 && std::ispunct(c); }

std::int64_t parse_int(const std::string& s, bool& ok) {
    std::int64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    ok = ec == std::errc() && p == s.data() + s.size();
    return v;
}

}  // namespace

std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> tokens;
    std::size_t i = 0;
    const std::size_t n = text.size();
    while (i < n) {
        while (i < n && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        std::size_t j = i;
        while (j < n && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
        if (j > i) {
            std::size_t b = i, e = j;
            while (b < e && is_punct_byte(static_cast<unsigned char>(text[b]))) ++b;
            while (e > b && is_punct_byte(static_cast<unsigned char>(text[e - 1]))) --e;
            if (e > b) {
                std::string tok = text.substr(b, e - b);
                std::transform(tok.begin(), tok.end(), tok.begin(),
                               [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
                tokens.push_back(std::move(tok));
            }
        }
        i = j;
    }
    return tokens;
}

std::set<std::string> load_stoplist(const std::string& path) {
    auto in = open_or_throw(path);
    std::set<std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        out.insert(line);
    }
    return out;
}

CorpusLoadResult load_sentences(const std::string& path, const std::set<std::string>& stoplist,
                                const std::set<PersonId>& known_persons) {
    auto in = open_or_throw(path);
    CorpusLoadResult res;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto cols = split_tabs(line);
        if (cols.size() < 3) line_error(path, lineno, "expected sentence_id, text, mentions");
        AnnotatedSentence sent;
        bool ok = false;
        sent.id = parse_int(cols[0], ok);
        if (!ok) line_error(path, lineno, "bad sentence id '" + cols[0] + "'");
        sent.text = cols[1];
        for (std::size_t k = 2; k < cols.size(); ++k) {
            const std::string& m = cols[k];
            std::size_t c1 = m.rfind(':');
            std::size_t c0 = c1 == std::string::npos ? std::string::npos : m.rfind(':', c1 - 1);
            if (c0 == std::string::npos || c0 == 0)
                line_error(path, lineno, "bad mention '" + m + "'");
            Mention men;
            men.person = m.substr(0, c0);
            bool ok1 = false, ok2 = false;
            auto b = parse_int(m.substr(c0 + 1, c1 - c0 - 1), ok1);
            auto e = parse_int(m.substr(c1 + 1), ok2);
            if (!ok1 || !ok2 || b < 0 || e < b)
                line_error(path, lineno, "bad mention span in '" + m + "'");
            men.begin = static_cast<std::size_t>(b);
            men.end = static_cast<std::size_t>(e);
            if (men.end > sent.text.size())
                line_error(path, lineno, "mention span out of bounds in '" + m + "'");
            if (!known_persons.empty() && !known_persons.count(men.person))
                line_error(path, lineno, "unknown person id '" + men.person + "'");
            sent.mentions.push_back(std::move(men));
        }
        // Tokens count once per mentioned person; popularity counts mentions.
        std::vector<std::string> toks = tokenize(sent.text);
        std::set<PersonId> persons_here;
        for (const auto& men : sent.mentions) {
            res.popularity[men.person] += 1;
            persons_here.insert(men.person);
        }
        for (const auto& p : persons_here) {
            auto& counts = res.associated_text[p];
            for (const auto& t : toks) {
                if (stoplist.count(t)) continue;
                counts[t] += 1;
            }
        }
        res.corpus.sentences.push_back(std::move(sent));
    }
    return res;
}

std::vector<KbAssertion> load_kb(const std::string& path) {
    auto in = open_or_throw(path);
    std::vector<KbAssertion> out;
    std::set<KbAssertion> seen;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto cols = split_tabs(line);
        if (cols.size() != 2) line_error(path, lineno, "expected 2 columns, got " +
                                                           std::to_string(cols.size()));
        KbAssertion a{cols[0], cols[1]};
        if (seen.insert(a).second) out.push_back(std::move(a));
    }
    return out;
}

std::vector<GoldTriple> load_gold(const std::string& path) {
    auto in = open_or_throw(path);
    std::vector<GoldTriple> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto cols = split_tabs(line);
        if (cols.size() != 3) line_error(path, lineno, "expected 3 columns, got " +
                                                           std::to_string(cols.size()));
        bool ok = false;
        std::int64_t score = parse_int(cols[2], ok);
        if (!ok) line_error(path, lineno, "bad score '" + cols[2] + "'");
        if (score < kMinScore || score > kMaxScore)
            line_error(path, lineno, "score " + cols[2] + " out of range [0,7]");
        out.push_back(GoldTriple{KbAssertion{cols[0], cols[1]}, static_cast<int>(score)});
    }
    return out;
}

std::map<PersonId, std::string> load_descriptions(
    const std::string& path, const std::function<void(const std::string&)>& warn) {
    auto in = open_or_throw(path);
    std::map<PersonId, std::string> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto cols = split_tabs(line);
        if (cols.size() != 2) line_error(path, lineno, "expected 2 columns, got " +
                                                           std::to_string(cols.size()));
        auto [it, inserted] = out.insert_or_assign(cols[0], cols[1]);
        if (!inserted && warn)
            warn(path + ":" + std::to_string(lineno) + ": duplicate description for '" + cols[0] +
                 "', keeping the later one");
    }
    return out;
}

std::vector<KgTriple> load_kg_triples(const std::string& path) {
    auto in = open_or_throw(path);
    std::vector<KgTriple> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto cols = split_tabs(line);
        if (cols.size() != 3) line_error(path, lineno, "expected 3 columns, got " +
                                                           std::to_string(cols.size()));
        out.push_back(KgTriple{cols[0], cols[1], cols[2]});
    }
    return out;
}

void write_kb(const std::string& path, const std::vector<KbAssertion>& kb) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    for (const auto& a : kb) out << a.person << '\t' << a.type << '\n';
}

}  // namespace triplescore
