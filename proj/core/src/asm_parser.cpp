#include "oplang/asm_parser.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "oplang/errors.hpp"

namespace oplang {

namespace {

std::string to_lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

std::vector<std::string> split_tokens(const std::string& line) {
    std::vector<std::string> tokens;
    std::size_t i = 0;
    const std::size_t n = line.size();
    while (i < n) {
        while (i < n && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        std::size_t start = i;
        while (i < n && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        if (i > start) tokens.emplace_back(line.substr(start, i - start));
    }
    return tokens;
}

} // namespace

FilterSet default_filter_set() {
    return FilterSet{{"align", "dd", "db", "dw", "dq", "dt", "extrn", "public",
                      "proc", "endp", "assume", "unicode", "byte", "word",
                      "dword", "offset"}};
}

bool matches_opcode_pattern(const std::string& s) {
    if (s.size() < 2 || s.size() > 15) return false;
    if (s[0] < 'a' || s[0] > 'z') return false;
    for (char c : s) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9');
        if (!ok) return false;
    }
    return true;
}

OpcodeDocument parse_asm_file(std::istream& text, const FilterSet& filter,
                              const ParserConfig& config, const std::string& doc_id,
                              const std::string& label) {
    OpcodeDocument doc;
    doc.doc_id = doc_id;
    doc.label = label;

    Function current;         // the function being accumulated
    bool in_proc = false;     // inside an explicit proc/endp pair
    int anon_counter = 0;

    auto flush = [&] {
        if (!current.opcodes.empty()) doc.functions.push_back(std::move(current));
        current = Function{};
    };

    std::string line;
    while (std::getline(text, line)) {
        if (line.find('\0') != std::string::npos)
            throw MalformedInputError("embedded NUL byte in assembly text");
        if (!line.empty() && line.back() == '\r') line.pop_back();

        // Segment tag = part of the first whitespace-delimited token before ':'.
        std::size_t p = 0;
        while (p < line.size() && std::isspace(static_cast<unsigned char>(line[p]))) ++p;
        std::size_t tag_end = p;
        while (tag_end < line.size() &&
               !std::isspace(static_cast<unsigned char>(line[tag_end])))
            ++tag_end;
        if (tag_end == p) continue;
        std::string tag = line.substr(p, tag_end - p);
        if (auto colon = tag.find(':'); colon != std::string::npos) tag = tag.substr(0, colon);
        if (!tag.starts_with(config.code_segment)) continue;

        std::string body = line.substr(tag_end);
        if (auto semi = body.find(';'); semi != std::string::npos) body.resize(semi);

        const std::vector<std::string> tokens = split_tokens(body);
        if (tokens.empty()) continue;

        // proc/endp markers segment the stream and never emit opcodes.
        bool is_marker = false;
        for (std::size_t i = 0; i < tokens.size(); ++i) {
            const std::string low = to_lower(tokens[i]);
            if (low == "proc") {
                flush();
                in_proc = true;
                current.name = i > 0 ? tokens[i - 1] : "anon_" + std::to_string(anon_counter++);
                is_marker = true;
                break;
            }
            if (low == "endp") {
                flush();
                in_proc = false;
                is_marker = true;
                break;
            }
        }
        if (is_marker) continue;

        for (const auto& raw : tokens) {
            const std::string token = to_lower(raw);
            if (!matches_opcode_pattern(token)) continue;
            // First match decides the line; a filtered match emits nothing.
            if (!filter.contains(token)) {
                if (current.opcodes.empty() && current.name.empty() && !in_proc)
                    current.name = "anon_" + std::to_string(anon_counter++);
                current.opcodes.push_back(token);
            }
            break;
        }
    }
    flush();

    if (doc.functions.empty())
        throw EmptyDocumentError("no opcode survived extraction" +
                                 (doc_id.empty() ? "" : " in " + doc_id));
    return doc;
}

OpcodeDocument parse_asm_string(const std::string& text, const FilterSet& filter,
                                const ParserConfig& config, const std::string& doc_id,
                                const std::string& label) {
    std::istringstream in(text);
    return parse_asm_file(in, filter, config, doc_id, label);
}

CorpusParseResult parse_corpus(const std::filesystem::path& root,
                               const std::vector<ManifestEntry>& manifest,
                               const FilterSet& filter, const ParserConfig& config) {
    CorpusParseResult result;
    for (const auto& entry : manifest) {
        const std::filesystem::path full = root / entry.path;
        if (!std::filesystem::exists(full))
            throw ManifestMismatchError("manifest names missing file " + entry.path);
        std::ifstream in(full, std::ios::binary);
        if (!in)
            throw ManifestMismatchError("manifest entry unreadable: " + entry.path);
        try {
            result.documents.push_back(
                parse_asm_file(in, filter, config, entry.path, entry.label));
        } catch (const Error& err) {
            result.failures.push_back({entry.path, err.name(), err.what()});
        }
    }
    std::sort(result.documents.begin(), result.documents.end(),
              [](const auto& a, const auto& b) { return a.doc_id < b.doc_id; });
    std::sort(result.failures.begin(), result.failures.end(),
              [](const auto& a, const auto& b) { return a.path < b.path; });
    return result;
}

} // namespace oplang
