#ifndef OPLANG_ASM_PARSER_HPP
#define OPLANG_ASM_PARSER_HPP

#include <filesystem>
#include <istream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "oplang/document.hpp"

namespace oplang {

// Tokens that match the opcode pattern but carry no operational behavior
// (assembler directives, data definitions). Membership test is on the
// lowercased token.
struct FilterSet {
    std::set<std::string> tokens;

    bool contains(const std::string& lowercased) const {
        return tokens.count(lowercased) != 0;
    }
};

// align/dd/db plus the other directives IDA listings routinely emit.
FilterSet default_filter_set();

struct ParserConfig {
    // A line is mined only when its segment tag starts with this prefix.
    std::string code_segment = ".text";

    bool operator==(const ParserConfig&) const = default;
};

// Mnemonic shape: 2-15 chars of [a-z0-9], first char a letter. The candidate
// token is lowercased before matching.
bool matches_opcode_pattern(const std::string& lowercased);

// Extracts the filtered, function-segmented opcode sequence of one file.
//
// Only lines whose segment tag (the part of the first whitespace-delimited
// token before ':') starts with config.code_segment are considered. On each
// such line the first token matching the opcode pattern is taken; if it is in
// the filter the line yields nothing. A body containing the token "proc"
// opens a function named after the preceding token, "endp" closes it; opcodes
// outside any pair accumulate into an anonymous function. Unrecognized lines
// are skipped.
//
// Throws EmptyDocumentError when no opcode survives, MalformedInputError on
// non-character data (embedded NUL bytes).
OpcodeDocument parse_asm_file(std::istream& text, const FilterSet& filter,
                              const ParserConfig& config,
                              const std::string& doc_id = "",
                              const std::string& label = "");

OpcodeDocument parse_asm_string(const std::string& text, const FilterSet& filter,
                                const ParserConfig& config,
                                const std::string& doc_id = "",
                                const std::string& label = "");

// Manifest record: file path relative to the corpus root, plus its label.
struct ManifestEntry {
    std::string path;
    std::string label;

    bool operator==(const ManifestEntry&) const = default;
};

struct ParseFailure {
    std::string path;
    std::string error_name;
    std::string message;
};

struct CorpusParseResult {
    std::vector<OpcodeDocument> documents; // sorted by doc_id
    std::vector<ParseFailure> failures;    // sorted by path
};

// Parses every manifest entry under root, collecting per-file failures
// instead of aborting the batch. A manifest entry naming a missing file is a
// ManifestMismatchError (thrown, not collected: the manifest itself is wrong).
CorpusParseResult parse_corpus(const std::filesystem::path& root,
                               const std::vector<ManifestEntry>& manifest,
                               const FilterSet& filter, const ParserConfig& config);

} // namespace oplang

#endif
