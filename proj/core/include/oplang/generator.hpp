#ifndef OPLANG_GENERATOR_HPP
#define OPLANG_GENERATOR_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "oplang/asm_parser.hpp"

namespace oplang {

// One synthetic family: opcodes are drawn i.i.d. from `probabilities` over
// `inventory`, so parsed corpora can be checked against known frequencies.
struct GeneratorClassSpec {
    std::string label;
    std::vector<std::string> inventory;
    std::vector<double> probabilities;
    int min_functions = 3;
    int max_functions = 8;
    int min_opcodes = 8;
    int max_opcodes = 24;
};

struct GeneratorSpec {
    std::vector<GeneratorClassSpec> classes;
    int docs_per_class = 100;
    std::uint64_t seed = 7;

    void validate() const; // ConfigError on empty classes, bad ranges,
                           // or probabilities not summing to 1
};

// Stock specs over a shared 40-mnemonic inventory. Each class boosts a
// disjoint triple of mnemonics to probability ~0.16 and spreads the rest
// uniformly, giving well-separated but overlapping families. num_classes
// must be 2 or 5; 2-class labels are benignlike/malwarelike.
GeneratorSpec default_generator_spec(int num_classes);

// Writes docs_per_class IDA-style .asm files per class under
// out_dir/<label>/ plus a tab-separated manifest at out_dir/manifest.txt,
// and returns the manifest entries (paths relative to out_dir, sorted).
// Output bytes depend only on the GeneratorSpec contents.
std::vector<ManifestEntry> generate_corpus(const GeneratorSpec& spec,
                                           const std::filesystem::path& out_dir);

} // namespace oplang

#endif
