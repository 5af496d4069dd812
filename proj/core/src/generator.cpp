#include "oplang/generator.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>
#include <string>

#include "oplang/errors.hpp"
#include "oplang/io.hpp"
#include "oplang/rng.hpp"

namespace oplang {

void GeneratorSpec::validate() const {
    if (classes.empty()) throw ConfigError("generator spec has no classes");
    if (docs_per_class < 1) throw ConfigError("docs_per_class must be >= 1");
    std::set<std::string> labels;
    for (const auto& cls : classes) {
        if (cls.label.empty()) throw ConfigError("generator class label is empty");
        if (!labels.insert(cls.label).second)
            throw ConfigError("duplicate generator class label '" + cls.label + "'");
        if (cls.inventory.empty() || cls.inventory.size() != cls.probabilities.size())
            throw ConfigError("class '" + cls.label + "': inventory/probability size mismatch");
        double sum = 0.0;
        for (double p : cls.probabilities) {
            if (!(p >= 0.0)) throw ConfigError("class '" + cls.label + "': negative probability");
            sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-9)
            throw ConfigError("class '" + cls.label + "': probabilities sum to " +
                              std::to_string(sum));
        if (cls.min_functions < 1 || cls.max_functions < cls.min_functions ||
            cls.min_opcodes < 1 || cls.max_opcodes < cls.min_opcodes)
            throw ConfigError("class '" + cls.label + "': bad size ranges");
    }
}

namespace {

const std::vector<std::string>& shared_inventory() {
    static const std::vector<std::string> inv = {
        "mov",  "push", "pop",  "call",  "ret",   "add",  "sub", "xor",
        "cmp",  "jmp",  "jz",   "jnz",   "lea",   "test", "and", "or",
        "shl",  "shr",  "inc",  "dec",   "imul",  "idiv", "movzx", "movsx",
        "xchg", "nop",  "int",  "leave", "enter", "sbb",  "adc", "neg",
        "not",  "rol",  "ror",  "jle",   "jge",   "ja",   "jb",  "sete"};
    return inv;
}

GeneratorClassSpec boosted_class(const std::string& label, int mode_start) {
    GeneratorClassSpec cls;
    cls.label = label;
    cls.inventory = shared_inventory();
    const std::size_t n = cls.inventory.size();
    cls.probabilities.assign(n, 0.55 / double(n));
    for (int j = 0; j < 3; ++j) cls.probabilities[std::size_t(mode_start + j)] += 0.15;
    return cls;
}

std::string hex_address(std::uint32_t addr) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%08X", addr);
    return buf;
}

const std::vector<std::string>& operand_pool() {
    static const std::vector<std::string> pool = {
        "eax",           "ebx",
        "ecx",           "edx",
        "esi",           "edi",
        "eax, ebx",      "ecx, 1",
        "edx, [ebp+8]",  "esp, 8",
        "[ebp-4], eax",  "dword ptr [esi]",
        "0Ah",           "offset unk_403000"};
    return pool;
}

} // namespace

GeneratorSpec default_generator_spec(int num_classes) {
    GeneratorSpec spec;
    if (num_classes == 2) {
        spec.classes.push_back(boosted_class("benignlike", 0));
        spec.classes.push_back(boosted_class("malwarelike", 6));
    } else if (num_classes == 5) {
        spec.classes.push_back(boosted_class("adwarelike", 0));
        spec.classes.push_back(boosted_class("backdoorlike", 3));
        spec.classes.push_back(boosted_class("downloaderlike", 6));
        spec.classes.push_back(boosted_class("trojanlike", 9));
        spec.classes.push_back(boosted_class("wormlike", 12));
    } else {
        throw ConfigError("stock generator specs cover 2 or 5 classes");
    }
    return spec;
}

std::vector<ManifestEntry> generate_corpus(const GeneratorSpec& spec,
                                           const std::filesystem::path& out_dir) {
    spec.validate();
    std::vector<ManifestEntry> manifest;

    for (std::size_t c = 0; c < spec.classes.size(); ++c) {
        const auto& cls = spec.classes[c];
        std::vector<double> cumulative(cls.probabilities.size());
        std::partial_sum(cls.probabilities.begin(), cls.probabilities.end(), cumulative.begin());
        std::filesystem::create_directories(out_dir / cls.label);

        for (int d = 0; d < spec.docs_per_class; ++d) {
            Rng rng = Rng::derive(spec.seed, (std::uint64_t(c) << 32) | std::uint64_t(d));
            std::string text;
            std::uint32_t addr = 0x401000;
            const int n_funcs = rng.uniform_int(cls.min_functions, cls.max_functions);
            for (int f = 0; f < n_funcs; ++f) {
                const std::string name = "sub_" + hex_address(addr).substr(2);
                text += ".text:" + hex_address(addr) + " ; ---- " + name + " ----\n";
                text += ".text:" + hex_address(addr) + " " + name + " proc near\n";
                const int n_ops = rng.uniform_int(cls.min_opcodes, cls.max_opcodes);
                for (int k = 0; k < n_ops; ++k) {
                    addr += std::uint32_t(rng.uniform_int(1, 6));
                    if (rng.below(12) == 0)
                        text += ".text:" + hex_address(addr) + " loc_" +
                                hex_address(addr).substr(2) + ":\n";
                    std::string mnemonic =
                        cls.inventory[rng.sample_cumulative(cumulative)];
                    if (rng.below(8) == 0)
                        for (char& ch : mnemonic)
                            ch = char(std::toupper(static_cast<unsigned char>(ch)));
                    std::string line = ".text:" + hex_address(addr) + "     " + mnemonic;
                    if (rng.below(5) != 0) {
                        line.append(std::max<std::size_t>(1, 12 - mnemonic.size()), ' ');
                        line += operand_pool()[rng.below(operand_pool().size())];
                    }
                    if (rng.below(10) == 0) line += " ; " + std::to_string(k);
                    text += line + "\n";
                }
                addr += 4;
                text += ".text:" + hex_address(addr) + " " + name + " endp\n";
                addr += 4;
                if (rng.below(2) == 0) {
                    text += ".text:" + hex_address(addr) + "     align 10h\n";
                    addr += 4;
                }
                if (rng.below(6) == 0) {
                    text += ".text:" + hex_address(addr) + "     dd 0\n";
                    addr += 4;
                }
            }
            std::uint32_t daddr = 0x403000;
            const int n_data = rng.uniform_int(2, 4);
            for (int k = 0; k < n_data; ++k) {
                text += ".data:" + hex_address(daddr) + " byte_" + hex_address(daddr).substr(2) +
                        " db " + std::to_string(rng.below(256)) + "\n";
                daddr += 4;
            }

            char stem[32];
            std::snprintf(stem, sizeof(stem), "doc_%03d.asm", d);
            const std::string relpath = cls.label + "/" + stem;
            write_text_file(out_dir / relpath, text);
            manifest.push_back({relpath, cls.label});
        }
    }

    std::sort(manifest.begin(), manifest.end(),
              [](const ManifestEntry& a, const ManifestEntry& b) { return a.path < b.path; });
    write_manifest(out_dir / "manifest.txt", manifest);
    return manifest;
}

} // namespace oplang
