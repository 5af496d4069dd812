#ifndef OPLANG_DOCUMENT_HPP
#define OPLANG_DOCUMENT_HPP

#include <string>
#include <vector>

namespace oplang {

// One procedure's opcode stream, in source order.
struct Function {
    std::string name;
    std::vector<std::string> opcodes;

    bool operator==(const Function&) const = default;
};

// One file's opcode content: ordered functions plus a class label.
struct OpcodeDocument {
    std::string doc_id;
    std::string label;
    std::vector<Function> functions;

    bool operator==(const OpcodeDocument&) const = default;

    std::size_t opcode_count() const {
        std::size_t n = 0;
        for (const auto& fn : functions) n += fn.opcodes.size();
        return n;
    }
};

// Same shape with tokens replaced by vocabulary indices. class_index is
// assigned by the task mapping (binary or multiclass), -1 until then.
struct EncodedDocument {
    std::string doc_id;
    std::string label;
    int class_index = -1;
    std::vector<std::vector<int>> functions;

    bool operator==(const EncodedDocument&) const = default;

    std::size_t opcode_count() const {
        std::size_t n = 0;
        for (const auto& fn : functions) n += fn.size();
        return n;
    }
};

} // namespace oplang

#endif
