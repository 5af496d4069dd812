#ifndef OPLANG_VOCABULARY_HPP
#define OPLANG_VOCABULARY_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "oplang/document.hpp"

namespace oplang {

inline constexpr const char* kUnkToken = "<unk>";

// Bidirectional opcode<->index map with corpus frequencies. Indices are dense
// 0..size-1, assigned by descending frequency with lexicographic tiebreak;
// the UNK slot is always last and absorbs the counts of dropped tokens.
class Vocabulary {
public:
    Vocabulary() = default;

    // entries must already be ordered by (count desc, token asc); unk_count is
    // the total frequency of tokens dropped by the threshold.
    Vocabulary(std::vector<std::pair<std::string, std::int64_t>> entries,
               std::int64_t unk_count, int min_count);

    int size() const { return static_cast<int>(tokens_.size()); }
    int unk_index() const { return size() - 1; }
    int min_count() const { return min_count_; }

    // Index lookup; out-of-vocabulary tokens map to unk_index.
    int index_of(const std::string& token) const;
    bool contains(const std::string& token) const;

    const std::string& token_of(int index) const; // IndexOutOfRange on bad index
    std::int64_t count_of(int index) const;

    // FNV-1a over "token\tcount\n" rows, as a 16-digit hex string. Binds
    // embedding matrices and checkpoints to the vocabulary they index.
    std::string fingerprint() const;

    bool operator==(const Vocabulary&) const = default;

private:
    std::map<std::string, int> index_;
    std::vector<std::string> tokens_;
    std::vector<std::int64_t> counts_;
    int min_count_ = 1;
};

// Vocabulary over all tokens with corpus frequency >= min_count, plus UNK.
// Throws EmptyVocabularyError when nothing survives, ConfigError on bad args.
Vocabulary build_vocabulary(const std::vector<OpcodeDocument>& docs, int min_count);

// OOV tokens map to unk_index; document shape is preserved.
EncodedDocument encode(const OpcodeDocument& doc, const Vocabulary& vocab);
std::vector<EncodedDocument> encode_all(const std::vector<OpcodeDocument>& docs,
                                        const Vocabulary& vocab);

// Inverse of encode on opcode content when min_count == 1; UNK indices come
// back as kUnkToken, and function names (which encoding drops) are
// synthesized as fn_<i>.
OpcodeDocument decode(const EncodedDocument& doc, const Vocabulary& vocab);

// Frequency statistics in the shape of the corpus-overview figures: mean
// opcode count per document per class, plus global and per-class top-k
// opcode rankings (count desc, token asc).
struct CorpusStats {
    std::map<std::string, double> per_class_mean_length;
    std::vector<std::pair<std::string, std::int64_t>> top_k_global;
    std::map<std::string, std::vector<std::pair<std::string, std::int64_t>>> top_k_per_class;
};

CorpusStats corpus_stats(const std::vector<OpcodeDocument>& docs, int k = 10);

} // namespace oplang

#endif
