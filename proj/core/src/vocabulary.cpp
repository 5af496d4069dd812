#include "oplang/vocabulary.hpp"

#include <algorithm>
#include <cstdio>

#include "oplang/errors.hpp"

namespace oplang {

Vocabulary::Vocabulary(std::vector<std::pair<std::string, std::int64_t>> entries,
                       std::int64_t unk_count, int min_count)
    : min_count_(min_count) {
    tokens_.reserve(entries.size() + 1);
    counts_.reserve(entries.size() + 1);
    for (auto& [token, count] : entries) {
        index_.emplace(token, static_cast<int>(tokens_.size()));
        tokens_.push_back(std::move(token));
        counts_.push_back(count);
    }
    tokens_.push_back(kUnkToken);
    counts_.push_back(unk_count);
}

int Vocabulary::index_of(const std::string& token) const {
    const auto it = index_.find(token);
    return it == index_.end() ? unk_index() : it->second;
}

bool Vocabulary::contains(const std::string& token) const {
    return index_.count(token) != 0;
}

const std::string& Vocabulary::token_of(int index) const {
    if (index < 0 || index >= size())
        throw IndexOutOfRangeError("vocabulary index " + std::to_string(index) +
                                   " outside [0, " + std::to_string(size()) + ")");
    return tokens_[static_cast<std::size_t>(index)];
}

std::int64_t Vocabulary::count_of(int index) const {
    if (index < 0 || index >= size())
        throw IndexOutOfRangeError("vocabulary index " + std::to_string(index) +
                                   " outside [0, " + std::to_string(size()) + ")");
    return counts_[static_cast<std::size_t>(index)];
}

std::string Vocabulary::fingerprint() const {
    std::uint64_t h = 14695981039346656037ULL;
    auto mix = [&h](const std::string& s) {
        for (unsigned char c : s) {
            h ^= c;
            h *= 1099511628211ULL;
        }
    };
    for (int i = 0; i < size(); ++i) {
        mix(tokens_[static_cast<std::size_t>(i)]);
        mix("\t" + std::to_string(counts_[static_cast<std::size_t>(i)]) + "\n");
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

Vocabulary build_vocabulary(const std::vector<OpcodeDocument>& docs, int min_count) {
    if (min_count < 1) throw ConfigError("min_count must be >= 1");
    if (docs.empty()) throw ConfigError("cannot build a vocabulary from zero documents");

    std::map<std::string, std::int64_t> counts;
    for (const auto& doc : docs)
        for (const auto& fn : doc.functions)
            for (const auto& op : fn.opcodes) ++counts[op];

    std::vector<std::pair<std::string, std::int64_t>> kept;
    std::int64_t dropped = 0;
    for (const auto& [token, count] : counts) {
        if (count >= min_count)
            kept.emplace_back(token, count);
        else
            dropped += count;
    }
    if (kept.empty())
        throw EmptyVocabularyError("no token reaches min_count=" + std::to_string(min_count));

    std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    return Vocabulary(std::move(kept), dropped, min_count);
}

EncodedDocument encode(const OpcodeDocument& doc, const Vocabulary& vocab) {
    EncodedDocument out;
    out.doc_id = doc.doc_id;
    out.label = doc.label;
    out.functions.reserve(doc.functions.size());
    for (const auto& fn : doc.functions) {
        std::vector<int> indices;
        indices.reserve(fn.opcodes.size());
        for (const auto& op : fn.opcodes) indices.push_back(vocab.index_of(op));
        out.functions.push_back(std::move(indices));
    }
    return out;
}

std::vector<EncodedDocument> encode_all(const std::vector<OpcodeDocument>& docs,
                                        const Vocabulary& vocab) {
    std::vector<EncodedDocument> out;
    out.reserve(docs.size());
    for (const auto& doc : docs) out.push_back(encode(doc, vocab));
    return out;
}

OpcodeDocument decode(const EncodedDocument& doc, const Vocabulary& vocab) {
    OpcodeDocument out;
    out.doc_id = doc.doc_id;
    out.label = doc.label;
    out.functions.reserve(doc.functions.size());
    for (std::size_t f = 0; f < doc.functions.size(); ++f) {
        Function fn;
        fn.name = "fn_" + std::to_string(f);
        for (int idx : doc.functions[f]) fn.opcodes.push_back(vocab.token_of(idx));
        out.functions.push_back(std::move(fn));
    }
    return out;
}

CorpusStats corpus_stats(const std::vector<OpcodeDocument>& docs, int k) {
    if (k < 1) throw ConfigError("top-k requires k >= 1");

    CorpusStats stats;
    std::map<std::string, std::int64_t> global;
    std::map<std::string, std::map<std::string, std::int64_t>> per_class;
    std::map<std::string, std::pair<std::int64_t, std::int64_t>> length_acc; // (tokens, docs)

    for (const auto& doc : docs) {
        const auto n = static_cast<std::int64_t>(doc.opcode_count());
        auto& [tokens, count] = length_acc[doc.label];
        tokens += n;
        ++count;
        for (const auto& fn : doc.functions)
            for (const auto& op : fn.opcodes) {
                ++global[op];
                ++per_class[doc.label][op];
            }
    }

    auto top_k = [k](const std::map<std::string, std::int64_t>& counts) {
        std::vector<std::pair<std::string, std::int64_t>> ranked(counts.begin(), counts.end());
        std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
            if (a.second != b.second) return a.second > b.second;
            return a.first < b.first;
        });
        if (ranked.size() > static_cast<std::size_t>(k)) ranked.resize(static_cast<std::size_t>(k));
        return ranked;
    };

    stats.top_k_global = top_k(global);
    for (const auto& [label, counts] : per_class) stats.top_k_per_class[label] = top_k(counts);
    for (const auto& [label, acc] : length_acc)
        stats.per_class_mean_length[label] =
            static_cast<double>(acc.first) / static_cast<double>(acc.second);
    return stats;
}

} // namespace oplang
