#ifndef OPLANG_PIPELINE_HPP
#define OPLANG_PIPELINE_HPP

#include <string>
#include <vector>

#include "oplang/asm_parser.hpp"
#include "oplang/document.hpp"
#include "oplang/embedding.hpp"
#include "oplang/evaluate.hpp"
#include "oplang/train.hpp"
#include "oplang/vocabulary.hpp"

namespace oplang {

// Label-to-class mapping for one task. Binary folds every non-benign label
// into class 1 ("malware"); multiclass uses the sorted distinct labels.
struct ClassMap {
    TaskKind task = TaskKind::Binary;
    std::vector<std::string> class_names;
    int benign_index = 0;

    int class_of(const std::string& label) const; // ConfigError on unknown label
};

// labels must be the sorted distinct labels present in the corpus. For
// binary the benign label must be one of them.
ClassMap make_class_map(const std::vector<std::string>& labels, TaskKind task,
                        const std::string& benign_label);

std::vector<std::string> distinct_labels(const std::vector<OpcodeDocument>& docs);

// Picks the designated-benign label when the config leaves it empty:
// "benignlike" or "benign" if present, else the lexicographically first.
std::string resolve_benign_label(const std::vector<std::string>& labels,
                                 const std::string& requested);

struct PipelineConfig {
    ParserConfig parser{};
    FilterSet filter = default_filter_set();
    int min_count = 2;
    EmbeddingConfig embed{};
    TrainConfig train{};
    std::string benign_label; // empty = resolve from the corpus
};

struct PipelineOutcome {
    std::vector<char> train_flags; // split membership per input doc
    ClassMap classes;
    Vocabulary vocab;
    EmbeddingTrainResult embeddings;
    TrainResult training;
    EvalReport report;
};

// Applies class mapping and sequence clipping to already-encoded documents.
void assign_classes(std::vector<EncodedDocument>& docs, const ClassMap& classes);

// Full run over an opcode corpus: stratified split on raw labels, vocabulary
// and embeddings from the training side only, classifier training, held-out
// evaluation. Split, shuffling, and initialization all derive from the seeds
// in config, so a repeated run is bit-identical.
PipelineOutcome run_pipeline(const std::vector<OpcodeDocument>& docs,
                             const PipelineConfig& config);

} // namespace oplang

#endif
