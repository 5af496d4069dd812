#include "oplang/pipeline.hpp"

#include <algorithm>
#include <set>
#include <utility>

#include "oplang/errors.hpp"
#include "oplang/lstm.hpp"

namespace oplang {

int ClassMap::class_of(const std::string& label) const {
    if (task == TaskKind::Binary) return label == class_names[0] ? 0 : 1;
    auto it = std::find(class_names.begin(), class_names.end(), label);
    if (it == class_names.end()) throw ConfigError("label not in class set: " + label);
    return int(it - class_names.begin());
}

ClassMap make_class_map(const std::vector<std::string>& labels, TaskKind task,
                        const std::string& benign_label) {
    if (labels.empty()) throw ConfigError("no labels to build a class map from");
    ClassMap map;
    map.task = task;
    if (task == TaskKind::Binary) {
        if (std::find(labels.begin(), labels.end(), benign_label) == labels.end())
            throw ConfigError("benign label '" + benign_label + "' not present in corpus");
        map.class_names = {benign_label, "malware"};
        map.benign_index = 0;
    } else {
        map.class_names = labels;
        auto it = std::find(labels.begin(), labels.end(), benign_label);
        map.benign_index = it == labels.end() ? 0 : int(it - labels.begin());
    }
    return map;
}

std::vector<std::string> distinct_labels(const std::vector<OpcodeDocument>& docs) {
    std::set<std::string> seen;
    for (const auto& doc : docs) seen.insert(doc.label);
    return {seen.begin(), seen.end()};
}

std::string resolve_benign_label(const std::vector<std::string>& labels,
                                 const std::string& requested) {
    if (!requested.empty()) return requested;
    if (labels.empty()) throw ConfigError("no labels in corpus");
    for (const char* candidate : {"benignlike", "benign"})
        if (std::find(labels.begin(), labels.end(), candidate) != labels.end())
            return candidate;
    return labels.front();
}

void assign_classes(std::vector<EncodedDocument>& docs, const ClassMap& classes) {
    for (auto& doc : docs) doc.class_index = classes.class_of(doc.label);
}

PipelineOutcome run_pipeline(const std::vector<OpcodeDocument>& docs,
                             const PipelineConfig& config) {
    config.embed.validate();
    config.train.validate();
    if (docs.empty()) throw ConfigError("corpus is empty");

    PipelineOutcome out;
    std::vector<std::string> labels;
    labels.reserve(docs.size());
    for (const auto& doc : docs) labels.push_back(doc.label);
    out.train_flags = split_train_flags(labels, config.train.split_fraction, config.train.seed,
                                        config.train.stratify);

    std::vector<OpcodeDocument> train_docs;
    std::vector<OpcodeDocument> test_docs;
    for (std::size_t i = 0; i < docs.size(); ++i)
        (out.train_flags[i] ? train_docs : test_docs).push_back(docs[i]);

    const std::string benign =
        resolve_benign_label(distinct_labels(docs), config.benign_label);
    out.classes = make_class_map(distinct_labels(docs), config.train.task, benign);

    out.vocab = build_vocabulary(train_docs, config.min_count);
    std::vector<EncodedDocument> train_enc = encode_all(train_docs, out.vocab);
    std::vector<EncodedDocument> test_enc = encode_all(test_docs, out.vocab);
    assign_classes(train_enc, out.classes);
    assign_classes(test_enc, out.classes);

    out.embeddings = train_embeddings(train_enc, out.vocab, config.embed);

    // Length caps apply to classifier inputs only; embeddings above saw the
    // full sequences.
    for (auto& doc : train_enc) doc = clip_document(std::move(doc), config.train.clip);
    for (auto& doc : test_enc) doc = clip_document(std::move(doc), config.train.clip);

    LstmInit init;
    init.embedding_dim = config.embed.dim;
    init.hidden1 = config.train.hidden1;
    init.hidden2 = config.train.hidden2;
    init.num_classes = int(out.classes.class_names.size());
    init.ablate_second_layer = config.train.ablate_second_layer;
    init.seed = config.train.seed;
    LstmStack model = init_lstm_stack(init);

    out.training = train_classifier(std::move(model), out.embeddings.matrix, train_enc,
                                    config.train);
    out.report = evaluate(out.training.model, out.embeddings.matrix, test_enc,
                          config.train.task, out.classes.class_names,
                          out.classes.benign_index);
    return out;
}

} // namespace oplang
