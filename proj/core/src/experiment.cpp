#include "oplang/experiment.hpp"

#include <limits>
#include <utility>

#include "oplang/errors.hpp"
#include "oplang/lstm.hpp"

namespace oplang {

void ExperimentGrid::validate() const {
    if (windows.empty() || models.empty() || ablations.empty() || tasks.empty())
        throw ConfigError("experiment grid has an empty dimension");
    for (int w : windows)
        if (w < 1) throw ConfigError("experiment window must be >= 1");
}

ExperimentReport run_experiment(const std::vector<OpcodeDocument>& docs,
                                const ExperimentGrid& grid, const PipelineConfig& base) {
    grid.validate();
    base.embed.validate();
    base.train.validate();
    if (docs.empty()) throw ConfigError("corpus is empty");

    std::vector<std::string> labels;
    labels.reserve(docs.size());
    for (const auto& doc : docs) labels.push_back(doc.label);
    const std::vector<char> flags = split_train_flags(labels, base.train.split_fraction,
                                                      base.train.seed, base.train.stratify);
    std::vector<OpcodeDocument> train_docs;
    std::vector<OpcodeDocument> test_docs;
    for (std::size_t i = 0; i < docs.size(); ++i)
        (flags[i] ? train_docs : test_docs).push_back(docs[i]);

    const std::vector<std::string> all_labels = distinct_labels(docs);
    const std::string benign = resolve_benign_label(all_labels, base.benign_label);

    const Vocabulary vocab = build_vocabulary(train_docs, base.min_count);
    const std::vector<EncodedDocument> train_enc = encode_all(train_docs, vocab);
    const std::vector<EncodedDocument> test_enc = encode_all(test_docs, vocab);

    ExperimentReport report;
    for (int window : grid.windows) {
        for (EmbeddingModel model : grid.models) {
            EmbeddingConfig embed_cfg = base.embed;
            embed_cfg.window = window;
            embed_cfg.model = model;
            const EmbeddingTrainResult emb = train_embeddings(train_enc, vocab, embed_cfg);
            for (bool ablate : grid.ablations) {
                for (TaskKind task : grid.tasks) {
                    const ClassMap classes = make_class_map(all_labels, task, benign);
                    std::vector<EncodedDocument> tr = train_enc;
                    std::vector<EncodedDocument> te = test_enc;
                    assign_classes(tr, classes);
                    assign_classes(te, classes);
                    for (auto& doc : tr) doc = clip_document(std::move(doc), base.train.clip);
                    for (auto& doc : te) doc = clip_document(std::move(doc), base.train.clip);

                    LstmInit init;
                    init.embedding_dim = embed_cfg.dim;
                    init.hidden1 = base.train.hidden1;
                    init.hidden2 = base.train.hidden2;
                    init.num_classes = int(classes.class_names.size());
                    init.ablate_second_layer = ablate;
                    init.seed = base.train.seed;

                    TrainConfig train_cfg = base.train;
                    train_cfg.task = task;
                    train_cfg.ablate_second_layer = ablate;
                    const TrainResult trained = train_classifier(
                        init_lstm_stack(init), emb.matrix, tr, train_cfg);
                    const EvalReport eval = evaluate(trained.model, emb.matrix, te, task,
                                                     classes.class_names,
                                                     classes.benign_index);

                    ExperimentRow row;
                    row.window = window;
                    row.model = model;
                    row.ablate = ablate;
                    row.task = task;
                    row.accuracy = eval.accuracy;
                    row.auc = eval.auc_defined ? eval.auc
                                               : std::numeric_limits<double>::quiet_NaN();
                    report.rows.push_back(row);
                }
            }
        }
    }
    return report;
}

} // namespace oplang
