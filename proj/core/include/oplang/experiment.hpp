#ifndef OPLANG_EXPERIMENT_HPP
#define OPLANG_EXPERIMENT_HPP

#include <vector>

#include "oplang/pipeline.hpp"

namespace oplang {

struct ExperimentGrid {
    std::vector<int> windows = {1, 2, 4, 10};
    std::vector<EmbeddingModel> models = {EmbeddingModel::Cbow, EmbeddingModel::SkipGram};
    std::vector<bool> ablations = {false, true};
    std::vector<TaskKind> tasks = {TaskKind::Binary, TaskKind::Multiclass};

    void validate() const; // ConfigError on an empty dimension
};

struct ExperimentRow {
    int window = 0;
    EmbeddingModel model = EmbeddingModel::Cbow;
    bool ablate = false;
    TaskKind task = TaskKind::Binary;
    double accuracy = 0.0;
    double auc = 0.0; // macro one-vs-rest for multiclass; NaN if undefined
};

struct ExperimentReport {
    std::vector<ExperimentRow> rows;
};

// Runs every grid cell over one shared split and vocabulary; embeddings are
// retrained per (window, model) and reused across the ablation/task cells.
// Rows come out in window > model > ablate > task nesting order.
ExperimentReport run_experiment(const std::vector<OpcodeDocument>& docs,
                                const ExperimentGrid& grid, const PipelineConfig& base);

} // namespace oplang

#endif
