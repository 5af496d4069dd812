#ifndef OPLANG_TRAIN_HPP
#define OPLANG_TRAIN_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "oplang/document.hpp"
#include "oplang/embedding.hpp"
#include "oplang/lstm.hpp"

namespace oplang {

enum class TaskKind { Binary, Multiclass };

std::string to_string(TaskKind task);
TaskKind task_from_string(const std::string& name);

enum class OptimizerKind { Sgd, Momentum, Adam };

std::string to_string(OptimizerKind kind);
OptimizerKind optimizer_from_string(const std::string& name);

struct TrainConfig {
    int epochs = 100;
    double learning_rate = 1e-3;
    OptimizerKind optimizer = OptimizerKind::Adam;
    std::uint64_t seed = 1;
    double split_fraction = 0.7;
    TaskKind task = TaskKind::Binary;
    bool ablate_second_layer = false;
    bool stratify = true;
    int hidden1 = 64;
    int hidden2 = 64;
    ClipLimits clip{};

    void validate() const; // ConfigError on out-of-range fields
};

// Train-membership flags for a labeled dataset. Deterministic given seed;
// with stratify, per-class proportions are preserved to within rounding
// (each class keeps at least one sample on both sides). Throws
// ClassTooSmallError when a class (or the whole set) has fewer than 2 docs.
std::vector<char> split_train_flags(const std::vector<std::string>& labels, double fraction,
                                    std::uint64_t seed, bool stratify);

template <typename Doc>
std::pair<std::vector<Doc>, std::vector<Doc>> split_dataset(const std::vector<Doc>& docs,
                                                            double fraction,
                                                            std::uint64_t seed,
                                                            bool stratify) {
    std::vector<std::string> labels;
    labels.reserve(docs.size());
    for (const auto& doc : docs) labels.push_back(doc.label);
    const std::vector<char> flags = split_train_flags(labels, fraction, seed, stratify);
    std::pair<std::vector<Doc>, std::vector<Doc>> out;
    for (std::size_t i = 0; i < docs.size(); ++i)
        (flags[i] ? out.first : out.second).push_back(docs[i]);
    return out;
}

// First-order optimizers sharing the visit_tensors traversal. Adam uses
// decay rates 0.9/0.999 and eps 1e-8.
class Optimizer {
public:
    Optimizer(OptimizerKind kind, double learning_rate);

    void step(LstmStack& model, const LstmStack& grads);

private:
    OptimizerKind kind_;
    double lr_;
    std::int64_t steps_ = 0;
    std::vector<std::vector<double>> m_; // momentum / first moment
    std::vector<std::vector<double>> v_; // second moment (Adam)
};

struct TrainResult {
    LstmStack model;
    std::vector<double> epoch_mean_loss;
};

// config.epochs full passes over docs in a per-epoch seed-shuffled order,
// one optimizer update per document. Documents must carry class_index and be
// encoded against the embeddings' vocabulary. Throws NonFiniteLossError
// (with the epoch index) if the loss diverges.
TrainResult train_classifier(LstmStack model, const EmbeddingMatrix& embeddings,
                             const std::vector<EncodedDocument>& docs,
                             const TrainConfig& config);

} // namespace oplang

#endif
