#include "oplang/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <numeric>

#include "oplang/errors.hpp"
#include "oplang/rng.hpp"

namespace oplang {

std::string to_string(TaskKind task) {
    return task == TaskKind::Binary ? "binary" : "multiclass";
}

TaskKind task_from_string(const std::string& name) {
    if (name == "binary") return TaskKind::Binary;
    if (name == "multiclass") return TaskKind::Multiclass;
    throw ConfigError("unknown task: " + name);
}

std::string to_string(OptimizerKind kind) {
    switch (kind) {
    case OptimizerKind::Sgd: return "sgd";
    case OptimizerKind::Momentum: return "momentum";
    default: return "adam";
    }
}

OptimizerKind optimizer_from_string(const std::string& name) {
    if (name == "sgd") return OptimizerKind::Sgd;
    if (name == "momentum") return OptimizerKind::Momentum;
    if (name == "adam") return OptimizerKind::Adam;
    throw ConfigError("unknown optimizer: " + name);
}

void TrainConfig::validate() const {
    if (epochs < 1) throw ConfigError("epochs must be >= 1");
    if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
    if (!(split_fraction > 0.0 && split_fraction < 1.0))
        throw ConfigError("split_fraction must be in (0, 1)");
    if (hidden1 < 1) throw ConfigError("hidden1 must be >= 1");
    if (!ablate_second_layer && hidden2 < 1) throw ConfigError("hidden2 must be >= 1");
    if (clip.max_functions_per_document < 1 || clip.max_opcodes_per_function < 1)
        throw ConfigError("clip limits must be >= 1");
}

std::vector<char> split_train_flags(const std::vector<std::string>& labels, double fraction,
                                    std::uint64_t seed, bool stratify) {
    if (!(fraction > 0.0 && fraction < 1.0))
        throw ConfigError("split fraction must be in (0, 1)");
    if (labels.size() < 2) throw ClassTooSmallError("dataset has fewer than 2 documents");

    std::map<std::string, std::vector<std::size_t>> groups;
    if (stratify) {
        for (std::size_t i = 0; i < labels.size(); ++i) groups[labels[i]].push_back(i);
    } else {
        auto& all = groups[""];
        all.resize(labels.size());
        std::iota(all.begin(), all.end(), std::size_t{0});
    }

    std::vector<char> flags(labels.size(), 0);
    std::uint64_t ordinal = 0;
    for (auto& [label, indices] : groups) {
        if (indices.size() < 2) {
            throw ClassTooSmallError(stratify
                                         ? "class '" + label + "' has fewer than 2 documents"
                                         : "dataset has fewer than 2 documents");
        }
        Rng rng = Rng::derive(seed, ordinal++);
        rng.shuffle(indices);
        auto take = static_cast<std::size_t>(std::llround(fraction * double(indices.size())));
        take = std::clamp<std::size_t>(take, 1, indices.size() - 1);
        for (std::size_t j = 0; j < take; ++j) flags[indices[j]] = 1;
    }
    return flags;
}

namespace {

struct FlatTensor {
    double* data;
    std::ptrdiff_t size;
};

std::vector<FlatTensor> flatten(LstmStack& stack) {
    std::vector<FlatTensor> out;
    visit_tensors(stack, [&](const std::string&, auto& tensor) {
        out.push_back({tensor.data(), tensor.size()});
    });
    return out;
}

std::vector<FlatTensor> flatten(const LstmStack& stack) {
    return flatten(const_cast<LstmStack&>(stack));
}

} // namespace

Optimizer::Optimizer(OptimizerKind kind, double learning_rate)
    : kind_(kind), lr_(learning_rate) {}

void Optimizer::step(LstmStack& model, const LstmStack& grads) {
    const std::vector<FlatTensor> params = flatten(model);
    const std::vector<FlatTensor> gs = flatten(grads);
    if (params.size() != gs.size()) throw ShapeMismatchError("optimizer: model/grad tensor count");

    if (kind_ != OptimizerKind::Sgd && m_.empty()) {
        m_.resize(params.size());
        for (std::size_t k = 0; k < params.size(); ++k)
            m_[k].assign(static_cast<std::size_t>(params[k].size), 0.0);
        if (kind_ == OptimizerKind::Adam) v_ = m_;
    }

    ++steps_;
    constexpr double beta1 = 0.9;
    constexpr double beta2 = 0.999;
    constexpr double eps = 1e-8;
    const double bias1 = 1.0 - std::pow(beta1, double(steps_));
    const double bias2 = 1.0 - std::pow(beta2, double(steps_));

    for (std::size_t k = 0; k < params.size(); ++k) {
        if (params[k].size != gs[k].size) throw ShapeMismatchError("optimizer: tensor shape");
        double* p = params[k].data;
        const double* g = gs[k].data;
        switch (kind_) {
        case OptimizerKind::Sgd:
            for (std::ptrdiff_t i = 0; i < params[k].size; ++i) p[i] -= lr_ * g[i];
            break;
        case OptimizerKind::Momentum:
            for (std::ptrdiff_t i = 0; i < params[k].size; ++i) {
                m_[k][std::size_t(i)] = beta1 * m_[k][std::size_t(i)] + g[i];
                p[i] -= lr_ * m_[k][std::size_t(i)];
            }
            break;
        case OptimizerKind::Adam:
            for (std::ptrdiff_t i = 0; i < params[k].size; ++i) {
                auto ui = std::size_t(i);
                m_[k][ui] = beta1 * m_[k][ui] + (1.0 - beta1) * g[i];
                v_[k][ui] = beta2 * v_[k][ui] + (1.0 - beta2) * g[i] * g[i];
                const double mhat = m_[k][ui] / bias1;
                const double vhat = v_[k][ui] / bias2;
                p[i] -= lr_ * mhat / (std::sqrt(vhat) + eps);
            }
            break;
        }
    }
}

TrainResult train_classifier(LstmStack model, const EmbeddingMatrix& embeddings,
                             const std::vector<EncodedDocument>& docs,
                             const TrainConfig& config) {
    config.validate();
    if (docs.empty()) throw ConfigError("training set is empty");
    for (const auto& doc : docs) {
        if (doc.class_index < 0 || doc.class_index >= model.num_classes)
            throw IndexOutOfRangeError("class index for document " + doc.doc_id);
    }

    Optimizer optimizer(config.optimizer, config.learning_rate);
    std::vector<std::size_t> order(docs.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    TrainResult result;
    result.epoch_mean_loss.reserve(std::size_t(config.epochs));
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        Rng rng = Rng::derive(config.seed, std::uint64_t(epoch));
        rng.shuffle(order);
        double loss_sum = 0.0;
        for (std::size_t idx : order) {
            LossAndGrads lg =
                loss_and_gradients(model, embeddings, docs[idx], docs[idx].class_index);
            if (!std::isfinite(lg.loss))
                throw NonFiniteLossError("epoch " + std::to_string(epoch) + ", document " +
                                         docs[idx].doc_id);
            optimizer.step(model, lg.grads);
            loss_sum += lg.loss;
        }
        result.epoch_mean_loss.push_back(loss_sum / double(docs.size()));
    }
    result.model = std::move(model);
    return result;
}

} // namespace oplang
