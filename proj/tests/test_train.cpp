#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "oplang/errors.hpp"
#include "oplang/rng.hpp"
#include "oplang/train.hpp"
#include "oracle.hpp"

using namespace oplang;

namespace {

EmbeddingMatrix tiny_embeddings(int size, int dim, std::uint64_t seed) {
    EmbeddingMatrix m;
    m.input_vectors.resize(size, dim);
    m.output_vectors = RowMatrixXd::Zero(size, dim);
    Rng rng(seed);
    for (int i = 0; i < size; ++i)
        for (int j = 0; j < dim; ++j) m.input_vectors(i, j) = rng.uniform(-1.0, 1.0);
    return m;
}

// Two separable classes over a 6-token vocabulary: class 0 draws from the
// low half, class 1 from the high half.
std::vector<EncodedDocument> separable_docs(int per_class, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<EncodedDocument> docs;
    for (int cls = 0; cls < 2; ++cls) {
        for (int d = 0; d < per_class; ++d) {
            EncodedDocument doc;
            doc.doc_id = "d" + std::to_string(cls) + "_" + std::to_string(d);
            doc.label = cls == 0 ? "a" : "b";
            doc.class_index = cls;
            doc.functions.resize(2);
            for (auto& fn : doc.functions) {
                fn.resize(std::size_t(rng.uniform_int(3, 6)));
                for (auto& token : fn) token = cls * 3 + int(rng.below(3));
            }
            docs.push_back(std::move(doc));
        }
    }
    return docs;
}

std::vector<std::string> labels_of(int a, int b, int c = 0) {
    std::vector<std::string> labels;
    labels.insert(labels.end(), std::size_t(a), "alpha");
    labels.insert(labels.end(), std::size_t(b), "beta");
    labels.insert(labels.end(), std::size_t(c), "gamma");
    return labels;
}

} // namespace

TEST_SUITE("train") {

TEST_CASE("enum names round-trip and reject junk") {
    CHECK(to_string(TaskKind::Binary) == "binary");
    CHECK(to_string(TaskKind::Multiclass) == "multiclass");
    CHECK(task_from_string("binary") == TaskKind::Binary);
    CHECK(task_from_string("multiclass") == TaskKind::Multiclass);
    CHECK_THROWS_AS(task_from_string("Binary"), ConfigError);

    for (const auto kind : {OptimizerKind::Sgd, OptimizerKind::Momentum, OptimizerKind::Adam})
        CHECK(optimizer_from_string(to_string(kind)) == kind);
    CHECK(to_string(OptimizerKind::Adam) == "adam");
    CHECK_THROWS_AS(optimizer_from_string("rmsprop"), ConfigError);
}

TEST_CASE("config validation") {
    TrainConfig config;
    CHECK_NOTHROW(config.validate());

    auto broken = config;
    broken.epochs = 0;
    CHECK_THROWS_AS(broken.validate(), ConfigError);
    broken = config;
    broken.learning_rate = 0.0;
    CHECK_THROWS_AS(broken.validate(), ConfigError);
    broken = config;
    broken.split_fraction = 1.0;
    CHECK_THROWS_AS(broken.validate(), ConfigError);
    broken = config;
    broken.split_fraction = 0.0;
    CHECK_THROWS_AS(broken.validate(), ConfigError);
    broken = config;
    broken.hidden1 = 0;
    CHECK_THROWS_AS(broken.validate(), ConfigError);
    broken = config;
    broken.hidden2 = 0;
    CHECK_THROWS_AS(broken.validate(), ConfigError);
    broken = config;
    broken.hidden2 = 0;
    broken.ablate_second_layer = true;
    CHECK_NOTHROW(broken.validate());
    broken = config;
    broken.clip.max_opcodes_per_function = 0;
    CHECK_THROWS_AS(broken.validate(), ConfigError);
}

TEST_CASE("split is deterministic and disjoint") {
    const auto labels = labels_of(20, 30);
    const auto flags = split_train_flags(labels, 0.7, 42, true);
    REQUIRE(flags.size() == labels.size());
    CHECK(flags == split_train_flags(labels, 0.7, 42, true));
    CHECK(flags != split_train_flags(labels, 0.7, 43, true));

    const int train_total = int(std::count(flags.begin(), flags.end(), char(1)));
    CHECK(train_total == 35); // 14 of 20 plus 21 of 30
}

TEST_CASE("stratified split preserves per-class proportions") {
    const auto labels = labels_of(10, 40, 50);
    const auto flags = split_train_flags(labels, 0.8, 7, true);
    std::map<std::string, int> train_count, total;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        ++total[labels[i]];
        if (flags[i]) ++train_count[labels[i]];
    }
    CHECK(train_count["alpha"] == 8);
    CHECK(train_count["beta"] == 32);
    CHECK(train_count["gamma"] == 40);
    // Unstratified only pins the global count.
    const auto loose = split_train_flags(labels, 0.8, 7, false);
    CHECK(std::count(loose.begin(), loose.end(), char(1)) == 80);
}

TEST_CASE("split keeps at least one document per side") {
    const auto labels = labels_of(2, 2);
    for (const double fraction : {0.01, 0.99}) {
        const auto flags = split_train_flags(labels, fraction, 5, true);
        std::map<std::string, std::pair<int, int>> sides;
        for (std::size_t i = 0; i < labels.size(); ++i)
            (flags[i] ? sides[labels[i]].first : sides[labels[i]].second)++;
        for (const auto& [label, counts] : sides) {
            CAPTURE(label);
            CHECK(counts.first == 1);
            CHECK(counts.second == 1);
        }
    }
}

TEST_CASE("split rejects classes with fewer than two documents") {
    CHECK_THROWS_AS(split_train_flags(labels_of(5, 1), 0.7, 1, true), ClassTooSmallError);
    CHECK_THROWS_AS(split_train_flags({"solo"}, 0.7, 1, false), ClassTooSmallError);
    CHECK_THROWS_AS(split_train_flags({}, 0.7, 1, true), ClassTooSmallError);
    CHECK_THROWS_AS(split_train_flags(labels_of(5, 5), 1.5, 1, true), ConfigError);
}

TEST_CASE("split_dataset partitions without loss or reordering") {
    auto docs = separable_docs(6, 3);
    const auto [train, test] = split_dataset(docs, 0.5, 11, true);
    CHECK(train.size() == 6);
    CHECK(test.size() == 6);
    std::vector<std::string> seen;
    for (const auto& doc : train) seen.push_back(doc.doc_id);
    for (const auto& doc : test) seen.push_back(doc.doc_id);
    std::sort(seen.begin(), seen.end());
    CHECK(std::adjacent_find(seen.begin(), seen.end()) == seen.end());
    CHECK(seen.size() == docs.size());
    // Relative order within each side follows the input order.
    for (std::size_t i = 1; i < train.size(); ++i)
        CHECK(train[i - 1].doc_id < train[i].doc_id);
}

TEST_CASE("sgd applies the exact update") {
    LstmInit init;
    init.embedding_dim = 2;
    init.hidden1 = 2;
    init.hidden2 = 2;
    init.seed = 13;
    auto model = init_lstm_stack(init);
    auto grads = zeros_like(model);
    visit_tensors(grads, [](const std::string&, auto& tensor) { tensor.setConstant(2.0); });
    auto expect = model;
    visit_tensors(expect, [](const std::string&, auto& tensor) { tensor.array() -= 0.5 * 2.0; });

    Optimizer opt(OptimizerKind::Sgd, 0.5);
    opt.step(model, grads);
    bool equal = true;
    visit_tensors(model, [&](const std::string& name, auto& tensor) {
        visit_tensors(expect, [&](const std::string& ename, auto& etensor) {
            if (ename == name && !(tensor.array() == etensor.array()).all()) equal = false;
        });
    });
    CHECK(equal);
}

TEST_CASE("momentum accumulates velocity") {
    LstmInit init;
    init.embedding_dim = 1;
    init.hidden1 = 1;
    init.hidden2 = 1;
    init.seed = 13;
    auto model = init_lstm_stack(init);
    const double start = model.softmax_b(0);
    auto grads = zeros_like(model);
    visit_tensors(grads, [](const std::string&, auto& tensor) { tensor.setConstant(1.0); });

    Optimizer opt(OptimizerKind::Momentum, 0.1);
    opt.step(model, grads);
    CHECK(model.softmax_b(0) == doctest::Approx(start - 0.1).epsilon(1e-15));
    opt.step(model, grads);
    // Velocity is 0.9 * 1 + 1 = 1.9 on the second step.
    CHECK(model.softmax_b(0) == doctest::Approx(start - 0.1 - 0.19).epsilon(1e-12));
}

TEST_CASE("adam first step moves by the learning rate") {
    LstmInit init;
    init.embedding_dim = 1;
    init.hidden1 = 1;
    init.hidden2 = 1;
    init.seed = 29;
    auto model = init_lstm_stack(init);
    const double start = model.softmax_b(0);
    auto grads = zeros_like(model);
    visit_tensors(grads, [](const std::string&, auto& tensor) { tensor.setConstant(3.0); });

    Optimizer opt(OptimizerKind::Adam, 0.01);
    opt.step(model, grads);
    // Bias-corrected moments make the first update lr * g/(|g| + ~eps).
    CHECK(model.softmax_b(0) == doctest::Approx(start - 0.01).epsilon(1e-6));
}

TEST_CASE("training is deterministic and drives the loss down") {
    const auto docs = separable_docs(8, 21);
    const auto emb = tiny_embeddings(6, 4, 21);
    LstmInit init;
    init.embedding_dim = 4;
    init.hidden1 = 8;
    init.hidden2 = 8;
    init.num_classes = 2;
    init.seed = 5;

    TrainConfig config;
    config.epochs = 30;
    config.learning_rate = 5e-3;
    config.seed = 5;

    const auto first = train_classifier(init_lstm_stack(init), emb, docs, config);
    const auto second = train_classifier(init_lstm_stack(init), emb, docs, config);
    REQUIRE(first.epoch_mean_loss.size() == 30);
    CHECK(first.epoch_mean_loss == second.epoch_mean_loss);
    CHECK((first.model.softmax_W.array() == second.model.softmax_W.array()).all());
    CHECK(first.epoch_mean_loss.back() < 0.5 * first.epoch_mean_loss.front());

    // The trained model separates the classes it saw.
    int correct = 0;
    for (const auto& doc : docs)
        if (predict(first.model, emb, doc).predicted_class == doc.class_index) ++correct;
    CHECK(correct == int(docs.size()));
}

TEST_CASE("all three optimizers make progress") {
    const auto docs = separable_docs(5, 33);
    const auto emb = tiny_embeddings(6, 4, 33);
    LstmInit init;
    init.embedding_dim = 4;
    init.hidden1 = 6;
    init.hidden2 = 6;
    init.seed = 9;
    for (const auto kind : {OptimizerKind::Sgd, OptimizerKind::Momentum, OptimizerKind::Adam}) {
        CAPTURE(to_string(kind));
        TrainConfig config;
        config.epochs = 20;
        config.optimizer = kind;
        config.learning_rate = kind == OptimizerKind::Adam ? 5e-3 : 5e-2;
        config.seed = 9;
        const auto result = train_classifier(init_lstm_stack(init), emb, docs, config);
        CHECK(result.epoch_mean_loss.back() < result.epoch_mean_loss.front());
    }
}

TEST_CASE("training rejects unlabeled or out-of-range documents") {
    auto docs = separable_docs(3, 44);
    const auto emb = tiny_embeddings(6, 4, 44);
    LstmInit init;
    init.embedding_dim = 4;
    init.hidden1 = 4;
    init.hidden2 = 4;
    init.seed = 3;
    TrainConfig config;
    config.epochs = 1;

    docs[2].class_index = -1;
    CHECK_THROWS_AS(train_classifier(init_lstm_stack(init), emb, docs, config),
                    IndexOutOfRangeError);
    docs[2].class_index = 2;
    CHECK_THROWS_AS(train_classifier(init_lstm_stack(init), emb, docs, config),
                    IndexOutOfRangeError);
    CHECK_THROWS_AS(train_classifier(init_lstm_stack(init), emb, {}, config), ConfigError);
}

} // TEST_SUITE
