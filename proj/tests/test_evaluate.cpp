#include <doctest.h>

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "oplang/errors.hpp"
#include "oplang/evaluate.hpp"
#include "oplang/rng.hpp"
#include "oracle.hpp"

using namespace oplang;

namespace {

EmbeddingMatrix plain_embeddings(int size, int dim, std::uint64_t seed) {
    EmbeddingMatrix m;
    m.input_vectors.resize(size, dim);
    m.output_vectors = RowMatrixXd::Zero(size, dim);
    Rng rng(seed);
    for (int i = 0; i < size; ++i)
        for (int j = 0; j < dim; ++j) m.input_vectors(i, j) = rng.uniform(-1.0, 1.0);
    return m;
}

EncodedDocument one_function_doc(std::vector<int> tokens, int class_index) {
    EncodedDocument doc;
    doc.doc_id = "doc";
    doc.class_index = class_index;
    doc.functions.push_back(std::move(tokens));
    return doc;
}

} // namespace

TEST_SUITE("evaluate") {

TEST_CASE("roc endpoints, monotonicity and threshold order") {
    const std::vector<double> scores = {0.9, 0.8, 0.7, 0.6, 0.55, 0.54, 0.53, 0.52, 0.51, 0.505};
    const std::vector<int> labels = {1, 1, 0, 1, 1, 1, 0, 0, 1, 0};
    const auto points = roc_curve(scores, labels);

    REQUIRE(points.size() >= 3);
    CHECK(points.front().fpr == 0.0);
    CHECK(points.front().tpr == 0.0);
    CHECK(std::isinf(points.front().threshold));
    CHECK(points.front().threshold > 0.0);
    CHECK(points.back().fpr == 1.0);
    CHECK(points.back().tpr == 1.0);
    CHECK(points.back().threshold < 0.0);
    for (std::size_t i = 1; i < points.size(); ++i) {
        CHECK(points[i].fpr >= points[i - 1].fpr);
        CHECK(points[i].tpr >= points[i - 1].tpr);
        CHECK(points[i].threshold < points[i - 1].threshold);
    }
    // One interior point per distinct score.
    CHECK(points.size() == scores.size() + 2);
}

TEST_CASE("tied scores move in one step") {
    const std::vector<double> scores = {0.5, 0.5, 0.5, 0.2};
    const std::vector<int> labels = {1, 0, 1, 0};
    const auto points = roc_curve(scores, labels);
    REQUIRE(points.size() == 4); // endpoints plus two distinct scores
    CHECK(points[1].threshold == 0.5);
    CHECK(points[1].tpr == doctest::Approx(1.0));
    CHECK(points[1].fpr == doctest::Approx(0.5));
}

TEST_CASE("perfect, inverted and random rankings") {
    const std::vector<int> labels = {0, 0, 1, 1};
    CHECK(trapezoid_auc(roc_curve({0.1, 0.2, 0.8, 0.9}, labels)) == doctest::Approx(1.0));
    CHECK(trapezoid_auc(roc_curve({0.9, 0.8, 0.2, 0.1}, labels)) == doctest::Approx(0.0));
    CHECK(trapezoid_auc(roc_curve({0.5, 0.5, 0.5, 0.5}, labels)) == doctest::Approx(0.5));
}

TEST_CASE("trapezoid area equals pair counting on random fixtures") {
    Rng rng(2024);
    for (int trial = 0; trial < 300; ++trial) {
        const int n = rng.uniform_int(2, 40);
        std::vector<double> scores;
        std::vector<int> labels;
        int positives = 0;
        for (int i = 0; i < n; ++i) {
            // Coarse quantization forces plenty of exact ties.
            scores.push_back(double(rng.uniform_int(0, 8)) / 8.0);
            labels.push_back(int(rng.below(2)));
            positives += labels.back();
        }
        if (positives == 0 || positives == n) {
            CHECK_THROWS_AS(roc_curve(scores, labels), SingleClassTestSetError);
            continue;
        }
        const double area = trapezoid_auc(roc_curve(scores, labels));
        const double counted = oracle::mann_whitney_auc(scores, labels);
        CHECK(std::abs(area - counted) <= 1e-12);
    }
}

TEST_CASE("roc input validation") {
    CHECK_THROWS_AS(roc_curve({0.1, 0.2}, {1, 1}), SingleClassTestSetError);
    CHECK_THROWS_AS(roc_curve({0.1, 0.2}, {0, 0}), SingleClassTestSetError);
    CHECK_THROWS_AS(roc_curve({}, {}), SingleClassTestSetError);
    CHECK_THROWS_AS(roc_curve({0.1}, {0, 1}), ShapeMismatchError);
    CHECK_THROWS_AS(roc_curve({0.1, 0.2}, {0, 2}), ConfigError);
}

TEST_CASE("binary evaluation fills the confusion matrix and rates") {
    // An untrained model is enough here; only the bookkeeping is under test.
    LstmInit init;
    init.embedding_dim = 3;
    init.hidden1 = 4;
    init.hidden2 = 4;
    init.num_classes = 2;
    init.seed = 31;
    const auto model = init_lstm_stack(init);
    const auto emb = plain_embeddings(5, 3, 31);

    std::vector<EncodedDocument> docs;
    Rng rng(77);
    for (int i = 0; i < 12; ++i) {
        std::vector<int> tokens;
        for (int k = 0; k < 5; ++k) tokens.push_back(int(rng.below(5)));
        docs.push_back(one_function_doc(tokens, i % 2));
    }

    const auto report = evaluate(model, emb, docs, TaskKind::Binary, {"benign", "malware"});
    CHECK(report.class_names.size() == 2);
    CHECK(report.confusion.total() == 12);
    CHECK(report.confusion.tp() + report.confusion.fn() == 6);
    CHECK(report.confusion.fp() + report.confusion.tn() == 6);
    CHECK(report.accuracy ==
          doctest::Approx(double(report.confusion.correct()) / 12.0).epsilon(1e-15));
    const double tp = double(report.confusion.tp());
    const double fn = double(report.confusion.fn());
    const double fp = double(report.confusion.fp());
    const double tn = double(report.confusion.tn());
    CHECK(report.tpr == doctest::Approx(tp / (tp + fn)).epsilon(1e-15));
    CHECK(report.fpr == doctest::Approx(fp / (fp + tn)).epsilon(1e-15));
    REQUIRE(report.auc_defined);
    CHECK(report.auc >= 0.0);
    CHECK(report.auc <= 1.0);
    CHECK(report.roc_points.size() >= 3);

    // Ranking scores must match the per-document malware probability.
    std::vector<double> scores;
    std::vector<int> labels01;
    for (const auto& doc : docs) {
        scores.push_back(predict(model, emb, doc, 0).malware_score);
        labels01.push_back(doc.class_index == 0 ? 0 : 1);
    }
    CHECK(report.auc ==
          doctest::Approx(oracle::mann_whitney_auc(scores, labels01)).epsilon(1e-12));
}

TEST_CASE("single-class binary test set reports an undefined auc") {
    LstmInit init;
    init.embedding_dim = 3;
    init.hidden1 = 3;
    init.hidden2 = 3;
    init.num_classes = 2;
    init.seed = 5;
    const auto model = init_lstm_stack(init);
    const auto emb = plain_embeddings(4, 3, 5);
    std::vector<EncodedDocument> docs = {one_function_doc({0, 1}, 1),
                                         one_function_doc({2, 3}, 1)};
    const auto report = evaluate(model, emb, docs, TaskKind::Binary, {"benign", "malware"});
    CHECK_FALSE(report.auc_defined);
    CHECK(report.roc_points.empty());
    CHECK(report.confusion.total() == 2);
}

TEST_CASE("multiclass evaluation averages one-vs-rest sweeps") {
    LstmInit init;
    init.embedding_dim = 3;
    init.hidden1 = 4;
    init.hidden2 = 4;
    init.num_classes = 3;
    init.seed = 47;
    const auto model = init_lstm_stack(init);
    const auto emb = plain_embeddings(6, 3, 47);

    std::vector<EncodedDocument> docs;
    Rng rng(48);
    for (int i = 0; i < 15; ++i) {
        std::vector<int> tokens;
        for (int k = 0; k < 6; ++k) tokens.push_back(int(rng.below(6)));
        docs.push_back(one_function_doc(tokens, i % 3));
    }
    const std::vector<std::string> names = {"x", "y", "z"};
    const auto report = evaluate(model, emb, docs, TaskKind::Multiclass, names);

    CHECK(report.task == TaskKind::Multiclass);
    CHECK(report.confusion.num_classes() == 3);
    CHECK(report.confusion.total() == 15);
    REQUIRE(report.per_class_auc.size() == 3);
    REQUIRE(report.per_class_roc.size() == 3);
    REQUIRE(report.per_class_auc_defined.size() == 3);

    double sum = 0.0;
    int defined = 0;
    for (int c = 0; c < 3; ++c) {
        REQUIRE(bool(report.per_class_auc_defined[std::size_t(c)]));
        const double ovr = report.per_class_auc[std::size_t(c)];
        CHECK(ovr ==
              doctest::Approx(trapezoid_auc(report.per_class_roc[std::size_t(c)])).epsilon(1e-15));

        // Check one class against direct pair counting on S_c.
        std::vector<double> scores;
        std::vector<int> labels01;
        for (const auto& doc : docs) {
            const auto pred = predict(model, emb, doc, 0);
            scores.push_back(pred.probabilities(c));
            labels01.push_back(doc.class_index == c ? 1 : 0);
        }
        CHECK(ovr == doctest::Approx(oracle::mann_whitney_auc(scores, labels01)).epsilon(1e-12));
        sum += ovr;
        ++defined;
    }
    CHECK(report.macro_auc == doctest::Approx(sum / double(defined)).epsilon(1e-15));
    CHECK(report.auc == doctest::Approx(report.macro_auc).epsilon(1e-15));
    CHECK(report.auc_defined);
}

TEST_CASE("absent classes drop out of the macro average") {
    LstmInit init;
    init.embedding_dim = 3;
    init.hidden1 = 3;
    init.hidden2 = 3;
    init.num_classes = 3;
    init.seed = 52;
    const auto model = init_lstm_stack(init);
    const auto emb = plain_embeddings(5, 3, 52);
    // No document of class 2.
    std::vector<EncodedDocument> docs = {
        one_function_doc({0, 1, 2}, 0), one_function_doc({1, 2, 3}, 0),
        one_function_doc({2, 3, 4}, 1), one_function_doc({3, 4, 0}, 1)};
    const auto report = evaluate(model, emb, docs, TaskKind::Multiclass, {"x", "y", "z"});
    CHECK(bool(report.per_class_auc_defined[0]));
    CHECK(bool(report.per_class_auc_defined[1]));
    CHECK_FALSE(bool(report.per_class_auc_defined[2]));
    CHECK(report.per_class_roc[2].empty());
    CHECK(report.auc_defined);
    CHECK(report.macro_auc ==
          doctest::Approx((report.per_class_auc[0] + report.per_class_auc[1]) / 2.0));
}

TEST_CASE("evaluate input validation") {
    LstmInit init;
    init.embedding_dim = 3;
    init.hidden1 = 3;
    init.hidden2 = 3;
    init.num_classes = 2;
    init.seed = 61;
    const auto model = init_lstm_stack(init);
    const auto emb = plain_embeddings(4, 3, 61);

    CHECK_THROWS_AS(evaluate(model, emb, {}, TaskKind::Binary, {"benign", "malware"}),
                    ConfigError);
    std::vector<EncodedDocument> docs = {one_function_doc({0, 1}, 2),
                                         one_function_doc({1, 2}, 0)};
    CHECK_THROWS_AS(evaluate(model, emb, docs, TaskKind::Binary, {"benign", "malware"}),
                    IndexOutOfRangeError);
    docs[0].class_index = 1;
    CHECK_THROWS_AS(evaluate(model, emb, docs, TaskKind::Binary, {"only"}), ShapeMismatchError);
}

} // TEST_SUITE
