#ifndef OPLANG_EVALUATE_HPP
#define OPLANG_EVALUATE_HPP

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "oplang/document.hpp"
#include "oplang/embedding.hpp"
#include "oplang/lstm.hpp"
#include "oplang/train.hpp"

namespace oplang {

// Rows are actual classes, columns predicted. The binary accessors assume
// the convention class 0 = benign (negative), class 1 = malware (positive).
struct ConfusionMatrix {
    Eigen::MatrixXi counts;

    explicit ConfusionMatrix(int num_classes = 2)
        : counts(Eigen::MatrixXi::Zero(num_classes, num_classes)) {}

    int num_classes() const { return int(counts.rows()); }
    long total() const { return counts.sum(); }
    long correct() const { return counts.diagonal().sum(); }

    long tp() const { return counts(1, 1); }
    long fn() const { return counts(1, 0); }
    long fp() const { return counts(0, 1); }
    long tn() const { return counts(0, 0); }
};

struct RocPoint {
    double fpr;
    double tpr;
    double threshold;
};

// Full ROC sweep for binary scores. labels hold 0 (negative) or 1
// (positive). Points run from (0,0) at threshold +inf through one point per
// distinct score (classify positive iff score >= threshold) to (1,1) at
// -inf; tied scores move together. Throws SingleClassTestSetError when
// either class is absent.
std::vector<RocPoint> roc_curve(const std::vector<double>& scores,
                                const std::vector<int>& labels);

// Trapezoidal area under a curve produced by roc_curve.
double trapezoid_auc(const std::vector<RocPoint>& points);

struct EvalReport {
    TaskKind task = TaskKind::Binary;
    std::vector<std::string> class_names;
    ConfusionMatrix confusion;
    double tpr = 0.0; // macro-averaged over classes for multiclass
    double fpr = 0.0;
    double accuracy = 0.0;
    std::vector<RocPoint> roc_points; // binary only
    double auc = 0.0;
    bool auc_defined = false;
    // Multiclass one-vs-rest sweeps, aligned with class_names; classes with
    // no positives or no negatives in the test set get an empty curve.
    std::vector<std::vector<RocPoint>> per_class_roc;
    std::vector<double> per_class_auc;
    std::vector<char> per_class_auc_defined;
    double macro_auc = 0.0;
};

// Runs the model over every test document. Binary ranking score is the
// malware probability; multiclass AUC is the unweighted mean of the defined
// one-vs-rest AUCs. Throws ConfigError on an empty test set and
// IndexOutOfRangeError when a document's class_index falls outside the
// model's classes.
EvalReport evaluate(const LstmStack& model, const EmbeddingMatrix& embeddings,
                    const std::vector<EncodedDocument>& test_docs, TaskKind task,
                    const std::vector<std::string>& class_names, int benign_index = 0);

} // namespace oplang

#endif
