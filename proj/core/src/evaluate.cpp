#include "oplang/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "oplang/errors.hpp"

namespace oplang {

std::vector<RocPoint> roc_curve(const std::vector<double>& scores,
                                const std::vector<int>& labels) {
    if (scores.size() != labels.size()) throw ShapeMismatchError("roc_curve: scores vs labels");
    long pos = 0;
    long neg = 0;
    for (int label : labels) {
        if (label != 0 && label != 1) throw ConfigError("roc labels must be 0 or 1");
        (label ? pos : neg)++;
    }
    if (pos == 0 || neg == 0)
        throw SingleClassTestSetError("roc needs both classes in the test set");

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    const double inf = std::numeric_limits<double>::infinity();
    std::vector<RocPoint> points;
    points.push_back({0.0, 0.0, inf});
    long tp = 0;
    long fp = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        const double s = scores[order[i]];
        while (i < order.size() && scores[order[i]] == s) {
            (labels[order[i]] ? tp : fp)++;
            ++i;
        }
        points.push_back({double(fp) / double(neg), double(tp) / double(pos), s});
    }
    points.push_back({1.0, 1.0, -inf});
    return points;
}

double trapezoid_auc(const std::vector<RocPoint>& points) {
    double area = 0.0;
    for (std::size_t k = 1; k < points.size(); ++k) {
        area += (points[k].fpr - points[k - 1].fpr) * (points[k].tpr + points[k - 1].tpr) / 2.0;
    }
    return area;
}

namespace {

double ratio_or_zero(long num, long den) { return den == 0 ? 0.0 : double(num) / double(den); }

} // namespace

EvalReport evaluate(const LstmStack& model, const EmbeddingMatrix& embeddings,
                    const std::vector<EncodedDocument>& test_docs, TaskKind task,
                    const std::vector<std::string>& class_names, int benign_index) {
    if (test_docs.empty()) throw ConfigError("test set is empty");
    const int n_classes = model.num_classes;
    if (int(class_names.size()) != n_classes)
        throw ShapeMismatchError("class name list vs model classes");

    EvalReport report;
    report.task = task;
    report.class_names = class_names;
    report.confusion = ConfusionMatrix(n_classes);

    std::vector<int> actual(test_docs.size());
    std::vector<Eigen::VectorXd> probs(test_docs.size());
    for (std::size_t d = 0; d < test_docs.size(); ++d) {
        const auto& doc = test_docs[d];
        if (doc.class_index < 0 || doc.class_index >= n_classes)
            throw IndexOutOfRangeError("class index for document " + doc.doc_id);
        Prediction pred = predict(model, embeddings, doc, benign_index);
        actual[d] = doc.class_index;
        probs[d] = std::move(pred.probabilities);
        report.confusion.counts(doc.class_index, pred.predicted_class)++;
    }
    report.accuracy = double(report.confusion.correct()) / double(report.confusion.total());

    if (task == TaskKind::Binary) {
        report.tpr = ratio_or_zero(report.confusion.tp(),
                                   report.confusion.tp() + report.confusion.fn());
        report.fpr = ratio_or_zero(report.confusion.fp(),
                                   report.confusion.fp() + report.confusion.tn());
        std::vector<double> scores(test_docs.size());
        std::vector<int> labels(test_docs.size());
        for (std::size_t d = 0; d < test_docs.size(); ++d) {
            scores[d] = 1.0 - probs[d](benign_index);
            labels[d] = actual[d] == benign_index ? 0 : 1;
        }
        try {
            report.roc_points = roc_curve(scores, labels);
            report.auc = trapezoid_auc(report.roc_points);
            report.auc_defined = true;
        } catch (const SingleClassTestSetError&) {
            report.auc_defined = false;
        }
        return report;
    }

    // Multiclass: argmax decisions summarized by macro-averaged one-vs-rest
    // rates, ranking quality by macro one-vs-rest AUC.
    const long total = report.confusion.total();
    double tpr_sum = 0.0;
    double fpr_sum = 0.0;
    int tpr_n = 0;
    int fpr_n = 0;
    report.per_class_roc.resize(std::size_t(n_classes));
    report.per_class_auc.assign(std::size_t(n_classes), 0.0);
    report.per_class_auc_defined.assign(std::size_t(n_classes), 0);
    double auc_sum = 0.0;
    int auc_n = 0;
    for (int c = 0; c < n_classes; ++c) {
        const long row = report.confusion.counts.row(c).sum();
        const long col = report.confusion.counts.col(c).sum();
        const long tp = report.confusion.counts(c, c);
        if (row > 0) {
            tpr_sum += double(tp) / double(row);
            ++tpr_n;
        }
        if (total - row > 0) {
            fpr_sum += double(col - tp) / double(total - row);
            ++fpr_n;
        }
        std::vector<double> scores(test_docs.size());
        std::vector<int> labels(test_docs.size());
        for (std::size_t d = 0; d < test_docs.size(); ++d) {
            scores[d] = probs[d](c);
            labels[d] = actual[d] == c ? 1 : 0;
        }
        try {
            auto curve = roc_curve(scores, labels);
            const double auc = trapezoid_auc(curve);
            report.per_class_roc[std::size_t(c)] = std::move(curve);
            report.per_class_auc[std::size_t(c)] = auc;
            report.per_class_auc_defined[std::size_t(c)] = 1;
            auc_sum += auc;
            ++auc_n;
        } catch (const SingleClassTestSetError&) {
        }
    }
    report.tpr = tpr_n ? tpr_sum / tpr_n : 0.0;
    report.fpr = fpr_n ? fpr_sum / fpr_n : 0.0;
    if (auc_n > 0) {
        report.macro_auc = auc_sum / auc_n;
        report.auc = report.macro_auc;
        report.auc_defined = true;
    }
    return report;
}

} // namespace oplang
