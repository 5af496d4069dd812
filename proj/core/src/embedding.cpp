#include "oplang/embedding.hpp"

#include <algorithm>
#include <cmath>

#include "oplang/errors.hpp"
#include "oplang/rng.hpp"

namespace oplang {

std::string to_string(EmbeddingModel model) {
    return model == EmbeddingModel::Cbow ? "cbow" : "skipgram";
}

EmbeddingModel embedding_model_from_string(const std::string& name) {
    if (name == "cbow") return EmbeddingModel::Cbow;
    if (name == "skipgram") return EmbeddingModel::SkipGram;
    throw ConfigError("unknown embedding model '" + name + "' (want cbow|skipgram)");
}

void EmbeddingConfig::validate() const {
    if (dim < 1) throw ConfigError("embedding dim must be >= 1");
    if (window < 1) throw ConfigError("window must be >= 1");
    if (negatives < 1) throw ConfigError("negatives must be >= 1");
    if (epochs < 1) throw ConfigError("embedding epochs must be >= 1");
    if (!(learning_rate > 0.0)) throw ConfigError("embedding learning rate must be > 0");
}

namespace {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// log(sigmoid(x)) without overflow for large negative x.
inline double log_sigmoid(double x) {
    if (x >= 0.0) return -std::log1p(std::exp(-x));
    return x - std::log1p(std::exp(x));
}

} // namespace

namespace detail {

// Negative-sampling logistic loss around a shared input vector x:
//   L = -log s(u_pos . x) - sum_neg log s(-u_neg . x)
// EventGrad carries dL/dx split over the rows that contributed to x.
namespace {

EventGrad negative_sampling_event(const EmbeddingMatrix& m, const Eigen::VectorXd& x,
                                  std::span<const int> input_rows, double input_share,
                                  int positive, std::span<const int> negatives) {
    EventGrad grad;
    Eigen::VectorXd dx = Eigen::VectorXd::Zero(m.dim());

    auto accumulate = [&](int row, double label) {
        const double score = m.output_vectors.row(row).dot(x);
        const double s = sigmoid(score);
        grad.loss -= label > 0.5 ? log_sigmoid(score) : log_sigmoid(-score);
        const double coeff = s - label; // d loss / d score
        grad.output_rows.emplace_back(row, coeff * x);
        dx += coeff * m.output_vectors.row(row).transpose();
    };

    accumulate(positive, 1.0);
    for (int neg : negatives) accumulate(neg, 0.0);

    for (int row : input_rows) grad.input_rows.emplace_back(row, input_share * dx);
    return grad;
}

} // namespace

EventGrad cbow_event(const EmbeddingMatrix& m, int center, std::span<const int> context,
                     std::span<const int> negatives) {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(m.dim());
    for (int c : context) x += m.input_vectors.row(c).transpose();
    x /= static_cast<double>(context.size());
    return negative_sampling_event(m, x, context, 1.0 / static_cast<double>(context.size()),
                                   center, negatives);
}

EventGrad skipgram_event(const EmbeddingMatrix& m, int center, int context,
                         std::span<const int> negatives) {
    const Eigen::VectorXd x = m.input_vectors.row(center).transpose();
    const int rows[1] = {center};
    return negative_sampling_event(m, x, rows, 1.0, context, negatives);
}

void apply_event(EmbeddingMatrix& m, const EventGrad& grad, double learning_rate) {
    for (const auto& [row, g] : grad.input_rows)
        m.input_vectors.row(row) -= learning_rate * g.transpose();
    for (const auto& [row, g] : grad.output_rows)
        m.output_vectors.row(row) -= learning_rate * g.transpose();
}

} // namespace detail

namespace {

// unigram^(3/4) noise distribution as cumulative weights over token indices
std::vector<double> noise_cumulative(const Vocabulary& vocab) {
    std::vector<double> cumulative(static_cast<std::size_t>(vocab.size()));
    double total = 0.0;
    for (int i = 0; i < vocab.size(); ++i) {
        total += std::pow(static_cast<double>(vocab.count_of(i)), 0.75);
        cumulative[static_cast<std::size_t>(i)] = total;
    }
    return cumulative;
}

void draw_negatives(Rng& rng, const std::vector<double>& cumulative, int positive,
                    int count, std::vector<int>& out) {
    out.clear();
    for (int i = 0; i < count; ++i) {
        int candidate = static_cast<int>(rng.sample_cumulative(cumulative));
        for (int attempt = 0; candidate == positive && attempt < 16; ++attempt)
            candidate = static_cast<int>(rng.sample_cumulative(cumulative));
        out.push_back(candidate);
    }
}

} // namespace

EmbeddingTrainResult train_embeddings(const std::vector<EncodedDocument>& docs,
                                      const Vocabulary& vocab,
                                      const EmbeddingConfig& config) {
    config.validate();

    bool has_pair = false;
    for (const auto& doc : docs)
        for (const auto& fn : doc.functions)
            if (fn.size() >= 2) has_pair = true;
    if (!has_pair)
        throw DegenerateCorpusError("no (center, context) pair: every function is shorter than 2 tokens");

    EmbeddingTrainResult result;
    EmbeddingMatrix& m = result.matrix;
    m.vocab_fingerprint = vocab.fingerprint();
    m.input_vectors.resize(vocab.size(), config.dim);
    m.output_vectors = RowMatrixXd::Zero(vocab.size(), config.dim);

    Rng init_rng = Rng::derive(config.seed, 0x696e6974);
    const double bound = 0.5 / static_cast<double>(config.dim);
    for (int r = 0; r < vocab.size(); ++r)
        for (int c = 0; c < config.dim; ++c)
            m.input_vectors(r, c) = init_rng.uniform(-bound, bound);

    const std::vector<double> cumulative = noise_cumulative(vocab);
    Rng noise_rng = Rng::derive(config.seed, 0x6e656773);

    std::vector<int> context;
    std::vector<int> negatives;
    context.reserve(static_cast<std::size_t>(2 * config.window));
    negatives.reserve(static_cast<std::size_t>(config.negatives));

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        double loss_sum = 0.0;
        std::int64_t events = 0;
        for (const auto& doc : docs) {
            for (const auto& fn : doc.functions) {
                detail::for_each_context(fn, config.window, [&](int c, int lo, int hi) {
                    if (config.model == EmbeddingModel::Cbow) {
                        context.clear();
                        for (int p = lo; p <= hi; ++p)
                            if (p != c) context.push_back(fn[static_cast<std::size_t>(p)]);
                        draw_negatives(noise_rng, cumulative, fn[static_cast<std::size_t>(c)],
                                       config.negatives, negatives);
                        const auto grad = detail::cbow_event(m, fn[static_cast<std::size_t>(c)],
                                                             context, negatives);
                        detail::apply_event(m, grad, config.learning_rate);
                        loss_sum += grad.loss;
                        ++events;
                    } else {
                        for (int p = lo; p <= hi; ++p) {
                            if (p == c) continue;
                            draw_negatives(noise_rng, cumulative, fn[static_cast<std::size_t>(p)],
                                           config.negatives, negatives);
                            const auto grad = detail::skipgram_event(
                                m, fn[static_cast<std::size_t>(c)],
                                fn[static_cast<std::size_t>(p)], negatives);
                            detail::apply_event(m, grad, config.learning_rate);
                            loss_sum += grad.loss;
                            ++events;
                        }
                    }
                });
            }
        }
        result.epoch_mean_loss.push_back(loss_sum / static_cast<double>(events));
    }
    return result;
}

Eigen::VectorXd lookup(const EmbeddingMatrix& matrix, int index) {
    if (index < 0 || index >= matrix.size())
        throw IndexOutOfRangeError("embedding row " + std::to_string(index) + " outside [0, " +
                                   std::to_string(matrix.size()) + ")");
    return matrix.input_vectors.row(index).transpose();
}

std::vector<std::pair<int, double>> nearest_neighbors(const EmbeddingMatrix& matrix,
                                                      int index, int k) {
    if (index < 0 || index >= matrix.size())
        throw IndexOutOfRangeError("embedding row " + std::to_string(index) + " outside [0, " +
                                   std::to_string(matrix.size()) + ")");
    if (k < 0 || k >= matrix.size())
        throw ConfigError("nearest_neighbors requires 0 <= k < vocabulary size");

    const Eigen::VectorXd query = matrix.input_vectors.row(index).transpose();
    const double query_norm = query.norm();
    std::vector<std::pair<int, double>> ranked;
    ranked.reserve(static_cast<std::size_t>(matrix.size() - 1));
    for (int i = 0; i < matrix.size(); ++i) {
        if (i == index) continue;
        const double norm = matrix.input_vectors.row(i).norm();
        double sim = 0.0;
        if (query_norm > 0.0 && norm > 0.0)
            sim = matrix.input_vectors.row(i).dot(query) / (norm * query_norm);
        ranked.emplace_back(i, sim);
    }
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    ranked.resize(static_cast<std::size_t>(k));
    return ranked;
}

} // namespace oplang
