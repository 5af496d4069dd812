#ifndef OPLANG_EMBEDDING_HPP
#define OPLANG_EMBEDDING_HPP

#include <Eigen/Core>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "oplang/document.hpp"
#include "oplang/vocabulary.hpp"

namespace oplang {

using RowMatrixXd = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class EmbeddingModel { Cbow, SkipGram };

std::string to_string(EmbeddingModel model);
EmbeddingModel embedding_model_from_string(const std::string& name);

struct EmbeddingConfig {
    int dim = 100;
    int window = 10; // max distance between current and predicted opcode
    EmbeddingModel model = EmbeddingModel::Cbow;
    int negatives = 5;
    int epochs = 5;
    double learning_rate = 0.025;
    std::uint64_t seed = 1;

    void validate() const; // ConfigError on out-of-range fields
};

// Dense opcode-index -> feature-vector map. Rows are token indices (one row
// per vocabulary entry including UNK); input_vectors are the published
// embeddings, output_vectors the negative-sampling output side.
struct EmbeddingMatrix {
    RowMatrixXd input_vectors;
    RowMatrixXd output_vectors;
    std::string vocab_fingerprint;

    int size() const { return static_cast<int>(input_vectors.rows()); }
    int dim() const { return static_cast<int>(input_vectors.cols()); }
};

struct EmbeddingTrainResult {
    EmbeddingMatrix matrix;
    std::vector<double> epoch_mean_loss; // mean event loss per epoch
};

// Trains input/output vectors by SGD on the negative-sampling logistic loss,
// one full pass over all window pairs per epoch, in corpus order. Pairs never
// cross function boundaries. Deterministic given config.seed. Throws
// DegenerateCorpusError when no (center, context) pair exists.
EmbeddingTrainResult train_embeddings(const std::vector<EncodedDocument>& docs,
                                      const Vocabulary& vocab,
                                      const EmbeddingConfig& config);

// The input-vector row for a token index. IndexOutOfRange on bad index.
Eigen::VectorXd lookup(const EmbeddingMatrix& matrix, int index);

// Cosine similarity ranking over input vectors, self excluded, descending
// similarity with index tiebreak. Zero-norm rows score 0.
std::vector<std::pair<int, double>> nearest_neighbors(const EmbeddingMatrix& matrix,
                                                      int index, int k);

namespace detail {

// One training event's loss and the gradients of the rows it touches.
// Shared by the SGD loop and the finite-difference tests.
struct EventGrad {
    double loss = 0.0;
    std::vector<std::pair<int, Eigen::VectorXd>> input_rows;
    std::vector<std::pair<int, Eigen::VectorXd>> output_rows;
};

// CBOW: predict center from the mean of context input vectors.
EventGrad cbow_event(const EmbeddingMatrix& m, int center, std::span<const int> context,
                     std::span<const int> negatives);

// Skip-gram: predict one context token from the center token.
EventGrad skipgram_event(const EmbeddingMatrix& m, int center, int context,
                         std::span<const int> negatives);

void apply_event(EmbeddingMatrix& m, const EventGrad& grad, double learning_rate);

// Context positions for each center of one function: fn(center_pos, lo, hi)
// with lo..hi inclusive, |pos - center_pos| <= window, bounded by the
// function. Centers of length-1 functions are skipped.
template <typename F>
void for_each_context(const std::vector<int>& tokens, int window, F&& fn) {
    const int n = static_cast<int>(tokens.size());
    if (n < 2) return;
    for (int c = 0; c < n; ++c) {
        const int lo = c - window < 0 ? 0 : c - window;
        const int hi = c + window >= n ? n - 1 : c + window;
        if (lo == hi) continue; // context would be empty
        fn(c, lo, hi);
    }
}

} // namespace detail

} // namespace oplang

#endif
