#ifndef OPLANG_LSTM_HPP
#define OPLANG_LSTM_HPP

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "oplang/document.hpp"
#include "oplang/embedding.hpp"

namespace oplang {

// Parameters of one LSTM layer. The cell follows
//   f_t = sigma(W_f x_t + U_f h_{t-1} + b_f)
//   i_t = sigma(W_i x_t + U_i h_{t-1} + b_i)
//   c~_t = tanh(W_c x_t + U_c h_{t-1} + b_c)
//   C_t = i_t * c~_t + f_t * C_{t-1}
//   o_t = sigma(W_o x_t + U_o h_{t-1} + V_o C_t + b_o)
//   h_t = o_t * tanh(C_t)
// with V_o applied to the freshly computed C_t.
struct LstmLayerParams {
    Eigen::MatrixXd W_i, W_f, W_c, W_o; // hidden x input
    Eigen::MatrixXd U_i, U_f, U_c, U_o; // hidden x hidden
    Eigen::MatrixXd V_o;                // hidden x hidden, cell into output gate
    Eigen::VectorXd b_i, b_f, b_c, b_o; // hidden

    int input_dim() const { return static_cast<int>(W_i.cols()); }
    int hidden_dim() const { return static_cast<int>(W_i.rows()); }

    static LstmLayerParams zeros(int input_dim, int hidden_dim);
};

struct CellState {
    Eigen::VectorXd h;
    Eigen::VectorXd C;

    static CellState zeros(int hidden_dim);
};

// Gate activations of one timestep, retained for backpropagation.
struct GateRecord {
    Eigen::VectorXd i, f, ctilde, o, C, tanh_C, h;
};

// The trainable two-stage model: layer1 encodes each function (last
// timestep), layer2 the function-vector sequence; mean pooling over the
// second layer's hidden states feeds an N-way softmax. With
// ablate_second_layer set, layer2 is absent and pooling applies to the
// function vectors directly.
struct LstmStack {
    LstmLayerParams layer1;
    LstmLayerParams layer2; // empty (0x0) when ablated
    Eigen::MatrixXd softmax_W;
    Eigen::VectorXd softmax_b;
    int num_classes = 0;
    bool ablate_second_layer = false;

    int embedding_dim() const { return layer1.input_dim(); }
    int hidden1() const { return layer1.hidden_dim(); }
    int hidden2() const { return ablate_second_layer ? 0 : layer2.hidden_dim(); }
    int pooled_dim() const { return ablate_second_layer ? hidden1() : hidden2(); }
};

struct LstmInit {
    int embedding_dim = 100;
    int hidden1 = 64;
    int hidden2 = 64;
    int num_classes = 2;
    bool ablate_second_layer = false;
    std::uint64_t seed = 1;
};

// Weights uniform in [-1/sqrt(hidden), +1/sqrt(hidden)], biases zero except
// the forget-gate bias at 1.0.
LstmStack init_lstm_stack(const LstmInit& init);

// Gradient (or optimizer-state) container with the same tensor layout.
LstmStack zeros_like(const LstmStack& model);

// Uniform traversal of every parameter tensor, for optimizers, serialization
// and finite differences. Biases visit as n x 1. Order is fixed.
template <typename Stack, typename F>
void visit_tensors(Stack& stack, F&& fn) {
    auto layer = [&fn](auto& l, const std::string& prefix) {
        fn(prefix + ".W_i", l.W_i);
        fn(prefix + ".W_f", l.W_f);
        fn(prefix + ".W_c", l.W_c);
        fn(prefix + ".W_o", l.W_o);
        fn(prefix + ".U_i", l.U_i);
        fn(prefix + ".U_f", l.U_f);
        fn(prefix + ".U_c", l.U_c);
        fn(prefix + ".U_o", l.U_o);
        fn(prefix + ".V_o", l.V_o);
        fn(prefix + ".b_i", l.b_i);
        fn(prefix + ".b_f", l.b_f);
        fn(prefix + ".b_c", l.b_c);
        fn(prefix + ".b_o", l.b_o);
    };
    layer(stack.layer1, "layer1");
    if (!stack.ablate_second_layer) layer(stack.layer2, "layer2");
    fn("softmax.W", stack.softmax_W);
    fn("softmax.b", stack.softmax_b);
}

// One memory-cell update. Throws ShapeMismatch on inconsistent shapes.
std::pair<CellState, GateRecord> cell_step(const LstmLayerParams& params,
                                           const Eigen::VectorXd& x, const CellState& prev);

// Runs the cell over a sequence from a zero state and returns the last h.
// Throws EmptySequence on an empty input.
Eigen::VectorXd encode_function(const LstmLayerParams& params,
                                const std::vector<Eigen::VectorXd>& inputs);

struct SequenceTrace {
    std::vector<GateRecord> steps;
};

// Everything the forward pass produced, retained for backprop and invariants.
struct ForwardTrace {
    std::vector<SequenceTrace> layer1; // one per function
    SequenceTrace layer2;              // empty when ablated
    std::vector<Eigen::VectorXd> function_vectors;
    Eigen::VectorXd pooled; // h_average
    Eigen::VectorXd logits; // v
    Eigen::VectorXd probs;  // S_i per class
};

ForwardTrace forward(const LstmStack& model, const EmbeddingMatrix& embeddings,
                     const EncodedDocument& doc);

struct LossAndGrads {
    double loss = 0.0;
    LstmStack grads;
};

// Cross-entropy loss -log S_label with exact gradients for every parameter
// tensor by backpropagation through time, including the V_o path through C_t
// into the output gate. Embeddings are frozen: no gradient is produced for
// the embedding table.
LossAndGrads loss_and_gradients(const LstmStack& model, const EmbeddingMatrix& embeddings,
                                const EncodedDocument& doc, int label);

struct Prediction {
    int predicted_class = 0; // argmax, lowest index on ties
    Eigen::VectorXd probabilities;
    double malware_score = 0.0; // 1 - S_benign
};

Prediction predict(const LstmStack& model, const EmbeddingMatrix& embeddings,
                   const EncodedDocument& doc, int benign_index = 0);

// Tail truncation bounding memory on enormous documents.
struct ClipLimits {
    int max_opcodes_per_function = 512;
    int max_functions_per_document = 256;
};

EncodedDocument clip_document(EncodedDocument doc, const ClipLimits& limits);

} // namespace oplang

#endif
