#include "oplang/lstm.hpp"

#include <cmath>

#include "oplang/errors.hpp"
#include "oplang/rng.hpp"

namespace oplang {

namespace {

Eigen::VectorXd sigmoid(const Eigen::VectorXd& x) {
    return (1.0 + (-x.array()).exp()).inverse().matrix();
}

void check_finite_dims(int value, const char* what) {
    if (value < 1) throw ConfigError(std::string(what) + " must be >= 1");
}

} // namespace

LstmLayerParams LstmLayerParams::zeros(int input_dim, int hidden_dim) {
    LstmLayerParams p;
    p.W_i = Eigen::MatrixXd::Zero(hidden_dim, input_dim);
    p.W_f = Eigen::MatrixXd::Zero(hidden_dim, input_dim);
    p.W_c = Eigen::MatrixXd::Zero(hidden_dim, input_dim);
    p.W_o = Eigen::MatrixXd::Zero(hidden_dim, input_dim);
    p.U_i = Eigen::MatrixXd::Zero(hidden_dim, hidden_dim);
    p.U_f = Eigen::MatrixXd::Zero(hidden_dim, hidden_dim);
    p.U_c = Eigen::MatrixXd::Zero(hidden_dim, hidden_dim);
    p.U_o = Eigen::MatrixXd::Zero(hidden_dim, hidden_dim);
    p.V_o = Eigen::MatrixXd::Zero(hidden_dim, hidden_dim);
    p.b_i = Eigen::VectorXd::Zero(hidden_dim);
    p.b_f = Eigen::VectorXd::Zero(hidden_dim);
    p.b_c = Eigen::VectorXd::Zero(hidden_dim);
    p.b_o = Eigen::VectorXd::Zero(hidden_dim);
    return p;
}

CellState CellState::zeros(int hidden_dim) {
    return {Eigen::VectorXd::Zero(hidden_dim), Eigen::VectorXd::Zero(hidden_dim)};
}

LstmStack init_lstm_stack(const LstmInit& init) {
    check_finite_dims(init.embedding_dim, "embedding_dim");
    check_finite_dims(init.hidden1, "hidden1");
    if (!init.ablate_second_layer) check_finite_dims(init.hidden2, "hidden2");
    if (init.num_classes < 2) throw ConfigError("num_classes must be >= 2");

    Rng rng = Rng::derive(init.seed, 0x6c73746d);
    auto fill = [&rng](Eigen::MatrixXd& m, double bound) {
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            for (Eigen::Index r = 0; r < m.rows(); ++r) m(r, c) = rng.uniform(-bound, bound);
    };

    LstmStack model;
    model.num_classes = init.num_classes;
    model.ablate_second_layer = init.ablate_second_layer;

    auto init_layer = [&fill](LstmLayerParams& layer, int in, int hidden) {
        layer = LstmLayerParams::zeros(in, hidden);
        const double bound = 1.0 / std::sqrt(static_cast<double>(hidden));
        for (Eigen::MatrixXd* m :
             {&layer.W_i, &layer.W_f, &layer.W_c, &layer.W_o, &layer.U_i, &layer.U_f,
              &layer.U_c, &layer.U_o, &layer.V_o})
            fill(*m, bound);
        layer.b_f.setConstant(1.0); // keeps f_t away from zero early in training
    };

    init_layer(model.layer1, init.embedding_dim, init.hidden1);
    if (!init.ablate_second_layer) init_layer(model.layer2, init.hidden1, init.hidden2);

    const int pooled = init.ablate_second_layer ? init.hidden1 : init.hidden2;
    model.softmax_W.resize(init.num_classes, pooled);
    fill(model.softmax_W, 1.0 / std::sqrt(static_cast<double>(pooled)));
    model.softmax_b = Eigen::VectorXd::Zero(init.num_classes);
    return model;
}

LstmStack zeros_like(const LstmStack& model) {
    LstmStack z;
    z.num_classes = model.num_classes;
    z.ablate_second_layer = model.ablate_second_layer;
    z.layer1 = LstmLayerParams::zeros(model.layer1.input_dim(), model.layer1.hidden_dim());
    if (!model.ablate_second_layer)
        z.layer2 = LstmLayerParams::zeros(model.layer2.input_dim(), model.layer2.hidden_dim());
    z.softmax_W = Eigen::MatrixXd::Zero(model.softmax_W.rows(), model.softmax_W.cols());
    z.softmax_b = Eigen::VectorXd::Zero(model.softmax_b.size());
    return z;
}

std::pair<CellState, GateRecord> cell_step(const LstmLayerParams& params,
                                           const Eigen::VectorXd& x, const CellState& prev) {
    const int hidden = params.hidden_dim();
    if (x.size() != params.input_dim())
        throw ShapeMismatchError("cell input has size " + std::to_string(x.size()) +
                                 ", layer expects " + std::to_string(params.input_dim()));
    if (prev.h.size() != hidden || prev.C.size() != hidden)
        throw ShapeMismatchError("previous state size does not match hidden dim " +
                                 std::to_string(hidden));

    GateRecord g;
    g.f = sigmoid(params.W_f * x + params.U_f * prev.h + params.b_f);
    g.i = sigmoid(params.W_i * x + params.U_i * prev.h + params.b_i);
    g.ctilde = (params.W_c * x + params.U_c * prev.h + params.b_c).array().tanh();
    g.C = (g.i.array() * g.ctilde.array() + g.f.array() * prev.C.array()).matrix();
    // peephole: the output gate sees the state computed in this same step
    g.o = sigmoid(params.W_o * x + params.U_o * prev.h + params.V_o * g.C + params.b_o);
    g.tanh_C = g.C.array().tanh();
    g.h = (g.o.array() * g.tanh_C.array()).matrix();
    return {CellState{g.h, g.C}, g};
}

namespace {

SequenceTrace run_sequence(const LstmLayerParams& params,
                           const std::vector<Eigen::VectorXd>& inputs) {
    if (inputs.empty()) throw EmptySequenceError("cannot encode an empty sequence");
    SequenceTrace trace;
    trace.steps.reserve(inputs.size());
    CellState state = CellState::zeros(params.hidden_dim());
    for (const auto& x : inputs) {
        auto [next, record] = cell_step(params, x, state);
        state = std::move(next);
        trace.steps.push_back(std::move(record));
    }
    return trace;
}

// Mean over hidden states, accumulated in extended precision so the ablated
// model's pooling is invariant under function reordering.
Eigen::VectorXd mean_pool(const std::vector<const Eigen::VectorXd*>& vectors) {
    const Eigen::Index dim = vectors.front()->size();
    Eigen::VectorXd pooled(dim);
    for (Eigen::Index d = 0; d < dim; ++d) {
        long double acc = 0.0L;
        for (const auto* v : vectors) acc += static_cast<long double>((*v)(d));
        pooled(d) = static_cast<double>(acc / static_cast<long double>(vectors.size()));
    }
    return pooled;
}

Eigen::VectorXd stable_softmax(const Eigen::VectorXd& logits) {
    const double max = logits.maxCoeff();
    Eigen::VectorXd e = (logits.array() - max).exp().matrix();
    return e / e.sum();
}

std::vector<Eigen::VectorXd> embed_function(const EmbeddingMatrix& embeddings,
                                            const std::vector<int>& function) {
    std::vector<Eigen::VectorXd> inputs;
    inputs.reserve(function.size());
    for (int idx : function) {
        if (idx < 0 || idx >= embeddings.size())
            throw IndexOutOfRangeError("opcode index " + std::to_string(idx) +
                                       " outside embedding table of size " +
                                       std::to_string(embeddings.size()));
        inputs.push_back(embeddings.input_vectors.row(idx).transpose());
    }
    return inputs;
}

struct SequenceGrads {
    std::vector<Eigen::VectorXd> dx; // gradient w.r.t. each input
};

// BPTT over one traced sequence. dh_external[t] is the gradient injected at
// h_t from outside the layer (pooling or the next stage). Parameter
// gradients accumulate into grads; dx is returned for the layer below.
SequenceGrads backward_sequence(const LstmLayerParams& params, const SequenceTrace& trace,
                                const std::vector<Eigen::VectorXd>& inputs,
                                const std::vector<Eigen::VectorXd>& dh_external,
                                LstmLayerParams& grads, bool want_dx) {
    const int hidden = params.hidden_dim();
    const auto T = static_cast<std::ptrdiff_t>(trace.steps.size());
    SequenceGrads out;
    if (want_dx) out.dx.assign(static_cast<std::size_t>(T), Eigen::VectorXd());

    Eigen::VectorXd dh_rec = Eigen::VectorXd::Zero(hidden);
    Eigen::VectorXd dC_rec = Eigen::VectorXd::Zero(hidden);
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(hidden);

    for (std::ptrdiff_t t = T - 1; t >= 0; --t) {
        const GateRecord& g = trace.steps[static_cast<std::size_t>(t)];
        const Eigen::VectorXd& h_prev = t > 0 ? trace.steps[static_cast<std::size_t>(t - 1)].h : zero;
        const Eigen::VectorXd& C_prev = t > 0 ? trace.steps[static_cast<std::size_t>(t - 1)].C : zero;
        const Eigen::VectorXd& x = inputs[static_cast<std::size_t>(t)];

        const Eigen::VectorXd dh = dh_external[static_cast<std::size_t>(t)] + dh_rec;

        // output gate first: its pre-activation feeds gradient back into C_t
        const Eigen::VectorXd do_ = (dh.array() * g.tanh_C.array()).matrix();
        const Eigen::VectorXd da_o =
            (do_.array() * g.o.array() * (1.0 - g.o.array())).matrix();

        Eigen::VectorXd dC =
            (dh.array() * g.o.array() * (1.0 - g.tanh_C.array().square())).matrix();
        dC += dC_rec;
        dC.noalias() += params.V_o.transpose() * da_o;

        const Eigen::VectorXd di = (dC.array() * g.ctilde.array()).matrix();
        const Eigen::VectorXd dctilde = (dC.array() * g.i.array()).matrix();
        const Eigen::VectorXd df = (dC.array() * C_prev.array()).matrix();
        dC_rec = (dC.array() * g.f.array()).matrix();

        const Eigen::VectorXd da_i = (di.array() * g.i.array() * (1.0 - g.i.array())).matrix();
        const Eigen::VectorXd da_f = (df.array() * g.f.array() * (1.0 - g.f.array())).matrix();
        const Eigen::VectorXd da_c = (dctilde.array() * (1.0 - g.ctilde.array().square())).matrix();

        grads.W_i.noalias() += da_i * x.transpose();
        grads.W_f.noalias() += da_f * x.transpose();
        grads.W_c.noalias() += da_c * x.transpose();
        grads.W_o.noalias() += da_o * x.transpose();
        grads.U_i.noalias() += da_i * h_prev.transpose();
        grads.U_f.noalias() += da_f * h_prev.transpose();
        grads.U_c.noalias() += da_c * h_prev.transpose();
        grads.U_o.noalias() += da_o * h_prev.transpose();
        grads.V_o.noalias() += da_o * g.C.transpose();
        grads.b_i += da_i;
        grads.b_f += da_f;
        grads.b_c += da_c;
        grads.b_o += da_o;

        dh_rec = params.U_i.transpose() * da_i + params.U_f.transpose() * da_f +
                 params.U_c.transpose() * da_c + params.U_o.transpose() * da_o;
        if (want_dx)
            out.dx[static_cast<std::size_t>(t)] =
                params.W_i.transpose() * da_i + params.W_f.transpose() * da_f +
                params.W_c.transpose() * da_c + params.W_o.transpose() * da_o;
    }
    return out;
}

} // namespace

Eigen::VectorXd encode_function(const LstmLayerParams& params,
                                const std::vector<Eigen::VectorXd>& inputs) {
    return run_sequence(params, inputs).steps.back().h;
}

ForwardTrace forward(const LstmStack& model, const EmbeddingMatrix& embeddings,
                     const EncodedDocument& doc) {
    if (doc.functions.empty())
        throw EmptyDocumentError("document " + doc.doc_id + " has no functions");
    if (embeddings.dim() != model.embedding_dim())
        throw ShapeMismatchError("embedding dim " + std::to_string(embeddings.dim()) +
                                 " does not match model input dim " +
                                 std::to_string(model.embedding_dim()));

    ForwardTrace trace;
    trace.layer1.reserve(doc.functions.size());
    trace.function_vectors.reserve(doc.functions.size());
    for (const auto& function : doc.functions) {
        trace.layer1.push_back(run_sequence(model.layer1, embed_function(embeddings, function)));
        trace.function_vectors.push_back(trace.layer1.back().steps.back().h);
    }

    std::vector<const Eigen::VectorXd*> pooled_inputs;
    if (model.ablate_second_layer) {
        for (const auto& v : trace.function_vectors) pooled_inputs.push_back(&v);
    } else {
        trace.layer2 = run_sequence(model.layer2, trace.function_vectors);
        for (const auto& step : trace.layer2.steps) pooled_inputs.push_back(&step.h);
    }
    trace.pooled = mean_pool(pooled_inputs);
    trace.logits = model.softmax_W * trace.pooled + model.softmax_b;
    trace.probs = stable_softmax(trace.logits);
    return trace;
}

LossAndGrads loss_and_gradients(const LstmStack& model, const EmbeddingMatrix& embeddings,
                                const EncodedDocument& doc, int label) {
    if (label < 0 || label >= model.num_classes)
        throw IndexOutOfRangeError("label " + std::to_string(label) + " outside [0, " +
                                   std::to_string(model.num_classes) + ")");

    const ForwardTrace trace = forward(model, embeddings, doc);
    const auto F = static_cast<std::ptrdiff_t>(trace.function_vectors.size());

    LossAndGrads result;
    result.grads = zeros_like(model);

    // -log S_label via log-sum-exp
    const double max_logit = trace.logits.maxCoeff();
    result.loss = std::log((trace.logits.array() - max_logit).exp().sum()) + max_logit -
                  trace.logits(label);

    Eigen::VectorXd dv = trace.probs;
    dv(label) -= 1.0;
    result.grads.softmax_W.noalias() += dv * trace.pooled.transpose();
    result.grads.softmax_b += dv;
    const Eigen::VectorXd dpool = model.softmax_W.transpose() * dv;
    const Eigen::VectorXd dper_step = dpool / static_cast<double>(F);

    // gradient reaching each function vector
    std::vector<Eigen::VectorXd> dfunction(static_cast<std::size_t>(F));
    if (model.ablate_second_layer) {
        for (auto& d : dfunction) d = dper_step;
    } else {
        const std::vector<Eigen::VectorXd> dh_ext(static_cast<std::size_t>(F), dper_step);
        SequenceGrads l2 = backward_sequence(model.layer2, trace.layer2,
                                             trace.function_vectors, dh_ext,
                                             result.grads.layer2, true);
        dfunction = std::move(l2.dx);
    }

    for (std::ptrdiff_t k = 0; k < F; ++k) {
        const auto& steps = trace.layer1[static_cast<std::size_t>(k)].steps;
        std::vector<Eigen::VectorXd> dh_ext(steps.size(),
                                            Eigen::VectorXd::Zero(model.hidden1()));
        dh_ext.back() = dfunction[static_cast<std::size_t>(k)];
        const auto inputs = embed_function(embeddings, doc.functions[static_cast<std::size_t>(k)]);
        backward_sequence(model.layer1, trace.layer1[static_cast<std::size_t>(k)], inputs,
                          dh_ext, result.grads.layer1, false);
    }
    return result;
}

Prediction predict(const LstmStack& model, const EmbeddingMatrix& embeddings,
                   const EncodedDocument& doc, int benign_index) {
    const ForwardTrace trace = forward(model, embeddings, doc);
    Prediction pred;
    pred.probabilities = trace.probs;
    pred.predicted_class = 0;
    for (int i = 1; i < model.num_classes; ++i)
        if (trace.probs(i) > trace.probs(pred.predicted_class)) pred.predicted_class = i;
    if (benign_index < 0 || benign_index >= model.num_classes)
        throw IndexOutOfRangeError("benign index " + std::to_string(benign_index) +
                                   " outside [0, " + std::to_string(model.num_classes) + ")");
    pred.malware_score = 1.0 - trace.probs(benign_index);
    return pred;
}

EncodedDocument clip_document(EncodedDocument doc, const ClipLimits& limits) {
    if (limits.max_functions_per_document >= 1 &&
        doc.functions.size() > static_cast<std::size_t>(limits.max_functions_per_document))
        doc.functions.resize(static_cast<std::size_t>(limits.max_functions_per_document));
    if (limits.max_opcodes_per_function >= 1)
        for (auto& fn : doc.functions)
            if (fn.size() > static_cast<std::size_t>(limits.max_opcodes_per_function))
                fn.resize(static_cast<std::size_t>(limits.max_opcodes_per_function));
    return doc;
}

} // namespace oplang
