#include <benchmark/benchmark.h>

#include <sstream>
#include <vector>

#include "oplang/asm_parser.hpp"
#include "oplang/embedding.hpp"
#include "oplang/generator.hpp"
#include "oplang/lstm.hpp"
#include "oplang/rng.hpp"
#include "oplang/vocabulary.hpp"

namespace {

oplang::EncodedDocument synthetic_encoded(int functions, int length, int vocab, std::uint64_t seed) {
    oplang::Rng rng = oplang::Rng::derive(seed, 0);
    oplang::EncodedDocument doc;
    doc.doc_id = "bench";
    doc.label = "a";
    doc.class_index = 0;
    doc.functions.resize(std::size_t(functions));
    for (auto& fn : doc.functions) {
        fn.resize(std::size_t(length));
        for (auto& tok : fn) tok = int(rng.below(std::uint64_t(vocab)));
    }
    return doc;
}

oplang::EmbeddingMatrix random_embeddings(int vocab, int dim, std::uint64_t seed) {
    oplang::Rng rng = oplang::Rng::derive(seed, 1);
    oplang::EmbeddingMatrix m;
    m.input_vectors.resize(vocab, dim);
    m.output_vectors = oplang::RowMatrixXd::Zero(vocab, dim);
    for (int i = 0; i < vocab; ++i)
        for (int j = 0; j < dim; ++j) m.input_vectors(i, j) = rng.uniform(-0.1, 0.1);
    return m;
}

void bench_cell_step(benchmark::State& state) {
    const int hidden = int(state.range(0));
    oplang::LstmInit init;
    init.embedding_dim = 100;
    init.hidden1 = hidden;
    init.hidden2 = hidden;
    const auto stack = oplang::init_lstm_stack(init);
    oplang::Rng rng = oplang::Rng::derive(3, 0);
    Eigen::VectorXd x(100);
    for (int i = 0; i < 100; ++i) x(i) = rng.uniform(-1.0, 1.0);
    auto state_vec = oplang::CellState::zeros(hidden);
    for (auto _ : state) {
        auto [next, gates] = oplang::cell_step(stack.layer1, x, state_vec);
        benchmark::DoNotOptimize(next.h.sum());
    }
}
BENCHMARK(bench_cell_step)->Arg(32)->Arg(64)->Arg(128);

void bench_forward(benchmark::State& state) {
    const auto doc = synthetic_encoded(8, 64, 40, 11);
    const auto emb = random_embeddings(40, 100, 11);
    oplang::LstmInit init;
    const auto stack = oplang::init_lstm_stack(init);
    for (auto _ : state) {
        auto trace = oplang::forward(stack, emb, doc);
        benchmark::DoNotOptimize(trace.probs.sum());
    }
}
BENCHMARK(bench_forward);

void bench_loss_and_gradients(benchmark::State& state) {
    const auto doc = synthetic_encoded(8, 64, 40, 12);
    const auto emb = random_embeddings(40, 100, 12);
    oplang::LstmInit init;
    const auto stack = oplang::init_lstm_stack(init);
    for (auto _ : state) {
        auto lg = oplang::loss_and_gradients(stack, emb, doc, 0);
        benchmark::DoNotOptimize(lg.loss);
    }
}
BENCHMARK(bench_loss_and_gradients);

void bench_embedding_epoch(benchmark::State& state) {
    std::vector<oplang::OpcodeDocument> docs;
    oplang::Rng rng = oplang::Rng::derive(13, 0);
    const auto spec = oplang::default_generator_spec(2);
    const auto& inv = spec.classes[0].inventory;
    for (int d = 0; d < 20; ++d) {
        oplang::OpcodeDocument doc;
        doc.doc_id = "d" + std::to_string(d);
        doc.label = "a";
        for (int f = 0; f < 5; ++f) {
            oplang::Function fn;
            fn.name = "f" + std::to_string(f);
            for (int k = 0; k < 40; ++k)
                fn.opcodes.push_back(inv[rng.below(inv.size())]);
            doc.functions.push_back(fn);
        }
        docs.push_back(doc);
    }
    const auto vocab = oplang::build_vocabulary(docs, 1);
    const auto encoded = oplang::encode_all(docs, vocab);
    oplang::EmbeddingConfig cfg;
    cfg.dim = 50;
    cfg.window = 5;
    cfg.epochs = 1;
    for (auto _ : state) {
        auto result = oplang::train_embeddings(encoded, vocab, cfg);
        benchmark::DoNotOptimize(result.epoch_mean_loss[0]);
    }
}
BENCHMARK(bench_embedding_epoch);

void bench_parse(benchmark::State& state) {
    std::string text;
    text.reserve(1 << 16);
    for (int f = 0; f < 16; ++f) {
        text += ".text:00401000 sub_1 proc near\n";
        for (int i = 0; i < 64; ++i)
            text += ".text:00401004     mov     eax, ebx ; c\n";
        text += ".text:00401100 sub_1 endp\n";
    }
    const auto filter = oplang::default_filter_set();
    const oplang::ParserConfig config;
    for (auto _ : state) {
        auto doc = oplang::parse_asm_string(text, filter, config, "bench", "a");
        benchmark::DoNotOptimize(doc.opcode_count());
    }
    state.SetBytesProcessed(std::int64_t(state.iterations()) * std::int64_t(text.size()));
}
BENCHMARK(bench_parse);

} // namespace

BENCHMARK_MAIN();
