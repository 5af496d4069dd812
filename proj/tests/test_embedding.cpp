#include <doctest.h>

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "oplang/embedding.hpp"
#include "oplang/errors.hpp"
#include "oplang/rng.hpp"
#include "oplang/vocabulary.hpp"
#include "oracle.hpp"

using namespace oplang;

namespace {

EmbeddingMatrix random_matrix(int size, int dim, std::uint64_t seed) {
    EmbeddingMatrix m;
    m.input_vectors.resize(size, dim);
    m.output_vectors.resize(size, dim);
    Rng rng(seed);
    for (int i = 0; i < size; ++i) {
        for (int j = 0; j < dim; ++j) {
            m.input_vectors(i, j) = rng.uniform(-0.8, 0.8);
            m.output_vectors(i, j) = rng.uniform(-0.8, 0.8);
        }
    }
    return m;
}

OpcodeDocument doc_of(std::string id, std::vector<std::vector<std::string>> functions) {
    OpcodeDocument doc;
    doc.doc_id = std::move(id);
    doc.label = "x";
    int n = 0;
    for (auto& ops : functions) {
        Function fn;
        fn.name = "f" + std::to_string(n++);
        fn.opcodes = std::move(ops);
        doc.functions.push_back(std::move(fn));
    }
    return doc;
}

} // namespace

TEST_SUITE("embedding") {

TEST_CASE("model names round-trip") {
    CHECK(to_string(EmbeddingModel::Cbow) == "cbow");
    CHECK(to_string(EmbeddingModel::SkipGram) == "skipgram");
    CHECK(embedding_model_from_string("cbow") == EmbeddingModel::Cbow);
    CHECK(embedding_model_from_string("skipgram") == EmbeddingModel::SkipGram);
    CHECK_THROWS_AS(embedding_model_from_string("glove"), ConfigError);
}

TEST_CASE("config validation") {
    EmbeddingConfig config;
    CHECK_NOTHROW(config.validate());
    config.dim = 0;
    CHECK_THROWS_AS(config.validate(), ConfigError);
    config = {};
    config.window = 0;
    CHECK_THROWS_AS(config.validate(), ConfigError);
    config = {};
    config.negatives = -1;
    CHECK_THROWS_AS(config.validate(), ConfigError);
    config = {};
    config.learning_rate = 0.0;
    CHECK_THROWS_AS(config.validate(), ConfigError);
}

TEST_CASE("context windows clamp at function bounds and skip singletons") {
    std::vector<std::array<int, 3>> seen;
    detail::for_each_context({10, 11, 12, 13, 14}, 2,
                             [&](int c, int lo, int hi) { seen.push_back({c, lo, hi}); });
    REQUIRE(seen.size() == 5);
    CHECK(seen[0] == std::array<int, 3>{0, 0, 2});
    CHECK(seen[2] == std::array<int, 3>{2, 0, 4});
    CHECK(seen[4] == std::array<int, 3>{4, 2, 4});

    seen.clear();
    detail::for_each_context({7}, 5, [&](int c, int lo, int hi) { seen.push_back({c, lo, hi}); });
    CHECK(seen.empty());
}

TEST_CASE("cbow gradients match finite differences") {
    const auto m = random_matrix(8, 5, 21);
    const std::vector<int> context = {1, 3, 4};
    const std::vector<int> negatives = {5, 6};
    CHECK(oracle::cbow_grad_rel_err(m, 2, context, negatives, 1e-5) < 1e-4);
}

TEST_CASE("skipgram gradients match finite differences") {
    const auto m = random_matrix(8, 5, 22);
    const std::vector<int> negatives = {0, 7, 7};
    CHECK(oracle::skipgram_grad_rel_err(m, 2, 4, negatives, 1e-5) < 1e-4);
}

TEST_CASE("event loss decreases after an sgd step") {
    auto m = random_matrix(6, 4, 23);
    const std::vector<int> context = {0, 1};
    const std::vector<int> negatives = {4, 5};
    const auto before = detail::cbow_event(m, 3, context, negatives);
    detail::apply_event(m, before, 0.05);
    const auto after = detail::cbow_event(m, 3, context, negatives);
    CHECK(after.loss < before.loss);
}

TEST_CASE("training is deterministic and loss trends down") {
    std::vector<OpcodeDocument> docs;
    for (int d = 0; d < 6; ++d)
        docs.push_back(doc_of("d" + std::to_string(d),
                              {{"aa", "bb", "aa", "bb", "aa", "bb"},
                               {"cc", "dd", "cc", "dd", "cc", "dd"}}));
    const auto vocab = build_vocabulary(docs, 1);
    const auto encoded = encode_all(docs, vocab);

    EmbeddingConfig config;
    config.dim = 8;
    config.window = 2;
    config.epochs = 10;
    config.seed = 5;

    const auto first = train_embeddings(encoded, vocab, config);
    const auto second = train_embeddings(encoded, vocab, config);
    CHECK((first.matrix.input_vectors.array() == second.matrix.input_vectors.array()).all());
    CHECK((first.matrix.output_vectors.array() == second.matrix.output_vectors.array()).all());
    REQUIRE(first.epoch_mean_loss.size() == 10);
    CHECK(first.epoch_mean_loss.back() < first.epoch_mean_loss.front());
    CHECK(first.matrix.vocab_fingerprint == vocab.fingerprint());
}

TEST_CASE("opcodes sharing contexts land closer than unrelated ones") {
    // aa and bb are interchangeable between xx and yy; cc sits in a different frame.
    // Shared contexts, not adjacency, are what should pull input vectors together.
    std::vector<OpcodeDocument> docs;
    for (int d = 0; d < 30; ++d)
        docs.push_back(doc_of("d" + std::to_string(d),
                              {{"xx", "aa", "yy", "xx", "bb", "yy",
                                "xx", "aa", "yy", "xx", "bb", "yy"},
                               {"pp", "cc", "qq", "pp", "cc", "qq", "pp", "cc", "qq"}}));
    const auto vocab = build_vocabulary(docs, 1);
    const auto encoded = encode_all(docs, vocab);

    for (const auto model : {EmbeddingModel::Cbow, EmbeddingModel::SkipGram}) {
        CAPTURE(to_string(model));
        EmbeddingConfig config;
        config.dim = 16;
        config.window = 1;
        config.epochs = 40;
        config.model = model;
        config.seed = 9;
        const auto result = train_embeddings(encoded, vocab, config);

        const int aa = vocab.index_of("aa");
        const int bb = vocab.index_of("bb");
        const int cc = vocab.index_of("cc");
        auto cosine = [&](int u, int v) {
            const Eigen::VectorXd a = lookup(result.matrix, u);
            const Eigen::VectorXd b = lookup(result.matrix, v);
            return a.dot(b) / (a.norm() * b.norm());
        };
        CHECK(cosine(aa, bb) > cosine(aa, cc));

        const auto neighbors = nearest_neighbors(result.matrix, aa, 2);
        REQUIRE(neighbors.size() == 2);
        CHECK(neighbors[0].first == bb);
    }
}

TEST_CASE("degenerate corpus with no pairs") {
    std::vector<OpcodeDocument> docs = {doc_of("a", {{"mov"}, {"ret"}})};
    const auto vocab = build_vocabulary(docs, 1);
    EmbeddingConfig config;
    config.dim = 4;
    CHECK_THROWS_AS(train_embeddings(encode_all(docs, vocab), vocab, config),
                    DegenerateCorpusError);
}

TEST_CASE("lookup and neighbor argument checks") {
    const auto m = random_matrix(4, 3, 31);
    CHECK_THROWS_AS(lookup(m, -1), IndexOutOfRangeError);
    CHECK_THROWS_AS(lookup(m, 4), IndexOutOfRangeError);
    CHECK_THROWS_AS(nearest_neighbors(m, 0, 4), ConfigError); // k must leave self out
    CHECK_NOTHROW(nearest_neighbors(m, 0, 3));
}

} // TEST_SUITE
