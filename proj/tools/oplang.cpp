// Command-line front end for the opcode-language pipeline: extract opcode
// corpora from assembly listings, inspect them, learn embeddings, train and
// evaluate the classifier, run the experiment grid, and synthesize corpora.
//
// Every setting can come from a flat "key = value" config file (--config)
// and be overridden by flags. Exit codes: 0 success, 1 partial extraction
// failure, 2 config or runtime error.

#include <CLI11.hpp>

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "oplang/asm_parser.hpp"
#include "oplang/embedding.hpp"
#include "oplang/errors.hpp"
#include "oplang/evaluate.hpp"
#include "oplang/experiment.hpp"
#include "oplang/generator.hpp"
#include "oplang/io.hpp"
#include "oplang/lstm.hpp"
#include "oplang/pipeline.hpp"
#include "oplang/train.hpp"
#include "oplang/vocabulary.hpp"

namespace fs = std::filesystem;

namespace {

struct Settings {
    oplang::PipelineConfig pipeline;
    int top_k = 10;
    oplang::ExperimentGrid grid;
    int gen_classes = 2;
    int gen_docs = 100;
    std::uint64_t gen_seed = 7;
};

int parse_int(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const int parsed = std::stoi(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return parsed;
    } catch (const std::exception&) {
        throw oplang::ConfigError(key + ": not an integer: " + value);
    }
}

std::uint64_t parse_seed(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const std::uint64_t parsed = std::stoull(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return parsed;
    } catch (const std::exception&) {
        throw oplang::ConfigError(key + ": not a seed: " + value);
    }
}

double parse_float(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const double parsed = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return parsed;
    } catch (const std::exception&) {
        throw oplang::ConfigError(key + ": not a number: " + value);
    }
}

bool parse_flag(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw oplang::ConfigError(key + ": not a boolean: " + value);
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> items;
    std::string current;
    for (char c : value) {
        if (c == ',') {
            if (!current.empty()) items.push_back(current);
            current.clear();
        } else if (c != ' ' && c != '\t') {
            current += c;
        }
    }
    if (!current.empty()) items.push_back(current);
    return items;
}

void apply_setting(Settings& s, const std::string& key, const std::string& value) {
    auto& p = s.pipeline;
    if (key == "parser.segment") {
        p.parser.code_segment = value;
    } else if (key == "parser.filter") {
        p.filter.tokens.clear();
        for (std::string tok : split_list(value)) {
            for (char& c : tok) c = char(std::tolower(static_cast<unsigned char>(c)));
            p.filter.tokens.insert(tok);
        }
    } else if (key == "vocab.min_count") {
        p.min_count = parse_int(key, value);
    } else if (key == "stats.top_k") {
        s.top_k = parse_int(key, value);
    } else if (key == "embed.dim") {
        p.embed.dim = parse_int(key, value);
    } else if (key == "embed.window") {
        p.embed.window = parse_int(key, value);
    } else if (key == "embed.model") {
        p.embed.model = oplang::embedding_model_from_string(value);
    } else if (key == "embed.negatives") {
        p.embed.negatives = parse_int(key, value);
    } else if (key == "embed.epochs") {
        p.embed.epochs = parse_int(key, value);
    } else if (key == "embed.learning_rate") {
        p.embed.learning_rate = parse_float(key, value);
    } else if (key == "embed.seed") {
        p.embed.seed = parse_seed(key, value);
    } else if (key == "train.epochs") {
        p.train.epochs = parse_int(key, value);
    } else if (key == "train.learning_rate") {
        p.train.learning_rate = parse_float(key, value);
    } else if (key == "train.optimizer") {
        p.train.optimizer = oplang::optimizer_from_string(value);
    } else if (key == "train.seed") {
        p.train.seed = parse_seed(key, value);
    } else if (key == "train.split_fraction") {
        p.train.split_fraction = parse_float(key, value);
    } else if (key == "train.task") {
        p.train.task = oplang::task_from_string(value);
    } else if (key == "train.ablate_second_layer") {
        p.train.ablate_second_layer = parse_flag(key, value);
    } else if (key == "train.stratify") {
        p.train.stratify = parse_flag(key, value);
    } else if (key == "train.hidden1") {
        p.train.hidden1 = parse_int(key, value);
    } else if (key == "train.hidden2") {
        p.train.hidden2 = parse_int(key, value);
    } else if (key == "train.max_opcodes_per_function") {
        p.train.clip.max_opcodes_per_function = parse_int(key, value);
    } else if (key == "train.max_functions_per_document") {
        p.train.clip.max_functions_per_document = parse_int(key, value);
    } else if (key == "train.benign_label") {
        p.benign_label = value;
    } else if (key == "experiment.windows") {
        s.grid.windows.clear();
        for (const auto& item : split_list(value)) s.grid.windows.push_back(parse_int(key, item));
    } else if (key == "experiment.models") {
        s.grid.models.clear();
        for (const auto& item : split_list(value))
            s.grid.models.push_back(oplang::embedding_model_from_string(item));
    } else if (key == "experiment.ablations") {
        s.grid.ablations.clear();
        for (const auto& item : split_list(value)) s.grid.ablations.push_back(parse_flag(key, item));
    } else if (key == "experiment.tasks") {
        s.grid.tasks.clear();
        for (const auto& item : split_list(value))
            s.grid.tasks.push_back(oplang::task_from_string(item));
    } else if (key == "generate.classes") {
        s.gen_classes = parse_int(key, value);
    } else if (key == "generate.docs_per_class") {
        s.gen_docs = parse_int(key, value);
    } else if (key == "generate.seed") {
        s.gen_seed = parse_seed(key, value);
    } else {
        throw oplang::ConfigError("unknown config key: " + key);
    }
}

Settings build_settings(const std::map<std::string, std::string>& kv) {
    Settings s;
    for (const auto& [key, value] : kv) apply_setting(s, key, value);
    return s;
}

fs::path manifest_or_default(const std::string& manifest, const fs::path& root) {
    return manifest.empty() ? root / "manifest.txt" : fs::path(manifest);
}

std::vector<oplang::OpcodeDocument> load_ops_corpus(const fs::path& root,
                                                    const std::string& manifest) {
    return oplang::read_ops_corpus(root, oplang::read_manifest(manifest_or_default(manifest, root)));
}

int run_extract(const Settings& s, const fs::path& asm_root, const std::string& manifest,
                const fs::path& out) {
    const auto entries = oplang::read_manifest(manifest_or_default(manifest, asm_root));
    const auto result = oplang::parse_corpus(asm_root, entries, s.pipeline.filter,
                                             s.pipeline.parser);
    for (const auto& failure : result.failures)
        std::cerr << failure.path << ": " << failure.error_name << ": " << failure.message
                  << "\n";

    std::vector<oplang::ManifestEntry> ops_entries;
    for (const auto& doc : result.documents) {
        fs::path rel(doc.doc_id);
        rel.replace_extension(".ops");
        if (rel.has_parent_path()) fs::create_directories(out / rel.parent_path());
        else fs::create_directories(out);
        oplang::write_ops_file(out / rel, doc);
        ops_entries.push_back({rel.generic_string(), doc.label});
    }
    std::sort(ops_entries.begin(), ops_entries.end(),
              [](const auto& a, const auto& b) { return a.path < b.path; });
    fs::create_directories(out);
    oplang::write_manifest(out / "manifest.txt", ops_entries);
    std::cout << "extracted " << result.documents.size() << " of " << entries.size()
              << " documents\n";
    return result.failures.empty() && !result.documents.empty() ? 0 : 1;
}

int run_stats(const Settings& s, const fs::path& ops_root, const std::string& manifest,
              const fs::path& out) {
    const auto docs = load_ops_corpus(ops_root, manifest);
    const auto stats = oplang::corpus_stats(docs, s.top_k);
    const std::string table = oplang::stats_table(stats);
    fs::create_directories(out);
    oplang::write_text_file(out / "stats.txt", table);
    oplang::write_text_file(out / "stats.tsv", oplang::stats_records(stats));
    std::cout << table;
    return 0;
}

int run_vocab(const Settings& s, const fs::path& ops_root, const std::string& manifest,
              const fs::path& out) {
    const auto docs = load_ops_corpus(ops_root, manifest);
    const auto [train_docs, test_docs] =
        oplang::split_dataset(docs, s.pipeline.train.split_fraction, s.pipeline.train.seed,
                              s.pipeline.train.stratify);
    const auto vocab = oplang::build_vocabulary(train_docs, s.pipeline.min_count);
    fs::create_directories(out);
    oplang::save_vocabulary(out / "vocab.txt", vocab);
    std::cout << "vocabulary of " << vocab.size() << " opcodes (min_count "
              << vocab.min_count() << ", " << train_docs.size() << " training documents)\n";
    return 0;
}

int run_embed(const Settings& s, const fs::path& ops_root, const std::string& manifest,
              const fs::path& vocab_path, const fs::path& out) {
    const auto docs = load_ops_corpus(ops_root, manifest);
    const auto [train_docs, test_docs] =
        oplang::split_dataset(docs, s.pipeline.train.split_fraction, s.pipeline.train.seed,
                              s.pipeline.train.stratify);
    const auto vocab = oplang::load_vocabulary(vocab_path);
    const auto train_enc = oplang::encode_all(train_docs, vocab);
    const auto result = oplang::train_embeddings(train_enc, vocab, s.pipeline.embed);
    fs::create_directories(out);
    oplang::save_embeddings(out / "embeddings.txt", result.matrix, vocab);
    for (std::size_t e = 0; e < result.epoch_mean_loss.size(); ++e)
        std::cout << "epoch " << e << " loss " << result.epoch_mean_loss[e] << "\n";
    return 0;
}

int run_train(const Settings& s, const fs::path& ops_root, const std::string& manifest,
              const fs::path& vocab_path, const fs::path& emb_path, const fs::path& out) {
    const auto docs = load_ops_corpus(ops_root, manifest);
    const auto [train_docs, test_docs] =
        oplang::split_dataset(docs, s.pipeline.train.split_fraction, s.pipeline.train.seed,
                              s.pipeline.train.stratify);
    const auto vocab = oplang::load_vocabulary(vocab_path);
    const auto emb = oplang::load_embeddings(emb_path, vocab);

    const auto labels = oplang::distinct_labels(docs);
    const auto benign = oplang::resolve_benign_label(labels, s.pipeline.benign_label);
    const auto classes = oplang::make_class_map(labels, s.pipeline.train.task, benign);
    auto train_enc = oplang::encode_all(train_docs, vocab);
    oplang::assign_classes(train_enc, classes);
    for (auto& doc : train_enc) doc = oplang::clip_document(std::move(doc), s.pipeline.train.clip);

    oplang::LstmInit init;
    init.embedding_dim = emb.dim();
    init.hidden1 = s.pipeline.train.hidden1;
    init.hidden2 = s.pipeline.train.hidden2;
    init.num_classes = int(classes.class_names.size());
    init.ablate_second_layer = s.pipeline.train.ablate_second_layer;
    init.seed = s.pipeline.train.seed;

    const auto result = oplang::train_classifier(oplang::init_lstm_stack(init), emb, train_enc,
                                                 s.pipeline.train);
    fs::create_directories(out);
    oplang::save_model(out / "model.txt", result.model, vocab.fingerprint());
    std::string loss_lines;
    for (std::size_t e = 0; e < result.epoch_mean_loss.size(); ++e)
        loss_lines += std::to_string(e) + ' ' + oplang::format_double(result.epoch_mean_loss[e]) +
                      '\n';
    oplang::write_text_file(out / "train_loss.txt", loss_lines);
    std::cout << "trained on " << train_enc.size() << " documents, final epoch loss "
              << result.epoch_mean_loss.back() << "\n";
    return 0;
}

int run_eval(const Settings& s, const fs::path& ops_root, const std::string& manifest,
             const fs::path& vocab_path, const fs::path& emb_path, const fs::path& model_path,
             const fs::path& out) {
    const auto docs = load_ops_corpus(ops_root, manifest);
    const auto [train_docs, test_docs] =
        oplang::split_dataset(docs, s.pipeline.train.split_fraction, s.pipeline.train.seed,
                              s.pipeline.train.stratify);
    const auto vocab = oplang::load_vocabulary(vocab_path);
    const auto emb = oplang::load_embeddings(emb_path, vocab);
    auto loaded = oplang::load_model(model_path);
    if (loaded.vocab_fingerprint != vocab.fingerprint())
        throw oplang::ConfigError("model was trained against a different vocabulary");

    const auto labels = oplang::distinct_labels(docs);
    const auto benign = oplang::resolve_benign_label(labels, s.pipeline.benign_label);
    const auto classes = oplang::make_class_map(labels, s.pipeline.train.task, benign);
    if (int(classes.class_names.size()) != loaded.model.num_classes)
        throw oplang::ConfigError("model has " + std::to_string(loaded.model.num_classes) +
                                  " classes, corpus maps to " +
                                  std::to_string(classes.class_names.size()));

    auto test_enc = oplang::encode_all(test_docs, vocab);
    oplang::assign_classes(test_enc, classes);
    for (auto& doc : test_enc) doc = oplang::clip_document(std::move(doc), s.pipeline.train.clip);

    const auto report = oplang::evaluate(loaded.model, emb, test_enc, s.pipeline.train.task,
                                         classes.class_names, classes.benign_index);
    fs::create_directories(out);
    oplang::write_eval_report(out / "report.txt", report);
    std::cout << "acc " << report.accuracy << ", auc ";
    if (report.auc_defined) std::cout << report.auc;
    else std::cout << "undefined";
    std::cout << " on " << test_enc.size() << " held-out documents\n";
    return 0;
}

int run_experiment_cmd(const Settings& s, const fs::path& ops_root, const std::string& manifest,
                       const fs::path& out) {
    const auto docs = load_ops_corpus(ops_root, manifest);
    const auto report = oplang::run_experiment(docs, s.grid, s.pipeline);
    fs::create_directories(out);
    oplang::write_experiment_report(out / "experiment.tsv", report);
    for (const auto& row : report.rows)
        std::cout << "window " << row.window << ", " << oplang::to_string(row.model)
                  << ", ablate " << (row.ablate ? 1 : 0) << ", " << oplang::to_string(row.task)
                  << ": acc " << row.accuracy << ", auc " << row.auc << "\n";
    return 0;
}

int run_generate(const Settings& s, const fs::path& out) {
    auto spec = oplang::default_generator_spec(s.gen_classes);
    spec.docs_per_class = s.gen_docs;
    spec.seed = s.gen_seed;
    const auto entries = oplang::generate_corpus(spec, out);
    std::cout << "wrote " << entries.size() << " documents in " << spec.classes.size()
              << " classes under " << out.string() << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"opcode sequences as a language: extraction, embeddings, classification"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::string manifest;
    std::uint64_t seed = 0;
    int window = 0;
    std::string embed_model;
    int dim = 0;
    int epochs = 0;
    int min_count = 0;
    std::string task;
    bool ablate = false;
    int top_k = 0;

    app.add_option("--config", config_path, "flat key = value settings file");
    auto* out_opt = app.add_option("--out", out_dir, "output directory");
    app.add_option("--manifest", manifest, "manifest path (default <root>/manifest.txt)");
    auto* seed_opt = app.add_option("--seed", seed, "seed for split, embeddings, training");
    auto* window_opt = app.add_option("--window", window, "context window size");
    auto* model_opt =
        app.add_option("--embed-model", embed_model, "embedding model: cbow or skipgram");
    auto* dim_opt = app.add_option("--dim", dim, "embedding dimension");
    auto* epochs_opt = app.add_option("--epochs", epochs, "training epochs");
    auto* minc_opt = app.add_option("--min-count", min_count, "vocabulary frequency threshold");
    auto* task_opt = app.add_option("--task", task, "binary or multiclass");
    auto* ablate_opt = app.add_flag("--ablate-second-layer", ablate,
                                    "pool function vectors directly, skipping the second stage");
    auto* topk_opt = app.add_option("--top-k", top_k, "ranking depth for stats");

    std::string asm_root;
    std::string ops_root;
    std::string vocab_path;
    std::string emb_path;
    std::string model_path;
    int gen_classes = 0;
    int gen_docs = 0;

    auto* c_extract = app.add_subcommand("extract", "assembly corpus to opcode sequences");
    c_extract->add_option("--asm-root", asm_root, "assembly corpus root")->required();

    auto* c_stats = app.add_subcommand("stats", "corpus frequency statistics");
    auto* c_vocab = app.add_subcommand("vocab", "vocabulary from the training split");
    auto* c_embed = app.add_subcommand("embed", "train opcode embeddings");
    auto* c_train = app.add_subcommand("train", "train the classifier");
    auto* c_eval = app.add_subcommand("eval", "evaluate on the held-out split");
    auto* c_exp = app.add_subcommand("experiment", "window/model/ablation/task grid");
    auto* c_gen = app.add_subcommand("generate", "synthesize a labeled assembly corpus");

    for (auto* sub : {c_stats, c_vocab, c_embed, c_train, c_eval, c_exp})
        sub->add_option("--ops-root", ops_root, "opcode corpus root")->required();
    for (auto* sub : {c_embed, c_train, c_eval})
        sub->add_option("--vocab", vocab_path, "vocabulary file")->required();
    for (auto* sub : {c_train, c_eval})
        sub->add_option("--embeddings", emb_path, "embedding file")->required();
    c_eval->add_option("--model", model_path, "checkpoint file")->required();
    c_gen->add_option("--classes", gen_classes, "number of classes (2 or 5)");
    c_gen->add_option("--docs-per-class", gen_docs, "documents per class");

    for (auto* sub : {c_extract, c_stats, c_vocab, c_embed, c_train, c_eval, c_exp, c_gen})
        sub->fallthrough();

    CLI11_PARSE(app, argc, argv);

    try {
        std::map<std::string, std::string> kv;
        if (!config_path.empty()) kv = oplang::read_config_file(config_path);
        if (seed_opt->count()) {
            kv["embed.seed"] = std::to_string(seed);
            kv["train.seed"] = std::to_string(seed);
            kv["generate.seed"] = std::to_string(seed);
        }
        if (window_opt->count()) kv["embed.window"] = std::to_string(window);
        if (model_opt->count()) kv["embed.model"] = embed_model;
        if (dim_opt->count()) kv["embed.dim"] = std::to_string(dim);
        if (epochs_opt->count())
            kv[app.got_subcommand(c_embed) ? "embed.epochs" : "train.epochs"] =
                std::to_string(epochs);
        if (minc_opt->count()) kv["vocab.min_count"] = std::to_string(min_count);
        if (task_opt->count()) kv["train.task"] = task;
        if (ablate_opt->count()) kv["train.ablate_second_layer"] = "true";
        if (topk_opt->count()) kv["stats.top_k"] = std::to_string(top_k);
        if (gen_classes) kv["generate.classes"] = std::to_string(gen_classes);
        if (gen_docs) kv["generate.docs_per_class"] = std::to_string(gen_docs);

        const Settings settings = build_settings(kv);
        if (!out_opt->count()) throw oplang::ConfigError("--out is required");
        const fs::path out(out_dir);

        if (app.got_subcommand(c_extract)) return run_extract(settings, asm_root, manifest, out);
        if (app.got_subcommand(c_stats)) return run_stats(settings, ops_root, manifest, out);
        if (app.got_subcommand(c_vocab)) return run_vocab(settings, ops_root, manifest, out);
        if (app.got_subcommand(c_embed))
            return run_embed(settings, ops_root, manifest, vocab_path, out);
        if (app.got_subcommand(c_train))
            return run_train(settings, ops_root, manifest, vocab_path, emb_path, out);
        if (app.got_subcommand(c_eval))
            return run_eval(settings, ops_root, manifest, vocab_path, emb_path, model_path, out);
        if (app.got_subcommand(c_exp)) return run_experiment_cmd(settings, ops_root, manifest, out);
        if (app.got_subcommand(c_gen)) return run_generate(settings, out);
        throw oplang::ConfigError("no subcommand");
    } catch (const oplang::Error& e) {
        std::cerr << e.name() << ": " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
