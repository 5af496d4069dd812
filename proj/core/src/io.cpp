#include "oplang/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string_view>
#include <system_error>

#include "oplang/errors.hpp"

namespace oplang {

std::string format_double(double value) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoFailureError("cannot open for writing: " + path.string());
    out.write(text.data(), std::streamsize(text.size()));
    out.flush();
    if (!out) throw IoFailureError("write failed: " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoFailureError("cannot open for reading: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw IoFailureError("read failed: " + path.string());
    return buf.str();
}

namespace {

std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start < text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        lines.push_back(text.substr(start, end - start));
        start = end + 1;
    }
    return lines;
}

std::vector<std::string_view> split_fields(std::string_view line, char sep) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        std::size_t end = line.find(sep, start);
        if (end == std::string_view::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, end - start));
        start = end + 1;
    }
}

// Whitespace-token scanner with from_chars numeric parsing, used by the
// vocabulary/embedding/checkpoint readers.
class TokenReader {
public:
    TokenReader(std::string_view text, std::string origin)
        : text_(text), origin_(std::move(origin)) {}

    bool at_end() {
        skip_space();
        return pos_ == text_.size();
    }

    std::string_view next(const char* what) {
        skip_space();
        if (pos_ == text_.size())
            throw MalformedInputError(origin_ + ": unexpected end of file, wanted " +
                                      std::string(what));
        std::size_t start = pos_;
        while (pos_ < text_.size() && !is_space(text_[pos_])) ++pos_;
        return text_.substr(start, pos_ - start);
    }

    std::int64_t next_int(const char* what) {
        std::string_view tok = next(what);
        std::int64_t value = 0;
        auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
        if (ec != std::errc() || ptr != tok.data() + tok.size())
            throw MalformedInputError(origin_ + ": bad integer '" + std::string(tok) +
                                      "' for " + what);
        return value;
    }

    double next_double(const char* what) {
        std::string_view tok = next(what);
        double value = 0.0;
        auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
        if (ec != std::errc() || ptr != tok.data() + tok.size())
            throw MalformedInputError(origin_ + ": bad number '" + std::string(tok) +
                                      "' for " + what);
        return value;
    }

    void expect(const char* literal) {
        std::string_view tok = next(literal);
        if (tok != literal)
            throw MalformedInputError(origin_ + ": expected '" + literal + "', found '" +
                                      std::string(tok) + "'");
    }

private:
    static bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

    void skip_space() {
        while (pos_ < text_.size() && is_space(text_[pos_])) ++pos_;
    }

    std::string_view text_;
    std::string origin_;
    std::size_t pos_ = 0;
};

std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
    return std::string(s.substr(b, e - b));
}

} // namespace

std::string ops_to_string(const OpcodeDocument& doc) {
    std::string out;
    for (const auto& fn : doc.functions) {
        out += fn.name;
        out += '\t';
        for (std::size_t i = 0; i < fn.opcodes.size(); ++i) {
            if (i) out += ' ';
            out += fn.opcodes[i];
        }
        out += '\n';
    }
    return out;
}

OpcodeDocument ops_from_string(const std::string& text, std::string doc_id, std::string label) {
    OpcodeDocument doc;
    doc.doc_id = std::move(doc_id);
    doc.label = std::move(label);
    for (std::string_view line : split_lines(text)) {
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;
        const std::size_t tab = line.find('\t');
        if (tab == std::string_view::npos || tab == 0)
            throw MalformedInputError(doc.doc_id + ": ops line without 'name\\t' prefix");
        Function fn;
        fn.name = std::string(line.substr(0, tab));
        for (std::string_view tok : split_fields(line.substr(tab + 1), ' '))
            if (!tok.empty()) fn.opcodes.emplace_back(tok);
        if (fn.opcodes.empty())
            throw MalformedInputError(doc.doc_id + ": function '" + fn.name + "' has no opcodes");
        doc.functions.push_back(std::move(fn));
    }
    if (doc.functions.empty()) throw EmptyDocumentError(doc.doc_id + ": no functions");
    return doc;
}

void write_ops_file(const std::filesystem::path& path, const OpcodeDocument& doc) {
    write_text_file(path, ops_to_string(doc));
}

OpcodeDocument read_ops_file(const std::filesystem::path& path, std::string doc_id,
                             std::string label) {
    return ops_from_string(read_text_file(path), std::move(doc_id), std::move(label));
}

void write_manifest(const std::filesystem::path& path,
                    const std::vector<ManifestEntry>& entries) {
    std::string out;
    for (const auto& entry : entries) {
        out += entry.path;
        out += '\t';
        out += entry.label;
        out += '\n';
    }
    write_text_file(path, out);
}

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path) {
    const std::string text = read_text_file(path);
    std::vector<ManifestEntry> entries;
    for (std::string_view line : split_lines(text)) {
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;
        const std::size_t tab = line.find('\t');
        if (tab == std::string_view::npos || tab == 0 || tab + 1 == line.size())
            throw MalformedInputError(path.string() + ": manifest line needs 'path\\tlabel'");
        entries.push_back({std::string(line.substr(0, tab)), std::string(line.substr(tab + 1))});
    }
    return entries;
}

std::vector<OpcodeDocument> read_ops_corpus(const std::filesystem::path& root,
                                            const std::vector<ManifestEntry>& entries) {
    std::vector<OpcodeDocument> docs;
    docs.reserve(entries.size());
    for (const auto& entry : entries) {
        const std::filesystem::path full = root / entry.path;
        if (!std::filesystem::exists(full))
            throw ManifestMismatchError("manifest names a missing file: " + entry.path);
        docs.push_back(read_ops_file(full, entry.path, entry.label));
    }
    return docs;
}

void save_vocabulary(const std::filesystem::path& path, const Vocabulary& vocab) {
    std::string out = "OPVOCAB 1 " + std::to_string(vocab.size()) + ' ' +
                      std::to_string(vocab.min_count()) + '\n';
    for (int i = 0; i < vocab.size(); ++i) {
        out += std::to_string(i);
        out += '\t';
        out += vocab.token_of(i);
        out += '\t';
        out += std::to_string(vocab.count_of(i));
        out += '\n';
    }
    write_text_file(path, out);
}

Vocabulary load_vocabulary(const std::filesystem::path& path) {
    const std::string text = read_text_file(path);
    TokenReader reader(text, path.string());
    reader.expect("OPVOCAB");
    reader.expect("1");
    const auto size = reader.next_int("vocab size");
    const auto min_count = reader.next_int("min_count");
    if (size < 1) throw MalformedInputError(path.string() + ": vocab size < 1");

    std::vector<std::pair<std::string, std::int64_t>> entries;
    std::int64_t unk_count = 0;
    for (std::int64_t i = 0; i < size; ++i) {
        const auto index = reader.next_int("index");
        if (index != i)
            throw MalformedInputError(path.string() + ": indices must run 0.." +
                                      std::to_string(size - 1));
        std::string token(reader.next("token"));
        const auto count = reader.next_int("count");
        if (i == size - 1) {
            if (token != kUnkToken)
                throw MalformedInputError(path.string() + ": last row must be " +
                                          std::string(kUnkToken));
            unk_count = count;
        } else {
            entries.emplace_back(std::move(token), count);
        }
    }
    if (!reader.at_end()) throw MalformedInputError(path.string() + ": trailing content");
    return Vocabulary(std::move(entries), unk_count, int(min_count));
}

void save_embeddings(const std::filesystem::path& path, const EmbeddingMatrix& matrix,
                     const Vocabulary& vocab) {
    if (matrix.size() != vocab.size())
        throw ShapeMismatchError("embedding rows vs vocabulary size");
    std::string out = "OPEMB 1 " + std::to_string(matrix.size()) + ' ' +
                      std::to_string(matrix.dim()) + ' ' + matrix.vocab_fingerprint + '\n';
    for (int i = 0; i < matrix.size(); ++i) {
        out += vocab.token_of(i);
        for (int j = 0; j < matrix.dim(); ++j) {
            out += ' ';
            out += format_double(matrix.input_vectors(i, j));
        }
        out += '\n';
    }
    write_text_file(path, out);
}

EmbeddingMatrix load_embeddings(const std::filesystem::path& path, const Vocabulary& vocab) {
    const std::string text = read_text_file(path);
    TokenReader reader(text, path.string());
    reader.expect("OPEMB");
    reader.expect("1");
    const auto size = reader.next_int("size");
    const auto dim = reader.next_int("dim");
    std::string fingerprint(reader.next("fingerprint"));
    if (size != vocab.size())
        throw MalformedInputError(path.string() + ": size does not match vocabulary");
    if (dim < 1) throw MalformedInputError(path.string() + ": dim < 1");
    if (fingerprint != vocab.fingerprint())
        throw ConfigError(path.string() + ": embeddings were built for a different vocabulary");

    EmbeddingMatrix matrix;
    matrix.vocab_fingerprint = std::move(fingerprint);
    matrix.input_vectors.resize(size, dim);
    matrix.output_vectors = RowMatrixXd::Zero(size, dim);
    for (std::int64_t i = 0; i < size; ++i) {
        const std::string_view token = reader.next("token");
        if (token != vocab.token_of(int(i)))
            throw MalformedInputError(path.string() + ": row " + std::to_string(i) +
                                      " token mismatch");
        for (std::int64_t j = 0; j < dim; ++j)
            matrix.input_vectors(i, j) = reader.next_double("embedding value");
    }
    if (!reader.at_end()) throw MalformedInputError(path.string() + ": trailing content");
    return matrix;
}

void save_model(const std::filesystem::path& path, const LstmStack& model,
                const std::string& vocab_fingerprint) {
    std::string out = "OPLSTM 1 " + std::to_string(model.hidden1()) + ' ' +
                      std::to_string(model.hidden2()) + ' ' +
                      std::to_string(model.num_classes) + ' ' +
                      std::to_string(model.embedding_dim()) + ' ' +
                      (model.ablate_second_layer ? "1" : "0") + ' ' + vocab_fingerprint + '\n';
    visit_tensors(const_cast<LstmStack&>(model), [&](const std::string& name, auto& tensor) {
        out += name;
        out += ' ';
        out += std::to_string(tensor.rows());
        out += ' ';
        out += std::to_string(tensor.cols());
        out += '\n';
        for (Eigen::Index r = 0; r < tensor.rows(); ++r) {
            for (Eigen::Index c = 0; c < tensor.cols(); ++c) {
                if (c) out += ' ';
                out += format_double(tensor(r, c));
            }
            out += '\n';
        }
    });
    write_text_file(path, out);
}

LoadedModel load_model(const std::filesystem::path& path) {
    const std::string text = read_text_file(path);
    TokenReader reader(text, path.string());
    reader.expect("OPLSTM");
    reader.expect("1");
    const int hidden1 = int(reader.next_int("hidden1"));
    const int hidden2 = int(reader.next_int("hidden2"));
    const int classes = int(reader.next_int("classes"));
    const int emb_dim = int(reader.next_int("embedding dim"));
    const auto ablate = reader.next_int("ablate flag");
    std::string fingerprint(reader.next("fingerprint"));
    if (hidden1 < 1 || classes < 1 || emb_dim < 1 || (ablate == 0 && hidden2 < 1))
        throw MalformedInputError(path.string() + ": bad header dimensions");

    LoadedModel loaded;
    loaded.vocab_fingerprint = std::move(fingerprint);
    LstmStack& model = loaded.model;
    model.ablate_second_layer = ablate != 0;
    model.num_classes = classes;
    model.layer1 = LstmLayerParams::zeros(emb_dim, hidden1);
    if (!model.ablate_second_layer) model.layer2 = LstmLayerParams::zeros(hidden1, hidden2);
    model.softmax_W = Eigen::MatrixXd::Zero(classes, model.pooled_dim());
    model.softmax_b = Eigen::VectorXd::Zero(classes);

    visit_tensors(model, [&](const std::string& name, auto& tensor) {
        const std::string_view found = reader.next("tensor name");
        if (found != name)
            throw MalformedInputError(path.string() + ": expected tensor '" + name +
                                      "', found '" + std::string(found) + "'");
        const auto rows = reader.next_int("rows");
        const auto cols = reader.next_int("cols");
        if (rows != tensor.rows() || cols != tensor.cols())
            throw MalformedInputError(path.string() + ": tensor '" + name + "' has shape " +
                                      std::to_string(rows) + "x" + std::to_string(cols));
        for (Eigen::Index r = 0; r < tensor.rows(); ++r)
            for (Eigen::Index c = 0; c < tensor.cols(); ++c)
                tensor(r, c) = reader.next_double("weight");
    });
    if (!reader.at_end()) throw MalformedInputError(path.string() + ": trailing content");
    return loaded;
}

void write_eval_report(const std::filesystem::path& path, const EvalReport& report) {
    std::string out = "CONFUSION\n";
    out += "classes";
    for (const auto& name : report.class_names) {
        out += '\t';
        out += name;
    }
    out += '\n';
    for (int r = 0; r < report.confusion.num_classes(); ++r) {
        out += report.class_names[std::size_t(r)];
        for (int c = 0; c < report.confusion.num_classes(); ++c) {
            out += '\t';
            out += std::to_string(report.confusion.counts(r, c));
        }
        out += '\n';
    }
    out += "METRICS\n";
    out += "tpr " + format_double(report.tpr) + '\n';
    out += "fpr " + format_double(report.fpr) + '\n';
    out += "acc " + format_double(report.accuracy) + '\n';
    out += report.auc_defined ? "auc " + format_double(report.auc) + '\n'
                              : std::string("auc undefined\n");
    if (report.task == TaskKind::Multiclass) {
        for (std::size_t c = 0; c < report.class_names.size(); ++c) {
            out += "auc_class " + report.class_names[c] + ' ';
            out += report.per_class_auc_defined[c] ? format_double(report.per_class_auc[c])
                                                   : std::string("undefined");
            out += '\n';
        }
    }
    auto roc_lines = [&out](const std::vector<RocPoint>& points) {
        for (const auto& p : points) {
            out += format_double(p.fpr);
            out += ' ';
            out += format_double(p.tpr);
            out += ' ';
            out += format_double(p.threshold);
            out += '\n';
        }
    };
    if (report.task == TaskKind::Binary) {
        out += "ROC\n";
        roc_lines(report.roc_points);
    } else {
        for (std::size_t c = 0; c < report.class_names.size(); ++c) {
            out += "ROC " + report.class_names[c] + '\n';
            roc_lines(report.per_class_roc[c]);
        }
    }
    write_text_file(path, out);
}

void write_experiment_report(const std::filesystem::path& path,
                             const ExperimentReport& report) {
    std::string out = "window\tembedding_model\tablate\ttask\tacc\tauc\n";
    for (const auto& row : report.rows) {
        out += std::to_string(row.window);
        out += '\t';
        out += to_string(row.model);
        out += '\t';
        out += row.ablate ? '1' : '0';
        out += '\t';
        out += to_string(row.task);
        out += '\t';
        out += format_double(row.accuracy);
        out += '\t';
        out += format_double(row.auc);
        out += '\n';
    }
    write_text_file(path, out);
}

ExperimentReport read_experiment_report(const std::filesystem::path& path) {
    const std::string text = read_text_file(path);
    const auto lines = split_lines(text);
    if (lines.empty() || lines[0] != "window\tembedding_model\tablate\ttask\tacc\tauc")
        throw MalformedInputError(path.string() + ": missing experiment header");
    ExperimentReport report;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        const auto fields = split_fields(lines[i], '\t');
        if (fields.size() != 6)
            throw MalformedInputError(path.string() + ": row needs 6 fields");
        TokenReader row(lines[i], path.string());
        ExperimentRow parsed;
        parsed.window = int(row.next_int("window"));
        parsed.model = embedding_model_from_string(std::string(row.next("model")));
        parsed.ablate = row.next_int("ablate") != 0;
        parsed.task = task_from_string(std::string(row.next("task")));
        parsed.accuracy = row.next_double("acc");
        parsed.auc = row.next_double("auc");
        report.rows.push_back(parsed);
    }
    return report;
}

std::string stats_table(const CorpusStats& stats) {
    std::string out = "mean opcodes per document\n";
    for (const auto& [label, mean] : stats.per_class_mean_length)
        out += "  " + label + "  " + format_double(mean) + '\n';
    out += "top opcodes (global)\n";
    int rank = 1;
    for (const auto& [token, count] : stats.top_k_global)
        out += "  " + std::to_string(rank++) + "  " + token + "  " + std::to_string(count) + '\n';
    for (const auto& [label, rows] : stats.top_k_per_class) {
        out += "top opcodes (" + label + ")\n";
        rank = 1;
        for (const auto& [token, count] : rows)
            out += "  " + std::to_string(rank++) + "  " + token + "  " + std::to_string(count) +
                   '\n';
    }
    return out;
}

std::string stats_records(const CorpusStats& stats) {
    std::string out;
    for (const auto& [token, count] : stats.top_k_global)
        out += "global\t" + token + '\t' + std::to_string(count) + '\n';
    for (const auto& [label, rows] : stats.top_k_per_class)
        for (const auto& [token, count] : rows)
            out += "class:" + label + '\t' + token + '\t' + std::to_string(count) + '\n';
    for (const auto& [label, mean] : stats.per_class_mean_length)
        out += "avglen:" + label + "\t-\t" + format_double(mean) + '\n';
    return out;
}

std::map<std::string, std::string> parse_config_text(const std::string& text) {
    std::map<std::string, std::string> config;
    for (std::string_view line : split_lines(text)) {
        const std::size_t hash = line.find('#');
        if (hash != std::string_view::npos) line = line.substr(0, hash);
        if (trim(line).empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError("config line without '=': " + std::string(line));
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError("config line with empty key");
        config[std::move(key)] = std::move(value);
    }
    return config;
}

std::map<std::string, std::string> read_config_file(const std::filesystem::path& path) {
    return parse_config_text(read_text_file(path));
}

} // namespace oplang
