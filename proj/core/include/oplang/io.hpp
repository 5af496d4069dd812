#ifndef OPLANG_IO_HPP
#define OPLANG_IO_HPP

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "oplang/asm_parser.hpp"
#include "oplang/document.hpp"
#include "oplang/embedding.hpp"
#include "oplang/evaluate.hpp"
#include "oplang/experiment.hpp"
#include "oplang/lstm.hpp"
#include "oplang/vocabulary.hpp"

// Text file formats. Everything is UTF-8 with LF line endings and decimal
// floats printed with %.17g, so write-then-read restores doubles exactly and
// repeated runs produce byte-identical artifacts. Readers throw
// MalformedInputError on structural problems and IoFailureError when a file
// cannot be opened.

namespace oplang {

std::string format_double(double value);

void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

// Opcode sequences: one function per line, "name\topcode opcode ...".
std::string ops_to_string(const OpcodeDocument& doc);
OpcodeDocument ops_from_string(const std::string& text, std::string doc_id, std::string label);
void write_ops_file(const std::filesystem::path& path, const OpcodeDocument& doc);
OpcodeDocument read_ops_file(const std::filesystem::path& path, std::string doc_id,
                             std::string label);

// Corpus manifest: "relative/path\tlabel" per line.
void write_manifest(const std::filesystem::path& path, const std::vector<ManifestEntry>& entries);
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);

// Reads every manifest entry as an ops file under root; doc_id is the
// manifest path.
std::vector<OpcodeDocument> read_ops_corpus(const std::filesystem::path& root,
                                            const std::vector<ManifestEntry>& entries);

// "OPVOCAB 1 <size> <min_count>" then "<index>\t<token>\t<count>", UNK last.
void save_vocabulary(const std::filesystem::path& path, const Vocabulary& vocab);
Vocabulary load_vocabulary(const std::filesystem::path& path);

// "OPEMB 1 <size> <dim> <fingerprint>" then one "<token> <v1> ... <vdim>"
// row per vocabulary index. Only input vectors are persisted. Loading
// checks the fingerprint against the given vocabulary.
void save_embeddings(const std::filesystem::path& path, const EmbeddingMatrix& matrix,
                     const Vocabulary& vocab);
EmbeddingMatrix load_embeddings(const std::filesystem::path& path, const Vocabulary& vocab);

// "OPLSTM 1 <hidden1> <hidden2> <classes> <emb_dim> <ablate> <fingerprint>"
// then one "<name> <rows> <cols>" block per tensor in traversal order with
// row-major values.
void save_model(const std::filesystem::path& path, const LstmStack& model,
                const std::string& vocab_fingerprint);

struct LoadedModel {
    LstmStack model;
    std::string vocab_fingerprint;
};

LoadedModel load_model(const std::filesystem::path& path);

// Sections CONFUSION (actual-by-predicted counts), METRICS (tpr, fpr, acc,
// auc), and ROC ("<fpr> <tpr> <threshold>" lines; per-class sweeps under
// "ROC <class>" for multiclass).
void write_eval_report(const std::filesystem::path& path, const EvalReport& report);

// Tab-separated with a header row: window, embedding_model, ablate, task,
// acc, auc.
void write_experiment_report(const std::filesystem::path& path, const ExperimentReport& report);
ExperimentReport read_experiment_report(const std::filesystem::path& path);

// Human-readable table plus a machine record file of
// "<scope>\t<opcode>\t<count>" lines; scopes are "global", "class:<label>",
// and "avglen:<label>" (opcode "-", count holding the mean).
std::string stats_table(const CorpusStats& stats);
std::string stats_records(const CorpusStats& stats);

// Flat "key = value" lines; '#' starts a comment; later keys win.
std::map<std::string, std::string> parse_config_text(const std::string& text);
std::map<std::string, std::string> read_config_file(const std::filesystem::path& path);

} // namespace oplang

#endif
