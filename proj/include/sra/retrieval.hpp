#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "json.hpp"
#include "sra/corpus.hpp"

namespace sra {

struct SparseIndexParams {
  std::size_t min_df = 2;
  double max_df = 0.8;  // strict: terms with df/N > max_df are discarded
  bool sublinear_tf = true;
};

// TF-IDF index over the train split. Term weight is (1 + ln tf) * idf with
// idf = ln((1+N)/(1+df)) + 1; document vectors are L2-normalized.
struct SparseIndex {
  SparseIndexParams params;
  std::vector<std::string> terms;  // ascending; column order
  std::unordered_map<std::string, int> vocab;
  std::vector<double> idf;
  std::vector<std::string> doc_ids;  // insertion order
  std::unordered_map<std::string, int> doc_row;
  // Per-document (term column, weight), sorted by column, unit L2 norm.
  std::vector<std::vector<std::pair<int, double>>> doc_vectors;
  // Documents with no in-vocabulary terms (zero vectors).
  std::vector<std::string> zero_docs;
  // term column -> (doc row, weight)
  std::vector<std::vector<std::pair<int, double>>> postings;

  std::size_t num_docs() const { return doc_ids.size(); }
  // Query text -> normalized (column, weight) vector under this vocabulary.
  std::vector<std::pair<int, double>> vectorize(const std::string& text) const;
};

SparseIndex build_sparse_index(const std::vector<std::pair<std::string, std::string>>& docs,
                               const SparseIndexParams& params = {});

// Cosine scores of all documents with score > 0, descending, ties by
// ascending doc id, truncated to top_n.
std::vector<std::pair<std::string, double>> sparse_candidates(
    const SparseIndex& index, const std::string& query_text, std::size_t top_n = 20);

void save_sparse_index(const SparseIndex& index, const std::filesystem::path& path);
SparseIndex load_sparse_index(const std::filesystem::path& path);

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual std::string id() const = 0;
  virtual std::size_t dim() const = 0;
  // Unit-norm embedding of one document. The precomputed-file provider looks
  // up doc_id and ignores the text.
  virtual std::vector<double> embed(const std::string& doc_id,
                                    const std::string& text) const = 0;
};

struct TrigramProviderParams {
  std::size_t dim = 256;
  std::uint64_t seed = 42;
  std::size_t max_seq_tokens = 256;
};

// Deterministic fallback encoder: hashed character-trigram counts projected
// to a fixed dimension through a seeded random sign matrix, L2-normalized.
// Runs the full pipeline without any model download.
class TrigramProjectionProvider : public EmbeddingProvider {
 public:
  explicit TrigramProjectionProvider(TrigramProviderParams params = {});
  std::string id() const override;
  std::size_t dim() const override { return params_.dim; }
  std::vector<double> embed(const std::string& doc_id,
                            const std::string& text) const override;

 private:
  TrigramProviderParams params_;
};

// Line-delimited {"id":..., "vector":[...]} records; dimension inferred from
// the first line and enforced thereafter. Vectors are normalized at load.
class PrecomputedFileProvider : public EmbeddingProvider {
 public:
  explicit PrecomputedFileProvider(const std::filesystem::path& path);
  std::string id() const override;
  std::size_t dim() const override { return dim_; }
  std::vector<double> embed(const std::string& doc_id,
                            const std::string& text) const override;

 private:
  std::filesystem::path path_;
  std::size_t dim_ = 0;
  std::unordered_map<std::string, std::vector<double>> vectors_;
};

struct EmbeddingMatrix {
  std::size_t dim = 0;
  std::string provider_id;
  std::vector<std::string> ids;
  std::unordered_map<std::string, int> row;
  std::vector<std::vector<double>> vectors;

  const std::vector<double>& vector_of(const std::string& id) const;
};

EmbeddingMatrix embed(const std::vector<std::string>& ids,
                      const std::vector<std::string>& texts,
                      const EmbeddingProvider& provider);

struct RetrievalCandidate {
  std::string id;
  double sparse_score = 0.0;
  double dense_score = 0.0;
};

struct RetrievalResult {
  std::string query_id;
  std::vector<RetrievalCandidate> candidates;  // reranked, self excluded
  std::vector<std::string> picks;              // first k candidate ids
  bool skipped = false;
  std::string skip_reason;

  nlohmann::json to_json() const;
};

// Dense cosine rerank of sparse candidates; ties by ascending id; keeps top_m.
std::vector<RetrievalCandidate> rerank(
    const std::vector<std::pair<std::string, double>>& sparse_ranked,
    const std::vector<double>& query_vec, const EmbeddingMatrix& matrix,
    std::size_t top_m = 5);

struct RetrievalParams {
  std::size_t top_n = 20;  // sparse candidates
  std::size_t top_m = 5;   // retained after rerank
  std::size_t k = 1;       // final picks
};

RetrievalResult retrieve(const std::string& query_id, const std::string& query_text,
                         const SparseIndex& index, const EmbeddingMatrix& matrix,
                         const EmbeddingProvider& provider,
                         const RetrievalParams& params = {});

// Bundles the train-side state so callers can retrieve per sample.
class Retriever {
 public:
  static Retriever build(const Dataset& dataset, const SparseIndexParams& index_params,
                         std::shared_ptr<const EmbeddingProvider> provider,
                         const RetrievalParams& params);

  RetrievalResult retrieve(const Sample& sample) const;
  const std::string& text_of(const std::string& train_id) const;
  const SparseIndex& index() const { return index_; }
  const EmbeddingMatrix& matrix() const { return matrix_; }
  const RetrievalParams& params() const { return params_; }

 private:
  SparseIndex index_;
  EmbeddingMatrix matrix_;
  std::shared_ptr<const EmbeddingProvider> provider_;
  RetrievalParams params_;
  std::unordered_map<std::string, std::string> train_texts_;
};

}  // namespace sra
