#include "sra/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include "sra/errors.hpp"
#include "sra/util.hpp"

namespace sra {

namespace {

std::map<std::string, std::size_t> term_counts(const std::string& text) {
  std::map<std::string, std::size_t> counts;
  for (const auto& term : text::unigrams_and_bigrams(text)) ++counts[term];
  return counts;
}

double tf_weight(std::size_t tf, bool sublinear) {
  return sublinear ? 1.0 + std::log(static_cast<double>(tf))
                   : static_cast<double>(tf);
}

void l2_normalize(std::vector<std::pair<int, double>>& v) {
  double norm2 = 0.0;
  for (const auto& [idx, w] : v) norm2 += w * w;
  if (norm2 <= 0.0) return;
  const double inv = 1.0 / std::sqrt(norm2);
  for (auto& [idx, w] : v) w *= inv;
}

}  // namespace

SparseIndex build_sparse_index(
    const std::vector<std::pair<std::string, std::string>>& docs,
    const SparseIndexParams& params) {
  if (docs.empty()) throw ValidationError("build_sparse_index: empty corpus");
  if (docs.size() < params.min_df) {
    throw ValidationError("build_sparse_index: need at least " +
                          std::to_string(params.min_df) + " documents, got " +
                          std::to_string(docs.size()));
  }

  const std::size_t n_docs = docs.size();
  std::vector<std::map<std::string, std::size_t>> doc_terms;
  doc_terms.reserve(n_docs);
  std::map<std::string, std::size_t> df;
  for (const auto& [id, text] : docs) {
    doc_terms.push_back(term_counts(text));
    for (const auto& [term, tf] : doc_terms.back()) ++df[term];
  }

  SparseIndex index;
  index.params = params;
  const double max_docs = params.max_df * static_cast<double>(n_docs);
  for (const auto& [term, count] : df) {
    if (count < params.min_df) continue;
    if (static_cast<double>(count) > max_docs) continue;  // strictly more than max_df
    index.vocab.emplace(term, static_cast<int>(index.terms.size()));
    index.terms.push_back(term);
    index.idf.push_back(std::log((1.0 + static_cast<double>(n_docs)) /
                                 (1.0 + static_cast<double>(count))) +
                        1.0);
  }
  if (index.terms.empty()) {
    throw ValidationError("build_sparse_index: degenerate vocabulary (all terms pruned by min_df/max_df)");
  }

  index.postings.resize(index.terms.size());
  for (std::size_t row = 0; row < n_docs; ++row) {
    const auto& [id, text] = docs[row];
    if (index.doc_row.count(id)) {
      throw ValidationError("build_sparse_index: duplicate doc id '" + id + "'");
    }
    std::vector<std::pair<int, double>> vec;
    for (const auto& [term, tf] : doc_terms[row]) {
      auto it = index.vocab.find(term);
      if (it == index.vocab.end()) continue;
      vec.emplace_back(it->second, tf_weight(tf, params.sublinear_tf) * index.idf[it->second]);
    }
    std::sort(vec.begin(), vec.end());
    l2_normalize(vec);
    if (vec.empty()) index.zero_docs.push_back(id);
    for (const auto& [col, w] : vec) {
      index.postings[col].emplace_back(static_cast<int>(row), w);
    }
    index.doc_row.emplace(id, static_cast<int>(row));
    index.doc_ids.push_back(id);
    index.doc_vectors.push_back(std::move(vec));
  }
  return index;
}

std::vector<std::pair<int, double>> SparseIndex::vectorize(const std::string& text) const {
  std::vector<std::pair<int, double>> vec;
  for (const auto& [term, tf] : term_counts(text)) {
    auto it = vocab.find(term);
    if (it == vocab.end()) continue;
    vec.emplace_back(it->second, tf_weight(tf, params.sublinear_tf) * idf[it->second]);
  }
  std::sort(vec.begin(), vec.end());
  l2_normalize(vec);
  return vec;
}

std::vector<std::pair<std::string, double>> sparse_candidates(
    const SparseIndex& index, const std::string& query_text, std::size_t top_n) {
  const auto query = index.vectorize(query_text);
  std::vector<double> scores(index.num_docs(), 0.0);
  std::vector<int> touched;
  for (const auto& [col, qw] : query) {
    for (const auto& [row, dw] : index.postings[col]) {
      if (scores[row] == 0.0) touched.push_back(row);
      scores[row] += qw * dw;
    }
  }
  std::vector<std::pair<std::string, double>> out;
  out.reserve(touched.size());
  for (int row : touched) {
    if (scores[row] > 0.0) out.emplace_back(index.doc_ids[row], scores[row]);
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if (out.size() > top_n) out.resize(top_n);
  return out;
}

void save_sparse_index(const SparseIndex& index, const std::filesystem::path& path) {
  nlohmann::json j;
  j["format"] = "sra.sparse_index/1";
  j["params"] = {{"min_df", index.params.min_df},
                 {"max_df", index.params.max_df},
                 {"sublinear_tf", index.params.sublinear_tf}};
  j["terms"] = index.terms;
  j["idf"] = index.idf;
  nlohmann::json docs = nlohmann::json::array();
  for (std::size_t row = 0; row < index.num_docs(); ++row) {
    nlohmann::json d;
    d["id"] = index.doc_ids[row];
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& [col, w] : index.doc_vectors[row]) {
      entries.push_back({col, w});
    }
    d["v"] = std::move(entries);
    docs.push_back(std::move(d));
  }
  j["docs"] = std::move(docs);
  j["zero_docs"] = index.zero_docs;
  std::ofstream out(path);
  if (!out) throw Error("cannot open for writing: " + path.string());
  out << j.dump() << "\n";
}

SparseIndex load_sparse_index(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open index file: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("invalid index file: ") + e.what());
  }
  if (j.value("format", "") != "sra.sparse_index/1") {
    throw ParseError("unsupported index format tag: " + j.value("format", "<missing>"));
  }
  SparseIndex index;
  index.params.min_df = j["params"]["min_df"].get<std::size_t>();
  index.params.max_df = j["params"]["max_df"].get<double>();
  index.params.sublinear_tf = j["params"]["sublinear_tf"].get<bool>();
  index.terms = j["terms"].get<std::vector<std::string>>();
  index.idf = j["idf"].get<std::vector<double>>();
  for (std::size_t i = 0; i < index.terms.size(); ++i) {
    index.vocab.emplace(index.terms[i], static_cast<int>(i));
  }
  index.postings.resize(index.terms.size());
  for (const auto& d : j["docs"]) {
    int row = static_cast<int>(index.doc_ids.size());
    std::vector<std::pair<int, double>> vec;
    for (const auto& e : d["v"]) {
      vec.emplace_back(e[0].get<int>(), e[1].get<double>());
    }
    for (const auto& [col, w] : vec) index.postings[col].emplace_back(row, w);
    index.doc_row.emplace(d["id"].get<std::string>(), row);
    index.doc_ids.push_back(d["id"].get<std::string>());
    index.doc_vectors.push_back(std::move(vec));
  }
  index.zero_docs = j["zero_docs"].get<std::vector<std::string>>();
  return index;
}

TrigramProjectionProvider::TrigramProjectionProvider(TrigramProviderParams params)
    : params_(params) {
  if (params_.dim == 0) throw ConfigError("trigram provider: dim must be >= 1");
}

std::string TrigramProjectionProvider::id() const {
  return "trigram-projection/1:dim=" + std::to_string(params_.dim) +
         ":seed=" + std::to_string(params_.seed) +
         ":max_tokens=" + std::to_string(params_.max_seq_tokens);
}

std::vector<double> TrigramProjectionProvider::embed(const std::string& /*doc_id*/,
                                                     const std::string& text) const {
  // Lowercase, collapse whitespace, cap the token count (the provider's
  // maximum sequence length), then hash sliding character trigrams.
  auto tokens = text::whitespace_tokens(text);
  if (tokens.size() > params_.max_seq_tokens) tokens.resize(params_.max_seq_tokens);
  std::string norm;
  for (const auto& t : tokens) {
    if (!norm.empty()) norm += ' ';
    for (unsigned char c : t) norm += static_cast<char>(std::tolower(c));
  }

  std::map<std::uint64_t, std::size_t> grams;  // ordered: deterministic fp sums
  if (norm.size() < 3) {
    if (!norm.empty()) ++grams[fnv1a64(norm)];
  } else {
    for (std::size_t i = 0; i + 3 <= norm.size(); ++i) {
      ++grams[fnv1a64_bytes(norm.data() + i, 3)];
    }
  }

  std::vector<double> v(params_.dim, 0.0);
  for (const auto& [hash, count] : grams) {
    SplitMix64 signs(mix64(hash, params_.seed));
    const auto c = static_cast<double>(count);
    for (std::size_t d = 0; d < params_.dim; ++d) {
      v[d] += (signs.next() >> 63) ? c : -c;
    }
  }
  double norm2 = 0.0;
  for (double x : v) norm2 += x * x;
  if (norm2 > 0.0) {
    const double inv = 1.0 / std::sqrt(norm2);
    for (double& x : v) x *= inv;
  }
  return v;
}

PrecomputedFileProvider::PrecomputedFileProvider(const std::filesystem::path& path)
    : path_(path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open embeddings file: " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    nlohmann::json record;
    try {
      record = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError("line " + std::to_string(line_no) +
                       ": invalid embeddings record: " + e.what());
    }
    std::string id = record.at("id").get<std::string>();
    std::vector<double> vec = record.at("vector").get<std::vector<double>>();
    if (dim_ == 0) dim_ = vec.size();
    if (vec.size() != dim_ || dim_ == 0) {
      throw ValidationError("line " + std::to_string(line_no) +
                            ": dimension mismatch (got " + std::to_string(vec.size()) +
                            ", expected " + std::to_string(dim_) + ")");
    }
    double norm2 = 0.0;
    for (double x : vec) norm2 += x * x;
    if (norm2 <= 0.0) {
      throw ValidationError("line " + std::to_string(line_no) +
                            ": zero vector cannot be normalized (id '" + id + "')");
    }
    const double inv = 1.0 / std::sqrt(norm2);
    for (double& x : vec) x *= inv;
    if (!vectors_.emplace(std::move(id), std::move(vec)).second) {
      throw ValidationError("line " + std::to_string(line_no) + ": duplicate id");
    }
  }
  if (vectors_.empty()) throw ValidationError("embeddings file is empty: " + path.string());
}

std::string PrecomputedFileProvider::id() const {
  return "precomputed-file/1:dim=" + std::to_string(dim_) +
         ":path=" + path_.filename().string();
}

std::vector<double> PrecomputedFileProvider::embed(const std::string& doc_id,
                                                   const std::string& /*text*/) const {
  auto it = vectors_.find(doc_id);
  if (it == vectors_.end()) {
    throw ValidationError("id '" + doc_id + "' missing from embeddings file " +
                          path_.string());
  }
  return it->second;
}

const std::vector<double>& EmbeddingMatrix::vector_of(const std::string& id) const {
  auto it = row.find(id);
  if (it == row.end()) {
    throw ValidationError("id '" + id + "' absent from embedding matrix");
  }
  return vectors[it->second];
}

EmbeddingMatrix embed(const std::vector<std::string>& ids,
                      const std::vector<std::string>& texts,
                      const EmbeddingProvider& provider) {
  if (ids.size() != texts.size()) {
    throw ValidationError("embed: ids/texts length mismatch");
  }
  EmbeddingMatrix matrix;
  matrix.dim = provider.dim();
  matrix.provider_id = provider.id();
  for (std::size_t i = 0; i < ids.size(); ++i) {
    std::vector<double> v = provider.embed(ids[i], texts[i]);
    if (v.size() != matrix.dim) {
      throw ValidationError("embed: provider returned dimension " +
                            std::to_string(v.size()) + ", expected " +
                            std::to_string(matrix.dim));
    }
    if (!matrix.row.emplace(ids[i], static_cast<int>(matrix.ids.size())).second) {
      throw ValidationError("embed: duplicate id '" + ids[i] + "'");
    }
    matrix.ids.push_back(ids[i]);
    matrix.vectors.push_back(std::move(v));
  }
  return matrix;
}

std::vector<RetrievalCandidate> rerank(
    const std::vector<std::pair<std::string, double>>& sparse_ranked,
    const std::vector<double>& query_vec, const EmbeddingMatrix& matrix,
    std::size_t top_m) {
  std::vector<RetrievalCandidate> out;
  out.reserve(sparse_ranked.size());
  for (const auto& [id, sparse_score] : sparse_ranked) {
    const auto& doc_vec = matrix.vector_of(id);
    if (doc_vec.size() != query_vec.size()) {
      throw ValidationError("rerank: query/document dimension mismatch");
    }
    double dot = 0.0;
    for (std::size_t d = 0; d < doc_vec.size(); ++d) dot += query_vec[d] * doc_vec[d];
    out.push_back({id, sparse_score, dot});
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.dense_score != b.dense_score) return a.dense_score > b.dense_score;
    return a.id < b.id;
  });
  if (out.size() > top_m) out.resize(top_m);
  return out;
}

nlohmann::json RetrievalResult::to_json() const {
  nlohmann::json j;
  j["query_id"] = query_id;
  nlohmann::json cands = nlohmann::json::array();
  for (const auto& c : candidates) {
    cands.push_back({{"id", c.id}, {"sparse", c.sparse_score}, {"dense", c.dense_score}});
  }
  j["candidates"] = std::move(cands);
  j["picks"] = picks;
  j["skipped"] = skipped;
  if (skipped) j["skip_reason"] = skip_reason;
  return j;
}

RetrievalResult retrieve(const std::string& query_id, const std::string& query_text,
                         const SparseIndex& index, const EmbeddingMatrix& matrix,
                         const EmbeddingProvider& provider,
                         const RetrievalParams& params) {
  RetrievalResult result;
  result.query_id = query_id;

  auto sparse = sparse_candidates(index, query_text, params.top_n);
  std::erase_if(sparse, [&](const auto& c) { return c.first == query_id; });
  if (sparse.empty()) {
    result.skipped = true;
    result.skip_reason = "no-candidates";
    return result;
  }
  const auto query_vec = provider.embed(query_id, query_text);
  result.candidates = rerank(sparse, query_vec, matrix, params.top_m);
  const std::size_t k = std::min(params.k, result.candidates.size());
  for (std::size_t i = 0; i < k; ++i) result.picks.push_back(result.candidates[i].id);
  return result;
}

Retriever Retriever::build(const Dataset& dataset, const SparseIndexParams& index_params,
                           std::shared_ptr<const EmbeddingProvider> provider,
                           const RetrievalParams& params) {
  if (params.k < 1 || params.k > 5) {
    throw ConfigError("retrieval k must be in [1, 5], got " + std::to_string(params.k));
  }
  Retriever r;
  std::vector<std::pair<std::string, std::string>> docs;
  std::vector<std::string> ids;
  std::vector<std::string> texts;
  for (const Sample* s : dataset.split_samples(Split::Train)) {
    docs.emplace_back(s->id, s->text);
    ids.push_back(s->id);
    texts.push_back(s->text);
    r.train_texts_.emplace(s->id, s->text);
  }
  r.index_ = build_sparse_index(docs, index_params);
  r.matrix_ = embed(ids, texts, *provider);
  r.provider_ = std::move(provider);
  r.params_ = params;
  return r;
}

RetrievalResult Retriever::retrieve(const Sample& sample) const {
  return sra::retrieve(sample.id, sample.text, index_, matrix_, *provider_, params_);
}

const std::string& Retriever::text_of(const std::string& train_id) const {
  auto it = train_texts_.find(train_id);
  if (it == train_texts_.end()) {
    throw ValidationError("id '" + train_id + "' is not a train document");
  }
  return it->second;
}

}  // namespace sra
