#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "sra/corpus.hpp"
#include "sra/errors.hpp"
#include "sra/retrieval.hpp"
#include "sra/util.hpp"

using namespace sra;

namespace {

using Docs = std::vector<std::pair<std::string, std::string>>;

// Independent TF-IDF oracle with its own tokenizer: materializes dense
// vectors and scores queries by brute-force cosine.
struct OracleIndex {
  std::vector<std::string> terms;
  std::map<std::string, std::map<std::string, double>> vectors;  // doc -> term -> weight

  static std::vector<std::string> toks(const std::string& s) {
    std::vector<std::string> words;
    std::string cur;
    for (char raw : s) {
      unsigned char c = static_cast<unsigned char>(raw);
      if (std::isalnum(c)) {
        cur += static_cast<char>(std::tolower(c));
      } else if (!cur.empty()) {
        words.push_back(cur);
        cur.clear();
      }
    }
    if (!cur.empty()) words.push_back(cur);
    std::vector<std::string> out = words;
    for (std::size_t i = 0; i + 1 < words.size(); ++i) {
      out.push_back(words[i] + " " + words[i + 1]);
    }
    return out;
  }

  std::map<std::string, double> idf;

  explicit OracleIndex(const Docs& docs, std::size_t min_df = 2, double max_df = 0.8) {
    std::map<std::string, std::size_t> df;
    std::vector<std::map<std::string, std::size_t>> counts;
    for (const auto& [id, text] : docs) {
      std::map<std::string, std::size_t> c;
      for (const auto& t : toks(text)) ++c[t];
      for (const auto& [t, n] : c) ++df[t];
      counts.push_back(std::move(c));
    }
    const double n_docs = static_cast<double>(docs.size());
    for (const auto& [t, d] : df) {
      if (d < min_df) continue;
      if (static_cast<double>(d) > max_df * n_docs) continue;
      terms.push_back(t);
      idf[t] = std::log((1.0 + n_docs) / (1.0 + static_cast<double>(d))) + 1.0;
    }
    for (std::size_t i = 0; i < docs.size(); ++i) {
      vectors[docs[i].first] = vectorize_counts(counts[i]);
    }
  }

  std::map<std::string, double> vectorize_counts(
      const std::map<std::string, std::size_t>& counts) const {
    std::map<std::string, double> v;
    double norm2 = 0.0;
    for (const auto& [t, n] : counts) {
      auto it = idf.find(t);
      if (it == idf.end()) continue;
      double w = (1.0 + std::log(static_cast<double>(n))) * it->second;
      v[t] = w;
      norm2 += w * w;
    }
    if (norm2 > 0) {
      for (auto& [t, w] : v) w /= std::sqrt(norm2);
    }
    return v;
  }

  std::map<std::string, double> vectorize(const std::string& text) const {
    std::map<std::string, std::size_t> counts;
    for (const auto& t : toks(text)) ++counts[t];
    return vectorize_counts(counts);
  }

  std::vector<std::pair<std::string, double>> rank(const std::string& query) const {
    auto q = vectorize(query);
    std::vector<std::pair<std::string, double>> out;
    for (const auto& [id, v] : vectors) {
      double dot = 0.0;
      for (const auto& [t, w] : q) {
        auto it = v.find(t);
        if (it != v.end()) dot += w * it->second;
      }
      if (dot > 0.0) out.emplace_back(id, dot);
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
      if (a.second != b.second) return a.second > b.second;
      return a.first < b.first;
    });
    return out;
  }
};

Docs random_docs(SplitMix64& rng, std::size_t n_docs, std::size_t vocab = 12) {
  static const char* words[] = {"alpha", "bravo", "charlie", "delta", "echo",
                                "foxtrot", "golf", "hotel", "india", "juliet",
                                "kilo", "lima", "mike", "november", "oscar"};
  Docs docs;
  for (std::size_t d = 0; d < n_docs; ++d) {
    std::size_t len = 3 + rng.below(8);
    std::string text;
    for (std::size_t i = 0; i < len; ++i) {
      if (!text.empty()) text += " ";
      text += words[rng.below(vocab)];
    }
    docs.emplace_back("doc" + std::to_string(d), text);
  }
  return docs;
}

}  // namespace

TEST_CASE("document-frequency pruning follows min_df and strict max_df") {
  // "a" appears in every doc (df/N = 1.0 > 0.8); the rest have df 1.
  CHECK_THROWS_WITH_AS(
      build_sparse_index({{"1", "a b"}, {"2", "a c"}, {"3", "a d"}}),
      doctest::Contains("degenerate vocabulary"), ValidationError);

  SparseIndex index = build_sparse_index({{"1", "x y"}, {"2", "x y"}, {"3", "z z z"}});
  CHECK(index.terms == std::vector<std::string>{"x", "x y", "y"});

  CHECK_THROWS_AS(build_sparse_index({}), ValidationError);
  CHECK_THROWS_AS(build_sparse_index({{"only", "one doc"}}), ValidationError);
  CHECK_THROWS_AS(build_sparse_index({{"1", "a"}, {"1", "a"}}), ValidationError);
}

TEST_CASE("term weights use sublinear tf and the pinned idf formula") {
  // df(q)=2, df(y)=3 of 4 docs (0.8*4=3.2 keeps y), df("q y")=2.
  Docs docs = {{"1", "q q q y"}, {"2", "q y"}, {"3", "y z"}, {"4", "z w"}};
  SparseIndex index = build_sparse_index(docs);
  OracleIndex oracle(docs);

  const auto& row = index.doc_vectors[0];
  REQUIRE(!row.empty());
  for (const auto& [col, w] : row) {
    const std::string& term = index.terms[static_cast<std::size_t>(col)];
    CHECK(w == doctest::Approx(oracle.vectors.at("1").at(term)).epsilon(1e-12));
  }

  // Without sublinear scaling the q weight grows with raw tf.
  SparseIndexParams linear;
  linear.sublinear_tf = false;
  SparseIndex raw = build_sparse_index(docs, linear);
  auto weight_of = [&](const SparseIndex& idx, const std::string& term) {
    int col = idx.vocab.at(term);
    for (const auto& [c, w] : idx.doc_vectors[0]) {
      if (c == col) return w;
    }
    return 0.0;
  };
  CHECK(weight_of(raw, "q") > weight_of(index, "q"));
}

TEST_CASE("sparse_candidates: identity, disjoint query, hand-checked order") {
  Docs docs = {{"1", "alpha bravo charlie"}, {"2", "alpha bravo delta"},
               {"3", "bravo charlie delta"}};
  SparseIndex index = build_sparse_index(docs);

  auto self = sparse_candidates(index, "alpha bravo charlie");
  REQUIRE(!self.empty());
  CHECK(self[0].first == "1");
  CHECK(self[0].second == doctest::Approx(1.0).epsilon(1e-9));

  CHECK(sparse_candidates(index, "zulu yankee").empty());

  OracleIndex oracle(docs);
  auto expected = oracle.rank("alpha delta");
  auto got = sparse_candidates(index, "alpha delta");
  REQUIRE(got.size() == expected.size());
  for (std::size_t i = 0; i < got.size(); ++i) {
    CHECK(got[i].first == expected[i].first);
    CHECK(got[i].second == doctest::Approx(expected[i].second).epsilon(1e-9));
  }
}

TEST_CASE("index archive round-trips to identical scoring") {
  Docs docs = {{"1", "alpha bravo charlie"}, {"2", "alpha bravo delta"},
               {"3", "bravo charlie delta"}};
  SparseIndex index = build_sparse_index(docs);
  auto dir = test::temp_dir("index_rt");
  save_sparse_index(index, dir / "index.json");
  SparseIndex loaded = load_sparse_index(dir / "index.json");

  auto a = sparse_candidates(index, "alpha charlie delta bravo");
  auto b = sparse_candidates(loaded, "alpha charlie delta bravo");
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].first == b[i].first);
    CHECK(a[i].second == b[i].second);  // bit-exact through the archive
  }
  CHECK_THROWS_AS(load_sparse_index(dir / "missing.json"), ParseError);
}

TEST_CASE("trigram fallback provider is deterministic and ranks related text higher") {
  TrigramProjectionProvider provider;
  auto a = provider.embed("x", "payment of fees");
  auto b = provider.embed("y", "payment of fees");
  CHECK(a == b);
  REQUIRE(a.size() == 256);
  double norm2 = 0.0;
  for (double v : a) norm2 += v * v;
  CHECK(norm2 == doctest::Approx(1.0).epsilon(1e-9));

  auto related = provider.embed("r", "payment of fees and costs");
  auto unrelated = provider.embed("u", "governing law of delaware");
  auto dot = [](const std::vector<double>& x, const std::vector<double>& y) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
    return s;
  };
  CHECK(dot(a, related) > dot(a, unrelated));
}

TEST_CASE("precomputed-file provider: dimension inference and errors") {
  auto dir = test::temp_dir("embfile");
  std::string body;
  body += nlohmann::json{{"id", "d1"}, {"vector", {1.0, 0.0, 0.0, 0.0}}}.dump() + "\n";
  body += nlohmann::json{{"id", "d2"}, {"vector", {0.0, 2.0, 0.0, 0.0}}}.dump() + "\n";
  test::write_file(dir / "emb.jsonl", body);

  PrecomputedFileProvider provider(dir / "emb.jsonl");
  CHECK(provider.dim() == 4);
  CHECK(provider.embed("d1", "ignored") == std::vector<double>{1.0, 0.0, 0.0, 0.0});
  // Rows are normalized at load.
  CHECK(provider.embed("d2", "")[1] == doctest::Approx(1.0));
  CHECK_THROWS_WITH_AS(provider.embed("d3", ""), doctest::Contains("missing"),
                       ValidationError);

  test::write_file(dir / "bad.jsonl",
                   body + nlohmann::json{{"id", "d3"}, {"vector", {1.0}}}.dump() + "\n");
  CHECK_THROWS_WITH_AS(PrecomputedFileProvider(dir / "bad.jsonl"),
                       doctest::Contains("dimension mismatch"), ValidationError);

  test::write_file(dir / "zero.jsonl",
                   nlohmann::json{{"id", "z"}, {"vector", {0.0, 0.0}}}.dump() + "\n");
  CHECK_THROWS_AS(PrecomputedFileProvider(dir / "zero.jsonl"), ValidationError);
}

TEST_CASE("rerank orders by dense cosine with id tie-break and truncates") {
  EmbeddingMatrix matrix;
  matrix.dim = 2;
  auto add = [&](const std::string& id, double x, double y) {
    matrix.row[id] = static_cast<int>(matrix.ids.size());
    matrix.ids.push_back(id);
    matrix.vectors.push_back({x, y});
  };
  add("a", 1.0, 0.0);
  add("b", 0.0, 1.0);

  std::vector<double> query = {1.0, 0.0};

  // Single candidate passes through.
  auto single = rerank({{"b", 0.9}}, query, matrix, 5);
  REQUIRE(single.size() == 1);
  CHECK(single[0].id == "b");

  // Dense order overrides the sparse order.
  auto two = rerank({{"b", 0.9}, {"a", 0.1}}, query, matrix, 5);
  REQUIRE(two.size() == 2);
  CHECK(two[0].id == "a");
  CHECK(two[0].dense_score == doctest::Approx(1.0));
  CHECK(two[0].sparse_score == doctest::Approx(0.1));

  // 20 candidates, top_m = 5 survive.
  std::vector<std::pair<std::string, double>> many;
  for (int i = 0; i < 20; ++i) {
    std::string id = "c" + std::to_string(i);
    add(id, 1.0, 0.0);
    many.emplace_back(id, 0.5);
  }
  CHECK(rerank(many, query, matrix, 5).size() == 5);
  // Equal dense scores break by ascending id.
  auto tied = rerank({{"c1", 0.5}, {"c0", 0.5}}, query, matrix, 5);
  CHECK(tied[0].id == "c0");

  CHECK_THROWS_AS(rerank({{"nope", 0.5}}, query, matrix, 5), ValidationError);
}

TEST_CASE("retrieve: self-exclusion, skip reason, stage subset") {
  std::string body;
  body += test::record_line("t1", "alpha bravo charlie", {"a"}, "train");
  body += test::record_line("t2", "alpha bravo delta", {"a"}, "train");
  body += test::record_line("t3", "zulu yankee xray whiskey", {"b"}, "train");
  body += test::record_line("t4", "zulu yankee victor", {"b"}, "train");
  body += test::record_line("v1", "alpha bravo", {"a"}, "validation");
  body += test::record_line("s1", "qqq www eee", {"b"}, "test");
  auto dir = test::temp_dir("retrieve");
  test::write_file(dir / "c.jsonl", body);
  Dataset dataset = load_dataset(dir / "c.jsonl", Task::SingleLabel);

  auto provider = std::make_shared<TrigramProjectionProvider>();
  Retriever retriever = Retriever::build(dataset, {}, provider, {});

  // A train doc never retrieves itself, even when it is the best match.
  RetrievalResult self = retriever.retrieve(dataset.samples[0]);
  CHECK_FALSE(self.skipped);
  for (const auto& c : self.candidates) CHECK(c.id != "t1");
  REQUIRE(self.picks.size() == 1);
  CHECK(self.picks[0] == "t2");

  // No lexical overlap -> skipped, not an error.
  RetrievalResult skip = retriever.retrieve(dataset.samples[5]);
  CHECK(skip.skipped);
  CHECK(skip.skip_reason == "no-candidates");
  CHECK(skip.picks.empty());

  // k = 1 picks the dense-top candidate; picks come from the candidate list.
  RetrievalResult val = retriever.retrieve(dataset.samples[4]);
  REQUIRE(val.picks.size() == 1);
  CHECK(val.picks[0] == val.candidates[0].id);
}

TEST_CASE("retrieval params are validated") {
  std::string body = test::toy_corpus();
  auto dir = test::temp_dir("retrieve_params");
  test::write_file(dir / "c.jsonl", body);
  Dataset dataset = load_dataset(dir / "c.jsonl", Task::SingleLabel);
  auto provider = std::make_shared<TrigramProjectionProvider>();
  RetrievalParams params;
  params.k = 0;
  CHECK_THROWS_AS(Retriever::build(dataset, {}, provider, params), ConfigError);
  params.k = 6;
  CHECK_THROWS_AS(Retriever::build(dataset, {}, provider, params), ConfigError);
}

TEST_CASE("random corpora: oracle scores, self-exclusion, provenance, determinism") {
  SplitMix64 rng(20240817);
  auto provider = std::make_shared<TrigramProjectionProvider>();
  int built = 0;
  for (int trial = 0; trial < 200; ++trial) {
    Docs docs = random_docs(rng, 4 + rng.below(7));
    SparseIndex index;
    try {
      index = build_sparse_index(docs);
    } catch (const ValidationError&) {
      continue;  // degenerate vocabulary; covered elsewhere
    }
    ++built;
    OracleIndex oracle(docs);

    std::vector<std::string> ids, texts;
    for (const auto& [id, text] : docs) {
      ids.push_back(id);
      texts.push_back(text);
    }
    EmbeddingMatrix matrix = embed(ids, texts, *provider);

    for (std::size_t q = 0; q < docs.size(); ++q) {
      const auto& [qid, qtext] = docs[q];

      auto got = sparse_candidates(index, qtext, 20);
      auto expected = oracle.rank(qtext);
      if (expected.size() > 20) expected.resize(20);
      REQUIRE(got.size() == expected.size());
      for (std::size_t i = 0; i < got.size(); ++i) {
        CHECK(got[i].first == expected[i].first);
        CHECK(got[i].second == doctest::Approx(expected[i].second).epsilon(1e-9));
      }

      RetrievalResult result = retrieve(qid, qtext, index, matrix, *provider, {});
      for (const auto& pick : result.picks) {
        CHECK(pick != qid);
        CHECK(index.doc_row.count(pick) == 1);  // train-only provenance
      }
      // Stage subset: picks within candidates within sparse-minus-self.
      LabelSet sparse_ids;
      for (const auto& [id, score] : got) {
        if (id != qid) sparse_ids.insert(id);
      }
      for (const auto& c : result.candidates) CHECK(sparse_ids.count(c.id) == 1);
      for (const auto& pick : result.picks) {
        bool in_candidates = false;
        for (const auto& c : result.candidates) in_candidates |= (c.id == pick);
        CHECK(in_candidates);
      }

      RetrievalResult again = retrieve(qid, qtext, index, matrix, *provider, {});
      CHECK(again.to_json().dump() == result.to_json().dump());
    }
  }
  CHECK(built > 100);
}
