#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "discourse/common.hpp"
#include "discourse/corpus.hpp"
#include "discourse/csv.hpp"
#include "discourse/rng.hpp"
#include "discourse/text.hpp"

namespace discourse {

struct Vocabulary {
  std::vector<std::string> terms;           // sorted lexicographically
  std::map<std::string, int> index;         // term -> column id
  std::vector<int> doc_freq;                // per-term document frequency

  int size() const { return static_cast<int>(terms.size()); }
};

struct CountMatrix {
  std::vector<std::string> doc_ids;
  Vocabulary vocab;
  // Per-document sparse rows, sorted by term id.
  std::vector<std::vector<std::pair<int, int>>> rows;

  size_t docs() const { return rows.size(); }
};

struct CountMatrixConfig {
  TokenizeConfig tokenizer;
  int min_doc_freq = 2;
  int max_vocab = 0;  // 0 = unlimited
};

// Builds the bag-of-words matrix over a corpus. Terms below the document
// frequency threshold are dropped; the vocabulary is sorted.
inline CountMatrix build_count_matrix(const std::vector<EpisodeRecord>& records,
                                      const CountMatrixConfig& cfg = {}) {
  std::vector<std::map<std::string, int>> doc_counts;
  doc_counts.reserve(records.size());
  std::map<std::string, int> df;
  bool any_token = false;
  for (const auto& rec : records) {
    std::map<std::string, int> counts;
    for (const auto& tok : tokenize(rec.transcript, cfg.tokenizer))
      ++counts[tok];
    for (const auto& [term, c] : counts) ++df[term];
    if (!counts.empty()) any_token = true;
    doc_counts.push_back(std::move(counts));
  }
  if (!any_token)
    throw Error("build_count_matrix: corpus has no tokens after tokenization");

  std::vector<std::string> terms;
  for (const auto& [term, d] : df)
    if (d >= cfg.min_doc_freq) terms.push_back(term);
  if (cfg.max_vocab > 0 && static_cast<int>(terms.size()) > cfg.max_vocab) {
    // Keep the most frequent terms (by document frequency, then term).
    std::sort(terms.begin(), terms.end(),
              [&](const std::string& a, const std::string& b) {
                if (df[a] != df[b]) return df[a] > df[b];
                return a < b;
              });
    terms.resize(cfg.max_vocab);
    std::sort(terms.begin(), terms.end());
  }
  if (terms.empty())
    throw Error("build_count_matrix: vocabulary is empty after frequency filtering");

  CountMatrix m;
  m.vocab.terms = terms;
  for (int i = 0; i < static_cast<int>(terms.size()); ++i) {
    m.vocab.index[terms[i]] = i;
    m.vocab.doc_freq.push_back(df[terms[i]]);
  }
  for (size_t d = 0; d < records.size(); ++d) {
    std::vector<std::pair<int, int>> row;
    for (const auto& [term, c] : doc_counts[d]) {
      auto it = m.vocab.index.find(term);
      if (it != m.vocab.index.end()) row.emplace_back(it->second, c);
    }
    std::sort(row.begin(), row.end());
    m.doc_ids.push_back(records[d].episode_id);
    m.rows.push_back(std::move(row));
  }
  return m;
}

struct TopicModel {
  int k = 0;
  double hyper_alpha = 0;
  double hyper_beta = 0;
  uint64_t seed = 0;
  int sweeps = 0;
  std::vector<std::string> vocabulary;
  std::vector<std::string> doc_ids;          // docs with >= 1 token
  std::vector<std::vector<double>> phi;      // k x V, rows sum to 1
  std::vector<std::vector<double>> theta;    // D x k, rows sum to 1
  size_t empty_docs_skipped = 0;
};

// Fits LDA by collapsed Gibbs sampling. Deterministic for fixed inputs and
// seed. Documents with no tokens are skipped (with a count), not an error.
inline TopicModel fit_lda(const CountMatrix& counts, int k, double hyper_alpha,
                          double hyper_beta, int sweeps, uint64_t seed) {
  if (k < 1) throw Error("fit_lda: k must be >= 1");
  if (sweeps < 1) throw Error("fit_lda: sweeps must be >= 1");
  const int V = counts.vocab.size();
  if (V == 0 || counts.docs() == 0) throw Error("fit_lda: empty count matrix");
  if (k > V)
    throw Error("fit_lda: k = " + std::to_string(k) +
                " exceeds the number of distinct terms (" + std::to_string(V) +
                ")");

  // Expand sparse rows into per-document token streams (term ids).
  std::vector<std::vector<int>> docs;
  std::vector<std::string> doc_ids;
  size_t skipped = 0;
  for (size_t d = 0; d < counts.docs(); ++d) {
    std::vector<int> tokens;
    for (const auto& [term, c] : counts.rows[d])
      for (int i = 0; i < c; ++i) tokens.push_back(term);
    if (tokens.empty()) {
      ++skipped;
      continue;
    }
    docs.push_back(std::move(tokens));
    doc_ids.push_back(counts.doc_ids[d]);
  }
  if (docs.empty()) throw Error("fit_lda: all documents are empty");

  const size_t D = docs.size();
  std::vector<std::vector<int>> z(D);
  std::vector<std::vector<int>> n_dk(D, std::vector<int>(k, 0));
  std::vector<std::vector<int>> n_kw(k, std::vector<int>(V, 0));
  std::vector<int> n_k(k, 0);

  Rng rng(seed);
  for (size_t d = 0; d < D; ++d) {
    z[d].resize(docs[d].size());
    for (size_t i = 0; i < docs[d].size(); ++i) {
      const int t = static_cast<int>(rng.uniform_index(k));
      z[d][i] = t;
      ++n_dk[d][t];
      ++n_kw[t][docs[d][i]];
      ++n_k[t];
    }
  }

  const double v_beta = V * hyper_beta;
  std::vector<double> cumulative(k);
  for (int sweep = 0; sweep < sweeps; ++sweep) {
    for (size_t d = 0; d < D; ++d) {
      for (size_t i = 0; i < docs[d].size(); ++i) {
        const int w = docs[d][i];
        const int old_t = z[d][i];
        --n_dk[d][old_t];
        --n_kw[old_t][w];
        --n_k[old_t];

        double total = 0;
        for (int t = 0; t < k; ++t) {
          total += (n_dk[d][t] + hyper_alpha) * (n_kw[t][w] + hyper_beta) /
                   (n_k[t] + v_beta);
          cumulative[t] = total;
        }
        const double u = rng.uniform_real() * total;
        int new_t = 0;
        while (new_t < k - 1 && cumulative[new_t] <= u) ++new_t;

        z[d][i] = new_t;
        ++n_dk[d][new_t];
        ++n_kw[new_t][w];
        ++n_k[new_t];
      }
    }
  }

  TopicModel model;
  model.k = k;
  model.hyper_alpha = hyper_alpha;
  model.hyper_beta = hyper_beta;
  model.seed = seed;
  model.sweeps = sweeps;
  model.vocabulary = counts.vocab.terms;
  model.doc_ids = std::move(doc_ids);
  model.empty_docs_skipped = skipped;

  model.phi.assign(k, std::vector<double>(V, 0));
  for (int t = 0; t < k; ++t)
    for (int w = 0; w < V; ++w)
      model.phi[t][w] = (n_kw[t][w] + hyper_beta) / (n_k[t] + v_beta);

  model.theta.assign(D, std::vector<double>(k, 0));
  for (size_t d = 0; d < D; ++d) {
    const double n_d = static_cast<double>(docs[d].size());
    for (int t = 0; t < k; ++t)
      model.theta[d][t] = (n_dk[d][t] + hyper_alpha) / (n_d + k * hyper_alpha);
  }
  return model;
}

// Document-topic proportions for unseen documents under a fixed phi
// (fold-in Gibbs). Used for held-out evaluation.
inline std::vector<double> infer_theta(const TopicModel& model,
                                       const std::vector<int>& tokens,
                                       int sweeps, uint64_t seed) {
  const int k = model.k;
  if (tokens.empty())
    return std::vector<double>(k, 1.0 / k);
  std::vector<int> z(tokens.size());
  std::vector<int> n_dk(k, 0);
  Rng rng(seed);
  for (size_t i = 0; i < tokens.size(); ++i) {
    z[i] = static_cast<int>(rng.uniform_index(k));
    ++n_dk[z[i]];
  }
  std::vector<double> cumulative(k);
  for (int sweep = 0; sweep < sweeps; ++sweep) {
    for (size_t i = 0; i < tokens.size(); ++i) {
      const int w = tokens[i];
      --n_dk[z[i]];
      double total = 0;
      for (int t = 0; t < k; ++t) {
        total += (n_dk[t] + model.hyper_alpha) * model.phi[t][w];
        cumulative[t] = total;
      }
      const double u = rng.uniform_real() * total;
      int new_t = 0;
      while (new_t < k - 1 && cumulative[new_t] <= u) ++new_t;
      z[i] = new_t;
      ++n_dk[new_t];
    }
  }
  std::vector<double> theta(k);
  const double n_d = static_cast<double>(tokens.size());
  for (int t = 0; t < k; ++t)
    theta[t] = (n_dk[t] + model.hyper_alpha) / (n_d + k * model.hyper_alpha);
  return theta;
}

// Top-n terms of a topic by descending weight; ties break lexicographically.
inline std::vector<std::string> top_words(const TopicModel& model,
                                          int topic_id, int n) {
  if (topic_id < 0 || topic_id >= model.k)
    throw Error("top_words: topic_id " + std::to_string(topic_id) +
                " out of range [0," + std::to_string(model.k) + ")");
  if (n < 1) throw Error("top_words: n must be >= 1");
  const auto& row = model.phi[topic_id];
  const int V = static_cast<int>(row.size());
  std::vector<int> order(V);
  for (int i = 0; i < V; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (row[a] != row[b]) return row[a] > row[b];
    return model.vocabulary[a] < model.vocabulary[b];
  });
  const int take = std::min(n, V);
  std::vector<std::string> out;
  out.reserve(take);
  for (int i = 0; i < take; ++i) out.push_back(model.vocabulary[order[i]]);
  return out;
}

struct CoherenceResult {
  std::vector<double> per_topic;
  double mean = 0;
};

// UMass coherence over the top-n words of each topic:
//   sum over pairs (i > j) of log((D(w_i, w_j) + 1) / D(w_j)),
// where D counts documents in the given corpus.
inline CoherenceResult coherence(const TopicModel& model,
                                 const CountMatrix& counts, int n) {
  if (n < 2) throw Error("coherence: n must be >= 2");
  // Document sets per term (sorted doc indices).
  std::map<std::string, std::vector<int>> doc_sets;
  for (size_t d = 0; d < counts.docs(); ++d)
    for (const auto& [term, c] : counts.rows[d])
      doc_sets[counts.vocab.terms[term]].push_back(static_cast<int>(d));

  auto doc_set = [&](const std::string& w) -> const std::vector<int>& {
    auto it = doc_sets.find(w);
    if (it == doc_sets.end())
      throw Error("coherence: top word '" + w + "' absent from the corpus");
    return it->second;
  };
  auto co_count = [](const std::vector<int>& a, const std::vector<int>& b) {
    size_t i = 0, j = 0, c = 0;
    while (i < a.size() && j < b.size()) {
      if (a[i] == b[j]) { ++c; ++i; ++j; }
      else if (a[i] < b[j]) ++i;
      else ++j;
    }
    return static_cast<double>(c);
  };

  CoherenceResult result;
  for (int t = 0; t < model.k; ++t) {
    const auto words = top_words(model, t, n);
    double score = 0;
    for (size_t i = 1; i < words.size(); ++i) {
      for (size_t j = 0; j < i; ++j) {
        const auto& di = doc_set(words[i]);
        const auto& dj = doc_set(words[j]);
        score += std::log((co_count(di, dj) + 1.0) /
                          static_cast<double>(dj.size()));
      }
    }
    result.per_topic.push_back(score);
    result.mean += score;
  }
  result.mean /= static_cast<double>(model.k);
  return result;
}

struct ExternalTopicFeatures {
  std::vector<std::string> episode_ids;
  std::vector<std::string> names;               // prefixed "ext:"
  std::vector<std::vector<double>> columns;     // per name, one value per id
};

// Imports an externally produced topic-document matrix
// (CSV: episode_id,<topic>...; values in [0,1]).
inline ExternalTopicFeatures import_external_topic_matrix(const CsvTable& table) {
  if (table.header.empty() || table.header[0] != "episode_id")
    throw Error("external topics: first CSV column must be 'episode_id'");
  ExternalTopicFeatures out;
  for (size_t c = 1; c < table.header.size(); ++c) {
    out.names.push_back("ext:" + table.header[c]);
    out.columns.emplace_back();
  }
  std::set<std::string> seen;
  for (size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    if (row.size() != table.header.size())
      throw Error("external topics: row " + std::to_string(r + 2) +
                  " has wrong cell count");
    if (!seen.insert(row[0]).second)
      throw Error("external topics: duplicate episode_id '" + row[0] + "'");
    out.episode_ids.push_back(row[0]);
    for (size_t c = 1; c < row.size(); ++c) {
      size_t pos = 0;
      double value = 0;
      try {
        value = std::stod(row[c], &pos);
      } catch (const std::exception&) {
        pos = 0;
      }
      if (pos != row[c].size() || row[c].empty())
        throw Error("external topics: non-numeric cell at row " +
                    std::to_string(r + 2) + ", column '" + table.header[c] +
                    "'");
      if (value < 0.0 || value > 1.0)
        throw Error("external topics: value " + fmt_double(value) +
                    " outside [0,1] at row " + std::to_string(r + 2) +
                    ", column '" + table.header[c] + "'");
      out.columns[c - 1].push_back(value);
    }
  }
  return out;
}

inline nlohmann::json topic_model_to_json(const TopicModel& m) {
  nlohmann::json j;
  j["k"] = m.k;
  j["hyper_alpha"] = m.hyper_alpha;
  j["hyper_beta"] = m.hyper_beta;
  j["seed"] = m.seed;
  j["sweeps"] = m.sweeps;
  j["vocabulary"] = m.vocabulary;
  j["doc_ids"] = m.doc_ids;
  j["empty_docs_skipped"] = m.empty_docs_skipped;
  nlohmann::json phi = nlohmann::json::array();
  for (const auto& row : m.phi)
    for (double v : row) phi.push_back(v);
  j["phi"] = std::move(phi);
  nlohmann::json theta = nlohmann::json::array();
  for (const auto& row : m.theta)
    for (double v : row) theta.push_back(v);
  j["theta"] = std::move(theta);
  return j;
}

inline TopicModel topic_model_from_json(const nlohmann::json& j) {
  TopicModel m;
  m.k = j.at("k").get<int>();
  m.hyper_alpha = j.at("hyper_alpha").get<double>();
  m.hyper_beta = j.at("hyper_beta").get<double>();
  m.seed = j.at("seed").get<uint64_t>();
  m.sweeps = j.at("sweeps").get<int>();
  m.vocabulary = j.at("vocabulary").get<std::vector<std::string>>();
  m.doc_ids = j.at("doc_ids").get<std::vector<std::string>>();
  if (j.contains("empty_docs_skipped"))
    m.empty_docs_skipped = j["empty_docs_skipped"].get<size_t>();
  const auto phi = j.at("phi").get<std::vector<double>>();
  const auto theta = j.at("theta").get<std::vector<double>>();
  const size_t V = m.vocabulary.size();
  if (phi.size() != static_cast<size_t>(m.k) * V ||
      theta.size() != m.doc_ids.size() * static_cast<size_t>(m.k))
    throw Error("topic model: phi/theta sizes do not match k, V, D");
  m.phi.assign(m.k, std::vector<double>(V));
  for (int t = 0; t < m.k; ++t)
    for (size_t w = 0; w < V; ++w) m.phi[t][w] = phi[t * V + w];
  m.theta.assign(m.doc_ids.size(), std::vector<double>(m.k));
  for (size_t d = 0; d < m.doc_ids.size(); ++d)
    for (int t = 0; t < m.k; ++t) m.theta[d][t] = theta[d * m.k + t];
  return m;
}

inline std::string top_words_csv(const TopicModel& model, int n) {
  std::string out = "topic_id,rank,term,weight\n";
  for (int t = 0; t < model.k; ++t) {
    const auto words = top_words(model, t, n);
    for (size_t rank = 0; rank < words.size(); ++rank) {
      const int w = static_cast<int>(
          std::find(model.vocabulary.begin(), model.vocabulary.end(),
                    words[rank]) -
          model.vocabulary.begin());
      out += csv_join({std::to_string(t), std::to_string(rank + 1),
                       words[rank], fmt_double(model.phi[t][w])});
    }
  }
  return out;
}

}  // namespace discourse
