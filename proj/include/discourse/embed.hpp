#pragma once

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "httplib.h"
#include "json.hpp"

#include "discourse/common.hpp"
#include "discourse/rng.hpp"
#include "discourse/sha256.hpp"
#include "discourse/text.hpp"

namespace discourse {

struct EmbeddingVector {
  std::vector<double> values;
  std::string provider_id;
  std::string model_id;

  size_t dimension() const { return values.size(); }
};

inline double cosine(const EmbeddingVector& u, const EmbeddingVector& v) {
  if (u.dimension() != v.dimension())
    throw Error("cosine: dimension mismatch (" + std::to_string(u.dimension()) +
                " vs " + std::to_string(v.dimension()) + ")");
  double dot = 0, nu = 0, nv = 0;
  for (size_t i = 0; i < u.values.size(); ++i) {
    dot += u.values[i] * v.values[i];
    nu += u.values[i] * u.values[i];
    nv += v.values[i] * v.values[i];
  }
  if (nu <= 0 || nv <= 0) throw Error("cosine: zero-norm vector");
  double c = dot / (std::sqrt(nu) * std::sqrt(nv));
  if (c > 1.0) c = 1.0;
  if (c < -1.0) c = -1.0;
  return c;
}

struct ProviderConfig {
  enum class Kind { Local, Remote };
  Kind kind = Kind::Local;
  std::string base_url;                    // remote only
  std::string model_id = "local";
  std::string api_key_env = "EMBED_API_KEY";
  int batch_size = 16;
  int max_retries = 3;
  int backoff_base_ms = 100;
  int max_parallel_requests = 1;
  std::string cache_dir;
  std::string vector_file;                 // local only
};

// Thrown by providers; retryable failures are retried by embed_batch.
class ProviderError : public Error {
 public:
  ProviderError(const std::string& msg, int http_status, bool retryable)
      : Error(msg), http_status_(http_status), retryable_(retryable) {}
  int http_status() const { return http_status_; }
  bool retryable() const { return retryable_; }

 private:
  int http_status_;
  bool retryable_;
};

class Provider {
 public:
  virtual ~Provider() = default;
  // One provider round trip over at most one batch of texts.
  virtual std::vector<EmbeddingVector> fetch(
      const std::vector<std::string>& texts) = 0;
  virtual std::string provider_id() const = 0;
  virtual std::string model_id() const = 0;
  const ProviderConfig& config() const { return config_; }
  long requests_made() const { return requests_; }

 protected:
  explicit Provider(ProviderConfig cfg) : config_(std::move(cfg)) {}
  ProviderConfig config_;
  long requests_ = 0;
};

struct WordVectorTable {
  size_t dimension = 0;
  std::unordered_map<std::string, std::vector<double>> vectors;
};

// Vector file: one term per line, "term v1 v2 ... vD", uniform dimension.
inline WordVectorTable load_word_vector_file(const std::filesystem::path& path) {
  WordVectorTable table;
  const std::string text = read_text_file(path);
  size_t begin = 0;
  size_t line_no = 0;
  while (begin <= text.size()) {
    size_t end = text.find('\n', begin);
    if (end == std::string::npos) end = text.size();
    ++line_no;
    const auto fields = split_ws(std::string_view(text).substr(begin, end - begin));
    if (!fields.empty()) {
      if (fields.size() < 3)
        throw Error(path.string() + ":" + std::to_string(line_no) +
                    ": vector line needs a term and at least 2 floats");
      std::vector<double> values;
      values.reserve(fields.size() - 1);
      for (size_t i = 1; i < fields.size(); ++i) {
        try {
          values.push_back(std::stod(fields[i]));
        } catch (const std::exception&) {
          throw Error(path.string() + ":" + std::to_string(line_no) +
                      ": bad float '" + fields[i] + "'");
        }
      }
      if (table.dimension == 0) {
        table.dimension = values.size();
      } else if (values.size() != table.dimension) {
        throw Error(path.string() + ":" + std::to_string(line_no) +
                    ": ragged vector file (expected dimension " +
                    std::to_string(table.dimension) + ", got " +
                    std::to_string(values.size()) + ")");
      }
      table.vectors[to_lower_ascii(fields[0])] = std::move(values);
    }
    if (end == text.size()) break;
    begin = end + 1;
  }
  if (table.vectors.empty())
    throw Error(path.string() + ": empty vector file");
  return table;
}

namespace detail {

// Deterministic unit vector for tokens absent from the vector file.
inline std::vector<double> hashed_unit_vector(std::string_view token,
                                              size_t dimension) {
  uint64_t h = splitmix64(stable_hash64(token));
  std::vector<double> v(dimension);
  double norm2 = 0;
  for (size_t i = 0; i < dimension; ++i) {
    h = splitmix64(h);
    v[i] = static_cast<double>(h >> 11) * 0x1.0p-52 - 1.0;  // [-1, 1)
    norm2 += v[i] * v[i];
  }
  if (norm2 < 1e-24) {
    v[0] = 1.0;
    norm2 = 1.0;
  }
  const double inv = 1.0 / std::sqrt(norm2);
  for (double& x : v) x *= inv;
  return v;
}

}  // namespace detail

// Deterministic offline provider: a text embeds to the mean of its token
// vectors; unknown tokens fall back to a hash-derived unit vector.
class LocalProvider : public Provider {
 public:
  explicit LocalProvider(ProviderConfig cfg) : Provider(std::move(cfg)) {
    if (config_.vector_file.empty())
      throw Error("local provider: vector_file is required");
    table_ = load_word_vector_file(config_.vector_file);
    if (table_.dimension < 2)
      throw Error("local provider: embedding dimension must be >= 2");
  }

  std::vector<EmbeddingVector> fetch(
      const std::vector<std::string>& texts) override {
    ++requests_;
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const auto& text : texts) out.push_back(embed_one(text));
    return out;
  }

  std::string provider_id() const override { return "local"; }
  std::string model_id() const override { return config_.model_id; }

  EmbeddingVector embed_one(const std::string& text) const {
    auto tokens = word_tokens(text);
    if (tokens.empty()) tokens.push_back(to_lower_ascii(text));
    std::vector<double> mean(table_.dimension, 0.0);
    for (const auto& tok : tokens) {
      auto it = table_.vectors.find(tok);
      const std::vector<double> fallback =
          it == table_.vectors.end()
              ? detail::hashed_unit_vector(tok, table_.dimension)
              : std::vector<double>();
      const std::vector<double>& v =
          it == table_.vectors.end() ? fallback : it->second;
      for (size_t i = 0; i < mean.size(); ++i) mean[i] += v[i];
    }
    const double inv = 1.0 / static_cast<double>(tokens.size());
    for (double& x : mean) x *= inv;
    return EmbeddingVector{std::move(mean), "local", config_.model_id};
  }

 private:
  WordVectorTable table_;
};

// Client for the common embeddings endpoint:
//   POST {base_url}/embeddings  {"model": ..., "input": [...]}
//   -> {"data": [{"index": i, "embedding": [...]}, ...]}
class RemoteProvider : public Provider {
 public:
  explicit RemoteProvider(ProviderConfig cfg) : Provider(std::move(cfg)) {
    if (config_.base_url.empty())
      throw Error("remote provider: base_url is required");
    if (config_.api_key_env.empty())
      throw Error("remote provider: api_key_env is required");
    const char* key = std::getenv(config_.api_key_env.c_str());
    api_key_ = key ? key : "";
    split_url();
  }

  std::vector<EmbeddingVector> fetch(
      const std::vector<std::string>& texts) override {
    ++requests_;
    nlohmann::json body;
    body["model"] = config_.model_id;
    body["input"] = texts;

    httplib::Client client(host_.c_str());
    client.set_connection_timeout(30);
    client.set_read_timeout(120);
    httplib::Headers headers;
    if (!api_key_.empty())
      headers.emplace("Authorization", "Bearer " + api_key_);

    auto res = client.Post((path_prefix_ + "/embeddings").c_str(), headers,
                           body.dump(), "application/json");
    if (!res)
      throw ProviderError("embeddings request failed: connection error", 0,
                          true);
    if (res->status != 200) {
      const bool retryable = res->status == 429 || res->status >= 500;
      throw ProviderError(
          "embeddings request failed: HTTP " + std::to_string(res->status),
          res->status, retryable);
    }
    nlohmann::json j = nlohmann::json::parse(res->body, nullptr, false);
    if (j.is_discarded() || !j.contains("data") || !j["data"].is_array())
      throw ProviderError("embeddings response: malformed JSON body", 200,
                          false);
    std::vector<EmbeddingVector> out(texts.size());
    std::vector<bool> filled(texts.size(), false);
    for (const auto& entry : j["data"]) {
      if (!entry.contains("index") || !entry.contains("embedding"))
        throw ProviderError("embeddings response: entry missing index/embedding",
                            200, false);
      const size_t idx = entry["index"].get<size_t>();
      if (idx >= texts.size())
        throw ProviderError("embeddings response: index out of range", 200,
                            false);
      EmbeddingVector v;
      v.values = entry["embedding"].get<std::vector<double>>();
      v.provider_id = provider_id();
      v.model_id = config_.model_id;
      for (double x : v.values)
        if (!std::isfinite(x))
          throw ProviderError("embeddings response: non-finite value", 200,
                              false);
      out[idx] = std::move(v);
      filled[idx] = true;
    }
    for (size_t i = 0; i < filled.size(); ++i)
      if (!filled[i])
        throw ProviderError("embeddings response: missing entry for index " +
                                std::to_string(i),
                            200, false);
    return out;
  }

  std::string provider_id() const override { return "remote:" + host_; }
  std::string model_id() const override { return config_.model_id; }

 private:
  void split_url() {
    // Accept http(s)://host[:port][/prefix]
    std::string url = config_.base_url;
    size_t scheme = url.find("://");
    size_t host_begin = scheme == std::string::npos ? 0 : scheme + 3;
    size_t slash = url.find('/', host_begin);
    if (slash == std::string::npos) {
      host_ = url;
      path_prefix_.clear();
    } else {
      host_ = url.substr(0, slash);
      path_prefix_ = url.substr(slash);
      while (!path_prefix_.empty() && path_prefix_.back() == '/')
        path_prefix_.pop_back();
    }
  }

  std::string api_key_;
  std::string host_;          // scheme://host:port, as httplib expects
  std::string path_prefix_;
};

inline std::unique_ptr<Provider> make_provider(const ProviderConfig& cfg) {
  if (cfg.kind == ProviderConfig::Kind::Local)
    return std::make_unique<LocalProvider>(cfg);
  return std::make_unique<RemoteProvider>(cfg);
}

// Chunks texts by batch_size and retries transient failures with
// exponential backoff. Output order matches input order.
inline std::vector<EmbeddingVector> embed_batch(
    Provider& provider, const std::vector<std::string>& texts) {
  if (texts.empty()) throw Error("embed_batch: no texts given");
  for (const auto& t : texts)
    if (trim(t).empty()) throw Error("embed_batch: blank text");
  const auto& cfg = provider.config();
  const size_t batch = std::max(1, cfg.batch_size);

  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (size_t begin = 0; begin < texts.size(); begin += batch) {
    const size_t end = std::min(texts.size(), begin + batch);
    std::vector<std::string> chunk(texts.begin() + begin, texts.begin() + end);
    int attempt = 0;
    for (;;) {
      try {
        auto vectors = provider.fetch(chunk);
        if (vectors.size() != chunk.size())
          throw ProviderError("provider returned wrong vector count", 0, false);
        for (auto& v : vectors) out.push_back(std::move(v));
        break;
      } catch (const ProviderError& e) {
        if (!e.retryable() || attempt >= cfg.max_retries) {
          throw ProviderError(
              std::string(e.what()) + " (text hash " +
                  sha256_hex(chunk.front()).substr(0, 16) + ", after " +
                  std::to_string(attempt) + " retries)",
              e.http_status(), e.retryable());
        }
        const auto delay = std::chrono::milliseconds(
            static_cast<long>(cfg.backoff_base_ms) * (1L << attempt));
        std::this_thread::sleep_for(delay);
        ++attempt;
      }
    }
  }
  // Dimensions must agree across the whole request.
  for (const auto& v : out) {
    if (v.dimension() != out.front().dimension())
      throw Error("embed_batch: dimension mismatch across batch (" +
                  std::to_string(out.front().dimension()) + " vs " +
                  std::to_string(v.dimension()) + ")");
    if (v.dimension() < 2)
      throw Error("embed_batch: embedding dimension must be >= 2");
  }
  return out;
}

// Persistent content-addressed embedding cache; one JSON file per key.
class EmbeddingCache {
 public:
  explicit EmbeddingCache(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
  }

  static std::string key_for(const std::string& provider_id,
                             const std::string& model_id, int repeat_index,
                             const std::string& text) {
    std::string material = provider_id;
    material.push_back('\x1f');
    material += model_id;
    material.push_back('\x1f');
    material += std::to_string(repeat_index);
    material.push_back('\x1f');
    material += text;
    return sha256_hex(material);
  }

  std::optional<EmbeddingVector> get(const std::string& key) {
    auto mem = mem_.find(key);
    if (mem != mem_.end()) return mem->second;
    const auto path = dir_ / key;
    if (!std::filesystem::exists(path)) return std::nullopt;
    nlohmann::json j =
        nlohmann::json::parse(read_text_file(path), nullptr, false);
    if (j.is_discarded() || !j.contains("values") || !j.contains("dimension") ||
        !j["values"].is_array() ||
        j["values"].size() != j["dimension"].get<size_t>()) {
      // Corrupt entry: drop it and let the caller refetch.
      std::error_code ec;
      std::filesystem::remove(path, ec);
      ++corrupt_entries_;
      return std::nullopt;
    }
    EmbeddingVector v;
    v.values = j["values"].get<std::vector<double>>();
    v.provider_id = j.value("provider_id", "");
    v.model_id = j.value("model_id", "");
    mem_[key] = v;
    return v;
  }

  void put(const std::string& key, const EmbeddingVector& v, int repeat_index) {
    nlohmann::json j;
    j["dimension"] = v.dimension();
    j["values"] = v.values;
    j["provider_id"] = v.provider_id;
    j["model_id"] = v.model_id;
    j["repeat_index"] = repeat_index;
    j["created_at"] = static_cast<long>(std::time(nullptr));
    write_text_file_atomic(dir_ / key, j.dump());
    mem_[key] = v;
  }

  long corrupt_entries() const { return corrupt_entries_; }
  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
  std::unordered_map<std::string, EmbeddingVector> mem_;
  long corrupt_entries_ = 0;
};

// Cache-through embedding: hits bypass the provider entirely; misses are
// fetched in one batched pass and persisted. Distinct repeat indices are
// distinct cache entries.
inline std::vector<EmbeddingVector> cached_embed(
    Provider& provider, EmbeddingCache& cache,
    const std::vector<std::string>& texts, int repeat_index = 0) {
  std::vector<EmbeddingVector> out(texts.size());
  std::vector<size_t> missing;
  for (size_t i = 0; i < texts.size(); ++i) {
    const auto key = EmbeddingCache::key_for(provider.provider_id(),
                                             provider.model_id(), repeat_index,
                                             texts[i]);
    if (auto hit = cache.get(key)) {
      out[i] = std::move(*hit);
    } else {
      missing.push_back(i);
    }
  }
  if (!missing.empty()) {
    std::vector<std::string> to_fetch;
    to_fetch.reserve(missing.size());
    // Identical texts in one request still cost a single fetch each; the
    // cache write after the first fill makes later duplicates hits, so
    // fetch unique texts only.
    std::map<std::string, std::vector<size_t>> by_text;
    for (size_t i : missing) by_text[texts[i]].push_back(i);
    for (const auto& [text, slots] : by_text) to_fetch.push_back(text);
    const auto fetched = embed_batch(provider, to_fetch);
    size_t f = 0;
    for (const auto& [text, slots] : by_text) {
      const auto key = EmbeddingCache::key_for(
          provider.provider_id(), provider.model_id(), repeat_index, text);
      cache.put(key, fetched[f], repeat_index);
      for (size_t slot : slots) out[slot] = fetched[f];
      ++f;
    }
  }
  return out;
}

}  // namespace discourse
