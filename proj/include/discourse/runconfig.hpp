#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "discourse/common.hpp"
#include "discourse/corpus.hpp"
#include "discourse/dweat.hpp"
#include "discourse/embed.hpp"

namespace discourse {

// Whole-pipeline configuration: a JSON file plus per-flag CLI overrides.
// The resolved config is snapshotted into the output directory verbatim.
struct RunConfig {
  struct Paths {
    std::string corpus_jsonl;
    std::vector<std::string> features_csv;
    std::string external_topics_csv;
    std::string topic_labels_csv;
    std::string wordlists_json;
    std::string cache_dir;
    std::string output_dir = "out";
  } paths;

  FilterConfig filters;

  struct Topics {
    int k = 20;
    int sweeps = 200;
    uint64_t seed = 7;
    double alpha = 0;  // 0 selects the 50/k default
    double beta = 0.01;
    int min_doc_freq = 2;
    int max_vocab = 0;
    bool stem = false;
    int top_words_n = 10;
    int coherence_n = 10;

    double resolved_alpha() const { return alpha > 0 ? alpha : 50.0 / k; }
  } topics;

  struct Correlate {
    double alpha0 = 0.05;
    double min_abs_r = 0.1;
  } correlate;

  struct Dweat {
    std::vector<double> taus = {20, 25, 30};
    std::vector<int> gammas = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    std::vector<uint64_t> seeds = {1, 2, 3, 4, 5};
    int repeats = 3;
    std::string semantics = "equation";
    size_t n_podcasts = 100;
    size_t segments_per_podcast = 3;
    size_t sentences_per_segment = 3;
    size_t target_len = 10;
  } dweat;

  ProviderConfig provider;

  DweatConfig dweat_config() const {
    DweatConfig cfg;
    cfg.taus = dweat.taus;
    cfg.gammas = dweat.gammas;
    cfg.seeds = dweat.seeds;
    cfg.repeats = dweat.repeats;
    cfg.semantics = counter_semantics_from_string(dweat.semantics);
    cfg.n_podcasts = dweat.n_podcasts;
    cfg.segments_per_podcast = dweat.segments_per_podcast;
    cfg.sentences_per_segment = dweat.sentences_per_segment;
    return cfg;
  }
};

inline nlohmann::json run_config_to_json(const RunConfig& cfg) {
  nlohmann::json j;
  j["paths"] = {{"corpus_jsonl", cfg.paths.corpus_jsonl},
                {"features_csv", cfg.paths.features_csv},
                {"external_topics_csv", cfg.paths.external_topics_csv},
                {"topic_labels_csv", cfg.paths.topic_labels_csv},
                {"wordlists_json", cfg.paths.wordlists_json},
                {"cache_dir", cfg.paths.cache_dir},
                {"output_dir", cfg.paths.output_dir}};
  j["filters"] = {{"truncate_minutes", cfg.filters.truncate_minutes},
                  {"min_duration_minutes", cfg.filters.min_duration_minutes},
                  {"min_words", cfg.filters.min_words},
                  {"english_only", cfg.filters.english_only},
                  {"dedup_shows", cfg.filters.dedup_shows},
                  {"segmentation_window_seconds",
                   cfg.filters.segmentation_window_seconds}};
  j["topics"] = {{"k", cfg.topics.k},
                 {"sweeps", cfg.topics.sweeps},
                 {"seed", cfg.topics.seed},
                 {"alpha", cfg.topics.alpha},
                 {"beta", cfg.topics.beta},
                 {"min_doc_freq", cfg.topics.min_doc_freq},
                 {"max_vocab", cfg.topics.max_vocab},
                 {"stem", cfg.topics.stem},
                 {"top_words_n", cfg.topics.top_words_n},
                 {"coherence_n", cfg.topics.coherence_n}};
  j["correlate"] = {{"alpha0", cfg.correlate.alpha0},
                    {"min_abs_r", cfg.correlate.min_abs_r}};
  j["dweat"] = {{"taus", cfg.dweat.taus},
                {"gammas", cfg.dweat.gammas},
                {"seeds", cfg.dweat.seeds},
                {"repeats", cfg.dweat.repeats},
                {"semantics", cfg.dweat.semantics},
                {"n_podcasts", cfg.dweat.n_podcasts},
                {"segments_per_podcast", cfg.dweat.segments_per_podcast},
                {"sentences_per_segment", cfg.dweat.sentences_per_segment},
                {"target_len", cfg.dweat.target_len}};
  j["provider"] = {
      {"kind", cfg.provider.kind == ProviderConfig::Kind::Local ? "local"
                                                                : "remote"},
      {"base_url", cfg.provider.base_url},
      {"model_id", cfg.provider.model_id},
      {"api_key_env", cfg.provider.api_key_env},
      {"batch_size", cfg.provider.batch_size},
      {"max_retries", cfg.provider.max_retries},
      {"backoff_base_ms", cfg.provider.backoff_base_ms},
      {"max_parallel_requests", cfg.provider.max_parallel_requests},
      {"vector_file", cfg.provider.vector_file}};
  return j;
}

inline RunConfig run_config_from_json(const nlohmann::json& j) {
  RunConfig cfg;
  if (j.contains("paths")) {
    const auto& p = j["paths"];
    cfg.paths.corpus_jsonl = p.value("corpus_jsonl", cfg.paths.corpus_jsonl);
    if (p.contains("features_csv"))
      cfg.paths.features_csv = p["features_csv"].get<std::vector<std::string>>();
    cfg.paths.external_topics_csv =
        p.value("external_topics_csv", cfg.paths.external_topics_csv);
    cfg.paths.topic_labels_csv =
        p.value("topic_labels_csv", cfg.paths.topic_labels_csv);
    cfg.paths.wordlists_json =
        p.value("wordlists_json", cfg.paths.wordlists_json);
    cfg.paths.cache_dir = p.value("cache_dir", cfg.paths.cache_dir);
    cfg.paths.output_dir = p.value("output_dir", cfg.paths.output_dir);
  }
  if (j.contains("filters")) {
    const auto& f = j["filters"];
    cfg.filters.truncate_minutes =
        f.value("truncate_minutes", cfg.filters.truncate_minutes);
    cfg.filters.min_duration_minutes =
        f.value("min_duration_minutes", cfg.filters.min_duration_minutes);
    cfg.filters.min_words = f.value("min_words", cfg.filters.min_words);
    cfg.filters.english_only =
        f.value("english_only", cfg.filters.english_only);
    cfg.filters.dedup_shows = f.value("dedup_shows", cfg.filters.dedup_shows);
    cfg.filters.segmentation_window_seconds =
        f.value("segmentation_window_seconds",
                cfg.filters.segmentation_window_seconds);
  }
  if (j.contains("topics")) {
    const auto& t = j["topics"];
    cfg.topics.k = t.value("k", cfg.topics.k);
    cfg.topics.sweeps = t.value("sweeps", cfg.topics.sweeps);
    cfg.topics.seed = t.value("seed", cfg.topics.seed);
    cfg.topics.alpha = t.value("alpha", cfg.topics.alpha);
    cfg.topics.beta = t.value("beta", cfg.topics.beta);
    cfg.topics.min_doc_freq = t.value("min_doc_freq", cfg.topics.min_doc_freq);
    cfg.topics.max_vocab = t.value("max_vocab", cfg.topics.max_vocab);
    cfg.topics.stem = t.value("stem", cfg.topics.stem);
    cfg.topics.top_words_n = t.value("top_words_n", cfg.topics.top_words_n);
    cfg.topics.coherence_n = t.value("coherence_n", cfg.topics.coherence_n);
  }
  if (j.contains("correlate")) {
    const auto& c = j["correlate"];
    cfg.correlate.alpha0 = c.value("alpha0", cfg.correlate.alpha0);
    cfg.correlate.min_abs_r = c.value("min_abs_r", cfg.correlate.min_abs_r);
  }
  if (j.contains("dweat")) {
    const auto& d = j["dweat"];
    if (d.contains("taus")) cfg.dweat.taus = d["taus"].get<std::vector<double>>();
    if (d.contains("gammas"))
      cfg.dweat.gammas = d["gammas"].get<std::vector<int>>();
    if (d.contains("seeds"))
      cfg.dweat.seeds = d["seeds"].get<std::vector<uint64_t>>();
    cfg.dweat.repeats = d.value("repeats", cfg.dweat.repeats);
    cfg.dweat.semantics = d.value("semantics", cfg.dweat.semantics);
    cfg.dweat.n_podcasts = d.value("n_podcasts", cfg.dweat.n_podcasts);
    cfg.dweat.segments_per_podcast =
        d.value("segments_per_podcast", cfg.dweat.segments_per_podcast);
    cfg.dweat.sentences_per_segment =
        d.value("sentences_per_segment", cfg.dweat.sentences_per_segment);
    cfg.dweat.target_len = d.value("target_len", cfg.dweat.target_len);
  }
  if (j.contains("provider")) {
    const auto& p = j["provider"];
    const std::string kind = p.value("kind", "local");
    if (kind == "local")
      cfg.provider.kind = ProviderConfig::Kind::Local;
    else if (kind == "remote")
      cfg.provider.kind = ProviderConfig::Kind::Remote;
    else
      throw Error("config: provider.kind must be 'local' or 'remote'");
    cfg.provider.base_url = p.value("base_url", cfg.provider.base_url);
    cfg.provider.model_id = p.value("model_id", cfg.provider.model_id);
    cfg.provider.api_key_env = p.value("api_key_env", cfg.provider.api_key_env);
    cfg.provider.batch_size = p.value("batch_size", cfg.provider.batch_size);
    cfg.provider.max_retries = p.value("max_retries", cfg.provider.max_retries);
    cfg.provider.backoff_base_ms =
        p.value("backoff_base_ms", cfg.provider.backoff_base_ms);
    cfg.provider.max_parallel_requests =
        p.value("max_parallel_requests", cfg.provider.max_parallel_requests);
    cfg.provider.vector_file = p.value("vector_file", cfg.provider.vector_file);
  }
  return cfg;
}

}  // namespace discourse
