#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "discourse/common.hpp"
#include "discourse/csv.hpp"
#include "discourse/text.hpp"

namespace discourse {

// Per-episode seconds of each audio class over the segmentation window.
struct GenderSeconds {
  double women = 0;
  double men = 0;
  double music = 0;
  double no_energy = 0;
  double noise = 0;

  double sum() const { return women + men + music + no_energy + noise; }
};

struct WordTime {
  std::string token;
  double start_seconds = 0;
};

struct EpisodeRecord {
  std::string show_id;
  std::string episode_id;
  std::string transcript;
  double duration_minutes = 0;
  std::optional<std::string> language;
  std::optional<GenderSeconds> gender_seconds;
  std::optional<std::vector<WordTime>> word_times;
  std::map<std::string, double> external_features;

  // Set once the transcript has been cut to the configured limit, so that
  // re-running the filters leaves the record unchanged. In-memory only.
  bool truncation_applied = false;
};

struct FilterConfig {
  double truncate_minutes = 10.0;
  double min_duration_minutes = 10.0;
  size_t min_words = 10;
  bool english_only = true;
  bool dedup_shows = true;
  double segmentation_window_seconds = 30.0;
};

struct FilterReport {
  size_t input = 0;
  size_t retained = 0;
  std::map<std::string, size_t> counts_dropped_per_filter;
  size_t truncated = 0;                 // informational, not a drop
  size_t missing_gender_seconds = 0;    // warning count, not a drop

  size_t total_dropped() const {
    size_t n = 0;
    for (const auto& [name, c] : counts_dropped_per_filter) n += c;
    return n;
  }
};

namespace detail {

inline double require_number(const nlohmann::json& j, const char* field) {
  if (!j.is_number()) throw Error(std::string("episode record: field '") +
                                  field + "' must be a number");
  return j.get<double>();
}

inline std::string require_string(const nlohmann::json& j, const char* field) {
  if (!j.is_string()) throw Error(std::string("episode record: field '") +
                                  field + "' must be a string");
  return j.get<std::string>();
}

}  // namespace detail

// Parses one JSONL episode object. Unknown fields are ignored.
inline EpisodeRecord parse_episode_record(
    std::string_view line, double segmentation_window_seconds = 30.0) {
  nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object())
    throw Error("episode record: line is not a JSON object");

  EpisodeRecord rec;
  for (const char* field : {"show_id", "episode_id", "transcript"}) {
    if (!j.contains(field))
      throw Error(std::string("episode record: required field '") + field +
                  "' is missing");
  }
  rec.show_id = detail::require_string(j["show_id"], "show_id");
  rec.episode_id = detail::require_string(j["episode_id"], "episode_id");
  rec.transcript = detail::require_string(j["transcript"], "transcript");
  if (rec.show_id.empty() || rec.episode_id.empty())
    throw Error("episode record: show_id and episode_id must be non-empty");

  if (j.contains("duration_minutes")) {
    rec.duration_minutes =
        detail::require_number(j["duration_minutes"], "duration_minutes");
    if (rec.duration_minutes < 0)
      throw Error("episode record: field 'duration_minutes' must be >= 0");
  }
  if (j.contains("language")) {
    rec.language = detail::require_string(j["language"], "language");
  }
  if (j.contains("gender_seconds") && !j["gender_seconds"].is_null()) {
    const auto& g = j["gender_seconds"];
    if (!g.is_object())
      throw Error("episode record: field 'gender_seconds' must be an object");
    GenderSeconds gs;
    auto read = [&](const char* name, double& out) {
      if (g.contains(name)) out = detail::require_number(g[name], name);
      if (out < 0)
        throw Error(std::string("episode record: gender_seconds field '") +
                    name + "' must be >= 0");
    };
    read("women", gs.women);
    read("men", gs.men);
    read("music", gs.music);
    read("no_energy", gs.no_energy);
    read("noise", gs.noise);
    if (gs.sum() > segmentation_window_seconds + 0.5)
      throw Error("episode record: gender_seconds sum " +
                  fmt_double(gs.sum()) + " exceeds segmentation window of " +
                  fmt_double(segmentation_window_seconds) + "s");
    rec.gender_seconds = gs;
  }
  if (j.contains("word_times") && !j["word_times"].is_null()) {
    const auto& w = j["word_times"];
    if (!w.is_array())
      throw Error("episode record: field 'word_times' must be an array");
    std::vector<WordTime> times;
    double prev = -1;
    for (const auto& entry : w) {
      if (!entry.is_array() || entry.size() != 2 || !entry[0].is_string() ||
          !entry[1].is_number())
        throw Error(
            "episode record: word_times entries must be [token, start] pairs");
      WordTime wt{entry[0].get<std::string>(), entry[1].get<double>()};
      if (wt.start_seconds < 0)
        throw Error("episode record: word_times start must be >= 0");
      if (wt.start_seconds < prev)
        throw Error(
            "episode record: word_times must be nondecreasing in start time");
      prev = wt.start_seconds;
      times.push_back(std::move(wt));
    }
    rec.word_times = std::move(times);
  }
  if (j.contains("external_features") && !j["external_features"].is_null()) {
    const auto& f = j["external_features"];
    if (!f.is_object())
      throw Error("episode record: field 'external_features' must be an object");
    for (auto it = f.begin(); it != f.end(); ++it)
      rec.external_features[it.key()] =
          detail::require_number(it.value(), it.key().c_str());
  }
  return rec;
}

inline nlohmann::json episode_record_to_json(const EpisodeRecord& rec) {
  nlohmann::json j;
  j["show_id"] = rec.show_id;
  j["episode_id"] = rec.episode_id;
  j["transcript"] = rec.transcript;
  j["duration_minutes"] = rec.duration_minutes;
  if (rec.language) j["language"] = *rec.language;
  if (rec.gender_seconds) {
    const auto& g = *rec.gender_seconds;
    j["gender_seconds"] = {{"women", g.women},
                           {"men", g.men},
                           {"music", g.music},
                           {"no_energy", g.no_energy},
                           {"noise", g.noise}};
  }
  if (rec.word_times) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& wt : *rec.word_times)
      arr.push_back({wt.token, wt.start_seconds});
    j["word_times"] = arr;
  }
  if (!rec.external_features.empty()) j["external_features"] = rec.external_features;
  return j;
}

// Loads a JSONL corpus; episode_id must be unique across the file.
inline std::vector<EpisodeRecord> load_corpus_jsonl(
    const std::filesystem::path& path, double window_seconds = 30.0) {
  std::string text = read_text_file(path);
  std::vector<EpisodeRecord> records;
  std::set<std::string> seen;
  size_t line_no = 0;
  size_t begin = 0;
  while (begin <= text.size()) {
    size_t end = text.find('\n', begin);
    if (end == std::string::npos) end = text.size();
    std::string_view line = trim(std::string_view(text).substr(begin, end - begin));
    ++line_no;
    if (!line.empty()) {
      EpisodeRecord rec;
      try {
        rec = parse_episode_record(line, window_seconds);
      } catch (const Error& e) {
        throw Error(path.string() + ":" + std::to_string(line_no) + ": " +
                    e.what());
      }
      if (!seen.insert(rec.episode_id).second)
        throw Error(path.string() + ":" + std::to_string(line_no) +
                    ": duplicate episode_id '" + rec.episode_id + "'");
      records.push_back(std::move(rec));
    }
    if (end == text.size()) break;
    begin = end + 1;
  }
  return records;
}

inline void save_corpus_jsonl(const std::vector<EpisodeRecord>& records,
                              const std::filesystem::path& path) {
  std::string out;
  for (const auto& rec : records) {
    out += episode_record_to_json(rec).dump();
    out.push_back('\n');
  }
  write_text_file(path, out);
}

namespace detail {

inline void truncate_record(EpisodeRecord& rec, double limit_minutes,
                            bool& changed) {
  if (rec.truncation_applied) return;
  const double limit_seconds = limit_minutes * 60.0;
  if (rec.word_times) {
    auto& times = *rec.word_times;
    size_t keep = 0;
    while (keep < times.size() && times[keep].start_seconds < limit_seconds)
      ++keep;
    if (keep < times.size()) {
      times.resize(keep);
      std::string rebuilt;
      for (const auto& wt : times) {
        if (!rebuilt.empty()) rebuilt.push_back(' ');
        rebuilt += wt.token;
      }
      rec.transcript = std::move(rebuilt);
      changed = true;
    }
  } else if (rec.duration_minutes > limit_minutes &&
             rec.duration_minutes > 0) {
    std::vector<std::string> words = split_ws(rec.transcript);
    const size_t keep = static_cast<size_t>(std::ceil(
        static_cast<double>(words.size()) * limit_minutes /
        rec.duration_minutes));
    if (keep < words.size()) {
      std::string rebuilt;
      for (size_t i = 0; i < keep; ++i) {
        if (i) rebuilt.push_back(' ');
        rebuilt += words[i];
      }
      rec.transcript = std::move(rebuilt);
      changed = true;
    }
  }
  rec.truncation_applied = true;
}

}  // namespace detail

// Applies the corpus filters in order: (i) truncate to the duration limit,
// (ii) drop short episodes, (iii) drop non-English episodes by tag,
// (iv) drop episodes with too few words, (v) keep one episode per show.
inline std::pair<std::vector<EpisodeRecord>, FilterReport> apply_filters(
    std::vector<EpisodeRecord> records, const FilterConfig& cfg = {}) {
  FilterReport report;
  report.input = records.size();
  report.counts_dropped_per_filter["min_duration"] = 0;
  report.counts_dropped_per_filter["non_english"] = 0;
  report.counts_dropped_per_filter["min_words"] = 0;
  if (cfg.dedup_shows) report.counts_dropped_per_filter["dedup_show"] = 0;

  std::vector<EpisodeRecord> kept;
  kept.reserve(records.size());
  for (auto& rec : records) {
    // (i) truncation never drops
    bool changed = false;
    detail::truncate_record(rec, cfg.truncate_minutes, changed);
    if (changed) ++report.truncated;

    // (ii) minimum duration
    if (rec.duration_minutes < cfg.min_duration_minutes) {
      ++report.counts_dropped_per_filter["min_duration"];
      continue;
    }
    // (iii) language tag
    if (cfg.english_only && rec.language) {
      std::string tag = to_lower_ascii(*rec.language);
      bool english = tag == "en" || tag.rfind("en-", 0) == 0 ||
                     tag.rfind("en_", 0) == 0;
      if (!english) {
        ++report.counts_dropped_per_filter["non_english"];
        continue;
      }
    }
    // (iv) minimum word count
    if (split_ws(rec.transcript).size() < cfg.min_words) {
      ++report.counts_dropped_per_filter["min_words"];
      continue;
    }
    kept.push_back(std::move(rec));
  }

  // (v) one episode per show: lexicographically smallest episode_id wins
  if (cfg.dedup_shows) {
    std::map<std::string, size_t> best;  // show_id -> index into kept
    for (size_t i = 0; i < kept.size(); ++i) {
      auto it = best.find(kept[i].show_id);
      if (it == best.end()) {
        best[kept[i].show_id] = i;
      } else if (kept[i].episode_id < kept[it->second].episode_id) {
        it->second = i;
      }
    }
    std::vector<EpisodeRecord> deduped;
    deduped.reserve(best.size());
    for (size_t i = 0; i < kept.size(); ++i) {
      if (best[kept[i].show_id] == i)
        deduped.push_back(std::move(kept[i]));
      else
        ++report.counts_dropped_per_filter["dedup_show"];
    }
    kept = std::move(deduped);
  }

  for (const auto& rec : kept)
    if (!rec.gender_seconds) ++report.missing_gender_seconds;
  report.retained = kept.size();
  return {std::move(kept), report};
}

inline nlohmann::json filter_report_to_json(const FilterReport& r) {
  nlohmann::json j;
  j["input"] = r.input;
  j["retained"] = r.retained;
  j["counts_dropped_per_filter"] = r.counts_dropped_per_filter;
  j["truncated"] = r.truncated;
  j["missing_gender_seconds"] = r.missing_gender_seconds;
  return j;
}

// Attaches numeric feature columns from a CSV (header: episode_id,<name>...)
// to the matching records.
inline void attach_external_features(std::vector<EpisodeRecord>& records,
                                     const CsvTable& table) {
  if (table.header.empty() || table.header[0] != "episode_id")
    throw Error("external features: first CSV column must be 'episode_id'");
  std::map<std::string, EpisodeRecord*> by_id;
  for (auto& rec : records) by_id[rec.episode_id] = &rec;

  std::vector<std::string> unknown;
  for (size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    if (row.size() != table.header.size())
      throw Error("external features: row " + std::to_string(r + 2) + " has " +
                  std::to_string(row.size()) + " cells, expected " +
                  std::to_string(table.header.size()));
    auto it = by_id.find(row[0]);
    if (it == by_id.end()) {
      unknown.push_back(row[0]);
      continue;
    }
    for (size_t c = 1; c < row.size(); ++c) {
      size_t pos = 0;
      double value = 0;
      try {
        value = std::stod(row[c], &pos);
      } catch (const std::exception&) {
        pos = 0;
      }
      if (pos != row[c].size() || row[c].empty())
        throw Error("external features: non-numeric cell at row " +
                    std::to_string(r + 2) + ", column '" + table.header[c] +
                    "': '" + row[c] + "'");
      it->second->external_features[table.header[c]] = value;
    }
  }
  if (!unknown.empty()) {
    std::string ids;
    for (const auto& id : unknown) {
      if (!ids.empty()) ids += ", ";
      ids += id;
    }
    throw Error("external features: unknown episode_id(s): " + ids);
  }
}

struct TokenStat {
  std::string token;
  double mean = 0;
  double stddev = 0;       // sample (n-1) standard deviation
  bool degenerate = false; // n == 1
};

// Mean and sample standard deviation of per-episode counts of each token.
// Counting is case-insensitive whole-token matching after tokenization with
// stopword removal disabled.
inline std::vector<TokenStat> token_stats(
    const std::vector<EpisodeRecord>& records,
    const std::vector<std::string>& tokens) {
  if (records.empty()) throw Error("token_stats: empty record set");
  if (tokens.empty()) throw Error("token_stats: no tokens given");

  TokenizeConfig cfg;
  cfg.remove_stopwords = false;
  std::map<std::string, size_t> wanted;
  for (size_t i = 0; i < tokens.size(); ++i)
    wanted[to_lower_ascii(tokens[i])] = i;

  const size_t n = records.size();
  std::vector<std::vector<double>> counts(tokens.size(),
                                          std::vector<double>(n, 0.0));
  for (size_t d = 0; d < n; ++d) {
    for (const auto& tok : tokenize(records[d].transcript, cfg)) {
      auto it = wanted.find(tok);
      if (it != wanted.end()) counts[it->second][d] += 1.0;
    }
  }

  std::vector<TokenStat> stats;
  stats.reserve(tokens.size());
  for (size_t i = 0; i < tokens.size(); ++i) {
    TokenStat st;
    st.token = tokens[i];
    double sum = 0;
    for (double c : counts[i]) sum += c;
    st.mean = sum / static_cast<double>(n);
    if (n == 1) {
      st.degenerate = true;
      st.stddev = 0;
    } else {
      double ss = 0;
      for (double c : counts[i]) ss += (c - st.mean) * (c - st.mean);
      st.stddev = std::sqrt(ss / static_cast<double>(n - 1));
    }
    stats.push_back(std::move(st));
  }
  return stats;
}

}  // namespace discourse
