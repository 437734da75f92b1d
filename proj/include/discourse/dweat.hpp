#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "discourse/common.hpp"
#include "discourse/corpus.hpp"
#include "discourse/embed.hpp"
#include "discourse/rng.hpp"
#include "discourse/text.hpp"

namespace discourse {

struct WordLists {
  std::vector<std::string> a_w;  // attribute words, women concept
  std::vector<std::string> a_m;  // attribute words, men concept
  std::vector<std::string> t_w;  // target words, feminine discourse
  std::vector<std::string> t_m;  // target words, masculine discourse
  std::string provenance;
};

inline WordLists default_attribute_lists() {
  WordLists lists;
  lists.a_w = {"women", "woman",  "girl", "she",
               "her",   "sister", "hers", "daughter"};
  lists.a_m = {"men", "man", "boy", "he", "his", "brother", "him", "son"};
  return lists;
}

namespace detail {

inline void validate_word_list(const std::vector<std::string>& words,
                               const char* name) {
  for (const auto& w : words) {
    if (w.empty()) throw Error(std::string("word lists: empty entry in ") + name);
    for (char c : w)
      if (std::isspace(static_cast<unsigned char>(c)) || (c >= 'A' && c <= 'Z'))
        throw Error(std::string("word lists: entry '") + w + "' in " + name +
                    " must be a lowercase single token");
  }
}

}  // namespace detail

inline nlohmann::json word_lists_to_json(const WordLists& lists) {
  nlohmann::json j;
  j["a_w"] = lists.a_w;
  j["a_m"] = lists.a_m;
  j["t_w"] = lists.t_w;
  j["t_m"] = lists.t_m;
  j["provenance"] = lists.provenance;
  return j;
}

inline WordLists word_lists_from_json(const nlohmann::json& j) {
  WordLists lists;
  lists.a_w = j.at("a_w").get<std::vector<std::string>>();
  lists.a_m = j.at("a_m").get<std::vector<std::string>>();
  lists.t_w = j.at("t_w").get<std::vector<std::string>>();
  lists.t_m = j.at("t_m").get<std::vector<std::string>>();
  lists.provenance = j.value("provenance", "");
  detail::validate_word_list(lists.a_w, "a_w");
  detail::validate_word_list(lists.a_m, "a_m");
  detail::validate_word_list(lists.t_w, "t_w");
  detail::validate_word_list(lists.t_m, "t_m");
  for (const auto& w : lists.t_w)
    if (std::find(lists.t_m.begin(), lists.t_m.end(), w) != lists.t_m.end())
      throw Error("word lists: t_w and t_m overlap on '" + w + "'");
  return lists;
}

// Resolves overlap between two ranked word lists:
//  (i)  a word at the same rank in both lists is removed from both;
//  (ii) a word at different ranks stays only in the list where it ranks
//       earlier.
// Survivors are taken in rank order until each list has target_len words;
// running out of depth is an error that reports the achievable lengths.
inline std::pair<std::vector<std::string>, std::vector<std::string>>
resolve_overlap(const std::vector<std::string>& list_w,
                const std::vector<std::string>& list_m, size_t target_len) {
  if (target_len == 0) throw Error("resolve_overlap: target_len must be >= 1");

  auto first_ranks = [](const std::vector<std::string>& list) {
    std::map<std::string, size_t> ranks;
    for (size_t i = 0; i < list.size(); ++i) ranks.emplace(list[i], i);
    return ranks;
  };
  const auto rank_w = first_ranks(list_w);
  const auto rank_m = first_ranks(list_m);

  auto survivors = [&](const std::vector<std::string>& own,
                       const std::map<std::string, size_t>& own_rank,
                       const std::map<std::string, size_t>& other_rank) {
    std::vector<std::string> out;
    std::set<std::string> seen;
    for (size_t i = 0; i < own.size(); ++i) {
      const auto& word = own[i];
      if (!seen.insert(word).second) continue;  // duplicate within the list
      if (own_rank.at(word) != i) continue;
      auto other = other_rank.find(word);
      if (other != other_rank.end() && other->second <= i) continue;
      out.push_back(word);
      if (out.size() == target_len) break;
    }
    return out;
  };

  auto t_w = survivors(list_w, rank_w, rank_m);
  auto t_m = survivors(list_m, rank_m, rank_w);
  if (t_w.size() < target_len || t_m.size() < target_len)
    throw Error("resolve_overlap: insufficient depth to reach " +
                std::to_string(target_len) + " words (achievable: " +
                std::to_string(t_w.size()) + " for list_w, " +
                std::to_string(t_m.size()) + " for list_m)");
  return {std::move(t_w), std::move(t_m)};
}

struct SampleSets {
  std::vector<size_t> s_w;  // indices into the record list
  std::vector<size_t> s_m;
  bool shortfall_w = false;
  bool shortfall_m = false;
};

// Samples podcasts whose women (men) seconds meet the threshold, uniformly
// without replacement. Both sets use the same derived RNG stream so that
// mirroring the corpus mirrors the samples.
inline SampleSets build_sample_sets(const std::vector<EpisodeRecord>& records,
                                    double tau, size_t n_podcasts,
                                    uint64_t seed) {
  if (n_podcasts < 1) throw Error("build_sample_sets: n_podcasts must be >= 1");
  std::vector<size_t> eligible_w, eligible_m;
  for (size_t i = 0; i < records.size(); ++i) {
    if (!records[i].gender_seconds) continue;
    if (records[i].gender_seconds->women >= tau) eligible_w.push_back(i);
    if (records[i].gender_seconds->men >= tau) eligible_m.push_back(i);
  }
  if (eligible_w.empty() && eligible_m.empty())
    throw Error("build_sample_sets: no episodes meet tau = " + fmt_double(tau));

  auto draw = [&](const std::vector<size_t>& eligible, const char* set_name) {
    if (eligible.empty())
      throw Error(std::string("build_sample_sets: no episodes meet tau = ") +
                  fmt_double(tau) + " for " + set_name);
    Rng rng = Rng::derive(seed, {stable_hash64("sample")});
    auto picks = rng.sample_indices(eligible.size(), n_podcasts);
    std::vector<size_t> out;
    out.reserve(picks.size());
    for (size_t p : picks) out.push_back(eligible[p]);
    return out;
  };

  SampleSets sets;
  sets.s_w = draw(eligible_w, "S_w");
  sets.s_m = draw(eligible_m, "S_m");
  sets.shortfall_w = sets.s_w.size() < n_podcasts;
  sets.shortfall_m = sets.s_m.size() < n_podcasts;
  return sets;
}

// Non-overlapping windows of consecutive sentences, placed uniformly at
// random among all valid placements. Short transcripts yield fewer (or
// zero) windows.
inline std::vector<std::string> extract_segments(const EpisodeRecord& record,
                                                 size_t segments_per_podcast,
                                                 size_t sentences_per_segment,
                                                 uint64_t seed) {
  if (sentences_per_segment < 1)
    throw Error("extract_segments: sentences_per_segment must be >= 1");
  const auto sentences = split_sentences(record.transcript);
  const size_t S = sentences.size();
  const size_t L = sentences_per_segment;
  if (S < L) return {};
  const size_t max_windows = S / L;
  const size_t m = std::min(segments_per_podcast, max_windows);
  if (m == 0) return {};

  // Placements of m length-L windows biject with m-subsets of
  // [0, S - m*L + m): subset value x_i (sorted) maps to start x_i + i*(L-1).
  Rng rng(seed);
  auto picks = rng.sample_indices(S - m * L + m, m);
  std::sort(picks.begin(), picks.end());
  std::vector<std::string> segments;
  segments.reserve(m);
  for (size_t i = 0; i < m; ++i) {
    const size_t start = picks[i] + i * (L - 1);
    std::string seg;
    for (size_t s = start; s < start + L; ++s) {
      if (!seg.empty()) seg.push_back(' ');
      seg += sentences[s];
    }
    segments.push_back(std::move(seg));
  }
  return segments;
}

struct SwapRecord {
  size_t token_index = 0;   // index among the segment's word tokens
  size_t byte_offset = 0;   // offset of the original word in s
  std::string original;
  std::string replacement;
};

struct SegmentPair {
  std::string episode_id;
  std::string s;
  std::string s_prime;
  int gamma = 0;
  std::vector<SwapRecord> swap_log;
};

// Replaces every whole-token, case-insensitive occurrence of a source word
// with an independent uniform draw from the destination list. Returns
// nothing when fewer than gamma_min replacements happen.
inline std::optional<SegmentPair> swap_words(
    const std::string& segment, const std::vector<std::string>& t_src,
    const std::vector<std::string>& t_dst, int gamma_min, uint64_t seed) {
  if (t_src.empty() || t_dst.empty())
    throw Error("swap_words: source and destination lists must be non-empty");
  std::set<std::string> src_set(t_src.begin(), t_src.end());
  for (const auto& w : t_dst)
    if (src_set.count(w))
      throw Error("swap_words: lists must be disjoint but share '" + w + "'");

  Rng rng(seed);
  SegmentPair pair;
  pair.s = segment;
  std::string out;
  out.reserve(segment.size());
  size_t consumed = 0;
  const auto spans = word_token_spans(segment);
  for (size_t t = 0; t < spans.size(); ++t) {
    const auto& span = spans[t];
    const std::string word = segment.substr(span.begin, span.length);
    if (src_set.count(to_lower_ascii(word))) {
      out.append(segment, consumed, span.begin - consumed);
      const std::string& repl = t_dst[rng.uniform_index(t_dst.size())];
      out += repl;
      consumed = span.begin + span.length;
      pair.swap_log.push_back({t, span.begin, word, repl});
    }
  }
  out.append(segment, consumed, segment.size() - consumed);
  pair.s_prime = std::move(out);
  pair.gamma = static_cast<int>(pair.swap_log.size());
  if (pair.gamma < gamma_min) return std::nullopt;
  return pair;
}

// Re-applies a swap log to the original text; used to check that the pair
// differs exactly at the recorded positions.
inline std::string apply_swap_log(const std::string& s,
                                  const std::vector<SwapRecord>& log) {
  std::string out;
  size_t consumed = 0;
  for (const auto& swap : log) {
    out.append(s, consumed, swap.byte_offset - consumed);
    out += swap.replacement;
    consumed = swap.byte_offset + swap.original.size();
  }
  out.append(s, consumed, s.size() - consumed);
  return out;
}

struct MovementDelta {
  double delta_w = 0;
  double delta_m = 0;
  int repeats_used = 1;
};

// Embedding access for the sweep: attribute-word vectors are fetched once
// and reused; segment texts are fetched per repeat index.
class EmbedContext {
 public:
  EmbedContext(Provider& provider, EmbeddingCache& cache, int repeats)
      : provider_(provider), cache_(cache), repeats_(std::max(1, repeats)) {}

  int repeats() const { return repeats_; }
  Provider& provider() { return provider_; }
  EmbeddingCache& cache() { return cache_; }

  const EmbeddingVector& attribute_vector(const std::string& word) {
    auto it = attribute_vectors_.find(word);
    if (it != attribute_vectors_.end()) return it->second;
    auto vectors = cached_embed(provider_, cache_, {word}, 0);
    return attribute_vectors_.emplace(word, std::move(vectors.front()))
        .first->second;
  }

  // Mean over repeats of the summed cosine between `text` and each word.
  double mean_summed_cosine(const std::vector<std::string>& attribute_words,
                            const std::string& text) {
    double total = 0;
    for (int r = 0; r < repeats_; ++r) {
      const auto v = cached_embed(provider_, cache_, {text}, r).front();
      for (const auto& word : attribute_words)
        total += cosine(attribute_vector(word), v);
    }
    return total / static_cast<double>(repeats_);
  }

 private:
  Provider& provider_;
  EmbeddingCache& cache_;
  int repeats_;
  std::map<std::string, EmbeddingVector> attribute_vectors_;
};

// Movement of s' relative to s toward each attribute concept: the change
// in summed cosine similarity, repeat-averaged.
inline MovementDelta movement_deltas(const SegmentPair& pair,
                                     const WordLists& lists,
                                     EmbedContext& ctx) {
  MovementDelta delta;
  delta.repeats_used = ctx.repeats();
  delta.delta_w = ctx.mean_summed_cosine(lists.a_w, pair.s_prime) -
                  ctx.mean_summed_cosine(lists.a_w, pair.s);
  delta.delta_m = ctx.mean_summed_cosine(lists.a_m, pair.s_prime) -
                  ctx.mean_summed_cosine(lists.a_m, pair.s);
  return delta;
}

enum class CounterSemantics { Equation, Prose };

inline CounterSemantics counter_semantics_from_string(const std::string& s) {
  if (s == "equation") return CounterSemantics::Equation;
  if (s == "prose") return CounterSemantics::Prose;
  throw Error("semantics must be 'equation' or 'prose', got '" + s + "'");
}

inline std::string to_string(CounterSemantics s) {
  return s == CounterSemantics::Equation ? "equation" : "prose";
}

enum class CounterOutcome { IncrementW, IncrementM, Tie };

// Counter update rule. Equation semantics follows the piecewise definition
// literally: when both deltas are negative the *smaller* delta's counter is
// incremented. Prose semantics always increments the larger delta's counter
// ("moves less far" / "moves closer"). The two differ exactly on the
// both-negative, unequal case. Exact ties increment nothing.
inline CounterOutcome update_counters(const MovementDelta& delta,
                                      CounterSemantics semantics) {
  const double w = delta.delta_w;
  const double m = delta.delta_m;
  if (!(std::isfinite(w) && std::isfinite(m)))
    throw Error("update_counters: deltas must be finite");
  if (w == m) return CounterOutcome::Tie;
  if (semantics == CounterSemantics::Equation && w < 0 && m < 0)
    return w < m ? CounterOutcome::IncrementW : CounterOutcome::IncrementM;
  return w > m ? CounterOutcome::IncrementW : CounterOutcome::IncrementM;
}

struct DweatConfig {
  std::vector<double> taus = {20, 25, 30};
  std::vector<int> gammas = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  std::vector<uint64_t> seeds = {1, 2, 3, 4, 5};
  int repeats = 3;
  CounterSemantics semantics = CounterSemantics::Equation;
  size_t n_podcasts = 100;
  size_t segments_per_podcast = 3;
  size_t sentences_per_segment = 3;
};

struct DweatSeedCounts {
  uint64_t seed = 0;
  long c_w = 0;
  long c_m = 0;
  long ties = 0;
  long kept = 0;
};

struct DweatCell {
  std::string set;  // "S_w" or "S_m"
  double tau = 0;
  int gamma = 0;
  long c_w = 0;
  long c_m = 0;
  long ties = 0;
  long samples_kept = 0;
  long semantics_divergence = 0;  // pairs where equation and prose disagree
  long provider_errors = 0;
  std::optional<double> pct_w;    // seed-averaged; empty if no counted pairs
  std::optional<double> pct_m;
  std::vector<DweatSeedCounts> per_seed;
};

struct DweatReport {
  WordLists lists;
  DweatConfig config;
  std::vector<DweatCell> cells;  // S_w cells first, then S_m; tau-major
  std::vector<std::string> warnings;
};

namespace detail {

struct PairComputation {
  int gamma = 0;
  CounterOutcome equation = CounterOutcome::Tie;
  CounterOutcome prose = CounterOutcome::Tie;
  bool failed = false;
};

}  // namespace detail

// Full tau x gamma sweep over both sample sets. Swap direction: S_m
// segments swap t_m -> t_w, S_w segments swap t_w -> t_m. A segment pair
// enters every cell whose gamma does not exceed its swap count, so
// samples_kept is non-increasing in gamma by construction.
inline DweatReport run_sweep(const std::vector<EpisodeRecord>& records,
                             const WordLists& lists, EmbedContext& ctx,
                             const DweatConfig& config) {
  if (config.taus.empty() || config.gammas.empty())
    throw Error("run_sweep: tau and gamma grids must be non-empty");
  if (config.seeds.empty()) throw Error("run_sweep: need at least one seed");
  for (int g : config.gammas)
    if (g < 1) throw Error("run_sweep: gamma values must be >= 1");
  if (lists.t_w.empty() || lists.t_m.empty())
    throw Error("run_sweep: target word lists must be non-empty");

  DweatReport report;
  report.lists = lists;
  report.config = config;

  struct SeedAccum {
    std::map<uint64_t, DweatSeedCounts> by_seed;
    long divergence = 0;
    long provider_errors = 0;
  };
  // (set, tau, gamma) -> accumulators
  std::map<std::tuple<std::string, double, int>, SeedAccum> accum;
  for (const char* set : {"S_w", "S_m"})
    for (double tau : config.taus)
      for (int gamma : config.gammas) {
        auto& acc = accum[{set, tau, gamma}];
        for (uint64_t seed : config.seeds)
          acc.by_seed[seed] = DweatSeedCounts{seed, 0, 0, 0, 0};
      }

  std::set<std::string> warned;
  for (double tau : config.taus) {
    for (uint64_t seed : config.seeds) {
      const auto sets =
          build_sample_sets(records, tau, config.n_podcasts, seed);
      if (sets.shortfall_w || sets.shortfall_m) {
        std::string w = "tau " + fmt_double(tau) + ": fewer than " +
                        std::to_string(config.n_podcasts) +
                        " qualifying podcasts (S_w " +
                        std::to_string(sets.s_w.size()) + ", S_m " +
                        std::to_string(sets.s_m.size()) + ")";
        if (warned.insert(w).second) report.warnings.push_back(w);
      }

      struct SetPlan {
        const char* name;
        const std::vector<size_t>* samples;
        const std::vector<std::string>* t_src;
        const std::vector<std::string>* t_dst;
      };
      const SetPlan plans[2] = {
          {"S_w", &sets.s_w, &lists.t_w, &lists.t_m},
          {"S_m", &sets.s_m, &lists.t_m, &lists.t_w},
      };
      for (const auto& plan : plans) {
        for (size_t rec_index : *plan.samples) {
          const auto& rec = records[rec_index];
          const uint64_t episode_salt = stable_hash64(rec.episode_id);
          const auto segments = extract_segments(
              rec, config.segments_per_podcast, config.sentences_per_segment,
              Rng::derive(seed, {episode_salt, stable_hash64("segments")})
                  .next_u64());
          for (size_t si = 0; si < segments.size(); ++si) {
            const uint64_t swap_seed =
                Rng::derive(seed, {episode_salt, si, stable_hash64("swap")})
                    .next_u64();
            auto pair =
                swap_words(segments[si], *plan.t_src, *plan.t_dst, 1, swap_seed);
            if (!pair) continue;
            pair->episode_id = rec.episode_id;

            detail::PairComputation pc;
            pc.gamma = pair->gamma;
            try {
              const auto delta = movement_deltas(*pair, lists, ctx);
              pc.equation = update_counters(delta, CounterSemantics::Equation);
              pc.prose = update_counters(delta, CounterSemantics::Prose);
            } catch (const Error&) {
              pc.failed = true;
            }
            for (int gamma : config.gammas) {
              if (gamma > pc.gamma) continue;
              auto& acc = accum[{plan.name, tau, gamma}];
              if (pc.failed) {
                ++acc.provider_errors;
                continue;
              }
              auto& seed_counts = acc.by_seed[seed];
              ++seed_counts.kept;
              const CounterOutcome outcome =
                  config.semantics == CounterSemantics::Equation ? pc.equation
                                                                 : pc.prose;
              switch (outcome) {
                case CounterOutcome::IncrementW: ++seed_counts.c_w; break;
                case CounterOutcome::IncrementM: ++seed_counts.c_m; break;
                case CounterOutcome::Tie: ++seed_counts.ties; break;
              }
              if (pc.equation != pc.prose) ++acc.divergence;
            }
          }
        }
      }
    }
  }

  for (const char* set : {"S_w", "S_m"}) {
    for (double tau : config.taus) {
      for (int gamma : config.gammas) {
        const auto& acc = accum[{set, tau, gamma}];
        DweatCell cell;
        cell.set = set;
        cell.tau = tau;
        cell.gamma = gamma;
        cell.semantics_divergence = acc.divergence;
        cell.provider_errors = acc.provider_errors;
        double pct_w_sum = 0, pct_m_sum = 0;
        int counted_seeds = 0;
        for (uint64_t seed : config.seeds) {
          const auto& sc = acc.by_seed.at(seed);
          cell.c_w += sc.c_w;
          cell.c_m += sc.c_m;
          cell.ties += sc.ties;
          cell.samples_kept += sc.kept;
          cell.per_seed.push_back(sc);
          const long counted = sc.c_w + sc.c_m;
          if (counted > 0) {
            pct_w_sum += 100.0 * static_cast<double>(sc.c_w) /
                         static_cast<double>(counted);
            pct_m_sum += 100.0 * static_cast<double>(sc.c_m) /
                         static_cast<double>(counted);
            ++counted_seeds;
          }
        }
        if (counted_seeds > 0) {
          cell.pct_w = pct_w_sum / counted_seeds;
          cell.pct_m = pct_m_sum / counted_seeds;
        }
        report.cells.push_back(std::move(cell));
      }
    }
  }
  return report;
}

inline nlohmann::json dweat_report_to_json(const DweatReport& report) {
  nlohmann::json j;
  j["lists"] = word_lists_to_json(report.lists);
  j["config"] = {
      {"taus", report.config.taus},
      {"gammas", report.config.gammas},
      {"seeds", report.config.seeds},
      {"repeats", report.config.repeats},
      {"semantics", to_string(report.config.semantics)},
      {"n_podcasts", report.config.n_podcasts},
      {"segments_per_podcast", report.config.segments_per_podcast},
      {"sentences_per_segment", report.config.sentences_per_segment}};
  j["warnings"] = report.warnings;
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& cell : report.cells) {
    nlohmann::json c;
    c["set"] = cell.set;
    c["tau"] = cell.tau;
    c["gamma"] = cell.gamma;
    c["c_w"] = cell.c_w;
    c["c_m"] = cell.c_m;
    c["ties"] = cell.ties;
    c["samples_kept"] = cell.samples_kept;
    c["semantics_divergence"] = cell.semantics_divergence;
    c["provider_errors"] = cell.provider_errors;
    c["pct_w"] = cell.pct_w ? nlohmann::json(*cell.pct_w) : nlohmann::json();
    c["pct_m"] = cell.pct_m ? nlohmann::json(*cell.pct_m) : nlohmann::json();
    nlohmann::json per_seed = nlohmann::json::array();
    for (const auto& sc : cell.per_seed)
      per_seed.push_back({{"seed", sc.seed},
                          {"c_w", sc.c_w},
                          {"c_m", sc.c_m},
                          {"ties", sc.ties},
                          {"kept", sc.kept}});
    c["per_seed"] = std::move(per_seed);
    cells.push_back(std::move(c));
  }
  j["cells"] = std::move(cells);
  return j;
}

inline std::string dweat_report_csv(const DweatReport& report) {
  std::string out =
      "set,tau,gamma,samples_kept,c_w,c_m,ties,pct_w,pct_m,"
      "semantics_divergence\n";
  for (const auto& cell : report.cells) {
    out += csv_join({cell.set, fmt_double(cell.tau), std::to_string(cell.gamma),
                     std::to_string(cell.samples_kept), std::to_string(cell.c_w),
                     std::to_string(cell.c_m), std::to_string(cell.ties),
                     cell.pct_w ? fmt_double(*cell.pct_w) : "",
                     cell.pct_m ? fmt_double(*cell.pct_m) : "",
                     std::to_string(cell.semantics_divergence)});
  }
  return out;
}

}  // namespace discourse
