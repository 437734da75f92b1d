#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "discourse/dweat.hpp"
#include "helpers.hpp"

using namespace discourse;

namespace {

// Ranked topic word lists (top 10 plus deeper ranks used for refilling).
const std::vector<std::string> kMasculineRanked = {
    "going", "know", "think", "get",  "got",  "one",
    "really", "good", "well",  "yeah", "bit",  "week"};
const std::vector<std::string> kFeminineRanked = {
    "like",  "know", "really", "going", "people",    "want",  "think",
    "get",   "things", "life", "feel",  "time",      "something", "right"};

const DweatCell& find_cell(const DweatReport& report, const std::string& set,
                           double tau, int gamma) {
  for (const auto& cell : report.cells)
    if (cell.set == set && cell.tau == tau && cell.gamma == gamma) return cell;
  throw Error("cell not found");
}

struct SweepFixture {
  testing_helpers::TempDir dir{"dweat_sweep"};
  std::vector<EpisodeRecord> records;
  WordLists lists;
  std::unique_ptr<LocalProvider> provider;
  std::unique_ptr<EmbeddingCache> cache;

  explicit SweepFixture(size_t episodes = 60, bool adversarial = true) {
    records = testing_helpers::make_synthetic_corpus(episodes, 99);
    lists = default_attribute_lists();
    lists.t_w = {"like", "really", "people", "want",      "things",
                 "life", "feel",   "time",   "something", "right"};
    lists.t_m = {"going", "think", "get",  "got", "one",
                 "good",  "well",  "yeah", "bit", "week"};
    const auto vector_file = dir.path() / "vectors.txt";
    if (adversarial) {
      testing_helpers::write_adversarial_vector_file(vector_file, lists);
    } else {
      write_text_file(vector_file, "anchor 1 0 0\nother 0 1 0\n");
    }
    ProviderConfig cfg;
    cfg.kind = ProviderConfig::Kind::Local;
    cfg.vector_file = vector_file.string();
    cfg.cache_dir = (dir.path() / "cache").string();
    provider = std::make_unique<LocalProvider>(cfg);
    cache = std::make_unique<EmbeddingCache>(dir.path() / "cache");
  }
};

}  // namespace

TEST_CASE("overlap resolution reproduces the canonical target lists") {
  auto [t_w, t_m] = resolve_overlap(kFeminineRanked, kMasculineRanked, 10);
  CHECK(t_m == std::vector<std::string>{"going", "think", "get", "got", "one",
                                        "good", "well", "yeah", "bit", "week"});
  CHECK(t_w == std::vector<std::string>{"like", "really", "people", "want",
                                        "things", "life", "feel", "time",
                                        "something", "right"});
}

TEST_CASE("disjoint ranked lists pass through truncated") {
  auto [t_w, t_m] = resolve_overlap({"aa", "bb", "cc"}, {"dd", "ee", "ff"}, 2);
  CHECK(t_w == std::vector<std::string>{"aa", "bb"});
  CHECK(t_m == std::vector<std::string>{"dd", "ee"});
}

TEST_CASE("identical lists empty both sides and error") {
  CHECK_THROWS_WITH(resolve_overlap({"aa", "bb"}, {"aa", "bb"}, 2),
                    Catch::Matchers::ContainsSubstring("achievable: 0"));
}

TEST_CASE("same-rank collisions drop from both lists") {
  // "xx" at rank 0 in both: removed everywhere; "yy" cross-rank stays where
  // it occurs first (list_w rank 1 vs list_m rank 2)
  auto [t_w, t_m] = resolve_overlap({"xx", "yy", "zz"},
                                    {"xx", "qq", "yy", "rr"}, 2);
  CHECK(t_w == std::vector<std::string>{"yy", "zz"});
  CHECK(t_m == std::vector<std::string>{"qq", "rr"});
}

TEST_CASE("insufficient refill depth reports achievable length") {
  CHECK_THROWS_WITH(
      resolve_overlap({"aa", "bb"}, {"cc", "dd"}, 3),
      Catch::Matchers::ContainsSubstring("achievable: 2"));
}

TEST_CASE("sample sets respect the inclusive tau threshold") {
  std::vector<EpisodeRecord> records;
  auto add = [&](const std::string& id, double women, double men) {
    EpisodeRecord rec;
    rec.show_id = id;
    rec.episode_id = id;
    rec.transcript = "text";
    rec.gender_seconds = GenderSeconds{women, men, 0, 0, 0};
    records.push_back(rec);
  };
  add("at31", 30, 30.0 - 1e-9);
  add("at30", 30, 30);
  add("at29", 30, 29);
  add("nogender", 0, 0);
  records.back().gender_seconds.reset();

  auto sets = build_sample_sets(records, 30, 10, 1);
  REQUIRE(sets.s_m.size() == 1);
  CHECK(records[sets.s_m[0]].episode_id == "at30");
  CHECK(sets.shortfall_m);

  auto lower = build_sample_sets(records, 29, 10, 1);
  CHECK(lower.s_m.size() == 3);
  CHECK_THROWS_WITH(build_sample_sets(records, 31, 10, 1),
                    Catch::Matchers::ContainsSubstring("tau = 31"));
}

TEST_CASE("sampling is deterministic and without replacement") {
  auto records = testing_helpers::make_synthetic_corpus(80, 5);
  auto a = build_sample_sets(records, 20, 10, 42);
  auto b = build_sample_sets(records, 20, 10, 42);
  CHECK(a.s_w == b.s_w);
  CHECK(a.s_m == b.s_m);
  CHECK(a.s_w.size() == 10);
  CHECK_FALSE(a.shortfall_w);
  std::set<size_t> unique(a.s_w.begin(), a.s_w.end());
  CHECK(unique.size() == a.s_w.size());
  for (size_t idx : a.s_w) CHECK(records[idx].gender_seconds->women >= 20);

  auto c = build_sample_sets(records, 20, 10, 43);
  CHECK(a.s_w != c.s_w);  // overwhelmingly likely under a different seed
}

TEST_CASE("nine sentences force three disjoint covering windows") {
  EpisodeRecord rec;
  rec.episode_id = "e";
  rec.transcript =
      "One fox ran. Two dogs sat. Three cats played. Four birds flew. "
      "Five cows ate. Six pigs slept. Seven owls watched. Eight bees flew. "
      "Nine ants marched.";
  auto segments = extract_segments(rec, 3, 3, 7);
  REQUIRE(segments.size() == 3);
  std::string joined;
  for (const auto& s : segments) joined += s + " ";
  for (const char* word : {"fox", "dogs", "cats", "birds", "cows", "pigs",
                           "owls", "bees", "ants"})
    CHECK(joined.find(word) != std::string::npos);
}

TEST_CASE("short transcripts yield fewer or zero segments") {
  EpisodeRecord rec;
  rec.episode_id = "e";
  rec.transcript = "One sentence. And two.";
  CHECK(extract_segments(rec, 3, 3, 1).empty());
  rec.transcript = "One fox. Two dogs. Three cats. Four birds.";
  CHECK(extract_segments(rec, 3, 3, 1).size() == 1);
}

TEST_CASE("segment extraction is deterministic and non-overlapping") {
  Rng rng(12);
  for (int trial = 0; trial < 30; ++trial) {
    EpisodeRecord rec;
    rec.episode_id = "e" + std::to_string(trial);
    const size_t n = 3 + rng.uniform_index(20);
    std::string t;
    for (size_t i = 0; i < n; ++i) t += "Word number " + std::to_string(i) + ". ";
    rec.transcript = t;
    auto a = extract_segments(rec, 3, 3, trial);
    auto b = extract_segments(rec, 3, 3, trial);
    CHECK(a == b);
    CHECK(a.size() == std::min<size_t>(3, n / 3));
  }
}

TEST_CASE("swap replaces whole tokens case-insensitively") {
  const std::string segment = "And I was going, hey, it's cold outside...";
  auto pair = swap_words(segment, {"going"}, {"like"}, 1, 3);
  REQUIRE(pair.has_value());
  CHECK(pair->s_prime == "And I was like, hey, it's cold outside...");
  CHECK(pair->gamma == 1);
  REQUIRE(pair->swap_log.size() == 1);
  CHECK(pair->swap_log[0].original == "going");
  CHECK(pair->swap_log[0].replacement == "like");
}

TEST_CASE("every occurrence is replaced independently") {
  auto pair = swap_words("going going", {"going"}, {"like"}, 1, 5);
  REQUIRE(pair.has_value());
  CHECK(pair->s_prime == "like like");
  CHECK(pair->gamma == 2);
}

TEST_CASE("segments without source words are rejected, not errors") {
  CHECK_FALSE(swap_words("nothing to see here", {"going"}, {"like"}, 1, 1)
                  .has_value());
  // gamma_min 0 keeps the unchanged segment
  auto kept = swap_words("nothing here", {"going"}, {"like"}, 0, 1);
  REQUIRE(kept.has_value());
  CHECK(kept->s == kept->s_prime);
}

TEST_CASE("matching is whole-token and replacements are lowercase") {
  auto pair = swap_words("Going goings GOING", {"going"}, {"like"}, 1, 8);
  REQUIRE(pair.has_value());
  CHECK(pair->gamma == 2);  // "goings" untouched
  CHECK(pair->s_prime == "like goings like");
}

TEST_CASE("overlapping source and destination lists are rejected") {
  CHECK_THROWS_AS(swap_words("x", {"going", "well"}, {"well"}, 1, 1), Error);
  CHECK_THROWS_AS(swap_words("x", {}, {"well"}, 1, 1), Error);
}

TEST_CASE("swap log reapplication reproduces the swapped text exactly") {
  Rng rng(21);
  const std::vector<std::string> t_src = {"going", "think", "get"};
  const std::vector<std::string> t_dst = {"like", "really"};
  for (int trial = 0; trial < 50; ++trial) {
    std::string segment;
    for (int w = 0; w < 12; ++w) {
      const int pick = static_cast<int>(rng.uniform_index(6));
      const char* words[] = {"going", "think", "get", "home", "now", "Stop"};
      segment += words[pick];
      segment += rng.uniform_index(4) == 0 ? ", " : " ";
    }
    auto pair = swap_words(segment, t_src, t_dst, 0, 1000 + trial);
    REQUIRE(pair.has_value());
    CHECK(apply_swap_log(pair->s, pair->swap_log) == pair->s_prime);
    CHECK(pair->s == segment);
    if (pair->gamma == 0) CHECK(pair->s == pair->s_prime);
  }
}

TEST_CASE("movement deltas match direct cosine arithmetic") {
  testing_helpers::TempDir dir("dweat_toy");
  // s embeds to (1,0), s' to (0,1); all A_w words to (0,1), A_m to (1,0)
  std::string vectors = "sorig 1 0\nsprime 0 1\n";
  WordLists lists = default_attribute_lists();
  for (const auto& w : lists.a_w) vectors += w + " 0 1\n";
  for (const auto& w : lists.a_m) vectors += w + " 1 0\n";
  write_text_file(dir.path() / "v.txt", vectors);
  ProviderConfig cfg;
  cfg.vector_file = (dir.path() / "v.txt").string();
  LocalProvider provider(cfg);
  EmbeddingCache cache(dir.path() / "cache");
  EmbedContext ctx(provider, cache, 1);

  SegmentPair pair;
  pair.s = "sorig";
  pair.s_prime = "sprime";
  auto delta = movement_deltas(pair, lists, ctx);
  CHECK_THAT(delta.delta_w, Catch::Matchers::WithinAbs(8.0, 1e-12));
  CHECK_THAT(delta.delta_m, Catch::Matchers::WithinAbs(-8.0, 1e-12));

  // identical texts induce zero movement
  SegmentPair same;
  same.s = "sorig";
  same.s_prime = "sorig";
  auto zero = movement_deltas(same, lists, ctx);
  CHECK(zero.delta_w == 0.0);
  CHECK(zero.delta_m == 0.0);

  // a deterministic provider makes repeats coincide
  EmbedContext ctx3(provider, cache, 3);
  auto repeated = movement_deltas(pair, lists, ctx3);
  CHECK(repeated.repeats_used == 3);
  CHECK_THAT(repeated.delta_w, Catch::Matchers::WithinAbs(8.0, 1e-12));
}

namespace {

// Direct transcriptions of the published piecewise counter rules, used as
// the oracle for the exhaustive grid.
bool eq_increments_w(double dw, double dm) {
  if (dm > 0 && dw > 0 && dw > dm) return true;
  if (dm < 0 && dw < 0 && dw < dm) return true;
  if (!((dm > 0 && dw > 0) || (dm < 0 && dw < 0)) && dw > dm) return true;
  return false;
}
bool eq_increments_m(double dw, double dm) {
  if (dm > 0 && dw > 0 && dm > dw) return true;
  if (dm < 0 && dw < 0 && dm < dw) return true;
  if (!((dm > 0 && dw > 0) || (dm < 0 && dw < 0)) && dm > dw) return true;
  return false;
}

}  // namespace

TEST_CASE("counter logic matches the piecewise oracle exhaustively") {
  const std::vector<double> grid = {-0.7, -0.3, -0.1, 0.0, 0.1, 0.3, 0.7};
  int divergences = 0;
  for (double dw : grid) {
    for (double dm : grid) {
      MovementDelta delta{dw, dm, 1};
      const auto eq = update_counters(delta, CounterSemantics::Equation);
      const auto prose = update_counters(delta, CounterSemantics::Prose);

      // oracle for equation semantics
      if (dw == dm) {
        CHECK(eq == CounterOutcome::Tie);
      } else if (eq_increments_w(dw, dm)) {
        CHECK(eq == CounterOutcome::IncrementW);
      } else {
        CHECK(eq_increments_m(dw, dm));
        CHECK(eq == CounterOutcome::IncrementM);
      }

      // oracle for prose semantics: pure argmax
      if (dw == dm) {
        CHECK(prose == CounterOutcome::Tie);
      } else {
        CHECK(prose == (dw > dm ? CounterOutcome::IncrementW
                                : CounterOutcome::IncrementM));
      }

      if (eq != prose) {
        ++divergences;
        CHECK(dw < 0);
        CHECK(dm < 0);
        CHECK(dw != dm);
      }
    }
  }
  // every both-negative unequal pair diverges: 3 negatives -> 3*3-3 = 6
  CHECK(divergences == 6);
}

TEST_CASE("forced counter examples") {
  CHECK(update_counters({0.2, 0.1, 1}, CounterSemantics::Equation) ==
        CounterOutcome::IncrementW);
  CHECK(update_counters({0.2, 0.1, 1}, CounterSemantics::Prose) ==
        CounterOutcome::IncrementW);
  // the divergent case
  CHECK(update_counters({-0.3, -0.1, 1}, CounterSemantics::Equation) ==
        CounterOutcome::IncrementW);
  CHECK(update_counters({-0.3, -0.1, 1}, CounterSemantics::Prose) ==
        CounterOutcome::IncrementM);
  CHECK(update_counters({0.0, 0.0, 1}, CounterSemantics::Equation) ==
        CounterOutcome::Tie);
  CHECK_THROWS_AS(update_counters({std::nan(""), 0.1, 1},
                                  CounterSemantics::Equation),
                  Error);
}

TEST_CASE("sweep counters conserve and attrition is monotone in gamma") {
  SweepFixture fx;
  EmbedContext ctx(*fx.provider, *fx.cache, 2);
  DweatConfig cfg;
  cfg.taus = {20, 25, 30};
  cfg.gammas = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  cfg.seeds = {1, 2};
  cfg.n_podcasts = 100;
  cfg.repeats = 2;
  auto report = run_sweep(fx.records, fx.lists, ctx, cfg);

  REQUIRE(report.cells.size() == 2 * 3 * 10);
  for (const auto& cell : report.cells) {
    CHECK(cell.c_w + cell.c_m + cell.ties == cell.samples_kept);
    if (cell.pct_w) {
      CHECK(cell.pct_m.has_value());
      if (cell.ties == 0)
        CHECK_THAT(*cell.pct_w + *cell.pct_m,
                   Catch::Matchers::WithinAbs(100.0, 1e-9));
    }
  }
  for (const std::string set : {"S_w", "S_m"}) {
    for (double tau : cfg.taus) {
      for (int g = 2; g <= 10; ++g) {
        CHECK(find_cell(report, set, tau, g).samples_kept <=
              find_cell(report, set, tau, g - 1).samples_kept);
      }
    }
  }
}

TEST_CASE("sweep reports are deterministic") {
  DweatConfig cfg;
  cfg.taus = {20, 30};
  cfg.gammas = {1, 3, 6};
  cfg.seeds = {1, 2};
  cfg.n_podcasts = 40;
  cfg.repeats = 2;

  SweepFixture fx1;
  EmbedContext ctx1(*fx1.provider, *fx1.cache, cfg.repeats);
  auto a = run_sweep(fx1.records, fx1.lists, ctx1, cfg);
  SweepFixture fx2;
  EmbedContext ctx2(*fx2.provider, *fx2.cache, cfg.repeats);
  auto b = run_sweep(fx2.records, fx2.lists, ctx2, cfg);
  CHECK(dweat_report_to_json(a).dump() == dweat_report_to_json(b).dump());
  CHECK(dweat_report_csv(a) == dweat_report_csv(b));
}

TEST_CASE("adversarial provider drives every S_w segment toward the men concept") {
  SweepFixture fx;
  EmbedContext ctx(*fx.provider, *fx.cache, 1);
  DweatConfig cfg;
  cfg.taus = {20};
  cfg.gammas = {1, 3};
  cfg.seeds = {1};
  cfg.n_podcasts = 25;
  cfg.repeats = 1;
  auto report = run_sweep(fx.records, fx.lists, ctx, cfg);
  for (int gamma : {1, 3}) {
    const auto& sw = find_cell(report, "S_w", 20, gamma);
    REQUIRE(sw.samples_kept > 0);
    CHECK(sw.c_m == sw.samples_kept);
    CHECK(*sw.pct_m == 100.0);
    CHECK(*sw.pct_w == 0.0);
    const auto& sm = find_cell(report, "S_m", 20, gamma);
    REQUIRE(sm.samples_kept > 0);
    CHECK(sm.c_w == sm.samples_kept);
    CHECK(*sm.pct_w == 100.0);
  }
}

TEST_CASE("exchanging attribute, target and sample roles exchanges counters") {
  DweatConfig cfg;
  cfg.taus = {20, 25};
  cfg.gammas = {1, 2, 4};
  cfg.seeds = {1, 2};
  cfg.n_podcasts = 30;
  cfg.repeats = 1;

  SweepFixture fx;
  EmbedContext ctx(*fx.provider, *fx.cache, cfg.repeats);
  auto original = run_sweep(fx.records, fx.lists, ctx, cfg);

  // mirror: swap gender seconds in the corpus and every list role
  auto mirrored_records = fx.records;
  for (auto& rec : mirrored_records)
    if (rec.gender_seconds)
      std::swap(rec.gender_seconds->women, rec.gender_seconds->men);
  WordLists mirrored_lists;
  mirrored_lists.a_w = fx.lists.a_m;
  mirrored_lists.a_m = fx.lists.a_w;
  mirrored_lists.t_w = fx.lists.t_m;
  mirrored_lists.t_m = fx.lists.t_w;
  auto mirrored = run_sweep(mirrored_records, mirrored_lists, ctx, cfg);

  for (double tau : cfg.taus) {
    for (int gamma : cfg.gammas) {
      const auto& sw = find_cell(original, "S_w", tau, gamma);
      const auto& sm_mirror = find_cell(mirrored, "S_m", tau, gamma);
      CHECK(sw.c_w == sm_mirror.c_m);
      CHECK(sw.c_m == sm_mirror.c_w);
      CHECK(sw.ties == sm_mirror.ties);
      CHECK(sw.samples_kept == sm_mirror.samples_kept);
      const auto& sm = find_cell(original, "S_m", tau, gamma);
      const auto& sw_mirror = find_cell(mirrored, "S_w", tau, gamma);
      CHECK(sm.c_w == sw_mirror.c_m);
      CHECK(sm.c_m == sw_mirror.c_w);
    }
  }
}

TEST_CASE("word lists serialize with provenance and validate on load") {
  WordLists lists = default_attribute_lists();
  lists.t_w = {"like"};
  lists.t_m = {"going"};
  lists.provenance = "unit test";
  auto restored = word_lists_from_json(word_lists_to_json(lists));
  CHECK(restored.a_w == lists.a_w);
  CHECK(restored.t_m == lists.t_m);
  CHECK(restored.provenance == "unit test");

  auto bad = word_lists_to_json(lists);
  bad["t_m"] = {"like"};  // overlaps t_w
  CHECK_THROWS_WITH(word_lists_from_json(bad),
                    Catch::Matchers::ContainsSubstring("overlap"));
  bad["t_m"] = {"Going"};
  CHECK_THROWS_WITH(word_lists_from_json(bad),
                    Catch::Matchers::ContainsSubstring("lowercase"));
}

TEST_CASE("sweep validates its grids") {
  SweepFixture fx(10);
  EmbedContext ctx(*fx.provider, *fx.cache, 1);
  DweatConfig cfg;
  cfg.taus = {};
  CHECK_THROWS_AS(run_sweep(fx.records, fx.lists, ctx, cfg), Error);
  cfg = DweatConfig{};
  cfg.gammas = {0};
  CHECK_THROWS_AS(run_sweep(fx.records, fx.lists, ctx, cfg), Error);
  cfg = DweatConfig{};
  cfg.seeds = {};
  CHECK_THROWS_AS(run_sweep(fx.records, fx.lists, ctx, cfg), Error);
}
