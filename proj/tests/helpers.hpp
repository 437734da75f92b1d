#pragma once

// Shared fixtures for the test and acceptance suites: deterministic
// generated corpora and scratch directories.

#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "discourse/common.hpp"
#include "discourse/corpus.hpp"
#include "discourse/dweat.hpp"
#include "discourse/rng.hpp"
#include "discourse/topics.hpp"

namespace testing_helpers {

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("discourse_" + tag + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

struct PlantedCorpus {
  std::vector<discourse::EpisodeRecord> records;
  std::vector<int> planted_topic;                  // per record
  std::vector<std::set<std::string>> word_sets;    // per planted topic
};

// Disjoint-vocabulary mixture: every document draws all its tokens from
// one planted topic's word set.
inline PlantedCorpus make_planted_corpus(int n_topics, int words_per_topic,
                                         int n_docs, int tokens_per_doc,
                                         uint64_t seed) {
  static const char* prefixes[] = {"alpha",   "bravo",   "charlie", "delta",
                                   "echo",    "foxtrot", "golf",    "hotel"};
  PlantedCorpus corpus;
  std::vector<std::vector<std::string>> topic_words(n_topics);
  for (int t = 0; t < n_topics; ++t) {
    for (int w = 0; w < words_per_topic; ++w) {
      std::string word = prefixes[t % 8];
      word.push_back(static_cast<char>('a' + w / 26));
      word.push_back(static_cast<char>('a' + w % 26));
      topic_words[t].push_back(word);
    }
    corpus.word_sets.emplace_back(topic_words[t].begin(),
                                  topic_words[t].end());
  }
  discourse::Rng rng(seed);
  for (int d = 0; d < n_docs; ++d) {
    const int t = d % n_topics;
    std::string transcript;
    for (int i = 0; i < tokens_per_doc; ++i) {
      if (i) transcript.push_back(' ');
      transcript +=
          topic_words[t][rng.uniform_index(topic_words[t].size())];
    }
    discourse::EpisodeRecord rec;
    rec.show_id = "show" + std::to_string(d);
    rec.episode_id = "ep" + std::to_string(d);
    rec.transcript = transcript;
    rec.duration_minutes = 10;
    corpus.records.push_back(std::move(rec));
    corpus.planted_topic.push_back(t);
  }
  return corpus;
}

// Fraction of a fitted topic's top-5 words that fall in its best-matching
// planted word set; returns one purity per planted topic (best fitted
// match), so recovery means every entry >= the bar.
inline std::vector<double> planted_topic_purity(
    const discourse::TopicModel& model, const PlantedCorpus& corpus) {
  std::vector<double> best(corpus.word_sets.size(), 0.0);
  for (int t = 0; t < model.k; ++t) {
    const auto words = discourse::top_words(model, t, 5);
    for (size_t p = 0; p < corpus.word_sets.size(); ++p) {
      int hits = 0;
      for (const auto& w : words)
        if (corpus.word_sets[p].count(w)) ++hits;
      const double purity = static_cast<double>(hits) / words.size();
      if (purity > best[p]) best[p] = purity;
    }
  }
  return best;
}

// Synthetic podcast corpus for the D-WEAT and CLI paths. Women-sampled
// episodes speak in feminine target words, men-sampled episodes in
// masculine target words, with neutral filler in between; gender seconds
// are laid out so every tau in {20,25,30} has qualifiers.
inline std::vector<discourse::EpisodeRecord> make_synthetic_corpus(
    size_t n_episodes, uint64_t seed) {
  using discourse::EpisodeRecord;
  using discourse::GenderSeconds;
  const std::vector<std::string> feminine = {
      "like", "really", "people", "want",      "things",
      "life", "feel",   "time",   "something", "right"};
  const std::vector<std::string> masculine = {
      "going", "think", "get", "got", "one",
      "good",  "well",  "yeah", "bit", "week"};
  const std::vector<std::string> fillers = {
      "coffee", "garden", "music",  "travel", "story",
      "friend", "window", "orange", "river",  "cloud"};

  discourse::Rng rng(seed);
  std::vector<EpisodeRecord> records;
  for (size_t i = 0; i < n_episodes; ++i) {
    const bool women_side = i % 2 == 0;
    const auto& targets = women_side ? feminine : masculine;
    const size_t n_sentences = 12 + rng.uniform_index(10);
    std::string transcript;
    for (size_t s = 0; s < n_sentences; ++s) {
      // Sentences carry 0-4 target words so gamma attrition is gradual.
      const size_t n_targets = rng.uniform_index(5);
      std::string sentence = "She said";
      for (size_t t = 0; t < n_targets; ++t)
        sentence += " " + targets[rng.uniform_index(targets.size())];
      sentence += " " + fillers[rng.uniform_index(fillers.size())];
      sentence += " " + fillers[rng.uniform_index(fillers.size())];
      sentence += ".";
      if (!transcript.empty()) transcript.push_back(' ');
      transcript += sentence;
    }
    EpisodeRecord rec;
    rec.show_id = "show" + std::to_string(i);
    rec.episode_id = "ep" + std::to_string(1000 + i);
    rec.transcript = transcript;
    rec.duration_minutes = 10.0;
    rec.language = "en";
    GenderSeconds gs;
    // Half of each side meets tau=30 exactly; the rest spread over [20,29].
    const double strong = 30.0;
    const double weak = 20.0 + static_cast<double>(rng.uniform_index(10));
    const double seconds = (i / 2) % 2 == 0 ? strong : weak;
    if (women_side)
      gs.women = seconds;
    else
      gs.men = seconds;
    gs.music = 30.0 - seconds;
    rec.gender_seconds = gs;
    records.push_back(std::move(rec));
  }
  return records;
}

// Vector file where target words sit exactly on their attribute centroid:
// attribute and feminine-target words at e1, masculine-target words at e2,
// all filler words at e3. Swapping targets then provably moves a segment
// toward the other concept.
inline void write_adversarial_vector_file(const std::filesystem::path& path,
                                          const discourse::WordLists& lists) {
  std::string out;
  auto emit = [&](const std::string& word, int axis) {
    out += word;
    for (int d = 0; d < 8; ++d) out += d == axis ? " 1" : " 0";
    out.push_back('\n');
  };
  for (const auto& w : lists.a_w) emit(w, 0);
  for (const auto& w : lists.t_w) emit(w, 0);
  for (const auto& w : lists.a_m) emit(w, 1);
  for (const auto& w : lists.t_m) emit(w, 1);
  for (const std::string w : {"she", "said", "coffee", "garden", "music",
                              "travel", "story", "friend", "window", "orange",
                              "river", "cloud"}) {
    if (out.find(w + " ") == 0 || out.find("\n" + w + " ") != std::string::npos)
      continue;  // already written as an attribute/target word
    emit(w, 2);
  }
  discourse::write_text_file(path, out);
}

}  // namespace testing_helpers
