#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "discourse/common.hpp"
#include "discourse/csv.hpp"
#include "discourse/stats.hpp"
#include "discourse/topics.hpp"
#include "discourse/wordsets.hpp"

namespace discourse {

// Episode-by-feature matrix with per-cell missingness (NaN = missing).
class FeatureMatrix {
 public:
  explicit FeatureMatrix(std::vector<std::string> episode_ids)
      : episode_ids_(std::move(episode_ids)) {}

  static double missing() { return std::numeric_limits<double>::quiet_NaN(); }

  void add_feature(const std::string& name, std::vector<double> values) {
    if (values.size() != episode_ids_.size())
      throw Error("feature matrix: feature '" + name + "' has " +
                  std::to_string(values.size()) + " values, expected " +
                  std::to_string(episode_ids_.size()));
    for (const auto& n : names_)
      if (n == name)
        throw Error("feature matrix: duplicate feature name '" + name + "'");
    names_.push_back(name);
    columns_.push_back(std::move(values));
  }

  // Drops constant features (undefined correlation), recording a warning.
  void finalize() {
    std::vector<std::string> names;
    std::vector<std::vector<double>> columns;
    for (size_t f = 0; f < names_.size(); ++f) {
      bool has_two_values = false;
      std::optional<double> first;
      for (double v : columns_[f]) {
        if (std::isnan(v)) continue;
        if (!first) {
          first = v;
        } else if (v != *first) {
          has_two_values = true;
          break;
        }
      }
      if (has_two_values) {
        names.push_back(names_[f]);
        columns.push_back(std::move(columns_[f]));
      } else {
        warnings_.push_back("constant feature excluded: " + names_[f]);
      }
    }
    names_ = std::move(names);
    columns_ = std::move(columns);
  }

  const std::vector<std::string>& episode_ids() const { return episode_ids_; }
  const std::vector<std::string>& names() const { return names_; }
  const std::vector<double>& column(size_t f) const { return columns_[f]; }
  const std::vector<std::string>& warnings() const { return warnings_; }
  size_t feature_count() const { return names_.size(); }

 private:
  std::vector<std::string> episode_ids_;
  std::vector<std::string> names_;
  std::vector<std::vector<double>> columns_;
  std::vector<std::string> warnings_;
};

struct SignificanceConfig {
  double alpha0 = 0.05;
  double min_abs_r = 0.1;
};

struct CorrelationResult {
  std::string feature_a;
  std::string feature_b;
  double r = 0;
  long n = 0;
  double p = 1;
  bool significant = false;
  bool passed_r_filter = false;
  std::string skip_reason;  // non-empty when the pair could not be tested

  bool skipped() const { return !skip_reason.empty(); }
};

struct CorrelationSweep {
  long z = 0;                 // number of simultaneous tests, C(F,2)
  double alpha_corrected = 0; // alpha0 / z
  std::vector<CorrelationResult> results;
};

// Tests all feature pairs under a Bonferroni-corrected alpha. Pairs that
// cannot be tested (too few paired observations, constant after pairwise
// deletion) become skipped entries rather than aborting the sweep. Results
// are sorted by |r| descending.
inline CorrelationSweep significant_pairs(const FeatureMatrix& m,
                                          const SignificanceConfig& cfg = {}) {
  const size_t F = m.feature_count();
  if (F < 2) throw Error("significant_pairs: need at least 2 features");
  CorrelationSweep sweep;
  sweep.z = static_cast<long>(F) * static_cast<long>(F - 1) / 2;
  sweep.alpha_corrected = cfg.alpha0 / static_cast<double>(sweep.z);

  for (size_t a = 0; a < F; ++a) {
    for (size_t b = a + 1; b < F; ++b) {
      CorrelationResult res;
      res.feature_a = m.names()[a];
      res.feature_b = m.names()[b];
      // pairwise deletion
      std::vector<double> x, y;
      const auto& ca = m.column(a);
      const auto& cb = m.column(b);
      for (size_t i = 0; i < ca.size(); ++i) {
        if (!std::isnan(ca[i]) && !std::isnan(cb[i])) {
          x.push_back(ca[i]);
          y.push_back(cb[i]);
        }
      }
      res.n = static_cast<long>(x.size());
      if (res.n < 3) {
        res.skip_reason = "fewer than 3 paired observations";
      } else {
        try {
          res.r = pearson_r(x, y);
          res.p = p_value(res.r, res.n);
          res.significant = res.p <= sweep.alpha_corrected;
          res.passed_r_filter = std::fabs(res.r) > cfg.min_abs_r;
        } catch (const Error& e) {
          res.skip_reason = e.what();
        }
      }
      sweep.results.push_back(std::move(res));
    }
  }
  std::stable_sort(sweep.results.begin(), sweep.results.end(),
                   [](const CorrelationResult& a, const CorrelationResult& b) {
                     if (a.skipped() != b.skipped()) return !a.skipped();
                     if (a.skipped()) {
                       return std::tie(a.feature_a, a.feature_b) <
                              std::tie(b.feature_a, b.feature_b);
                     }
                     if (std::fabs(a.r) != std::fabs(b.r))
                       return std::fabs(a.r) > std::fabs(b.r);
                     return std::tie(a.feature_a, a.feature_b) <
                            std::tie(b.feature_a, b.feature_b);
                   });
  return sweep;
}

inline std::string correlation_csv(const CorrelationSweep& sweep) {
  std::string out = "feature_a,feature_b,r,n,p,significant,passed_r_filter\n";
  for (const auto& res : sweep.results) {
    out += csv_join({res.feature_a, res.feature_b,
                     res.skipped() ? "" : fmt_double(res.r),
                     std::to_string(res.n),
                     res.skipped() ? "" : fmt_double(res.p),
                     res.significant ? "true" : "false",
                     res.passed_r_filter ? "true" : "false"});
  }
  return out;
}

enum class GenderLabel { Women, Men, Unlabeled };

inline std::string to_string(GenderLabel g) {
  switch (g) {
    case GenderLabel::Women: return "Women";
    case GenderLabel::Men: return "Men";
    default: return "Unlabeled";
  }
}

// Labels each topic feature with the gender whose correlation is
// significant, positive and passes the |r| filter. If both genders
// qualify, the larger |r| wins.
inline std::map<std::string, GenderLabel> assign_topic_gender(
    const CorrelationSweep& sweep, const std::string& women_feature,
    const std::string& men_feature,
    const std::vector<std::string>& topic_features) {
  // index results by unordered pair
  std::map<std::pair<std::string, std::string>, const CorrelationResult*> by_pair;
  bool saw_women = false, saw_men = false;
  for (const auto& res : sweep.results) {
    by_pair[{res.feature_a, res.feature_b}] = &res;
    by_pair[{res.feature_b, res.feature_a}] = &res;
    saw_women |= res.feature_a == women_feature || res.feature_b == women_feature;
    saw_men |= res.feature_a == men_feature || res.feature_b == men_feature;
  }
  if (!saw_women || !saw_men)
    throw Error("assign_topic_gender: gender feature '" +
                (saw_women ? men_feature : women_feature) +
                "' absent from the correlation results");

  auto qualifying_r = [&](const std::string& topic,
                          const std::string& gender) -> std::optional<double> {
    auto it = by_pair.find({topic, gender});
    if (it == by_pair.end() || it->second->skipped()) return std::nullopt;
    const auto& res = *it->second;
    if (res.significant && res.passed_r_filter && res.r > 0) return res.r;
    return std::nullopt;
  };

  std::map<std::string, GenderLabel> labels;
  for (const auto& topic : topic_features) {
    const auto rw = qualifying_r(topic, women_feature);
    const auto rm = qualifying_r(topic, men_feature);
    if (rw && rm) {
      // Should not happen when the gender features anticorrelate; guard
      // by labeling with the stronger association.
      if (*rw == *rm)
        labels[topic] = GenderLabel::Unlabeled;
      else
        labels[topic] = *rw > *rm ? GenderLabel::Women : GenderLabel::Men;
    } else if (rw) {
      labels[topic] = GenderLabel::Women;
    } else if (rm) {
      labels[topic] = GenderLabel::Men;
    } else {
      labels[topic] = GenderLabel::Unlabeled;
    }
  }
  return labels;
}

enum class TopicCategory { Content, Discourse, Language };

inline std::string to_string(TopicCategory c) {
  switch (c) {
    case TopicCategory::Content: return "content";
    case TopicCategory::Discourse: return "discourse";
    default: return "language";
  }
}

inline TopicCategory topic_category_from_string(const std::string& s) {
  if (s == "content") return TopicCategory::Content;
  if (s == "discourse") return TopicCategory::Discourse;
  if (s == "language") return TopicCategory::Language;
  throw Error("topic label: unknown category '" + s +
              "' (expected content|discourse|language)");
}

struct TopicLabel {
  TopicCategory category = TopicCategory::Content;
  std::string caption;
};

// Topic label CSV: topic_id,category[,caption]
inline std::map<int, TopicLabel> read_topic_labels(const CsvTable& table) {
  if (table.header.size() < 2 || table.header[0] != "topic_id" ||
      table.header[1] != "category")
    throw Error("topic labels: header must be topic_id,category[,caption]");
  std::map<int, TopicLabel> labels;
  for (const auto& row : table.rows) {
    if (row.size() < 2) throw Error("topic labels: row with too few cells");
    TopicLabel label;
    label.category = topic_category_from_string(row[1]);
    if (row.size() > 2) label.caption = row[2];
    labels[std::stoi(row[0])] = label;
  }
  return labels;
}

struct DomainDiscourseRow {
  std::string content_topic;
  std::string discourse_topic;
  GenderLabel discourse_gender = GenderLabel::Unlabeled;
  double r = 0;
  // Direction implied by the sign of r and the discourse topic's gender.
  bool masculine = false;
};

struct DomainDiscourseReport {
  std::vector<DomainDiscourseRow> rows;
  // Per content topic: cumulative flags over its rows.
  std::map<std::string, std::pair<bool, bool>> flags;  // (masculine, feminine)
};

// Builds the content-topic x gendered-discourse-topic report from the
// significant, filter-passing pairs.
inline DomainDiscourseReport domain_discourse_report(
    const CorrelationSweep& sweep,
    const std::map<std::string, TopicCategory>& categories,
    const std::map<std::string, GenderLabel>& genders,
    const std::vector<std::string>& topic_features) {
  std::vector<std::string> unlabeled;
  for (const auto& t : topic_features)
    if (!categories.count(t)) unlabeled.push_back(t);
  if (!unlabeled.empty()) {
    std::string list;
    for (const auto& t : unlabeled) {
      if (!list.empty()) list += ", ";
      list += t;
    }
    throw Error("domain_discourse_report: missing category labels for: " + list);
  }

  auto category_of = [&](const std::string& f) -> std::optional<TopicCategory> {
    auto it = categories.find(f);
    if (it == categories.end()) return std::nullopt;
    return it->second;
  };

  DomainDiscourseReport report;
  for (const auto& res : sweep.results) {
    if (res.skipped() || !res.significant || !res.passed_r_filter) continue;
    const auto ca = category_of(res.feature_a);
    const auto cb = category_of(res.feature_b);
    if (!ca || !cb) continue;
    std::string content, discourse;
    if (*ca == TopicCategory::Content && *cb == TopicCategory::Discourse) {
      content = res.feature_a;
      discourse = res.feature_b;
    } else if (*ca == TopicCategory::Discourse && *cb == TopicCategory::Content) {
      content = res.feature_b;
      discourse = res.feature_a;
    } else {
      continue;
    }
    auto git = genders.find(discourse);
    if (git == genders.end() || git->second == GenderLabel::Unlabeled) continue;

    DomainDiscourseRow row;
    row.content_topic = content;
    row.discourse_topic = discourse;
    row.discourse_gender = git->second;
    row.r = res.r;
    row.masculine = (git->second == GenderLabel::Men && res.r > 0) ||
                    (git->second == GenderLabel::Women && res.r < 0);
    auto& flags = report.flags[content];
    (row.masculine ? flags.first : flags.second) = true;
    report.rows.push_back(std::move(row));
  }
  return report;
}

// Advisory heuristic: a topic looks like discourse when most of its top
// words come from the bundled discourse lexicon.
inline std::map<int, TopicCategory> suggest_topic_categories(
    const TopicModel& model, int top_n = 10, int discourse_threshold = 7) {
  std::map<int, TopicCategory> out;
  for (int t = 0; t < model.k; ++t) {
    int hits = 0;
    for (const auto& w : top_words(model, t, top_n))
      if (discourse_lexicon().count(w)) ++hits;
    out[t] = hits >= discourse_threshold ? TopicCategory::Discourse
                                         : TopicCategory::Content;
  }
  return out;
}

}  // namespace discourse
