#pragma once

#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "discourse/common.hpp"
#include "discourse/wordsets.hpp"

namespace discourse {

struct TokenizeConfig {
  bool lowercase = true;
  bool remove_stopwords = true;
  size_t min_token_length = 2;
  bool stem = false;
  // nullptr selects the bundled default list.
  const std::set<std::string>* stopwords = nullptr;
};

// Crude suffix stemmer: a fixed rule table, not a real lemmatizer.
inline std::string crude_stem(std::string token) {
  auto ends_with = [&](std::string_view suf) {
    return token.size() >= suf.size() &&
           std::string_view(token).substr(token.size() - suf.size()) == suf;
  };
  if (token.size() >= 5 && ends_with("ing")) {
    token.resize(token.size() - 3);
  } else if (token.size() >= 3 && ends_with("s") && !ends_with("ss")) {
    token.resize(token.size() - 1);
  }
  return token;
}

// Splits text into alphabetic tokens, then applies case folding, length,
// stopword and (optional) stemming rules. Token order is preserved.
inline std::vector<std::string> tokenize(std::string_view text,
                                         const TokenizeConfig& cfg = {}) {
  const std::set<std::string>& stop =
      cfg.stopwords ? *cfg.stopwords : default_stopwords();
  std::vector<std::string> out;
  size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && !is_ascii_alpha(text[i])) ++i;
    size_t j = i;
    while (j < text.size() && is_ascii_alpha(text[j])) ++j;
    if (j > i) {
      std::string tok(text.substr(i, j - i));
      if (cfg.lowercase) tok = to_lower_ascii(tok);
      if (tok.size() >= cfg.min_token_length &&
          (!cfg.remove_stopwords || !stop.count(tok))) {
        if (cfg.stem) tok = crude_stem(std::move(tok));
        out.push_back(std::move(tok));
      }
    }
    i = j;
  }
  return out;
}

// Byte range of one word occurrence: maximal runs of letters/apostrophes
// containing at least one letter. This is the token definition used for
// word swapping and for the offline embedding provider.
struct WordTokenSpan {
  size_t begin = 0;
  size_t length = 0;
};

inline std::vector<WordTokenSpan> word_token_spans(std::string_view text) {
  std::vector<WordTokenSpan> out;
  size_t i = 0;
  while (i < text.size()) {
    char c = text[i];
    if (is_ascii_alpha(c) || c == '\'') {
      size_t j = i;
      bool has_alpha = false;
      while (j < text.size() && (is_ascii_alpha(text[j]) || text[j] == '\'')) {
        has_alpha |= is_ascii_alpha(text[j]);
        ++j;
      }
      if (has_alpha) out.push_back({i, j - i});
      i = j;
    } else {
      ++i;
    }
  }
  return out;
}

inline std::vector<std::string> word_tokens(std::string_view text) {
  std::vector<std::string> out;
  for (const auto& span : word_token_spans(text))
    out.push_back(to_lower_ascii(text.substr(span.begin, span.length)));
  return out;
}

namespace detail {

// The word (letters and internal dots, e.g. "e.g") directly before
// position `pos`, lowercased without the trailing dot.
inline std::string word_before(std::string_view text, size_t pos) {
  size_t end = pos;
  size_t begin = end;
  while (begin > 0) {
    char c = text[begin - 1];
    if (is_ascii_alpha(c) || c == '.') {
      --begin;
    } else {
      break;
    }
  }
  std::string w = to_lower_ascii(text.substr(begin, end - begin));
  while (!w.empty() && w.back() == '.') w.pop_back();
  return w;
}

}  // namespace detail

// Rule-based sentence splitter: a sentence ends at . ! or ? followed by
// whitespace and an uppercase letter. Periods after known abbreviations
// do not split. Closing quotes/brackets may sit between the terminal
// punctuation and the whitespace.
inline std::vector<std::string> split_sentences(std::string_view text) {
  std::vector<std::string> sentences;
  size_t start = 0;
  size_t i = 0;
  auto flush = [&](size_t end) {
    std::string_view s = trim(text.substr(start, end - start));
    if (!s.empty()) sentences.emplace_back(s);
    start = end;
  };
  while (i < text.size()) {
    char c = text[i];
    if (c == '.' || c == '!' || c == '?') {
      if (c == '.' &&
          sentence_abbreviations().count(detail::word_before(text, i))) {
        ++i;
        continue;
      }
      size_t j = i + 1;
      while (j < text.size() &&
             (text[j] == '"' || text[j] == '\'' || text[j] == ')' ||
              text[j] == ']')) {
        ++j;
      }
      size_t ws = j;
      while (ws < text.size() &&
             std::isspace(static_cast<unsigned char>(text[ws]))) {
        ++ws;
      }
      if (ws > j && ws < text.size() && text[ws] >= 'A' && text[ws] <= 'Z') {
        flush(j);
        i = ws;
        continue;
      }
    }
    ++i;
  }
  flush(text.size());
  return sentences;
}

}  // namespace discourse
