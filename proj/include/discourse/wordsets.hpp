#pragma once

#include <set>
#include <string>

namespace discourse {

// Default English stopword list (classic 127-word list used by most
// bag-of-words pipelines).
inline const std::set<std::string>& default_stopwords() {
  static const std::set<std::string> words = {
      "i",          "me",       "my",      "myself",  "we",       "our",
      "ours",       "ourselves", "you",    "your",    "yours",    "yourself",
      "yourselves", "he",       "him",     "his",     "himself",  "she",
      "her",        "hers",     "herself", "it",      "its",      "itself",
      "they",       "them",     "their",   "theirs",  "themselves", "what",
      "which",      "who",      "whom",    "this",    "that",     "these",
      "those",      "am",       "is",      "are",     "was",      "were",
      "be",         "been",     "being",   "have",    "has",      "had",
      "having",     "do",       "does",    "did",     "doing",    "a",
      "an",         "the",      "and",     "but",     "if",       "or",
      "because",    "as",       "until",   "while",   "of",       "at",
      "by",         "for",      "with",    "about",   "against",  "between",
      "into",       "through",  "during",  "before",  "after",    "above",
      "below",      "to",       "from",    "up",      "down",     "in",
      "out",        "on",       "off",     "over",    "under",    "again",
      "further",    "then",     "once",    "here",    "there",    "when",
      "where",      "why",      "how",     "all",     "any",      "both",
      "each",       "few",      "more",    "most",    "other",    "some",
      "such",       "no",       "nor",     "not",     "only",     "own",
      "same",       "so",       "than",    "too",     "very",     "s",
      "t",          "can",      "will",    "just",    "don",      "should",
      "now"};
  return words;
}

// Lexicon of fillers, discourse markers and other style words, used by
// the advisory topic-category suggester.
inline const std::set<std::string>& discourse_lexicon() {
  static const std::set<std::string> words = {
      "like",     "know",      "yeah",     "right",    "going",   "think",
      "get",      "got",       "well",     "really",   "one",     "good",
      "oh",       "okay",      "ok",       "mean",     "kind",    "sort",
      "actually", "basically", "literally", "say",     "said",    "says",
      "thing",    "things",    "stuff",    "want",     "people",  "time",
      "um",       "uh",        "gonna",    "wanna",    "lot",     "way",
      "make",     "something", "anything", "everything", "bit",   "little",
      "much",     "see",       "look",     "come",     "go",      "maybe",
      "probably", "also",      "still",    "let",      "us",      "would",
      "man",      "guys",      "feel",     "life",     "back",    "even",
      "talk",     "podcast",   "week",     "anyways",  "anyway",  "obviously"};
  return words;
}

// Abbreviations that do not end a sentence when followed by a period.
// Stored lowercase, without the trailing period.
inline const std::set<std::string>& sentence_abbreviations() {
  static const std::set<std::string> words = {
      "mr",   "mrs",  "ms",   "dr",   "prof", "sr",    "jr",   "st",
      "vs",   "etc",  "e.g",  "i.e",  "inc",  "ltd",   "co",   "corp",
      "mt",   "ft",   "gen",  "rep",  "sen",  "gov",   "capt", "sgt",
      "col",  "approx", "dept", "univ", "assn", "no",   "vol",  "fig",
      "u.s",  "u.k",  "a.m",  "p.m"};
  return words;
}

}  // namespace discourse
