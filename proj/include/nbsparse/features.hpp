#pragma once

// Tweet featurizer. One row per tweet, columns in fixed order:
//
//   Constant, Followers, Length, Http, SelfRef, <figure topics>, <issue topics>
//
// Figure patterns match the raw text case-sensitively; issue patterns match
// the ASCII-lowercased text. The author's own figure topic never fires as a
// topic; it sets SelfRef instead.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "nbsparse/dataset.hpp"
#include "nbsparse/error.hpp"

namespace nbsparse {

struct TweetRecord {
  std::string id;
  std::int64_t timestamp = 0;  // seconds since 1970-01-01T00:00:00Z
  std::string text;
  std::uint64_t likes = 0;
  std::string author;
};

/// Follower counts over time, per author, timestamps strictly increasing.
class FollowerSeries {
 public:
  void add(const std::string& author, std::int64_t timestamp, double count) {
    if (!(count >= 0.0)) throw ContractViolation("FollowerSeries: negative count for " + author);
    auto& s = series_[author];
    if (!s.empty() && timestamp <= s.back().first) {
      throw ContractViolation("FollowerSeries: timestamps for " + author + " must be strictly increasing");
    }
    s.emplace_back(timestamp, count);
  }

  /// Count at the latest observation not after `timestamp`.
  std::optional<double> at(const std::string& author, std::int64_t timestamp) const {
    const auto it = series_.find(author);
    if (it == series_.end()) return std::nullopt;
    const auto& s = it->second;
    auto pos = std::upper_bound(s.begin(), s.end(), timestamp,
                                [](std::int64_t t, const std::pair<std::int64_t, double>& e) { return t < e.first; });
    if (pos == s.begin()) return std::nullopt;
    return std::prev(pos)->second;
  }

  bool empty() const noexcept { return series_.empty(); }

 private:
  std::map<std::string, std::vector<std::pair<std::int64_t, double>>> series_;
};

struct Topic {
  std::string name;
  std::vector<std::string> patterns;
};

/// The 127-word English stop list used for tweet length.
inline const std::vector<std::string>& default_stopwords() {
  static const std::vector<std::string> words = {
      "i",       "me",       "my",      "myself",  "we",         "our",     "ours",    "ourselves", "you",
      "your",    "yours",    "yourself", "yourselves", "he",     "him",     "his",     "himself",   "she",
      "her",     "hers",     "herself", "it",      "its",        "itself",  "they",    "them",      "their",
      "theirs",  "themselves", "what",  "which",   "who",        "whom",    "this",    "that",      "these",
      "those",   "am",       "is",      "are",     "was",        "were",    "be",      "been",      "being",
      "have",    "has",      "had",     "having",  "do",         "does",    "did",     "doing",     "a",
      "an",      "the",      "and",     "but",     "if",         "or",      "because", "as",        "until",
      "while",   "of",       "at",      "by",      "for",        "with",    "about",   "against",   "between",
      "into",    "through",  "during",  "before",  "after",      "above",   "below",   "to",        "from",
      "up",      "down",     "in",      "out",     "on",         "off",     "over",    "under",     "again",
      "further", "then",     "once",    "here",    "there",      "when",    "where",   "why",       "how",
      "all",     "any",      "both",    "each",    "few",        "more",    "most",    "other",     "some",
      "such",    "no",       "nor",     "not",     "only",       "own",     "same",    "so",        "than",
      "too",     "very",     "s",       "t",       "can",        "will",    "just",    "don",       "should",
      "now"};
  return words;
}

struct TopicLexicon {
  std::vector<Topic> figures;  // case-sensitive patterns
  std::vector<Topic> issues;   // lowercase patterns, matched against lowercased text
  std::map<std::string, std::string> self_topics;  // author -> own figure topic
  std::vector<std::string> stopwords = default_stopwords();

  void validate() const {
    std::vector<std::string> names;
    for (const auto* group : {&figures, &issues}) {
      for (const auto& t : *group) {
        if (t.name.empty()) throw ContractViolation("TopicLexicon: empty topic name");
        if (t.patterns.empty()) throw ContractViolation("TopicLexicon: topic " + t.name + " has no patterns");
        for (const auto& p : t.patterns) {
          if (p.empty()) throw ContractViolation("TopicLexicon: topic " + t.name + " has an empty pattern");
        }
        if (std::find(names.begin(), names.end(), t.name) != names.end()) {
          throw ContractViolation("TopicLexicon: duplicate topic " + t.name);
        }
        names.push_back(t.name);
      }
    }
    for (const auto& [author, topic] : self_topics) {
      const bool known = std::any_of(figures.begin(), figures.end(), [&](const Topic& t) { return t.name == topic; });
      if (!known) throw ContractViolation("TopicLexicon: author " + author + " maps to unknown figure " + topic);
    }
  }

  /// The figure topic naming `author`, if any.
  std::optional<std::string> self_topic(const std::string& author) const {
    if (auto it = self_topics.find(author); it != self_topics.end()) return it->second;
    for (const auto& t : figures) {
      if (t.name == author) return t.name;
    }
    return std::nullopt;
  }
};

struct TopicLabels {
  std::vector<int> figures;
  std::vector<int> issues;
  int self_reference = 0;
};

struct ControlFeatures {
  double followers = 0.0;
  std::size_t length = 0;
  int has_link = 0;
  int self_reference = 0;
};

struct DesignResult {
  Dataset data;
  std::vector<std::string> dropped;  // constant columns removed from the full schema
  std::vector<std::string> schema;   // full declared column order before dropping
};

enum class ScalingPolicy {
  Standardize,   // followers / 1e7, then every non-intercept column to mean 0, sd 1
  FollowersOnly, // followers / 1e7 only
  None,
};

inline constexpr double kFollowerDivisor = 1e7;

namespace detail {

inline std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

inline bool any_occurs(const std::string& text, const std::vector<std::string>& patterns) {
  return std::any_of(patterns.begin(), patterns.end(),
                     [&](const std::string& p) { return text.find(p) != std::string::npos; });
}

/// Decodes one UTF-8 code point at `pos`, advancing it. Malformed bytes
/// decode as themselves.
inline char32_t next_code_point(std::string_view s, std::size_t& pos) {
  const auto b0 = static_cast<unsigned char>(s[pos]);
  std::size_t len = b0 < 0x80 ? 1 : (b0 >> 5) == 0x6 ? 2 : (b0 >> 4) == 0xE ? 3 : (b0 >> 3) == 0x1E ? 4 : 1;
  if (pos + len > s.size()) len = 1;
  char32_t cp = len == 1 ? b0 : len == 2 ? (b0 & 0x1F) : len == 3 ? (b0 & 0x0F) : (b0 & 0x07);
  for (std::size_t k = 1; k < len; ++k) {
    const auto b = static_cast<unsigned char>(s[pos + k]);
    if ((b & 0xC0) != 0x80) {
      len = 1;
      cp = b0;
      break;
    }
    cp = (cp << 6) | (b & 0x3F);
  }
  pos += len;
  return cp;
}

inline bool is_unicode_space(char32_t c) {
  return (c >= 0x09 && c <= 0x0D) || c == 0x20 || c == 0x85 || c == 0xA0 || c == 0x1680 ||
         (c >= 0x2000 && c <= 0x200A) || c == 0x2028 || c == 0x2029 || c == 0x202F || c == 0x205F || c == 0x3000;
}

inline bool is_punctuation(char32_t c) {
  if (c < 0x80) {
    return (c >= 0x21 && c <= 0x2F) || (c >= 0x3A && c <= 0x40) || (c >= 0x5B && c <= 0x60) ||
           (c >= 0x7B && c <= 0x7E);
  }
  return c == 0xA1 || c == 0xA7 || c == 0xAB || c == 0xB6 || c == 0xB7 || c == 0xBB || c == 0xBF ||
         (c >= 0x2010 && c <= 0x2027) || (c >= 0x2030 && c <= 0x205E) || (c >= 0x3001 && c <= 0x3003) ||
         (c >= 0x3008 && c <= 0x3011) || (c >= 0xFF01 && c <= 0xFF0F) || c == 0x2E2E;
}

inline const std::regex& url_pattern() {
  static const std::regex re(R"(https?://\S+)", std::regex::icase);
  return re;
}

}  // namespace detail

inline bool contains_link(const std::string& text) { return std::regex_search(text, detail::url_pattern()); }

/// Tokens of `text` split on Unicode whitespace with leading and trailing
/// punctuation stripped; empty tokens and URLs are dropped.
inline std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> tokens;
  std::vector<std::pair<std::size_t, std::size_t>> spans;  // byte ranges of code points in the current token
  auto flush = [&] {
    std::size_t first = 0, last = spans.size();
    // strip punctuation from both ends
    auto punct_at = [&](std::size_t k) {
      std::size_t pos = spans[k].first;
      return detail::is_punctuation(detail::next_code_point(text, pos));
    };
    while (first < last && punct_at(first)) ++first;
    while (last > first && punct_at(last - 1)) --last;
    if (first < last) {
      const std::string raw = text.substr(spans.front().first, spans.back().second - spans.front().first);
      if (!std::regex_search(raw, detail::url_pattern())) {
        tokens.push_back(text.substr(spans[first].first, spans[last - 1].second - spans[first].first));
      }
    }
    spans.clear();
  };
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t start = pos;
    const char32_t c = detail::next_code_point(text, pos);
    if (detail::is_unicode_space(c)) {
      flush();
    } else {
      spans.emplace_back(start, pos);
    }
  }
  flush();
  return tokens;
}

/// Token count after stop-word removal (stop words compared case-insensitively).
inline std::size_t content_length(const std::string& text, const std::vector<std::string>& stopwords) {
  std::size_t n = 0;
  for (const auto& tok : tokenize(text)) {
    const auto low = detail::ascii_lower(tok);
    if (std::find(stopwords.begin(), stopwords.end(), low) == stopwords.end()) ++n;
  }
  return n;
}

inline TopicLabels label_topics(const std::string& text, const TopicLexicon& lexicon,
                                const std::optional<std::string>& self_topic = std::nullopt) {
  TopicLabels out;
  const std::string lower = detail::ascii_lower(text);
  for (const auto& t : lexicon.figures) {
    const int hit = detail::any_occurs(text, t.patterns) ? 1 : 0;
    if (self_topic && t.name == *self_topic) {
      out.self_reference = hit;
      out.figures.push_back(0);
    } else {
      out.figures.push_back(hit);
    }
  }
  for (const auto& t : lexicon.issues) out.issues.push_back(detail::any_occurs(lower, t.patterns) ? 1 : 0);
  return out;
}

inline ControlFeatures control_features(const TweetRecord& rec, const FollowerSeries& series,
                                        const TopicLexicon& lexicon) {
  ControlFeatures c;
  const auto followers = series.at(rec.author, rec.timestamp);
  if (!followers) {
    throw ContractViolation("control_features: no follower observation at or before record " + rec.id);
  }
  c.followers = *followers;
  c.length = content_length(rec.text, lexicon.stopwords);
  c.has_link = contains_link(rec.text) ? 1 : 0;
  c.self_reference = label_topics(rec.text, lexicon, lexicon.self_topic(rec.author)).self_reference;
  return c;
}

inline DesignResult build_design(const std::vector<TweetRecord>& records, const FollowerSeries& series,
                                 const TopicLexicon& lexicon, ScalingPolicy policy = ScalingPolicy::Standardize) {
  if (records.empty()) throw ContractViolation("empty corpus");
  lexicon.validate();
  const std::string& author = records.front().author;
  for (const auto& r : records) {
    if (r.author != author) {
      throw ContractViolation("build_design: mixed authors (" + author + ", " + r.author + "); fit one author at a time");
    }
  }
  const auto self = lexicon.self_topic(author);

  std::vector<std::string> schema = {"Constant", "Followers", "Length", "Http", "SelfRef"};
  for (const auto& t : lexicon.figures) schema.push_back(t.name);
  for (const auto& t : lexicon.issues) schema.push_back(t.name);

  const auto n = static_cast<Eigen::Index>(records.size());
  const auto full_p = static_cast<Eigen::Index>(schema.size());
  Eigen::MatrixXd full(n, full_p);
  Eigen::VectorXd y(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto& rec = records[static_cast<std::size_t>(j)];
    const ControlFeatures c = control_features(rec, series, lexicon);
    const TopicLabels labels = label_topics(rec.text, lexicon, self);
    full(j, 0) = 1.0;
    full(j, 1) = c.followers;
    full(j, 2) = static_cast<double>(c.length);
    full(j, 3) = c.has_link;
    full(j, 4) = labels.self_reference;
    Eigen::Index col = 5;
    for (int b : labels.figures) full(j, col++) = b;
    for (int b : labels.issues) full(j, col++) = b;
    y[j] = static_cast<double>(rec.likes);
  }

  std::vector<Eigen::Index> keep = {0};
  std::vector<std::string> names = {schema[0]}, dropped;
  for (Eigen::Index c = 1; c < full_p; ++c) {
    const bool constant = (full.col(c).array() == full(0, c)).all();
    if (constant) {
      dropped.push_back(schema[static_cast<std::size_t>(c)]);
    } else {
      keep.push_back(c);
      names.push_back(schema[static_cast<std::size_t>(c)]);
    }
  }
  Eigen::MatrixXd X(n, static_cast<Eigen::Index>(keep.size()));
  std::vector<ColumnScaling> scaling(keep.size());
  for (std::size_t k = 0; k < keep.size(); ++k) {
    X.col(static_cast<Eigen::Index>(k)) = full.col(keep[k]);
    if (keep[k] == 1 && policy != ScalingPolicy::None) {
      X.col(static_cast<Eigen::Index>(k)) /= kFollowerDivisor;
      scaling[k] = ColumnScaling{1.0 / kFollowerDivisor, 0.0};
    }
  }
  Dataset data(std::move(X), std::move(y), std::move(names), std::move(scaling));
  if (policy == ScalingPolicy::Standardize) data = standardize(data);
  return DesignResult{std::move(data), std::move(dropped), std::move(schema)};
}

/// Parses an ISO-8601 UTC instant: YYYY-MM-DDTHH:MM:SS with optional
/// fractional seconds (truncated) and a Z or +HH:MM / -HH:MM suffix.
inline std::optional<std::int64_t> parse_timestamp(std::string_view s) {
  auto digits = [&](std::size_t pos, std::size_t len, int& out) {
    if (pos + len > s.size()) return false;
    out = 0;
    for (std::size_t k = 0; k < len; ++k) {
      const char c = s[pos + k];
      if (c < '0' || c > '9') return false;
      out = out * 10 + (c - '0');
    }
    return true;
  };
  int Y, M, D, h, m, sec;
  if (!digits(0, 4, Y) || s.size() < 19 || s[4] != '-' || !digits(5, 2, M) || s[7] != '-' || !digits(8, 2, D) ||
      (s[10] != 'T' && s[10] != ' ') || !digits(11, 2, h) || s[13] != ':' || !digits(14, 2, m) || s[16] != ':' ||
      !digits(17, 2, sec)) {
    return std::nullopt;
  }
  const std::chrono::year_month_day ymd{std::chrono::year{Y}, std::chrono::month{static_cast<unsigned>(M)},
                                        std::chrono::day{static_cast<unsigned>(D)}};
  if (!ymd.ok() || h > 23 || m > 59 || sec > 60) return std::nullopt;
  std::size_t pos = 19;
  if (pos < s.size() && s[pos] == '.') {
    ++pos;
    const std::size_t start = pos;
    while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') ++pos;
    if (pos == start) return std::nullopt;
  }
  std::int64_t offset = 0;
  if (pos < s.size() && s[pos] == 'Z') {
    ++pos;
  } else if (pos < s.size() && (s[pos] == '+' || s[pos] == '-')) {
    int oh, om;
    if (!digits(pos + 1, 2, oh) || pos + 3 >= s.size() || s[pos + 3] != ':' || !digits(pos + 4, 2, om)) {
      return std::nullopt;
    }
    offset = (s[pos] == '+' ? 1 : -1) * (oh * 3600 + om * 60);
    pos += 6;
  } else {
    return std::nullopt;
  }
  if (pos != s.size()) return std::nullopt;
  const auto days = std::chrono::sys_days{ymd}.time_since_epoch().count();
  return static_cast<std::int64_t>(days) * 86400 + h * 3600 + m * 60 + sec - offset;
}

}  // namespace nbsparse
