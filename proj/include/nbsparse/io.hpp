#pragma once

// File formats.
//
//   corpus     one JSON object per line: id, timestamp (ISO-8601), text, likes, author
//   followers  CSV with header author,timestamp,count
//   lexicon    JSON: figures / issues as [{"topic", "patterns"}], self_topics
//              {author: topic}, optional stopwords
//   dataset    CSV with header y,<column names>, plus <stem>.schema.json holding
//              the per-column scaling and any dropped columns
//
// Numbers are written with %.17g so that a written dataset reads back exactly.

#include <Eigen/Dense>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "nbsparse/dataset.hpp"
#include "nbsparse/error.hpp"
#include "nbsparse/features.hpp"
#include "nbsparse/optimizer.hpp"

namespace nbsparse {

using Json = nlohmann::ordered_json;

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path.string(), 0, "cannot open file");
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline void write_file(const std::filesystem::path& path, const std::string& contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << contents;
  if (!out.flush()) throw std::runtime_error("write failed for " + path.string());
}

/// FNV-1a 64-bit hash, as 16 lowercase hex digits.
inline std::string fnv1a64_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace detail {

inline std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    std::string line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
    if (end == text.size()) break;
    start = end + 1;
  }
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  fields.push_back(cur);
  return fields;
}

inline double parse_number(const std::string& file, std::size_t line, const std::string& field) {
  try {
    std::size_t used = 0;
    const double v = std::stod(field, &used);
    if (used != field.size()) throw std::invalid_argument(field);
    return v;
  } catch (const std::exception&) {
    throw ParseError(file, line, "not a number: '" + field + "'");
  }
}

}  // namespace detail

inline std::vector<TweetRecord> parse_corpus(const std::string& text, const std::string& name = "<corpus>") {
  std::vector<TweetRecord> out;
  const auto lines = detail::split_lines(text);
  for (std::size_t k = 0; k < lines.size(); ++k) {
    const std::size_t lineno = k + 1;
    if (lines[k].find_first_not_of(" \t") == std::string::npos) continue;
    Json j;
    try {
      j = Json::parse(lines[k]);
    } catch (const Json::parse_error& e) {
      throw ParseError(name, lineno, std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ParseError(name, lineno, "record must be a JSON object");
    for (const char* field : {"id", "timestamp", "text", "likes", "author"}) {
      if (!j.contains(field)) throw ParseError(name, lineno, std::string("missing field '") + field + "'");
    }
    TweetRecord r;
    r.id = j["id"].is_string() ? j["id"].get<std::string>() : j["id"].dump();
    if (!j["timestamp"].is_string()) throw ParseError(name, lineno, "timestamp must be an ISO-8601 string");
    const auto ts = parse_timestamp(j["timestamp"].get<std::string>());
    if (!ts) throw ParseError(name, lineno, "unparseable timestamp '" + j["timestamp"].get<std::string>() + "'");
    r.timestamp = *ts;
    if (!j["text"].is_string() || j["text"].get<std::string>().empty()) {
      throw ParseError(name, lineno, "text must be a non-empty string");
    }
    r.text = j["text"].get<std::string>();
    if (!j["likes"].is_number_integer() || j["likes"].get<std::int64_t>() < 0) {
      throw ParseError(name, lineno, "likes must be a non-negative integer");
    }
    r.likes = j["likes"].get<std::uint64_t>();
    if (!j["author"].is_string()) throw ParseError(name, lineno, "author must be a string");
    r.author = j["author"].get<std::string>();
    out.push_back(std::move(r));
  }
  return out;
}

inline std::vector<TweetRecord> read_corpus(const std::filesystem::path& path) {
  return parse_corpus(read_file(path), path.string());
}

inline FollowerSeries parse_followers(const std::string& text, const std::string& name = "<followers>") {
  FollowerSeries s;
  const auto lines = detail::split_lines(text);
  if (lines.empty() || lines[0] != "author,timestamp,count") {
    throw ParseError(name, 1, "expected header 'author,timestamp,count'");
  }
  for (std::size_t k = 1; k < lines.size(); ++k) {
    const std::size_t lineno = k + 1;
    if (lines[k].empty()) continue;
    const auto f = detail::split_csv(lines[k]);
    if (f.size() != 3) throw ParseError(name, lineno, "expected 3 fields, got " + std::to_string(f.size()));
    const auto ts = parse_timestamp(f[1]);
    if (!ts) throw ParseError(name, lineno, "unparseable timestamp '" + f[1] + "'");
    const double count = detail::parse_number(name, lineno, f[2]);
    try {
      s.add(f[0], *ts, count);
    } catch (const ContractViolation& e) {
      throw ParseError(name, lineno, e.what());
    }
  }
  return s;
}

inline FollowerSeries read_followers(const std::filesystem::path& path) {
  return parse_followers(read_file(path), path.string());
}

inline TopicLexicon parse_lexicon(const std::string& text, const std::string& name = "<lexicon>") {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ParseError(name, 0, std::string("invalid JSON: ") + e.what());
  }
  TopicLexicon lex;
  auto topics = [&](const char* key, bool lower) {
    std::vector<Topic> out;
    if (!j.contains(key)) return out;
    for (const auto& t : j.at(key)) {
      Topic topic;
      topic.name = t.at("topic").get<std::string>();
      for (const auto& p : t.at("patterns")) {
        topic.patterns.push_back(lower ? detail::ascii_lower(p.get<std::string>()) : p.get<std::string>());
      }
      out.push_back(std::move(topic));
    }
    return out;
  };
  try {
    lex.figures = topics("figures", false);
    lex.issues = topics("issues", true);
    if (j.contains("self_topics")) {
      for (const auto& [author, topic] : j.at("self_topics").items()) lex.self_topics[author] = topic.get<std::string>();
    }
    if (j.contains("stopwords")) lex.stopwords = j.at("stopwords").get<std::vector<std::string>>();
    lex.validate();
  } catch (const Json::exception& e) {
    throw ParseError(name, 0, e.what());
  } catch (const ContractViolation& e) {
    throw ParseError(name, 0, e.what());
  }
  return lex;
}

inline TopicLexicon read_lexicon(const std::filesystem::path& path) {
  return parse_lexicon(read_file(path), path.string());
}

/// Sidecar path for a dataset CSV: data/x.csv -> data/x.schema.json.
inline std::filesystem::path schema_path(const std::filesystem::path& csv) {
  auto p = csv;
  p.replace_extension(".schema.json");
  return p;
}

inline std::string dataset_csv(const Dataset& data) {
  std::string out = "y";
  for (const auto& n : data.column_names()) out += "," + n;
  out += '\n';
  for (Eigen::Index j = 0; j < data.X().rows(); ++j) {
    out += format_double(data.y()[j]);
    for (Eigen::Index c = 0; c < data.X().cols(); ++c) out += "," + format_double(data.X()(j, c));
    out += '\n';
  }
  return out;
}

inline Json dataset_schema(const Dataset& data, const std::vector<std::string>& dropped = {}) {
  Json j;
  j["rows"] = data.rows();
  j["columns"] = Json::array();
  for (std::size_t c = 0; c < data.cols(); ++c) {
    j["columns"].push_back({{"name", data.column_names()[c]},
                            {"multiplier", data.scaling()[c].multiplier},
                            {"offset", data.scaling()[c].offset}});
  }
  j["dropped"] = dropped;
  return j;
}

inline void write_dataset(const std::filesystem::path& csv, const Dataset& data,
                          const std::vector<std::string>& dropped = {}) {
  write_file(csv, dataset_csv(data));
  write_file(schema_path(csv), dataset_schema(data, dropped).dump(2) + "\n");
}

inline Dataset read_dataset(const std::filesystem::path& csv) {
  const std::string name = csv.string();
  const auto lines = detail::split_lines(read_file(csv));
  if (lines.empty()) throw ParseError(name, 1, "empty dataset file");
  const auto header = detail::split_csv(lines[0]);
  if (header.size() < 2 || header[0] != "y") throw ParseError(name, 1, "header must start with 'y,'");
  const std::vector<std::string> names(header.begin() + 1, header.end());
  const auto p = static_cast<Eigen::Index>(names.size());
  std::vector<std::vector<double>> rows;
  for (std::size_t k = 1; k < lines.size(); ++k) {
    if (lines[k].empty()) continue;
    const auto f = detail::split_csv(lines[k]);
    if (f.size() != header.size()) {
      throw ParseError(name, k + 1, "expected " + std::to_string(header.size()) + " fields, got " +
                                        std::to_string(f.size()));
    }
    std::vector<double> row;
    for (const auto& field : f) row.push_back(detail::parse_number(name, k + 1, field));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError(name, 0, "dataset has no rows");
  Eigen::MatrixXd X(static_cast<Eigen::Index>(rows.size()), p);
  Eigen::VectorXd y(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    y[static_cast<Eigen::Index>(r)] = rows[r][0];
    for (Eigen::Index c = 0; c < p; ++c) X(static_cast<Eigen::Index>(r), c) = rows[r][static_cast<std::size_t>(c) + 1];
  }
  std::vector<ColumnScaling> scaling(names.size());
  const auto sidecar = schema_path(csv);
  if (std::filesystem::exists(sidecar)) {
    try {
      const Json j = Json::parse(read_file(sidecar));
      const auto& cols = j.at("columns");
      if (cols.size() != names.size()) throw ParseError(sidecar.string(), 0, "column count differs from " + name);
      for (std::size_t c = 0; c < names.size(); ++c) {
        if (cols[c].at("name").get<std::string>() != names[c]) {
          throw ParseError(sidecar.string(), 0, "column " + std::to_string(c) + " name differs from " + name);
        }
        scaling[c] = ColumnScaling{cols[c].at("multiplier").get<double>(), cols[c].at("offset").get<double>()};
      }
    } catch (const Json::exception& e) {
      throw ParseError(sidecar.string(), 0, e.what());
    }
  }
  try {
    return Dataset(std::move(X), std::move(y), names, std::move(scaling));
  } catch (const ContractViolation& e) {
    throw ParseError(name, 0, e.what());
  }
}

inline Json fit_to_json(const FitResult& f) {
  Json j;
  j["lambda"] = f.lambda;
  j["alpha"] = f.alpha;
  j["objective"] = f.objective;
  j["iters_run"] = f.iters_run;
  j["converged"] = f.converged;
  j["clamp_events"] = f.clamp_events;
  j["coefficients"] = Json::array();
  for (Eigen::Index i = 0; i < f.beta.size(); ++i) {
    const auto k = static_cast<std::size_t>(i);
    Json c;
    c["name"] = k < f.column_names.size() ? f.column_names[k] : "x" + std::to_string(k);
    c["beta"] = f.beta[i];
    if (k < f.scaling.size()) {
      c["multiplier"] = f.scaling[k].multiplier;
      c["offset"] = f.scaling[k].offset;
    }
    j["coefficients"].push_back(std::move(c));
  }
  return j;
}

inline FitResult fit_from_json(const Json& j) {
  FitResult f;
  f.lambda = j.at("lambda").get<double>();
  f.alpha = j.at("alpha").get<double>();
  f.objective = j.value("objective", 0.0);
  f.iters_run = j.value("iters_run", std::size_t{0});
  f.converged = j.value("converged", false);
  f.clamp_events = j.value("clamp_events", std::size_t{0});
  const auto& cs = j.at("coefficients");
  f.beta.resize(static_cast<Eigen::Index>(cs.size()));
  for (std::size_t k = 0; k < cs.size(); ++k) {
    f.beta[static_cast<Eigen::Index>(k)] = cs[k].at("beta").get<double>();
    f.column_names.push_back(cs[k].at("name").get<std::string>());
    if (cs[k].contains("multiplier")) {
      f.scaling.push_back(ColumnScaling{cs[k].at("multiplier").get<double>(), cs[k].at("offset").get<double>()});
    }
  }
  return f;
}

}  // namespace nbsparse
