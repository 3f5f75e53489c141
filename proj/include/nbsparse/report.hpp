#pragma once

// Plain-text and CSV rendering of coefficient tables, one column per model:
//
//                  Trump       Cruz
//   Likes
//   Constant       -2.068**    [0.000]
//                  (0.105)     (0.088)
//   ...
//   alpha          0.0700      0.0016
//   lambda         0.00055     0.0016
//
// "**" marks a 95% percentile interval that excludes zero; exact zeros are
// bracketed (the bold entries of the printed table). Covariates a model does
// not have are left blank.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "nbsparse/error.hpp"
#include "nbsparse/inference.hpp"

namespace nbsparse {

struct NamedTable {
  std::string model;
  CoefficientTable table;
};

namespace detail {

inline std::string fixed(double v, int decimals) {
  if (v == 0.0) v = 0.0;  // drop the sign of -0.0
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  std::string s = buf;
  if (s.find_first_not_of("-0.") == std::string::npos && s[0] == '-') s.erase(0, 1);
  return s;
}

/// Fixed notation with three significant digits, trailing zeros trimmed:
/// 0.00055, 0.0017, 0.0214, 1.5.
inline std::string penalty_text(double v) {
  if (v == 0.0) return "0";
  const int mag = static_cast<int>(std::floor(std::log10(std::abs(v))));
  const int decimals = std::max(0, 2 - mag);
  std::string s = fixed(v, decimals);
  if (s.find('.') != std::string::npos) {
    s.erase(s.find_last_not_of('0') + 1);
    if (s.back() == '.') s.pop_back();
  }
  return s;
}

inline std::string estimate_text(const CoefficientRow& r) {
  if (r.zero) return "[0.000]";
  return fixed(r.estimate, 3) + (r.significant ? "**" : "");
}

inline std::string se_text(const CoefficientRow& r) { return "(" + fixed(r.se, 3) + ")"; }

/// Union of covariate names keeping each model's relative order.
inline std::vector<std::string> merged_names(const std::vector<NamedTable>& models) {
  std::vector<std::string> out;
  for (const auto& m : models) {
    auto at = out.begin();
    for (const auto& row : m.table.rows) {
      auto it = std::find(out.begin(), out.end(), row.name);
      if (it == out.end()) {
        at = out.insert(at, row.name) + 1;
      } else {
        at = it + 1;
      }
    }
  }
  return out;
}

inline const CoefficientRow* find_row(const CoefficientTable& t, const std::string& name) {
  for (const auto& r : t.rows) {
    if (r.name == name) return &r;
  }
  return nullptr;
}

}  // namespace detail

inline std::string render_table(const std::vector<NamedTable>& models, const std::string& response = "Likes") {
  if (models.empty()) throw ContractViolation("render_table: no models");
  const auto names = detail::merged_names(models);
  std::vector<std::vector<std::string>> lines;
  auto add = [&](std::string label, std::vector<std::string> cells) {
    cells.insert(cells.begin(), std::move(label));
    lines.push_back(std::move(cells));
  };
  std::vector<std::string> header;
  for (const auto& m : models) header.push_back(m.model);
  add("", header);
  add(response, std::vector<std::string>(models.size()));
  for (const auto& name : names) {
    std::vector<std::string> est, se;
    for (const auto& m : models) {
      const CoefficientRow* r = detail::find_row(m.table, name);
      est.push_back(r ? detail::estimate_text(*r) : "");
      se.push_back(r ? detail::se_text(*r) : "");
    }
    add(name, est);
    add("", se);
  }
  std::vector<std::string> alpha, lambda;
  for (const auto& m : models) {
    alpha.push_back(detail::fixed(m.table.alpha, 4));
    lambda.push_back(detail::penalty_text(m.table.lambda));
  }
  add("alpha", alpha);
  add("lambda", lambda);

  std::vector<std::size_t> width(models.size() + 1, 0);
  for (const auto& l : lines) {
    for (std::size_t c = 0; c < l.size(); ++c) width[c] = std::max(width[c], l[c].size());
  }
  std::ostringstream out;
  for (const auto& l : lines) {
    std::string text;
    for (std::size_t c = 0; c < l.size(); ++c) {
      text += l[c];
      if (c + 1 < l.size()) text += std::string(width[c] - l[c].size() + 2, ' ');
    }
    text.erase(text.find_last_not_of(' ') + 1);
    out << text << '\n';
  }
  out << "\nStandard errors in parentheses\n** p < 0.05\n[0.000] zero coefficient\n";
  return out.str();
}

/// Long-format CSV: model, term, estimate, se, significant, zero. The alpha
/// and lambda rows leave se and the flags empty.
inline void write_table_csv(std::ostream& out, const std::vector<NamedTable>& models) {
  out << "model,term,estimate,se,significant,zero\n";
  char buf[160];
  for (const auto& m : models) {
    for (const auto& r : m.table.rows) {
      std::snprintf(buf, sizeof buf, ",%.17g,%.17g,%d,%d\n", r.estimate, r.se, r.significant ? 1 : 0, r.zero ? 1 : 0);
      out << m.model << ',' << r.name << buf;
    }
    std::snprintf(buf, sizeof buf, ",%.17g,,,\n", m.table.alpha);
    out << m.model << ",alpha" << buf;
    std::snprintf(buf, sizeof buf, ",%.17g,,,\n", m.table.lambda);
    out << m.model << ",lambda" << buf;
  }
}

}  // namespace nbsparse
