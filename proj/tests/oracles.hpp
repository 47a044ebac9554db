// Copyright 2026 The mqmkit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// Independent reference implementations used to derive expected values.
// They share no code with the library and favour the most literal form of
// each definition over speed.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace mqmkit::oracle {

// Python's len() on a str: the number of code points.
inline long py_len(const std::string& s) {
  long n = 0;
  for (std::size_t i = 0; i < s.size();) {
    const auto b = static_cast<unsigned char>(s[i]);
    i += b < 0x80 ? 1 : b >= 0xF0 ? 4 : b >= 0xE0 ? 3 : b >= 0xC0 ? 2 : 1;
    ++n;
  }
  return n;
}

// One row of the example data frame.
struct IclRow {
  std::string source;
  std::string reference;
  std::string candidate;
  std::vector<std::string> span;
  std::vector<std::string> severity;
  std::vector<std::string> category;
};

// Line-by-line transliteration of the rejection procedure.
inline bool check_icl_set(const std::vector<IclRow>& examples, long min_errors = 3,
                          long majmin_threshold = 2, long cat_diversity = 2, long min_clen = 20,
                          long max_clen = 400) {
  // Check if they have the same number of spans as severity/category
  bool all = true;
  for (const auto& r : examples) {
    all = all && (r.span.size() == r.severity.size() && r.span.size() == r.category.size());
  }
  if (!all) return false;

  // Check if there are at least min_errors
  long sum = 0;
  for (const auto& r : examples) sum += static_cast<long>(r.severity.size());
  if (sum < min_errors) return false;

  // Check that there's a balance of major and minor errors.
  long major_count = 0;
  long minor_count = 0;
  for (const auto& r : examples) {
    long maj = 0;
    long min = 0;
    for (const auto& s : r.severity) {
      maj += s == "major";
      min += s == "minor";
    }
    major_count += maj;
    minor_count += min;
  }
  if (std::labs(major_count - minor_count) > majmin_threshold) return false;

  // Check that at least cat_diversity error types are represented.
  std::set<std::string> represented_error_types;
  for (const auto& r : examples) {
    for (const auto& c : r.category) {
      const auto slash = c.find('/');
      represented_error_types.insert(slash == std::string::npos ? c : c.substr(0, slash));
    }
  }
  if (static_cast<long>(represented_error_types.size()) < cat_diversity) return false;

  // pandas: max/min over an empty frame is NaN and NaN comparisons are false.
  if (examples.empty()) return true;
  long top_clen = 0;
  long bot_clen = 0;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    const auto& r = examples[i];
    const long hi = std::max({py_len(r.source), py_len(r.reference), py_len(r.candidate)});
    const long lo = std::min({py_len(r.source), py_len(r.reference), py_len(r.candidate)});
    top_clen = i == 0 ? hi : std::max(top_clen, hi);
    bot_clen = i == 0 ? lo : std::min(bot_clen, lo);
  }
  if (top_clen > max_clen || bot_clen < min_clen) return false;

  // All checks passed.
  return true;
}

inline bool is_ws(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

// Word indices touched by any byte range in `spans`, by marking bytes.
inline std::set<std::size_t> positional_set(
    const std::string& text, const std::vector<std::pair<std::size_t, std::size_t>>& spans) {
  std::vector<bool> covered(text.size(), false);
  for (const auto& [s, e] : spans) {
    for (std::size_t i = s; i < e; ++i) covered[i] = true;
  }
  std::set<std::size_t> out;
  std::size_t word = 0;
  bool in_word = false;
  bool hit = false;
  for (std::size_t i = 0; i <= text.size(); ++i) {
    if (i == text.size() || is_ws(text[i])) {
      if (in_word) {
        if (hit) out.insert(word);
        ++word;
        in_word = false;
      }
    } else {
      if (!in_word) {
        in_word = true;
        hit = false;
      }
      hit = hit || covered[i];
    }
  }
  return out;
}

inline std::size_t word_count(const std::string& text) {
  std::size_t n = 0;
  bool in_word = false;
  for (char c : text) {
    if (is_ws(c)) {
      in_word = false;
    } else if (!in_word) {
      in_word = true;
      ++n;
    }
  }
  return n;
}

inline std::size_t common(const std::set<std::size_t>& a, const std::set<std::size_t>& b) {
  std::vector<std::size_t> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out.size();
}

// Pearson correlation from raw sums in long double.
inline long double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  long double n = static_cast<long double>(x.size());
  long double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += static_cast<long double>(x[i]) * x[i];
    syy += static_cast<long double>(y[i]) * y[i];
    sxy += static_cast<long double>(x[i]) * y[i];
  }
  const long double num = n * sxy - sx * sy;
  const long double den = std::sqrt((n * sxx - sx * sx) * (n * syy - sy * sy));
  return num / den;
}

// MCC as the phi coefficient: Pearson over 0/1 indicator vectors. 0 when
// either vector is constant.
inline long double mcc_phi(const std::vector<int>& pred, const std::vector<int>& gold) {
  std::vector<double> x(pred.begin(), pred.end());
  std::vector<double> y(gold.begin(), gold.end());
  auto constant = [](const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [&](double a) { return a == v.front(); });
  };
  if (x.empty() || constant(x) || constant(y)) return 0.0L;
  return pearson(x, y);
}

inline int sgn(double x) { return (x > 0.0) - (x < 0.0); }

// acc* by exhaustive search: every epsilon in {0} U {|dm|} U {midpoints of
// distinct |dm|} is scored from scratch over every pair.
struct AccStar {
  double acc = -1.0;
  double epsilon = 0.0;
};

inline AccStar acc_star(const std::vector<std::vector<std::pair<double, double>>>& items) {
  std::vector<double> dms;
  for (const auto& item : items) {
    for (std::size_t a = 0; a < item.size(); ++a) {
      for (std::size_t b = a + 1; b < item.size(); ++b) {
        dms.push_back(std::abs(item[a].first - item[b].first));
      }
    }
  }
  std::sort(dms.begin(), dms.end());
  dms.erase(std::unique(dms.begin(), dms.end()), dms.end());
  std::vector<double> eps{0.0};
  for (std::size_t i = 0; i < dms.size(); ++i) {
    eps.push_back(dms[i]);
    if (i + 1 < dms.size()) eps.push_back(dms[i] + (dms[i + 1] - dms[i]) / 2.0);
  }
  std::sort(eps.begin(), eps.end());

  AccStar best;
  for (double e : eps) {
    double sum = 0.0;
    std::size_t n_items = 0;
    for (const auto& item : items) {
      if (item.size() < 2) continue;
      long correct = 0;
      long n = 0;
      for (std::size_t a = 0; a < item.size(); ++a) {
        for (std::size_t b = a + 1; b < item.size(); ++b) {
          const double dm = item[a].first - item[b].first;
          const int m = std::abs(dm) <= e ? 0 : sgn(dm);
          correct += m == sgn(item[a].second - item[b].second);
          ++n;
        }
      }
      sum += static_cast<double>(correct) / static_cast<double>(n);
      ++n_items;
    }
    const double acc = sum / static_cast<double>(n_items);
    if (acc > best.acc) best = {acc, e};
  }
  return best;
}

}  // namespace mqmkit::oracle
