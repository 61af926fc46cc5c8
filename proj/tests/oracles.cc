// Copyright 2026 The AdStrength Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "oracles.h"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace oracle {

double PairwiseAuc(const std::vector<AdCounts>& ads, bool use_true_ctr) {
  double num = 0.0, pos = 0.0, neg = 0.0;
  for (const auto& a : ads) {
    pos += static_cast<double>(a.clicks);
    neg += static_cast<double>(a.impressions - a.clicks);
  }
  for (const auto& a : ads) {
    for (const auto& b : ads) {
      const double sa = use_true_ctr ? a.true_ctr : a.score;
      const double sb = use_true_ctr ? b.true_ctr : b.score;
      const double pairs = static_cast<double>(a.clicks) * static_cast<double>(b.impressions - b.clicks);
      if (sa > sb) {
        num += pairs;
      } else if (sa == sb) {
        num += 0.5 * pairs;
      }
    }
  }
  return num / (pos * neg);
}

double TauB(const std::vector<double>& x, const std::vector<double>& y) {
  const size_t n = x.size();
  double concordant = 0, discordant = 0, ties_x = 0, ties_y = 0;
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = i + 1; j < n; ++j) {
      const double dx = x[i] - x[j];
      const double dy = y[i] - y[j];
      if (dx == 0) ties_x += 1;
      if (dy == 0) ties_y += 1;
      if (dx == 0 || dy == 0) continue;
      if ((dx > 0) == (dy > 0)) {
        concordant += 1;
      } else {
        discordant += 1;
      }
    }
  }
  const double n0 = static_cast<double>(n) * (n - 1) / 2.0;
  return (concordant - discordant) / std::sqrt((n0 - ties_x) * (n0 - ties_y));
}

namespace {

std::vector<double> CountRanks(const std::vector<double>& v) {
  std::vector<double> r(v.size());
  for (size_t i = 0; i < v.size(); ++i) {
    double below = 0, equal = 0;
    for (size_t j = 0; j < v.size(); ++j) {
      if (v[j] < v[i]) below += 1;
      if (v[j] == v[i] && j != i) equal += 1;
    }
    r[i] = 1.0 + below + equal / 2.0;
  }
  return r;
}

}  // namespace

double SpearmanByCounting(const std::vector<double>& x, const std::vector<double>& y) {
  const auto rx = CountRanks(x);
  const auto ry = CountRanks(y);
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    mx += rx[i] / n;
    my += ry[i] / n;
  }
  double sxy = 0, sxx = 0, syy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

double DenseLoss(const std::vector<DenseRow>& rows, const std::vector<double>& params,
                 size_t publishers, double l2) {
  const size_t d = rows.empty() ? 0 : rows[0].x.size();
  double total = 0.0, weight = 0.0;
  for (const auto& row : rows) {
    double z = params[d + publishers];
    for (size_t j = 0; j < d; ++j) z += params[j] * row.x[j];
    z += params[d + row.publisher];
    const double p = 1.0 / (1.0 + std::exp(-z));
    total += -row.positive * std::log(p) - row.negative * std::log(1.0 - p);
    weight += row.positive + row.negative;
  }
  double penalty = 0.0;
  for (size_t j = 0; j < d + publishers; ++j) penalty += params[j] * params[j];
  return total / weight + 0.5 * l2 * penalty;
}

std::vector<Hit> ScanTopK(const std::vector<std::string>& ids,
                          const std::vector<std::vector<float>>& rows,
                          const std::vector<float>& query, size_t k, double floor,
                          const std::string& exclude) {
  std::vector<Hit> all;
  for (size_t i = 0; i < rows.size(); ++i) {
    if (ids[i] == exclude) continue;
    long double dot = 0;
    for (size_t j = 0; j < query.size(); ++j) {
      dot += static_cast<long double>(rows[i][j]) * static_cast<long double>(query[j]);
    }
    const double sim = std::clamp(static_cast<double>(dot), -1.0, 1.0);
    if (sim >= floor) all.push_back({ids[i], sim});
  }
  std::sort(all.begin(), all.end(), [](const Hit& a, const Hit& b) {
    return a.similarity != b.similarity ? a.similarity > b.similarity : a.id < b.id;
  });
  if (all.size() > k) all.resize(k);
  return all;
}

namespace {

bool IsWordChar(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

}  // namespace

bool ContainsEntry(const std::string& text, const std::string& entry,
                   const std::string& placeholder) {
  // Overwrite placeholder spans with a byte that is neither a word character
  // nor a space, so nothing can match across or inside them.
  std::string t = text;
  for (size_t pos = t.find(placeholder); pos != std::string::npos;
       pos = t.find(placeholder, pos + 1)) {
    for (size_t i = 0; i < placeholder.size(); ++i) t[pos + i] = '\x01';
  }
  for (size_t start = 0; start < t.size(); ++start) {
    if (start > 0 && IsWordChar(t[start - 1])) continue;
    size_t i = start, j = 0;
    while (j < entry.size() && i < t.size()) {
      if (entry[j] == ' ') {
        if (t[i] != ' ') break;
        while (i < t.size() && t[i] == ' ') ++i;
        ++j;
      } else if (std::tolower(static_cast<unsigned char>(t[i])) ==
                 std::tolower(static_cast<unsigned char>(entry[j]))) {
        ++i;
        ++j;
      } else {
        break;
      }
    }
    if (j == entry.size() && (i == t.size() || !IsWordChar(t[i]))) return true;
  }
  return false;
}

std::set<std::string> AsciiTokens(const std::string& text) {
  std::set<std::string> out;
  std::string cur;
  for (char c : text) {
    if (IsWordChar(c)) {
      cur += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    } else if (!cur.empty()) {
      out.insert(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) out.insert(cur);
  return out;
}

double MedianAbove(const std::vector<double>& values, double input, bool& found) {
  std::vector<double> above;
  for (double v : values) {
    if (v > input) above.push_back(v);
  }
  found = !above.empty();
  if (!found) return 0.0;
  std::sort(above.begin(), above.end());
  const size_t m = above.size();
  return m % 2 == 1 ? above[m / 2] : (above[m / 2 - 1] + above[m / 2]) / 2.0;
}

}  // namespace oracle
