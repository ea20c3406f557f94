#pragma once

// Reference computations written independently of the library's code paths.
// They favor the most literal form of each definition over speed.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace annotkit::oracle {

// Cohen's κ from a full k×k contingency table of relative frequencies.
inline std::optional<double> cohen_kappa(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::set<std::string> labels(a.begin(), a.end());
  labels.insert(b.begin(), b.end());
  const std::vector<std::string> cats(labels.begin(), labels.end());
  const std::size_t k = cats.size();
  const double n = static_cast<double>(a.size());
  std::vector<std::vector<double>> table(k, std::vector<double>(k, 0.0));
  auto idx = [&](const std::string& s) {
    return static_cast<std::size_t>(std::find(cats.begin(), cats.end(), s) - cats.begin());
  };
  for (std::size_t i = 0; i < a.size(); ++i) table[idx(a[i])][idx(b[i])] += 1.0 / n;
  double po = 0.0;
  double pe = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    po += table[i][i];
    double row = 0.0;
    double col = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      row += table[i][j];
      col += table[j][i];
    }
    pe += row * col;
  }
  if (std::fabs(1.0 - pe) < 1e-15) return std::nullopt;
  return (po - pe) / (1.0 - pe);
}

// Fleiss' κ with per-item agreement counted over ordered pairs of distinct raters.
// ratings[item][rater] = category.
inline std::optional<double> fleiss_kappa(const std::vector<std::vector<std::string>>& ratings) {
  const double n = static_cast<double>(ratings.size());
  const std::size_t r = ratings.front().size();
  std::map<std::string, double> assigned;
  double p_bar = 0.0;
  for (const auto& item : ratings) {
    std::size_t agreeing_pairs = 0;
    for (std::size_t x = 0; x < r; ++x) {
      assigned[item[x]] += 1.0;
      for (std::size_t y = 0; y < r; ++y) {
        if (x != y && item[x] == item[y]) ++agreeing_pairs;
      }
    }
    p_bar += static_cast<double>(agreeing_pairs) / static_cast<double>(r * (r - 1));
  }
  p_bar /= n;
  double pe = 0.0;
  for (const auto& [_, count] : assigned) {
    const double p = count / (n * static_cast<double>(r));
    pe += p * p;
  }
  if (std::fabs(1.0 - pe) < 1e-15) return std::nullopt;
  return (p_bar - pe) / (1.0 - pe);
}

// Pearson via raw moment sums in long double.
inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  long double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  const long double n = static_cast<long double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += static_cast<long double>(x[i]) * x[i];
    syy += static_cast<long double>(y[i]) * y[i];
    sxy += static_cast<long double>(x[i]) * y[i];
  }
  const long double cov = sxy / n - (sx / n) * (sy / n);
  const long double vx = sxx / n - (sx / n) * (sx / n);
  const long double vy = syy / n - (sy / n) * (sy / n);
  return static_cast<double>(cov / std::sqrt(vx * vy));
}

// Rank of v = 1 + #smaller + (#equal − 1)/2, counted directly.
inline std::vector<double> average_ranks(const std::vector<double>& v) {
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    std::size_t smaller = 0;
    std::size_t equal = 0;
    for (const double w : v) {
      if (w < v[i]) ++smaller;
      if (w == v[i]) ++equal;
    }
    ranks[i] = 1.0 + static_cast<double>(smaller) + static_cast<double>(equal - 1) / 2.0;
  }
  return ranks;
}

inline double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  return pearson(average_ranks(x), average_ranks(y));
}

}  // namespace annotkit::oracle
