// Brute-force reference computations used to check the library. Everything
// here is written for clarity over speed: explicit histograms, all pairs,
// full dynamic-programming tables.
#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <vector>

#include "morphkit/core.hpp"
#include "morphkit/segment.hpp"

namespace oracle {

using morphkit::Corpus;
using morphkit::Segment;

template <typename K>
double entropy_of(const std::vector<K>& xs) {
  std::map<K, double> hist;
  for (const auto& x : xs) hist[x] += 1;
  double h = 0;
  const double n = static_cast<double>(xs.size());
  for (const auto& [k, c] : hist) h -= (c / n) * std::log(c / n);
  return h;
}

template <typename A, typename B>
double mutual_information(const std::vector<A>& xs, const std::vector<B>& ys) {
  std::vector<std::pair<A, B>> joint;
  for (std::size_t i = 0; i < xs.size(); ++i) joint.emplace_back(xs[i], ys[i]);
  // Direct sum over the joint support rather than the entropy identity.
  std::map<A, double> px;
  std::map<B, double> py;
  std::map<std::pair<A, B>, double> pxy;
  const double n = static_cast<double>(xs.size());
  for (const auto& [a, b] : joint) {
    px[a] += 1 / n;
    py[b] += 1 / n;
    pxy[{a, b}] += 1 / n;
  }
  double mi = 0;
  for (const auto& [ab, p] : pxy) mi += p * std::log(p / (px[ab.first] * py[ab.second]));
  return std::max(0.0, mi);
}

inline std::vector<int> attribute_column(const Corpus& c, std::size_t attr) {
  std::vector<int> out;
  for (const auto& p : c.pairs()) out.push_back(p.first.values[attr]);
  return out;
}

// Average of (top MI - second MI) / H over informative count variables.
inline double gap_score(const Corpus& c, const std::vector<std::vector<int>>& variables, double divisor) {
  double sum = 0;
  std::size_t informative = 0;
  for (const auto& v : variables) {
    const double h = entropy_of(v);
    if (h <= 0) continue;
    std::vector<double> mis;
    for (std::size_t a = 0; a < c.config().num_attributes(); ++a)
      mis.push_back(mutual_information(attribute_column(c, a), v));
    std::sort(mis.rbegin(), mis.rend());
    sum += (mis[0] - mis[1]) / h;
    ++informative;
  }
  if (divisor > 0) return sum / divisor;
  return informative ? sum / static_cast<double>(informative) : 0.0;
}

inline double bosdis(const Corpus& c, const std::vector<std::vector<Segment>>& segmentation) {
  std::set<Segment> vocab;
  for (const auto& segs : segmentation) vocab.insert(segs.begin(), segs.end());
  std::vector<std::vector<int>> counts;
  for (const auto& sym : vocab) {
    std::vector<int> n;
    for (const auto& segs : segmentation) n.push_back(static_cast<int>(std::count(segs.begin(), segs.end(), sym)));
    counts.push_back(std::move(n));
  }
  return gap_score(c, counts, 0);
}

inline std::vector<std::vector<Segment>> characters_as_segments(const Corpus& c) {
  std::vector<std::vector<Segment>> out;
  for (const auto& p : c.pairs()) {
    std::vector<Segment> segs;
    for (int ch : p.second.chars) segs.push_back({ch});
    out.push_back(std::move(segs));
  }
  return out;
}

inline double posdis(const Corpus& c) {
  double sum = 0;
  const int m = c.config().max_len;
  for (int j = 0; j < m; ++j) {
    std::vector<int> symbols;
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < c.size(); ++i)
      if (static_cast<int>(c.message(i).size()) > j) {
        symbols.push_back(c.message(i).chars[static_cast<std::size_t>(j)]);
        rows.push_back(i);
      }
    if (symbols.empty()) continue;
    const double h = entropy_of(symbols);
    if (h <= 0) continue;
    std::vector<double> mis;
    for (std::size_t a = 0; a < c.config().num_attributes(); ++a) {
      std::vector<int> col;
      for (auto r : rows) col.push_back(c.meaning(r).values[a]);
      mis.push_back(mutual_information(col, symbols));
    }
    std::sort(mis.rbegin(), mis.rend());
    sum += (mis[0] - mis[1]) / h;
  }
  return sum / m;
}

inline int edit_distance(const std::vector<int>& a, const std::vector<int>& b) {
  std::vector<std::vector<int>> d(a.size() + 1, std::vector<int>(b.size() + 1));
  for (std::size_t i = 0; i <= a.size(); ++i) d[i][0] = static_cast<int>(i);
  for (std::size_t j = 0; j <= b.size(); ++j) d[0][j] = static_cast<int>(j);
  for (std::size_t i = 1; i <= a.size(); ++i)
    for (std::size_t j = 1; j <= b.size(); ++j)
      d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + (a[i - 1] != b[j - 1])});
  return d[a.size()][b.size()];
}

inline std::vector<double> average_ranks(const std::vector<double>& xs) {
  std::vector<std::size_t> order(xs.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto i, auto j) { return xs[i] < xs[j]; });
  std::vector<double> ranks(xs.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && xs[order[j]] == xs[order[i]]) ++j;
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = (static_cast<double>(i + j - 1)) / 2.0 + 1.0;
    i = j;
  }
  return ranks;
}

inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0 || syy == 0) return 0;
  return sxy / std::sqrt(sxx * syy);
}

// Spearman over all unordered pairs with Hamming distance over `groups` of
// attributes (each group compared as one coordinate).
inline double topsim(const Corpus& c, const std::vector<std::vector<std::size_t>>& groups) {
  std::vector<double> dm, ds;
  for (std::size_t i = 0; i < c.size(); ++i)
    for (std::size_t j = i + 1; j < c.size(); ++j) {
      int h = 0;
      for (const auto& g : groups) {
        bool same = true;
        for (auto a : g) same = same && c.meaning(i).values[a] == c.meaning(j).values[a];
        h += !same;
      }
      dm.push_back(h);
      ds.push_back(edit_distance(c.message(i).chars, c.message(j).chars));
    }
  return pearson(average_ranks(dm), average_ranks(ds));
}

inline double topsim(const Corpus& c) {
  std::vector<std::vector<std::size_t>> groups;
  for (std::size_t a = 0; a < c.config().num_attributes(); ++a) groups.push_back({a});
  return topsim(c, groups);
}

inline int parity_violations(const std::vector<int>& m) {
  int v = 0;
  for (std::size_t i = 0; i + 1 < m.size(); ++i)
    if ((m[i] & 1) == (m[i + 1] & 1)) ++v;
  return v;
}

}  // namespace oracle
