#include "morphkit/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include <boost/math/distributions/students_t.hpp>

#include "morphkit/random.hpp"

namespace morphkit {

// --- distances --------------------------------------------------------------

int levenshtein(std::span<const int> a, std::span<const int> b) {
  if (a.size() < b.size()) std::swap(a, b);
  if (b.empty()) return static_cast<int>(a.size());
  constexpr std::size_t kStack = 64;
  int stack_row[kStack + 1];
  std::vector<int> heap_row;
  int* row = stack_row;
  if (b.size() > kStack) {
    heap_row.resize(b.size() + 1);
    row = heap_row.data();
  }
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = static_cast<int>(j);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    int diag = row[0];
    row[0] = static_cast<int>(i);
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const int up = row[j];
      const int sub = diag + (a[i - 1] == b[j - 1] ? 0 : 1);
      row[j] = std::min({up + 1, row[j - 1] + 1, sub});
      diag = up;
    }
  }
  return row[b.size()];
}

int meaning_distance(const Meaning& a, const Meaning& b) {
  if (a.values.size() != b.values.size()) throw std::invalid_argument("meanings from different configs");
  int d = 0;
  for (std::size_t i = 0; i < a.values.size(); ++i) d += a.values[i] != b.values[i];
  return d;
}

int fused_meaning_distance(const Meaning& a, const Meaning& b, int i, int j) {
  const int d = meaning_distance(a, b);
  const auto ui = static_cast<std::size_t>(i);
  const auto uj = static_cast<std::size_t>(j);
  const bool di = a.values[ui] != b.values[ui];
  const bool dj = a.values[uj] != b.values[uj];
  return d - di - dj + (di || dj);
}

// --- information theory -----------------------------------------------------

namespace {

double entropy_of_counts(std::span<const std::uint64_t> counts, std::uint64_t total) {
  if (total == 0) return 0.0;
  const double n = static_cast<double>(total);
  double h = 0;
  for (auto c : counts)
    if (c > 0) {
      const double p = static_cast<double>(c) / n;
      h -= p * std::log(p);
    }
  return std::max(0.0, h);
}

// Relabels arbitrary ints to 0..k-1, preserving order.
std::vector<int> dense_labels(std::span<const int> labels, int& cardinality) {
  std::vector<int> sorted(labels.begin(), labels.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  cardinality = static_cast<int>(sorted.size());
  std::vector<int> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i)
    out[i] = static_cast<int>(std::lower_bound(sorted.begin(), sorted.end(), labels[i]) - sorted.begin());
  return out;
}

// I(X;Y) = H(X) + H(Y) - H(X,Y) for dense labels.
struct DenseInfo {
  double hx = 0;
  double mi = 0;
};

DenseInfo dense_information(std::span<const int> xs, int kx, std::span<const int> ys, int ky) {
  std::vector<std::uint64_t> cx(static_cast<std::size_t>(kx)), cy(static_cast<std::size_t>(ky)),
      cxy(static_cast<std::size_t>(kx) * static_cast<std::size_t>(ky));
  for (std::size_t i = 0; i < xs.size(); ++i) {
    ++cx[static_cast<std::size_t>(xs[i])];
    ++cy[static_cast<std::size_t>(ys[i])];
    ++cxy[static_cast<std::size_t>(xs[i]) * static_cast<std::size_t>(ky) + static_cast<std::size_t>(ys[i])];
  }
  const auto n = static_cast<std::uint64_t>(xs.size());
  DenseInfo out;
  out.hx = entropy_of_counts(cx, n);
  out.mi = std::max(0.0, out.hx + entropy_of_counts(cy, n) - entropy_of_counts(cxy, n));
  return out;
}

}  // namespace

double entropy(std::span<const int> labels) {
  int k = 0;
  auto dense = dense_labels(labels, k);
  std::vector<std::uint64_t> counts(static_cast<std::size_t>(k));
  for (int v : dense) ++counts[static_cast<std::size_t>(v)];
  return entropy_of_counts(counts, labels.size());
}

double mutual_information(std::span<const int> xs, std::span<const int> ys) {
  if (xs.size() != ys.size()) throw std::invalid_argument("label sequences differ in length");
  int kx = 0, ky = 0;
  auto dx = dense_labels(xs, kx);
  auto dy = dense_labels(ys, ky);
  return dense_information(dx, kx, dy, ky).mi;
}

// --- topographic similarity -------------------------------------------------

namespace {

// Joint counts of (message distance, meaning distance) over message pairs.
class PairTable {
 public:
  PairTable(int max_x, int max_y) : width_(max_y + 1), cells_(static_cast<std::size_t>((max_x + 1) * (max_y + 1))) {}

  void add(int x, int y) { ++cells_[static_cast<std::size_t>(x * width_ + y)]; }

  TopsimResult correlate(Correlation method) const {
    const int height = static_cast<int>(cells_.size()) / width_;
    std::vector<std::uint64_t> cx(static_cast<std::size_t>(height)), cy(static_cast<std::size_t>(width_));
    std::uint64_t total = 0;
    for (int x = 0; x < height; ++x)
      for (int y = 0; y < width_; ++y) {
        const auto c = cells_[static_cast<std::size_t>(x * width_ + y)];
        cx[static_cast<std::size_t>(x)] += c;
        cy[static_cast<std::size_t>(y)] += c;
        total += c;
      }
    TopsimResult out;
    out.pairs = total;
    auto distinct = [](const std::vector<std::uint64_t>& c) {
      return std::count_if(c.begin(), c.end(), [](auto v) { return v > 0; });
    };
    if (total < 2 || distinct(cx) < 2 || distinct(cy) < 2) {
      out.degenerate = true;
      return out;
    }
    auto scores = [&](const std::vector<std::uint64_t>& counts) {
      std::vector<long double> s(counts.size());
      long double below = 0;
      for (std::size_t v = 0; v < counts.size(); ++v) {
        s[v] = method == Correlation::kSpearman
                   ? below + (static_cast<long double>(counts[v]) + 1.0L) / 2.0L
                   : static_cast<long double>(v);
        below += static_cast<long double>(counts[v]);
      }
      return s;
    };
    const auto sx = scores(cx);
    const auto sy = scores(cy);
    auto mean = [&](const std::vector<long double>& s, const std::vector<std::uint64_t>& c) {
      long double acc = 0;
      for (std::size_t v = 0; v < c.size(); ++v) acc += s[v] * static_cast<long double>(c[v]);
      return acc / static_cast<long double>(total);
    };
    const long double mx = mean(sx, cx);
    const long double my = mean(sy, cy);
    long double vx = 0, vy = 0, cov = 0;
    for (std::size_t v = 0; v < cx.size(); ++v) vx += static_cast<long double>(cx[v]) * (sx[v] - mx) * (sx[v] - mx);
    for (std::size_t v = 0; v < cy.size(); ++v) vy += static_cast<long double>(cy[v]) * (sy[v] - my) * (sy[v] - my);
    for (int x = 0; x < height; ++x)
      for (int y = 0; y < width_; ++y) {
        const auto c = cells_[static_cast<std::size_t>(x * width_ + y)];
        if (c) cov += static_cast<long double>(c) * (sx[static_cast<std::size_t>(x)] - mx) *
                      (sy[static_cast<std::size_t>(y)] - my);
      }
    out.value = static_cast<double>(std::clamp(cov / std::sqrt(vx * vy), -1.0L, 1.0L));
    return out;
  }

 private:
  int width_;
  std::vector<std::uint64_t> cells_;
};

std::uint64_t resolve_budget(const Corpus& corpus, const TopsimOptions& options) {
  if (options.pair_budget) return *options.pair_budget;
  return corpus.size() <= 4096 ? kAllPairs : 1'000'000;
}

// Calls visit(i, j) for every unordered pair, or for `budget` sampled pairs.
template <typename Visit>
void for_each_pair(std::size_t n, std::uint64_t budget, std::uint64_t seed, Visit&& visit) {
  const std::uint64_t all = static_cast<std::uint64_t>(n) * (n - 1) / 2;
  if (budget == kAllPairs || budget >= all) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) visit(i, j);
    return;
  }
  Rng rng(seed);
  for (std::uint64_t k = 0; k < budget; ++k) {
    const auto i = static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(n)));
    auto j = static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(n - 1)));
    if (j >= i) ++j;
    visit(i, j);
  }
}

int longest_message(const Corpus& corpus) {
  std::size_t len = 0;
  for (const auto& p : corpus.pairs()) len = std::max(len, p.second.size());
  return static_cast<int>(len);
}

void require_pairs(const Corpus& corpus) {
  if (corpus.size() < 2) throw std::invalid_argument("metric needs at least two pairs");
}

}  // namespace

TopsimResult topsim(const Corpus& corpus, const TopsimOptions& options) {
  require_pairs(corpus);
  const int n = static_cast<int>(corpus.config().num_attributes());
  PairTable table(longest_message(corpus), n);
  for_each_pair(corpus.size(), resolve_budget(corpus, options), options.seed, [&](std::size_t i, std::size_t j) {
    table.add(levenshtein(corpus.message(i), corpus.message(j)),
              meaning_distance(corpus.meaning(i), corpus.meaning(j)));
  });
  return table.correlate(options.correlation);
}

FusionResult f_topsim(const Corpus& corpus, const TopsimOptions& options) {
  require_pairs(corpus);
  const int n = static_cast<int>(corpus.config().num_attributes());
  if (n < 2) throw std::invalid_argument("fused TopSim needs at least two attributes");
  const int len = longest_message(corpus);
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
  PairTable plain(len, n);
  std::vector<PairTable> fused(pairs.size(), PairTable(len, n - 1));

  for_each_pair(corpus.size(), resolve_budget(corpus, options), options.seed, [&](std::size_t a, std::size_t b) {
    const int d_msg = levenshtein(corpus.message(a), corpus.message(b));
    const auto& ma = corpus.meaning(a).values;
    const auto& mb = corpus.meaning(b).values;
    int d = 0;
    for (int k = 0; k < n; ++k) d += ma[static_cast<std::size_t>(k)] != mb[static_cast<std::size_t>(k)];
    plain.add(d_msg, d);
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      const bool di = ma[static_cast<std::size_t>(pairs[p].first)] != mb[static_cast<std::size_t>(pairs[p].first)];
      const bool dj = ma[static_cast<std::size_t>(pairs[p].second)] != mb[static_cast<std::size_t>(pairs[p].second)];
      fused[p].add(d_msg, d - di - dj + (di || dj));
    }
  });

  FusionResult out;
  out.topsim = plain.correlate(options.correlation);
  bool first = true;
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    FusionScore score{pairs[p], fused[p].correlate(options.correlation)};
    if (first || score.topsim.value > out.f_topsim) {
      out.f_topsim = score.topsim.value;
      out.best_pair = pairs[p];
      first = false;
    }
    out.fusions.push_back(score);
  }
  out.delta = out.f_topsim - out.topsim.value;
  return out;
}

// --- disentanglement --------------------------------------------------------

namespace {

struct AttributeColumns {
  std::vector<std::vector<int>> columns;
  std::vector<int> cardinalities;
};

AttributeColumns attribute_columns(const Corpus& corpus) {
  const std::size_t n = corpus.config().num_attributes();
  if (n < 2) throw std::invalid_argument("disentanglement needs at least two attributes");
  AttributeColumns out;
  out.columns.assign(n, std::vector<int>(corpus.size()));
  out.cardinalities = corpus.config().cardinalities;
  for (std::size_t m = 0; m < corpus.size(); ++m)
    for (std::size_t a = 0; a < n; ++a) out.columns[a][m] = corpus.meaning(m).values[a];
  return out;
}

// (I(x; best attr) - I(x; second attr)) / H(x); nullopt when H(x) == 0.
std::optional<double> information_gap(std::span<const int> xs, int kx, const AttributeColumns& attrs,
                                      std::span<const std::size_t> rows) {
  std::vector<double> mis;
  double hx = 0;
  std::vector<int> sub;
  for (std::size_t a = 0; a < attrs.columns.size(); ++a) {
    std::span<const int> col = attrs.columns[a];
    if (!rows.empty()) {
      sub.resize(rows.size());
      for (std::size_t r = 0; r < rows.size(); ++r) sub[r] = attrs.columns[a][rows[r]];
      col = sub;
    }
    auto info = dense_information(xs, kx, col, attrs.cardinalities[a]);
    hx = info.hx;
    mis.push_back(info.mi);
  }
  if (hx <= 0) return std::nullopt;
  std::sort(mis.begin(), mis.end(), std::greater<>());
  return std::clamp((mis[0] - mis[1]) / hx, 0.0, 1.0);
}

// Bag-of-symbols over per-message symbol lists.
Disentanglement bag_of_symbols(const Corpus& corpus, const std::vector<std::vector<Segment>>& per_message) {
  require_pairs(corpus);
  const auto attrs = attribute_columns(corpus);
  // symbol -> (message, count) occurrences
  std::map<Segment, std::vector<std::pair<std::size_t, int>>> occurrences;
  for (std::size_t m = 0; m < per_message.size(); ++m) {
    std::map<Segment, int> local;
    for (const auto& s : per_message[m]) ++local[s];
    for (auto& [s, c] : local) occurrences[s].emplace_back(m, c);
  }
  Disentanglement out;
  double sum = 0;
  std::vector<int> counts(corpus.size());
  for (const auto& [symbol, occ] : occurrences) {
    ++out.terms;
    std::fill(counts.begin(), counts.end(), 0);
    int kx = 1;
    for (auto [m, c] : occ) {
      counts[m] = c;
      kx = std::max(kx, c + 1);
    }
    if (auto gap = information_gap(counts, kx, attrs, {})) {
      ++out.informative;
      sum += *gap;
    }
  }
  out.value = out.informative ? sum / static_cast<double>(out.informative) : 0.0;
  return out;
}

}  // namespace

Disentanglement bosdis(const Corpus& corpus) {
  std::vector<std::vector<Segment>> per_message(corpus.size());
  for (std::size_t m = 0; m < corpus.size(); ++m)
    for (int c : corpus.message(m).chars) per_message[m].push_back({c});
  return bag_of_symbols(corpus, per_message);
}

Disentanglement bosdis(const SegmentedCorpus& segmented) {
  std::vector<std::vector<Segment>> per_message(segmented.base().size());
  for (std::size_t m = 0; m < per_message.size(); ++m) per_message[m] = segmented.segments(m);
  return bag_of_symbols(segmented.base(), per_message);
}

BosdisRatio bosdis_ratio(const Corpus& corpus, const SegmentedCorpus& segmented) {
  BosdisRatio out;
  out.characters = bosdis(corpus).value;
  out.symbols = bosdis(segmented).value;
  out.low_confidence = out.characters < kLowConfidenceBosdis;
  if (out.characters <= 0) {
    out.unstable = true;
    out.value = out.symbols > 0 ? std::numeric_limits<double>::infinity()
                                : std::numeric_limits<double>::quiet_NaN();
  } else {
    out.value = out.symbols / out.characters;
  }
  return out;
}

Disentanglement posdis(const Corpus& corpus) {
  require_pairs(corpus);
  const auto attrs = attribute_columns(corpus);
  const int vocab = corpus.config().vocab_size;
  const auto positions = static_cast<std::size_t>(corpus.config().max_len);
  Disentanglement out;
  double sum = 0;
  std::vector<int> chars;
  std::vector<std::size_t> rows;
  for (std::size_t j = 0; j < positions; ++j) {
    ++out.terms;
    chars.clear();
    rows.clear();
    for (std::size_t m = 0; m < corpus.size(); ++m)
      if (j < corpus.message(m).size()) {
        chars.push_back(corpus.message(m).chars[j]);
        rows.push_back(m);
      }
    if (chars.empty()) continue;
    if (auto gap = information_gap(chars, vocab, attrs, rows)) {
      ++out.informative;
      sum += *gap;
    }
  }
  out.value = positions ? sum / static_cast<double>(positions) : 0.0;
  return out;
}

// --- concatenativity --------------------------------------------------------

double haslen(const SegmentedCorpus& segmented) { return segmented.mean_boundaries(); }

double bpelen(const Corpus& corpus, int max_vocab) {
  return bpe_apply(bpe_train(corpus, max_vocab), corpus).mean_segments();
}

std::vector<CurvePoint> bpelen_curve(const Corpus& corpus, const std::vector<int>& vocab_sizes) {
  std::vector<CurvePoint> out;
  for (int v : vocab_sizes) out.push_back({v, bpelen(corpus, v)});
  return out;
}

// --- articulation -----------------------------------------------------------

int parity_violations(std::span<const int> chars) {
  int v = 0;
  for (std::size_t i = 0; i + 1 < chars.size(); ++i) v += ((chars[i] - chars[i + 1]) % 2) == 0;
  return v;
}

double violation_rate(const Message& message) {
  if (message.size() < 2) return 0.0;
  return static_cast<double>(parity_violations(message.chars)) / static_cast<double>(message.size() - 1);
}

double mean_violation_rate(const Corpus& corpus) {
  if (corpus.size() == 0) return 0.0;
  double sum = 0;
  for (const auto& p : corpus.pairs()) sum += violation_rate(p.second);
  return sum / static_cast<double>(corpus.size());
}

// --- significance -----------------------------------------------------------

SampleSummary summarize(std::span<const double> values) {
  SampleSummary s;
  s.n = values.size();
  if (s.n == 0) return s;
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(s.n);
  if (s.n > 1) {
    double ss = 0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(s.n - 1));
  }
  return s;
}

WelchTest compare_means(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) throw std::invalid_argument("Welch test needs at least two observations per sample");
  const auto sa = summarize(a);
  const auto sb = summarize(b);
  const double va = sa.stddev * sa.stddev / static_cast<double>(sa.n);
  const double vb = sb.stddev * sb.stddev / static_cast<double>(sb.n);
  const double diff = sa.mean - sb.mean;
  WelchTest out;
  if (va + vb == 0) {
    out.df = static_cast<double>(sa.n + sb.n - 2);
    if (diff == 0) return out;
    out.t = diff > 0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
    out.p = 0;
    return out;
  }
  out.t = diff / std::sqrt(va + vb);
  out.df = (va + vb) * (va + vb) /
           (va * va / static_cast<double>(sa.n - 1) + vb * vb / static_cast<double>(sb.n - 1));
  boost::math::students_t dist(out.df);
  out.p = std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(out.t))));
  return out;
}

// --- report -----------------------------------------------------------------

std::string segmenter_name(int max_vocab) {
  return max_vocab == kMaxVocab ? "bpemax" : "bpe" + std::to_string(max_vocab);
}

MetricReport full_report(const Corpus& corpus, const ReportOptions& options) {
  MetricReport r;
  const auto fusion = f_topsim(corpus, options.topsim);
  r.topsim = fusion.topsim;
  r.f_topsim = fusion.f_topsim;
  r.f_topsim_delta = fusion.delta;
  r.best_fusion_pair = fusion.best_pair;
  r.bosdis_char = bosdis(corpus).value;
  r.posdis = posdis(corpus).value;
  r.articulation_violation_rate = mean_violation_rate(corpus);

  const auto model = fit_entropy(corpus, options.entropy_window);
  const auto has = has_segment(corpus, model, options.tau, options.convention);
  r.haslen = haslen(has);
  r.segmenters.push_back({"has", r.haslen, bosdis(has).value, bosdis_ratio(corpus, has)});
  for (int v : options.bpe_vocab_sizes) {
    const auto seg = bpe_apply(bpe_train(corpus, v), corpus);
    r.bpelen.push_back({v, seg.mean_segments()});
    r.segmenters.push_back({segmenter_name(v), seg.mean_segments(), bosdis(seg).value, bosdis_ratio(corpus, seg)});
  }
  return r;
}

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ec == std::errc{} ? end : buf);
}

namespace {

std::string fixed3(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::fixed, 3);
  return std::string(buf, ec == std::errc{} ? end : buf);
}

std::vector<std::pair<std::string, std::string>> report_rows(const MetricReport& r, bool exact) {
  auto num = [exact](double v) { return exact ? format_number(v) : fixed3(v); };
  std::vector<std::pair<std::string, std::string>> rows;
  rows.emplace_back("topsim", num(r.topsim.value));
  rows.emplace_back("topsim_degenerate", r.topsim.degenerate ? "1" : "0");
  rows.emplace_back("bosdis_char", num(r.bosdis_char));
  rows.emplace_back("posdis", num(r.posdis));
  rows.emplace_back("haslen", num(r.haslen));
  for (const auto& p : r.bpelen) rows.emplace_back("bpelen_" + segmenter_name(p.vocab_size).substr(3), num(p.bpelen));
  for (const auto& s : r.segmenters) {
    rows.emplace_back("bosdis_" + s.name, num(s.bosdis));
    rows.emplace_back("bosdis_ratio_" + s.name, num(s.ratio.value));
    if (s.ratio.unstable) rows.emplace_back("bosdis_ratio_" + s.name + "_unstable", "1");
    if (s.ratio.low_confidence) rows.emplace_back("bosdis_ratio_" + s.name + "_low_confidence", "1");
  }
  rows.emplace_back("f_topsim", num(r.f_topsim));
  rows.emplace_back("f_topsim_delta", num(r.f_topsim_delta));
  rows.emplace_back("best_fusion_pair",
                    std::to_string(r.best_fusion_pair.first) + "," + std::to_string(r.best_fusion_pair.second));
  rows.emplace_back("articulation_violation_rate", num(r.articulation_violation_rate));
  return rows;
}

}  // namespace

void write_report_tsv(const MetricReport& report, std::ostream& out) {
  out << "metric\tvalue\n";
  for (const auto& [k, v] : report_rows(report, true)) out << k << '\t' << v << '\n';
}

void write_report_table(const MetricReport& report, std::ostream& out) {
  const auto rows = report_rows(report, false);
  std::size_t width = 0;
  for (const auto& row : rows) width = std::max(width, row.first.size());
  for (const auto& [k, v] : rows) out << std::left << std::setw(static_cast<int>(width) + 2) << k << v << '\n';
}

}  // namespace morphkit
