// Compositionality, concatenativity, and fusionality metrics over corpora.
//
// All information quantities are empirical (plug-in) estimates in nats over
// the corpus, treating each (meaning, message) pair as one observation.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "morphkit/core.hpp"
#include "morphkit/segment.hpp"

namespace morphkit {

// --- distances --------------------------------------------------------------

// Unit-cost edit distance.
int levenshtein(std::span<const int> a, std::span<const int> b);
inline int levenshtein(const Message& a, const Message& b) { return levenshtein(a.chars, b.chars); }

// Hamming distance over attribute tuples; throws on arity mismatch.
int meaning_distance(const Meaning& a, const Meaning& b);

// --- information theory -----------------------------------------------------

// Entropy of a sequence of labels.
double entropy(std::span<const int> labels);
// Mutual information between two aligned label sequences.
double mutual_information(std::span<const int> xs, std::span<const int> ys);

// --- topographic similarity -------------------------------------------------

enum class Correlation { kSpearman, kPearson };

inline constexpr std::uint64_t kAllPairs = 0;

struct TopsimOptions {
  // kAllPairs = every unordered pair; otherwise that many pairs sampled with
  // replacement. Unset: all pairs up to 4096 messages, else 10^6 samples.
  std::optional<std::uint64_t> pair_budget;
  std::uint64_t seed = 0;
  Correlation correlation = Correlation::kSpearman;
};

struct TopsimResult {
  double value = 0;
  // Set when either distance vector had zero variance (value is then 0).
  bool degenerate = false;
  std::uint64_t pairs = 0;
};

TopsimResult topsim(const Corpus& corpus, const TopsimOptions& options = {});

struct FusionScore {
  std::pair<int, int> pair;
  TopsimResult topsim;
};

struct FusionResult {
  TopsimResult topsim;
  std::vector<FusionScore> fusions;  // every unordered attribute pair
  std::pair<int, int> best_pair{0, 1};
  double f_topsim = 0;
  double delta = 0;  // f_topsim - topsim.value
};

// Meaning distance after treating attributes i and j as one attribute.
int fused_meaning_distance(const Meaning& a, const Meaning& b, int i, int j);

// TopSim of every attribute-pair fusion from one pass over message pairs.
// Ties for the best pair go to the lexicographically first pair.
FusionResult f_topsim(const Corpus& corpus, const TopsimOptions& options = {});

// --- disentanglement --------------------------------------------------------

struct Disentanglement {
  double value = 0;
  std::size_t terms = 0;        // symbols or positions considered
  std::size_t informative = 0;  // those with non-zero entropy
};

// Bag-of-symbols disentanglement with single characters as symbols.
Disentanglement bosdis(const Corpus& corpus);
// Bag-of-symbols disentanglement over the segmented symbol vocabulary.
Disentanglement bosdis(const SegmentedCorpus& segmented);

struct BosdisRatio {
  double value = 0;
  double symbols = 0;
  double characters = 0;
  // Character-level BoSDis is zero; value is +inf (or NaN for 0/0).
  bool unstable = false;
  // Character-level BoSDis below kLowConfidenceBosdis.
  bool low_confidence = false;
};

inline constexpr double kLowConfidenceBosdis = 0.005;

BosdisRatio bosdis_ratio(const Corpus& corpus, const SegmentedCorpus& segmented);

// Positional disentanglement over positions 0..max_len-1. Messages shorter
// than a position are left out of that position's statistics.
Disentanglement posdis(const Corpus& corpus);

// --- concatenativity --------------------------------------------------------

// Mean number of boundaries per message.
double haslen(const SegmentedCorpus& segmented);
// Mean number of BPE segments per message at one inventory budget.
double bpelen(const Corpus& corpus, int max_vocab);

struct CurvePoint {
  int vocab_size;  // kMaxVocab for maximal compression
  double bpelen;
};
std::vector<CurvePoint> bpelen_curve(const Corpus& corpus, const std::vector<int>& vocab_sizes);

// --- articulation -----------------------------------------------------------

// Adjacent pairs with equal parity.
int parity_violations(std::span<const int> chars);
inline double articulation_score(std::span<const int> chars, double epsilon) {
  return epsilon * parity_violations(chars);
}
inline double articulation_score(const Message& m, double epsilon) {
  return articulation_score(m.chars, epsilon);
}
// violations / (len - 1); 0 for single-character messages.
double violation_rate(const Message& message);
double mean_violation_rate(const Corpus& corpus);

// --- significance -----------------------------------------------------------

struct WelchTest {
  double t = 0;
  double df = 0;
  double p = 1;
};

// Two-sided Welch two-sample t-test. Needs >= 2 observations per sample.
WelchTest compare_means(std::span<const double> a, std::span<const double> b);

struct SampleSummary {
  double mean = 0;
  double stddev = 0;  // sample standard deviation; 0 for n < 2
  std::size_t n = 0;
};
SampleSummary summarize(std::span<const double> values);

// --- report -----------------------------------------------------------------

struct SegmenterScore {
  std::string name;  // "has", "bpe96", "bpemax", ...
  double length = 0; // HASLen (boundaries) or BPELen (segments)
  double bosdis = 0;
  BosdisRatio ratio;
};

struct ReportOptions {
  double tau = 0.0;
  HasConvention convention = HasConvention::kRise;
  std::size_t entropy_window = 0;
  std::vector<int> bpe_vocab_sizes{96, kMaxVocab};
  TopsimOptions topsim;
};

struct MetricReport {
  TopsimResult topsim;
  double bosdis_char = 0;
  double posdis = 0;
  std::vector<SegmenterScore> segmenters;
  double haslen = 0;
  std::vector<CurvePoint> bpelen;
  double f_topsim = 0;
  double f_topsim_delta = 0;
  std::pair<int, int> best_fusion_pair{0, 1};
  double articulation_violation_rate = 0;
};

MetricReport full_report(const Corpus& corpus, const ReportOptions& options = {});

std::string segmenter_name(int max_vocab);
// `metric\tvalue`, one line per scalar; deterministic formatting.
void write_report_tsv(const MetricReport& report, std::ostream& out);
// Aligned human-readable table.
void write_report_table(const MetricReport& report, std::ostream& out);
// Shortest round-trip decimal form, locale independent.
std::string format_number(double value);

}  // namespace morphkit
