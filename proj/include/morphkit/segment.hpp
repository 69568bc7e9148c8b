// Unsupervised segmentation of messages into multi-character symbols.
//
// Two segmenters share the SegmentedCorpus output:
//  - Harris' articulation scheme: cut where branching entropy of the next
//    character changes by more than a threshold.
//  - Byte-pair encoding: greedy most-frequent-pair merging under a symbol
//    inventory budget.
#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string_view>
#include <utility>
#include <vector>

#include "morphkit/core.hpp"

namespace morphkit {

using Segment = std::vector<int>;

// A corpus plus per-message cut indices. Cuts are strictly increasing and
// lie in (0, len).
class SegmentedCorpus {
 public:
  // Throws std::invalid_argument when cuts are unsorted or out of range.
  SegmentedCorpus(Corpus base, std::vector<std::vector<int>> boundaries);

  const Corpus& base() const { return base_; }
  const std::vector<std::vector<int>>& boundaries() const { return boundaries_; }
  const std::vector<int>& boundaries(std::size_t i) const { return boundaries_[i]; }
  // Distinct segments actually occurring, ordered lexicographically.
  const std::set<Segment>& symbol_vocab() const { return vocab_; }

  std::vector<Segment> segments(std::size_t i) const;
  double mean_boundaries() const;
  double mean_segments() const;

 private:
  Corpus base_;
  std::vector<std::vector<int>> boundaries_;
  std::set<Segment> vocab_;
};

// Splits a message at the given cut indices.
std::vector<Segment> split_at(const Message& message, const std::vector<int>& cuts);

// Segmented-corpus TSV: `meaning\tmessage\tboundaries`.
void write_segmented(const SegmentedCorpus& segmented, std::ostream& out);
SegmentedCorpus read_segmented(std::istream& in,
                               const std::optional<AttrValConfig>& config = std::nullopt);

// --- Harris' articulation scheme -------------------------------------------

enum class HasConvention {
  kRise,      // cut at i when H(i) - H(i-1) > tau
  kVerbatim,  // cut at i when H(i) - H(i+1) > tau
};

HasConvention parse_has_convention(std::string_view name);

// Next-character statistics keyed by context. The outcome alphabet is the
// vocabulary plus an end-of-message marker (index vocab_size).
class EntropyModel {
 public:
  // window == 0 uses the full prefix as context; otherwise the last
  // `window` characters.
  EntropyModel(const Corpus& corpus, std::size_t window = 0);

  std::size_t window() const { return window_; }
  int vocab_size() const { return vocab_size_; }

  // Context for the prefix of length `i` of `message`.
  std::vector<int> context(const Message& message, std::size_t i) const;
  // Next-outcome probabilities after a context seen in training.
  std::vector<double> distribution(const std::vector<int>& context) const;
  // Branching entropy (nats) after a context seen in training.
  double entropy(const std::vector<int>& context) const;
  // H(0)..H(len): entropy after each prefix of the message.
  std::vector<double> branching_entropies(const Message& message) const;

 private:
  std::size_t window_;
  int vocab_size_;
  std::map<std::vector<int>, std::vector<std::size_t>> counts_;
};

EntropyModel fit_entropy(const Corpus& corpus, std::size_t window = 0);

SegmentedCorpus has_segment(const Corpus& corpus, const EntropyModel& model, double tau = 0.0,
                            HasConvention convention = HasConvention::kRise);

// --- Byte-pair encoding -----------------------------------------------------

// Sentinel for "merge while any pair occurs at least twice".
inline constexpr int kMaxVocab = -1;

struct Merge {
  Segment left;
  Segment right;
  bool operator==(const Merge&) const = default;
};

struct MergeList {
  int base_vocab = 0;
  std::vector<Merge> merges;
  // Distinct symbols: base characters plus every distinct merge result.
  std::size_t inventory_size() const;
  bool operator==(const MergeList&) const = default;
};

// Ties between equally frequent pairs go to the lexicographically lowest
// (left, right) by symbol content.
MergeList bpe_train(const Corpus& corpus, int max_vocab);
SegmentedCorpus bpe_apply(const MergeList& merges, const Corpus& corpus);

// One merge per line: `left\tright`, symbols as comma-separated characters.
void write_merges(const MergeList& merges, std::ostream& out);
MergeList read_merges(std::istream& in, int base_vocab);

// --- segmenter handles -----------------------------------------------------

using Segmenter = std::function<SegmentedCorpus(const Corpus&)>;

// HAS with a model fit on the corpus being segmented.
Segmenter make_has_segmenter(double tau = 0.0, HasConvention convention = HasConvention::kRise,
                             std::size_t window = 0);
// BPE trained and applied on the corpus being segmented.
Segmenter make_bpe_segmenter(int max_vocab);

}  // namespace morphkit
