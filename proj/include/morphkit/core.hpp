// Domain types shared by every module: meaning spaces, messages, corpora,
// and the TSV/config file formats.
#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace morphkit {

// Thrown for malformed input files; carries the 1-based line number.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Thrown when a requested meaning space or symbol inventory cannot be built.
class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct AttrValConfig {
  std::vector<int> cardinalities;
  int vocab_size = 8;
  int max_len = 9;
  // Only consumed by the trainer's loss weighting.
  std::vector<double> attribute_weights;

  std::size_t num_attributes() const { return cardinalities.size(); }
  std::uint64_t num_meanings() const;

  // Throws std::invalid_argument when an invariant does not hold.
  void validate() const;

  bool operator==(const AttrValConfig&) const = default;

  static AttrValConfig preset(std::string_view name);
  static AttrValConfig default_preset();
  static AttrValConfig inflection_preset();
};

struct Meaning {
  std::vector<int> values;
  auto operator<=>(const Meaning&) const = default;
  bool operator==(const Meaning&) const = default;
};

struct Message {
  std::vector<int> chars;
  std::size_t size() const { return chars.size(); }
  auto operator<=>(const Message&) const = default;
  bool operator==(const Message&) const = default;
};

// Mixed-radix index of a meaning (attribute 0 is the most significant digit).
std::uint64_t meaning_index(const AttrValConfig& config, const Meaning& meaning);
Meaning meaning_from_index(const AttrValConfig& config, std::uint64_t index);

bool conforms(const AttrValConfig& config, const Meaning& meaning);

inline constexpr std::uint64_t kDefaultMeaningCap = 1'000'000;

// Full Cartesian product in lexicographic order.
std::vector<Meaning> enumerate_meanings(const AttrValConfig& config,
                                        std::uint64_t cap = kDefaultMeaningCap);

using Metadata = std::map<std::string, std::string>;

// Aligned (meaning, message) pairs over one configuration. Immutable once
// built; meanings are unique and every message is non-empty with characters
// inside the vocabulary.
class Corpus {
 public:
  using Pair = std::pair<Meaning, Message>;

  Corpus(AttrValConfig config, std::vector<Pair> pairs, Metadata metadata = {});

  const AttrValConfig& config() const { return config_; }
  const std::vector<Pair>& pairs() const { return pairs_; }
  const Metadata& metadata() const { return metadata_; }
  std::size_t size() const { return pairs_.size(); }
  const Meaning& meaning(std::size_t i) const { return pairs_[i].first; }
  const Message& message(std::size_t i) const { return pairs_[i].second; }

  double mean_message_length() const;

  bool operator==(const Corpus&) const = default;

 private:
  AttrValConfig config_;
  std::vector<Pair> pairs_;
  Metadata metadata_;
};

// Corpus TSV: header `meaning\tmessage`, one comma-separated row per pair.
void write_corpus(const Corpus& corpus, std::ostream& out);
void write_corpus(const Corpus& corpus, const std::filesystem::path& path);

// When `config` is absent it is inferred from the data: cardinality = max
// value + 1 per attribute, vocab = max(max char + 1, 2), max_len = longest
// message, uniform weights.
Corpus read_corpus(std::istream& in, const std::optional<AttrValConfig>& config = std::nullopt);
Corpus read_corpus(const std::filesystem::path& path,
                   const std::optional<AttrValConfig>& config = std::nullopt);

// key=value config text (`cardinalities=16,16,16`, `vocab_size=8`, ...).
void write_config(const AttrValConfig& config, std::ostream& out);
void write_config(const AttrValConfig& config, const std::filesystem::path& path);
AttrValConfig read_config(std::istream& in);
AttrValConfig read_config(const std::filesystem::path& path);

std::string join_ints(const std::vector<int>& values, char sep = ',');
// Strict decimal list parser; throws std::invalid_argument on bad tokens.
std::vector<int> parse_ints(std::string_view text, char sep = ',');

}  // namespace morphkit
