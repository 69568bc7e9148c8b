// Natural-language inflection tables and the attribute-value sublanguages
// sampled from them (root x tense x person -> surface form).
#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "morphkit/core.hpp"
#include "morphkit/segment.hpp"

namespace morphkit {

class LoadError : public std::runtime_error {
 public:
  LoadError(std::size_t row, const std::string& what)
      : std::runtime_error("row " + std::to_string(row) + ": " + what), row_(row) {}
  std::size_t row() const { return row_; }

 private:
  std::size_t row_;
};

struct InflectionRecord {
  std::string lexeme;
  std::string tense;
  std::string person;
  std::string form;  // NFC-normalized
};

// NFC normalization followed by extended grapheme cluster segmentation.
// Throws std::invalid_argument on malformed UTF-8.
std::vector<std::string> graphemes(const std::string& utf8);

class InflectionTable {
 public:
  explicit InflectionTable(std::vector<InflectionRecord> records);

  const std::vector<InflectionRecord>& records() const { return records_; }
  // Graphemes ordered by code point sequence; index = character id.
  const std::vector<std::string>& alphabet() const { return alphabet_; }
  std::size_t longest_form() const { return longest_; }

  std::vector<int> encode(const std::string& form) const;
  std::string decode(const std::vector<int>& chars) const;

  // Form for a (lexeme, tense, person) cell, or nullptr.
  const std::string* find(const std::string& lexeme, const std::string& tense,
                          const std::string& person) const;

 private:
  std::vector<InflectionRecord> records_;
  std::vector<std::string> alphabet_;
  std::map<std::string, int> ids_;
  std::map<std::string, std::size_t> index_;  // key "lexeme\ttense\tperson"
  std::size_t longest_ = 0;
};

// CSV with header `lexeme,tense,person,form`. Rows are 1-based counting the
// header.
InflectionTable load_table(std::istream& in);
InflectionTable load_table(const std::filesystem::path& path);

// `id\tgrapheme` sidecar.
void write_alphabet(const InflectionTable& table, std::ostream& out);

struct SublanguageShape {
  int roots = 42;
  int tenses = 2;
  int persons = 3;
};

struct Sublanguage {
  std::vector<std::string> roots;
  std::vector<std::string> tenses;
  std::vector<std::string> persons;
  Corpus corpus;
};

// The tense and person value sets are fixed across sublanguages: the most
// frequent values in the table (ties by name). Each sublanguage samples its
// roots without replacement among lexemes covering every chosen cell.
// Throws CapacityError listing missing cells when too few lexemes qualify.
std::vector<Sublanguage> sample_sublanguages(const InflectionTable& table, int count, std::uint64_t seed,
                                             const SublanguageShape& shape = {});

// Fraction of sublanguages whose BoSDis ratio under `segmenter` exceeds 1.
double meaningfulness_rate(const std::vector<Sublanguage>& sublanguages, const Segmenter& segmenter);

}  // namespace morphkit
