// Seeded generators for artificial languages over an attribute-value space.
//
// Every language assigns symbols (short character strings) to attribute
// values and composes them into a message with a kind-specific rule:
//
//   perfect_concat   symbols concatenated in attribute order
//   mixed_concat     leading attributes concatenated, the rest interleaved
//   nonconcat        all symbols interleaved round-robin
//   variable_length  concatenation of prefix-free symbols of length 1..4
//   fusion           one symbol per value combination of a fused pair
//   mutation(k)      overlapping symbols summed modulo |C|
//   reordering       one attribute picks a permutation of the others' chars
//   random           memorized uniformly random messages
#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "morphkit/core.hpp"

namespace morphkit {

enum class LanguageKind {
  kPerfectConcat,
  kMixedConcat,
  kNonconcat,
  kVariableLength,
  kFusion,
  kMutation,
  kReordering,
  kRandom,
};

std::string_view kind_name(LanguageKind kind);
LanguageKind parse_kind(std::string_view name);

struct LanguageSpec {
  LanguageKind kind = LanguageKind::kPerfectConcat;
  AttrValConfig config = AttrValConfig::default_preset();
  std::uint64_t seed = 0;
  // fusion: fused attribute pair; default is the two lowest-cardinality
  // attributes (ties broken toward higher indices).
  std::optional<std::pair<int, int>> fusion_pair;
  // mutation: overlap between adjacent symbols. 0 means fully overlapping.
  int mutation_overlap = 3;
  // reordering: attribute whose value selects the permutation; default last.
  std::optional<int> function_attribute;
  // mixed_concat/nonconcat: number of leading attributes written
  // contiguously before the remaining ones are interleaved.
  std::optional<int> contiguous_prefix;
  // variable_length: longest symbol; capped at max_len / n.
  int max_symbol_length = 4;

  std::pair<int, int> resolved_fusion_pair() const;
  int resolved_function_attribute() const;
  int resolved_contiguous_prefix() const;
};

// Parses `kind[:key=value[;key=value]]`, e.g. `fusion:pair=1,2`,
// `mutation:k=3`, `reordering:fn=2`, `mixed_concat:prefix=1`.
LanguageSpec parse_language_spec(std::string_view text, AttrValConfig config, std::uint64_t seed);
// Canonical spec string; parse_language_spec(to_string(s)) reproduces s.
std::string to_string(const LanguageSpec& spec);

using Symbol = std::vector<int>;

// Symbols for one attribute, or for a fused group of attributes. Values of a
// group are combined mixed-radix in attribute order.
struct SymbolSlot {
  std::vector<int> attributes;
  std::vector<Symbol> symbols;

  int value_of(const Meaning& meaning, const AttrValConfig& config) const;
};

struct SymbolTable {
  std::vector<SymbolSlot> slots;
};

class Language {
 public:
  const LanguageSpec& spec() const { return spec_; }
  const SymbolTable& table() const { return table_; }
  // Start offset of each slot's symbol (mutation only).
  const std::vector<int>& offsets() const { return offsets_; }
  // Permutation per function-attribute value (reordering only):
  // message[i] = concatenation[perm[i]].
  const std::vector<std::vector<int>>& permutations() const { return permutations_; }

  Message encode(const Meaning& meaning) const;

 private:
  friend Language build_language(const LanguageSpec& spec);

  LanguageSpec spec_;
  SymbolTable table_;
  std::vector<int> offsets_;
  std::vector<std::vector<int>> permutations_;
  std::vector<Message> memorized_;
};

// Deterministic given the LanguageSpec. Throws CapacityError when the vocabulary cannot
// supply distinct symbols (or an injective encoding) of the requested shape,
// std::invalid_argument for inconsistent parameters.
Language build_language(const LanguageSpec& spec);

Corpus generate_corpus(const LanguageSpec& spec);
Corpus generate_corpus(const Language& language);

// Debug dump: `attr\tvalue\tsymbol`; fused slots use `1+2` / `3+5`.
void write_symbol_table(const Language& language, std::ostream& out);

// Round-robin interleave of the given symbols, skipping exhausted ones.
Message interleave(const std::vector<const Symbol*>& symbols);

}  // namespace morphkit
