#include "morphkit/langgen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <set>
#include <stdexcept>

#include "morphkit/random.hpp"

namespace morphkit {

namespace {

constexpr std::uint64_t kRetryCap = 1'000'000;
constexpr int kInjectivityAttempts = 64;

struct KindName {
  LanguageKind kind;
  std::string_view name;
};

constexpr KindName kKindNames[] = {
    {LanguageKind::kPerfectConcat, "perfect_concat"},
    {LanguageKind::kMixedConcat, "mixed_concat"},
    {LanguageKind::kNonconcat, "nonconcat"},
    {LanguageKind::kVariableLength, "variable_length"},
    {LanguageKind::kFusion, "fusion"},
    {LanguageKind::kMutation, "mutation"},
    {LanguageKind::kReordering, "reordering"},
    {LanguageKind::kRandom, "random"},
};

// Splits `total` into `parts` near-equal lengths, remainder to the front.
std::vector<int> split_length(int total, int parts) {
  std::vector<int> out(static_cast<std::size_t>(parts), total / parts);
  for (int i = 0; i < total % parts; ++i) ++out[static_cast<std::size_t>(i)];
  return out;
}

// vocab^len, saturating.
std::uint64_t capacity(int vocab, int len) {
  std::uint64_t total = 1;
  for (int i = 0; i < len; ++i) {
    if (total > UINT64_MAX / static_cast<std::uint64_t>(vocab)) return UINT64_MAX;
    total *= static_cast<std::uint64_t>(vocab);
  }
  return total;
}

Symbol random_symbol(Rng& rng, int vocab, int len) {
  Symbol s(static_cast<std::size_t>(len));
  for (auto& c : s) c = rng.below(vocab);
  return s;
}

// `count` distinct symbols of one fixed length, by rejection.
std::vector<Symbol> distinct_symbols(Rng& rng, int count, int vocab, int len) {
  if (len < 1) throw CapacityError("symbol length must be at least 1");
  if (capacity(vocab, len) < static_cast<std::uint64_t>(count))
    throw CapacityError("vocabulary of " + std::to_string(vocab) + " cannot supply " +
                        std::to_string(count) + " distinct symbols of length " + std::to_string(len));
  std::set<Symbol> used;
  std::vector<Symbol> out;
  out.reserve(static_cast<std::size_t>(count));
  std::uint64_t tries = 0;
  while (static_cast<int>(out.size()) < count) {
    if (++tries > kRetryCap) throw CapacityError("symbol sampling exceeded retry cap");
    Symbol s = random_symbol(rng, vocab, len);
    if (used.insert(s).second) out.push_back(std::move(s));
  }
  return out;
}

bool is_prefix(const Symbol& a, const Symbol& b) {
  return a.size() <= b.size() && std::equal(a.begin(), a.end(), b.begin());
}

// Prefix-free symbols with lengths drawn uniformly from [1, max_len], redrawn
// whenever a length would break the Kraft budget needed by the values still
// to be assigned. Prefix-freeness keeps concatenations uniquely decodable.
std::vector<Symbol> prefix_free_symbols(Rng& rng, int count, int vocab, int max_len) {
  const double v = static_cast<double>(vocab);
  auto weight = [v](int len) { return std::pow(v, -len); };
  if (static_cast<double>(count) * weight(max_len) > 1.0 + 1e-12)
    throw CapacityError("vocabulary too small for " + std::to_string(count) +
                        " prefix-free symbols of length <= " + std::to_string(max_len));
  std::vector<int> lengths;
  double used = 0;
  for (int i = 0; i < count; ++i) {
    const double reserve = static_cast<double>(count - i - 1) * weight(max_len);
    std::vector<int> feasible;
    for (int len = 1; len <= max_len; ++len)
      if (used + weight(len) + reserve <= 1.0 + 1e-12) feasible.push_back(len);
    int len = rng.below(max_len) + 1;
    if (std::find(feasible.begin(), feasible.end(), len) == feasible.end())
      len = feasible[static_cast<std::size_t>(rng.below(static_cast<int>(feasible.size())))];
    used += weight(len);
    lengths.push_back(len);
  }
  // Shortest first: Kraft then guarantees room for every later symbol.
  std::vector<int> order(static_cast<std::size_t>(count));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return lengths[static_cast<std::size_t>(a)] < lengths[static_cast<std::size_t>(b)]; });
  std::vector<Symbol> out(static_cast<std::size_t>(count));
  std::vector<Symbol> assigned;
  std::uint64_t tries = 0;
  for (int idx : order) {
    while (true) {
      if (++tries > kRetryCap) throw CapacityError("symbol sampling exceeded retry cap");
      Symbol s = random_symbol(rng, vocab, lengths[static_cast<std::size_t>(idx)]);
      bool clash = std::any_of(assigned.begin(), assigned.end(),
                               [&](const Symbol& a) { return is_prefix(a, s) || is_prefix(s, a); });
      if (!clash) {
        assigned.push_back(s);
        out[static_cast<std::size_t>(idx)] = std::move(s);
        break;
      }
    }
  }
  return out;
}

SymbolSlot single_slot(Rng& rng, const AttrValConfig& config, int attr, int len) {
  SymbolSlot slot;
  slot.attributes = {attr};
  slot.symbols = distinct_symbols(rng, config.cardinalities[static_cast<std::size_t>(attr)],
                                  config.vocab_size, len);
  return slot;
}

void check_attribute(const AttrValConfig& config, int attr, const char* what) {
  if (attr < 0 || attr >= static_cast<int>(config.num_attributes()))
    throw std::invalid_argument(std::string(what) + " attribute index out of range");
}

}  // namespace

std::string_view kind_name(LanguageKind kind) {
  for (const auto& k : kKindNames)
    if (k.kind == kind) return k.name;
  return "unknown";
}

LanguageKind parse_kind(std::string_view name) {
  for (const auto& k : kKindNames)
    if (k.name == name) return k.kind;
  throw std::invalid_argument("unknown language kind '" + std::string(name) + "'");
}

std::pair<int, int> LanguageSpec::resolved_fusion_pair() const {
  if (fusion_pair) {
    auto [a, b] = *fusion_pair;
    return {std::min(a, b), std::max(a, b)};
  }
  const int n = static_cast<int>(config.num_attributes());
  if (n < 2) throw std::invalid_argument("fusion needs at least two attributes");
  std::vector<int> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](int a, int b) {
    const int ca = config.cardinalities[static_cast<std::size_t>(a)];
    const int cb = config.cardinalities[static_cast<std::size_t>(b)];
    return ca != cb ? ca < cb : a > b;
  });
  return {std::min(idx[0], idx[1]), std::max(idx[0], idx[1])};
}

int LanguageSpec::resolved_function_attribute() const {
  return function_attribute.value_or(static_cast<int>(config.num_attributes()) - 1);
}

int LanguageSpec::resolved_contiguous_prefix() const {
  if (contiguous_prefix) return *contiguous_prefix;
  switch (kind) {
    case LanguageKind::kMixedConcat: return 1;
    case LanguageKind::kNonconcat: return 0;
    default: return static_cast<int>(config.num_attributes());
  }
}

LanguageSpec parse_language_spec(std::string_view text, AttrValConfig config, std::uint64_t seed) {
  LanguageSpec spec;
  spec.config = std::move(config);
  spec.seed = seed;
  auto colon = text.find(':');
  spec.kind = parse_kind(text.substr(0, colon));
  if (colon == std::string_view::npos) return spec;
  std::string_view rest = text.substr(colon + 1);
  while (!rest.empty()) {
    auto semi = rest.find(';');
    std::string_view item = rest.substr(0, semi);
    rest = semi == std::string_view::npos ? std::string_view{} : rest.substr(semi + 1);
    auto eq = item.find('=');
    if (eq == std::string_view::npos)
      throw std::invalid_argument("expected key=value in language spec, got '" + std::string(item) + "'");
    std::string_view key = item.substr(0, eq);
    std::vector<int> values = parse_ints(item.substr(eq + 1));
    auto want = [&](std::size_t n) {
      if (values.size() != n)
        throw std::invalid_argument("wrong number of values for '" + std::string(key) + "'");
    };
    if (key == "pair") {
      want(2);
      spec.fusion_pair = std::pair{values[0], values[1]};
    } else if (key == "k") {
      want(1);
      spec.mutation_overlap = values[0];
    } else if (key == "fn") {
      want(1);
      spec.function_attribute = values[0];
    } else if (key == "prefix") {
      want(1);
      spec.contiguous_prefix = values[0];
    } else if (key == "maxlen") {
      want(1);
      spec.max_symbol_length = values[0];
    } else {
      throw std::invalid_argument("unknown language parameter '" + std::string(key) + "'");
    }
  }
  return spec;
}

std::string to_string(const LanguageSpec& spec) {
  std::string out(kind_name(spec.kind));
  std::vector<std::string> params;
  switch (spec.kind) {
    case LanguageKind::kMixedConcat:
    case LanguageKind::kNonconcat:
      params.push_back("prefix=" + std::to_string(spec.resolved_contiguous_prefix()));
      break;
    case LanguageKind::kVariableLength:
      params.push_back("maxlen=" + std::to_string(spec.max_symbol_length));
      break;
    case LanguageKind::kFusion: {
      auto [a, b] = spec.resolved_fusion_pair();
      params.push_back("pair=" + std::to_string(a) + "," + std::to_string(b));
      break;
    }
    case LanguageKind::kMutation:
      params.push_back("k=" + std::to_string(spec.mutation_overlap));
      break;
    case LanguageKind::kReordering:
      params.push_back("fn=" + std::to_string(spec.resolved_function_attribute()));
      break;
    default:
      break;
  }
  for (std::size_t i = 0; i < params.size(); ++i) out += (i ? ";" : ":") + params[i];
  return out;
}

int SymbolSlot::value_of(const Meaning& meaning, const AttrValConfig& config) const {
  int value = 0;
  for (int a : attributes)
    value = value * config.cardinalities[static_cast<std::size_t>(a)] +
            meaning.values[static_cast<std::size_t>(a)];
  return value;
}

Message interleave(const std::vector<const Symbol*>& symbols) {
  Message out;
  std::size_t longest = 0;
  for (const Symbol* s : symbols) longest = std::max(longest, s->size());
  for (std::size_t i = 0; i < longest; ++i)
    for (const Symbol* s : symbols)
      if (i < s->size()) out.chars.push_back((*s)[i]);
  return out;
}

Message Language::encode(const Meaning& meaning) const {
  const auto& config = spec_.config;
  if (!conforms(config, meaning)) throw std::invalid_argument("meaning does not conform to config");

  auto symbol_of = [&](const SymbolSlot& slot) -> const Symbol& {
    return slot.symbols[static_cast<std::size_t>(slot.value_of(meaning, config))];
  };

  switch (spec_.kind) {
    case LanguageKind::kRandom:
      return memorized_[static_cast<std::size_t>(meaning_index(config, meaning))];

    case LanguageKind::kMixedConcat:
    case LanguageKind::kNonconcat: {
      const auto prefix = static_cast<std::size_t>(spec_.resolved_contiguous_prefix());
      Message out;
      std::vector<const Symbol*> rest;
      for (std::size_t i = 0; i < table_.slots.size(); ++i) {
        const Symbol& s = symbol_of(table_.slots[i]);
        if (i < prefix)
          out.chars.insert(out.chars.end(), s.begin(), s.end());
        else
          rest.push_back(&s);
      }
      Message tail = interleave(rest);
      out.chars.insert(out.chars.end(), tail.chars.begin(), tail.chars.end());
      return out;
    }

    case LanguageKind::kMutation: {
      Message out;
      out.chars.assign(static_cast<std::size_t>(config.max_len), 0);
      for (std::size_t i = 0; i < table_.slots.size(); ++i) {
        const Symbol& s = symbol_of(table_.slots[i]);
        for (std::size_t j = 0; j < s.size(); ++j) {
          int& c = out.chars[static_cast<std::size_t>(offsets_[i]) + j];
          c = (c + s[j]) % config.vocab_size;
        }
      }
      return out;
    }

    case LanguageKind::kReordering: {
      Symbol concat;
      for (const auto& slot : table_.slots) {
        const Symbol& s = symbol_of(slot);
        concat.insert(concat.end(), s.begin(), s.end());
      }
      const int fn = spec_.resolved_function_attribute();
      const auto& perm = permutations_[static_cast<std::size_t>(meaning.values[static_cast<std::size_t>(fn)])];
      Message out;
      out.chars.resize(concat.size());
      for (std::size_t i = 0; i < concat.size(); ++i)
        out.chars[i] = concat[static_cast<std::size_t>(perm[i])];
      return out;
    }

    default: {
      Message out;
      for (const auto& slot : table_.slots) {
        const Symbol& s = symbol_of(slot);
        out.chars.insert(out.chars.end(), s.begin(), s.end());
      }
      return out;
    }
  }
}

namespace {

void build_tables(const LanguageSpec& spec, Rng& rng, SymbolTable& table,
                  std::vector<int>& offsets, std::vector<std::vector<int>>& permutations,
                  std::vector<Message>& memorized) {
  const auto& config = spec.config;
  const int n = static_cast<int>(config.num_attributes());
  const int m = config.max_len;
  const int vocab = config.vocab_size;
  table.slots.clear();
  offsets.clear();
  permutations.clear();
  memorized.clear();

  switch (spec.kind) {
    case LanguageKind::kPerfectConcat:
    case LanguageKind::kMixedConcat:
    case LanguageKind::kNonconcat: {
      const int prefix = spec.resolved_contiguous_prefix();
      if (prefix < 0 || prefix > n) throw std::invalid_argument("contiguous prefix out of range");
      if (m < n) throw CapacityError("max_len shorter than the number of attributes");
      auto lengths = split_length(m, n);
      for (int a = 0; a < n; ++a) table.slots.push_back(single_slot(rng, config, a, lengths[static_cast<std::size_t>(a)]));
      break;
    }

    case LanguageKind::kVariableLength: {
      if (spec.max_symbol_length < 1) throw std::invalid_argument("max symbol length must be >= 1");
      if (m < n) throw CapacityError("max_len shorter than the number of attributes");
      const int max_len = std::min(spec.max_symbol_length, m / n);
      for (int a = 0; a < n; ++a) {
        SymbolSlot slot;
        slot.attributes = {a};
        slot.symbols = prefix_free_symbols(rng, config.cardinalities[static_cast<std::size_t>(a)], vocab, max_len);
        table.slots.push_back(std::move(slot));
      }
      break;
    }

    case LanguageKind::kFusion: {
      auto [p, q] = spec.resolved_fusion_pair();
      check_attribute(config, p, "fusion");
      check_attribute(config, q, "fusion");
      if (p == q) throw std::invalid_argument("fusion pair must name two distinct attributes");
      if (m < n) throw CapacityError("max_len shorter than the number of attributes");
      auto lengths = split_length(m, n);
      for (int a = 0; a < n; ++a) {
        if (a == q) continue;
        if (a == p) {
          SymbolSlot slot;
          slot.attributes = {p, q};
          const int count = config.cardinalities[static_cast<std::size_t>(p)] *
                            config.cardinalities[static_cast<std::size_t>(q)];
          slot.symbols = distinct_symbols(rng, count, vocab,
                                          lengths[static_cast<std::size_t>(p)] + lengths[static_cast<std::size_t>(q)]);
          table.slots.push_back(std::move(slot));
        } else {
          table.slots.push_back(single_slot(rng, config, a, lengths[static_cast<std::size_t>(a)]));
        }
      }
      break;
    }

    case LanguageKind::kMutation: {
      const int k = spec.mutation_overlap;
      if (k < 0 || k > m) throw std::invalid_argument("mutation overlap must lie in [0, max_len]");
      int stride = 0;
      int len = m;
      if (k > 0 && k < m) {
        if ((m - k) % n != 0)
          throw std::invalid_argument("mutation overlap " + std::to_string(k) +
                                      " does not tile max_len " + std::to_string(m));
        stride = (m - k) / n;
        len = stride + k;
        if (n > 1 && stride == 0) len = m;
      }
      for (int a = 0; a < n; ++a) {
        table.slots.push_back(single_slot(rng, config, a, len));
        offsets.push_back(a * stride);
      }
      break;
    }

    case LanguageKind::kReordering: {
      if (n < 2) throw std::invalid_argument("reordering needs at least two attributes");
      const int fn = spec.resolved_function_attribute();
      check_attribute(config, fn, "function");
      if (m < n - 1) throw CapacityError("max_len shorter than the number of attributes");
      auto lengths = split_length(m, n - 1);
      std::size_t li = 0;
      for (int a = 0; a < n; ++a)
        if (a != fn) table.slots.push_back(single_slot(rng, config, a, lengths[li++]));
      const int count = config.cardinalities[static_cast<std::size_t>(fn)];
      double perms = 1;
      for (int i = 2; i <= m; ++i) perms *= i;
      if (perms < count) throw CapacityError("not enough distinct permutations of max_len positions");
      std::set<std::vector<int>> used;
      std::uint64_t tries = 0;
      while (static_cast<int>(permutations.size()) < count) {
        if (++tries > kRetryCap) throw CapacityError("permutation sampling exceeded retry cap");
        std::vector<int> perm(static_cast<std::size_t>(m));
        std::iota(perm.begin(), perm.end(), 0);
        rng.shuffle(perm);
        if (used.insert(perm).second) permutations.push_back(std::move(perm));
      }
      break;
    }

    case LanguageKind::kRandom: {
      const auto meanings = enumerate_meanings(config);
      memorized.reserve(meanings.size());
      for (std::size_t i = 0; i < meanings.size(); ++i)
        memorized.push_back(Message{random_symbol(rng, vocab, m)});
      break;
    }
  }
}

bool injective(const Language& lang) {
  std::set<Message> seen;
  for (const auto& meaning : enumerate_meanings(lang.spec().config))
    if (!seen.insert(lang.encode(meaning)).second) return false;
  return true;
}

}  // namespace

Language build_language(const LanguageSpec& spec) {
  spec.config.validate();
  Language lang;
  lang.spec_ = spec;
  Rng rng(spec.seed);
  for (int attempt = 0; attempt < kInjectivityAttempts; ++attempt) {
    build_tables(spec, rng, lang.table_, lang.offsets_, lang.permutations_, lang.memorized_);
    // Summed and permuted kinds can collide; resample until the map is 1:1.
    if (spec.kind == LanguageKind::kRandom || injective(lang)) return lang;
  }
  throw CapacityError("could not build an injective " + std::string(kind_name(spec.kind)) +
                      " language within " + std::to_string(kInjectivityAttempts) + " attempts");
}

Corpus generate_corpus(const Language& language) {
  const auto& spec = language.spec();
  std::vector<Corpus::Pair> pairs;
  for (auto& meaning : enumerate_meanings(spec.config)) {
    Message msg = language.encode(meaning);
    pairs.emplace_back(std::move(meaning), std::move(msg));
  }
  Metadata meta{{"generator", "langgen"},
                {"language", to_string(spec)},
                {"seed", std::to_string(spec.seed)}};
  return Corpus(spec.config, std::move(pairs), std::move(meta));
}

Corpus generate_corpus(const LanguageSpec& spec) { return generate_corpus(build_language(spec)); }

void write_symbol_table(const Language& language, std::ostream& out) {
  const auto& config = language.spec().config;
  out << "attr\tvalue\tsymbol\n";
  for (const auto& slot : language.table().slots) {
    std::string attr;
    for (std::size_t i = 0; i < slot.attributes.size(); ++i)
      attr += (i ? "+" : "") + std::to_string(slot.attributes[i]);
    for (std::size_t v = 0; v < slot.symbols.size(); ++v) {
      std::string value;
      int rem = static_cast<int>(v);
      std::vector<int> digits(slot.attributes.size());
      for (std::size_t i = slot.attributes.size(); i-- > 0;) {
        const int card = config.cardinalities[static_cast<std::size_t>(slot.attributes[i])];
        digits[i] = rem % card;
        rem /= card;
      }
      for (std::size_t i = 0; i < digits.size(); ++i) value += (i ? "+" : "") + std::to_string(digits[i]);
      out << attr << '\t' << value << '\t' << join_ints(slot.symbols[v]) << '\n';
    }
  }
}

}  // namespace morphkit
