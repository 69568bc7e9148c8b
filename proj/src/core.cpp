#include "morphkit/core.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

namespace morphkit {

namespace {

std::string format_double(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc{}) throw std::runtime_error("cannot format number");
  return std::string(buf, end);
}

double parse_double(std::string_view text) {
  double value = 0;
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || end != text.data() + text.size())
    throw std::invalid_argument("not a number: '" + std::string(text) + "'");
  return value;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<double> uniform_weights(std::size_t n) {
  return std::vector<double>(n, n == 0 ? 0.0 : 1.0 / static_cast<double>(n));
}

}  // namespace

std::string join_ints(const std::vector<int>& values, char sep) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += sep;
    out += std::to_string(values[i]);
  }
  return out;
}

std::vector<int> parse_ints(std::string_view text, char sep) {
  std::vector<int> out;
  if (text.empty()) return out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = text.find(sep, start);
    std::string_view tok = text.substr(start, pos == std::string_view::npos ? text.size() - start : pos - start);
    int v = 0;
    auto [end, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (tok.empty() || ec != std::errc{} || end != tok.data() + tok.size())
      throw std::invalid_argument("not an integer: '" + std::string(tok) + "'");
    out.push_back(v);
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::uint64_t AttrValConfig::num_meanings() const {
  std::uint64_t total = 1;
  for (int c : cardinalities) {
    if (c <= 0) return 0;
    if (total > UINT64_MAX / static_cast<std::uint64_t>(c)) return UINT64_MAX;
    total *= static_cast<std::uint64_t>(c);
  }
  return total;
}

void AttrValConfig::validate() const {
  if (cardinalities.empty()) throw std::invalid_argument("config needs at least one attribute");
  for (int c : cardinalities)
    if (c < 1) throw std::invalid_argument("attribute cardinality must be >= 1");
  if (vocab_size < 2) throw std::invalid_argument("vocab_size must be >= 2");
  if (max_len < 1) throw std::invalid_argument("max_len must be >= 1");
  if (attribute_weights.size() != cardinalities.size())
    throw std::invalid_argument("need one attribute weight per attribute");
  double sum = 0;
  for (double w : attribute_weights) {
    if (!(w >= 0)) throw std::invalid_argument("attribute weights must be non-negative");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("attribute weights must sum to 1");
}

AttrValConfig AttrValConfig::default_preset() {
  return {{16, 16, 16}, 8, 9, uniform_weights(3)};
}

AttrValConfig AttrValConfig::inflection_preset() {
  return {{42, 2, 3}, 8, 9, {0.9, 0.05, 0.05}};
}

AttrValConfig AttrValConfig::preset(std::string_view name) {
  if (name == "default") return default_preset();
  if (name == "inflection") return inflection_preset();
  throw std::invalid_argument("unknown preset '" + std::string(name) + "'");
}

std::uint64_t meaning_index(const AttrValConfig& config, const Meaning& meaning) {
  std::uint64_t index = 0;
  for (std::size_t i = 0; i < config.cardinalities.size(); ++i)
    index = index * static_cast<std::uint64_t>(config.cardinalities[i]) +
            static_cast<std::uint64_t>(meaning.values[i]);
  return index;
}

Meaning meaning_from_index(const AttrValConfig& config, std::uint64_t index) {
  Meaning m;
  m.values.resize(config.cardinalities.size());
  for (std::size_t i = config.cardinalities.size(); i-- > 0;) {
    auto card = static_cast<std::uint64_t>(config.cardinalities[i]);
    m.values[i] = static_cast<int>(index % card);
    index /= card;
  }
  return m;
}

bool conforms(const AttrValConfig& config, const Meaning& meaning) {
  if (meaning.values.size() != config.cardinalities.size()) return false;
  for (std::size_t i = 0; i < meaning.values.size(); ++i)
    if (meaning.values[i] < 0 || meaning.values[i] >= config.cardinalities[i]) return false;
  return true;
}

std::vector<Meaning> enumerate_meanings(const AttrValConfig& config, std::uint64_t cap) {
  config.validate();
  const std::uint64_t total = config.num_meanings();
  if (total > cap)
    throw CapacityError("meaning space of " + std::to_string(total) + " exceeds cap " +
                        std::to_string(cap));
  std::vector<Meaning> out;
  out.reserve(total);
  for (std::uint64_t i = 0; i < total; ++i) out.push_back(meaning_from_index(config, i));
  return out;
}

Corpus::Corpus(AttrValConfig config, std::vector<Pair> pairs, Metadata metadata)
    : config_(std::move(config)), pairs_(std::move(pairs)), metadata_(std::move(metadata)) {
  config_.validate();
  std::set<Meaning> seen;
  for (std::size_t i = 0; i < pairs_.size(); ++i) {
    const auto& [meaning, message] = pairs_[i];
    if (!conforms(config_, meaning))
      throw std::invalid_argument("pair " + std::to_string(i) + ": meaning does not conform to config");
    if (message.chars.empty())
      throw std::invalid_argument("pair " + std::to_string(i) + ": empty message");
    if (message.size() > static_cast<std::size_t>(config_.max_len))
      throw std::invalid_argument("pair " + std::to_string(i) + ": message longer than max_len");
    for (int c : message.chars)
      if (c < 0 || c >= config_.vocab_size)
        throw std::invalid_argument("pair " + std::to_string(i) + ": character outside vocabulary");
    if (!seen.insert(meaning).second)
      throw std::invalid_argument("pair " + std::to_string(i) + ": duplicate meaning (" +
                                  join_ints(meaning.values) + ")");
  }
}

double Corpus::mean_message_length() const {
  if (pairs_.empty()) return 0.0;
  std::size_t total = 0;
  for (const auto& p : pairs_) total += p.second.size();
  return static_cast<double>(total) / static_cast<double>(pairs_.size());
}

void write_corpus(const Corpus& corpus, std::ostream& out) {
  out << "meaning\tmessage\n";
  for (const auto& [meaning, message] : corpus.pairs())
    out << join_ints(meaning.values) << '\t' << join_ints(message.chars) << '\n';
}

void write_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_corpus(corpus, out);
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

Corpus read_corpus(std::istream& in, const std::optional<AttrValConfig>& config) {
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) throw ParseError(1, "no pairs");
  ++lineno;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "meaning\tmessage") throw ParseError(lineno, "expected header 'meaning\\tmessage'");

  std::vector<Corpus::Pair> pairs;
  std::set<Meaning> seen;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos)
      throw ParseError(lineno, "expected exactly two tab-separated fields");
    Corpus::Pair pair;
    try {
      pair.first.values = parse_ints(std::string_view(line).substr(0, tab));
      pair.second.chars = parse_ints(std::string_view(line).substr(tab + 1));
    } catch (const std::invalid_argument& e) {
      throw ParseError(lineno, e.what());
    }
    if (pair.first.values.empty()) throw ParseError(lineno, "empty meaning");
    if (pair.second.chars.empty()) throw ParseError(lineno, "empty message");
    if (!pairs.empty() && pair.first.values.size() != pairs.front().first.values.size())
      throw ParseError(lineno, "meaning arity differs from first row");
    for (int v : pair.first.values)
      if (v < 0) throw ParseError(lineno, "negative attribute value");
    for (int c : pair.second.chars)
      if (c < 0) throw ParseError(lineno, "negative character");
    if (config) {
      if (!conforms(*config, pair.first)) throw ParseError(lineno, "attribute value out of range");
      for (int c : pair.second.chars)
        if (c >= config->vocab_size) throw ParseError(lineno, "character out of range");
      if (pair.second.size() > static_cast<std::size_t>(config->max_len))
        throw ParseError(lineno, "message longer than max_len");
    }
    if (!seen.insert(pair.first).second) throw ParseError(lineno, "duplicate meaning");
    pairs.push_back(std::move(pair));
  }
  if (pairs.empty()) throw ParseError(lineno, "no pairs");

  AttrValConfig cfg;
  if (config) {
    cfg = *config;
  } else {
    const std::size_t n = pairs.front().first.values.size();
    cfg.cardinalities.assign(n, 1);
    int max_char = 0;
    std::size_t max_len = 1;
    for (const auto& [meaning, message] : pairs) {
      for (std::size_t i = 0; i < n; ++i)
        cfg.cardinalities[i] = std::max(cfg.cardinalities[i], meaning.values[i] + 1);
      for (int c : message.chars) max_char = std::max(max_char, c);
      max_len = std::max(max_len, message.size());
    }
    cfg.vocab_size = std::max(2, max_char + 1);
    cfg.max_len = static_cast<int>(max_len);
    cfg.attribute_weights = uniform_weights(n);
  }
  return Corpus(std::move(cfg), std::move(pairs));
}

Corpus read_corpus(const std::filesystem::path& path, const std::optional<AttrValConfig>& config) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_corpus(in, config);
}

void write_config(const AttrValConfig& config, std::ostream& out) {
  out << "cardinalities=" << join_ints(config.cardinalities) << '\n';
  out << "vocab_size=" << config.vocab_size << '\n';
  out << "max_len=" << config.max_len << '\n';
  out << "weights=";
  for (std::size_t i = 0; i < config.attribute_weights.size(); ++i) {
    if (i) out << ',';
    out << format_double(config.attribute_weights[i]);
  }
  out << '\n';
}

void write_config(const AttrValConfig& config, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_config(config, out);
}

AttrValConfig read_config(std::istream& in) {
  AttrValConfig cfg;
  bool have_cards = false;
  bool have_weights = false;
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError(lineno, "expected key=value");
    std::string_view key = trim(line.substr(0, eq));
    std::string_view value = trim(line.substr(eq + 1));
    try {
      if (key == "cardinalities") {
        cfg.cardinalities = parse_ints(value);
        have_cards = true;
      } else if (key == "vocab_size") {
        cfg.vocab_size = parse_ints(value).at(0);
      } else if (key == "max_len") {
        cfg.max_len = parse_ints(value).at(0);
      } else if (key == "weights") {
        cfg.attribute_weights.clear();
        std::size_t start = 0;
        while (start <= value.size()) {
          auto comma = value.find(',', start);
          auto tok = value.substr(start, comma == std::string_view::npos ? value.size() - start : comma - start);
          cfg.attribute_weights.push_back(parse_double(trim(tok)));
          if (comma == std::string_view::npos) break;
          start = comma + 1;
        }
        have_weights = true;
      } else {
        throw ParseError(lineno, "unknown key '" + std::string(key) + "'");
      }
    } catch (const std::invalid_argument& e) {
      throw ParseError(lineno, e.what());
    } catch (const std::out_of_range&) {
      throw ParseError(lineno, "missing value");
    }
  }
  if (!have_cards) throw ParseError(lineno, "missing cardinalities");
  if (!have_weights) cfg.attribute_weights = uniform_weights(cfg.cardinalities.size());
  cfg.validate();
  return cfg;
}

AttrValConfig read_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_config(in);
}

}  // namespace morphkit
