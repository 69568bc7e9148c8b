#include "morphkit/segment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <sstream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <unordered_map>

namespace morphkit {

std::vector<Segment> split_at(const Message& message, const std::vector<int>& cuts) {
  std::vector<Segment> out;
  std::size_t start = 0;
  for (int cut : cuts) {
    out.emplace_back(message.chars.begin() + static_cast<std::ptrdiff_t>(start),
                     message.chars.begin() + cut);
    start = static_cast<std::size_t>(cut);
  }
  out.emplace_back(message.chars.begin() + static_cast<std::ptrdiff_t>(start), message.chars.end());
  return out;
}

SegmentedCorpus::SegmentedCorpus(Corpus base, std::vector<std::vector<int>> boundaries)
    : base_(std::move(base)), boundaries_(std::move(boundaries)) {
  if (boundaries_.size() != base_.size())
    throw std::invalid_argument("need one boundary list per message");
  for (std::size_t i = 0; i < boundaries_.size(); ++i) {
    const int len = static_cast<int>(base_.message(i).size());
    int prev = 0;
    for (int cut : boundaries_[i]) {
      if (cut <= prev || cut >= len)
        throw std::invalid_argument("message " + std::to_string(i) + ": cut indices must be increasing in (0, len)");
      prev = cut;
    }
    for (auto& seg : split_at(base_.message(i), boundaries_[i])) vocab_.insert(std::move(seg));
  }
}

std::vector<Segment> SegmentedCorpus::segments(std::size_t i) const {
  return split_at(base_.message(i), boundaries_[i]);
}

double SegmentedCorpus::mean_boundaries() const {
  if (boundaries_.empty()) return 0.0;
  std::size_t total = 0;
  for (const auto& b : boundaries_) total += b.size();
  return static_cast<double>(total) / static_cast<double>(boundaries_.size());
}

double SegmentedCorpus::mean_segments() const {
  return boundaries_.empty() ? 0.0 : mean_boundaries() + 1.0;
}

void write_segmented(const SegmentedCorpus& segmented, std::ostream& out) {
  out << "meaning\tmessage\tboundaries\n";
  const Corpus& c = segmented.base();
  for (std::size_t i = 0; i < c.size(); ++i)
    out << join_ints(c.meaning(i).values) << '\t' << join_ints(c.message(i).chars) << '\t'
        << join_ints(segmented.boundaries(i)) << '\n';
}

SegmentedCorpus read_segmented(std::istream& in, const std::optional<AttrValConfig>& config) {
  std::string line;
  std::size_t lineno = 1;
  if (!std::getline(in, line)) throw ParseError(1, "no pairs");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "meaning\tmessage\tboundaries")
    throw ParseError(1, "expected header 'meaning\\tmessage\\tboundaries'");
  std::string corpus_text = "meaning\tmessage\n";
  std::vector<std::vector<int>> cuts;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto tab = line.rfind('\t');
    if (tab == std::string::npos) throw ParseError(lineno, "missing boundaries column");
    try {
      cuts.push_back(parse_ints(std::string_view(line).substr(tab + 1)));
    } catch (const std::invalid_argument& e) {
      throw ParseError(lineno, e.what());
    }
    corpus_text += line.substr(0, tab) + '\n';
  }
  std::istringstream corpus_in(corpus_text);
  Corpus corpus = read_corpus(corpus_in, config);
  try {
    return SegmentedCorpus(std::move(corpus), std::move(cuts));
  } catch (const std::invalid_argument& e) {
    throw ParseError(lineno, e.what());
  }
}

// --- HAS --------------------------------------------------------------------

HasConvention parse_has_convention(std::string_view name) {
  if (name == "rise") return HasConvention::kRise;
  if (name == "verbatim") return HasConvention::kVerbatim;
  throw std::invalid_argument("unknown HAS convention '" + std::string(name) + "'");
}

EntropyModel::EntropyModel(const Corpus& corpus, std::size_t window)
    : window_(window), vocab_size_(corpus.config().vocab_size) {
  const auto outcomes = static_cast<std::size_t>(vocab_size_) + 1;
  for (const auto& [meaning, message] : corpus.pairs()) {
    for (std::size_t i = 0; i <= message.size(); ++i) {
      auto& row = counts_[context(message, i)];
      if (row.empty()) row.assign(outcomes, 0);
      const std::size_t next = i < message.size() ? static_cast<std::size_t>(message.chars[i])
                                                  : static_cast<std::size_t>(vocab_size_);
      ++row[next];
    }
  }
}

std::vector<int> EntropyModel::context(const Message& message, std::size_t i) const {
  const std::size_t start = (window_ == 0 || i <= window_) ? 0 : i - window_;
  return {message.chars.begin() + static_cast<std::ptrdiff_t>(start),
          message.chars.begin() + static_cast<std::ptrdiff_t>(i)};
}

std::vector<double> EntropyModel::distribution(const std::vector<int>& ctx) const {
  auto it = counts_.find(ctx);
  if (it == counts_.end()) throw std::out_of_range("context not observed in training corpus");
  std::size_t total = 0;
  for (auto c : it->second) total += c;
  std::vector<double> p(it->second.size());
  for (std::size_t k = 0; k < p.size(); ++k)
    p[k] = static_cast<double>(it->second[k]) / static_cast<double>(total);
  return p;
}

double EntropyModel::entropy(const std::vector<int>& ctx) const {
  double h = 0;
  for (double p : distribution(ctx))
    if (p > 0) h -= p * std::log(p);
  return std::max(0.0, h);
}

std::vector<double> EntropyModel::branching_entropies(const Message& message) const {
  std::vector<double> h(message.size() + 1);
  for (std::size_t i = 0; i <= message.size(); ++i) h[i] = entropy(context(message, i));
  return h;
}

EntropyModel fit_entropy(const Corpus& corpus, std::size_t window) {
  if (corpus.size() == 0) throw std::invalid_argument("cannot fit entropy on an empty corpus");
  return EntropyModel(corpus, window);
}

SegmentedCorpus has_segment(const Corpus& corpus, const EntropyModel& model, double tau,
                            HasConvention convention) {
  std::vector<std::vector<int>> cuts(corpus.size());
  for (std::size_t m = 0; m < corpus.size(); ++m) {
    const Message& msg = corpus.message(m);
    const auto h = model.branching_entropies(msg);
    for (std::size_t i = 1; i < msg.size(); ++i) {
      const double delta = convention == HasConvention::kRise ? h[i] - h[i - 1] : h[i] - h[i + 1];
      if (delta > tau) cuts[m].push_back(static_cast<int>(i));
    }
  }
  return SegmentedCorpus(corpus, std::move(cuts));
}

// --- BPE --------------------------------------------------------------------

namespace {

std::uint64_t pair_key(int left, int right) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(left)) << 32) |
         static_cast<std::uint32_t>(right);
}
int key_left(std::uint64_t key) { return static_cast<int>(key >> 32); }
int key_right(std::uint64_t key) { return static_cast<int>(key & 0xffffffffu); }

// Symbol ids: 0..base-1 are characters, later ids are merge results, one id
// per distinct content.
class SymbolInventory {
 public:
  explicit SymbolInventory(int base) {
    for (int c = 0; c < base; ++c) intern({c});
  }
  int intern(const Segment& content) {
    auto [it, inserted] = ids_.try_emplace(content, static_cast<int>(contents_.size()));
    if (inserted) contents_.push_back(content);
    return it->second;
  }
  int merge(int left, int right) {
    Segment joined = contents_[static_cast<std::size_t>(left)];
    const auto& r = contents_[static_cast<std::size_t>(right)];
    joined.insert(joined.end(), r.begin(), r.end());
    return intern(joined);
  }
  const Segment& content(int id) const { return contents_[static_cast<std::size_t>(id)]; }
  std::size_t size() const { return contents_.size(); }

 private:
  std::map<Segment, int> ids_;
  std::vector<Segment> contents_;
};

// Single left-to-right pass replacing non-overlapping (left, right) pairs.
bool replace_pair(std::vector<int>& tokens, int left, int right, int merged) {
  bool changed = false;
  std::vector<int> out;
  out.reserve(tokens.size());
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i + 1 < tokens.size() && tokens[i] == left && tokens[i + 1] == right) {
      out.push_back(merged);
      ++i;
      changed = true;
    } else {
      out.push_back(tokens[i]);
    }
  }
  tokens = std::move(out);
  return changed;
}

std::vector<int> cuts_of(const std::vector<int>& tokens, const SymbolInventory& inv) {
  std::vector<int> cuts;
  int pos = 0;
  for (std::size_t i = 0; i + 1 < tokens.size(); ++i) {
    pos += static_cast<int>(inv.content(tokens[i]).size());
    cuts.push_back(pos);
  }
  return cuts;
}

std::vector<int> tokens_of(const Message& msg, int base_vocab) {
  for (int c : msg.chars)
    if (c < 0 || c >= base_vocab)
      throw std::invalid_argument("character " + std::to_string(c) + " outside BPE base vocabulary");
  return msg.chars;
}

}  // namespace

std::size_t MergeList::inventory_size() const {
  std::set<Segment> results;
  for (const auto& m : merges) {
    Segment joined = m.left;
    joined.insert(joined.end(), m.right.begin(), m.right.end());
    results.insert(std::move(joined));
  }
  return static_cast<std::size_t>(base_vocab) + results.size();
}

MergeList bpe_train(const Corpus& corpus, int max_vocab) {
  if (corpus.size() == 0) throw std::invalid_argument("cannot train BPE on an empty corpus");
  const int base = corpus.config().vocab_size;
  if (max_vocab != kMaxVocab && max_vocab < base)
    throw std::invalid_argument("max_vocab " + std::to_string(max_vocab) +
                                " is smaller than the character vocabulary " + std::to_string(base));

  SymbolInventory inv(base);
  std::vector<std::vector<int>> msgs;
  msgs.reserve(corpus.size());
  for (const auto& p : corpus.pairs()) msgs.push_back(tokens_of(p.second, base));

  // Highest count first, then lowest (left, right) content.
  struct Order {
    const SymbolInventory* inv;
    bool operator()(const std::pair<long, std::uint64_t>& a, const std::pair<long, std::uint64_t>& b) const {
      if (a.first != b.first) return a.first > b.first;
      const auto& al = inv->content(key_left(a.second));
      const auto& bl = inv->content(key_left(b.second));
      if (al != bl) return al < bl;
      return inv->content(key_right(a.second)) < inv->content(key_right(b.second));
    }
  };
  std::set<std::pair<long, std::uint64_t>, Order> queue(Order{&inv});
  std::unordered_map<std::uint64_t, long> counts;
  std::unordered_map<std::uint64_t, std::set<std::size_t>> where;

  auto adjust = [&](std::uint64_t key, long delta) {
    auto it = counts.find(key);
    const long old = it == counts.end() ? 0 : it->second;
    const long now = old + delta;
    if (old > 0) queue.erase({old, key});
    if (now > 0) {
      counts[key] = now;
      queue.insert({now, key});
    } else if (it != counts.end()) {
      counts.erase(it);
    }
  };
  auto add_message = [&](std::size_t idx, long sign) {
    const auto& t = msgs[idx];
    std::unordered_map<std::uint64_t, long> delta;
    for (std::size_t i = 0; i + 1 < t.size(); ++i) delta[pair_key(t[i], t[i + 1])] += sign;
    // Apply in key order so the queue evolves identically on every platform.
    std::vector<std::pair<std::uint64_t, long>> ordered(delta.begin(), delta.end());
    std::sort(ordered.begin(), ordered.end());
    for (auto [key, d] : ordered) {
      adjust(key, d);
      if (sign > 0)
        where[key].insert(idx);
      else if (auto w = where.find(key); w != where.end())
        w->second.erase(idx);
    }
  };
  for (std::size_t i = 0; i < msgs.size(); ++i) add_message(i, +1);

  MergeList out;
  out.base_vocab = base;
  while (!queue.empty()) {
    if (max_vocab != kMaxVocab && inv.size() >= static_cast<std::size_t>(max_vocab)) break;
    const auto [count, key] = *queue.begin();
    if (max_vocab == kMaxVocab && count < 2) break;
    const int left = key_left(key);
    const int right = key_right(key);
    const int merged = inv.merge(left, right);
    out.merges.push_back({inv.content(left), inv.content(right)});
    const std::set<std::size_t> affected = where[key];
    for (std::size_t idx : affected) {
      add_message(idx, -1);
      replace_pair(msgs[idx], left, right, merged);
      add_message(idx, +1);
    }
  }
  return out;
}

SegmentedCorpus bpe_apply(const MergeList& merges, const Corpus& corpus) {
  SymbolInventory inv(merges.base_vocab);
  // Pair of ids -> ranks at which that pair is merged (a pair can recur when
  // a later merge re-creates one of its operands).
  std::unordered_map<std::uint64_t, std::vector<int>> ranks;
  std::vector<int> merged_id;
  for (std::size_t r = 0; r < merges.merges.size(); ++r) {
    const auto& m = merges.merges[r];
    if (m.left.empty() || m.right.empty()) throw std::invalid_argument("merge with empty operand");
    for (int c : m.left)
      if (c < 0 || c >= merges.base_vocab) throw std::invalid_argument("merge operand outside vocabulary");
    for (int c : m.right)
      if (c < 0 || c >= merges.base_vocab) throw std::invalid_argument("merge operand outside vocabulary");
    const int l = inv.intern(m.left);
    const int rt = inv.intern(m.right);
    ranks[pair_key(l, rt)].push_back(static_cast<int>(r));
    merged_id.push_back(inv.merge(l, rt));
  }

  constexpr int kNone = std::numeric_limits<int>::max();
  std::vector<std::vector<int>> cuts(corpus.size());
  for (std::size_t m = 0; m < corpus.size(); ++m) {
    std::vector<int> tokens = tokens_of(corpus.message(m), merges.base_vocab);
    int cursor = 0;
    while (tokens.size() > 1) {
      int best = kNone;
      for (std::size_t i = 0; i + 1 < tokens.size(); ++i) {
        auto it = ranks.find(pair_key(tokens[i], tokens[i + 1]));
        if (it == ranks.end()) continue;
        auto r = std::lower_bound(it->second.begin(), it->second.end(), cursor);
        if (r != it->second.end()) best = std::min(best, *r);
      }
      if (best == kNone) break;
      const auto& mg = merges.merges[static_cast<std::size_t>(best)];
      replace_pair(tokens, inv.intern(mg.left), inv.intern(mg.right), merged_id[static_cast<std::size_t>(best)]);
      cursor = best + 1;
    }
    cuts[m] = cuts_of(tokens, inv);
  }
  return SegmentedCorpus(corpus, std::move(cuts));
}

void write_merges(const MergeList& merges, std::ostream& out) {
  for (const auto& m : merges.merges) out << join_ints(m.left) << '\t' << join_ints(m.right) << '\n';
}

MergeList read_merges(std::istream& in, int base_vocab) {
  MergeList out;
  out.base_vocab = base_vocab;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos) throw ParseError(lineno, "expected 'left\\tright'");
    try {
      Merge m{parse_ints(std::string_view(line).substr(0, tab)),
              parse_ints(std::string_view(line).substr(tab + 1))};
      if (m.left.empty() || m.right.empty()) throw std::invalid_argument("empty merge operand");
      for (int c : m.left)
        if (c < 0 || c >= base_vocab) throw std::invalid_argument("character outside vocabulary");
      for (int c : m.right)
        if (c < 0 || c >= base_vocab) throw std::invalid_argument("character outside vocabulary");
      out.merges.push_back(std::move(m));
    } catch (const std::invalid_argument& e) {
      throw ParseError(lineno, e.what());
    }
  }
  return out;
}

Segmenter make_has_segmenter(double tau, HasConvention convention, std::size_t window) {
  return [=](const Corpus& corpus) {
    return has_segment(corpus, fit_entropy(corpus, window), tau, convention);
  };
}

Segmenter make_bpe_segmenter(int max_vocab) {
  return [=](const Corpus& corpus) { return bpe_apply(bpe_train(corpus, max_vocab), corpus); };
}

}  // namespace morphkit
