#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "morphkit/langgen.hpp"
#include "morphkit/random.hpp"
#include "morphkit/segment.hpp"

using namespace morphkit;

namespace {

Corpus from_messages(const std::vector<std::vector<int>>& messages, int vocab) {
  std::vector<Corpus::Pair> pairs;
  int longest = 1;
  for (std::size_t i = 0; i < messages.size(); ++i) {
    pairs.push_back({Meaning{{static_cast<int>(i)}}, Message{messages[i]}});
    longest = std::max(longest, static_cast<int>(messages[i].size()));
  }
  AttrValConfig cfg{{static_cast<int>(messages.size())}, vocab, longest, {1.0}};
  return Corpus(cfg, std::move(pairs));
}

Corpus random_corpus(Rng& rng, int vocab, int max_len, int size) {
  std::vector<std::vector<int>> msgs;
  for (int i = 0; i < size; ++i) {
    std::vector<int> m(static_cast<std::size_t>(1 + rng.below(max_len)));
    for (auto& c : m) c = rng.below(vocab);
    msgs.push_back(std::move(m));
  }
  return from_messages(msgs, vocab);
}

// Reference BPE: full recount after every merge.
MergeList naive_bpe(const Corpus& c, int max_vocab) {
  std::vector<std::vector<Segment>> msgs;
  for (const auto& p : c.pairs()) {
    std::vector<Segment> t;
    for (int ch : p.second.chars) t.push_back({ch});
    msgs.push_back(std::move(t));
  }
  std::set<Segment> inventory;
  for (int ch = 0; ch < c.config().vocab_size; ++ch) inventory.insert({ch});
  MergeList out;
  out.base_vocab = c.config().vocab_size;
  while (true) {
    if (max_vocab != kMaxVocab && inventory.size() >= static_cast<std::size_t>(max_vocab)) break;
    std::map<std::pair<Segment, Segment>, long> counts;
    for (const auto& t : msgs)
      for (std::size_t i = 0; i + 1 < t.size(); ++i) ++counts[{t[i], t[i + 1]}];
    if (counts.empty()) break;
    auto best = counts.begin();
    for (auto it = counts.begin(); it != counts.end(); ++it)
      if (it->second > best->second) best = it;
    if (max_vocab == kMaxVocab && best->second < 2) break;
    const auto [l, r] = best->first;
    out.merges.push_back({l, r});
    Segment joined = l;
    joined.insert(joined.end(), r.begin(), r.end());
    inventory.insert(joined);
    for (auto& t : msgs) {
      std::vector<Segment> next;
      for (std::size_t i = 0; i < t.size(); ++i) {
        if (i + 1 < t.size() && t[i] == l && t[i + 1] == r) {
          next.push_back(joined);
          ++i;
        } else {
          next.push_back(t[i]);
        }
      }
      t = std::move(next);
    }
  }
  return out;
}

// Reference apply: replay every merge in order over the whole message.
std::vector<Segment> naive_apply(const MergeList& merges, const Message& m) {
  std::vector<Segment> t;
  for (int ch : m.chars) t.push_back({ch});
  for (const auto& mg : merges.merges) {
    Segment joined = mg.left;
    joined.insert(joined.end(), mg.right.begin(), mg.right.end());
    std::vector<Segment> next;
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (i + 1 < t.size() && t[i] == mg.left && t[i + 1] == mg.right) {
        next.push_back(joined);
        ++i;
      } else {
        next.push_back(t[i]);
      }
    }
    t = std::move(next);
  }
  return t;
}

void check_reconstruction(const SegmentedCorpus& s) {
  std::set<Segment> seen;
  for (std::size_t i = 0; i < s.base().size(); ++i) {
    Segment joined;
    for (const auto& seg : s.segments(i)) {
      CHECK(!seg.empty());
      joined.insert(joined.end(), seg.begin(), seg.end());
      seen.insert(seg);
    }
    CHECK(joined == s.base().message(i).chars);
  }
  CHECK(seen == s.symbol_vocab());
}

}  // namespace

TEST_CASE("branching entropy examples") {
  {
    const auto c = from_messages({{0, 1}, {0, 1}}, 2);
    // Duplicate messages are fine; meanings differ.
    const auto model = fit_entropy(c);
    CHECK(model.entropy({0}) == doctest::Approx(0.0));
  }
  {
    const auto c = from_messages({{0, 0}, {0, 1}}, 2);
    const auto model = fit_entropy(c);
    CHECK(model.entropy({0}) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    const auto p = model.distribution({0});
    REQUIRE(p.size() == 3);
    CHECK(p[0] == 0.5);
    CHECK(p[1] == 0.5);
    CHECK(p[2] == 0.0);
    // After a full message only the end marker follows.
    CHECK(model.entropy({0, 1}) == 0.0);
    CHECK_THROWS_AS(model.entropy({1}), std::out_of_range);
  }
}

TEST_CASE("distributions sum to one and entropies are non-negative") {
  const auto c = generate_corpus(parse_language_spec("mixed_concat", AttrValConfig::inflection_preset(), 2));
  for (std::size_t window : {0u, 1u, 3u}) {
    const auto model = fit_entropy(c, window);
    for (const auto& p : c.pairs()) {
      for (std::size_t i = 0; i <= p.second.size(); ++i) {
        const auto dist = model.distribution(model.context(p.second, i));
        double sum = 0;
        for (double x : dist) sum += x;
        CHECK(std::abs(sum - 1.0) < 1e-9);
      }
      for (double h : model.branching_entropies(p.second)) CHECK(h >= 0.0);
    }
  }
}

TEST_CASE("window limits the context") {
  const auto c = from_messages({{0, 1, 2}, {1, 1, 3}}, 4);
  const auto model = fit_entropy(c, 1);
  CHECK(model.context(c.message(0), 2) == std::vector<int>{1});
  // Context {1} is followed by 2, 1 and 3.
  CHECK(model.entropy({1}) == doctest::Approx(std::log(3.0)));
  CHECK(fit_entropy(c).context(c.message(0), 2) == std::vector<int>{0, 1});
}

TEST_CASE("HAS cuts where the branching entropy rises") {
  // Stems 01 or 23 followed by any of four suffix characters:
  // H(0)=ln2, H(1)=0, H(2)=ln4, H(3)=0.
  std::vector<std::vector<int>> msgs;
  for (auto stem : {std::vector<int>{0, 1}, std::vector<int>{2, 3}})
    for (int x = 0; x < 4; ++x) msgs.push_back({stem[0], stem[1], x});
  const auto c = from_messages(msgs, 4);
  const auto model = fit_entropy(c);
  const auto h = model.branching_entropies(c.message(0));
  REQUIRE(h.size() == 4);
  CHECK(h[0] == doctest::Approx(std::log(2.0)));
  CHECK(h[1] == doctest::Approx(0.0));
  CHECK(h[2] == doctest::Approx(std::log(4.0)));
  CHECK(h[3] == doctest::Approx(0.0));
  for (auto conv : {HasConvention::kRise, HasConvention::kVerbatim}) {
    const auto s = has_segment(c, model, 0.0, conv);
    for (std::size_t i = 0; i < c.size(); ++i) CHECK(s.boundaries(i) == std::vector<int>{2});
  }
  const auto none = has_segment(c, model, std::numeric_limits<double>::infinity());
  CHECK(none.mean_boundaries() == 0.0);
  CHECK(none.mean_segments() == 1.0);
  // ln4 - 0 = 1.386 exceeds 1.3 but not 1.4.
  CHECK(has_segment(c, model, 1.3).mean_boundaries() == 1.0);
  CHECK(has_segment(c, model, 1.4).mean_boundaries() == 0.0);
}

TEST_CASE("HAS finds symbol boundaries in a concatenative language") {
  const auto c = generate_corpus(parse_language_spec("perfect_concat", AttrValConfig::default_preset(), 0));
  const auto model = fit_entropy(c);
  double at_boundary = 0, inside = 0;
  std::size_t nb = 0, ni = 0;
  for (const auto& p : c.pairs()) {
    const auto h = model.branching_entropies(p.second);
    for (std::size_t i = 1; i < 9; ++i) {
      if (i % 3 == 0) {
        at_boundary += h[i];
        ++nb;
      } else {
        inside += h[i];
        ++ni;
      }
    }
  }
  CHECK(inside / static_cast<double>(ni) < at_boundary / static_cast<double>(nb));
}

TEST_CASE("HAS boundary count is non-increasing in tau") {
  Rng rng(99);
  for (int trial = 0; trial < 50; ++trial) {
    const auto c = random_corpus(rng, 2 + rng.below(5), 8, 5 + rng.below(60));
    const auto model = fit_entropy(c, static_cast<std::size_t>(rng.below(3)));
    for (auto conv : {HasConvention::kRise, HasConvention::kVerbatim}) {
      std::vector<std::size_t> prev;
      for (double tau : {-1.0, -0.1, 0.0, 0.05, 0.2, 0.7, 2.0}) {
        const auto s = has_segment(c, model, tau, conv);
        check_reconstruction(s);
        for (std::size_t i = 0; i < c.size(); ++i) {
          if (!prev.empty()) CHECK(s.boundaries(i).size() <= prev[i]);
          CHECK(s.boundaries(i).size() <= c.message(i).size() - 1);
        }
        prev.clear();
        for (std::size_t i = 0; i < c.size(); ++i) prev.push_back(s.boundaries(i).size());
      }
    }
  }
}

TEST_CASE("BPE examples") {
  const auto c = from_messages({{0, 1, 0, 1}, {0, 1, 0, 1}}, 2);
  const auto one = bpe_train(c, 3);
  REQUIRE(one.merges.size() == 1);
  CHECK(one.merges[0] == Merge{{0}, {1}});
  CHECK(one.inventory_size() == 3);
  const auto s = bpe_apply(one, c);
  CHECK(s.segments(0) == std::vector<Segment>{{0, 1}, {0, 1}});

  CHECK(bpe_train(c, 2).merges.empty());
  CHECK_THROWS_AS(bpe_train(c, 1), std::invalid_argument);

  const auto identity = bpe_apply(MergeList{2, {}}, c);
  CHECK(identity.mean_segments() == 4.0);

  const auto full = bpe_train(c, kMaxVocab);
  CHECK(bpe_apply(full, c).mean_segments() == 1.0);
}

TEST_CASE("BPE ties go to the lowest pair by content") {
  // (0,1), (1,2) and (2,3) each occur twice.
  const auto c = from_messages({{2, 3, 1, 2}, {0, 1, 2, 3}, {0, 1}}, 4);
  const auto m = bpe_train(c, 5);
  REQUIRE(m.merges.size() == 1);
  CHECK(m.merges[0] == Merge{{0}, {1}});
}

TEST_CASE("BPE training and replay agree with a naive reference") {
  Rng rng(5);
  for (int trial = 0; trial < 60; ++trial) {
    const int vocab = 2 + rng.below(4);
    const auto c = random_corpus(rng, vocab, 9, 3 + rng.below(40));
    for (int budget : {vocab, vocab + 1, vocab + 4, vocab + 20, kMaxVocab}) {
      const auto fast = bpe_train(c, budget);
      const auto slow = naive_bpe(c, budget);
      CHECK(fast == slow);
      const auto s = bpe_apply(fast, c);
      check_reconstruction(s);
      for (std::size_t i = 0; i < c.size(); ++i) CHECK(s.segments(i) == naive_apply(fast, c.message(i)));
    }
  }
}

TEST_CASE("BPE segment count is non-increasing in the budget") {
  const auto c = generate_corpus(parse_language_spec("nonconcat", AttrValConfig::inflection_preset(), 1));
  CHECK(bpe_apply(bpe_train(c, 8), c).mean_segments() == doctest::Approx(c.mean_message_length()));
  double prev = 1e9;
  for (int v : {8, 9, 12, 20, 40, 96, 200, 2000}) {
    const auto merges = bpe_train(c, v);
    CHECK(merges.inventory_size() <= static_cast<std::size_t>(v));
    const double len = bpe_apply(merges, c).mean_segments();
    CHECK(len <= prev);
    prev = len;
  }
  // MAX stops at the first pair seen only once, so its merges are a prefix of
  // any larger numeric budget.
  const auto max = bpe_train(c, kMaxVocab);
  const auto big = bpe_train(c, 2000);
  REQUIRE(max.merges.size() <= big.merges.size());
  CHECK(std::equal(max.merges.begin(), max.merges.end(), big.merges.begin()));
}

TEST_CASE("BPE is deterministic") {
  const auto c = generate_corpus(parse_language_spec("random", AttrValConfig::inflection_preset(), 8));
  CHECK(bpe_train(c, 96) == bpe_train(c, 96));
}

TEST_CASE("merge list dump round trip") {
  const auto c = generate_corpus(parse_language_spec("perfect_concat", AttrValConfig::inflection_preset(), 0));
  const auto merges = bpe_train(c, 40);
  std::ostringstream out;
  write_merges(merges, out);
  CHECK(out.str().find("\t") != std::string::npos);
  std::istringstream in(out.str());
  CHECK(read_merges(in, 8) == merges);

  std::istringstream bad("0\t1\n0,9\t1\n");
  try {
    read_merges(bad, 8);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
}

TEST_CASE("segmented corpus TSV round trip") {
  const auto c = generate_corpus(parse_language_spec("mixed_concat", AttrValConfig::inflection_preset(), 0));
  const auto s = has_segment(c, fit_entropy(c));
  std::ostringstream out;
  write_segmented(s, out);
  CHECK(out.str().rfind("meaning\tmessage\tboundaries\n", 0) == 0);
  std::istringstream in(out.str());
  const auto back = read_segmented(in, c.config());
  CHECK(back.boundaries() == s.boundaries());
  CHECK(back.base().pairs() == c.pairs());
}

TEST_CASE("segmented corpus rejects invalid cuts") {
  const auto c = from_messages({{0, 1, 0}}, 2);
  CHECK_THROWS_AS(SegmentedCorpus(c, {{0}}), std::invalid_argument);
  CHECK_THROWS_AS(SegmentedCorpus(c, {{3}}), std::invalid_argument);
  CHECK_THROWS_AS(SegmentedCorpus(c, {{2, 1}}), std::invalid_argument);
  CHECK_THROWS_AS(SegmentedCorpus(c, {}), std::invalid_argument);
  const SegmentedCorpus ok(c, {{1, 2}});
  CHECK(ok.symbol_vocab() == std::set<Segment>{{0}, {1}});
  CHECK(split_at(c.message(0), {2}) == std::vector<Segment>{{0, 1}, {0}});
}

TEST_CASE("segmenter handles") {
  const auto c = generate_corpus(parse_language_spec("perfect_concat", AttrValConfig::inflection_preset(), 0));
  CHECK(make_has_segmenter()(c).boundaries() == has_segment(c, fit_entropy(c)).boundaries());
  CHECK(make_bpe_segmenter(96)(c).boundaries() == bpe_apply(bpe_train(c, 96), c).boundaries());
  CHECK(parse_has_convention("verbatim") == HasConvention::kVerbatim);
  CHECK_THROWS_AS(parse_has_convention("fall"), std::invalid_argument);
}
