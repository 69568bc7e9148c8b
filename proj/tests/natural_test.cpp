#include <doctest.h>

#include <filesystem>
#include <set>
#include <sstream>

#include "morphkit/metrics.hpp"
#include "morphkit/natural.hpp"
#include "morphkit/random.hpp"

using namespace morphkit;

#ifndef MORPHKIT_DATA_DIR
#define MORPHKIT_DATA_DIR "data"
#endif

namespace {

const char* const kTenses[] = {"past", "present"};
const char* const kPersons[] = {"1sg", "2sg", "3sg"};

// Root plus a suffix that marks tense and person; every root is unique.
std::string concatenative_csv(int lexemes) {
  const char* const suffix[2][3] = {{"ki", "ku", "ka"}, {"mi", "mu", "ma"}};
  const char* const letters = "bdfglnprstvz";
  std::ostringstream out;
  out << "lexeme,tense,person,form\n";
  for (int l = 0; l < lexemes; ++l) {
    std::string root{letters[l % 12], 'o', letters[(l / 12) % 12]};
    for (int t = 0; t < 2; ++t)
      for (int p = 0; p < 3; ++p) out << "v" << l << ',' << kTenses[t] << ',' << kPersons[p] << ',' << root << suffix[t][p] << '\n';
  }
  return out.str();
}

// Roots and suffixes drawn from one four-letter alphabet, so single letters
// mix root and inflection information while whole suffixes stay unambiguous.
std::string shared_alphabet_csv() {
  const std::string letters = "abcd";
  Rng rng(1);
  std::set<std::string> roots;
  while (roots.size() < 60) {
    std::string r;
    for (int i = 0; i < 4; ++i) r += letters[static_cast<std::size_t>(rng.below(4))];
    roots.insert(r);
  }
  std::set<std::string> suffixes;
  while (suffixes.size() < 6) {
    std::string r;
    for (int i = 0; i < 2; ++i) r += letters[static_cast<std::size_t>(rng.below(4))];
    suffixes.insert(r);
  }
  const std::vector<std::string> sv(suffixes.begin(), suffixes.end());
  std::ostringstream out;
  out << "lexeme,tense,person,form\n";
  int l = 0;
  for (const auto& r : roots) {
    for (int t = 0; t < 2; ++t)
      for (int p = 0; p < 3; ++p)
        out << "v" << l << ',' << kTenses[t] << ',' << kPersons[p] << ',' << r << sv[static_cast<std::size_t>(t * 3 + p)] << '\n';
    ++l;
  }
  return out.str();
}

InflectionTable table_from(const std::string& csv) {
  std::istringstream in(csv);
  return load_table(in);
}

}  // namespace

TEST_CASE("graphemes are NFC clusters") {
  CHECK(graphemes("llorar") == std::vector<std::string>{"l", "l", "o", "r", "a", "r"});
  // Decomposed e + combining acute becomes one precomposed cluster.
  const auto g = graphemes("habl\x65\xCC\x81");
  REQUIRE(g.size() == 5);
  CHECK(g[4] == "\xC3\xA9");
  CHECK(graphemes("\xD9\x83\xD9\x8E\xD8\xAA\xD9\x8E\xD8\xA8\xD9\x8E").size() == 3);
  CHECK_THROWS_AS(graphemes("\xFF\xFE"), std::invalid_argument);
}

TEST_CASE("table CSV parsing") {
  const auto t = table_from("lexeme,tense,person,form\nllorar,present,1pl,lloramos\n\"a,b\",x,y,z\n");
  REQUIRE(t.records().size() == 2);
  CHECK(t.records()[0].lexeme == "llorar");
  CHECK(t.records()[0].tense == "present");
  CHECK(t.records()[0].person == "1pl");
  CHECK(t.records()[0].form == "lloramos");
  CHECK(t.records()[1].lexeme == "a,b");
  CHECK(t.alphabet() == std::vector<std::string>{"a", "l", "m", "o", "r", "s", "z"});
  CHECK(t.longest_form() == 8);
  CHECK(t.find("llorar", "present", "1pl") != nullptr);
  CHECK(t.find("llorar", "present", "2pl") == nullptr);
}

TEST_CASE("table load errors carry row numbers") {
  auto row_of = [](const std::string& csv) -> std::size_t {
    try {
      table_from(csv);
    } catch (const LoadError& e) {
      return e.row();
    }
    return 0;
  };
  CHECK(row_of("") == 1);
  CHECK(row_of("lexeme,form\n") == 1);
  CHECK(row_of("lexeme,tense,person,form\na,b,c,d\na,b,c,e\n") == 3);
  CHECK(row_of("lexeme,tense,person,form\na,b,c,d\n\na,b,c,e\n") == 4);
  CHECK(row_of("lexeme,tense,person,form\na,b,c,\n") == 2);
  CHECK(row_of("lexeme,tense,person,form\na,b,c\n") == 2);
  CHECK(row_of("lexeme,tense,person,form\na,b,c,d\na,b,e,\xC3\x28\n") == 3);
}

TEST_CASE("alphabet is ordered by code point and encoding is a bijection") {
  const auto t = table_from("lexeme,tense,person,form\nx,a,b,cantó\ny,a,b,cantaste\nz,a,b,zumbé\n");
  const auto& a = t.alphabet();
  CHECK(std::is_sorted(a.begin(), a.end()));
  CHECK(a.back() == "\xC3\xB3");
  for (const auto& r : t.records()) CHECK(t.decode(t.encode(r.form)) == r.form);
  std::ostringstream out;
  write_alphabet(t, out);
  CHECK(out.str().rfind("id\tgrapheme\n0\ta\n", 0) == 0);
  CHECK_THROWS_AS(t.encode("q"), std::invalid_argument);
}

TEST_CASE("sublanguage sampling") {
  const auto t = table_from(concatenative_csv(60));
  const auto subs = sample_sublanguages(t, 5, 17);
  REQUIRE(subs.size() == 5);
  for (const auto& s : subs) {
    CHECK(s.corpus.size() == 252);
    CHECK(s.corpus.config().cardinalities == std::vector<int>{42, 2, 3});
    CHECK(s.corpus.config().attribute_weights == std::vector<double>{0.9, 0.05, 0.05});
    CHECK(s.corpus.config().max_len == 5);
    CHECK(s.roots.size() == 42);
    CHECK(std::is_sorted(s.roots.begin(), s.roots.end()));
    CHECK(s.tenses == std::vector<std::string>{"past", "present"});
    CHECK(s.persons == std::vector<std::string>{"1sg", "2sg", "3sg"});
    for (std::size_t i = 0; i < s.corpus.size(); ++i) {
      const auto& m = s.corpus.meaning(i).values;
      const std::string* form = t.find(s.roots[static_cast<std::size_t>(m[0])], s.tenses[static_cast<std::size_t>(m[1])],
                                       s.persons[static_cast<std::size_t>(m[2])]);
      REQUIRE(form != nullptr);
      CHECK(t.decode(s.corpus.message(i).chars) == *form);
    }
  }
  CHECK(subs[0].roots != subs[1].roots);

  const auto again = sample_sublanguages(t, 1, 17);
  CHECK(again[0].corpus == subs[0].corpus);
}

TEST_CASE("too few covering lexemes is a capacity error") {
  const auto t = table_from(concatenative_csv(41));
  CHECK_THROWS_AS(sample_sublanguages(t, 1, 0), CapacityError);

  // 42 lexemes but one lacks a cell.
  std::string csv = concatenative_csv(42);
  const auto cut = csv.rfind("v41,present,3sg");
  csv.erase(cut);
  try {
    sample_sublanguages(table_from(csv), 1, 0);
    FAIL("expected CapacityError");
  } catch (const CapacityError& e) {
    CHECK(std::string(e.what()).find("v41/present/3sg") != std::string::npos);
  }
}

TEST_CASE("meaningfulness rate") {
  const auto t = table_from(shared_alphabet_csv());
  const auto subs = sample_sublanguages(t, 6, 3);
  for (const auto& s : subs) {
    CHECK(bosdis_ratio(s.corpus, make_bpe_segmenter(96)(s.corpus)).value > 1.2);
    CHECK(bosdis_ratio(s.corpus, make_has_segmenter()(s.corpus)).value > 1.2);
  }
  CHECK(meaningfulness_rate(subs, make_bpe_segmenter(96)) == 1.0);
  CHECK(meaningfulness_rate(subs, make_has_segmenter()) == 1.0);
  // Character segmentation gives a ratio of exactly one, which does not count.
  const Segmenter characters = [](const Corpus& c) {
    std::vector<std::vector<int>> cuts;
    for (const auto& p : c.pairs()) {
      std::vector<int> all;
      for (int i = 1; i < static_cast<int>(p.second.size()); ++i) all.push_back(i);
      cuts.push_back(all);
    }
    return SegmentedCorpus(c, cuts);
  };
  CHECK(meaningfulness_rate(subs, characters) == 0.0);
  CHECK(meaningfulness_rate({}, characters) == 0.0);
}

TEST_CASE("bundled Spanish table") {
  const auto t = load_table(std::filesystem::path(MORPHKIT_DATA_DIR) / "spanish_regular.csv");
  const auto subs = sample_sublanguages(t, 3, 0);
  CHECK(subs[0].tenses == std::vector<std::string>{"present", "preterite"});
  CHECK(subs[0].persons == std::vector<std::string>{"1sg", "2sg", "3sg"});
  for (const auto& s : subs) CHECK(s.corpus.size() == 252);
  CHECK(std::find(t.alphabet().begin(), t.alphabet().end(), "\xC3\xB1") != t.alphabet().end());
}
