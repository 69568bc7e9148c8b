#include "morphkit/natural.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <memory>
#include <ostream>
#include <set>

#include <unicode/brkiter.h>
#include <unicode/normalizer2.h>
#include <unicode/unistr.h>
#include <unicode/ustring.h>

#include "morphkit/metrics.hpp"
#include "morphkit/random.hpp"

namespace morphkit {

namespace {

icu::UnicodeString decode_utf8(const std::string& utf8) {
  UErrorCode status = U_ZERO_ERROR;
  int32_t length = 0;
  u_strFromUTF8(nullptr, 0, &length, utf8.data(), static_cast<int32_t>(utf8.size()), &status);
  if (status != U_BUFFER_OVERFLOW_ERROR && U_FAILURE(status))
    throw std::invalid_argument("invalid UTF-8");
  status = U_ZERO_ERROR;
  icu::UnicodeString out;
  UChar* buf = out.getBuffer(length + 1);
  u_strFromUTF8(buf, length + 1, &length, utf8.data(), static_cast<int32_t>(utf8.size()), &status);
  out.releaseBuffer(U_SUCCESS(status) ? length : 0);
  if (U_FAILURE(status)) throw std::invalid_argument("invalid UTF-8");
  return out;
}

std::string nfc(const std::string& utf8) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* norm = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) throw std::runtime_error("ICU NFC normalizer unavailable");
  icu::UnicodeString normalized = norm->normalize(decode_utf8(utf8), status);
  if (U_FAILURE(status)) throw std::invalid_argument("normalization failed");
  std::string out;
  normalized.toUTF8String(out);
  return out;
}

// Minimal CSV: comma separated, optional double-quoted fields with "" escapes.
std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        out.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        out.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.emplace_back();
    } else {
      out.back() += c;
    }
  }
  return out;
}

std::string cell_key(const std::string& l, const std::string& t, const std::string& p) {
  return l + '\t' + t + '\t' + p;
}

// The `k` most frequent values of one field, ties by name.
std::vector<std::string> top_values(const std::vector<InflectionRecord>& records,
                                    std::string InflectionRecord::*field, int k) {
  std::map<std::string, std::size_t> freq;
  for (const auto& r : records) ++freq[r.*field];
  std::vector<std::pair<std::string, std::size_t>> items(freq.begin(), freq.end());
  std::stable_sort(items.begin(), items.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> out;
  for (int i = 0; i < k && i < static_cast<int>(items.size()); ++i) out.push_back(items[static_cast<std::size_t>(i)].first);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

std::vector<std::string> graphemes(const std::string& utf8) {
  const icu::UnicodeString text = decode_utf8(nfc(utf8));
  UErrorCode status = U_ZERO_ERROR;
  std::unique_ptr<icu::BreakIterator> it(icu::BreakIterator::createCharacterInstance(icu::Locale::getRoot(), status));
  if (U_FAILURE(status)) throw std::runtime_error("ICU grapheme iterator unavailable");
  it->setText(text);
  std::vector<std::string> out;
  int32_t start = it->first();
  for (int32_t end = it->next(); end != icu::BreakIterator::DONE; start = end, end = it->next()) {
    std::string g;
    text.tempSubStringBetween(start, end).toUTF8String(g);
    out.push_back(std::move(g));
  }
  return out;
}

InflectionTable::InflectionTable(std::vector<InflectionRecord> records) : records_(std::move(records)) {
  std::set<std::string> letters;
  for (std::size_t i = 0; i < records_.size(); ++i) {
    auto& r = records_[i];
    if (r.form.empty()) throw LoadError(i + 2, "empty form");
    r.form = nfc(r.form);
    const auto key = cell_key(r.lexeme, r.tense, r.person);
    if (!index_.emplace(key, i).second)
      throw LoadError(i + 2, "duplicate (lexeme, tense, person): " + r.lexeme + ", " + r.tense + ", " + r.person);
    auto g = graphemes(r.form);
    longest_ = std::max(longest_, g.size());
    letters.insert(g.begin(), g.end());
  }
  // UTF-8 byte order coincides with code point order.
  alphabet_.assign(letters.begin(), letters.end());
  for (std::size_t i = 0; i < alphabet_.size(); ++i) ids_[alphabet_[i]] = static_cast<int>(i);
}

std::vector<int> InflectionTable::encode(const std::string& form) const {
  std::vector<int> out;
  for (const auto& g : graphemes(form)) {
    auto it = ids_.find(g);
    if (it == ids_.end()) throw std::invalid_argument("grapheme '" + g + "' not in alphabet");
    out.push_back(it->second);
  }
  return out;
}

std::string InflectionTable::decode(const std::vector<int>& chars) const {
  std::string out;
  for (int c : chars) out += alphabet_.at(static_cast<std::size_t>(c));
  return out;
}

const std::string* InflectionTable::find(const std::string& lexeme, const std::string& tense,
                                         const std::string& person) const {
  auto it = index_.find(cell_key(lexeme, tense, person));
  return it == index_.end() ? nullptr : &records_[it->second].form;
}

InflectionTable load_table(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw LoadError(1, "empty file");
  if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (split_csv(line) != std::vector<std::string>{"lexeme", "tense", "person", "form"})
    throw LoadError(1, "expected header 'lexeme,tense,person,form'");
  std::vector<InflectionRecord> records;
  std::set<std::string> keys;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    try {
      decode_utf8(line);
    } catch (const std::invalid_argument&) {
      throw LoadError(row, "undecodable UTF-8");
    }
    auto fields = split_csv(line);
    if (fields.size() != 4) throw LoadError(row, "expected 4 fields, got " + std::to_string(fields.size()));
    if (fields[3].empty()) throw LoadError(row, "empty form");
    if (!keys.insert(cell_key(fields[0], fields[1], fields[2])).second)
      throw LoadError(row, "duplicate (lexeme, tense, person): " + fields[0] + ", " + fields[1] + ", " + fields[2]);
    records.push_back({fields[0], fields[1], fields[2], fields[3]});
  }
  return InflectionTable(std::move(records));
}

InflectionTable load_table(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return load_table(in);
}

void write_alphabet(const InflectionTable& table, std::ostream& out) {
  out << "id\tgrapheme\n";
  for (std::size_t i = 0; i < table.alphabet().size(); ++i) out << i << '\t' << table.alphabet()[i] << '\n';
}

std::vector<Sublanguage> sample_sublanguages(const InflectionTable& table, int count, std::uint64_t seed,
                                             const SublanguageShape& shape) {
  if (count < 0) throw std::invalid_argument("sublanguage count must be non-negative");
  const auto& records = table.records();
  const auto tenses = top_values(records, &InflectionRecord::tense, shape.tenses);
  const auto persons = top_values(records, &InflectionRecord::person, shape.persons);
  if (static_cast<int>(tenses.size()) < shape.tenses || static_cast<int>(persons.size()) < shape.persons)
    throw CapacityError("table has fewer than " + std::to_string(shape.tenses) + " tenses or " +
                        std::to_string(shape.persons) + " persons");

  std::set<std::string> lexemes;
  for (const auto& r : records) lexemes.insert(r.lexeme);
  std::vector<std::string> eligible;
  std::vector<std::string> missing;
  for (const auto& l : lexemes) {
    bool full = true;
    for (const auto& t : tenses)
      for (const auto& p : persons)
        if (!table.find(l, t, p)) {
          full = false;
          missing.push_back(l + "/" + t + "/" + p);
        }
    if (full) eligible.push_back(l);
  }
  if (static_cast<int>(eligible.size()) < shape.roots) {
    std::string msg = "only " + std::to_string(eligible.size()) + " lexemes cover all " +
                      std::to_string(tenses.size() * persons.size()) + " cells; need " +
                      std::to_string(shape.roots);
    if (!missing.empty()) {
      msg += "; missing cells:";
      for (std::size_t i = 0; i < missing.size() && i < 20; ++i) msg += " " + missing[i];
      if (missing.size() > 20) msg += " ...";
    }
    throw CapacityError(msg);
  }

  AttrValConfig config;
  config.cardinalities = {shape.roots, shape.tenses, shape.persons};
  config.vocab_size = std::max<int>(2, static_cast<int>(table.alphabet().size()));
  config.max_len = static_cast<int>(table.longest_form());
  config.attribute_weights = {0.9, 0.05, 0.05};

  Rng rng(seed);
  std::vector<Sublanguage> out;
  for (int s = 0; s < count; ++s) {
    std::vector<std::string> pool = eligible;
    rng.shuffle(pool);
    pool.resize(static_cast<std::size_t>(shape.roots));
    std::sort(pool.begin(), pool.end());
    std::vector<Corpus::Pair> pairs;
    for (std::size_t r = 0; r < pool.size(); ++r)
      for (std::size_t t = 0; t < tenses.size(); ++t)
        for (std::size_t p = 0; p < persons.size(); ++p) {
          const std::string* form = table.find(pool[r], tenses[t], persons[p]);
          pairs.emplace_back(Meaning{{static_cast<int>(r), static_cast<int>(t), static_cast<int>(p)}},
                             Message{table.encode(*form)});
        }
    Metadata meta{{"generator", "natural"}, {"seed", std::to_string(seed)}, {"index", std::to_string(s)}};
    out.push_back({pool, tenses, persons, Corpus(config, std::move(pairs), std::move(meta))});
  }
  return out;
}

double meaningfulness_rate(const std::vector<Sublanguage>& sublanguages, const Segmenter& segmenter) {
  if (sublanguages.empty()) return 0.0;
  std::size_t hits = 0;
  for (const auto& s : sublanguages)
    if (bosdis_ratio(s.corpus, segmenter(s.corpus)).value > 1.0) ++hits;
  return static_cast<double>(hits) / static_cast<double>(sublanguages.size());
}

}  // namespace morphkit
