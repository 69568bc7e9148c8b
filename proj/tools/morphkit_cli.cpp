// morphkit command-line front end: gen, segment, analyze, curve,
// natural sample, batch, report.
//
// Exit codes: 0 ok, 1 internal, 2 usage, 3 I/O, 4 malformed input,
// 5 capacity.
#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "morphkit/core.hpp"
#include "morphkit/langgen.hpp"
#include "morphkit/metrics.hpp"
#include "morphkit/natural.hpp"
#include "morphkit/segment.hpp"

#ifndef MORPHKIT_VERSION
#define MORPHKIT_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using namespace morphkit;
using json = nlohmann::json;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Globals {
  std::string preset = "default";
  std::uint64_t seed = 0;
  std::string out_dir = ".";
  std::string convention = "rise";
  int bpe_vocab = 96;
  double tau = 0.0;
};

// Collects paths for the manifest; written once, after every output exists.
struct Run {
  std::string command;
  std::vector<std::string> argv;
  std::string preset;
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  json extra = json::object();
};

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

fs::path out_path(const Globals& g, const std::string& name) { return fs::path(g.out_dir) / name; }

void ensure_out_dir(const Globals& g) {
  std::error_code ec;
  fs::create_directories(g.out_dir, ec);
  if (ec) throw IoError("cannot create " + g.out_dir + ": " + ec.message());
}

void require_input(const std::string& path) {
  if (!fs::is_regular_file(path)) throw IoError("cannot read " + path);
}

template <typename F>
void write_file(const fs::path& path, Run& run, F&& body) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  body(out);
  out.flush();
  if (!out) throw IoError("write failed: " + path.string());
  run.outputs.push_back(path.generic_string());
}

void write_manifest(const Globals& g, const Run& run) {
  json j;
  j["command"] = run.command;
  j["argv"] = run.argv;
  j["preset"] = run.preset;
  j["seeds"] = run.seeds;
  j["inputs"] = run.inputs;
  j["outputs"] = run.outputs;
  j["options"] = {{"has_convention", g.convention}, {"tau", g.tau}, {"bpe_vocab", g.bpe_vocab}};
  for (const auto& [k, v] : run.extra.items()) j[k] = v;
  j["version"] = MORPHKIT_VERSION;
  j["timestamp"] = utc_timestamp();
  const auto path = out_path(g, "manifest.json");
  std::ofstream out(path, std::ios::binary);
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

AttrValConfig preset_config(const Globals& g) {
  try {
    return AttrValConfig::preset(g.preset);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

HasConvention convention(const Globals& g) {
  try {
    return parse_has_convention(g.convention);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

LanguageSpec language(const std::string& text, const AttrValConfig& cfg, std::uint64_t seed) {
  try {
    return parse_language_spec(text, cfg, seed);
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("--lang ") + text + ": " + e.what());
  }
}

ReportOptions report_options(const Globals& g) {
  ReportOptions o;
  o.tau = g.tau;
  o.convention = convention(g);
  o.bpe_vocab_sizes = {g.bpe_vocab, kMaxVocab};
  return o;
}

std::vector<int> range_list(const std::string& text, bool allow_max, int default_step) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  try {
    while (std::getline(ss, item, ',')) {
      if (allow_max && item == "max") {
        out.push_back(kMaxVocab);
        continue;
      }
      const auto dots = item.find("..");
      if (dots == std::string::npos) {
        out.push_back(parse_ints(item).at(0));
        continue;
      }
      int step = default_step;
      std::string hi_text = item.substr(dots + 2);
      if (const auto colon = hi_text.find(':'); colon != std::string::npos) {
        step = parse_ints(hi_text.substr(colon + 1)).at(0);
        hi_text = hi_text.substr(0, colon);
      }
      const int lo = parse_ints(item.substr(0, dots)).at(0);
      const int hi = parse_ints(hi_text).at(0);
      if (step <= 0 || hi < lo) throw std::invalid_argument("bad range");
      for (int v = lo; v <= hi; v += step) out.push_back(v);
      if (out.back() != hi) out.push_back(hi);
    }
  } catch (const std::exception&) {
    throw UsageError("bad list or range: " + text);
  }
  if (out.empty()) throw UsageError("empty list: " + text);
  return out;
}

std::vector<std::uint64_t> seed_list(const std::string& text) {
  std::vector<std::uint64_t> out;
  for (int s : range_list(text, false, 1)) {
    if (s < 0) throw UsageError("negative seed in " + text);
    out.push_back(static_cast<std::uint64_t>(s));
  }
  return out;
}

Corpus load_corpus(const std::string& path, const std::string& config_path, Run& run) {
  require_input(path);
  run.inputs.push_back(path);
  std::optional<AttrValConfig> cfg;
  if (!config_path.empty()) {
    require_input(config_path);
    run.inputs.push_back(config_path);
    cfg = read_config(fs::path(config_path));
  }
  return read_corpus(fs::path(path), cfg);
}

std::string stem_of(const std::string& path) { return fs::path(path).stem().string(); }

void write_curve_csv(const std::vector<CurvePoint>& curve, std::ostream& out) {
  out << "vocab_size,bpelen\n";
  for (const auto& p : curve) out << (p.vocab_size == kMaxVocab ? std::string("max") : std::to_string(p.vocab_size)) << ','
                                  << format_number(p.bpelen) << '\n';
}

struct Series {
  std::string label;
  std::vector<CurvePoint> points;
};

std::vector<CurvePoint> read_curve_csv(const std::string& path) {
  require_input(path);
  std::ifstream in(path, std::ios::binary);
  std::string line;
  std::size_t n = 1;
  if (!std::getline(in, line) || line != "vocab_size,bpelen") throw ParseError(1, "expected header vocab_size,bpelen");
  std::vector<CurvePoint> out;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ParseError(n, "expected vocab_size,bpelen");
    try {
      const std::string v = line.substr(0, comma);
      out.push_back({v == "max" ? kMaxVocab : parse_ints(v).at(0), std::stod(line.substr(comma + 1))});
    } catch (const std::exception&) {
      throw ParseError(n, "bad curve row");
    }
  }
  return out;
}

std::string fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

// Line chart of BPELen against |V|; the MAX point is drawn as a dashed
// horizontal reference per series.
void write_curve_svg(const std::vector<Series>& series, std::ostream& out) {
  const double w = 640, h = 400, left = 60, right = 170, top = 20, bottom = 50;
  double xmin = 1e300, xmax = -1e300, ymax = 0;
  for (const auto& s : series)
    for (const auto& p : s.points) {
      ymax = std::max(ymax, p.bpelen);
      if (p.vocab_size == kMaxVocab) continue;
      xmin = std::min(xmin, double(p.vocab_size));
      xmax = std::max(xmax, double(p.vocab_size));
    }
  if (xmin > xmax) xmin = 0, xmax = 1;
  if (xmax == xmin) xmax = xmin + 1;
  ymax = std::max(1.0, std::ceil(ymax));
  auto X = [&](double v) { return left + (v - xmin) / (xmax - xmin) * (w - left - right); };
  auto Y = [&](double v) { return h - bottom - v / ymax * (h - top - bottom); };
  const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<line x1=\"" << left << "\" y1=\"" << Y(0) << "\" x2=\"" << w - right << "\" y2=\"" << Y(0) << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << left << "\" y1=\"" << Y(0) << "\" x2=\"" << left << "\" y2=\"" << top << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = xmin + (xmax - xmin) * i / 4, yv = ymax * i / 4;
    out << "<text x=\"" << fixed(X(xv)) << "\" y=\"" << fixed(h - bottom + 18) << "\" text-anchor=\"middle\">" << fixed(xv) << "</text>\n";
    out << "<text x=\"" << fixed(left - 6) << "\" y=\"" << fixed(Y(yv) + 4) << "\" text-anchor=\"end\">" << fixed(yv) << "</text>\n";
  }
  out << "<text x=\"" << fixed((left + w - right) / 2) << "\" y=\"" << h - 10 << "\" text-anchor=\"middle\">|V|</text>\n";
  out << "<text x=\"14\" y=\"" << fixed((top + h - bottom) / 2) << "\" transform=\"rotate(-90 14 " << fixed((top + h - bottom) / 2)
      << ")\" text-anchor=\"middle\">BPELen</text>\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    const char* color = colors[i % 8];
    std::string pts;
    for (const auto& p : series[i].points) {
      if (p.vocab_size == kMaxVocab) {
        out << "<line x1=\"" << left << "\" y1=\"" << fixed(Y(p.bpelen)) << "\" x2=\"" << w - right << "\" y2=\"" << fixed(Y(p.bpelen))
            << "\" stroke=\"" << color << "\" stroke-dasharray=\"4 4\"/>\n";
        continue;
      }
      pts += fixed(X(p.vocab_size)) + "," + fixed(Y(p.bpelen)) + " ";
    }
    if (!pts.empty()) pts.pop_back();
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"" << pts << "\"/>\n";
    const double ly = top + 16 * (i + 1);
    out << "<line x1=\"" << w - right + 10 << "\" y1=\"" << ly - 4 << "\" x2=\"" << w - right + 30 << "\" y2=\"" << ly - 4
        << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << w - right + 36 << "\" y=\"" << ly << "\">" << series[i].label << "</text>\n";
  }
  out << "</svg>\n";
}

std::vector<std::pair<std::string, std::string>> report_rows(const MetricReport& r) {
  std::stringstream ss;
  write_report_tsv(r, ss);
  std::vector<std::pair<std::string, std::string>> rows;
  std::string line;
  std::getline(ss, line);
  while (std::getline(ss, line)) {
    const auto tab = line.find('\t');
    rows.emplace_back(line.substr(0, tab), line.substr(tab + 1));
  }
  return rows;
}

std::vector<std::pair<std::string, std::string>> read_report_tsv(const std::string& path) {
  require_input(path);
  std::ifstream in(path, std::ios::binary);
  std::string line;
  if (!std::getline(in, line) || line != "metric\tvalue") throw ParseError(1, "expected header metric\\tvalue in " + path);
  std::vector<std::pair<std::string, std::string>> rows;
  std::size_t n = 1;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw ParseError(n, "expected metric\\tvalue in " + path);
    rows.emplace_back(line.substr(0, tab), line.substr(tab + 1));
  }
  return rows;
}

// Flags and the fused pair are per-run labels, not quantities to average.
bool numeric_metric(const std::string& m) {
  auto ends = [&](const std::string& suffix) { return m.size() >= suffix.size() && m.compare(m.size() - suffix.size(), suffix.size(), suffix) == 0; };
  return m != "best_fusion_pair" && m != "topsim_degenerate" && !ends("_unstable") && !ends("_low_confidence");
}

std::string sanitize(const std::string& s) {
  std::string out;
  for (char c : s) out += std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' ? c : '_';
  return out;
}

// --- subcommands -----------------------------------------------------------

void cmd_gen(const Globals& g, Run& run, const std::string& lang, std::string output, const std::string& config_path,
             const std::string& symbols) {
  AttrValConfig cfg = preset_config(g);
  if (!config_path.empty()) {
    require_input(config_path);
    run.inputs.push_back(config_path);
    cfg = read_config(fs::path(config_path));
  }
  const auto spec = language(lang, cfg, g.seed);
  const auto built = build_language(spec);
  const auto corpus = generate_corpus(built);
  if (output.empty()) output = sanitize(lang) + "_seed" + std::to_string(g.seed) + ".tsv";
  ensure_out_dir(g);
  const auto path = out_path(g, output);
  write_file(path, run, [&](std::ostream& o) { write_corpus(corpus, o); });
  write_file(fs::path(path).replace_extension(".config"), run, [&](std::ostream& o) { write_config(cfg, o); });
  if (!symbols.empty()) write_file(out_path(g, symbols), run, [&](std::ostream& o) { write_symbol_table(built, o); });
  run.seeds = {g.seed};
  run.extra["language"] = to_string(spec);
}

void cmd_segment(const Globals& g, Run& run, const std::string& input, const std::string& config_path,
                 const std::string& method, std::size_t window) {
  const auto corpus = load_corpus(input, config_path, run);
  ensure_out_dir(g);
  const auto stem = stem_of(input);
  if (method == "has") {
    const auto seg = has_segment(corpus, fit_entropy(corpus, window), g.tau, convention(g));
    write_file(out_path(g, stem + ".has.tsv"), run, [&](std::ostream& o) { write_segmented(seg, o); });
  } else if (method == "bpe") {
    const auto merges = bpe_train(corpus, g.bpe_vocab);
    const auto name = segmenter_name(g.bpe_vocab);
    write_file(out_path(g, stem + "." + name + ".tsv"), run, [&](std::ostream& o) { write_segmented(bpe_apply(merges, corpus), o); });
    write_file(out_path(g, stem + "." + name + ".merges"), run, [&](std::ostream& o) { write_merges(merges, o); });
  } else {
    throw UsageError("unknown segmentation method " + method + " (has, bpe)");
  }
}

void cmd_analyze(const Globals& g, Run& run, const std::string& input, const std::string& config_path,
                 const std::string& curve, bool svg) {
  const auto corpus = load_corpus(input, config_path, run);
  std::vector<int> sizes;
  if (!curve.empty()) sizes = range_list(curve, true, 8);
  const auto report = full_report(corpus, report_options(g));
  ensure_out_dir(g);
  const auto stem = stem_of(input);
  write_file(out_path(g, stem + ".report.tsv"), run, [&](std::ostream& o) { write_report_tsv(report, o); });
  if (!sizes.empty()) {
    const auto points = bpelen_curve(corpus, sizes);
    write_file(out_path(g, stem + ".curve.csv"), run, [&](std::ostream& o) { write_curve_csv(points, o); });
    if (svg) write_file(out_path(g, stem + ".curve.svg"), run, [&](std::ostream& o) { write_curve_svg({{stem, points}}, o); });
  }
  write_report_table(report, std::cout);
}

void cmd_curve(const Globals& g, Run& run, const std::vector<std::string>& inputs, const std::string& config_path,
               const std::string& sizes_text, const std::string& svg) {
  const auto sizes = range_list(sizes_text, true, 8);
  std::vector<Series> series;
  for (const auto& input : inputs) series.push_back({stem_of(input), bpelen_curve(load_corpus(input, config_path, run), sizes)});
  ensure_out_dir(g);
  for (const auto& s : series)
    write_file(out_path(g, s.label + ".curve.csv"), run, [&](std::ostream& o) { write_curve_csv(s.points, o); });
  if (!svg.empty()) write_file(out_path(g, svg), run, [&](std::ostream& o) { write_curve_svg(series, o); });
}

void cmd_natural_sample(const Globals& g, Run& run, const std::string& table_path, int count, const std::string& shape_text,
                        bool evaluate) {
  require_input(table_path);
  run.inputs.push_back(table_path);
  std::vector<int> shape_vals;
  try {
    shape_vals = parse_ints(shape_text);
  } catch (const std::invalid_argument&) {
    throw UsageError("bad --shape " + shape_text);
  }
  if (shape_vals.size() != 3) throw UsageError("--shape needs roots,tenses,persons");
  const auto table = load_table(fs::path(table_path));
  const auto subs = sample_sublanguages(table, count, g.seed, {shape_vals[0], shape_vals[1], shape_vals[2]});
  ensure_out_dir(g);
  write_file(out_path(g, "alphabet.tsv"), run, [&](std::ostream& o) { write_alphabet(table, o); });
  const int digits = static_cast<int>(std::to_string(std::max(count - 1, 0)).size());
  write_file(out_path(g, "sublanguages.tsv"), run, [&](std::ostream& o) {
    o << "id\ttenses\tpersons\troots\n";
    for (std::size_t i = 0; i < subs.size(); ++i) {
      auto join = [](const std::vector<std::string>& v) {
        std::string s;
        for (const auto& x : v) s += (s.empty() ? "" : ",") + x;
        return s;
      };
      o << i << '\t' << join(subs[i].tenses) << '\t' << join(subs[i].persons) << '\t' << join(subs[i].roots) << '\n';
    }
  });
  for (std::size_t i = 0; i < subs.size(); ++i) {
    std::ostringstream name;
    name << "sub_" << std::setw(digits) << std::setfill('0') << i;
    write_file(out_path(g, name.str() + ".tsv"), run, [&](std::ostream& o) { write_corpus(subs[i].corpus, o); });
    write_file(out_path(g, name.str() + ".config"), run, [&](std::ostream& o) { write_config(subs[i].corpus.config(), o); });
  }
  run.seeds = {g.seed};
  if (evaluate) {
    const double has_rate = meaningfulness_rate(subs, make_has_segmenter(g.tau, convention(g)));
    const double bpe_rate = meaningfulness_rate(subs, make_bpe_segmenter(g.bpe_vocab));
    write_file(out_path(g, "meaningfulness.tsv"), run, [&](std::ostream& o) {
      o << "segmenter\trate\nhas\t" << format_number(has_rate) << '\n'
        << segmenter_name(g.bpe_vocab) << '\t' << format_number(bpe_rate) << '\n';
    });
    std::cout << "meaningfulness has " << format_number(has_rate) << ", " << segmenter_name(g.bpe_vocab) << ' '
              << format_number(bpe_rate) << '\n';
  }
}

void cmd_batch(const Globals& g, Run& run, const std::vector<std::string>& langs, const std::string& seeds_text) {
  const auto seeds = seed_list(seeds_text);
  const auto cfg = preset_config(g);
  const auto options = report_options(g);
  for (const auto& l : langs) language(l, cfg, 0);  // fail on usage before any work
  ensure_out_dir(g);

  // condition -> metric -> values in seed order
  std::vector<std::string> metric_order;
  std::map<std::string, std::map<std::string, std::vector<double>>> values;
  for (const auto& lang : langs) {
    for (auto seed : seeds) {
      const auto corpus = generate_corpus(language(lang, cfg, seed));
      const auto report = full_report(corpus, options);
      const auto path = out_path(g, "runs/" + sanitize(lang) + "/seed" + std::to_string(seed) + ".tsv");
      write_file(path, run, [&](std::ostream& o) { write_report_tsv(report, o); });
      for (const auto& [metric, text] : report_rows(report)) {
        if (!numeric_metric(metric)) continue;
        if (std::find(metric_order.begin(), metric_order.end(), metric) == metric_order.end()) metric_order.push_back(metric);
        values[lang][metric].push_back(std::stod(text));
      }
      std::cerr << lang << " seed " << seed << " done\n";
    }
  }

  write_file(out_path(g, "aggregate.tsv"), run, [&](std::ostream& o) {
    o << "condition\tmetric\tmean\tsd\tn\n";
    for (const auto& lang : langs)
      for (const auto& metric : metric_order) {
        const auto& v = values[lang][metric];
        const auto s = summarize(v);
        o << lang << '\t' << metric << '\t' << format_number(s.mean) << '\t' << (s.n > 1 ? format_number(s.stddev) : "") << '\t'
          << s.n << '\n';
      }
  });
  if (langs.size() > 1 && seeds.size() > 1) {
    write_file(out_path(g, "welch.tsv"), run, [&](std::ostream& o) {
      o << "metric\tcondition_a\tcondition_b\tt\tdf\tp\n";
      for (const auto& metric : metric_order)
        for (std::size_t a = 0; a < langs.size(); ++a)
          for (std::size_t b = a + 1; b < langs.size(); ++b) {
            const auto w = compare_means(values[langs[a]][metric], values[langs[b]][metric]);
            o << metric << '\t' << langs[a] << '\t' << langs[b] << '\t' << format_number(w.t) << '\t' << format_number(w.df) << '\t'
              << format_number(w.p) << '\n';
          }
    });
  }

  // Condition rows, metric columns: mean ± sd (sd dropped for one seed).
  const std::string bpe = segmenter_name(g.bpe_vocab);
  const std::vector<std::string> shown{"topsim",          "posdis",     "haslen", "bpelen_" + bpe.substr(3), "bpelen_max",
                                       "bosdis_ratio_" + bpe, "f_topsim_delta"};
  std::vector<std::string> cols;
  for (const auto& m : shown)
    if (std::find(metric_order.begin(), metric_order.end(), m) != metric_order.end()) cols.push_back(m);
  std::size_t first = 9;
  for (const auto& l : langs) first = std::max(first, l.size());
  std::cout << std::left << std::setw(static_cast<int>(first) + 2) << "condition";
  std::vector<std::size_t> widths;
  for (const auto& c : cols) widths.push_back(std::max<std::size_t>(c.size() + 2, 16));
  for (std::size_t i = 0; i < cols.size(); ++i) std::cout << std::setw(static_cast<int>(widths[i])) << cols[i];
  std::cout << '\n';
  for (const auto& lang : langs) {
    std::cout << std::setw(static_cast<int>(first) + 2) << lang;
    for (std::size_t i = 0; i < cols.size(); ++i) {
      const auto s = summarize(values[lang][cols[i]]);
      char buf[64];
      std::size_t shown_len;
      if (s.n > 1) {
        shown_len = static_cast<std::size_t>(std::snprintf(buf, sizeof buf, "%.3f±%.3f", s.mean, s.stddev)) - 1;  // ± is two bytes
      } else {
        shown_len = static_cast<std::size_t>(std::snprintf(buf, sizeof buf, "%.3f", s.mean));
      }
      std::cout << buf << std::string(widths[i] > shown_len ? widths[i] - shown_len : 1, ' ');
    }
    std::cout << '\n';
  }
  run.seeds = seeds;
  run.extra["conditions"] = langs;
}

void cmd_report(const Globals& g, Run& run, const std::vector<std::string>& reports, const std::vector<std::string>& curves,
                const std::string& svg) {
  std::vector<std::string> metrics;
  std::vector<std::map<std::string, std::string>> columns;
  for (const auto& path : reports) {
    run.inputs.push_back(path);
    std::map<std::string, std::string> col;
    for (const auto& [k, v] : read_report_tsv(path)) {
      if (std::find(metrics.begin(), metrics.end(), k) == metrics.end()) metrics.push_back(k);
      col[k] = v;
    }
    columns.push_back(std::move(col));
  }
  if (!reports.empty()) {
    std::size_t width = 6;
    for (const auto& m : metrics) width = std::max(width, m.size());
    std::cout << std::left << std::setw(static_cast<int>(width) + 2) << "metric";
    for (const auto& r : reports) std::cout << std::setw(22) << stem_of(r);
    std::cout << '\n';
    for (const auto& m : metrics) {
      std::cout << std::setw(static_cast<int>(width) + 2) << m;
      for (const auto& col : columns) {
        const auto it = col.find(m);
        std::cout << std::setw(22) << (it == col.end() ? "-" : it->second);
      }
      std::cout << '\n';
    }
  }
  std::vector<Series> series;
  for (const auto& path : curves) {
    run.inputs.push_back(path);
    series.push_back({stem_of(path), read_curve_csv(path)});
  }
  if (!svg.empty()) {
    if (series.empty()) throw UsageError("--svg needs at least one --curves file");
    ensure_out_dir(g);
    write_file(out_path(g, svg), run, [&](std::ostream& o) { write_curve_svg(series, o); });
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Artificial double-articulated languages: generation, segmentation and morphology metrics", "morphkit"};
  app.set_version_flag("--version", MORPHKIT_VERSION);
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand
  Globals g;
  app.add_option("--preset", g.preset, "meaning-space preset")->check(CLI::IsMember({"default", "inflection"}));
  app.add_option("--seed", g.seed, "random seed");
  app.add_option("--out-dir", g.out_dir, "directory for outputs and manifest.json");
  app.add_option("--has-convention", g.convention, "HAS boundary rule")->check(CLI::IsMember({"rise", "verbatim"}));
  app.add_option("--bpe-vocab", g.bpe_vocab, "BPE inventory budget |V|")->check(CLI::PositiveNumber);
  app.add_option("--tau", g.tau, "HAS threshold");

  std::string lang, output, config, symbols, input, method = "has", curve, sizes = "8..200", svg_name, table, shape = "42,2,3",
                                           seeds = "0..7";
  std::vector<std::string> inputs, langs, curves;
  std::size_t window = 0;
  int count = 50;
  bool svg = false, evaluate = false;

  auto* gen = app.add_subcommand("gen", "generate a language corpus");
  gen->add_option("--lang", lang, "language spec, e.g. fusion:pair=1,2")->required();
  gen->add_option("-o,--output", output, "corpus TSV name inside --out-dir");
  gen->add_option("--config", config, "meaning-space config file (overrides --preset)");
  gen->add_option("--symbols", symbols, "also dump the symbol table");

  auto* seg = app.add_subcommand("segment", "segment a corpus with HAS or BPE");
  seg->add_option("input", input, "corpus TSV")->required();
  seg->add_option("--config", config, "config file (default: inferred from the corpus)");
  seg->add_option("--method", method, "has or bpe");
  seg->add_option("--window", window, "entropy context window (0 = full prefix)");

  auto* analyze = app.add_subcommand("analyze", "compute every metric for one corpus");
  analyze->add_option("input", input, "corpus TSV")->required();
  analyze->add_option("--config", config, "config file (default: inferred from the corpus)");
  analyze->add_option("--curve", curve, "BPELen curve sizes, e.g. 8..200 or 8..200:4,max");
  analyze->add_flag("--svg", svg, "also draw the curve as SVG");

  auto* curve_cmd = app.add_subcommand("curve", "BPELen curves for one or more corpora");
  curve_cmd->add_option("inputs", inputs, "corpus TSVs")->required();
  curve_cmd->add_option("--config", config, "config file shared by all inputs");
  curve_cmd->add_option("--sizes", sizes, "vocabulary sizes, e.g. 8..200 or 8,16,max");
  curve_cmd->add_option("--svg", svg_name, "SVG file name inside --out-dir");

  auto* natural = app.add_subcommand("natural", "natural-language inflection tables");
  natural->require_subcommand(1);
  natural->fallthrough();
  auto* sample = natural->add_subcommand("sample", "sample attribute-value sublanguages from a table");
  sample->add_option("--table", table, "CSV lexeme,tense,person,form")->required();
  sample->add_option("--count", count, "number of sublanguages")->check(CLI::PositiveNumber);
  sample->add_option("--shape", shape, "roots,tenses,persons");
  sample->add_flag("--evaluate", evaluate, "report the meaningfulness rate of HAS and BPE");

  auto* batch = app.add_subcommand("batch", "metrics over seeds for several conditions");
  batch->add_option("--lang", langs, "language spec (repeatable, one per condition)")->required();
  batch->add_option("--seeds", seeds, "seed list or range");

  auto* report = app.add_subcommand("report", "tabulate report TSVs and draw curves");
  report->add_option("inputs", inputs, "report TSVs");
  report->add_option("--curves", curves, "curve CSVs");
  report->add_option("--svg", svg_name, "SVG file name inside --out-dir");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  Run run;
  run.preset = g.preset;
  run.argv.assign(argv, argv + argc);
  try {
    if (gen->parsed()) {
      run.command = "gen";
      cmd_gen(g, run, lang, output, config, symbols);
    } else if (seg->parsed()) {
      run.command = "segment";
      cmd_segment(g, run, input, config, method, window);
    } else if (analyze->parsed()) {
      run.command = "analyze";
      cmd_analyze(g, run, input, config, curve, svg);
    } else if (curve_cmd->parsed()) {
      run.command = "curve";
      cmd_curve(g, run, inputs, config, sizes, svg_name);
    } else if (sample->parsed()) {
      run.command = "natural sample";
      cmd_natural_sample(g, run, table, count, shape, evaluate);
    } else if (batch->parsed()) {
      run.command = "batch";
      cmd_batch(g, run, langs, seeds);
    } else if (report->parsed()) {
      run.command = "report";
      if (inputs.empty() && curves.empty()) throw UsageError("report needs report TSVs or --curves");
      cmd_report(g, run, inputs, curves, svg_name);
    }
    if (!run.outputs.empty()) write_manifest(g, run);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return 3;
  } catch (const ParseError& e) {
    std::cerr << "malformed input: " << e.what() << "\n";
    return 4;
  } catch (const LoadError& e) {
    std::cerr << "malformed input: " << e.what() << "\n";
    return 4;
  } catch (const CapacityError& e) {
    std::cerr << "capacity error: " << e.what() << "\n";
    return 5;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
