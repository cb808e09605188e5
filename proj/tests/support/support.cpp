// SPDX-License-Identifier: Apache-2.0
#include "support.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <stdexcept>

#include <unistd.h>

#include "sdoh/text.hpp"

namespace sdoh::testing {

namespace fs = std::filesystem;

TempDir::TempDir() {
  static std::atomic<int> counter{0};
  path_ = fs::temp_directory_path() /
          ("sdoh-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  fs::remove_all(path_);
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

Event make_event(const std::string& text, const std::string& type, std::size_t start, std::size_t end,
                 std::map<std::string, std::string> args) {
  const text::CodepointIndex idx(text);
  return Event{type, TextSpan{start, end, std::string(idx.slice(start, end))}, std::move(args)};
}

AnnotatedDocument make_doc(const std::string& id, const std::string& text, std::vector<Event> events) {
  AnnotatedDocument d;
  d.document.doc_id = id;
  d.document.patient_id = "p-" + id;
  d.document.text = text;
  d.events = std::move(events);
  return d;
}

std::map<std::string, std::string> random_arguments(const Schema& schema, const std::string& type, Rng& rng) {
  std::map<std::string, std::string> args;
  const EventTypeDef* def = schema.find(type);
  for (const auto& a : def->arguments) {
    if (!a.required && uniform_index(rng, 2) == 0) continue;
    args[a.name] = pick(a.subtypes, rng);
  }
  return args;
}

namespace {

const std::vector<std::string> kWords = {
    "lives", "with", "mom", "dad", "smokes", "daily", "école", "niño", "café", "straße", "школа", "δρόμος",
    "naïve", "works", "nights", "denies", "alcohol", "vapes", "food", "bank", "shelter", "3rd", "grade", "✓",
    "家", "IEP", "O'Brien", "co-op", "[x]", "a|b", "x = y",
};

std::string random_id(Rng& rng, std::size_t i) {
  static const std::vector<std::string> parts = {"doc", "note/", "n ", "ü", "%", ".hidden", "A-", "b_"};
  return pick(parts, rng) + std::to_string(i) + (uniform_index(rng, 4) == 0 ? pick(parts, rng) : "");
}

std::string random_date(Rng& rng) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04zu-%02zu-%02zu", 2000 + uniform_index(rng, 25), 1 + uniform_index(rng, 12),
                1 + uniform_index(rng, 28));
  return buf;
}

}  // namespace

Corpus random_corpus(const Schema& schema, std::size_t n_docs, Rng& rng) {
  Corpus c;
  const auto& types = schema.event_types();
  for (std::size_t i = 0; i < n_docs; ++i) {
    AnnotatedDocument d;
    d.document.doc_id = random_id(rng, i);
    d.document.patient_id = "pt" + std::to_string(uniform_index(rng, n_docs + 1));
    if (uniform_index(rng, 3)) d.document.note_date = random_date(rng);
    if (uniform_index(rng, 2)) d.annotator_id = uniform_index(rng, 2) ? "ann-a" : "ann b";
    std::string text;
    const std::size_t n_words = 1 + uniform_index(rng, 30);
    for (std::size_t w = 0; w < n_words; ++w) {
      if (w) text += uniform_index(rng, 8) == 0 ? (uniform_index(rng, 2) ? "\n" : "\t") : " ";
      text += pick(kWords, rng);
    }
    const std::size_t len = text::length(text);
    std::set<std::tuple<std::string, std::size_t, std::size_t>> seen;
    const std::size_t n_events = uniform_index(rng, 6);
    for (std::size_t e = 0; e < n_events; ++e) {
      const std::size_t start = uniform_index(rng, len);
      const std::size_t end = start + 1 + uniform_index(rng, std::min<std::size_t>(len - start, 12));
      const std::string& type = pick(types, rng).name;
      if (!seen.emplace(type, start, end).second) continue;
      d.events.push_back(make_event(text, type, start, end, random_arguments(schema, type, rng)));
    }
    d.document.text = std::move(text);
    const int split = static_cast<int>(uniform_index(rng, 4));
    if (split < 3) c.split_assignment[d.id()] = static_cast<Split>(split);
    c.docs.push_back(std::move(d));
  }
  return c;
}

void sort_canonical(std::vector<Event>& events, const Schema& schema) {
  std::stable_sort(events.begin(), events.end(), [&](const Event& a, const Event& b) {
    return std::make_tuple(a.trigger.start, a.trigger.end, schema.order_of(a.event_type)) <
           std::make_tuple(b.trigger.start, b.trigger.end, schema.order_of(b.event_type));
  });
}

namespace {

// Triggers come from letters only so filler (digits, punctuation) can never
// create extra occurrences.
std::string random_trigger(Rng& rng) {
  static const std::vector<std::string> syll = {"ka", "lo", "mi", "re", "su", "ta", "vé", "ñu", "ßo", "жа", "πι",
                                                "Qa", "Zx", "a[b", "c=d", "e|f", "g AN h"};
  std::string t;
  const std::size_t words = 1 + uniform_index(rng, 3);
  for (std::size_t w = 0; w < words; ++w) {
    if (w) t += ' ';
    const std::size_t n = 1 + uniform_index(rng, 3);
    for (std::size_t s = 0; s < n; ++s) t += pick(syll, rng);
  }
  return t;
}

std::string random_filler(Rng& rng) {
  static const std::vector<std::string> bits = {" ", "  ", ". ", ", ", "\n", "1", "42", " - ", "; ", "(7) ", "\t"};
  std::string f;
  const std::size_t n = 1 + uniform_index(rng, 4);
  for (std::size_t i = 0; i < n; ++i) f += pick(bits, rng);
  return f;
}

bool grounding_is_faithful(const LinearizerCase& c) {
  const std::u32string doc = text::decode(c.text);
  std::map<std::string, std::set<std::size_t>> claimed;
  for (const auto& e : c.events) {
    const std::u32string needle = text::decode(e.trigger.text);
    std::size_t pos = doc.find(needle);
    while (pos != std::u32string::npos && claimed[e.event_type].count(pos)) pos = doc.find(needle, pos + 1);
    if (pos != e.trigger.start) return false;
    claimed[e.event_type].insert(pos);
  }
  return true;
}

}  // namespace

LinearizerCase random_linearizer_case(const Schema& schema, Rng& rng) {
  const auto& types = schema.event_types();
  for (;;) {
    LinearizerCase c;
    std::vector<std::string> used;
    const std::size_t n = uniform_index(rng, 7);
    std::size_t cp = 0;
    auto append = [&](const std::string& s) {
      c.text += s;
      cp += text::length(s);
    };
    append(random_filler(rng));
    for (std::size_t i = 0; i < n; ++i) {
      std::string trig = (!used.empty() && uniform_index(rng, 4) == 0) ? pick(used, rng) : random_trigger(rng);
      if (trig.find(" AND ") != std::string::npos || trig.find(']') != std::string::npos) continue;
      used.push_back(trig);
      const std::size_t start = cp;
      append(trig);
      const std::size_t end = cp;
      const std::size_t n_types = 1 + (uniform_index(rng, 5) == 0);
      std::set<std::string> on_span;
      for (std::size_t k = 0; k < n_types; ++k) {
        const std::string& type = pick(types, rng).name;
        if (!on_span.insert(type).second) continue;
        c.events.push_back(Event{type, TextSpan{start, end, trig}, random_arguments(schema, type, rng)});
      }
      append(random_filler(rng));
    }
    sort_canonical(c.events, schema);
    if (grounding_is_faithful(c)) return c;
  }
}

namespace oracle {

DocumentCounts counts_for_matching(const std::vector<Event>& gold, const std::vector<Event>& pred,
                                   const std::vector<std::pair<std::size_t, std::size_t>>& pairs) {
  DocumentCounts dc;
  std::map<std::size_t, std::size_t> g2p, p2g;
  for (auto [g, p] : pairs) {
    g2p[g] = p;
    p2g[p] = g;
  }
  auto bump = [](CountMap& m, const ScoreKey& k, int which) {
    Counts& c = m[k];
    (which == 0 ? c.tp : which == 1 ? c.fp : c.fn) += 1;
  };
  for (std::size_t g = 0; g < gold.size(); ++g) {
    const Event& ge = gold[g];
    const bool matched = g2p.count(g) > 0;
    if (!matched) bump(dc.trigger, {ge.event_type, ""}, 2);
    const Event* pe = matched ? &pred[g2p[g]] : nullptr;
    if (!pe || pe->arguments != ge.arguments) bump(dc.event, {ge.event_type, ""}, 2);
    for (const auto& [name, sub] : ge.arguments) {
      const bool hit = pe && pe->arguments.count(name) && pe->arguments.at(name) == sub;
      if (!hit) bump(dc.argument, {ge.event_type, name}, 2);
    }
  }
  for (std::size_t p = 0; p < pred.size(); ++p) {
    const Event& pe = pred[p];
    const bool matched = p2g.count(p) > 0;
    const Event* ge = matched ? &gold[p2g[p]] : nullptr;
    bump(dc.trigger, {pe.event_type, ""}, matched ? 0 : 1);
    bump(dc.event, {pe.event_type, ""}, ge && ge->arguments == pe.arguments ? 0 : 1);
    for (const auto& [name, sub] : pe.arguments) {
      const bool hit = ge && ge->arguments.count(name) && ge->arguments.at(name) == sub;
      bump(dc.argument, {pe.event_type, name}, hit ? 0 : 1);
    }
  }
  return dc;
}

DocumentCounts exhaustive_counts(const std::vector<Event>& gold, const std::vector<Event>& pred) {
  auto equivalent = [&](std::size_t g, std::size_t p) {
    const auto& a = gold[g];
    const auto& b = pred[p];
    return a.event_type == b.event_type && std::max(a.trigger.start, b.trigger.start) <
                                               std::min(a.trigger.end, b.trigger.end);
  };
  std::vector<std::pair<std::size_t, std::size_t>> current, best_pairs;
  std::tuple<std::size_t, std::size_t, std::size_t> best{0, 0, 0};
  bool have_best = false;
  std::vector<bool> used(pred.size(), false);
  std::function<void(std::size_t)> rec = [&](std::size_t g) {
    if (g == gold.size()) {
      const DocumentCounts dc = counts_for_matching(gold, pred, current);
      const auto key = std::make_tuple(total(dc.trigger).tp, total(dc.argument).tp, total(dc.event).tp);
      if (!have_best || key > best) {
        best = key;
        best_pairs = current;
        have_best = true;
      }
      return;
    }
    rec(g + 1);
    for (std::size_t p = 0; p < pred.size(); ++p) {
      if (used[p] || !equivalent(g, p)) continue;
      used[p] = true;
      current.emplace_back(g, p);
      rec(g + 1);
      current.pop_back();
      used[p] = false;
    }
  };
  rec(0);
  return counts_for_matching(gold, pred, best_pairs);
}

CountMap normalized(const CountMap& m) {
  CountMap out;
  for (const auto& [k, v] : m) {
    if (v.has_support()) out[k] = v;
  }
  return out;
}

std::size_t levenshtein(const std::u32string& a, const std::u32string& b) {
  std::vector<std::vector<std::size_t>> d(a.size() + 1, std::vector<std::size_t>(b.size() + 1));
  for (std::size_t i = 0; i <= a.size(); ++i) d[i][0] = i;
  for (std::size_t j = 0; j <= b.size(); ++j) d[0][j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    }
  }
  return d[a.size()][b.size()];
}

double f1(const Counts& c) {
  const double denom = 2.0 * static_cast<double>(c.tp) + static_cast<double>(c.fp) + static_cast<double>(c.fn);
  return denom == 0 ? 0.0 : 2.0 * static_cast<double>(c.tp) / denom;
}

}  // namespace oracle

}  // namespace sdoh::testing
