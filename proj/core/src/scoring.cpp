// SPDX-License-Identifier: Apache-2.0
#include "sdoh/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <tuple>

#include <nlohmann/json.hpp>

#include "sdoh/errors.hpp"
#include "sdoh/schema.hpp"

namespace sdoh {
namespace {

using ojson = nlohmann::ordered_json;

void add(CountMap& m, const ScoreKey& k, const Counts& c) { m[k] += c; }

LevelReport build_level(const CountMap& counts, const std::vector<ScoreKey>& schema_keys, const Schema& schema) {
  std::map<std::string, KeyRow> by_name;
  for (const auto& k : schema_keys) by_name.emplace(k.name(), KeyRow{k, {}, {}});
  for (const auto& [k, c] : counts) {
    auto [it, inserted] = by_name.emplace(k.name(), KeyRow{k, {}, {}});
    it->second.counts += c;
  }

  LevelReport level;
  double sum_p = 0, sum_r = 0, sum_f = 0;
  for (auto& [name, row] : by_name) {
    row.scores = prf(row.counts);
    level.micro_counts += row.counts;
    if (row.counts.has_support()) {
      sum_p += row.scores.precision;
      sum_r += row.scores.recall;
      sum_f += row.scores.f1;
      ++level.macro_keys;
    }
    level.keys.push_back(row);
  }
  level.micro = prf(level.micro_counts);
  if (level.macro_keys > 0) {
    const double n = static_cast<double>(level.macro_keys);
    level.macro = {sum_p / n, sum_r / n, sum_f / n};
  }

  // Group rows: schema groups first, then groups of unknown event types.
  std::vector<ScoreKey> group_order;
  std::map<ScoreKey, Counts> group_counts;
  auto group_key = [&](const ScoreKey& k) {
    const EventTypeDef* t = schema.find(k.event_type);
    return ScoreKey{t ? t->report_group : k.event_type, k.argument};
  };
  for (const auto& k : schema_keys) {
    const ScoreKey g = group_key(k);
    if (group_counts.emplace(g, Counts{}).second) group_order.push_back(g);
  }
  for (const auto& row : level.keys) {
    const ScoreKey g = group_key(row.key);
    if (group_counts.emplace(g, Counts{}).second) group_order.push_back(g);
    group_counts[g] += row.counts;
  }
  for (const auto& g : group_order) level.groups.push_back({g, group_counts[g], prf(group_counts[g])});
  return level;
}

ojson row_json(const Counts& c, const Prf& p) {
  ojson j;
  j["tp"] = c.tp;
  j["fp"] = c.fp;
  j["fn"] = c.fn;
  j["precision"] = p.precision;
  j["recall"] = p.recall;
  j["f1"] = p.f1;
  return j;
}

ojson level_json(const LevelReport& l) {
  ojson j;
  j["keys"] = ojson::object();
  for (const auto& r : l.keys) j["keys"][r.key.name()] = row_json(r.counts, r.scores);
  std::vector<const KeyRow*> groups;
  for (const auto& r : l.groups) groups.push_back(&r);
  std::sort(groups.begin(), groups.end(), [](auto* a, auto* b) { return a->key.name() < b->key.name(); });
  j["groups"] = ojson::object();
  for (const auto* r : groups) j["groups"][r->key.name()] = row_json(r->counts, r->scores);
  j["micro"] = row_json(l.micro_counts, l.micro);
  j["macro"] = {{"precision", l.macro.precision}, {"recall", l.macro.recall}, {"f1", l.macro.f1},
                {"keys", l.macro_keys}};
  return j;
}

std::string pad(std::string s, std::size_t width, bool right) {
  if (s.size() >= width) return s;
  const std::string fill(width - s.size(), ' ');
  return right ? fill + s : s + fill;
}

}  // namespace

std::string_view to_string(Level level) {
  switch (level) {
    case Level::Trigger: return "trigger";
    case Level::Argument: return "argument";
    case Level::Event: return "event";
  }
  return "trigger";
}

Prf prf(const Counts& c) {
  Prf r;
  if (c.tp + c.fp > 0) r.precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
  if (c.tp + c.fn > 0) r.recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  if (r.precision + r.recall > 0) r.f1 = 2 * r.precision * r.recall / (r.precision + r.recall);
  return r;
}

DocumentCounts& DocumentCounts::operator+=(const DocumentCounts& o) {
  for (const auto& [k, c] : o.trigger) trigger[k] += c;
  for (const auto& [k, c] : o.argument) argument[k] += c;
  for (const auto& [k, c] : o.event) event[k] += c;
  return *this;
}

const CountMap& DocumentCounts::level(Level l) const {
  switch (l) {
    case Level::Trigger: return trigger;
    case Level::Argument: return argument;
    case Level::Event: return event;
  }
  return trigger;
}

Counts total(const CountMap& m) {
  Counts c;
  for (const auto& [k, v] : m) c += v;
  return c;
}

std::vector<TriggerMatch> match_triggers(const std::vector<Event>& gold, const std::vector<Event>& pred) {
  struct Candidate {
    std::size_t g, p, ov;
  };
  std::vector<Candidate> cands;
  for (std::size_t g = 0; g < gold.size(); ++g) {
    for (std::size_t p = 0; p < pred.size(); ++p) {
      if (gold[g].event_type != pred[p].event_type) continue;
      const std::size_t ov = overlap(gold[g].trigger, pred[p].trigger);
      if (ov > 0) cands.push_back({g, p, ov});
    }
  }
  std::sort(cands.begin(), cands.end(), [&](const Candidate& a, const Candidate& b) {
    return std::make_tuple(b.ov, gold[a.g].trigger.start, pred[a.p].trigger.start, a.g, a.p) <
           std::make_tuple(a.ov, gold[b.g].trigger.start, pred[b.p].trigger.start, b.g, b.p);
  });
  std::vector<bool> gold_used(gold.size()), pred_used(pred.size());
  std::vector<TriggerMatch> out;
  for (const auto& c : cands) {
    if (gold_used[c.g] || pred_used[c.p]) continue;
    gold_used[c.g] = pred_used[c.p] = true;
    out.push_back({c.g, c.p, c.ov});
  }
  return out;
}

DocumentCounts count_matched(const std::vector<Event>& gold, const std::vector<Event>& pred,
                             const std::vector<TriggerMatch>& matches) {
  DocumentCounts dc;
  std::vector<const Event*> gold_match(gold.size(), nullptr);
  std::vector<const Event*> pred_match(pred.size(), nullptr);
  for (const auto& m : matches) {
    gold_match[m.gold_index] = &pred[m.pred_index];
    pred_match[m.pred_index] = &gold[m.gold_index];
  }

  for (std::size_t p = 0; p < pred.size(); ++p) {
    const Event& e = pred[p];
    const ScoreKey tk{e.event_type, ""};
    const Event* g = pred_match[p];
    add(dc.trigger, tk, g ? Counts{1, 0, 0} : Counts{0, 1, 0});
    const bool exact = g != nullptr && g->arguments == e.arguments;
    add(dc.event, tk, exact ? Counts{1, 0, 0} : Counts{0, 1, 0});
    for (const auto& [name, sub] : e.arguments) {
      bool hit = false;
      if (g) {
        auto it = g->arguments.find(name);
        hit = it != g->arguments.end() && it->second == sub;
      }
      add(dc.argument, {e.event_type, name}, hit ? Counts{1, 0, 0} : Counts{0, 1, 0});
    }
  }
  for (std::size_t gi = 0; gi < gold.size(); ++gi) {
    const Event& e = gold[gi];
    const ScoreKey tk{e.event_type, ""};
    const Event* p = gold_match[gi];
    if (!p) add(dc.trigger, tk, {0, 0, 1});
    if (!(p && p->arguments == e.arguments)) add(dc.event, tk, {0, 0, 1});
    for (const auto& [name, sub] : e.arguments) {
      bool hit = false;
      if (p) {
        auto it = p->arguments.find(name);
        hit = it != p->arguments.end() && it->second == sub;
      }
      if (!hit) add(dc.argument, {e.event_type, name}, {0, 0, 1});
    }
  }
  return dc;
}

DocumentCounts score_document(const std::vector<Event>& gold, const std::vector<Event>& pred) {
  return count_matched(gold, pred, match_triggers(gold, pred));
}

std::vector<DocumentCounts> score_per_document(const Corpus& gold, const Corpus& pred) {
  std::map<std::string_view, const AnnotatedDocument*> pred_by_id;
  for (const auto& d : pred.docs) pred_by_id.emplace(d.id(), &d);
  std::set<std::string_view> gold_ids;
  for (const auto& d : gold.docs) gold_ids.insert(d.id());
  for (const auto& [id, d] : pred_by_id) {
    if (gold_ids.find(id) == gold_ids.end()) {
      throw ValidationError("prediction for unknown document " + std::string(id));
    }
  }
  static const std::vector<Event> kNone;
  std::vector<DocumentCounts> out;
  out.reserve(gold.docs.size());
  for (const auto& g : gold.docs) {
    auto it = pred_by_id.find(g.id());
    out.push_back(score_document(g.events, it == pred_by_id.end() ? kNone : it->second->events));
  }
  return out;
}

DocumentCounts score_corpus(const Corpus& gold, const Corpus& pred) {
  DocumentCounts sum;
  for (const auto& dc : score_per_document(gold, pred)) sum += dc;
  return sum;
}

std::map<std::string, Counts> score_triggers(const Corpus& gold, const Corpus& pred) {
  std::map<std::string, Counts> out;
  for (const auto& [k, c] : score_corpus(gold, pred).trigger) out[k.event_type] += c;
  return out;
}

CountMap score_arguments(const Corpus& gold, const Corpus& pred) { return score_corpus(gold, pred).argument; }

std::map<std::string, Counts> score_events(const Corpus& gold, const Corpus& pred) {
  std::map<std::string, Counts> out;
  for (const auto& [k, c] : score_corpus(gold, pred).event) out[k.event_type] += c;
  return out;
}

const LevelReport& ScoreReport::level(Level l) const {
  switch (l) {
    case Level::Trigger: return trigger;
    case Level::Argument: return argument;
    case Level::Event: return event;
  }
  return trigger;
}

ScoreReport aggregate(const DocumentCounts& counts, const Schema& schema) {
  std::vector<ScoreKey> type_keys, arg_keys;
  for (const auto& t : schema.event_types()) {
    type_keys.push_back({t.name, ""});
    for (const auto& a : t.arguments) arg_keys.push_back({t.name, a.name});
  }
  ScoreReport r;
  r.trigger = build_level(counts.trigger, type_keys, schema);
  r.argument = build_level(counts.argument, arg_keys, schema);
  r.event = build_level(counts.event, type_keys, schema);
  r.combined_counts = r.trigger.micro_counts + r.argument.micro_counts;
  r.combined = prf(r.combined_counts);
  return r;
}

ScoreReport score(const Corpus& gold, const Corpus& pred, const Schema& schema) {
  return aggregate(score_corpus(gold, pred), schema);
}

std::string report_to_json(const ScoreReport& report) {
  ojson j;
  j["trigger"] = level_json(report.trigger);
  j["argument"] = level_json(report.argument);
  j["event"] = level_json(report.event);
  j["combined_micro"] = row_json(report.combined_counts, report.combined);
  return j.dump(2) + "\n";
}

std::string format_percent(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", fraction * 100.0);
  return buf;
}

std::string render_table(const ScoreReport& report, const std::vector<Level>& levels) {
  std::size_t name_w = 5;
  for (Level l : levels) {
    for (const auto& g : report.level(l).groups) name_w = std::max(name_w, g.key.name().size());
  }
  auto line = [&](std::string_view level, const std::string& row, const std::string& tp, const std::string& fp,
                  const std::string& fn, const Prf* p) {
    std::string s = pad(std::string(level), 9, false) + pad(row, name_w + 2, false) + pad(tp, 6, true) +
                    pad(fp, 6, true) + pad(fn, 6, true);
    if (p) {
      s += pad(format_percent(p->precision), 8, true) + pad(format_percent(p->recall), 8, true) +
           pad(format_percent(p->f1), 8, true);
    } else {
      s += pad("P", 8, true) + pad("R", 8, true) + pad("F1", 8, true);
    }
    return s + "\n";
  };
  std::string out = line("level", "row", "TP", "FP", "FN", nullptr);
  for (Level l : levels) {
    const LevelReport& lr = report.level(l);
    for (const auto& g : lr.groups) {
      out += line(to_string(l), g.key.name(), std::to_string(g.counts.tp), std::to_string(g.counts.fp),
                  std::to_string(g.counts.fn), &g.scores);
    }
    out += line(to_string(l), "micro", std::to_string(lr.micro_counts.tp), std::to_string(lr.micro_counts.fp),
                std::to_string(lr.micro_counts.fn), &lr.micro);
    out += line(to_string(l), "macro", "", "", "", &lr.macro);
  }
  return out;
}

ScoreReport compute_iaa(const Corpus& a, const Corpus& b, const Schema& schema) {
  std::set<std::string_view> ia, ib;
  for (const auto& d : a.docs) ia.insert(d.id());
  for (const auto& d : b.docs) ib.insert(d.id());
  if (ia != ib) throw ValidationError("annotation sets cover different documents");
  return score(a, b, schema);
}

IaaSummary iaa_summary(const ScoreReport& r) {
  return {r.trigger.micro.f1 * 100.0, r.argument.micro.f1 * 100.0, r.combined.f1 * 100.0};
}

std::string render_iaa_summary(const IaaSummary& s) {
  return "IAA micro F1 (%): triggers " + format_percent(s.trigger / 100.0) + ", arguments " +
         format_percent(s.argument / 100.0) + ", triggers+arguments " + format_percent(s.combined / 100.0);
}

double f1_drop(double from_percent, double to_percent) {
  return std::round((from_percent - to_percent) * 10.0) / 10.0;
}

}  // namespace sdoh
