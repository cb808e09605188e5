// SPDX-License-Identifier: Apache-2.0
#pragma once

// Trigger, argument and event-level scoring. Triggers are equivalent when
// they share an event type and at least one character; arguments are
// equivalent when they sit on matched triggers with the same name and
// subtype; an event is correct only when its whole argument map matches.

#include <compare>
#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "sdoh/corpus.hpp"

namespace sdoh {

class Schema;

enum class Level { Trigger, Argument, Event };
std::string_view to_string(Level level);

struct Counts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;

  Counts& operator+=(const Counts& o) {
    tp += o.tp, fp += o.fp, fn += o.fn;
    return *this;
  }
  friend Counts operator+(Counts a, const Counts& b) { return a += b; }
  bool operator==(const Counts&) const = default;
  bool has_support() const { return tp + fp + fn > 0; }
};

struct Prf {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  bool operator==(const Prf&) const = default;
};

/// Zero denominators yield 0.
Prf prf(const Counts& c);

/// Event type, plus the argument name at the argument level.
struct ScoreKey {
  std::string event_type;
  std::string argument;

  std::string name() const { return argument.empty() ? event_type : event_type + "." + argument; }
  auto operator<=>(const ScoreKey&) const = default;
};

using CountMap = std::map<ScoreKey, Counts>;

struct DocumentCounts {
  CountMap trigger;
  CountMap argument;
  CountMap event;

  DocumentCounts& operator+=(const DocumentCounts& o);
  const CountMap& level(Level l) const;
  bool operator==(const DocumentCounts&) const = default;
};

Counts total(const CountMap& m);

struct TriggerMatch {
  std::size_t gold_index = 0;
  std::size_t pred_index = 0;
  std::size_t overlap_len = 0;
  bool operator==(const TriggerMatch&) const = default;
};

/// One-to-one greedy matching over equivalent pairs, taken in order of
/// (overlap desc, gold start asc, pred start asc).
std::vector<TriggerMatch> match_triggers(const std::vector<Event>& gold, const std::vector<Event>& pred);

/// Counts for one document under a given matching.
DocumentCounts count_matched(const std::vector<Event>& gold, const std::vector<Event>& pred,
                             const std::vector<TriggerMatch>& matches);
DocumentCounts score_document(const std::vector<Event>& gold, const std::vector<Event>& pred);

/// Counts per gold document, in gold order. Gold documents absent from the
/// predictions score as all-FN. Throws ValidationError if the predictions
/// hold a document the gold corpus does not.
std::vector<DocumentCounts> score_per_document(const Corpus& gold, const Corpus& pred);
DocumentCounts score_corpus(const Corpus& gold, const Corpus& pred);

std::map<std::string, Counts> score_triggers(const Corpus& gold, const Corpus& pred);
CountMap score_arguments(const Corpus& gold, const Corpus& pred);
std::map<std::string, Counts> score_events(const Corpus& gold, const Corpus& pred);

struct KeyRow {
  ScoreKey key;
  Counts counts;
  Prf scores;
};

struct LevelReport {
  std::vector<KeyRow> keys;    // every schema key plus any extra key seen, sorted by name
  std::vector<KeyRow> groups;  // report_group rows, schema order
  Counts micro_counts;
  Prf micro;
  Prf macro;                  // mean over keys with support
  std::size_t macro_keys = 0;
};

struct ScoreReport {
  LevelReport trigger;
  LevelReport argument;
  LevelReport event;
  /// Trigger and argument counts pooled.
  Counts combined_counts;
  Prf combined;

  const LevelReport& level(Level l) const;
};

ScoreReport aggregate(const DocumentCounts& counts, const Schema& schema);
ScoreReport score(const Corpus& gold, const Corpus& pred, const Schema& schema);

/// JSON with levels in trigger, argument, event order and keys sorted by name.
std::string report_to_json(const ScoreReport& report);

/// Aligned table: one row per report group per level, then micro and macro
/// rows. Percentages with one decimal.
std::string render_table(const ScoreReport& report, const std::vector<Level>& levels);

/// Treats `a` as gold and `b` as predictions. Throws ValidationError when
/// the document sets differ.
ScoreReport compute_iaa(const Corpus& a, const Corpus& b, const Schema& schema);

struct IaaSummary {
  double trigger = 0.0;   // micro F1, percent
  double argument = 0.0;
  double combined = 0.0;
};
IaaSummary iaa_summary(const ScoreReport& report);
/// "IAA micro F1 (%): triggers 85.1, arguments 80.0, triggers+arguments 81.9"
std::string render_iaa_summary(const IaaSummary& s);

/// Percentage with one decimal, as printed in reports.
std::string format_percent(double fraction);
/// Difference of two one-decimal percentages, rounded to one decimal.
double f1_drop(double from_percent, double to_percent);

}  // namespace sdoh
