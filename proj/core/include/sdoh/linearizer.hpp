// SPDX-License-Identifier: Apache-2.0
#pragma once

// Single-step text2event format:
//
//   Output ::= "NONE" | Event (" AND " Event)*
//   Event  ::= Type " [" Trigger "]" (" | " Arg " = " Subtype " [" Trigger "]")*
//
// The trigger text is repeated in every argument clause. Events are written
// in trigger order; required arguments precede optional ones, each group in
// schema order.

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sdoh/corpus.hpp"

namespace sdoh {

class Schema;

enum class InvalidReason { Format, SpanNotFound, UnknownType, UnknownSubtype };
std::string_view to_string(InvalidReason r);

/// Whether a record concerns the trigger part or an argument clause.
enum class ClauseLevel { Trigger, Argument };
std::string_view to_string(ClauseLevel l);

struct InvalidRecord {
  std::string fragment;
  InvalidReason reason;
  ClauseLevel level = ClauseLevel::Trigger;
  bool operator==(const InvalidRecord&) const = default;
};

struct ParseOutcome {
  std::vector<Event> events;
  std::vector<InvalidRecord> invalid_records;
  std::size_t repaired_count = 0;
  std::size_t trigger_fragments = 0;  // denominators for invalid_rate
  std::size_t argument_clauses = 0;
};

struct RepairPolicy {
  bool enabled = false;
  double max_norm_dist = 0.2;
};

inline constexpr std::string_view kNoEvents = "NONE";

/// Throws ValidationError for trigger text containing " AND " or "]".
std::string serialize_events(const std::vector<Event>& events, const Schema& schema);

/// Never throws; everything that cannot become a valid event is recorded.
ParseOutcome parse_events(std::string_view output, std::string_view doc_text, const Schema& schema,
                          const RepairPolicy& repair = {});

/// Edit distance over code points.
std::size_t levenshtein(std::u32string_view a, std::u32string_view b);

/// Maps a claimed span onto real document text. Stage one looks for a
/// match after case folding, whitespace collapsing and stripping edge
/// punctuation; stage two takes the closest substring by normalized edit
/// distance among candidates within +/-50% of the claimed length.
/// Candidates that do not cut through a word are preferred in both stages.
std::optional<TextSpan> repair_span(std::string_view claimed, std::string_view doc_text,
                                    double max_norm_dist = 0.2);

/// Grounds claimed trigger strings to document offsets. Each (key, start)
/// position is handed out once, so repeated strings walk left to right
/// through their occurrences.
class SpanGrounder {
 public:
  explicit SpanGrounder(std::string_view doc_text);

  struct Result {
    TextSpan span;
    bool repaired = false;
  };
  std::optional<Result> ground(std::string_view claimed, const std::string& key, const RepairPolicy& repair);

 private:
  std::string_view doc_;
  std::u32string cps_;
  std::set<std::pair<std::string, std::size_t>> claimed_;
};

struct InvalidRates {
  std::size_t trigger_total = 0;
  std::size_t argument_total = 0;
  std::map<InvalidReason, std::size_t> trigger_invalid;
  std::map<InvalidReason, std::size_t> argument_invalid;

  double trigger_rate() const;
  double argument_rate() const;
  double overall_rate() const;
  double rate(ClauseLevel level, InvalidReason reason) const;
};

InvalidRates invalid_rate(const std::vector<ParseOutcome>& outcomes);

}  // namespace sdoh
