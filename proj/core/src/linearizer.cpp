// SPDX-License-Identifier: Apache-2.0
#include "sdoh/linearizer.hpp"

#include <algorithm>
#include <tuple>

#include "sdoh/errors.hpp"
#include "sdoh/schema.hpp"
#include "sdoh/text.hpp"

namespace sdoh {
namespace {

constexpr std::string_view kAnd = " AND ";
constexpr std::string_view kClause = " | ";
constexpr std::string_view kEquals = " = ";
constexpr std::string_view kOpen = " [";

std::vector<std::string_view> split_on(std::string_view s, std::string_view sep) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t next = s.find(sep, pos);
    if (next == std::string_view::npos) {
      out.push_back(s.substr(pos));
      return out;
    }
    out.push_back(s.substr(pos, next - pos));
    pos = next + sep.size();
  }
}

struct Clause {
  std::string_view arg;
  std::string_view subtype;
  std::string_view trigger;
};

std::optional<Clause> parse_clause(std::string_view body) {
  const auto eq = body.find(kEquals);
  if (eq == std::string_view::npos) return std::nullopt;
  const std::string_view rest = body.substr(eq + kEquals.size());
  const auto open = rest.find(kOpen);
  if (open == std::string_view::npos) return std::nullopt;
  Clause c{text::trim(body.substr(0, eq)), text::trim(rest.substr(0, open)), rest.substr(open + kOpen.size())};
  if (c.arg.empty() || c.subtype.empty()) return std::nullopt;
  return c;
}

void parse_fragment(std::string_view frag, SpanGrounder& grounder, const Schema& schema, const RepairPolicy& repair,
                    ParseOutcome& out) {
  auto invalid = [&](std::string_view f, InvalidReason r, ClauseLevel l = ClauseLevel::Trigger) {
    out.invalid_records.push_back({std::string(f), r, l});
  };
  ++out.trigger_fragments;

  const auto open = frag.find(kOpen);
  if (open == std::string_view::npos) return invalid(frag, InvalidReason::Format);
  const auto close = frag.find(']', open);
  if (close == std::string_view::npos) return invalid(frag, InvalidReason::Format);
  const std::string type(text::trim(frag.substr(0, open)));
  const std::string_view trigger = frag.substr(open + kOpen.size(), close - open - kOpen.size());
  if (type.empty() || trigger.empty()) return invalid(frag, InvalidReason::Format);
  const EventTypeDef* def = schema.find(type);

  Event event;
  event.event_type = type;
  bool head_ok = true;
  std::string_view rest = frag.substr(close + 1);
  while (!rest.empty()) {
    ++out.argument_clauses;
    if (rest.substr(0, kClause.size()) != kClause) {
      invalid(rest, InvalidReason::Format, ClauseLevel::Argument);
      break;
    }
    const auto end = rest.find(']');
    if (end == std::string_view::npos) {
      invalid(rest, InvalidReason::Format, ClauseLevel::Argument);
      break;
    }
    const std::string_view body = rest.substr(kClause.size(), end - kClause.size());
    const std::string_view whole = rest.substr(0, end + 1);
    rest = rest.substr(end + 1);

    auto clause = parse_clause(body);
    if (!clause || clause->trigger != trigger) {
      invalid(whole, InvalidReason::Format, ClauseLevel::Argument);
      continue;
    }
    if (def == nullptr) continue;  // reported once below
    const ArgumentDef* arg = def->find_argument(clause->arg);
    if (arg == nullptr) {
      invalid(whole, InvalidReason::UnknownType, ClauseLevel::Argument);
    } else if (!arg->has_subtype(clause->subtype)) {
      invalid(whole, InvalidReason::UnknownSubtype, ClauseLevel::Argument);
    } else if (!event.arguments.emplace(std::string(clause->arg), std::string(clause->subtype)).second) {
      invalid(whole, InvalidReason::Format, ClauseLevel::Argument);
    }
  }

  if (def == nullptr) return invalid(frag, InvalidReason::UnknownType);
  for (const auto& a : def->arguments) {
    if (a.required && event.arguments.find(a.name) == event.arguments.end()) head_ok = false;
  }
  if (!head_ok) return invalid(frag, InvalidReason::Format);

  auto grounded = grounder.ground(trigger, type, repair);
  if (!grounded) return invalid(frag, InvalidReason::SpanNotFound);
  if (grounded->repaired) ++out.repaired_count;
  event.trigger = std::move(grounded->span);
  out.events.push_back(std::move(event));
}

}  // namespace

std::string_view to_string(InvalidReason r) {
  switch (r) {
    case InvalidReason::Format: return "format";
    case InvalidReason::SpanNotFound: return "span-not-found";
    case InvalidReason::UnknownType: return "unknown-type";
    case InvalidReason::UnknownSubtype: return "unknown-subtype";
  }
  return "format";
}

std::string_view to_string(ClauseLevel l) { return l == ClauseLevel::Trigger ? "trigger" : "argument"; }

std::string serialize_events(const std::vector<Event>& events, const Schema& schema) {
  if (events.empty()) return std::string(kNoEvents);
  std::vector<const Event*> order;
  for (const auto& e : events) order.push_back(&e);
  std::stable_sort(order.begin(), order.end(), [&](const Event* a, const Event* b) {
    return std::make_tuple(a->trigger.start, a->trigger.end, schema.order_of(a->event_type), a->event_type) <
           std::make_tuple(b->trigger.start, b->trigger.end, schema.order_of(b->event_type), b->event_type);
  });

  std::string out;
  for (const Event* e : order) {
    const std::string& t = e->trigger.text;
    if (t.empty()) throw ValidationError("cannot serialize an event with an empty trigger");
    if (t.find(kAnd) != std::string::npos || t.find(']') != std::string::npos) {
      throw ValidationError("trigger text of a " + e->event_type + " event contains a reserved token");
    }
    const EventTypeDef* def = schema.find(e->event_type);
    if (def == nullptr) throw ValidationError("cannot serialize unknown event type " + e->event_type);
    for (const auto& [name, sub] : e->arguments) {
      if (def->find_argument(name) == nullptr) {
        throw ValidationError("cannot serialize unknown argument " + e->event_type + "." + name);
      }
    }
    if (!out.empty()) out += kAnd;
    out += e->event_type;
    out += kOpen;
    out += t;
    out += ']';
    for (bool required : {true, false}) {
      for (const auto& a : def->arguments) {
        if (a.required != required) continue;
        auto it = e->arguments.find(a.name);
        if (it == e->arguments.end()) continue;
        out += kClause;
        out += a.name;
        out += kEquals;
        out += it->second;
        out += kOpen;
        out += t;
        out += ']';
      }
    }
  }
  return out;
}

ParseOutcome parse_events(std::string_view output, std::string_view doc_text, const Schema& schema,
                          const RepairPolicy& repair) {
  ParseOutcome out;
  const std::string_view trimmed = text::trim(output);
  if (trimmed == kNoEvents) return out;
  SpanGrounder grounder(doc_text);
  if (trimmed.empty()) {
    ++out.trigger_fragments;
    out.invalid_records.push_back({"", InvalidReason::Format, ClauseLevel::Trigger});
    return out;
  }
  for (std::string_view frag : split_on(trimmed, kAnd)) {
    parse_fragment(text::trim(frag), grounder, schema, repair, out);
  }
  return out;
}

double InvalidRates::trigger_rate() const {
  std::size_t n = 0;
  for (const auto& [r, c] : trigger_invalid) n += c;
  return trigger_total ? static_cast<double>(n) / static_cast<double>(trigger_total) : 0.0;
}

double InvalidRates::argument_rate() const {
  std::size_t n = 0;
  for (const auto& [r, c] : argument_invalid) n += c;
  return argument_total ? static_cast<double>(n) / static_cast<double>(argument_total) : 0.0;
}

double InvalidRates::overall_rate() const {
  std::size_t n = 0;
  for (const auto& [r, c] : trigger_invalid) n += c;
  for (const auto& [r, c] : argument_invalid) n += c;
  const std::size_t d = trigger_total + argument_total;
  return d ? static_cast<double>(n) / static_cast<double>(d) : 0.0;
}

double InvalidRates::rate(ClauseLevel level, InvalidReason reason) const {
  const auto& m = level == ClauseLevel::Trigger ? trigger_invalid : argument_invalid;
  const std::size_t d = level == ClauseLevel::Trigger ? trigger_total : argument_total;
  auto it = m.find(reason);
  if (d == 0 || it == m.end()) return 0.0;
  return static_cast<double>(it->second) / static_cast<double>(d);
}

InvalidRates invalid_rate(const std::vector<ParseOutcome>& outcomes) {
  InvalidRates r;
  for (const auto& o : outcomes) {
    r.trigger_total += o.trigger_fragments;
    r.argument_total += o.argument_clauses;
    for (const auto& rec : o.invalid_records) {
      auto& m = rec.level == ClauseLevel::Trigger ? r.trigger_invalid : r.argument_invalid;
      ++m[rec.reason];
    }
  }
  return r;
}

}  // namespace sdoh
