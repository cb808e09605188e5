// SPDX-License-Identifier: Apache-2.0
#include <algorithm>

#include "sdoh/errors.hpp"
#include "sdoh/qa_pipeline.hpp"
#include "sdoh/random.hpp"
#include "sdoh/schema.hpp"
#include "sdoh/text.hpp"

namespace sdoh {

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::Event: return "event";
    case Strategy::TwoStepBase: return "2sqa-base";
    case Strategy::TwoStepGuide: return "2sqa-guide";
    case Strategy::TwoStepGuide3Shot: return "2sqa-guide3shot";
  }
  return "event";
}

std::optional<Strategy> parse_strategy(std::string_view s) {
  for (Strategy v : {Strategy::Event, Strategy::TwoStepBase, Strategy::TwoStepGuide, Strategy::TwoStepGuide3Shot}) {
    if (to_string(v) == s) return v;
  }
  return std::nullopt;
}

PromptMode prompt_mode(Strategy s) {
  switch (s) {
    case Strategy::TwoStepGuide: return PromptMode::Guide;
    case Strategy::TwoStepGuide3Shot: return PromptMode::Guide3Shot;
    default: return PromptMode::Base;
  }
}

std::string_view to_string(Purpose p) {
  switch (p) {
    case Purpose::EventExtraction: return "event-extraction";
    case Purpose::TriggerStep: return "trigger-step";
    case Purpose::ArgumentStep: return "argument-step";
  }
  return "event-extraction";
}

namespace {

std::string join(const std::vector<std::string>& items, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += sep;
    out += items[i];
  }
  return out;
}

}  // namespace

std::string event_instruction(const Schema& schema) {
  std::string s =
      "Extract social determinants of health events from the clinical note.\n"
      "Event types and their arguments:\n";
  for (const auto& t : schema.event_types()) {
    s += "- " + t.name + ":";
    if (t.arguments.empty()) s += " no arguments";
    for (std::size_t i = 0; i < t.arguments.size(); ++i) {
      const auto& a = t.arguments[i];
      s += (i ? "; " : " ") + a.name + (a.required ? " (required) " : " (optional) ") + "{" + join(a.subtypes, ", ") +
           "}";
    }
    s += "\n";
  }
  s +=
      "Write each event as: Type [trigger] | Argument = subtype [trigger]\n"
      "The trigger is copied exactly from the note and repeated in every argument clause.\n"
      "Separate events with \" AND \". If there are no events, answer NONE.";
  return s;
}

namespace {

std::string trigger_instruction(const std::string& event_type) {
  return "List every " + event_type +
         " trigger in the clinical note. Copy each trigger exactly as written, one per line. "
         "If there is none, answer NONE.";
}

std::string argument_instruction() {
  return "Answer the multiple-choice question about the marked trigger in the clinical note. "
         "Reply with exactly one of the listed options.";
}

std::string with_guide(const std::string& instruction, const std::optional<std::string>& guide) {
  if (!guide) return instruction;
  return "Guideline:\n" + *guide + "\n\n" + instruction;
}

void check_mode(PromptMode mode, const std::optional<std::string>& guide_text, const FewShotSet* fewshot) {
  if (mode == PromptMode::Base) return;
  if (!guide_text || guide_text->empty()) throw ConfigError("guide text is required for guide prompts");
  if (mode == PromptMode::Guide3Shot && (fewshot == nullptr || fewshot->examples.size() != 3)) {
    throw ConfigError("three in-context examples are required for guide+3shot prompts");
  }
}

void add_shots(PromptBundle& b, PromptMode mode, const FewShotSet* fewshot) {
  if (mode != PromptMode::Guide3Shot) return;
  for (const auto& ex : fewshot->examples) {
    b.messages.push_back({Role::User, ex.question});
    b.messages.push_back({Role::Assistant, ex.answer});
  }
}

std::string strip_list_marker(std::string_view s) {
  if (s.size() >= 2 && (s[0] == '-' || s[0] == '*') && s[1] == ' ') s.remove_prefix(2);
  s = text::trim(s);
  if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') || (s.front() == '\'' && s.back() == '\''))) {
    s = s.substr(1, s.size() - 2);
  }
  return std::string(s);
}

std::string normalize_answer(std::string_view s) {
  std::string out;
  bool space = false;
  for (char32_t c : text::fold(text::decode_lenient(text::trim(s)))) {
    if (text::is_space(c)) {
      space = true;
      continue;
    }
    if (space && !out.empty()) out += ' ';
    space = false;
    out += text::encode(c);
  }
  return out;
}

std::string_view strip_quotes(std::string_view s) {
  while (s.size() >= 2) {
    const char a = s.front();
    const char b = s.back();
    if ((a == '"' && b == '"') || (a == '\'' && b == '\'') || (a == '`' && b == '`') || (a == '(' && b == ')') ||
        (a == '[' && b == ']')) {
      s = text::trim(s.substr(1, s.size() - 2));
    } else {
      break;
    }
  }
  return s;
}

}  // namespace

std::string trigger_answer(const std::vector<Event>& events, const std::string& event_type) {
  std::vector<const Event*> hits;
  for (const auto& e : events) {
    if (e.event_type == event_type) hits.push_back(&e);
  }
  if (hits.empty()) return std::string(kNoEvents);
  std::stable_sort(hits.begin(), hits.end(), [](const Event* a, const Event* b) {
    return std::pair(a->trigger.start, a->trigger.end) < std::pair(b->trigger.start, b->trigger.end);
  });
  std::string out;
  for (const Event* e : hits) {
    if (!out.empty()) out += '\n';
    out += e->trigger.text;
  }
  return out;
}

std::string trigger_question(const std::string& text) { return "Note:\n" + text; }

std::string argument_question(const std::string& text, const TextSpan& trigger, const std::string& event_type,
                              const std::string& argument, const std::vector<std::string>& options) {
  const text::CodepointIndex idx(text);
  if (trigger.start > trigger.end || trigger.end > idx.size()) {
    throw ValidationError("trigger span lies outside the note");
  }
  std::string marked;
  marked += idx.slice(0, trigger.start);
  marked += "<<";
  marked += idx.slice(trigger.start, trigger.end);
  marked += ">>";
  marked += idx.slice(trigger.end, idx.size());
  return "Note:\n" + marked + "\n\nEvent: " + event_type + "\nTrigger: " + trigger.text + "\nQuestion: What is the " +
         argument + " of this " + event_type + " event?\nOptions: " + join(options, ", ");
}

std::vector<std::string> argument_options(const Schema& schema, const std::string& event_type,
                                          const std::string& argument) {
  const EventTypeDef* def = schema.find(event_type);
  if (def == nullptr) throw ValidationError("unknown event type " + event_type);
  const ArgumentDef* a = def->find_argument(argument);
  if (a == nullptr) throw ValidationError("argument " + argument + " is not part of " + event_type);
  std::vector<std::string> options = a->subtypes;
  if (!a->required) options.emplace_back("none");
  return options;
}

PromptBundle build_event_prompt(const Document& doc, const Schema& schema, const AnnotatedDocument& example_doc) {
  if (example_doc.events.empty()) throw ValidationError("example document has no events");
  PromptBundle b;
  b.purpose = Purpose::EventExtraction;
  b.messages.push_back({Role::System, event_instruction(schema) + "\n\nExample note:\n" + example_doc.document.text +
                                          "\nExample output:\n" + serialize_events(example_doc.events, schema)});
  b.messages.push_back({Role::User, trigger_question(doc.text)});
  return b;
}

PromptBundle build_trigger_prompt(const Document& doc, const std::string& event_type, PromptMode mode,
                                  const std::optional<std::string>& guide_text, const FewShotSet* fewshot) {
  check_mode(mode, guide_text, fewshot);
  PromptBundle b;
  b.purpose = Purpose::TriggerStep;
  b.target.event_type = event_type;
  const std::string instruction = trigger_instruction(event_type);
  b.messages.push_back({Role::System, mode == PromptMode::Base ? instruction : with_guide(instruction, guide_text)});
  add_shots(b, mode, fewshot);
  b.messages.push_back({Role::User, trigger_question(doc.text)});
  return b;
}

PromptBundle build_argument_prompt(const TextSpan& trigger, const Schema& schema, const std::string& event_type,
                                   const std::string& argument, const Document& doc, PromptMode mode,
                                   const std::optional<std::string>& guide_text, const FewShotSet* fewshot) {
  PromptBundle b;
  b.options = argument_options(schema, event_type, argument);
  check_mode(mode, guide_text, fewshot);
  b.purpose = Purpose::ArgumentStep;
  b.target = PromptTarget{event_type, argument, trigger};
  const std::string instruction = argument_instruction();
  b.messages.push_back({Role::System, mode == PromptMode::Base ? instruction : with_guide(instruction, guide_text)});
  add_shots(b, mode, fewshot);
  b.messages.push_back({Role::User, argument_question(doc.text, trigger, event_type, argument, b.options)});
  return b;
}

TriggerParse parse_trigger_response(std::string_view response, std::string_view doc_text,
                                    const std::string& event_type, const RepairPolicy& repair) {
  TriggerParse out;
  const std::string_view trimmed = text::trim(response);
  if (trimmed == kNoEvents) return out;
  if (trimmed.empty()) {
    out.lines = 1;
    out.invalid_records.push_back({"", InvalidReason::Format, ClauseLevel::Trigger});
    return out;
  }
  SpanGrounder grounder(doc_text);
  std::size_t pos = 0;
  while (pos <= trimmed.size()) {
    auto nl = trimmed.find('\n', pos);
    if (nl == std::string_view::npos) nl = trimmed.size();
    const std::string_view raw = text::trim(trimmed.substr(pos, nl - pos));
    pos = nl + 1;
    if (raw.empty()) continue;
    ++out.lines;
    const std::string line = strip_list_marker(raw);
    if (line.empty() || line == kNoEvents) {
      out.invalid_records.push_back({std::string(raw), InvalidReason::Format, ClauseLevel::Trigger});
      continue;
    }
    auto g = grounder.ground(line, event_type, repair);
    if (!g) {
      out.invalid_records.push_back({std::string(raw), InvalidReason::SpanNotFound, ClauseLevel::Trigger});
      continue;
    }
    if (g->repaired) ++out.repaired_count;
    out.triggers.push_back(std::move(g->span));
  }
  return out;
}

std::optional<std::string> parse_argument_response(std::string_view response,
                                                   const std::vector<std::string>& options) {
  std::string_view s = strip_quotes(text::trim(response));
  while (!s.empty() && (s.back() == '.' || s.back() == '!')) s = text::trim(s.substr(0, s.size() - 1));
  s = strip_quotes(s);
  // option-letter prefixes: "a) x", "b. x", "(c) x", "Answer: x"
  const std::string lower = text::ascii_lower(s);
  for (std::string_view p : {"answer:", "option:"}) {
    if (lower.rfind(p, 0) == 0) {
      s = text::trim(s.substr(p.size()));
      break;
    }
  }
  if (s.size() > 2 && std::isalpha(static_cast<unsigned char>(s[0])) && (s[1] == ')' || s[1] == '.' || s[1] == ':') &&
      s[2] == ' ') {
    s = text::trim(s.substr(2));
  } else if (s.size() > 3 && s[0] == '(' && std::isalpha(static_cast<unsigned char>(s[1])) && s[2] == ')') {
    s = text::trim(s.substr(3));
  }
  s = strip_quotes(s);
  const std::string norm = normalize_answer(s);
  if (norm.empty()) return std::nullopt;
  std::optional<std::string> hit;
  for (const auto& o : options) {
    if (normalize_answer(o) == norm) {
      if (hit) return std::nullopt;
      hit = o;
    }
  }
  return hit;
}

PromptPlanner::PromptPlanner(const Schema& schema, Strategy strategy, std::uint64_t seed, const Corpus* train,
                             const GuideBook* guide)
    : schema_(schema), strategy_(strategy), seed_(seed), train_(train), guide_(guide) {
  const PromptMode mode = prompt_mode(strategy);
  if (mode != PromptMode::Base && guide_ == nullptr) throw ConfigError("strategy " + std::string(to_string(strategy)) +
                                                                       " needs a guide file");
  if ((strategy == Strategy::Event || mode == PromptMode::Guide3Shot) && train_ == nullptr) {
    throw ConfigError("strategy " + std::string(to_string(strategy)) + " needs a train corpus");
  }
  if (strategy == Strategy::Event) {
    for (const auto& d : train_->docs) {
      if (!d.events.empty()) event_examples_.push_back(&d);
    }
    if (event_examples_.empty()) throw ConfigError("train corpus has no document with events");
  }
}

PromptBundle PromptPlanner::event_prompt(const AnnotatedDocument& doc) const {
  std::vector<const AnnotatedDocument*> pool;
  for (const auto* d : event_examples_) {
    if (d->id() != doc.id()) pool.push_back(d);
  }
  if (pool.empty()) throw ConfigError("no example document other than " + doc.id());
  Rng rng(derive_seed(seed_, {"event", doc.id()}));
  return build_event_prompt(doc.document, schema_, *pick(pool, rng));
}

PromptBundle PromptPlanner::trigger_prompt(const AnnotatedDocument& doc, const std::string& event_type) const {
  const PromptMode mode = prompt_mode(strategy_);
  std::optional<std::string> guide;
  if (mode != PromptMode::Base) {
    guide = guide_->trigger_text(event_type);
    if (!guide) throw ConfigError("guide file has no section [" + event_type + "]");
  }
  if (mode != PromptMode::Guide3Shot) return build_trigger_prompt(doc.document, event_type, mode, guide, nullptr);
  const FewShotSet shots = sample_fewshot(*train_, schema_, event_type, std::nullopt, FewShotKind::Trigger,
                                          derive_seed(seed_, {"trigger", doc.id(), event_type}), doc.id());
  return build_trigger_prompt(doc.document, event_type, mode, guide, &shots);
}

PromptBundle PromptPlanner::argument_prompt(const AnnotatedDocument& doc, const TextSpan& trigger,
                                            const std::string& event_type, const std::string& argument) const {
  const PromptMode mode = prompt_mode(strategy_);
  std::optional<std::string> guide;
  if (mode != PromptMode::Base) {
    guide = guide_->argument_text(event_type, argument);
    if (!guide) throw ConfigError("guide file has no section for " + event_type + "." + argument);
  }
  if (mode != PromptMode::Guide3Shot) {
    return build_argument_prompt(trigger, schema_, event_type, argument, doc.document, mode, guide, nullptr);
  }
  const EventTypeDef* def = schema_.find(event_type);
  const ArgumentDef* a = def ? def->find_argument(argument) : nullptr;
  if (a == nullptr) throw ValidationError("argument " + argument + " is not part of " + event_type);
  const FewShotSet shots =
      sample_fewshot(*train_, schema_, event_type, argument, a->required ? FewShotKind::RequiredArg : FewShotKind::OptionalArg,
                     derive_seed(seed_, {"argument", doc.id(), event_type, argument}), doc.id());
  return build_argument_prompt(trigger, schema_, event_type, argument, doc.document, mode, guide, &shots);
}

}  // namespace sdoh
