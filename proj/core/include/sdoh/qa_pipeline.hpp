// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "sdoh/corpus.hpp"
#include "sdoh/linearizer.hpp"
#include "sdoh/llm_client.hpp"

namespace sdoh {

class Schema;

enum class Strategy { Event, TwoStepBase, TwoStepGuide, TwoStepGuide3Shot };
std::string_view to_string(Strategy s);
std::optional<Strategy> parse_strategy(std::string_view s);

enum class PromptMode { Base, Guide, Guide3Shot };
PromptMode prompt_mode(Strategy s);

enum class Purpose { EventExtraction, TriggerStep, ArgumentStep };
std::string_view to_string(Purpose p);

struct PromptTarget {
  std::string event_type;  // empty for event-extraction prompts
  std::optional<std::string> argument;
  std::optional<TextSpan> trigger;
};

struct PromptBundle {
  std::vector<ChatMessage> messages;
  Purpose purpose = Purpose::EventExtraction;
  PromptTarget target;
  std::vector<std::string> options;  // argument step only
};

/// Descriptions keyed "EventType" or "EventType.Argument".
class GuideBook {
 public:
  /// Sections start with a "[Key]" line; text before the first header
  /// must be blank. Throws ParseError with the line number.
  static GuideBook parse(std::string_view text);
  static GuideBook load(const std::string& path);
  static const GuideBook& bundled();

  std::optional<std::string> describe(std::string_view event_type) const;
  std::optional<std::string> describe(std::string_view event_type, std::string_view argument) const;
  const std::map<std::string, std::string, std::less<>>& entries() const { return entries_; }

  /// Guide text for a trigger or argument prompt; nullopt if the type has no entry.
  std::optional<std::string> trigger_text(std::string_view event_type) const;
  std::optional<std::string> argument_text(std::string_view event_type, std::string_view argument) const;

 private:
  std::map<std::string, std::string, std::less<>> entries_;
};

enum class FewShotKind { Trigger, RequiredArg, OptionalArg };
std::string_view to_string(FewShotKind k);

struct FewShotExample {
  std::string doc_id;
  std::string cls;       // zero-triggers, one-trigger, many-triggers, positive, negative
  std::string question;  // user turn
  std::string answer;    // assistant turn
  std::optional<TextSpan> trigger;  // argument examples only
};

struct FewShotSet {
  std::vector<FewShotExample> examples;
  std::string constraint_tag;
};

/// Draws the three in-context examples. `argument` must be set for the
/// argument kinds and match the argument's required flag. Documents whose
/// id equals `exclude_doc_id` are never chosen. Throws ConfigError naming
/// the first empty class, e.g. "class many-triggers empty".
FewShotSet sample_fewshot(const Corpus& train, const Schema& schema, const std::string& event_type,
                          const std::optional<std::string>& argument, FewShotKind kind, std::uint64_t seed,
                          std::string_view exclude_doc_id = {});

/// System instruction of the single-step strategy, listing every event type and argument.
std::string event_instruction(const Schema& schema);
/// Expected step-one answer: one trigger per line in text order, or NONE.
std::string trigger_answer(const std::vector<Event>& events, const std::string& event_type);
/// User turn of a trigger-step query.
std::string trigger_question(const std::string& text);
/// User turn of an argument-step query; the trigger is marked <<like this>>.
std::string argument_question(const std::string& text, const TextSpan& trigger, const std::string& event_type,
                              const std::string& argument, const std::vector<std::string>& options);
/// Subtypes in schema order, plus "none" for optional arguments.
std::vector<std::string> argument_options(const Schema& schema, const std::string& event_type,
                                          const std::string& argument);

/// Throws ValidationError if example_doc has no events.
PromptBundle build_event_prompt(const Document& doc, const Schema& schema, const AnnotatedDocument& example_doc);
/// Throws ConfigError if guide_text or a three-example fewshot is missing for the mode.
PromptBundle build_trigger_prompt(const Document& doc, const std::string& event_type, PromptMode mode,
                                  const std::optional<std::string>& guide_text, const FewShotSet* fewshot);
/// Throws ValidationError if the argument is not part of the event type.
PromptBundle build_argument_prompt(const TextSpan& trigger, const Schema& schema, const std::string& event_type,
                                   const std::string& argument, const Document& doc, PromptMode mode,
                                   const std::optional<std::string>& guide_text, const FewShotSet* fewshot);

struct TriggerParse {
  std::vector<TextSpan> triggers;
  std::vector<InvalidRecord> invalid_records;
  std::size_t repaired_count = 0;
  std::size_t lines = 0;
};
TriggerParse parse_trigger_response(std::string_view response, std::string_view doc_text,
                                    const std::string& event_type, const RepairPolicy& repair = {});

/// The chosen option, or nullopt when nothing or more than one option matches.
std::optional<std::string> parse_argument_response(std::string_view response, const std::vector<std::string>& options);

/// Builds every prompt of a run deterministically from (seed, doc_id, target).
class PromptPlanner {
 public:
  /// Throws ConfigError when the strategy needs a guide or train corpus that is missing.
  PromptPlanner(const Schema& schema, Strategy strategy, std::uint64_t seed, const Corpus* train,
                const GuideBook* guide);

  PromptBundle event_prompt(const AnnotatedDocument& doc) const;
  PromptBundle trigger_prompt(const AnnotatedDocument& doc, const std::string& event_type) const;
  PromptBundle argument_prompt(const AnnotatedDocument& doc, const TextSpan& trigger, const std::string& event_type,
                               const std::string& argument) const;

  Strategy strategy() const { return strategy_; }
  const Schema& schema() const { return schema_; }

 private:
  const Schema& schema_;
  Strategy strategy_;
  std::uint64_t seed_;
  const Corpus* train_;
  const GuideBook* guide_;
  std::vector<const AnnotatedDocument*> event_examples_;
};

struct PipelineOptions {
  Strategy strategy = Strategy::TwoStepBase;
  std::uint64_t seed = 0;
  RepairPolicy repair;
  const Corpus* train = nullptr;
  const GuideBook* guide = nullptr;
  std::size_t threads = 1;
};

struct DocumentFailure {
  std::string doc_id;
  int status = 0;
  std::string message;
};

struct RunMetrics {
  Strategy strategy = Strategy::Event;
  std::uint64_t seed = 0;
  std::size_t documents = 0;
  std::size_t event_queries = 0;
  std::size_t trigger_queries = 0;
  std::size_t argument_queries = 0;
  std::size_t retries = 0;
  std::size_t repaired = 0;
  std::size_t merged_duplicates = 0;
  std::size_t dropped_events = 0;
  std::size_t predicted_events = 0;
  InvalidRates invalid;
  std::vector<DocumentFailure> failures;

  std::size_t total_queries() const { return event_queries + trigger_queries + argument_queries; }
  nlohmann::ordered_json to_json() const;
};

struct PipelineResult {
  Corpus predictions;
  RunMetrics metrics;
};

/// Transport failures are recorded per document; that document is emitted
/// with no events and the run continues.
PipelineResult run_pipeline(const Corpus& corpus, const Schema& schema, Client& client,
                            const PipelineOptions& options);

/// Mock script answering every prompt the planner will issue for `gold`
/// with the gold-derived answer.
Script build_oracle_script(const Corpus& gold, const PromptPlanner& planner);

struct FinetunePair {
  std::string doc_id;
  std::string step;  // event, trigger or argument
  std::string input;
  std::string target;
};
/// Supervision pairs for the strategy's base prompts (no in-context examples).
std::vector<FinetunePair> finetune_pairs(const Corpus& corpus, const Schema& schema, Strategy strategy);
std::string finetune_jsonl(const std::vector<FinetunePair>& pairs);

}  // namespace sdoh
