// SPDX-License-Identifier: Apache-2.0
#include "sdoh/errors.hpp"
#include "sdoh/qa_pipeline.hpp"
#include "sdoh/random.hpp"
#include "sdoh/schema.hpp"

namespace sdoh {

std::string_view to_string(FewShotKind k) {
  switch (k) {
    case FewShotKind::Trigger: return "trigger";
    case FewShotKind::RequiredArg: return "required-arg";
    case FewShotKind::OptionalArg: return "optional-arg";
  }
  return "trigger";
}

namespace {

using DocPool = std::vector<const AnnotatedDocument*>;

const AnnotatedDocument* draw(const DocPool& pool, const std::string& cls, Rng& rng) {
  if (pool.empty()) throw ConfigError("class " + cls + " empty");
  return pick(pool, rng);
}

FewShotExample trigger_example(const AnnotatedDocument& d, const std::string& event_type, std::string cls) {
  return FewShotExample{d.id(), std::move(cls), trigger_question(d.document.text), trigger_answer(d.events, event_type),
                        std::nullopt};
}

FewShotExample argument_example(const AnnotatedDocument& d, const Event& e, const std::string& argument,
                                const std::vector<std::string>& options, std::string cls) {
  auto it = e.arguments.find(argument);
  std::string answer = it == e.arguments.end() ? "none" : it->second;
  return FewShotExample{d.id(), std::move(cls),
                        argument_question(d.document.text, e.trigger, e.event_type, argument, options),
                        std::move(answer), e.trigger};
}

const Event& draw_event(const AnnotatedDocument& d, const std::string& event_type, const std::string& argument,
                        bool with_argument, Rng& rng) {
  std::vector<const Event*> hits;
  for (const auto& e : d.events) {
    if (e.event_type == event_type && (e.arguments.count(argument) > 0) == with_argument) hits.push_back(&e);
  }
  return *pick(hits, rng);
}

}  // namespace

FewShotSet sample_fewshot(const Corpus& train, const Schema& schema, const std::string& event_type,
                          const std::optional<std::string>& argument, FewShotKind kind, std::uint64_t seed,
                          std::string_view exclude_doc_id) {
  const EventTypeDef* def = schema.find(event_type);
  if (def == nullptr) throw ValidationError("unknown event type " + event_type);
  Rng rng(seed);
  FewShotSet set;
  set.constraint_tag = std::string(to_string(kind));

  if (kind == FewShotKind::Trigger) {
    DocPool zero, one, many;
    for (const auto& d : train.docs) {
      if (d.id() == exclude_doc_id) continue;
      std::size_t n = 0;
      for (const auto& e : d.events) n += e.event_type == event_type;
      (n == 0 ? zero : n == 1 ? one : many).push_back(&d);
    }
    const auto* z = draw(zero, "zero-triggers", rng);
    const auto* o = draw(one, "one-trigger", rng);
    const auto* m = draw(many, "many-triggers", rng);
    set.examples = {trigger_example(*z, event_type, "zero-triggers"), trigger_example(*o, event_type, "one-trigger"),
                    trigger_example(*m, event_type, "many-triggers")};
    shuffle(set.examples, rng);
    return set;
  }

  if (!argument) throw ConfigError("argument few-shot sampling needs an argument name");
  const ArgumentDef* a = def->find_argument(*argument);
  if (a == nullptr) throw ValidationError("argument " + *argument + " is not part of " + event_type);
  if (a->required != (kind == FewShotKind::RequiredArg)) {
    throw ConfigError(event_type + "." + *argument + " is " + (a->required ? "required" : "optional") +
                      ", not sampled as " + std::string(to_string(kind)));
  }
  const auto options = argument_options(schema, event_type, *argument);

  DocPool positive, negative;
  for (const auto& d : train.docs) {
    if (d.id() == exclude_doc_id) continue;
    bool pos = false, neg = false;
    for (const auto& e : d.events) {
      if (e.event_type != event_type) continue;
      (e.arguments.count(*argument) ? pos : neg) = true;
    }
    if (pos) positive.push_back(&d);
    if (neg) negative.push_back(&d);
  }

  std::size_t wanted = 3;
  if (kind == FewShotKind::OptionalArg) {
    const auto* n = draw(negative, "negative", rng);
    set.examples.push_back(argument_example(*n, draw_event(*n, event_type, *argument, false, rng), *argument, options,
                                            "negative"));
    std::erase(positive, n);
    wanted = 2;
  }
  if (positive.size() < wanted) {
    throw ConfigError(positive.empty() ? "class positive empty"
                                       : "class positive has fewer than " + std::to_string(wanted) + " documents");
  }
  shuffle(positive, rng);
  for (std::size_t i = 0; i < wanted; ++i) {
    set.examples.push_back(argument_example(*positive[i], draw_event(*positive[i], event_type, *argument, true, rng),
                                            *argument, options, "positive"));
  }
  shuffle(set.examples, rng);
  return set;
}

}  // namespace sdoh
