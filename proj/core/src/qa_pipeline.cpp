// SPDX-License-Identifier: Apache-2.0
#include "sdoh/qa_pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <thread>

#include "sdoh/errors.hpp"
#include "sdoh/schema.hpp"
#include "sdoh/text.hpp"

namespace sdoh {
namespace {

struct DocRun {
  std::vector<Event> events;
  std::size_t event_queries = 0;
  std::size_t trigger_queries = 0;
  std::size_t argument_queries = 0;
  std::size_t repaired = 0;
  std::size_t merged = 0;
  std::size_t dropped = 0;
  std::vector<ParseOutcome> outcomes;  // one per parsed response
  std::optional<DocumentFailure> failure;
};

void run_event(const AnnotatedDocument& doc, const Schema& schema, Client& client, const PromptPlanner& planner,
               const RepairPolicy& repair, DocRun& r) {
  const PromptBundle b = planner.event_prompt(doc);
  ++r.event_queries;
  const Completion c = client.complete(b.messages);
  ParseOutcome o = parse_events(c.text, doc.document.text, schema, repair);
  r.repaired += o.repaired_count;
  r.events = o.events;
  std::sort(r.events.begin(), r.events.end(), event_order);
  o.events.clear();
  r.outcomes.push_back(std::move(o));
}

void run_two_step(const AnnotatedDocument& doc, const Schema& schema, Client& client, const PromptPlanner& planner,
                  const RepairPolicy& repair, DocRun& r) {
  for (const auto& type : schema.event_types()) {
    const PromptBundle tb = planner.trigger_prompt(doc, type.name);
    ++r.trigger_queries;
    const Completion tc = client.complete(tb.messages);
    TriggerParse tp = parse_trigger_response(tc.text, doc.document.text, type.name, repair);
    r.repaired += tp.repaired_count;

    ParseOutcome step1;
    step1.trigger_fragments = tp.lines;
    step1.invalid_records = std::move(tp.invalid_records);
    r.outcomes.push_back(std::move(step1));

    std::vector<TextSpan> triggers;
    for (auto& t : tp.triggers) {
      const bool dup = std::any_of(triggers.begin(), triggers.end(),
                                   [&](const TextSpan& s) { return s.start == t.start && s.end == t.end; });
      if (dup) {
        ++r.merged;
      } else {
        triggers.push_back(std::move(t));
      }
    }

    for (const auto& trig : triggers) {
      Event e{type.name, trig, {}};
      bool keep = true;
      ParseOutcome step2;
      for (const auto& arg : type.arguments) {
        const PromptBundle ab = planner.argument_prompt(doc, trig, type.name, arg.name);
        ++r.argument_queries;
        ++step2.argument_clauses;
        const Completion ac = client.complete(ab.messages);
        auto choice = parse_argument_response(ac.text, ab.options);
        if (!choice) {
          const bool ambiguous_or_empty = text::trim(ac.text).empty();
          step2.invalid_records.push_back({type.name + "." + arg.name,
                                           ambiguous_or_empty ? InvalidReason::Format : InvalidReason::UnknownSubtype,
                                           ClauseLevel::Argument});
          if (arg.required) keep = false;
          continue;
        }
        if (*choice == "none") continue;
        e.arguments[arg.name] = *choice;
      }
      r.outcomes.push_back(std::move(step2));
      if (keep) {
        r.events.push_back(std::move(e));
      } else {
        ++r.dropped;
      }
    }
  }
  std::sort(r.events.begin(), r.events.end(), event_order);
}

}  // namespace

nlohmann::ordered_json RunMetrics::to_json() const {
  nlohmann::ordered_json j;
  j["strategy"] = std::string(to_string(strategy));
  j["seed"] = seed;
  j["documents"] = documents;
  j["queries"] = {{"event", event_queries},
                  {"trigger", trigger_queries},
                  {"argument", argument_queries},
                  {"total", total_queries()}};
  j["retries"] = retries;
  j["repaired_spans"] = repaired;
  j["merged_duplicates"] = merged_duplicates;
  j["dropped_events"] = dropped_events;
  j["predicted_events"] = predicted_events;
  auto level = [](std::size_t total, const std::map<InvalidReason, std::size_t>& m) {
    nlohmann::ordered_json l;
    std::size_t n = 0;
    for (const auto& [r, c] : m) n += c;
    l["total"] = total;
    l["invalid"] = n;
    l["rate"] = total ? static_cast<double>(n) / static_cast<double>(total) : 0.0;
    nlohmann::ordered_json by = nlohmann::ordered_json::object();
    for (InvalidReason r : {InvalidReason::Format, InvalidReason::SpanNotFound, InvalidReason::UnknownType,
                            InvalidReason::UnknownSubtype}) {
      auto it = m.find(r);
      by[std::string(to_string(r))] = it == m.end() ? 0 : it->second;
    }
    l["by_reason"] = by;
    return l;
  };
  j["invalid"] = {{"trigger", level(invalid.trigger_total, invalid.trigger_invalid)},
                  {"argument", level(invalid.argument_total, invalid.argument_invalid)},
                  {"overall_rate", invalid.overall_rate()}};
  nlohmann::ordered_json f = nlohmann::ordered_json::array();
  for (const auto& x : failures) f.push_back({{"doc_id", x.doc_id}, {"status", x.status}, {"message", x.message}});
  j["failures"] = f;
  return j;
}

PipelineResult run_pipeline(const Corpus& corpus, const Schema& schema, Client& client,
                            const PipelineOptions& options) {
  const PromptPlanner planner(schema, options.strategy, options.seed, options.train, options.guide);
  const std::size_t retries_before = client.retries();
  std::vector<DocRun> runs(corpus.docs.size());

  std::atomic<std::size_t> next{0};
  std::mutex error_mu;
  std::exception_ptr error;
  auto worker = [&] {
    for (std::size_t i = next++; i < corpus.docs.size(); i = next++) {
      DocRun& r = runs[i];
      const auto& doc = corpus.docs[i];
      try {
        if (options.strategy == Strategy::Event) {
          run_event(doc, schema, client, planner, options.repair, r);
        } else {
          run_two_step(doc, schema, client, planner, options.repair, r);
        }
      } catch (const TransportError& e) {
        r.events.clear();
        r.failure = DocumentFailure{doc.id(), e.status(), e.what()};
      } catch (...) {
        std::lock_guard lock(error_mu);
        if (!error) error = std::current_exception();
        next = corpus.docs.size();
      }
    }
  };
  const std::size_t n_threads = std::clamp<std::size_t>(options.threads, 1, std::max<std::size_t>(corpus.docs.size(), 1));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);

  PipelineResult out;
  out.predictions.split_assignment = corpus.split_assignment;
  RunMetrics& m = out.metrics;
  m.strategy = options.strategy;
  m.seed = options.seed;
  m.documents = corpus.docs.size();
  std::vector<ParseOutcome> outcomes;
  for (std::size_t i = 0; i < corpus.docs.size(); ++i) {
    DocRun& r = runs[i];
    AnnotatedDocument pred;
    pred.document = corpus.docs[i].document;
    pred.events = std::move(r.events);
    pred.annotator_id = "model:" + std::string(to_string(options.strategy));
    m.event_queries += r.event_queries;
    m.trigger_queries += r.trigger_queries;
    m.argument_queries += r.argument_queries;
    m.repaired += r.repaired;
    m.merged_duplicates += r.merged;
    m.dropped_events += r.dropped;
    m.predicted_events += pred.events.size();
    if (r.failure) m.failures.push_back(*r.failure);
    for (auto& o : r.outcomes) outcomes.push_back(std::move(o));
    out.predictions.docs.push_back(std::move(pred));
  }
  m.invalid = invalid_rate(outcomes);
  m.retries = client.retries() - retries_before;
  return out;
}

Script build_oracle_script(const Corpus& gold, const PromptPlanner& planner) {
  Script script;
  script.strict = true;
  const Schema& schema = planner.schema();
  auto add = [&](const PromptBundle& b, std::string answer) {
    script.responses[fingerprint(b.messages)] = std::move(answer);
  };
  for (const auto& doc : gold.docs) {
    if (planner.strategy() == Strategy::Event) {
      add(planner.event_prompt(doc), serialize_events(doc.events, schema));
      continue;
    }
    for (const auto& type : schema.event_types()) {
      add(planner.trigger_prompt(doc, type.name), trigger_answer(doc.events, type.name));
      for (const auto& e : doc.events) {
        if (e.event_type != type.name) continue;
        for (const auto& arg : type.arguments) {
          auto it = e.arguments.find(arg.name);
          add(planner.argument_prompt(doc, e.trigger, type.name, arg.name),
              it == e.arguments.end() ? "none" : it->second);
        }
      }
    }
  }
  return script;
}

std::vector<FinetunePair> finetune_pairs(const Corpus& corpus, const Schema& schema, Strategy strategy) {
  auto render = [](const PromptBundle& b) {
    std::string s;
    for (const auto& m : b.messages) {
      if (!s.empty()) s += "\n\n";
      s += m.content;
    }
    return s;
  };
  std::vector<FinetunePair> out;
  for (const auto& doc : corpus.docs) {
    if (strategy == Strategy::Event) {
      out.push_back({doc.id(), "event", event_instruction(schema) + "\n\n" + trigger_question(doc.document.text),
                     serialize_events(doc.events, schema)});
      continue;
    }
    const PromptMode mode = PromptMode::Base;
    for (const auto& type : schema.event_types()) {
      out.push_back({doc.id(), "trigger",
                     render(build_trigger_prompt(doc.document, type.name, mode, std::nullopt, nullptr)),
                     trigger_answer(doc.events, type.name)});
      for (const auto& e : doc.events) {
        if (e.event_type != type.name) continue;
        for (const auto& arg : type.arguments) {
          auto it = e.arguments.find(arg.name);
          out.push_back({doc.id(), "argument",
                         render(build_argument_prompt(e.trigger, schema, type.name, arg.name, doc.document, mode,
                                                      std::nullopt, nullptr)),
                         it == e.arguments.end() ? "none" : it->second});
        }
      }
    }
  }
  return out;
}

std::string finetune_jsonl(const std::vector<FinetunePair>& pairs) {
  std::string out;
  for (const auto& p : pairs) {
    nlohmann::ordered_json j;
    j["doc_id"] = p.doc_id;
    j["step"] = p.step;
    j["input"] = p.input;
    j["target"] = p.target;
    out += j.dump() + "\n";
  }
  return out;
}

}  // namespace sdoh
