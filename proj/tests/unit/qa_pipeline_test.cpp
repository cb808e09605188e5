// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <set>

#include <nlohmann/json.hpp>

#include "sdoh/errors.hpp"
#include "sdoh/qa_pipeline.hpp"
#include "sdoh/schema.hpp"
#include "support.hpp"

namespace sdoh {
namespace {

using testing::make_doc;
using testing::make_event;

TEST(Guide, ParsesSections) {
  const GuideBook g = GuideBook::parse("\n[Alcohol]\nDrinking.\n\n[Alcohol.Status]\ncurrent or past\nmore\n");
  EXPECT_EQ(g.describe("Alcohol"), "Drinking.");
  EXPECT_EQ(g.describe("Alcohol", "Status"), "current or past\nmore");
  EXPECT_FALSE(g.describe("Drug"));
  EXPECT_EQ(g.trigger_text("Alcohol"), "Alcohol: Drinking.");
  const auto arg = g.argument_text("Alcohol", "Status");
  ASSERT_TRUE(arg);
  EXPECT_NE(arg->find("Alcohol: Drinking."), std::string::npos);
  EXPECT_NE(arg->find("Status: current or past"), std::string::npos);
}

TEST(Guide, ErrorsNameTheLine) {
  auto line_of = [](const std::string& s) -> std::size_t {
    try {
      GuideBook::parse(s);
    } catch (const ParseError& e) {
      return e.line();
    }
    return 0;
  };
  EXPECT_EQ(line_of("preamble\n[A]\nx\n"), 1u);
  EXPECT_EQ(line_of("[A]\nx\n[A]\ny\n"), 3u);
  EXPECT_EQ(line_of("[A]\nx\n[bad key]\n"), 3u);
}

TEST(Guide, BundledCoversDefaultSchema) {
  const GuideBook& g = GuideBook::bundled();
  for (const auto& t : default_schema().event_types()) {
    EXPECT_TRUE(g.trigger_text(t.name)) << t.name;
    for (const auto& a : t.arguments) EXPECT_TRUE(g.argument_text(t.name, a.name)) << t.name << "." << a.name;
  }
}

TEST(Prompts, ArgumentQuestionLayout) {
  const std::string text = "Lives with mom.";
  const auto opts = argument_options(default_schema(), "LivingArrangement", "Residence");
  EXPECT_EQ(opts, (std::vector<std::string>{"home", "shelter", "homeless", "other", "none"}));
  EXPECT_EQ(argument_question(text, {0, 10, "Lives with"}, "LivingArrangement", "Residence", opts),
            "Note:\n<<Lives with>> mom.\n\nEvent: LivingArrangement\nTrigger: Lives with\n"
            "Question: What is the Residence of this LivingArrangement event?\n"
            "Options: home, shelter, homeless, other, none");
  EXPECT_THROW(argument_options(default_schema(), "Alcohol", "Type"), ValidationError);
}

TEST(Prompts, TriggerPromptModes) {
  const auto d = make_doc("d", "smokes");
  const auto base = build_trigger_prompt(d.document, "Tobacco", PromptMode::Base, std::nullopt, nullptr);
  ASSERT_EQ(base.messages.size(), 2u);
  EXPECT_EQ(base.messages[0].role, Role::System);
  EXPECT_EQ(base.messages[1].content, "Note:\nsmokes");
  EXPECT_EQ(base.purpose, Purpose::TriggerStep);
  EXPECT_THROW(build_trigger_prompt(d.document, "Tobacco", PromptMode::Guide, std::nullopt, nullptr), ConfigError);
  const auto guided = build_trigger_prompt(d.document, "Tobacco", PromptMode::Guide, std::string("G!"), nullptr);
  EXPECT_EQ(guided.messages[0].content.rfind("Guideline:\nG!", 0), 0u);
  FewShotSet two;
  two.examples.resize(2);
  EXPECT_THROW(build_trigger_prompt(d.document, "Tobacco", PromptMode::Guide3Shot, std::string("G"), &two),
               ConfigError);
  FewShotSet three;
  three.examples = {{"a", "x", "q1", "a1", {}}, {"b", "x", "q2", "a2", {}}, {"c", "x", "q3", "a3", {}}};
  const auto shot = build_trigger_prompt(d.document, "Tobacco", PromptMode::Guide3Shot, std::string("G"), &three);
  ASSERT_EQ(shot.messages.size(), 8u);
  EXPECT_EQ(shot.messages[1].role, Role::User);
  EXPECT_EQ(shot.messages[2].role, Role::Assistant);
  EXPECT_EQ(shot.messages[6].content, "a3");
}

TEST(Prompts, EventPromptCarriesExample) {
  const std::string t = "Denies etoh.";
  const auto ex = make_doc("ex", t, {make_event(t, "Alcohol", 7, 11, {{"Status", "never"}})});
  const auto b = build_event_prompt(make_doc("d", "x").document, default_schema(), ex);
  EXPECT_NE(b.messages[0].content.find("Alcohol [etoh] | Status = never [etoh]"), std::string::npos);
  EXPECT_NE(b.messages[0].content.find("LivingArrangement"), std::string::npos);
  EXPECT_THROW(build_event_prompt(make_doc("d", "x").document, default_schema(), make_doc("e", "y")), ValidationError);
}

TEST(Answers, TriggerResponseParsing) {
  const std::string doc = "Mom smokes. Dad smokes. Vapes daily.";
  const auto r = parse_trigger_response("- smokes\n* \"smokes\"\n\nvapes\nNONE\ncigars", doc, "Tobacco");
  EXPECT_EQ(r.lines, 5u);
  ASSERT_EQ(r.triggers.size(), 2u);
  EXPECT_EQ(r.triggers[0].start, 4u);
  EXPECT_EQ(r.triggers[1].start, 16u);
  ASSERT_EQ(r.invalid_records.size(), 3u);
  EXPECT_EQ(r.invalid_records[0].reason, InvalidReason::SpanNotFound);  // vapes, case differs
  EXPECT_EQ(r.invalid_records[1].reason, InvalidReason::Format);
  const auto fixed = parse_trigger_response("vapes", doc, "Tobacco", {true, 0.2});
  ASSERT_EQ(fixed.triggers.size(), 1u);
  EXPECT_EQ(fixed.triggers[0].text, "Vapes");
  EXPECT_TRUE(parse_trigger_response(" NONE ", doc, "Tobacco").invalid_records.empty());
  EXPECT_EQ(parse_trigger_response("", doc, "Tobacco").invalid_records.size(), 1u);
}

TEST(Answers, ArgumentResponseParsing) {
  const std::vector<std::string> opts = {"current", "past", "never"};
  for (const char* s : {"current", "Current.", " \"current\" ", "a) current", "(a) current", "Answer: current",
                        "CURRENT!", "`current`"}) {
    EXPECT_EQ(parse_argument_response(s, opts), "current") << s;
  }
  EXPECT_FALSE(parse_argument_response("", opts));
  EXPECT_FALSE(parse_argument_response("current or past", opts));
  EXPECT_FALSE(parse_argument_response("sometimes", opts));
  EXPECT_EQ(parse_argument_response("single parent", {"single parent", "parents"}), "single parent");
  EXPECT_FALSE(parse_argument_response("x", {"x", "X"}));  // ambiguous after folding
}

// Four documents per class: 0, 1 or 2 Drug triggers, and LivingArrangement
// with or without Residence.
Corpus engineered_train() {
  Corpus c;
  const std::string t = "alpha beta gamma delta";
  auto la = [&](std::size_t s, std::size_t e, bool res) {
    std::map<std::string, std::string> a = {{"Status", "current"}, {"Type", "parents"}};
    if (res) a["Residence"] = "home";
    return make_event(t, "LivingArrangement", s, e, a);
  };
  for (int i = 0; i < 4; ++i) {
    c.docs.push_back(make_doc("zero" + std::to_string(i), t));
    c.docs.push_back(make_doc("one" + std::to_string(i), t, {make_event(t, "Drug", 0, 5, {{"Status", "past"}})}));
    c.docs.push_back(make_doc("many" + std::to_string(i), t,
                              {make_event(t, "Drug", 0, 5, {{"Status", "past"}}),
                               make_event(t, "Drug", 6, 10, {{"Status", "current"}})}));
    c.docs.push_back(make_doc("pos" + std::to_string(i), t, {la(11, 16, true)}));
    c.docs.push_back(make_doc("neg" + std::to_string(i), t, {la(17, 22, false)}));
  }
  return c;
}

TEST(FewShot, TriggerClasses) {
  const Corpus train = engineered_train();
  const auto set = sample_fewshot(train, default_schema(), "Drug", std::nullopt, FewShotKind::Trigger, 3);
  ASSERT_EQ(set.examples.size(), 3u);
  EXPECT_EQ(set.constraint_tag, "trigger");
  std::multiset<std::string> cls;
  for (const auto& e : set.examples) {
    cls.insert(e.cls);
    std::size_t n = 0;
    for (const auto& ev : train.find(e.doc_id)->events) n += ev.event_type == "Drug";
    EXPECT_EQ(e.cls, n == 0 ? "zero-triggers" : n == 1 ? "one-trigger" : "many-triggers");
  }
  EXPECT_EQ(cls, (std::multiset<std::string>{"many-triggers", "one-trigger", "zero-triggers"}));
  EXPECT_EQ(sample_fewshot(train, default_schema(), "Drug", std::nullopt, FewShotKind::Trigger, 3).examples[0].doc_id,
            set.examples[0].doc_id);
}

TEST(FewShot, ArgumentClassesAndErrors) {
  const Corpus train = engineered_train();
  const auto opt = sample_fewshot(train, default_schema(), "LivingArrangement", std::string("Residence"),
                                  FewShotKind::OptionalArg, 5);
  std::size_t neg = 0;
  std::set<std::string> docs;
  for (const auto& e : opt.examples) {
    neg += e.cls == "negative";
    docs.insert(e.doc_id);
    EXPECT_EQ(e.answer == "none", e.cls == "negative");
    ASSERT_TRUE(e.trigger);
  }
  EXPECT_EQ(neg, 1u);
  EXPECT_EQ(docs.size(), 3u);
  EXPECT_THROW(sample_fewshot(train, default_schema(), "LivingArrangement", std::string("Residence"),
                              FewShotKind::RequiredArg, 5),
               ConfigError);
  try {
    sample_fewshot(train, default_schema(), "Tobacco", std::nullopt, FewShotKind::Trigger, 1);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_STREQ(e.what(), "class one-trigger empty");
  }
  // excluding documents can starve a class
  Corpus small = engineered_train();
  small.docs.resize(5);
  EXPECT_THROW(sample_fewshot(small, default_schema(), "Drug", std::string("Status"), FewShotKind::RequiredArg, 1),
               ConfigError);
}

TEST(Planner, RequiresResources) {
  const Corpus train = engineered_train();
  EXPECT_THROW(PromptPlanner(default_schema(), Strategy::Event, 1, nullptr, nullptr), ConfigError);
  EXPECT_THROW(PromptPlanner(default_schema(), Strategy::TwoStepGuide, 1, nullptr, nullptr), ConfigError);
  EXPECT_THROW(PromptPlanner(default_schema(), Strategy::TwoStepGuide3Shot, 1, nullptr, &GuideBook::bundled()),
               ConfigError);
  EXPECT_NO_THROW(PromptPlanner(default_schema(), Strategy::TwoStepBase, 1, nullptr, nullptr));
  EXPECT_NO_THROW(PromptPlanner(default_schema(), Strategy::TwoStepGuide3Shot, 1, &train, &GuideBook::bundled()));
}

TEST(Planner, DeterministicPerSeedAndDocument) {
  const Corpus train = generate_synthetic(default_schema(), 120, 9);
  const PromptPlanner p1(default_schema(), Strategy::TwoStepGuide3Shot, 5, &train, &GuideBook::bundled());
  const PromptPlanner p2(default_schema(), Strategy::TwoStepGuide3Shot, 5, &train, &GuideBook::bundled());
  const PromptPlanner p3(default_schema(), Strategy::TwoStepGuide3Shot, 6, &train, &GuideBook::bundled());
  const auto& d = train.docs[0];
  EXPECT_EQ(p1.trigger_prompt(d, "Alcohol").messages, p2.trigger_prompt(d, "Alcohol").messages);
  bool differs = false;
  for (const auto& t : {"Alcohol", "Drug", "Tobacco", "Employment"}) {
    differs |= p1.trigger_prompt(d, t).messages != p3.trigger_prompt(d, t).messages;
    const auto msgs = p1.trigger_prompt(d, t).messages;
    ASSERT_EQ(msgs.size(), 8u);
    for (std::size_t k = 1; k + 1 < msgs.size(); k += 2) {
      EXPECT_NE(msgs[k].content, msgs.back().content);  // the target never shows up as its own example
    }
  }
  EXPECT_TRUE(differs);
  const PromptPlanner ev(default_schema(), Strategy::Event, 5, &train, nullptr);
  EXPECT_EQ(ev.event_prompt(d).messages, ev.event_prompt(d).messages);
}

struct Loop {
  Corpus gold;
  std::shared_ptr<ScriptedTransport> transport;
  PipelineResult result;
};

Loop closed_loop(Strategy s, std::size_t threads) {
  Loop l;
  l.gold = generate_synthetic(default_schema(), 60, 21);
  const PromptPlanner planner(default_schema(), s, 4, &l.gold, &GuideBook::bundled());
  l.transport = std::make_shared<ScriptedTransport>(build_oracle_script(l.gold, planner));
  Client client(ClientConfig{}, l.transport, [](std::chrono::milliseconds) {});
  PipelineOptions o;
  o.strategy = s;
  o.seed = 4;
  o.train = &l.gold;
  o.guide = &GuideBook::bundled();
  o.threads = threads;
  l.result = run_pipeline(l.gold, default_schema(), client, o);
  return l;
}

TEST(Pipeline, OracleScriptReproducesGold) {
  for (Strategy s : {Strategy::Event, Strategy::TwoStepBase, Strategy::TwoStepGuide, Strategy::TwoStepGuide3Shot}) {
    const Loop l = closed_loop(s, s == Strategy::TwoStepBase ? 3 : 1);
    const auto& m = l.result.metrics;
    EXPECT_TRUE(m.failures.empty()) << to_string(s);
    EXPECT_EQ(l.transport->unmatched(), 0u);
    EXPECT_EQ(m.invalid.overall_rate(), 0.0);
    for (std::size_t i = 0; i < l.gold.docs.size(); ++i) {
      auto want = l.gold.docs[i].events;
      std::sort(want.begin(), want.end(), event_order);
      EXPECT_EQ(l.result.predictions.docs[i].events, want) << to_string(s) << " " << l.gold.docs[i].id();
      EXPECT_EQ(l.result.predictions.docs[i].annotator_id, "model:" + std::string(to_string(s)));
    }
    const ScoreReport r = score(l.gold, l.result.predictions, default_schema());
    EXPECT_EQ(r.event.micro.f1, 1.0) << to_string(s);
  }
}

TEST(Pipeline, QueryCounts) {
  const Loop l = closed_loop(Strategy::TwoStepBase, 1);
  std::size_t want_args = 0;
  for (const auto& d : l.gold.docs) {
    for (const auto& e : d.events) want_args += default_schema().find(e.event_type)->arguments.size();
  }
  EXPECT_EQ(l.result.metrics.trigger_queries, l.gold.docs.size() * default_schema().size());
  EXPECT_EQ(l.result.metrics.argument_queries, want_args);
  EXPECT_EQ(l.transport->call_count(), l.result.metrics.total_queries());
  const auto j = l.result.metrics.to_json();
  EXPECT_EQ(j["queries"]["total"], l.result.metrics.total_queries());
  EXPECT_EQ(j["invalid"]["trigger"]["by_reason"]["format"], 0);
}

TEST(Pipeline, NonsenseAnswersPopulateInvalidRates) {
  const Corpus gold = generate_synthetic(default_schema(), 20, 2);
  Script s;
  s.default_response = "I am not sure what you mean.";
  for (Strategy st : {Strategy::Event, Strategy::TwoStepBase}) {
    Client client(ClientConfig{}, std::make_shared<ScriptedTransport>(s));
    PipelineOptions o;
    o.strategy = st;
    o.train = &gold;
    const auto r = run_pipeline(gold, default_schema(), client, o);
    EXPECT_GT(r.metrics.invalid.trigger_rate(), 0.0);
    EXPECT_EQ(r.metrics.predicted_events, 0u);
    EXPECT_TRUE(r.metrics.failures.empty());
  }
}

TEST(Pipeline, ArgumentLevelInvalidAndDrops) {
  const std::string t = "lives with mom";
  Corpus c;
  c.docs.push_back(make_doc("d", t));
  struct Fixed : Transport {
    Completion send(const std::vector<ChatMessage>& m) override {
      const std::string& q = m.back().content;
      if (q.find("Question:") == std::string::npos) {
        return {m.front().content.find("LivingArrangement") != std::string::npos ? "lives with\nlives with" : "NONE",
                {}, 0, 0};
      }
      if (q.find("the Status") != std::string::npos) return {"current", {}, 0, 0};
      if (q.find("the Type") != std::string::npos) return {"grandparents", {}, 0, 0};
      return {"", {}, 0, 0};
    }
  };
  Client client(ClientConfig{}, std::make_shared<Fixed>());
  const auto r = run_pipeline(c, default_schema(), client, {});
  // the repeated line has no second occurrence to land on
  EXPECT_EQ(r.metrics.invalid.trigger_invalid.at(InvalidReason::SpanNotFound), 1u);
  EXPECT_EQ(r.metrics.dropped_events, 1u);
  EXPECT_EQ(r.metrics.argument_queries, 3u);
  EXPECT_EQ(r.metrics.invalid.argument_total, 3u);
  EXPECT_EQ(r.metrics.invalid.argument_invalid.at(InvalidReason::UnknownSubtype), 1u);
  EXPECT_EQ(r.metrics.invalid.argument_invalid.at(InvalidReason::Format), 1u);
  EXPECT_TRUE(r.predictions.docs[0].events.empty());
}

TEST(Pipeline, TransportFailureIsPerDocument) {
  const Corpus gold = generate_synthetic(default_schema(), 5, 3);
  Client client(ClientConfig{}, std::make_shared<FailingTransport>(1000, 503), [](std::chrono::milliseconds) {});
  const auto r = run_pipeline(gold, default_schema(), client, {});
  EXPECT_EQ(r.metrics.failures.size(), 5u);
  EXPECT_EQ(r.metrics.failures[0].status, 503);
  EXPECT_EQ(r.predictions.docs.size(), 5u);
  EXPECT_EQ(r.metrics.retries, 5u * 3u);
}

TEST(Finetune, PairsMatchGold) {
  const Corpus gold = generate_synthetic(default_schema(), 10, 8);
  const auto ev = finetune_pairs(gold, default_schema(), Strategy::Event);
  ASSERT_EQ(ev.size(), 10u);
  EXPECT_EQ(ev[0].target, serialize_events(gold.docs[0].events, default_schema()));
  const auto two = finetune_pairs(gold, default_schema(), Strategy::TwoStepGuide3Shot);
  std::size_t triggers = 0;
  for (const auto& p : two) triggers += p.step == "trigger";
  EXPECT_EQ(triggers, 10u * default_schema().size());
  const std::string jsonl = finetune_jsonl(two);
  std::size_t lines = 0;
  for (char ch : jsonl) lines += ch == '\n';
  EXPECT_EQ(lines, two.size());
  EXPECT_EQ(nlohmann::json::parse(jsonl.substr(0, jsonl.find('\n')))["step"], "trigger");
}

}  // namespace
}  // namespace sdoh
