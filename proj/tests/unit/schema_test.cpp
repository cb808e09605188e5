// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include "sdoh/corpus.hpp"
#include "sdoh/errors.hpp"
#include "sdoh/random.hpp"
#include "sdoh/schema.hpp"

namespace sdoh {
namespace {

constexpr const char* kMinimal = R"({
  "version": "t1",
  "event_types": [
    {"name": "LivingArrangement", "arguments": [
      {"name": "Status", "required": true, "subtypes": ["past", "current"]}
    ]}
  ]
})";

TEST(Schema, LoadsMinimalFile) {
  const Schema s = load_schema(kMinimal);
  ASSERT_EQ(s.size(), 1u);
  const EventTypeDef* t = s.find("LivingArrangement");
  ASSERT_NE(t, nullptr);
  EXPECT_EQ(t->report_group, "LivingArrangement");
  ASSERT_EQ(t->arguments.size(), 1u);
  EXPECT_TRUE(t->arguments[0].required);
  EXPECT_EQ(t->arguments[0].subtypes, (std::vector<std::string>{"past", "current"}));
}

TEST(Schema, DuplicateEventTypeNamesTheOffender) {
  const char* src = R"({"version":"x","event_types":[
    {"name":"Employment","arguments":[]},{"name":"Employment","arguments":[]}]})";
  try {
    load_schema(src);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("Employment"), std::string::npos);
  }
}

TEST(Schema, RejectsStructuralProblems) {
  EXPECT_THROW(load_schema("{"), ParseError);
  EXPECT_THROW(load_schema(R"({"version":"x"})"), ParseError);
  EXPECT_THROW(load_schema(R"({"version":"x","event_types":[{"name":"A","arguments":[
    {"name":"S","required":true,"subtypes":[]}]}]})"),
               ValidationError);
  EXPECT_THROW(load_schema(R"({"version":"x","event_types":[{"name":"A","arguments":[
    {"name":"S","required":true,"subtypes":["a","a"]}]}]})"),
               ValidationError);
  EXPECT_THROW(load_schema(R"({"version":"x","event_types":[{"name":"A","arguments":[
    {"name":"S","required":true,"subtypes":["a"]},{"name":"S","required":false,"subtypes":["b"]}]}]})"),
               ValidationError);
  EXPECT_THROW(load_schema(R"({"version":"x","event_types":[{"name":"has space","arguments":[]}]})"),
               ValidationError);
  EXPECT_THROW(load_schema(R"({"version":"x","event_types":[{"name":"A","arguments":[
    {"name":"S","required":false,"subtypes":["none","b"]}]}]})"),
               ValidationError);
}

TEST(DefaultSchema, HasTenTypesAndSubstanceGroup) {
  const Schema& s = default_schema();
  EXPECT_EQ(s.size(), 10u);
  for (const char* t : {"Alcohol", "Drug", "Tobacco"}) {
    ASSERT_NE(s.find(t), nullptr) << t;
    EXPECT_EQ(s.find(t)->report_group, "SubstanceUse");
  }
  for (const char* t : {"EducationAccess", "Employment", "FoodInsecurity", "LivingArrangement", "MentalHealth"}) {
    EXPECT_NE(s.find(t), nullptr) << t;
  }
  std::size_t provisional = 0;
  for (const auto& t : s.event_types()) provisional += t.provisional;
  EXPECT_EQ(provisional, 2u);
}

TEST(DefaultSchema, LivingArrangementArguments) {
  const EventTypeDef* la = default_schema().find("LivingArrangement");
  ASSERT_NE(la, nullptr);
  const ArgumentDef* type = la->find_argument("Type");
  const ArgumentDef* res = la->find_argument("Residence");
  ASSERT_NE(type, nullptr);
  ASSERT_NE(res, nullptr);
  EXPECT_TRUE(type->required);
  EXPECT_FALSE(res->required);
  EXPECT_TRUE(res->has_subtype("home"));
}

TEST(DefaultSchema, StatusIncludesPastAndCurrent) {
  for (const auto& t : default_schema().event_types()) {
    const ArgumentDef* st = t.find_argument("Status");
    if (!st) continue;
    EXPECT_TRUE(st->has_subtype("past")) << t.name;
    EXPECT_TRUE(st->has_subtype("current")) << t.name;
  }
}

TEST(DefaultSchema, TextMatchesEmitter) {
  EXPECT_EQ(write_schema(default_schema()), default_schema_text());
  EXPECT_EQ(default_schema().report_groups().front(), "SubstanceUse");
}

TEST(ValidateEvent, ConformingLivingArrangement) {
  Event e{"LivingArrangement", {0, 5, "lives"}, {{"Status", "current"}, {"Type", "parents"}}};
  EXPECT_TRUE(validate_event(default_schema(), e).empty());
}

TEST(ValidateEvent, MissingRequiredType) {
  Event e{"LivingArrangement", {0, 5, "lives"}, {{"Status", "current"}}};
  const auto v = validate_event(default_schema(), e);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].kind, Violation::Kind::MissingRequired);
  EXPECT_EQ(v[0].message, "missing required argument Type");
}

TEST(ValidateEvent, UnknownSubtypeAgainstVocabulary) {
  const Schema& s = default_schema();
  const ArgumentDef* status = s.find("Alcohol")->find_argument("Status");
  // every label outside the declared vocabulary is rejected, every label inside accepted
  for (const std::string label : {"past", "current", "never", "frequently", "Current", ""}) {
    Event e{"Alcohol", {0, 4, "etoh"}, {{"Status", label}}};
    const auto v = validate_event(s, e);
    const bool member = std::find(status->subtypes.begin(), status->subtypes.end(), label) != status->subtypes.end();
    EXPECT_EQ(v.empty(), member) << label;
    if (!member) {
      ASSERT_EQ(v.size(), 1u);
      EXPECT_EQ(v[0].kind, Violation::Kind::UnknownSubtype);
    }
  }
}

TEST(ValidateEvent, ListsEveryViolation) {
  Event e{"LivingArrangement", {0, 1, "x"}, {{"Status", "sometimes"}, {"Pets", "cat"}}};
  const auto v = validate_event(default_schema(), e);
  EXPECT_EQ(v.size(), 3u);  // bad subtype, unknown argument, missing Type
  Event u{"Weather", {0, 1, "x"}, {}};
  EXPECT_EQ(validate_event(default_schema(), u).front().kind, Violation::Kind::UnknownEventType);
}

Schema random_schema(Rng& rng) {
  std::vector<EventTypeDef> types;
  const std::size_t n = 1 + uniform_index(rng, 6);
  for (std::size_t i = 0; i < n; ++i) {
    EventTypeDef t;
    t.name = "T" + std::to_string(i);
    if (uniform_index(rng, 2)) t.report_group = "G" + std::to_string(uniform_index(rng, 3));
    t.provisional = uniform_index(rng, 4) == 0;
    const std::size_t na = uniform_index(rng, 4);
    for (std::size_t a = 0; a < na; ++a) {
      ArgumentDef d;
      d.name = "A" + std::to_string(a);
      d.required = uniform_index(rng, 2);
      const std::size_t ns = 1 + uniform_index(rng, 4);
      for (std::size_t s = 0; s < ns; ++s) d.subtypes.push_back("s-" + std::to_string(s));
      t.arguments.push_back(d);
    }
    types.push_back(t);
  }
  return Schema::from_types("v" + std::to_string(uniform_index(rng, 100)), types);
}

TEST(Schema, WriteLoadRoundTripOnRandomSchemas) {
  Rng rng(11);
  for (int i = 0; i < 200; ++i) {
    const Schema s = random_schema(rng);
    const std::string text = write_schema(s);
    EXPECT_EQ(load_schema(text), s);
    EXPECT_EQ(write_schema(load_schema(text)), text);
    EXPECT_EQ(text.back(), '\n');
  }
}

TEST(ValidateEvent, TotalOnArbitraryEvents) {
  Rng rng(5);
  const Schema& s = default_schema();
  for (int i = 0; i < 500; ++i) {
    Event e;
    e.event_type = uniform_index(rng, 3) ? s.event_types()[uniform_index(rng, s.size())].name : "Bogus";
    const std::size_t n = uniform_index(rng, 4);
    for (std::size_t k = 0; k < n; ++k) {
      e.arguments[pick(std::vector<std::string>{"Status", "Type", "Residence", "??"}, rng)] =
          pick(std::vector<std::string>{"current", "home", "", "none", "past"}, rng);
    }
    const auto v = validate_event(s, e);
    if (v.empty()) {
      const EventTypeDef* def = s.find(e.event_type);
      for (const auto& [name, sub] : e.arguments) EXPECT_TRUE(def->find_argument(name)->has_subtype(sub));
    }
  }
}

}  // namespace
}  // namespace sdoh
