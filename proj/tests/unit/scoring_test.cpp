// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <nlohmann/json.hpp>
#include <set>

#include "sdoh/errors.hpp"
#include "sdoh/schema.hpp"
#include "sdoh/scoring.hpp"
#include "support.hpp"

namespace sdoh {
namespace {

using testing::make_doc;
namespace oracle = testing::oracle;

Event ev(const std::string& type, std::size_t s, std::size_t e, std::map<std::string, std::string> args = {}) {
  return Event{type, TextSpan{s, e, std::string(e - s, 'x')}, std::move(args)};
}

TEST(Prf, ZeroDenominators) {
  EXPECT_EQ(prf({0, 0, 0}), (Prf{0, 0, 0}));
  EXPECT_EQ(prf({0, 3, 0}).f1, 0.0);
  const Prf p = prf({3, 1, 2});
  EXPECT_DOUBLE_EQ(p.precision, 0.75);
  EXPECT_DOUBLE_EQ(p.recall, 0.6);
  EXPECT_DOUBLE_EQ(p.f1, 2 * 0.75 * 0.6 / 1.35);
}

TEST(Matching, OverlapTypeAndTouching) {
  const std::vector<Event> g = {ev("Alcohol", 0, 5), ev("Drug", 10, 15)};
  EXPECT_EQ(match_triggers(g, {ev("Alcohol", 5, 9)}).size(), 0u);
  EXPECT_EQ(match_triggers(g, {ev("Drug", 0, 5)}).size(), 0u);
  const auto m = match_triggers(g, {ev("Alcohol", 4, 9), ev("Drug", 14, 20)});
  ASSERT_EQ(m.size(), 2u);
  EXPECT_EQ(m[0].overlap_len, 1u);
}

TEST(Matching, GreedyPrefersLargestOverlap) {
  // pred 0 overlaps both golds; it goes to the one it shares more with
  const std::vector<Event> g = {ev("Alcohol", 0, 4), ev("Alcohol", 3, 10)};
  const std::vector<Event> p = {ev("Alcohol", 2, 9), ev("Alcohol", 0, 2)};
  const auto m = match_triggers(g, p);
  ASSERT_EQ(m.size(), 2u);
  std::set<std::pair<std::size_t, std::size_t>> pairs;
  for (const auto& x : m) pairs.emplace(x.gold_index, x.pred_index);
  EXPECT_TRUE(pairs.count({1, 0}));
  EXPECT_TRUE(pairs.count({0, 1}));
}

TEST(Matching, TieBreaksOnStartOffsets) {
  const std::vector<Event> g = {ev("Drug", 5, 7), ev("Drug", 0, 7)};
  const std::vector<Event> p = {ev("Drug", 5, 7)};
  const auto m = match_triggers(g, p);
  ASSERT_EQ(m.size(), 1u);
  EXPECT_EQ(m[0].gold_index, 1u);  // equal overlap 2, gold start 0 wins
}

TEST(ScoreDocument, HandCountedFixture) {
  const std::vector<Event> gold = {
      ev("Alcohol", 0, 4, {{"Status", "current"}}),
      ev("Employment", 10, 15, {{"Status", "current"}, {"Type", "employed"}}),
  };
  const std::vector<Event> pred = {
      ev("Alcohol", 1, 4, {{"Status", "past"}}),
      ev("Employment", 10, 15, {{"Status", "current"}, {"Type", "employed"}}),
      ev("Drug", 20, 24, {{"Status", "current"}}),
  };
  const DocumentCounts dc = score_document(gold, pred);
  EXPECT_EQ(dc.trigger.at({"Alcohol", ""}), (Counts{1, 0, 0}));
  EXPECT_EQ(dc.trigger.at({"Employment", ""}), (Counts{1, 0, 0}));
  EXPECT_EQ(dc.trigger.at({"Drug", ""}), (Counts{0, 1, 0}));
  EXPECT_EQ(dc.argument.at({"Alcohol", "Status"}), (Counts{0, 1, 1}));
  EXPECT_EQ(dc.argument.at({"Employment", "Type"}), (Counts{1, 0, 0}));
  EXPECT_EQ(dc.argument.at({"Drug", "Status"}), (Counts{0, 1, 0}));
  EXPECT_EQ(total(dc.event), (Counts{1, 2, 1}));

  const ScoreReport r = aggregate(dc, default_schema());
  EXPECT_EQ(r.trigger.micro_counts, (Counts{2, 1, 0}));
  EXPECT_EQ(r.argument.micro_counts, (Counts{2, 2, 1}));
  EXPECT_EQ(r.combined_counts, (Counts{4, 3, 1}));
  // SubstanceUse pools Alcohol and Drug
  const auto& g = r.trigger.groups;
  auto it = std::find_if(g.begin(), g.end(), [](const KeyRow& k) { return k.key.event_type == "SubstanceUse"; });
  ASSERT_NE(it, g.end());
  EXPECT_EQ(it->counts, (Counts{1, 1, 0}));
  // macro over Alcohol (1.0), Employment (1.0), Drug (0.0)
  EXPECT_EQ(r.trigger.macro_keys, 3u);
  EXPECT_DOUBLE_EQ(r.trigger.macro.f1, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(r.trigger.macro.precision, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(r.trigger.macro.recall, 2.0 / 3.0);
}

TEST(ScoreDocument, EventNeedsFullArgumentMap) {
  const std::vector<Event> gold = {ev("LivingArrangement", 0, 4, {{"Status", "current"}, {"Type", "parents"}})};
  const std::vector<Event> extra = {
      ev("LivingArrangement", 0, 4, {{"Status", "current"}, {"Type", "parents"}, {"Residence", "home"}})};
  const DocumentCounts dc = score_document(gold, extra);
  EXPECT_EQ(total(dc.event), (Counts{0, 1, 1}));
  EXPECT_EQ(dc.argument.at({"LivingArrangement", "Residence"}), (Counts{0, 1, 0}));
  EXPECT_EQ(total(dc.argument), (Counts{2, 1, 0}));
}

TEST(ScoreDocument, MatchesDefinitionOracleOnRandomInput) {
  Rng rng(99);
  const Schema& s = default_schema();
  const std::vector<std::string> types = {"Alcohol", "Drug", "LivingArrangement"};
  for (int i = 0; i < 3000; ++i) {
    std::vector<Event> gold, pred;
    for (auto* v : {&gold, &pred}) {
      const std::size_t n = uniform_index(rng, 6);
      for (std::size_t k = 0; k < n; ++k) {
        const std::size_t st = uniform_index(rng, 20);
        const std::string& t = pick(types, rng);
        v->push_back(ev(t, st, st + 1 + uniform_index(rng, 6), testing::random_arguments(s, t, rng)));
      }
    }
    const auto m = match_triggers(gold, pred);
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    std::set<std::size_t> gs, ps;
    for (const auto& x : m) {
      pairs.emplace_back(x.gold_index, x.pred_index);
      EXPECT_TRUE(gs.insert(x.gold_index).second);
      EXPECT_TRUE(ps.insert(x.pred_index).second);
      EXPECT_EQ(gold[x.gold_index].event_type, pred[x.pred_index].event_type);
      EXPECT_EQ(x.overlap_len, overlap(gold[x.gold_index].trigger, pred[x.pred_index].trigger));
      EXPECT_GT(x.overlap_len, 0u);
    }
    // maximal: no equivalent pair left with both sides free
    for (std::size_t g = 0; g < gold.size(); ++g) {
      for (std::size_t p = 0; p < pred.size(); ++p) {
        if (gs.count(g) || ps.count(p)) continue;
        EXPECT_FALSE(gold[g].event_type == pred[p].event_type && overlap(gold[g].trigger, pred[p].trigger) > 0);
      }
    }
    const DocumentCounts got = score_document(gold, pred);
    const DocumentCounts want = oracle::counts_for_matching(gold, pred, pairs);
    EXPECT_EQ(oracle::normalized(got.trigger), oracle::normalized(want.trigger));
    EXPECT_EQ(oracle::normalized(got.argument), oracle::normalized(want.argument));
    EXPECT_EQ(oracle::normalized(got.event), oracle::normalized(want.event));
  }
}

TEST(ScoreCorpus, MissingAndExtraDocuments) {
  Corpus gold, pred;
  gold.docs.push_back(make_doc("a", "xxxx", {ev("Alcohol", 0, 2, {{"Status", "past"}})}));
  gold.docs.push_back(make_doc("b", "xxxx", {ev("Drug", 0, 2, {{"Status", "past"}})}));
  pred.docs.push_back(gold.docs[0]);
  const auto per = score_per_document(gold, pred);
  ASSERT_EQ(per.size(), 2u);
  EXPECT_EQ(total(per[1].trigger), (Counts{0, 0, 1}));
  EXPECT_EQ(score_triggers(gold, pred).at("Drug"), (Counts{0, 0, 1}));
  pred.docs.push_back(make_doc("zzz", "xxxx"));
  EXPECT_THROW(score_per_document(gold, pred), ValidationError);
}

TEST(ScoreCorpus, SelfScoreIsPerfect) {
  const Corpus c = generate_synthetic(default_schema(), 60, 2);
  const ScoreReport r = score(c, c, default_schema());
  for (Level l : {Level::Trigger, Level::Argument, Level::Event}) {
    EXPECT_EQ(r.level(l).micro, (Prf{1, 1, 1}));
    EXPECT_EQ(r.level(l).macro.f1, 1.0);
  }
}

TEST(Report, JsonAndTable) {
  const Corpus c = generate_synthetic(default_schema(), 10, 3);
  const ScoreReport r = score(c, c, default_schema());
  const auto j = nlohmann::json::parse(report_to_json(r));
  EXPECT_EQ(j["trigger"]["micro"]["f1"].get<double>(), 1.0);
  const std::string table = render_table(r, {Level::Trigger, Level::Event});
  EXPECT_EQ(table.rfind("level", 0), 0u);
  EXPECT_NE(table.find("SubstanceUse"), std::string::npos);
  EXPECT_NE(table.find("100.0"), std::string::npos);
  EXPECT_EQ(table.find("argument"), std::string::npos);
  // every schema key appears even without support
  std::set<std::string> names;
  for (const auto& k : r.trigger.keys) names.insert(k.key.name());
  for (const auto& t : default_schema().event_types()) EXPECT_TRUE(names.count(t.name)) << t.name;
}

TEST(Report, PercentAndDrop) {
  EXPECT_EQ(format_percent(0.8512), "85.1");
  EXPECT_EQ(format_percent(1.0), "100.0");
  EXPECT_EQ(format_percent(0.0), "0.0");
  EXPECT_DOUBLE_EQ(f1_drop(80.9, 74.7), 6.2);
  EXPECT_DOUBLE_EQ(f1_drop(82.3, 54.0), 28.3);
}

TEST(Iaa, DocumentSetsMustAgree) {
  Corpus a, b;
  a.docs.push_back(make_doc("a", "x"));
  b.docs.push_back(make_doc("b", "x"));
  EXPECT_THROW(compute_iaa(a, b, default_schema()), ValidationError);
  EXPECT_EQ(render_iaa_summary({85.12, 80.0, 81.94}),
            "IAA micro F1 (%): triggers 85.1, arguments 80.0, triggers+arguments 81.9");
}

}  // namespace
}  // namespace sdoh
