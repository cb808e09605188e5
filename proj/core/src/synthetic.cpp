// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cstdio>
#include <optional>
#include <unordered_map>

#include "sdoh/corpus.hpp"
#include "sdoh/random.hpp"
#include "sdoh/schema.hpp"
#include "sdoh/text.hpp"

namespace sdoh {
namespace {

const std::unordered_map<std::string, std::vector<std::string>>& phrase_banks() {
  static const std::unordered_map<std::string, std::vector<std::string>> banks = {
      {"Alcohol", {"drinks alcohol", "etoh use", "beer on weekends", "wine with dinner", "social drinking"}},
      {"Drug", {"marijuana use", "illicit drugs", "cannabis", "recreational drug use", "opioid misuse"}},
      {"Tobacco", {"smokes cigarettes", "vapes", "chewing tobacco", "secondhand smoke", "cigar use"}},
      {"EducationAccess", {"attends preschool", "in third grade", "IEP at school", "homeschooled", "daycare"}},
      {"Employment", {"works as a nurse", "is unemployed", "works full time", "on disability", "job at a warehouse"}},
      {"FoodInsecurity", {"Food insecurity", "food stamps", "runs out of food", "WIC benefits", "food bank"}},
      {"LivingArrangement", {"lives with", "resides with", "stays with", "lives at", "shares a home with"}},
      {"MentalHealth", {"depression", "anxiety", "ADHD", "panic attacks", "behavioral concerns"}},
  };
  return banks;
}

std::vector<std::string> fallback_bank(const std::string& type_name) {
  std::string words;
  for (char c : type_name) {
    if (c >= 'A' && c <= 'Z' && !words.empty()) words += ' ';
    words += static_cast<char>((c >= 'A' && c <= 'Z') ? c + 32 : c);
  }
  return {words, words + " noted", "reported " + words, words + " concerns", "history of " + words};
}

const std::vector<std::string> kPrefixes = {
    "", "Mom reports ", "Dad notes ", "Per caregiver, ", "Patient endorses ", "Grandmother mentions ",
};
const std::vector<std::string> kSuffixes = {
    ".", " per mom.", " in the household.", ", discussed today.", " noted at visit.",
};
const std::vector<std::string> kFiller = {
    "No other concerns today.", "Family is engaged in care.", "Discussed car seat safety.",
    "Up to date on vaccines.", "Sleeps through the night.", "Enjoys playing outside.",
};
const std::vector<std::string> kSeparators = {" ", "\n", " ", "\n\n"};

struct Draft {
  std::string text;
  std::size_t length = 0;  // code points
  std::vector<Event> events;

  void append(const std::string& s) {
    text += s;
    length += text::length(s);
  }
};

bool triggers_unique(const Draft& d) {
  const std::u32string body = text::decode(d.text);
  for (const auto& e : d.events) {
    const std::u32string t = text::decode(e.trigger.text);
    const auto first = body.find(t);
    if (first != e.trigger.start) return false;
    if (body.find(t, first + 1) != std::u32string::npos) return false;
  }
  return true;
}

// `twice` names a type that gets two triggers up front.
Draft draft_document(const Schema& schema, Rng& rng, std::optional<std::size_t> twice) {
  Draft d;
  d.append("Social History:\n");
  const std::size_t n_events = std::max<std::size_t>(uniform_index(rng, 6), twice ? 2 : 0);
  std::vector<std::size_t> type_counts(schema.size(), 0);
  std::vector<std::string> used_phrases;
  bool first_sentence = true;

  auto add_sentence = [&](const std::string& s) {
    if (!first_sentence) d.append(pick(kSeparators, rng));
    first_sentence = false;
    d.append(s);
  };

  for (std::size_t k = 0; k < n_events; ++k) {
    if (uniform_unit(rng) < 0.3) add_sentence(pick(kFiller, rng));

    std::size_t ti = uniform_index(rng, schema.size());
    // Occasionally repeat an already used type so some notes hold several
    // triggers of one type.
    if (k > 0 && uniform_unit(rng) < 0.2) ti = schema.order_of(d.events[uniform_index(rng, d.events.size())].event_type);
    if (twice && k < 2) ti = *twice;
    if (type_counts[ti] >= 2) continue;
    const EventTypeDef& type = schema.event_types()[ti];

    auto bank_it = phrase_banks().find(type.name);
    const std::vector<std::string> bank = bank_it != phrase_banks().end() ? bank_it->second : fallback_bank(type.name);
    std::vector<std::string> options;
    for (const auto& p : bank) {
      bool taken = false;
      for (const auto& u : used_phrases) taken = taken || u == p;
      if (!taken) options.push_back(p);
    }
    if (options.empty()) continue;
    const std::string& phrase = pick(options, rng);
    used_phrases.push_back(phrase);
    ++type_counts[ti];

    const std::string& prefix = pick(kPrefixes, rng);
    const std::string& suffix = pick(kSuffixes, rng);
    if (!first_sentence) d.append(pick(kSeparators, rng));
    first_sentence = false;
    d.append(prefix);
    Event e;
    e.event_type = type.name;
    e.trigger.start = d.length;
    d.append(phrase);
    e.trigger.end = d.length;
    e.trigger.text = phrase;
    d.append(suffix);
    for (const auto& a : type.arguments) {
      if (!a.required && uniform_unit(rng) < 0.5) continue;
      e.arguments[a.name] = pick(a.subtypes, rng);
    }
    d.events.push_back(std::move(e));
  }
  if (d.events.empty() || uniform_unit(rng) < 0.3) add_sentence(pick(kFiller, rng));
  return d;
}

}  // namespace

Corpus generate_synthetic(const Schema& schema, std::size_t n_docs, std::uint64_t seed) {
  Corpus corpus;
  if (schema.size() == 0) return corpus;
  Rng rng(derive_seed(seed, {"synthetic"}));
  const std::size_t n_patients = n_docs - n_docs / 4;
  // The first documents hold two triggers of one type each, two documents
  // per type, so every few-shot class exists in a large enough corpus.
  const std::size_t seeded = std::min(n_docs / 2, 2 * schema.size());
  for (std::size_t i = 0; i < n_docs; ++i) {
    const auto twice = i < seeded ? std::optional<std::size_t>(i % schema.size()) : std::nullopt;
    Draft d = draft_document(schema, rng, twice);
    for (int attempt = 0; attempt < 64 && !triggers_unique(d); ++attempt) d = draft_document(schema, rng, twice);
    if (!triggers_unique(d)) {
      d = Draft{};
      d.append("Social History:\nNo concerns today.");
    }
    std::sort(d.events.begin(), d.events.end(), event_order);

    char id[32];
    AnnotatedDocument doc;
    std::snprintf(id, sizeof id, "syn-%06zu", i + 1);
    doc.document.doc_id = id;
    std::snprintf(id, sizeof id, "pat-%06zu", uniform_index(rng, n_patients) + 1);
    doc.document.patient_id = id;
    std::snprintf(id, sizeof id, "%04zu-%02zu-%02zu", 2012 + uniform_index(rng, 10), 1 + uniform_index(rng, 12),
                  1 + uniform_index(rng, 28));
    doc.document.note_date = std::string(id);
    doc.document.text = std::move(d.text);
    doc.events = std::move(d.events);
    doc.annotator_id = "synthetic";
    corpus.docs.push_back(std::move(doc));
  }
  return corpus;
}

}  // namespace sdoh
