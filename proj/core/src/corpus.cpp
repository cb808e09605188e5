// SPDX-License-Identifier: Apache-2.0
#include "sdoh/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "sdoh/errors.hpp"
#include "sdoh/random.hpp"
#include "sdoh/schema.hpp"
#include "sdoh/text.hpp"

namespace sdoh {
namespace {

using ojson = nlohmann::ordered_json;

bool is_iso_date(std::string_view s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
  for (std::size_t i : {0, 1, 2, 3, 5, 6, 8, 9}) {
    if (s[i] < '0' || s[i] > '9') return false;
  }
  const int month = (s[5] - '0') * 10 + (s[6] - '0');
  const int day = (s[8] - '0') * 10 + (s[9] - '0');
  return month >= 1 && month <= 12 && day >= 1 && day <= 31;
}

ojson to_json(const AnnotatedDocument& d, const std::optional<Split>& split) {
  ojson j;
  j["doc_id"] = d.document.doc_id;
  j["patient_id"] = d.document.patient_id;
  j["note_date"] = d.document.note_date ? ojson(*d.document.note_date) : ojson(nullptr);
  j["text"] = d.document.text;
  j["annotator_id"] = d.annotator_id ? ojson(*d.annotator_id) : ojson(nullptr);
  j["events"] = ojson::array();
  for (const auto& e : d.events) {
    ojson je;
    je["type"] = e.event_type;
    je["trigger"] = {{"start", e.trigger.start}, {"end", e.trigger.end}, {"text", e.trigger.text}};
    je["args"] = ojson::object();
    for (const auto& [k, v] : e.arguments) je["args"][k] = v;
    j["events"].push_back(std::move(je));
  }
  j["split"] = split ? ojson(std::string(to_string(*split))) : ojson(nullptr);
  return j;
}

std::string required_string(const ojson& j, const char* key, std::size_t line) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_string()) {
    throw DataError(std::string("\"") + key + "\" must be a string", line);
  }
  return it->get<std::string>();
}

std::optional<std::string> optional_string(const ojson& j, const char* key, std::size_t line) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw DataError(std::string("\"") + key + "\" must be a string or null", line);
  return it->get<std::string>();
}

std::size_t offset_member(const ojson& j, const char* key, std::size_t line) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_number_unsigned()) {
    throw DataError(std::string("trigger \"") + key + "\" must be a non-negative integer", line);
  }
  return it->get<std::size_t>();
}

Event event_from_json(const ojson& j, std::size_t line) {
  if (!j.is_object()) throw DataError("event must be an object", line);
  Event e;
  e.event_type = required_string(j, "type", line);
  auto trig = j.find("trigger");
  if (trig == j.end() || !trig->is_object()) throw DataError("event \"trigger\" must be an object", line);
  e.trigger.start = offset_member(*trig, "start", line);
  e.trigger.end = offset_member(*trig, "end", line);
  e.trigger.text = required_string(*trig, "text", line);
  if (auto args = j.find("args"); args != j.end() && !args->is_null()) {
    if (!args->is_object()) throw DataError("event \"args\" must be an object", line);
    for (auto it = args->begin(); it != args->end(); ++it) {
      if (!it.value().is_string()) throw DataError("argument subtype must be a string", line);
      e.arguments[it.key()] = it.value().get<std::string>();
    }
  }
  return e;
}

}  // namespace

std::size_t overlap(const TextSpan& a, const TextSpan& b) {
  const std::size_t lo = std::max(a.start, b.start);
  const std::size_t hi = std::min(a.end, b.end);
  return hi > lo ? hi - lo : 0;
}

bool event_order(const Event& a, const Event& b) {
  return std::tie(a.trigger.start, a.trigger.end, a.event_type) <
         std::tie(b.trigger.start, b.trigger.end, b.event_type);
}

std::string_view to_string(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::Validation: return "validation";
    case Split::Test: return "test";
  }
  return "train";
}

std::optional<Split> parse_split(std::string_view s) {
  if (s == "train") return Split::Train;
  if (s == "validation") return Split::Validation;
  if (s == "test") return Split::Test;
  return std::nullopt;
}

const AnnotatedDocument* Corpus::find(std::string_view doc_id) const {
  for (const auto& d : docs) {
    if (d.document.doc_id == doc_id) return &d;
  }
  return nullptr;
}

std::size_t Corpus::event_count() const {
  std::size_t n = 0;
  for (const auto& d : docs) n += d.events.size();
  return n;
}

Corpus Corpus::subset(Split split) const {
  Corpus out;
  for (const auto& d : docs) {
    auto it = split_assignment.find(d.id());
    if (it != split_assignment.end() && it->second == split) {
      out.docs.push_back(d);
      out.split_assignment.emplace(d.id(), split);
    }
  }
  return out;
}

std::vector<std::string> check_document(const AnnotatedDocument& doc, const Schema* schema) {
  std::vector<std::string> problems;
  const Document& d = doc.document;
  if (d.doc_id.empty()) problems.emplace_back("empty doc_id");
  if (d.text.empty()) problems.emplace_back("empty document text");
  if (d.note_date && !is_iso_date(*d.note_date)) problems.emplace_back("note_date is not an ISO-8601 date");
  if (!text::is_valid_utf8(d.text)) {
    problems.emplace_back("document text is not valid UTF-8");
    return problems;
  }
  const text::CodepointIndex index(d.text);
  std::set<std::tuple<std::string, std::size_t, std::size_t>> seen;
  for (std::size_t i = 0; i < doc.events.size(); ++i) {
    const Event& e = doc.events[i];
    const std::string where = "event " + std::to_string(i) + " (" + e.event_type + ")";
    const TextSpan& t = e.trigger;
    if (t.start >= t.end) {
      problems.push_back(where + ": empty or inverted trigger span");
      continue;
    }
    if (t.end > index.size()) {
      problems.push_back(where + ": trigger span [" + std::to_string(t.start) + "," + std::to_string(t.end) +
                         ") exceeds document length " + std::to_string(index.size()));
      continue;
    }
    if (index.slice(t.start, t.end) != t.text) {
      problems.push_back(where + ": trigger text does not match document at [" + std::to_string(t.start) + "," +
                         std::to_string(t.end) + ")");
    }
    if (!seen.emplace(e.event_type, t.start, t.end).second) {
      problems.push_back(where + ": duplicate event type on the same trigger span");
    }
    if (schema != nullptr) {
      for (const auto& v : validate_event(*schema, e)) problems.push_back(where + ": " + v.message);
    }
  }
  return problems;
}

void check_corpus(const Corpus& corpus, const Schema* schema) {
  std::set<std::string_view> ids;
  for (const auto& d : corpus.docs) {
    if (!ids.insert(d.id()).second) throw ValidationError("duplicate doc_id " + d.id());
    auto problems = check_document(d, schema);
    if (!problems.empty()) throw ValidationError("document " + d.id() + ": " + problems.front());
  }
  for (const auto& [id, split] : corpus.split_assignment) {
    if (ids.find(id) == ids.end()) throw ValidationError("split assignment for unknown document " + id);
  }
}

std::string write_corpus_jsonl(const Corpus& corpus) {
  std::string out;
  for (const auto& d : corpus.docs) {
    std::optional<Split> split;
    if (auto it = corpus.split_assignment.find(d.id()); it != corpus.split_assignment.end()) split = it->second;
    out += to_json(d, split).dump();
    out += '\n';
  }
  return out;
}

void write_corpus_file(const Corpus& corpus, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path + " for writing");
  out << write_corpus_jsonl(corpus);
  if (!out) throw Error("failed writing " + path);
}

Corpus read_corpus_jsonl(std::string_view jsonl, const Schema* schema) {
  Corpus corpus;
  std::set<std::string> ids;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < jsonl.size()) {
    std::size_t nl = jsonl.find('\n', pos);
    if (nl == std::string_view::npos) nl = jsonl.size();
    const std::string_view line = jsonl.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (text::trim(line).empty()) continue;

    ojson j;
    try {
      j = ojson::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw DataError(std::string("malformed JSON: ") + e.what(), line_no);
    }
    if (!j.is_object()) throw DataError("record must be a JSON object", line_no);

    AnnotatedDocument doc;
    doc.document.doc_id = required_string(j, "doc_id", line_no);
    doc.document.patient_id = required_string(j, "patient_id", line_no);
    doc.document.note_date = optional_string(j, "note_date", line_no);
    doc.document.text = required_string(j, "text", line_no);
    doc.annotator_id = optional_string(j, "annotator_id", line_no);
    if (auto ev = j.find("events"); ev != j.end() && !ev->is_null()) {
      if (!ev->is_array()) throw DataError("\"events\" must be an array", line_no);
      for (const auto& e : *ev) doc.events.push_back(event_from_json(e, line_no));
    }
    if (auto split = optional_string(j, "split", line_no)) {
      auto s = parse_split(*split);
      if (!s) throw DataError("unknown split \"" + *split + "\"", line_no);
      corpus.split_assignment.emplace(doc.document.doc_id, *s);
    }
    if (!ids.insert(doc.document.doc_id).second) {
      throw DataError("duplicate doc_id " + doc.document.doc_id, line_no);
    }
    auto problems = check_document(doc, schema);
    if (!problems.empty()) throw DataError(problems.front(), line_no);
    corpus.docs.push_back(std::move(doc));
  }
  return corpus;
}

Corpus read_corpus_file(const std::string& path, const Schema* schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open corpus file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return read_corpus_jsonl(ss.str(), schema);
}

Corpus dedup_per_patient(const Corpus& corpus, std::uint64_t seed) {
  std::vector<std::string> patients;
  std::map<std::string, std::vector<std::size_t>> by_patient;
  for (std::size_t i = 0; i < corpus.docs.size(); ++i) {
    auto& slot = by_patient[corpus.docs[i].document.patient_id];
    if (slot.empty()) patients.push_back(corpus.docs[i].document.patient_id);
    slot.push_back(i);
  }
  Rng rng(seed);
  std::vector<std::size_t> keep;
  keep.reserve(patients.size());
  for (const auto& p : patients) keep.push_back(pick(by_patient[p], rng));
  std::sort(keep.begin(), keep.end());

  Corpus out;
  for (std::size_t i : keep) {
    const auto& d = corpus.docs[i];
    out.docs.push_back(d);
    if (auto it = corpus.split_assignment.find(d.id()); it != corpus.split_assignment.end()) {
      out.split_assignment.insert(*it);
    }
  }
  return out;
}

Corpus sample_documents(const Corpus& corpus, std::size_t n, std::uint64_t seed) {
  if (n > corpus.docs.size()) {
    throw ValidationError("sample size " + std::to_string(n) + " exceeds corpus size " +
                          std::to_string(corpus.docs.size()));
  }
  std::vector<std::size_t> order(corpus.docs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(seed);
  shuffle(order, rng);
  order.resize(n);
  std::sort(order.begin(), order.end());
  Corpus out;
  for (std::size_t i : order) {
    const auto& d = corpus.docs[i];
    out.docs.push_back(d);
    if (auto it = corpus.split_assignment.find(d.id()); it != corpus.split_assignment.end()) {
      out.split_assignment.insert(*it);
    }
  }
  return out;
}

Corpus split_corpus(const Corpus& corpus, SplitSizes sizes, std::uint64_t seed) {
  const std::size_t total = sizes.train + sizes.validation + sizes.test;
  if (total > corpus.docs.size()) {
    throw ValidationError("split sizes sum to " + std::to_string(total) + " but the corpus has " +
                          std::to_string(corpus.docs.size()) + " documents");
  }
  std::vector<std::size_t> order(corpus.docs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(seed);
  shuffle(order, rng);

  Corpus out;
  out.docs = corpus.docs;
  for (std::size_t k = 0; k < total; ++k) {
    const Split s = k < sizes.train                       ? Split::Train
                    : k < sizes.train + sizes.validation ? Split::Validation
                                                          : Split::Test;
    out.split_assignment.emplace(corpus.docs[order[k]].id(), s);
  }
  return out;
}

}  // namespace sdoh
