// SPDX-License-Identifier: Apache-2.0
#include "sdoh/brat_io.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "sdoh/errors.hpp"
#include "sdoh/schema.hpp"
#include "sdoh/text.hpp"

namespace sdoh::brat {
namespace {

namespace fs = std::filesystem;

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t next = s.find(sep, pos);
    if (next == std::string_view::npos) {
      out.push_back(s.substr(pos));
      return out;
    }
    out.push_back(s.substr(pos, next - pos));
    pos = next + 1;
  }
}

std::vector<std::string_view> split_spaces(std::string_view s) {
  std::vector<std::string_view> out;
  for (auto tok : split(s, ' ')) {
    if (!tok.empty()) out.push_back(tok);
  }
  return out;
}

std::optional<std::size_t> to_offset(std::string_view s) {
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

// The .ann text column cannot hold line breaks or tabs.
std::string flatten(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c == '\n' || c == '\r' || c == '\t') c = ' ';
  }
  return out;
}

struct TextBound {
  std::size_t line;
  std::string label;
  std::size_t start, end;
  std::string text;
  bool discontinuous = false;
};

struct EventLine {
  std::size_t line;
  std::string id;
  std::string label;
  std::string trigger_id;
};

struct AttributeLine {
  std::size_t line;
  std::string name;
  std::string event_id;
  std::string value;
};

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error("cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, std::string_view content) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error("cannot open " + p.string() + " for writing");
  out << content;
  if (!out) throw Error("failed writing " + p.string());
}

}  // namespace

ParseResult parse_ann(std::string_view ann_text, std::string_view doc_text, const Schema& schema) {
  std::map<std::string, TextBound> tbs;
  std::vector<EventLine> evs;
  std::vector<AttributeLine> attrs;
  std::set<std::string> ids;
  ParseResult result;

  std::size_t line_no = 0;
  for (std::string_view raw : split(ann_text, '\n')) {
    ++line_no;
    std::string_view line = raw;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (text::trim(line).empty()) continue;
    const char kind = line.front();
    if (kind == '#' || kind == 'N') continue;

    const auto fields = split(line, '\t');
    const std::string id(fields[0]);
    if (kind == 'R') throw ParseError("relation line " + id + " is not supported by the annotation scheme", line_no);
    if (kind == '*') {
      result.warnings.push_back({line_no, "equivalence line ignored"});
      continue;
    }
    if (kind != 'T' && kind != 'E' && kind != 'A' && kind != 'M') {
      throw ParseError("unknown annotation id \"" + id + "\"", line_no);
    }
    if (!ids.insert(id).second) throw ParseError("duplicate annotation id " + id, line_no);

    if (kind == 'T') {
      if (fields.size() < 3) throw ParseError("text-bound line " + id + " needs 3 tab-separated fields", line_no);
      std::string_view mid = fields[1];
      const auto sp = mid.find(' ');
      if (sp == std::string_view::npos) throw ParseError("text-bound line " + id + " lacks offsets", line_no);
      TextBound tb;
      tb.line = line_no;
      tb.label = std::string(mid.substr(0, sp));
      // Everything after the second tab belongs to the surface text.
      const std::size_t text_pos = fields[0].size() + fields[1].size() + 2;
      tb.text = std::string(line.substr(std::min(text_pos, line.size())));
      const std::string_view offsets = mid.substr(sp + 1);
      if (offsets.find(';') != std::string_view::npos) {
        tb.discontinuous = true;
        result.warnings.push_back({line_no, "discontinuous span " + id + " dropped"});
      } else {
        const auto parts = split_spaces(offsets);
        if (parts.size() != 2) throw ParseError("text-bound line " + id + " needs start and end offsets", line_no);
        auto s = to_offset(parts[0]);
        auto e = to_offset(parts[1]);
        if (!s || !e) throw ParseError("text-bound line " + id + " has non-numeric offsets", line_no);
        tb.start = *s;
        tb.end = *e;
      }
      tbs.emplace(id, std::move(tb));
    } else if (kind == 'E') {
      if (fields.size() != 2) throw ParseError("event line " + id + " needs 2 tab-separated fields", line_no);
      const auto parts = split_spaces(fields[1]);
      if (parts.empty()) throw ParseError("event line " + id + " is empty", line_no);
      if (parts.size() > 1) {
        throw ParseError("event line " + id + " links argument spans, which the annotation scheme does not use",
                         line_no);
      }
      const auto colon = parts[0].find(':');
      if (colon == std::string_view::npos) throw ParseError("event line " + id + " lacks Label:Trigger", line_no);
      evs.push_back({line_no, id, std::string(parts[0].substr(0, colon)), std::string(parts[0].substr(colon + 1))});
    } else {
      if (fields.size() != 2) throw ParseError("attribute line " + id + " needs 2 tab-separated fields", line_no);
      const auto parts = split_spaces(fields[1]);
      if (parts.size() != 3) throw ParseError("attribute line " + id + " needs name, event id and value", line_no);
      attrs.push_back({line_no, std::string(parts[0]), std::string(parts[1]), std::string(parts[2])});
    }
  }

  const text::CodepointIndex index(doc_text);
  std::map<std::string, std::optional<std::size_t>> event_slot;  // E id -> position in result.events
  std::set<std::tuple<std::string, std::size_t, std::size_t>> seen_spans;
  for (const auto& ev : evs) {
    auto tb_it = tbs.find(ev.trigger_id);
    if (tb_it == tbs.end()) throw ParseError("event " + ev.id + " references missing " + ev.trigger_id, ev.line);
    const TextBound& tb = tb_it->second;
    event_slot[ev.id] = std::nullopt;
    if (tb.discontinuous) {
      result.warnings.push_back({ev.line, "event " + ev.id + " dropped: discontinuous trigger"});
      continue;
    }
    if (tb.start >= tb.end || tb.end > index.size()) {
      result.warnings.push_back({ev.line, "event " + ev.id + " dropped: trigger span out of bounds"});
      continue;
    }
    if (tb.label != ev.label) {
      result.warnings.push_back({ev.line, "event " + ev.id + " label differs from its trigger label"});
    }
    Event e;
    e.event_type = ev.label;
    e.trigger = {tb.start, tb.end, std::string(index.slice(tb.start, tb.end))};
    if (flatten(e.trigger.text) != flatten(tb.text)) {
      result.warnings.push_back({tb.line, "surface text of " + ev.trigger_id + " differs from the document"});
    }
    if (!seen_spans.emplace(e.event_type, e.trigger.start, e.trigger.end).second) {
      result.warnings.push_back({ev.line, "event " + ev.id + " dropped: duplicate event type on the same span"});
      continue;
    }
    event_slot[ev.id] = result.events.size();
    result.events.push_back(std::move(e));
  }

  for (const auto& a : attrs) {
    auto it = event_slot.find(a.event_id);
    if (it == event_slot.end()) throw ParseError("attribute references missing event " + a.event_id, a.line);
    if (!it->second) continue;
    Event& e = result.events[*it->second];
    if (!e.arguments.emplace(a.name, a.value).second) {
      result.warnings.push_back({a.line, "repeated attribute " + a.name + " on " + a.event_id + " ignored"});
    }
  }

  for (const auto& e : result.events) {
    for (const auto& v : validate_event(schema, e)) {
      result.warnings.push_back({0, e.event_type + " at [" + std::to_string(e.trigger.start) + "," +
                                        std::to_string(e.trigger.end) + "): " + v.message});
    }
  }
  return result;
}

std::string write_ann(const std::vector<Event>& events, std::string_view doc_text) {
  const text::CodepointIndex index(doc_text);
  std::string out;
  std::size_t attr_id = 0;
  for (std::size_t i = 0; i < events.size(); ++i) {
    const Event& e = events[i];
    const std::string n = std::to_string(i + 1);
    if (e.trigger.start >= e.trigger.end || e.trigger.end > index.size()) {
      throw ValidationError("event " + n + " trigger span out of bounds");
    }
    out += "T" + n + "\t" + e.event_type + " " + std::to_string(e.trigger.start) + " " +
           std::to_string(e.trigger.end) + "\t" + flatten(index.slice(e.trigger.start, e.trigger.end)) + "\n";
    out += "E" + n + "\t" + e.event_type + ":T" + n + "\n";
    for (const auto& [name, value] : e.arguments) {
      out += "A" + std::to_string(++attr_id) + "\t" + name + " E" + n + " " + value + "\n";
    }
  }
  return out;
}

std::string escape_stem(std::string_view doc_id) {
  static constexpr char hex[] = "0123456789ABCDEF";
  std::string out;
  for (std::size_t i = 0; i < doc_id.size(); ++i) {
    const auto c = static_cast<unsigned char>(doc_id[i]);
    const bool safe = (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_' ||
                      c == '-' || (c == '.' && i > 0);
    if (safe) {
      out.push_back(static_cast<char>(c));
    } else {
      out.push_back('%');
      out.push_back(hex[c >> 4]);
      out.push_back(hex[c & 0xF]);
    }
  }
  return out;
}

std::string unescape_stem(std::string_view stem) {
  std::string out;
  for (std::size_t i = 0; i < stem.size(); ++i) {
    if (stem[i] == '%' && i + 2 < stem.size()) {
      unsigned v = 0;
      auto [p, ec] = std::from_chars(stem.data() + i + 1, stem.data() + i + 3, v, 16);
      if (ec == std::errc() && p == stem.data() + i + 3) {
        out.push_back(static_cast<char>(v));
        i += 2;
        continue;
      }
    }
    out.push_back(stem[i]);
  }
  return out;
}

void export_dir(const Corpus& corpus, const std::string& dir) {
  fs::create_directories(dir);
  std::string sidecar;
  for (const auto& d : corpus.docs) {
    const std::string stem = escape_stem(d.id());
    write_file(fs::path(dir) / (stem + ".txt"), d.document.text);
    write_file(fs::path(dir) / (stem + ".ann"), write_ann(d.events, d.document.text));
    nlohmann::ordered_json j;
    j["doc_id"] = d.id();
    j["stem"] = stem;
    j["patient_id"] = d.document.patient_id;
    j["note_date"] = d.document.note_date ? nlohmann::ordered_json(*d.document.note_date) : nlohmann::ordered_json(nullptr);
    j["annotator_id"] = d.annotator_id ? nlohmann::ordered_json(*d.annotator_id) : nlohmann::ordered_json(nullptr);
    auto split = corpus.split_assignment.find(d.id());
    j["split"] = split != corpus.split_assignment.end() ? nlohmann::ordered_json(std::string(to_string(split->second)))
                                                       : nlohmann::ordered_json(nullptr);
    sidecar += j.dump() + "\n";
  }
  write_file(fs::path(dir) / "documents.jsonl", sidecar);
}

Corpus import_dir(const std::string& dir, const Schema& schema, std::vector<DocumentWarning>* warnings) {
  Corpus corpus;
  auto load_one = [&](AnnotatedDocument doc, const std::string& stem) {
    doc.document.text = read_file(fs::path(dir) / (stem + ".txt"));
    const fs::path ann = fs::path(dir) / (stem + ".ann");
    if (fs::exists(ann)) {
      ParseResult r;
      try {
        r = parse_ann(read_file(ann), doc.document.text, schema);
      } catch (const ParseError& e) {
        throw ParseError(stem + ".ann: " + e.what());
      }
      doc.events = std::move(r.events);
      if (warnings) {
        for (auto& w : r.warnings) warnings->push_back({doc.id(), std::move(w)});
      }
    }
    corpus.docs.push_back(std::move(doc));
  };

  const fs::path sidecar = fs::path(dir) / "documents.jsonl";
  if (fs::exists(sidecar)) {
    std::size_t line_no = 0;
    std::istringstream in(read_file(sidecar));
    for (std::string line; std::getline(in, line);) {
      ++line_no;
      if (text::trim(line).empty()) continue;
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(line);
        AnnotatedDocument doc;
        doc.document.doc_id = j.at("doc_id").get<std::string>();
        doc.document.patient_id = j.at("patient_id").get<std::string>();
        if (j.contains("note_date") && !j["note_date"].is_null()) doc.document.note_date = j["note_date"].get<std::string>();
        if (j.contains("annotator_id") && !j["annotator_id"].is_null()) doc.annotator_id = j["annotator_id"].get<std::string>();
        if (j.contains("split") && !j["split"].is_null()) {
          auto s = parse_split(j["split"].get<std::string>());
          if (!s) throw DataError("unknown split", line_no);
          corpus.split_assignment.emplace(doc.document.doc_id, *s);
        }
        load_one(std::move(doc), j.value("stem", escape_stem(j.at("doc_id").get<std::string>())));
      } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("documents.jsonl: ") + e.what(), line_no);
      }
    }
  } else {
    std::vector<std::string> stems;
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (entry.path().extension() == ".txt") stems.push_back(entry.path().stem().string());
    }
    std::sort(stems.begin(), stems.end());
    for (const auto& stem : stems) {
      AnnotatedDocument doc;
      doc.document.doc_id = unescape_stem(stem);
      doc.document.patient_id = doc.document.doc_id;
      load_one(std::move(doc), stem);
    }
  }
  return corpus;
}

}  // namespace sdoh::brat
