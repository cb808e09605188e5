// SPDX-License-Identifier: Apache-2.0
#include "sdoh/schema.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "sdoh/corpus.hpp"
#include "sdoh/errors.hpp"

namespace sdoh {
namespace detail {
extern const std::string_view kDefaultSchemaJson;
}

namespace {

using ojson = nlohmann::ordered_json;

bool ascii_letter(char c) { return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z'); }
bool ascii_digit(char c) { return c >= '0' && c <= '9'; }

const ojson& member(const ojson& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(where + ": missing key \"" + key + "\"");
  return *it;
}

std::string string_member(const ojson& obj, const char* key, const std::string& where) {
  const ojson& v = member(obj, key, where);
  if (!v.is_string()) throw ParseError(where + ": \"" + key + "\" must be a string");
  return v.get<std::string>();
}

ArgumentDef parse_argument(const ojson& j, const std::string& where) {
  if (!j.is_object()) throw ParseError(where + ": argument must be an object");
  ArgumentDef a;
  a.name = string_member(j, "name", where);
  const std::string here = where + " argument " + a.name;
  const ojson& req = member(j, "required", here);
  if (!req.is_boolean()) throw ParseError(here + ": \"required\" must be a boolean");
  a.required = req.get<bool>();
  const ojson& subs = member(j, "subtypes", here);
  if (!subs.is_array()) throw ParseError(here + ": \"subtypes\" must be an array");
  for (const auto& s : subs) {
    if (!s.is_string()) throw ParseError(here + ": subtype labels must be strings");
    a.subtypes.push_back(s.get<std::string>());
  }
  return a;
}

EventTypeDef parse_event_type(const ojson& j, std::size_t pos) {
  const std::string where0 = "event_types[" + std::to_string(pos) + "]";
  if (!j.is_object()) throw ParseError(where0 + " must be an object");
  EventTypeDef t;
  t.name = string_member(j, "name", where0);
  const std::string where = "event type " + t.name;
  if (auto it = j.find("report_group"); it != j.end() && !it->is_null()) {
    if (!it->is_string()) throw ParseError(where + ": \"report_group\" must be a string");
    t.report_group = it->get<std::string>();
  }
  if (auto it = j.find("provisional"); it != j.end()) {
    if (!it->is_boolean()) throw ParseError(where + ": \"provisional\" must be a boolean");
    t.provisional = it->get<bool>();
  }
  const ojson& args = member(j, "arguments", where);
  if (!args.is_array()) throw ParseError(where + ": \"arguments\" must be an array");
  for (const auto& a : args) t.arguments.push_back(parse_argument(a, where));
  return t;
}

void validate_argument(const EventTypeDef& t, const ArgumentDef& a) {
  const std::string where = "argument " + t.name + "." + a.name;
  if (!is_identifier(a.name)) throw ValidationError(where + ": invalid identifier");
  if (a.subtypes.empty()) throw ValidationError(where + ": empty subtype list");
  std::set<std::string_view> seen;
  for (const auto& s : a.subtypes) {
    if (s.empty()) throw ValidationError(where + ": empty subtype label");
    if (!is_subtype_label(s)) throw ValidationError(where + ": invalid subtype label \"" + s + "\"");
    if (!seen.insert(s).second) throw ValidationError(where + ": duplicate subtype \"" + s + "\"");
    if (!a.required && s == "none") {
      throw ValidationError(where + ": optional arguments may not declare the reserved subtype \"none\"");
    }
  }
}

}  // namespace

bool is_identifier(std::string_view s) {
  if (s.empty() || !ascii_letter(s.front())) return false;
  for (char c : s) {
    if (!ascii_letter(c) && !ascii_digit(c) && c != '_') return false;
  }
  return true;
}

bool is_subtype_label(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!ascii_letter(c) && !ascii_digit(c) && c != '_' && c != '-') return false;
  }
  return true;
}

bool ArgumentDef::has_subtype(std::string_view s) const {
  for (const auto& x : subtypes) {
    if (x == s) return true;
  }
  return false;
}

const ArgumentDef* EventTypeDef::find_argument(std::string_view arg) const {
  for (const auto& a : arguments) {
    if (a.name == arg) return &a;
  }
  return nullptr;
}

Schema Schema::from_types(std::string version, std::vector<EventTypeDef> types) {
  Schema s;
  s.version_ = std::move(version);
  for (std::size_t i = 0; i < types.size(); ++i) {
    EventTypeDef& t = types[i];
    if (!is_identifier(t.name)) throw ValidationError("event type \"" + t.name + "\": invalid identifier");
    if (t.report_group.empty()) t.report_group = t.name;
    if (!is_identifier(t.report_group)) {
      throw ValidationError("event type " + t.name + ": invalid report_group \"" + t.report_group + "\"");
    }
    if (!s.index_.emplace(t.name, i).second) {
      throw ValidationError("duplicate event type \"" + t.name + "\"");
    }
    std::set<std::string_view> arg_names;
    for (const auto& a : t.arguments) {
      validate_argument(t, a);
      if (!arg_names.insert(a.name).second) {
        throw ValidationError("event type " + t.name + ": duplicate argument \"" + a.name + "\"");
      }
    }
  }
  s.types_ = std::move(types);
  return s;
}

const EventTypeDef* Schema::find(std::string_view event_type) const {
  auto it = index_.find(event_type);
  return it == index_.end() ? nullptr : &types_[it->second];
}

std::size_t Schema::order_of(std::string_view event_type) const {
  auto it = index_.find(event_type);
  return it == index_.end() ? types_.size() : it->second;
}

std::vector<std::string> Schema::report_groups() const {
  std::vector<std::string> out;
  for (const auto& t : types_) {
    bool seen = false;
    for (const auto& g : out) seen = seen || g == t.report_group;
    if (!seen) out.push_back(t.report_group);
  }
  return out;
}

const std::string& Schema::group_of(std::string_view event_type) const {
  static const std::string empty;
  const EventTypeDef* t = find(event_type);
  return t ? t->report_group : empty;
}

Schema load_schema(std::string_view source) {
  ojson j;
  try {
    j = ojson::parse(source);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("schema is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("schema top level must be an object");
  const std::string version = string_member(j, "version", "schema");
  const ojson& types = member(j, "event_types", "schema");
  if (!types.is_array()) throw ParseError("schema: \"event_types\" must be an array");
  std::vector<EventTypeDef> defs;
  for (std::size_t i = 0; i < types.size(); ++i) defs.push_back(parse_event_type(types[i], i));
  return Schema::from_types(version, std::move(defs));
}

Schema load_schema_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open schema file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_schema(ss.str());
}

std::string write_schema(const Schema& schema) {
  ojson j;
  j["version"] = schema.version();
  j["event_types"] = ojson::array();
  for (const auto& t : schema.event_types()) {
    ojson jt;
    jt["name"] = t.name;
    jt["report_group"] = t.report_group;
    if (t.provisional) jt["provisional"] = true;
    jt["arguments"] = ojson::array();
    for (const auto& a : t.arguments) {
      ojson ja;
      ja["name"] = a.name;
      ja["required"] = a.required;
      ja["subtypes"] = a.subtypes;
      jt["arguments"].push_back(std::move(ja));
    }
    j["event_types"].push_back(std::move(jt));
  }
  return j.dump(2) + "\n";
}

std::string_view default_schema_text() { return detail::kDefaultSchemaJson; }

const Schema& default_schema() {
  static const Schema s = load_schema(detail::kDefaultSchemaJson);
  return s;
}

std::vector<Violation> validate_event(const Schema& schema, const Event& event) {
  std::vector<Violation> out;
  const EventTypeDef* t = schema.find(event.event_type);
  if (t == nullptr) {
    out.push_back({Violation::Kind::UnknownEventType, "unknown event type " + event.event_type});
    return out;
  }
  for (const auto& [name, subtype] : event.arguments) {
    const ArgumentDef* a = t->find_argument(name);
    if (a == nullptr) {
      out.push_back({Violation::Kind::UnknownArgument,
                     "unknown argument " + name + " for event type " + t->name});
    } else if (!a->has_subtype(subtype)) {
      out.push_back({Violation::Kind::UnknownSubtype,
                     "unknown subtype " + subtype + " for argument " + t->name + "." + name});
    }
  }
  for (const auto& a : t->arguments) {
    if (a.required && event.arguments.find(a.name) == event.arguments.end()) {
      out.push_back({Violation::Kind::MissingRequired, "missing required argument " + a.name});
    }
  }
  return out;
}

}  // namespace sdoh
