// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sdoh {

struct Event;

struct ArgumentDef {
  std::string name;
  bool required = false;
  std::vector<std::string> subtypes;

  bool has_subtype(std::string_view s) const;
  bool operator==(const ArgumentDef&) const = default;
};

struct EventTypeDef {
  std::string name;
  std::vector<ArgumentDef> arguments;
  /// Always populated after loading; an omitted group defaults to `name`.
  std::string report_group;
  /// Placeholder types whose contents are not attested.
  bool provisional = false;

  const ArgumentDef* find_argument(std::string_view arg) const;
  bool operator==(const EventTypeDef&) const = default;
};

/// Immutable, validated event schema. Construct through load_schema(),
/// default_schema() or Schema::from_types().
class Schema {
 public:
  Schema() = default;

  /// Validates and indexes. Throws ValidationError naming the offending entity.
  static Schema from_types(std::string version, std::vector<EventTypeDef> types);

  const std::string& version() const { return version_; }
  const std::vector<EventTypeDef>& event_types() const { return types_; }
  const EventTypeDef* find(std::string_view event_type) const;
  /// Position of an event type in declaration order, or size() if unknown.
  std::size_t order_of(std::string_view event_type) const;
  std::size_t size() const { return types_.size(); }

  /// Report groups in order of first appearance.
  std::vector<std::string> report_groups() const;
  const std::string& group_of(std::string_view event_type) const;

  bool operator==(const Schema& o) const { return version_ == o.version_ && types_ == o.types_; }

 private:
  std::string version_;
  std::vector<EventTypeDef> types_;
  std::map<std::string, std::size_t, std::less<>> index_;
};

/// Parses the JSON schema file format. Throws ParseError or ValidationError.
Schema load_schema(std::string_view source);
Schema load_schema_file(const std::string& path);

/// Byte-stable inverse of load_schema: declaration order, 2-space indent, trailing newline.
std::string write_schema(const Schema& schema);

/// The bundled schema (same content as data/default_schema.json).
const Schema& default_schema();
std::string_view default_schema_text();

struct Violation {
  enum class Kind { UnknownEventType, UnknownArgument, UnknownSubtype, MissingRequired };
  Kind kind;
  std::string message;
};

/// Empty result means the event conforms. Never throws.
std::vector<Violation> validate_event(const Schema& schema, const Event& event);

/// Identifiers are case-sensitive ASCII: a letter followed by letters, digits or '_'.
bool is_identifier(std::string_view s);
/// Subtype labels additionally allow '-' and may start with a digit.
bool is_subtype_label(std::string_view s);

}  // namespace sdoh
