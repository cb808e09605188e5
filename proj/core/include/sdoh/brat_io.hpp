// SPDX-License-Identifier: Apache-2.0
#pragma once

// BRAT standoff (.ann next to .txt). Arguments are attributes on the event
// line, never separate spans, so only T, E and A lines carry meaning.

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "sdoh/corpus.hpp"

namespace sdoh {

class Schema;

namespace brat {

struct Warning {
  std::size_t line = 0;  // 0 when not tied to one line
  std::string message;
};

struct ParseResult {
  std::vector<Event> events;
  std::vector<Warning> warnings;
};

/// Events in E-line order. Span problems, surface mismatches and schema
/// violations become warnings; structural damage (field counts, dangling
/// ids, relation lines) throws ParseError with the line number.
ParseResult parse_ann(std::string_view ann_text, std::string_view doc_text, const Schema& schema);

/// Sequential T/E/A ids in event order. Throws ValidationError if a trigger
/// does not fit the text.
std::string write_ann(const std::vector<Event>& events, std::string_view doc_text);

/// File stem used for a document id; reversible with unescape_stem().
std::string escape_stem(std::string_view doc_id);
std::string unescape_stem(std::string_view stem);

struct DocumentWarning {
  std::string doc_id;
  Warning warning;
};

/// Writes <stem>.txt and <stem>.ann per document plus a documents.jsonl
/// sidecar that keeps metadata BRAT has no place for.
void export_dir(const Corpus& corpus, const std::string& dir);

/// Reads a directory written by export_dir(). Without a sidecar, every
/// *.txt becomes a document whose patient id is its doc id.
Corpus import_dir(const std::string& dir, const Schema& schema, std::vector<DocumentWarning>* warnings = nullptr);

}  // namespace brat
}  // namespace sdoh
