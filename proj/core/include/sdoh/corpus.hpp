// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

namespace sdoh {

class Schema;

/// Half-open code-point interval [start, end) with the covered text.
struct TextSpan {
  std::size_t start = 0;
  std::size_t end = 0;
  std::string text;

  std::size_t length() const { return end - start; }
  bool operator==(const TextSpan&) const = default;
};

/// Shared characters between two half-open spans; touching spans share none.
std::size_t overlap(const TextSpan& a, const TextSpan& b);

/// Arguments share the trigger's span, so each one is just name -> subtype.
struct Event {
  std::string event_type;
  TextSpan trigger;
  std::map<std::string, std::string> arguments;

  bool operator==(const Event&) const = default;
};

/// Ordering used whenever events are emitted: start, end, then type name.
bool event_order(const Event& a, const Event& b);

struct Document {
  std::string doc_id;
  std::string patient_id;
  std::optional<std::string> note_date;
  std::string text;

  bool operator==(const Document&) const = default;
};

struct AnnotatedDocument {
  Document document;
  std::vector<Event> events;
  std::optional<std::string> annotator_id;

  const std::string& id() const { return document.doc_id; }
  bool operator==(const AnnotatedDocument&) const = default;
};

enum class Split { Train, Validation, Test };
std::string_view to_string(Split s);
std::optional<Split> parse_split(std::string_view s);

struct Corpus {
  std::vector<AnnotatedDocument> docs;
  std::map<std::string, Split> split_assignment;

  const AnnotatedDocument* find(std::string_view doc_id) const;
  std::size_t event_count() const;
  /// Documents assigned to `split`, in corpus order.
  Corpus subset(Split split) const;
  bool operator==(const Corpus&) const = default;
};

/// Problems with one annotated document; empty when every invariant holds.
/// Messages never quote document text.
std::vector<std::string> check_document(const AnnotatedDocument& doc, const Schema* schema);

/// Throws ValidationError on duplicate doc ids, overlapping splits or any
/// document-level problem.
void check_corpus(const Corpus& corpus, const Schema* schema);

// --- JSONL persistence -----------------------------------------------------

std::string write_corpus_jsonl(const Corpus& corpus);
void write_corpus_file(const Corpus& corpus, const std::string& path);

/// One AnnotatedDocument per line. Throws DataError carrying the line number
/// for malformed JSON or violated invariants. Blank lines are skipped.
Corpus read_corpus_jsonl(std::string_view jsonl, const Schema* schema = nullptr);
Corpus read_corpus_file(const std::string& path, const Schema* schema = nullptr);

// --- Sections --------------------------------------------------------------

struct HeadingRule {
  std::string pattern;
  bool case_insensitive = false;
};

/// Compiled list of line-anchored heading patterns.
class HeadingMatcher {
 public:
  explicit HeadingMatcher(const std::vector<HeadingRule>& rules);
  bool matches(std::string_view line) const;
  bool empty() const { return patterns_.empty(); }

 private:
  std::vector<std::regex> patterns_;
};

struct Section {
  std::string heading;
  /// The heading line itself, without its line terminator.
  TextSpan heading_span;
  /// Body offsets; start == end for a heading on the last line.
  std::size_t start = 0;
  std::size_t end = 0;
  std::string body;

  bool operator==(const Section&) const = default;
};

/// Generic section headings ("HPI:", "SOCIAL HISTORY", "Social Hx:").
std::vector<HeadingRule> default_heading_rules();
/// Social-history headings with optional trailing colon.
std::vector<HeadingRule> default_social_history_rules();

/// Each section runs from its heading line to the next heading line or the
/// end of text. Text before the first heading belongs to no section.
std::vector<Section> extract_sections(std::string_view text, const std::vector<HeadingRule>& rules);
std::optional<Section> select_social_history(const std::vector<Section>& sections,
                                             const std::vector<HeadingRule>& rules);

// --- Sampling --------------------------------------------------------------

/// Keeps one uniformly chosen document per patient, in original order.
Corpus dedup_per_patient(const Corpus& corpus, std::uint64_t seed);

/// Uniform sample of n documents without replacement, in original order.
Corpus sample_documents(const Corpus& corpus, std::size_t n, std::uint64_t seed);

struct SplitSizes {
  std::size_t train = 0;
  std::size_t validation = 0;
  std::size_t test = 0;
};

/// Disjoint random assignment; documents beyond the requested sizes stay
/// unassigned. Throws ValidationError when the sizes exceed the corpus.
Corpus split_corpus(const Corpus& corpus, SplitSizes sizes, std::uint64_t seed);

/// Template-generated social-history notes with 0-5 gold events each.
/// Every trigger text occurs exactly once in its note, so first-occurrence
/// grounding recovers the gold offsets. The first min(n/2, 2 * types)
/// notes each carry two triggers of one type, cycling through the schema.
Corpus generate_synthetic(const Schema& schema, std::size_t n_docs, std::uint64_t seed);

}  // namespace sdoh
