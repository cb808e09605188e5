// SPDX-License-Identifier: Apache-2.0
#pragma once

// Shared fixtures, random instance generators and independent reference
// implementations used to cross-check the library.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "sdoh/corpus.hpp"
#include "sdoh/random.hpp"
#include "sdoh/schema.hpp"
#include "sdoh/scoring.hpp"

namespace sdoh::testing {

class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

/// Event with its trigger text taken from `text` at code-point offsets.
Event make_event(const std::string& text, const std::string& type, std::size_t start, std::size_t end,
                 std::map<std::string, std::string> args = {});
AnnotatedDocument make_doc(const std::string& id, const std::string& text, std::vector<Event> events = {});

/// Arguments for an event of `type`: every required argument, each optional
/// one with probability 1/2, subtypes uniform.
std::map<std::string, std::string> random_arguments(const Schema& schema, const std::string& type, Rng& rng);

/// Random valid annotated documents: mixed ASCII and non-ASCII text with
/// line breaks, overlapping and nested triggers, random metadata and
/// doc ids that need escaping on disk.
Corpus random_corpus(const Schema& schema, std::size_t n_docs, Rng& rng);

struct LinearizerCase {
  std::string text;
  std::vector<Event> events;  // canonical order
};
/// Document plus events whose triggers avoid the reserved tokens and whose
/// first unclaimed occurrence per type is the annotated one.
LinearizerCase random_linearizer_case(const Schema& schema, Rng& rng);

/// Canonical event order used by serialize_events: (start, end, schema order).
void sort_canonical(std::vector<Event>& events, const Schema& schema);

// --- reference implementations ------------------------------------------

namespace oracle {

/// Counts under the matching that lexicographically maximizes
/// (trigger TP, argument TP, event TP) over every one-to-one assignment of
/// equivalent pairs.
DocumentCounts exhaustive_counts(const std::vector<Event>& gold, const std::vector<Event>& pred);

/// Counts under an explicit matching, straight from the metric definitions.
DocumentCounts counts_for_matching(const std::vector<Event>& gold, const std::vector<Event>& pred,
                                   const std::vector<std::pair<std::size_t, std::size_t>>& pairs);

/// Drops zero entries so maps built in different ways compare equal.
CountMap normalized(const CountMap& m);

/// Textbook full-matrix edit distance over code points.
std::size_t levenshtein(const std::u32string& a, const std::u32string& b);

double f1(const Counts& c);

}  // namespace oracle

}  // namespace sdoh::testing
