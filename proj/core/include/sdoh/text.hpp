// SPDX-License-Identifier: Apache-2.0
#pragma once

// UTF-8 helpers. All offsets exposed by the library count Unicode scalar
// values, never bytes.

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace sdoh::text {

bool is_valid_utf8(std::string_view s);

/// Throws ParseError on malformed input.
std::u32string decode(std::string_view utf8);

/// Malformed sequences become U+FFFD. Used for untrusted model output.
std::u32string decode_lenient(std::string_view utf8);

std::string encode(std::u32string_view cps);
std::string encode(char32_t cp);

std::size_t length(std::string_view utf8);

/// Simple one-to-one case folding (ASCII, Latin-1, Latin Extended-A, Greek, Cyrillic).
char32_t fold(char32_t c);
std::u32string fold(std::u32string_view s);

bool is_space(char32_t c);
bool is_punct(char32_t c);
/// Letters and digits; every non-ASCII code point that is not space or
/// punctuation is treated as a word character.
bool is_word(char32_t c);

std::string_view trim(std::string_view s);
std::string ascii_lower(std::string_view s);

/// Random access by code-point index into a UTF-8 string.
class CodepointIndex {
 public:
  explicit CodepointIndex(std::string_view utf8);

  std::size_t size() const { return offsets_.size() - 1; }
  /// Substring of code points [start, end); requires start <= end <= size().
  std::string_view slice(std::size_t start, std::size_t end) const;
  std::size_t byte_offset(std::size_t cp) const { return offsets_.at(cp); }

 private:
  std::string_view text_;
  std::vector<std::size_t> offsets_;
};

}  // namespace sdoh::text
