// SPDX-License-Identifier: Apache-2.0
#include "sdoh/corpus.hpp"
#include "sdoh/errors.hpp"
#include "sdoh/text.hpp"

namespace sdoh {

std::vector<HeadingRule> default_heading_rules() {
  return {
      {R"([A-Za-z][A-Za-z0-9 /&(),'-]{0,60}:)", false},
      {R"([A-Z][A-Z0-9 /&(),'-]{2,60})", false},
      {R"(social\s+(history|hx)\s*:?)", true},
  };
}

std::vector<HeadingRule> default_social_history_rules() {
  return {{R"(social\s+(history|hx)\s*:?)", true}};
}

HeadingMatcher::HeadingMatcher(const std::vector<HeadingRule>& rules) {
  for (const auto& r : rules) {
    auto flags = std::regex::ECMAScript | std::regex::optimize;
    if (r.case_insensitive) flags |= std::regex::icase;
    try {
      patterns_.emplace_back(r.pattern, flags);
    } catch (const std::regex_error& e) {
      throw ConfigError("invalid heading pattern \"" + r.pattern + "\": " + e.what());
    }
  }
}

bool HeadingMatcher::matches(std::string_view line) const {
  const std::string s(text::trim(line));
  if (s.empty()) return false;
  for (const auto& re : patterns_) {
    if (std::regex_match(s, re)) return true;
  }
  return false;
}

std::vector<Section> extract_sections(std::string_view text, const std::vector<HeadingRule>& rules) {
  if (rules.empty()) throw ConfigError("extract_sections needs at least one heading rule");
  const HeadingMatcher matcher(rules);
  const text::CodepointIndex index(text);

  struct Line {
    std::size_t start, end, next;  // code points; next is the start of the following line
  };
  std::vector<Line> headings;
  std::size_t cp = 0;
  const std::size_t n = index.size();
  while (cp < n) {
    std::size_t e = cp;
    while (e < n && index.slice(e, e + 1) != "\n") ++e;
    const std::size_t next = e < n ? e + 1 : n;
    if (matcher.matches(index.slice(cp, e))) headings.push_back({cp, e, next});
    cp = next;
  }

  std::vector<Section> out;
  for (std::size_t i = 0; i < headings.size(); ++i) {
    const Line& h = headings[i];
    Section s;
    s.heading_span = {h.start, h.end, std::string(index.slice(h.start, h.end))};
    s.heading = std::string(text::trim(s.heading_span.text));
    s.start = h.next;
    s.end = i + 1 < headings.size() ? headings[i + 1].start : n;
    s.body = std::string(index.slice(s.start, s.end));
    out.push_back(std::move(s));
  }
  return out;
}

std::optional<Section> select_social_history(const std::vector<Section>& sections,
                                             const std::vector<HeadingRule>& rules) {
  const HeadingMatcher matcher(rules);
  for (const auto& s : sections) {
    if (matcher.matches(s.heading)) return s;
  }
  return std::nullopt;
}

}  // namespace sdoh
