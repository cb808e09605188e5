// SPDX-License-Identifier: Apache-2.0
#include <fstream>
#include <regex>
#include <sstream>

#include "sdoh/errors.hpp"
#include "sdoh/qa_pipeline.hpp"
#include "sdoh/text.hpp"

namespace sdoh {
namespace detail {
extern const std::string_view kDefaultGuideText;
}

GuideBook GuideBook::parse(std::string_view input) {
  static const std::regex header(R"(\[([A-Za-z][A-Za-z0-9_]*(?:\.[A-Za-z][A-Za-z0-9_]*)?)\])");
  if (!text::is_valid_utf8(input)) throw ParseError("guide file is not valid UTF-8");
  GuideBook g;
  std::string key;
  std::string body;
  std::size_t line_no = 0;
  auto flush = [&] {
    if (key.empty()) return;
    g.entries_[key] = std::string(text::trim(body));
  };
  std::size_t pos = 0;
  while (pos <= input.size()) {
    auto nl = input.find('\n', pos);
    if (nl == std::string_view::npos) nl = input.size();
    std::string_view line = input.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    ++line_no;
    pos = nl + 1;
    const std::string_view t = text::trim(line);
    std::cmatch m;
    if (!t.empty() && t.front() == '[') {
      if (!std::regex_match(t.begin(), t.end(), m, header)) throw ParseError("malformed section header", line_no);
      flush();
      key = m[1].str();
      if (g.entries_.count(key)) throw ParseError("duplicate section [" + key + "]", line_no);
      body.clear();
      continue;
    }
    if (key.empty()) {
      if (!t.empty()) throw ParseError("text before the first section header", line_no);
      continue;
    }
    body.append(line);
    body.push_back('\n');
  }
  flush();
  return g;
}

GuideBook GuideBook::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open guide file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

const GuideBook& GuideBook::bundled() {
  static const GuideBook g = parse(detail::kDefaultGuideText);
  return g;
}

std::optional<std::string> GuideBook::describe(std::string_view event_type) const {
  auto it = entries_.find(event_type);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::string> GuideBook::describe(std::string_view event_type, std::string_view argument) const {
  auto it = entries_.find(std::string(event_type) + "." + std::string(argument));
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::string> GuideBook::trigger_text(std::string_view event_type) const {
  auto d = describe(event_type);
  if (!d) return std::nullopt;
  return std::string(event_type) + ": " + *d;
}

std::optional<std::string> GuideBook::argument_text(std::string_view event_type, std::string_view argument) const {
  auto t = describe(event_type);
  auto a = describe(event_type, argument);
  if (!t && !a) return std::nullopt;
  std::string out;
  if (t) out += std::string(event_type) + ": " + *t;
  if (a) {
    if (!out.empty()) out += "\n";
    out += std::string(argument) + ": " + *a;
  }
  return out;
}

}  // namespace sdoh
