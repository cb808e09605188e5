// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <limits>
#include <tuple>
#include <vector>

#include "sdoh/linearizer.hpp"
#include "sdoh/text.hpp"

namespace sdoh {
namespace {

// Case-folded text with whitespace runs collapsed to one space; orig[i] is
// the code-point offset in the source of normalized character i.
struct Normalized {
  std::u32string chars;
  std::vector<std::size_t> orig;
};

Normalized normalize_doc(std::u32string_view cps) {
  Normalized n;
  n.chars.reserve(cps.size());
  n.orig.reserve(cps.size());
  for (std::size_t i = 0; i < cps.size(); ++i) {
    if (text::is_space(cps[i])) {
      if (!n.chars.empty() && n.chars.back() == U' ') continue;
      n.chars.push_back(U' ');
    } else {
      n.chars.push_back(text::fold(cps[i]));
    }
    n.orig.push_back(i);
  }
  return n;
}

std::u32string normalize_claimed(std::u32string_view cps) {
  std::u32string out;
  for (char32_t c : cps) {
    if (text::is_space(c)) {
      if (!out.empty() && out.back() != U' ') out.push_back(U' ');
    } else {
      out.push_back(text::fold(c));
    }
  }
  auto edge = [](char32_t c) { return c == U' ' || text::is_punct(c); };
  while (!out.empty() && edge(out.back())) out.pop_back();
  std::size_t b = 0;
  while (b < out.size() && edge(out[b])) ++b;
  return out.substr(b);
}

bool word_aligned(std::u32string_view cps, std::size_t start, std::size_t end) {
  const bool left = start == 0 || !text::is_word(cps[start - 1]) || !text::is_word(cps[start]);
  const bool right = end == cps.size() || !text::is_word(cps[end]) || !text::is_word(cps[end - 1]);
  return left && right;
}

struct Candidate {
  std::size_t start = 0;  // source offsets
  std::size_t end = 0;
  std::size_t dist = std::numeric_limits<std::size_t>::max();
  std::size_t len_gap = 0;
  bool found = false;

  auto rank() const { return std::make_tuple(dist, start, len_gap, end); }
  void offer(const Candidate& c) {
    if (!found || c.rank() < rank()) *this = c;
  }
};

}  // namespace

std::optional<TextSpan> repair_span(std::string_view claimed, std::string_view doc_text, double max_norm_dist) {
  const std::u32string doc = text::decode_lenient(doc_text);
  const std::u32string needle = normalize_claimed(text::decode_lenient(claimed));
  if (needle.empty() || doc.empty()) return std::nullopt;
  const Normalized hay = normalize_doc(doc);
  const std::size_t m = needle.size();

  auto source_span = [&](std::size_t i, std::size_t j) {  // normalized [i, j) -> source [s, e)
    return std::make_pair(hay.orig[i], hay.orig[j - 1] + 1);
  };

  Candidate exact_aligned, exact_any, fuzzy_aligned, fuzzy_any;
  for (std::size_t pos = hay.chars.find(needle); pos != std::u32string::npos;
       pos = hay.chars.find(needle, pos + 1)) {
    auto [s, e] = source_span(pos, pos + m);
    Candidate c{s, e, 0, 0, true};
    exact_any.offer(c);
    if (word_aligned(doc, s, e)) exact_aligned.offer(c);
  }

  if (!exact_aligned.found) {
    const std::size_t min_len = std::max<std::size_t>(1, (m + 1) / 2);
    const std::size_t max_len = m + m / 2;
    std::vector<std::size_t> prev(m + 1), cur(m + 1);
    for (std::size_t i = 0; i < hay.chars.size(); ++i) {
      // the needle has its edges stripped, candidates get the same treatment
      if (hay.chars[i] == U' ' || text::is_punct(hay.chars[i])) continue;
      for (std::size_t k = 0; k <= m; ++k) prev[k] = k;
      for (std::size_t len = 1; len <= max_len && i + len <= hay.chars.size(); ++len) {
        const char32_t c = hay.chars[i + len - 1];
        cur[0] = len;
        for (std::size_t k = 1; k <= m; ++k) {
          cur[k] = std::min({prev[k] + 1, cur[k - 1] + 1, prev[k - 1] + (needle[k - 1] == c ? 0 : 1)});
        }
        std::swap(prev, cur);
        if (len < min_len || c == U' ' || text::is_punct(c)) continue;
        const std::size_t dist = prev[m];
        if (static_cast<double>(dist) > max_norm_dist * static_cast<double>(std::max(m, len))) continue;
        auto [s, e] = source_span(i, i + len);
        Candidate cand{s, e, dist, len > m ? len - m : m - len, true};
        fuzzy_any.offer(cand);
        if (word_aligned(doc, s, e)) fuzzy_aligned.offer(cand);
      }
    }
  }

  const Candidate* best = nullptr;
  for (const Candidate* c : {&exact_aligned, &fuzzy_aligned, &exact_any, &fuzzy_any}) {
    if (c->found) {
      best = c;
      break;
    }
  }
  if (best == nullptr) return std::nullopt;
  const text::CodepointIndex index(doc_text);
  if (index.size() != doc.size()) {
    // Malformed UTF-8 in the document: offsets would not line up.
    return std::nullopt;
  }
  return TextSpan{best->start, best->end, std::string(index.slice(best->start, best->end))};
}

SpanGrounder::SpanGrounder(std::string_view doc_text) : doc_(doc_text), cps_(text::decode_lenient(doc_text)) {}

std::optional<SpanGrounder::Result> SpanGrounder::ground(std::string_view claimed, const std::string& key,
                                                         const RepairPolicy& repair) {
  const std::u32string needle = text::decode_lenient(claimed);
  if (needle.empty()) return std::nullopt;
  for (std::size_t pos = cps_.find(needle); pos != std::u32string::npos; pos = cps_.find(needle, pos + 1)) {
    if (claimed_.emplace(key, pos).second) {
      return Result{TextSpan{pos, pos + needle.size(), text::encode(needle)}, false};
    }
  }
  if (!repair.enabled) return std::nullopt;
  auto fixed = repair_span(claimed, doc_, repair.max_norm_dist);
  if (!fixed || !claimed_.emplace(key, fixed->start).second) return std::nullopt;
  return Result{std::move(*fixed), true};
}

}  // namespace sdoh
