// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sdoh/scoring.hpp"

namespace sdoh {

/// Which F1 the test compares. `key` selects a per-key row (e.g. "Alcohol",
/// "LivingArrangement.Residence") or a report group ("SubstanceUse");
/// nullopt means the micro average of the level. `combined` pools trigger
/// and argument counts and ignores `level`.
struct Metric {
  Level level = Level::Trigger;
  std::optional<std::string> key;
  bool combined = false;

  std::string describe() const;
};

struct BootstrapResult {
  double observed_delta = 0.0;  // F1(A) - F1(B)
  double p_value = 1.0;
  std::size_t n_resamples = 0;
  std::uint64_t seed = 0;
  Metric metric;
  std::size_t exceed_count = 0;  // resamples with delta_i > 2 * observed_delta

  bool significant(double alpha = 0.05) const { return p_value < alpha; }
};

inline constexpr std::size_t kDefaultResamples = 10000;

/// Counts of one document for the chosen metric.
Counts metric_counts(const DocumentCounts& dc, const Metric& metric, const Schema& schema);

/// Micro F1 of summed counts.
double metric_f1(const std::vector<Counts>& per_doc, const std::vector<std::size_t>& draw);

/// Document indices of resample `index`: n draws with replacement from a
/// stream derived from (seed, index), independent of scheduling.
std::vector<std::size_t> resample_indices(std::uint64_t seed, std::size_t index, std::size_t n_docs);

/// Paired bootstrap over documents with the shift-corrected null:
/// p = (#{delta_i > 2 delta} + 1) / (n + 1) when delta > 0, else 1.
/// Throws ValidationError when the corpora cover different documents or
/// n_resamples < 1. `threads == 0` picks the hardware concurrency.
BootstrapResult bootstrap_test(const Corpus& gold, const Corpus& pred_a, const Corpus& pred_b,
                               const Schema& schema, const Metric& metric, std::size_t n_resamples,
                               std::uint64_t seed, unsigned threads = 0);

/// Same test on pre-computed per-document counts (the cached path).
BootstrapResult bootstrap_from_counts(const std::vector<Counts>& a, const std::vector<Counts>& b,
                                      const Metric& metric, std::size_t n_resamples, std::uint64_t seed,
                                      unsigned threads = 0);

std::string result_to_json(const BootstrapResult& r);

}  // namespace sdoh
