// SPDX-License-Identifier: Apache-2.0
#include "sdoh/significance.hpp"

#include <algorithm>
#include <atomic>
#include <set>
#include <thread>

#include <nlohmann/json.hpp>

#include "sdoh/errors.hpp"
#include "sdoh/random.hpp"
#include "sdoh/schema.hpp"

namespace sdoh {
namespace {

bool key_selected(const ScoreKey& k, const std::string& want, const Schema& schema) {
  if (k.name() == want) return true;
  if (!k.argument.empty() && k.event_type == want) return true;
  const std::string& group = schema.group_of(k.event_type);
  if (group.empty()) return false;
  return group == want || (!k.argument.empty() && group + "." + k.argument == want);
}

Counts select(const CountMap& m, const Metric& metric, const Schema& schema) {
  Counts c;
  for (const auto& [k, v] : m) {
    if (!metric.key || key_selected(k, *metric.key, schema)) c += v;
  }
  return c;
}

void check_same_docs(const Corpus& gold, const Corpus& other, const char* name) {
  std::set<std::string_view> g, o;
  for (const auto& d : gold.docs) g.insert(d.id());
  for (const auto& d : other.docs) o.insert(d.id());
  if (g != o) throw ValidationError(std::string("gold and ") + name + " cover different documents");
}

}  // namespace

std::string Metric::describe() const {
  std::string s = combined ? "combined" : std::string(to_string(level));
  return s + ":" + (key ? *key : "micro");
}

Counts metric_counts(const DocumentCounts& dc, const Metric& metric, const Schema& schema) {
  if (metric.combined) return select(dc.trigger, metric, schema) + select(dc.argument, metric, schema);
  return select(dc.level(metric.level), metric, schema);
}

double metric_f1(const std::vector<Counts>& per_doc, const std::vector<std::size_t>& draw) {
  Counts sum;
  for (std::size_t i : draw) sum += per_doc[i];
  return prf(sum).f1;
}

std::vector<std::size_t> resample_indices(std::uint64_t seed, std::size_t index, std::size_t n_docs) {
  Rng rng(derive_seed(seed, static_cast<std::uint64_t>(index)));
  std::vector<std::size_t> draw(n_docs);
  for (auto& d : draw) d = uniform_index(rng, n_docs);
  return draw;
}

BootstrapResult bootstrap_from_counts(const std::vector<Counts>& a, const std::vector<Counts>& b,
                                      const Metric& metric, std::size_t n_resamples, std::uint64_t seed,
                                      unsigned threads) {
  if (n_resamples < 1) throw ValidationError("n_resamples must be at least 1");
  if (a.size() != b.size()) throw ValidationError("per-document counts differ in length");
  BootstrapResult r;
  r.metric = metric;
  r.seed = seed;
  r.n_resamples = n_resamples;

  std::vector<std::size_t> all(a.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  r.observed_delta = metric_f1(a, all) - metric_f1(b, all);
  if (!(r.observed_delta > 0.0)) {
    r.p_value = 1.0;
    return r;
  }

  const double threshold = 2.0 * r.observed_delta;
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n_resamples));
  std::atomic<std::size_t> exceed{0};
  auto work = [&](std::size_t begin, std::size_t end) {
    std::size_t local = 0;
    for (std::size_t i = begin; i < end; ++i) {
      const auto draw = resample_indices(seed, i, a.size());
      if (metric_f1(a, draw) - metric_f1(b, draw) > threshold) ++local;
    }
    exceed += local;
  };
  if (threads <= 1) {
    work(0, n_resamples);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (n_resamples + threads - 1) / threads;
    for (std::size_t begin = 0; begin < n_resamples; begin += chunk) {
      pool.emplace_back(work, begin, std::min(n_resamples, begin + chunk));
    }
    for (auto& t : pool) t.join();
  }
  r.exceed_count = exceed.load();
  r.p_value = static_cast<double>(r.exceed_count + 1) / static_cast<double>(n_resamples + 1);
  return r;
}

BootstrapResult bootstrap_test(const Corpus& gold, const Corpus& pred_a, const Corpus& pred_b,
                               const Schema& schema, const Metric& metric, std::size_t n_resamples,
                               std::uint64_t seed, unsigned threads) {
  check_same_docs(gold, pred_a, "system A");
  check_same_docs(gold, pred_b, "system B");
  if (n_resamples < 1) throw ValidationError("n_resamples must be at least 1");
  std::vector<Counts> a, b;
  for (const auto& dc : score_per_document(gold, pred_a)) a.push_back(metric_counts(dc, metric, schema));
  for (const auto& dc : score_per_document(gold, pred_b)) b.push_back(metric_counts(dc, metric, schema));
  return bootstrap_from_counts(a, b, metric, n_resamples, seed, threads);
}

std::string result_to_json(const BootstrapResult& r) {
  nlohmann::ordered_json j;
  j["metric"] = r.metric.describe();
  j["observed_delta"] = r.observed_delta;
  j["p_value"] = r.p_value;
  j["n_resamples"] = r.n_resamples;
  j["seed"] = r.seed;
  j["exceed_count"] = r.exceed_count;
  j["significant_at_0_05"] = r.significant();
  return j.dump(2) + "\n";
}

}  // namespace sdoh
