#include "kstt/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <numeric>

#include "kstt/errors.hpp"
#include "kstt/model.hpp"
#include "kstt/ops.hpp"

namespace kstt {

std::vector<PrefixSample> split_sessions(const std::vector<Session>& sessions, const Catalog& catalog,
                                         SplitStats* stats) {
  SplitStats local;
  std::vector<PrefixSample> samples;
  for (const auto& session : sessions) {
    const auto& ev = session.events;
    if (ev.size() < 2) {
      ++local.short_sessions;
      continue;
    }
    std::vector<std::optional<std::size_t>> index(ev.size());
    for (std::size_t i = 0; i < ev.size(); ++i) index[i] = catalog.find(ev[i].item);
    for (std::size_t end = 1; end < ev.size(); ++end) {
      bool known = index[end].has_value();
      for (std::size_t i = 0; i < end && known; ++i) known = index[i].has_value();
      if (!known) {
        ++local.unknown_item_samples;
        continue;
      }
      PrefixSample s;
      for (std::size_t i = 0; i < end; ++i) {
        s.items.push_back(*index[i]);
        s.times.push_back(ev[i].timestamp);
      }
      s.target = *index[end];
      s.target_time = ev[end].timestamp;
      samples.push_back(std::move(s));
    }
  }
  if (stats) *stats = local;
  return samples;
}

std::pair<std::vector<Session>, std::vector<Session>> split_by_time(const std::vector<Session>& sessions,
                                                                    double test_fraction) {
  if (test_fraction < 0.0 || test_fraction >= 1.0) throw ConfigError("test_fraction must be in [0, 1)");
  std::pair<std::vector<Session>, std::vector<Session>> out;
  if (sessions.empty()) return out;
  auto start = [](const Session& s) {
    return s.events.empty() ? std::int64_t{0} : s.events.front().timestamp;
  };
  auto [lo, hi] = std::minmax_element(sessions.begin(), sessions.end(),
                                      [&](const Session& a, const Session& b) { return start(a) < start(b); });
  const double first = static_cast<double>(start(*lo));
  const double last = static_cast<double>(start(*hi));
  const double cutoff = last - test_fraction * (last - first);
  for (const auto& s : sessions) {
    const bool test = test_fraction > 0.0 && static_cast<double>(start(s)) >= cutoff && last > first;
    (test ? out.second : out.first).push_back(s);
  }
  return out;
}

std::vector<std::size_t> top_k(std::span<const double> scores, std::size_t k) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  k = std::min(k, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                    [&](std::size_t a, std::size_t b) { return scores[a] > scores[b] || (scores[a] == scores[b] && a < b); });
  order.resize(k);
  return order;
}

namespace {

// 1-based rank of target within the first k entries, 0 if absent.
std::size_t rank_within(const std::vector<std::size_t>& ranking, std::size_t target, std::size_t k) {
  const std::size_t limit = std::min(k, ranking.size());
  for (std::size_t r = 0; r < limit; ++r)
    if (ranking[r] == target) return r + 1;
  return 0;
}

void check_metric_inputs(const std::vector<std::vector<std::size_t>>& rankings, std::span<const std::size_t> targets,
                         std::size_t k) {
  if (rankings.empty()) throw ContractError("metric over an empty sample set");
  if (rankings.size() != targets.size()) throw DimensionError("rankings and targets differ in count");
  if (k == 0) throw ContractError("k must be at least 1");
}

}  // namespace

double recall_at_k(const std::vector<std::vector<std::size_t>>& rankings, std::span<const std::size_t> targets,
                   std::size_t k) {
  check_metric_inputs(rankings, targets, k);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < rankings.size(); ++i) hits += rank_within(rankings[i], targets[i], k) > 0 ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(rankings.size());
}

double mrr_at_k(const std::vector<std::vector<std::size_t>>& rankings, std::span<const std::size_t> targets,
                std::size_t k) {
  check_metric_inputs(rankings, targets, k);
  double total = 0.0;
  for (std::size_t i = 0; i < rankings.size(); ++i) {
    const std::size_t r = rank_within(rankings[i], targets[i], k);
    if (r > 0) total += 1.0 / static_cast<double>(r);
  }
  return total / static_cast<double>(rankings.size());
}

std::string MetricReport::tsv() const {
  char buf[128];
  std::snprintf(buf, sizeof buf, "%zu\t%.6f\t%.6f\t%zu", k, recall_at_k, mrr_at_k, samples);
  return buf;
}

std::string MetricReport::record() const {
  char buf[160];
  std::snprintf(buf, sizeof buf, "recall@%zu=%.6f mrr@%zu=%.6f k=%zu samples=%zu", k, recall_at_k, k, mrr_at_k, k,
                samples);
  return buf;
}

MetricReport evaluate(const Scorer& scorer, const std::vector<PrefixSample>& samples, std::size_t k) {
  MetricReport report;
  report.k = k;
  report.samples = samples.size();
  if (samples.empty()) return report;
  std::vector<std::vector<std::size_t>> rankings;
  std::vector<std::size_t> targets;
  rankings.reserve(samples.size());
  for (const auto& s : samples) {
    rankings.push_back(top_k(scorer(s), k));
    targets.push_back(s.target);
  }
  report.recall_at_k = recall_at_k(rankings, targets, k);
  report.mrr_at_k = mrr_at_k(rankings, targets, k);
  return report;
}

Scorer model_scorer(const KsttModel& model) {
  // Item embeddings do not depend on the sample; computed once.
  auto items = std::make_shared<Tensor>(model.item_embeddings());
  return [&model, items](const PrefixSample& s) {
    Tensor scores = predict_scores(model.encode_session(s, *items), *items);
    return std::vector<double>(scores.data().begin(), scores.data().end());
  };
}

MetricReport evaluate(const KsttModel& model, const std::vector<PrefixSample>& samples, std::size_t k) {
  return evaluate(model_scorer(model), samples, k);
}

PopularityBaselines::PopularityBaselines(const std::vector<Session>& sessions, const Catalog& catalog)
    : counts_(catalog.size(), 0.0) {
  for (const auto& s : sessions) {
    for (const auto& c : s.events) {
      if (auto i = catalog.find(c.item)) {
        counts_[*i] += 1.0;
        total_ += 1.0;
      }
    }
  }
}

Scorer PopularityBaselines::pop() const {
  return [counts = counts_](const PrefixSample&) { return counts; };
}

Scorer PopularityBaselines::session_pop() const {
  // Each in-session click outweighs the whole global count.
  const double weight = total_ + 1.0;
  return [counts = counts_, weight](const PrefixSample& s) {
    auto scores = counts;
    for (auto item : s.items) scores[item] += weight;
    return scores;
  };
}

}  // namespace kstt
