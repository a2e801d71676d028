#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "kstt/session.hpp"

namespace kstt {

class KsttModel;

struct SplitStats {
  std::size_t short_sessions = 0;        // fewer than two clicks
  std::size_t unknown_item_samples = 0;  // prefix or target outside the catalog
};

// Prefix expansion: a session v1..vn yields ([v1..vi] -> v_{i+1}) for
// i = 1..n-1, with the target click time as prediction time. Samples that
// touch items outside the catalog are dropped and counted.
std::vector<PrefixSample> split_sessions(const std::vector<Session>& sessions, const Catalog& catalog,
                                         SplitStats* stats = nullptr);

// Sessions starting in the last `test_fraction` of the time range of
// session start times go to the second list.
std::pair<std::vector<Session>, std::vector<Session>> split_by_time(const std::vector<Session>& sessions,
                                                                    double test_fraction);

// Top-k indices by descending score, ties broken by ascending index.
std::vector<std::size_t> top_k(std::span<const double> scores, std::size_t k);

double recall_at_k(const std::vector<std::vector<std::size_t>>& rankings, std::span<const std::size_t> targets,
                   std::size_t k);
double mrr_at_k(const std::vector<std::vector<std::size_t>>& rankings, std::span<const std::size_t> targets,
                std::size_t k);

struct MetricReport {
  double recall_at_k = 0.0;
  double mrr_at_k = 0.0;
  std::size_t k = 0;
  std::size_t samples = 0;

  // "k<TAB>recall<TAB>mrr<TAB>samples"
  std::string tsv() const;
  // "recall@20=0.512300 mrr@20=0.201100 k=20 samples=123"
  std::string record() const;
};

// Maps a sample to one score per catalog item.
using Scorer = std::function<std::vector<double>(const PrefixSample&)>;

MetricReport evaluate(const Scorer& scorer, const std::vector<PrefixSample>& samples, std::size_t k);
// Evaluation-mode forward passes; does not touch the parameters.
MetricReport evaluate(const KsttModel& model, const std::vector<PrefixSample>& samples, std::size_t k);
Scorer model_scorer(const KsttModel& model);

// POP and S-POP rankers built from training click counts.
class PopularityBaselines {
 public:
  PopularityBaselines(const std::vector<Session>& sessions, const Catalog& catalog);

  const std::vector<double>& counts() const { return counts_; }
  Scorer pop() const;
  // In-session frequency first, global popularity as the tie-breaker and
  // for items outside the session.
  Scorer session_pop() const;

 private:
  std::vector<double> counts_;
  double total_ = 0.0;
};

}  // namespace kstt
