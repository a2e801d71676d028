#pragma once

#include <memory>
#include <vector>

#include "kstt/eval.hpp"
#include "kstt/kg.hpp"
#include "kstt/session.hpp"

namespace kstt {

// A corpus split by time, with the catalog and graph built from the
// training part only.
struct Dataset {
  std::vector<Session> train_sessions;
  std::vector<Session> test_sessions;
  Catalog catalog;
  AttributeMap attributes;  // restricted to catalog items
  std::shared_ptr<const KnowledgeGraph> graph;
  std::vector<PrefixSample> train_samples;
  std::vector<PrefixSample> test_samples;
  SplitStats test_split;
  std::size_t dropped_attribute_items = 0;
};

// With use_attributes == false the graph holds sequential edges only.
Dataset prepare_dataset(const std::vector<Session>& sessions, const AttributeMap& attributes, double test_fraction,
                        bool use_attributes = true);

}  // namespace kstt
