#include "kstt/pipeline.hpp"

namespace kstt {

Dataset prepare_dataset(const std::vector<Session>& sessions, const AttributeMap& attributes, double test_fraction,
                        bool use_attributes) {
  Dataset data;
  std::tie(data.train_sessions, data.test_sessions) = split_by_time(sessions, test_fraction);
  data.catalog = Catalog::from_sessions(data.train_sessions);
  if (use_attributes) {
    for (const auto& [item, attrs] : attributes) {
      if (data.catalog.find(item)) data.attributes.emplace(item, attrs);
      else ++data.dropped_attribute_items;
    }
  }
  data.graph = std::make_shared<const KnowledgeGraph>(build_graph(data.catalog, data.train_sessions, data.attributes));
  data.train_samples = split_sessions(data.train_sessions, data.catalog);
  data.test_samples = split_sessions(data.test_sessions, data.catalog, &data.test_split);
  return data;
}

}  // namespace kstt
