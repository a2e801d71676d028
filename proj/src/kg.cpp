#include "kstt/kg.hpp"

#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "kstt/errors.hpp"
#include "kstt/ops.hpp"

namespace kstt {

EntityId KnowledgeGraph::entity(std::size_t index) const {
  if (index >= num_entities()) throw LookupError("entity index " + std::to_string(index) + " out of range");
  return EntityId{index, entity_kinds_[index]};
}

RelationId KnowledgeGraph::relation(std::size_t index) const {
  if (index >= num_relations()) throw LookupError("relation index " + std::to_string(index) + " out of range");
  return RelationId{index, index == 0 ? RelationKind::Sequential : RelationKind::Semantic};
}

EntityId KnowledgeGraph::item_entity(const std::string& item) const {
  return EntityId{catalog_.index(item), EntityKind::Item};
}

const std::vector<std::size_t>& KnowledgeGraph::entities_of_kind(EntityKind kind) const {
  return kind == EntityKind::Item ? items_ : attribute_values_;
}

KnowledgeGraph build_graph(const Catalog& catalog, const std::vector<Session>& sessions,
                           const AttributeMap& attributes) {
  KnowledgeGraph g;
  g.catalog_ = catalog;
  for (std::size_t i = 0; i < catalog.size(); ++i) {
    g.entity_names_.push_back("item:" + catalog.name(i));
    g.entity_kinds_.push_back(EntityKind::Item);
    g.items_.push_back(i);
  }

  // Attribute types and values in sorted order, so the layout does not
  // depend on hash-map iteration.
  std::map<std::string, std::map<std::string, std::size_t>> values_by_type;
  for (const auto& [item, attrs] : attributes) {
    if (!catalog.find(item)) throw IngestionError("attribute given for unknown item '" + item + "'");
    for (const auto& [type, value] : attrs) values_by_type[type][value] = 0;
  }
  g.relation_names_.push_back("rel:seq");
  std::map<std::string, std::size_t> relation_of_type;
  for (auto& [type, values] : values_by_type) {
    relation_of_type[type] = g.relation_names_.size();
    g.relation_names_.push_back("rel:" + type);
    for (auto& [value, index] : values) {
      index = g.entity_names_.size();
      g.entity_names_.push_back("attr:" + type + ":" + value);
      g.entity_kinds_.push_back(EntityKind::AttributeValue);
      g.attribute_values_.push_back(index);
    }
  }

  for (const auto& session : sessions) {
    for (std::size_t t = 0; t < session.events.size(); ++t) {
      const auto& click = session.events[t];
      if (!catalog.find(click.item)) {
        throw IngestionError("session '" + session.id + "' offset " + std::to_string(t) +
                             ": unknown item '" + click.item + "'");
      }
      if (t > 0 && click.timestamp < session.events[t - 1].timestamp) {
        throw IngestionError("session '" + session.id + "' offset " + std::to_string(t) +
                             ": timestamps decrease");
      }
    }
    for (std::size_t t = 0; t + 1 < session.events.size(); ++t) {
      const auto head = catalog.index(session.events[t].item);
      const auto tail = catalog.index(session.events[t + 1].item);
      if (head == tail) continue;
      g.triplet_set_.insert(Triplet{{head, EntityKind::Item}, KnowledgeGraph::sequential(), {tail, EntityKind::Item}});
    }
  }
  for (const auto& [item, attrs] : attributes) {
    const auto head = catalog.index(item);
    for (const auto& [type, value] : attrs) {
      g.triplet_set_.insert(Triplet{{head, EntityKind::Item},
                                    {relation_of_type.at(type), RelationKind::Semantic},
                                    {values_by_type.at(type).at(value), EntityKind::AttributeValue}});
    }
  }
  g.triplets_.assign(g.triplet_set_.begin(), g.triplet_set_.end());

  const std::size_t n = g.num_entities();
  std::vector<double> adj(n * n, 0.0);
  for (std::size_t u = 0; u < n; ++u) adj[u * n + u] = 1.0;
  // Row u aggregates u itself and every head with an edge into u. Semantic
  // edges also carry the attribute value back to its item.
  for (const auto& t : g.triplets_) {
    adj[t.tail.index * n + t.head.index] = 1.0;
    if (t.relation.kind == RelationKind::Semantic) adj[t.head.index * n + t.tail.index] = 1.0;
  }
  for (std::size_t u = 0; u < n; ++u) {
    double deg = 0.0;
    for (std::size_t v = 0; v < n; ++v) deg += adj[u * n + v];
    for (std::size_t v = 0; v < n; ++v) adj[u * n + v] /= deg;
  }
  if (n > 0) g.adjacency_ = Tensor({n, n}, std::move(adj));
  return g;
}

void write_triplets(std::ostream& out, const KnowledgeGraph& graph) {
  for (const auto& t : graph.triplets()) {
    out << graph.entity_name(t.head.index) << '\t' << graph.relation_name(t.relation.index) << '\t'
        << graph.entity_name(t.tail.index) << '\n';
  }
}

std::vector<NamedTriplet> read_triplets(std::istream& in) {
  std::vector<NamedTriplet> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream fields(line);
    NamedTriplet t;
    std::string extra;
    if (!std::getline(fields, t.head, '\t') || !std::getline(fields, t.relation, '\t') ||
        !std::getline(fields, t.tail, '\t') || std::getline(fields, extra, '\t')) {
      throw IngestionError("triplet line " + std::to_string(line_no) + ": expected 3 tab-separated fields");
    }
    out.push_back(std::move(t));
  }
  return out;
}

KgParams KgParams::create(ParamStore& store, const KnowledgeGraph& graph, std::size_t dim,
                          std::mt19937_64& rng) {
  const double bound = 6.0 / std::sqrt(static_cast<double>(dim));
  std::uniform_real_distribution<double> init(-bound, bound);
  auto table = [&](std::size_t rows) {
    std::vector<double> v(rows * dim);
    for (auto& x : v) x = init(rng);
    return Tensor({rows, dim}, std::move(v));
  };
  KgParams p;
  p.entities = store.add("kg.entity", table(graph.num_entities()));
  p.relations = store.add("kg.relation", table(graph.num_relations()));
  std::uniform_real_distribution<double> noise(-0.01, 0.01);
  for (std::size_t r = 0; r < graph.num_relations(); ++r) {
    Tensor m = Tensor::identity(dim);
    for (auto& x : m.data()) x += noise(rng);
    p.projections.push_back(store.add("kg.proj." + std::to_string(r), m));
  }
  return p;
}

Tensor transr_score(const EntityId& head, const RelationId& relation, const EntityId& tail,
                    const KgParams& params) {
  const std::size_t d = params.dim();
  if (relation.index >= params.projections.size()) {
    throw LookupError("relation " + std::to_string(relation.index) + " has no projection");
  }
  Tensor diff = slice_rows(params.entities, head.index, 1) - slice_rows(params.entities, tail.index, 1);
  Tensor projected = matmul(params.projections[relation.index], reshape(diff, {d, 1}));
  Tensor translation = reshape(slice_rows(params.relations, relation.index, 1), {d, 1});
  return sum_squares(projected + translation);
}

Triplet negative_sample(const Triplet& triplet, const KnowledgeGraph& graph, std::mt19937_64& rng) {
  const auto& candidates = graph.entities_of_kind(triplet.tail.kind);
  if (candidates.size() < 2) {
    throw SamplingError("cannot corrupt tail of " + graph.entity_name(triplet.head.index) + " -> " +
                        graph.entity_name(triplet.tail.index) + ": only one entity of that kind");
  }
  std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
  Triplet corrupted = triplet;
  for (int attempt = 0; attempt < 100; ++attempt) {
    corrupted.tail = graph.entity(candidates[pick(rng)]);
    if (corrupted.tail != triplet.tail && !graph.contains(corrupted)) return corrupted;
  }
  std::uniform_int_distribution<std::size_t> fallback(0, candidates.size() - 2);
  std::size_t k = fallback(rng);
  if (candidates[k] == triplet.tail.index) k = candidates.size() - 1;
  corrupted.tail = graph.entity(candidates[k]);
  return corrupted;
}

Tensor kg_loss(const std::vector<KgSample>& batch, const KgParams& params) {
  if (batch.empty()) throw ContractError("kg_loss on an empty batch");
  std::vector<Tensor> margins;
  margins.reserve(batch.size());
  for (const auto& s : batch) {
    Tensor positive = transr_score(s.positive.head, s.positive.relation, s.positive.tail, params);
    Tensor negative = transr_score(s.positive.head, s.positive.relation, s.negative_tail, params);
    margins.push_back(reshape(positive - negative, {1, 1}));
  }
  // -ln sigmoid(neg - pos) == softplus(pos - neg)
  return sum(softplus(concat_cols(margins)));
}

}  // namespace kstt
