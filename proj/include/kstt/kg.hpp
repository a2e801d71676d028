#pragma once

#include <compare>
#include <cstddef>
#include <iosfwd>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "kstt/optim.hpp"
#include "kstt/session.hpp"
#include "kstt/tensor.hpp"

namespace kstt {

enum class EntityKind { Item, AttributeValue };

struct EntityId {
  std::size_t index = 0;
  EntityKind kind = EntityKind::Item;
  auto operator<=>(const EntityId& other) const { return index <=> other.index; }
  bool operator==(const EntityId& other) const { return index == other.index; }
};

enum class RelationKind { Sequential, Semantic };

struct RelationId {
  std::size_t index = 0;
  RelationKind kind = RelationKind::Sequential;
  auto operator<=>(const RelationId& other) const { return index <=> other.index; }
  bool operator==(const RelationId& other) const { return index == other.index; }
};

struct Triplet {
  EntityId head;
  RelationId relation;
  EntityId tail;
  auto operator<=>(const Triplet&) const = default;
  bool operator==(const Triplet&) const = default;
};

// Directed graph over items and attribute values.
//
// Entities 0..num_items()-1 are the catalog items in catalog order; the
// attribute values follow, ordered by (type, value). Relation 0 is the
// single sequential relation; relation j >= 1 is the semantic relation of
// the j-th attribute type in lexicographic order.
class KnowledgeGraph {
 public:
  const Catalog& catalog() const { return catalog_; }
  std::size_t num_items() const { return catalog_.size(); }
  std::size_t num_entities() const { return entity_names_.size(); }
  std::size_t num_relations() const { return relation_names_.size(); }

  EntityId entity(std::size_t index) const;
  RelationId relation(std::size_t index) const;
  EntityId item_entity(const std::string& item) const;
  static RelationId sequential() { return RelationId{0, RelationKind::Sequential}; }

  // item:<id>, attr:<type>:<value>, rel:seq, rel:<type>
  const std::string& entity_name(std::size_t index) const { return entity_names_.at(index); }
  const std::string& relation_name(std::size_t index) const { return relation_names_.at(index); }

  const std::vector<Triplet>& triplets() const { return triplets_; }
  bool contains(const Triplet& t) const { return triplet_set_.contains(t); }
  const std::vector<std::size_t>& entities_of_kind(EntityKind kind) const;

  // N x N row-stochastic adjacency with self-loops. Row u spreads equal
  // weight over u, every head of a triplet into u and, for semantic
  // triplets, the attribute values of item u. Messages flow head to tail,
  // and attribute values also reach their items.
  const Tensor& adjacency() const { return adjacency_; }

 private:
  friend KnowledgeGraph build_graph(const Catalog&, const std::vector<Session>&, const AttributeMap&);

  Catalog catalog_;
  std::vector<std::string> entity_names_;
  std::vector<EntityKind> entity_kinds_;
  std::vector<std::string> relation_names_;
  std::vector<Triplet> triplets_;
  std::set<Triplet> triplet_set_;
  std::vector<std::size_t> items_;
  std::vector<std::size_t> attribute_values_;
  Tensor adjacency_;
};

// Sequential triplets for every adjacent click pair (self-transitions
// skipped) and semantic triplets for every item attribute; duplicates
// collapse. Throws IngestionError on items missing from the catalog or
// decreasing timestamps.
KnowledgeGraph build_graph(const Catalog& catalog, const std::vector<Session>& sessions,
                           const AttributeMap& attributes);

// Triplets as TSV rows "head<TAB>relation<TAB>tail" using the stable names.
void write_triplets(std::ostream& out, const KnowledgeGraph& graph);

struct NamedTriplet {
  std::string head;
  std::string relation;
  std::string tail;
  bool operator==(const NamedTriplet&) const = default;
};
std::vector<NamedTriplet> read_triplets(std::istream& in);

// TransR parameters: entity table, relation vectors, one projection per relation.
struct KgParams {
  Tensor entities;                  // [num_entities x d]
  Tensor relations;                 // [num_relations x d]
  std::vector<Tensor> projections;  // num_relations x [d x d]

  // Registers kg.entity, kg.relation and kg.proj.<r>. Embeddings are
  // uniform in [-6/sqrt(d), 6/sqrt(d)]; projections are identity plus
  // uniform noise of amplitude 0.01.
  static KgParams create(ParamStore& store, const KnowledgeGraph& graph, std::size_t dim,
                         std::mt19937_64& rng);
  std::size_t dim() const { return entities.cols(); }
};

// ||M_r e_h + e_r - M_r e_t||^2 as a differentiable scalar.
Tensor transr_score(const EntityId& head, const RelationId& relation, const EntityId& tail,
                    const KgParams& params);

// Positive triplet paired with a corrupted tail.
struct KgSample {
  Triplet positive;
  EntityId negative_tail;
};

// Replaces the tail with a different entity of the same kind such that the
// corrupted triplet is not in the graph; after 100 rejected draws any
// same-kind entity other than the tail is accepted.
Triplet negative_sample(const Triplet& triplet, const KnowledgeGraph& graph, std::mt19937_64& rng);

// Sum over the batch of -ln sigmoid(g(h, t') - g(h, t)).
Tensor kg_loss(const std::vector<KgSample>& batch, const KgParams& params);

}  // namespace kstt
