#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "kstt/session.hpp"

// Synthetic click corpora with planted structure, used to check that the
// model can recover sequential, temporal and attribute signals.
namespace kstt {

struct SyntheticCorpus {
  std::vector<Session> sessions;
  AttributeMap attributes;
};

// Item names are zero-padded ("i007") so lexicographic catalog order
// matches the numeric order.
std::string synthetic_item_name(std::size_t index);

struct MarkovCorpusConfig {
  std::size_t items = 50;
  std::size_t sessions = 200;
  std::size_t min_length = 3;
  std::size_t max_length = 8;
  std::size_t categories = 5;
  std::uint64_t seed = 7;
};

// Each item always has the same successor: a random single cycle over all
// items, so no item follows itself.
SyntheticCorpus make_markov_corpus(const MarkovCorpusConfig& config, std::vector<std::size_t>* successor = nullptr);

struct TemporalCorpusConfig {
  std::size_t categories = 8;
  std::size_t items_per_category = 5;
  std::size_t sessions = 300;
  std::size_t min_length = 3;
  std::size_t max_length = 8;
  std::int64_t short_gap_min = 10, short_gap_max = 60;       // seconds
  std::int64_t long_gap_min = 3600, long_gap_max = 14400;    // seconds
  std::uint64_t seed = 11;
};

// After a short gap the next item is another item of the same category;
// after a long gap it is an item of the complementary category (c + 1 mod C).
// Gaps are short or long with equal probability. Items carry a category attribute.
SyntheticCorpus make_temporal_corpus(const TemporalCorpusConfig& config);

struct KnowledgeCorpusConfig {
  std::size_t categories = 24;
  std::size_t items_per_category = 5;
  std::size_t sessions = 100;
  std::size_t min_length = 3;
  std::size_t max_length = 5;
  double jump_rate = 0.3;  // chance that a click moves to a uniformly drawn item
  std::uint64_t seed = 13;
};

// The next item is a uniformly drawn other item of the current item's
// category, except for jumps to an arbitrary item at jump_rate; the
// category is exposed only as an item attribute.
SyntheticCorpus make_knowledge_corpus(const KnowledgeCorpusConfig& config);

}  // namespace kstt
