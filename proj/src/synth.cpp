#include "kstt/synth.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <random>

#include "kstt/errors.hpp"

namespace kstt {

namespace {

constexpr std::int64_t kEpochBase = 1'600'000'000;

std::string session_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "s%05zu", index);
  return buf;
}

std::string category_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "c%02zu", index);
  return buf;
}

std::size_t draw_length(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  if (lo < 2 || hi < lo) throw ConfigError("synthetic session lengths must satisfy 2 <= min <= max");
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

}  // namespace

std::string synthetic_item_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "i%03zu", index);
  return buf;
}

SyntheticCorpus make_markov_corpus(const MarkovCorpusConfig& config, std::vector<std::size_t>* successor) {
  if (config.items < 2) throw ConfigError("markov corpus needs at least 2 items");
  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> cycle(config.items);
  std::iota(cycle.begin(), cycle.end(), std::size_t{0});
  std::shuffle(cycle.begin(), cycle.end(), rng);
  std::vector<std::size_t> next(config.items);
  for (std::size_t i = 0; i < cycle.size(); ++i) next[cycle[i]] = cycle[(i + 1) % cycle.size()];

  SyntheticCorpus corpus;
  std::uniform_int_distribution<std::size_t> start_item(0, config.items - 1);
  std::uniform_int_distribution<std::int64_t> gap(5, 300);
  for (std::size_t s = 0; s < config.sessions; ++s) {
    Session session{session_name(s), {}};
    std::int64_t t = kEpochBase + static_cast<std::int64_t>(s) * 3600;
    std::size_t item = start_item(rng);
    const std::size_t length = draw_length(rng, config.min_length, config.max_length);
    for (std::size_t k = 0; k < length; ++k) {
      session.events.push_back({synthetic_item_name(item), t});
      item = next[item];
      t += gap(rng);
    }
    corpus.sessions.push_back(std::move(session));
  }
  if (config.categories > 0) {
    std::uniform_int_distribution<std::size_t> category(0, config.categories - 1);
    for (std::size_t i = 0; i < config.items; ++i) {
      corpus.attributes[synthetic_item_name(i)].emplace_back("category", category_name(category(rng)));
    }
  }
  if (successor) *successor = next;
  return corpus;
}

SyntheticCorpus make_temporal_corpus(const TemporalCorpusConfig& config) {
  const std::size_t per = config.items_per_category;
  if (config.categories < 2 || per < 2) throw ConfigError("temporal corpus needs 2+ categories of 2+ items");
  std::mt19937_64 rng(config.seed);
  const std::size_t items = config.categories * per;
  std::uniform_int_distribution<std::size_t> any_item(0, items - 1);
  std::uniform_int_distribution<std::size_t> member(0, per - 1);
  std::uniform_int_distribution<std::size_t> other_member(0, per - 2);
  std::uniform_int_distribution<std::int64_t> short_gap(config.short_gap_min, config.short_gap_max);
  std::uniform_int_distribution<std::int64_t> long_gap(config.long_gap_min, config.long_gap_max);
  std::bernoulli_distribution is_long(0.5);

  SyntheticCorpus corpus;
  for (std::size_t s = 0; s < config.sessions; ++s) {
    Session session{session_name(s), {}};
    std::int64_t t = kEpochBase + static_cast<std::int64_t>(s) * 6 * 3600;
    std::size_t item = any_item(rng);
    const std::size_t length = draw_length(rng, config.min_length, config.max_length);
    for (std::size_t k = 0; k < length; ++k) {
      session.events.push_back({synthetic_item_name(item), t});
      const std::size_t cat = item / per;
      if (is_long(rng)) {
        t += long_gap(rng);
        item = ((cat + 1) % config.categories) * per + member(rng);
      } else {
        t += short_gap(rng);
        std::size_t slot = other_member(rng);
        if (slot >= item % per) ++slot;
        item = cat * per + slot;
      }
    }
    corpus.sessions.push_back(std::move(session));
  }
  for (std::size_t i = 0; i < items; ++i) {
    corpus.attributes[synthetic_item_name(i)].emplace_back("category", category_name(i / per));
  }
  return corpus;
}

SyntheticCorpus make_knowledge_corpus(const KnowledgeCorpusConfig& config) {
  const std::size_t per = config.items_per_category;
  if (config.categories < 1 || per < 2) throw ConfigError("knowledge corpus needs categories of 2+ items");
  if (config.jump_rate < 0.0 || config.jump_rate > 1.0) throw ConfigError("jump_rate must be in [0, 1]");
  std::mt19937_64 rng(config.seed);
  const std::size_t items = config.categories * per;
  std::uniform_int_distribution<std::size_t> any_item(0, items - 1);
  std::uniform_int_distribution<std::size_t> other_member(0, per - 2);
  std::uniform_int_distribution<std::int64_t> gap(5, 300);
  std::bernoulli_distribution jump(config.jump_rate);

  SyntheticCorpus corpus;
  for (std::size_t s = 0; s < config.sessions; ++s) {
    Session session{session_name(s), {}};
    std::int64_t t = kEpochBase + static_cast<std::int64_t>(s) * 3600;
    std::size_t item = any_item(rng);
    const std::size_t length = draw_length(rng, config.min_length, config.max_length);
    for (std::size_t k = 0; k < length; ++k) {
      session.events.push_back({synthetic_item_name(item), t});
      if (jump(rng)) {
        item = any_item(rng);
      } else {
        std::size_t slot = other_member(rng);
        if (slot >= item % per) ++slot;
        item = (item / per) * per + slot;
      }
      t += gap(rng);
    }
    corpus.sessions.push_back(std::move(session));
  }
  for (std::size_t i = 0; i < items; ++i) {
    corpus.attributes[synthetic_item_name(i)].emplace_back("category", category_name(i / per));
  }
  return corpus;
}

}  // namespace kstt
