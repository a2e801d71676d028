#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace kstt {

struct Click {
  std::string item;
  std::int64_t timestamp = 0;  // epoch seconds
};

// One anonymous visit: clicks ordered by non-decreasing timestamp.
struct Session {
  std::string id;
  std::vector<Click> events;
};

// Dense index over the item ids of a corpus. Item index i is also the
// entity index of that item in the knowledge graph.
class Catalog {
 public:
  Catalog() = default;
  explicit Catalog(std::vector<std::string> items);

  // Distinct items of the sessions, in lexicographic order.
  static Catalog from_sessions(const std::vector<Session>& sessions);

  std::size_t size() const { return items_.size(); }
  const std::string& name(std::size_t index) const { return items_.at(index); }
  const std::vector<std::string>& names() const { return items_; }
  std::optional<std::size_t> find(const std::string& item) const;
  // Throws LookupError for unknown items.
  std::size_t index(const std::string& item) const;

 private:
  std::vector<std::string> items_;
  std::unordered_map<std::string, std::size_t> lookup_;
};

// A session prefix and the click that followed it, with items resolved to
// catalog indices. target_time is the prediction time for the prefix.
struct PrefixSample {
  std::vector<std::size_t> items;
  std::vector<std::int64_t> times;
  std::size_t target = 0;
  std::int64_t target_time = 0;
};

// item id -> list of (attribute type, attribute value)
using AttributeMap = std::unordered_map<std::string, std::vector<std::pair<std::string, std::string>>>;

}  // namespace kstt
