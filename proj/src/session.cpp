#include "kstt/session.hpp"

#include <algorithm>
#include <set>

#include "kstt/errors.hpp"

namespace kstt {

Catalog::Catalog(std::vector<std::string> items) : items_(std::move(items)) {
  for (std::size_t i = 0; i < items_.size(); ++i) {
    if (!lookup_.emplace(items_[i], i).second) throw ContractError("duplicate catalog item " + items_[i]);
  }
}

Catalog Catalog::from_sessions(const std::vector<Session>& sessions) {
  std::set<std::string> distinct;
  for (const auto& s : sessions)
    for (const auto& c : s.events) distinct.insert(c.item);
  return Catalog(std::vector<std::string>(distinct.begin(), distinct.end()));
}

std::optional<std::size_t> Catalog::find(const std::string& item) const {
  auto it = lookup_.find(item);
  if (it == lookup_.end()) return std::nullopt;
  return it->second;
}

std::size_t Catalog::index(const std::string& item) const {
  auto found = find(item);
  if (!found) throw LookupError("unknown item '" + item + "'");
  return *found;
}

}  // namespace kstt
