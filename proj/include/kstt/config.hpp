#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>

#include "kstt/model.hpp"
#include "kstt/trainer.hpp"

namespace kstt {

// Everything a CLI run needs. Defaults are listed in docs/config.md.
struct RunConfig {
  std::filesystem::path sessions;
  std::filesystem::path attributes;  // empty: no attribute file
  ModelConfig model;
  TrainConfig train;
  bool kg_attributes = true;  // false drops semantic edges (sequential-only graph)
  double test_fraction = 0.1;
  std::size_t k = 20;
  std::size_t checkpoint_every = 0;  // 0: only the final checkpoint

  // Applies one key=value setting. Relative paths resolve against base_dir.
  // Throws ConfigError on unknown keys or unparsable values.
  void set(const std::string& key, const std::string& value, const std::filesystem::path& base_dir = {});

  // Line-oriented key=value with '#' comments.
  static RunConfig parse(std::istream& in, const std::filesystem::path& base_dir = {});
  static RunConfig load(const std::filesystem::path& path);

  void validate() const;
  // Every key with its current value, one per line, in a form parse() accepts.
  void write(std::ostream& out) const;
};

}  // namespace kstt
