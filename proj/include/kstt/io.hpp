#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "kstt/session.hpp"

namespace kstt {

inline constexpr std::size_t kMaxSessionLength = 50;

struct IngestSummary {
  std::size_t rows = 0;
  std::size_t sessions = 0;
  std::size_t dropped_short = 0;
  std::size_t truncated = 0;
  std::size_t attribute_rows = 0;
  std::size_t dropped_attributes = 0;    // item absent from the session log
  std::size_t duplicate_attributes = 0;
};

// Splits one CSV line. Double-quoted fields may contain commas and "" escapes.
std::vector<std::string> split_csv_line(const std::string& line);

// CSV with header session_id,timestamp,item_id. Rows are grouped by
// session (first-appearance order), sorted by timestamp (stable), sessions
// shorter than 2 clicks dropped, longer ones cut to their most recent
// max_length clicks. Throws IngestionError with the line number on bad rows.
std::vector<Session> parse_sessions(std::istream& in, std::size_t max_length = kMaxSessionLength,
                                    IngestSummary* summary = nullptr, std::size_t min_length = 2);
std::vector<Session> load_sessions(const std::filesystem::path& path, std::size_t max_length = kMaxSessionLength,
                                   IngestSummary* summary = nullptr);

// CSV with header item_id,attribute_type,attribute_value. When `known` is
// given, rows for items outside it are dropped and counted. Identical rows
// collapse.
AttributeMap parse_attributes(std::istream& in, const Catalog* known = nullptr, IngestSummary* summary = nullptr);
AttributeMap load_attributes(const std::filesystem::path& path, const Catalog* known = nullptr,
                             IngestSummary* summary = nullptr);

void write_sessions(std::ostream& out, const std::vector<Session>& sessions);
// Rows sorted by (item, type, value).
void write_attributes(std::ostream& out, const AttributeMap& attributes);

}  // namespace kstt
