#include "kstt/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <tuple>
#include <unordered_map>

#include "kstt/errors.hpp"

namespace kstt {

namespace {

std::string trim(std::string s) {
  auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::string line_error(std::size_t line_no, const std::string& what) {
  return "line " + std::to_string(line_no) + ": " + what;
}

void expect_header(std::istream& in, const std::vector<std::string>& expected, std::size_t& line_no) {
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split_csv_line(line);
    for (auto& f : fields) f = trim(f);
    if (fields != expected) {
      std::string want;
      for (const auto& e : expected) want += (want.empty() ? "" : ",") + e;
      throw IngestionError(line_error(line_no, "expected header '" + want + "'"));
    }
    return;
  }
}

std::ifstream open_or_throw(const std::filesystem::path& path, const char* what) {
  std::ifstream in(path);
  if (!in) throw IngestionError(std::string("cannot open ") + what + " file '" + path.string() + "'");
  return in;
}

}  // namespace

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string current;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        current += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        current += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(current));
      current.clear();
    } else if (c != '\r') {
      current += c;
    }
  }
  fields.push_back(std::move(current));
  return fields;
}

std::vector<Session> parse_sessions(std::istream& in, std::size_t max_length, IngestSummary* summary,
                                    std::size_t min_length) {
  IngestSummary local = summary ? *summary : IngestSummary{};
  std::size_t line_no = 0;
  expect_header(in, {"session_id", "timestamp", "item_id"}, line_no);

  std::vector<Session> grouped;
  std::unordered_map<std::string, std::size_t> slot;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != 3) throw IngestionError(line_error(line_no, "expected 3 fields, got " + std::to_string(fields.size())));
    for (auto& f : fields) f = trim(f);
    if (fields[0].empty() || fields[2].empty()) throw IngestionError(line_error(line_no, "empty session or item id"));
    std::int64_t ts = 0;
    const auto& raw = fields[1];
    auto [ptr, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), ts);
    if (ec != std::errc() || ptr != raw.data() + raw.size() || raw.empty()) {
      throw IngestionError(line_error(line_no, "timestamp '" + raw + "' is not an integer"));
    }
    auto [it, inserted] = slot.emplace(fields[0], grouped.size());
    if (inserted) grouped.push_back(Session{fields[0], {}});
    grouped[it->second].events.push_back(Click{fields[2], ts});
    ++local.rows;
  }

  std::vector<Session> sessions;
  for (auto& s : grouped) {
    std::stable_sort(s.events.begin(), s.events.end(),
                     [](const Click& a, const Click& b) { return a.timestamp < b.timestamp; });
    if (s.events.size() < min_length) {
      ++local.dropped_short;
      continue;
    }
    if (s.events.size() > max_length) {
      s.events.erase(s.events.begin(), s.events.end() - static_cast<std::ptrdiff_t>(max_length));
      ++local.truncated;
    }
    sessions.push_back(std::move(s));
  }
  local.sessions = sessions.size();
  if (summary) *summary = local;
  return sessions;
}

std::vector<Session> load_sessions(const std::filesystem::path& path, std::size_t max_length, IngestSummary* summary) {
  auto in = open_or_throw(path, "sessions");
  try {
    return parse_sessions(in, max_length, summary);
  } catch (const IngestionError& e) {
    throw IngestionError(path.string() + ": " + e.what());
  }
}

AttributeMap parse_attributes(std::istream& in, const Catalog* known, IngestSummary* summary) {
  IngestSummary local = summary ? *summary : IngestSummary{};
  std::size_t line_no = 0;
  expect_header(in, {"item_id", "attribute_type", "attribute_value"}, line_no);
  AttributeMap out;
  std::set<std::tuple<std::string, std::string, std::string>> seen;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != 3) throw IngestionError(line_error(line_no, "expected 3 fields, got " + std::to_string(fields.size())));
    for (auto& f : fields) f = trim(f);
    if (fields[0].empty() || fields[1].empty() || fields[2].empty()) {
      throw IngestionError(line_error(line_no, "empty attribute field"));
    }
    ++local.attribute_rows;
    if (known && !known->find(fields[0])) {
      ++local.dropped_attributes;
      continue;
    }
    if (!seen.emplace(fields[0], fields[1], fields[2]).second) {
      ++local.duplicate_attributes;
      continue;
    }
    out[fields[0]].emplace_back(fields[1], fields[2]);
  }
  if (summary) *summary = local;
  return out;
}

AttributeMap load_attributes(const std::filesystem::path& path, const Catalog* known, IngestSummary* summary) {
  auto in = open_or_throw(path, "attributes");
  try {
    return parse_attributes(in, known, summary);
  } catch (const IngestionError& e) {
    throw IngestionError(path.string() + ": " + e.what());
  }
}

void write_sessions(std::ostream& out, const std::vector<Session>& sessions) {
  out << "session_id,timestamp,item_id\n";
  for (const auto& s : sessions)
    for (const auto& c : s.events) out << s.id << ',' << c.timestamp << ',' << c.item << '\n';
}

void write_attributes(std::ostream& out, const AttributeMap& attributes) {
  std::vector<std::tuple<std::string, std::string, std::string>> rows;
  for (const auto& [item, attrs] : attributes)
    for (const auto& [type, value] : attrs) rows.emplace_back(item, type, value);
  std::sort(rows.begin(), rows.end());
  out << "item_id,attribute_type,attribute_value\n";
  for (const auto& [item, type, value] : rows) out << item << ',' << type << ',' << value << '\n';
}

}  // namespace kstt
