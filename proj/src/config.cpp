#include "kstt/config.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>

#include "kstt/errors.hpp"

namespace kstt {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return {};
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

std::size_t to_size(const std::string& key, const std::string& value) {
  std::size_t out = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size() || value.empty()) {
    throw ConfigError(key + ": expected a non-negative integer, got '" + value + "'");
  }
  return out;
}

double to_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double out = std::stod(value, &used);
    if (used == value.size()) return out;
  } catch (const std::exception&) {
  }
  throw ConfigError(key + ": expected a number, got '" + value + "'");
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigError(key + ": expected true|false, got '" + value + "'");
}

std::filesystem::path resolve(const std::string& value, const std::filesystem::path& base_dir) {
  std::filesystem::path p(value);
  if (p.empty() || p.is_absolute() || base_dir.empty()) return p;
  return base_dir / p;
}

}  // namespace

void RunConfig::set(const std::string& key, const std::string& value, const std::filesystem::path& base_dir) {
  if (key == "sessions") sessions = resolve(value, base_dir);
  else if (key == "attributes") attributes = resolve(value, base_dir);
  else if (key == "dim") model.dim = to_size(key, value);
  else if (key == "gcn_layers") model.gcn_layers = to_size(key, value);
  else if (key == "gcn_slope") model.gcn_slope = to_double(key, value);
  else if (key == "dropout") model.dropout = to_double(key, value);
  else if (key == "heads") model.heads = to_size(key, value);
  else if (key == "layers") model.layers = to_size(key, value);
  else if (key == "ffn_dim") model.ffn_dim = to_size(key, value);
  else if (key == "readout") model.readout = parse_readout(value);
  else if (key == "time_encoder") model.time_encoder = parse_time_encoding(value);
  else if (key == "tbe_buckets") model.tbe_buckets = to_size(key, value);
  else if (key == "mte_frequencies") model.mte_frequencies = to_size(key, value);
  else if (key == "mte_harmonics") model.mte_harmonics = to_size(key, value);
  else if (key == "max_session_length") model.max_session_length = to_size(key, value);
  else if (key == "epochs") train.epochs = to_size(key, value);
  else if (key == "rec_batch") train.rec_batch = to_size(key, value);
  else if (key == "kg_batch") train.kg_batch = to_size(key, value);
  else if (key == "lr") train.lr = to_double(key, value);
  else if (key == "lambda") train.lambda = to_double(key, value);
  else if (key == "seed") train.seed = to_size(key, value);
  else if (key == "clip_norm") train.clip_norm = to_double(key, value);
  else if (key == "kg_phase") train.kg_phase = to_bool(key, value);
  else if (key == "rec_loss") {
    if (value == "categorical") train.rec_loss = RecLossKind::Categorical;
    else if (value == "binary") train.rec_loss = RecLossKind::Binary;
    else throw ConfigError("rec_loss: expected categorical|binary, got '" + value + "'");
  }
  else if (key == "kg_attributes") kg_attributes = to_bool(key, value);
  else if (key == "test_fraction") test_fraction = to_double(key, value);
  else if (key == "k") k = to_size(key, value);
  else if (key == "checkpoint_every") checkpoint_every = to_size(key, value);
  else throw ConfigError("unknown config key '" + key + "'");
}

RunConfig RunConfig::parse(std::istream& in, const std::filesystem::path& base_dir) {
  RunConfig config;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key=value");
    }
    try {
      config.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)), base_dir);
    } catch (const ConfigError& e) {
      throw ConfigError("config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return config;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IngestionError("cannot open config file '" + path.string() + "'");
  return parse(in, path.parent_path());
}

void RunConfig::validate() const {
  model.validate();
  train.validate();
  if (test_fraction < 0.0 || test_fraction >= 1.0) throw ConfigError("test_fraction must be in [0, 1)");
  if (k == 0) throw ConfigError("k must be at least 1");
}

void RunConfig::write(std::ostream& out) const {
  out << "sessions=" << sessions.string() << '\n'
      << "attributes=" << attributes.string() << '\n'
      << "dim=" << model.dim << '\n'
      << "gcn_layers=" << model.gcn_layers << '\n'
      << "gcn_slope=" << model.gcn_slope << '\n'
      << "dropout=" << model.dropout << '\n'
      << "heads=" << model.heads << '\n'
      << "layers=" << model.layers << '\n'
      << "ffn_dim=" << model.ffn_dim << '\n'
      << "readout=" << (model.readout == Readout::Last ? "last" : "mean") << '\n'
      << "time_encoder=" << to_string(model.time_encoder) << '\n'
      << "tbe_buckets=" << model.tbe_buckets << '\n'
      << "mte_frequencies=" << model.mte_frequencies << '\n'
      << "mte_harmonics=" << model.mte_harmonics << '\n'
      << "max_session_length=" << model.max_session_length << '\n'
      << "epochs=" << train.epochs << '\n'
      << "rec_batch=" << train.rec_batch << '\n'
      << "kg_batch=" << train.kg_batch << '\n'
      << "lr=" << train.lr << '\n'
      << "lambda=" << train.lambda << '\n'
      << "seed=" << train.seed << '\n'
      << "clip_norm=" << train.clip_norm << '\n'
      << "kg_phase=" << (train.kg_phase ? "true" : "false") << '\n'
      << "rec_loss=" << (train.rec_loss == RecLossKind::Binary ? "binary" : "categorical") << '\n'
      << "kg_attributes=" << (kg_attributes ? "true" : "false") << '\n'
      << "test_fraction=" << test_fraction << '\n'
      << "k=" << k << '\n'
      << "checkpoint_every=" << checkpoint_every << '\n';
}

}  // namespace kstt
