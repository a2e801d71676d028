#include "kstt/checkpoint.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <fstream>
#include <istream>
#include <ostream>

#include "kstt/errors.hpp"

namespace kstt {

namespace {

template <class T>
void put(std::ostream& out, T value) {
  auto bits = std::bit_cast<std::array<char, sizeof(T)>>(value);
  if constexpr (std::endian::native == std::endian::big) std::reverse(bits.begin(), bits.end());
  out.write(bits.data(), bits.size());
}

template <class T>
bool get(std::istream& in, T& value) {
  std::array<char, sizeof(T)> bits;
  if (!in.read(bits.data(), bits.size())) return false;
  if constexpr (std::endian::native == std::endian::big) std::reverse(bits.begin(), bits.end());
  value = std::bit_cast<T>(bits);
  return true;
}

template <class T>
void expect(std::istream& in, T& value, const char* what) {
  if (!get(in, value)) throw IngestionError(std::string("truncated checkpoint while reading ") + what);
}

}  // namespace

void write_checkpoint(std::ostream& out, const std::vector<NamedTensor>& tensors) {
  out.write("KSTT", 4);
  put<std::uint32_t>(out, kCheckpointVersion);
  for (const auto& [name, tensor] : tensors) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(tensor.rank()));
    for (auto extent : tensor.shape()) put<std::uint64_t>(out, extent);
    for (double v : tensor.data()) put<double>(out, v);
  }
}

std::vector<NamedTensor> read_checkpoint(std::istream& in) {
  std::array<char, 4> magic{};
  if (!in.read(magic.data(), 4) || std::string_view(magic.data(), 4) != "KSTT") {
    throw IngestionError("not a KSTT checkpoint (bad magic)");
  }
  std::uint32_t version = 0;
  expect(in, version, "version");
  if (version != kCheckpointVersion) {
    throw IngestionError("unsupported checkpoint version " + std::to_string(version));
  }
  std::vector<NamedTensor> out;
  std::uint32_t name_len = 0;
  while (get(in, name_len)) {
    std::string name(name_len, '\0');
    if (!in.read(name.data(), name_len)) throw IngestionError("truncated checkpoint name");
    std::uint32_t rank = 0;
    expect(in, rank, "rank");
    Shape shape(rank);
    for (auto& extent : shape) {
      std::uint64_t e = 0;
      expect(in, e, "extent");
      extent = static_cast<std::size_t>(e);
    }
    std::vector<double> values(shape_size(shape));
    for (auto& v : values) expect(in, v, "payload");
    out.push_back({std::move(name), Tensor(std::move(shape), std::move(values))});
  }
  return out;
}

void save_checkpoint(const std::filesystem::path& path, const ParamStore& params) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IngestionError("cannot write checkpoint " + path.string());
  write_checkpoint(out, params.entries());
  if (!out) throw IngestionError("failed writing checkpoint " + path.string());
}

void load_checkpoint(const std::filesystem::path& path, ParamStore& params) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestionError("cannot open checkpoint " + path.string());
  auto stored = read_checkpoint(in);
  if (stored.size() != params.size()) {
    throw IngestionError("checkpoint has " + std::to_string(stored.size()) + " tensors, model expects " +
                         std::to_string(params.size()));
  }
  for (const auto& [name, tensor] : stored) {
    if (!params.contains(name)) throw IngestionError("checkpoint tensor '" + name + "' is not a model parameter");
    Tensor target = params.get(name);
    if (target.shape() != tensor.shape()) {
      throw IngestionError("checkpoint tensor '" + name + "' has shape " + shape_string(tensor.shape()) +
                           ", model expects " + shape_string(target.shape()));
    }
    std::copy(tensor.data().begin(), tensor.data().end(), target.data().begin());
  }
}

}  // namespace kstt
