#include "uaplab/numcore/checkpoint.hpp"

#include <fstream>

#include "uaplab/numcore/binary_io.hpp"

namespace uaplab::num {
namespace {

constexpr std::string_view kMagic = "UAPLNET1";
constexpr std::uint32_t kMaxLayers = 1024;

}  // namespace

void write_network(std::ostream& out, const Network& net) {
  BinaryWriter w(out);
  w.magic(kMagic);
  w.u32(kNetworkFormatVersion);
  w.u32(static_cast<std::uint32_t>(net.layers().size()));
  w.u32(static_cast<std::uint32_t>(net.in_shape().size()));
  for (std::size_t d : net.in_shape()) w.u64(d);
  for (const Layer& layer : net.layers()) {
    w.u8(static_cast<std::uint8_t>(kind_of(layer)));
    if (const auto* a = std::get_if<AffineLayer>(&layer)) {
      w.tensor(a->weight);
      w.tensor(a->bias);
    } else if (const auto* c = std::get_if<ConvLayer>(&layer)) {
      w.u64(c->stride);
      w.tensor(c->weight);
      w.tensor(c->bias);
    }
  }
}

Network read_network(std::istream& in) {
  BinaryReader r(in);
  r.expect_magic(kMagic);
  const std::uint32_t version = r.u32();
  if (version != kNetworkFormatVersion) {
    throw FormatError("unsupported network format version " + std::to_string(version));
  }
  const std::uint32_t count = r.u32();
  if (count > kMaxLayers) throw FormatError("implausible layer count");
  const std::uint32_t rank = r.u32();
  if (rank == 0 || rank > 8) throw FormatError("bad input rank");
  Shape in_shape(rank);
  for (auto& d : in_shape) d = r.u64();

  std::vector<Layer> layers;
  layers.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto tag = static_cast<LayerKind>(r.u8());
    switch (tag) {
      case LayerKind::Affine: {
        AffineLayer a;
        a.weight = r.tensor();
        a.bias = r.tensor();
        layers.emplace_back(std::move(a));
        break;
      }
      case LayerKind::Conv: {
        ConvLayer c;
        c.stride = r.u64();
        c.weight = r.tensor();
        c.bias = r.tensor();
        layers.emplace_back(std::move(c));
        break;
      }
      case LayerKind::Relu:
        layers.emplace_back(ReluLayer{});
        break;
      case LayerKind::Flatten:
        layers.emplace_back(FlattenLayer{});
        break;
      default:
        throw FormatError("unknown layer kind tag " + std::to_string(int(tag)));
    }
  }
  return Network(std::move(in_shape), std::move(layers));
}

void save_network(const std::filesystem::path& path, const Network& net) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_network(out, net);
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

Network load_network(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_network(in);
}

}  // namespace uaplab::num
