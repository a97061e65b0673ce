#include "linksteal/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace linksteal {

namespace {

constexpr std::array<char, 8> kMagic = {'L', 'S', 'G', 'N', 'N', 'C', 'K', '1'};

template <class T>
void put(std::ostream& out, T value) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
  const U bits = std::bit_cast<U>(value);
  unsigned char bytes[sizeof(U)];
  for (std::size_t i = 0; i < sizeof(U); ++i) bytes[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xFF);
  out.write(reinterpret_cast<const char*>(bytes), sizeof(U));
}

template <class T>
T get(std::istream& in) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
  unsigned char bytes[sizeof(U)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(U))) throw CheckpointError("truncated checkpoint");
  U bits = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) bits |= static_cast<U>(bytes[i]) << (8 * i);
  return std::bit_cast<T>(bits);
}

std::uint32_t kind_tag(GnnKind k) { return static_cast<std::uint32_t>(k); }

GnnKind kind_from_tag(std::uint32_t tag) {
  if (tag > static_cast<std::uint32_t>(GnnKind::Gin)) throw CheckpointError("unknown layer kind tag " + std::to_string(tag));
  return static_cast<GnnKind>(tag);
}

}  // namespace

void save_checkpoint(std::ostream& out, const TrainedGnn& model) {
  out.write(kMagic.data(), kMagic.size());
  put<std::uint32_t>(out, kind_tag(model.arch));
  put<std::uint32_t>(out, 2);
  put<std::uint64_t>(out, model.num_classes);
  put<double>(out, model.dropout);
  for (const GnnLayer* layer : {&model.layer1, &model.layer2}) {
    put<std::uint32_t>(out, kind_tag(layer->kind));
    put<std::uint64_t>(out, layer->in_dim);
    put<std::uint64_t>(out, layer->out_dim);
    put<std::uint64_t>(out, layer->heads);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(layer->params.size()));
    for (const Parameter& p : layer->params) {
      put<std::uint64_t>(out, p.value.rows());
      put<std::uint64_t>(out, p.value.cols());
    }
  }
  for (const GnnLayer* layer : {&model.layer1, &model.layer2})
    for (const Parameter& p : layer->params)
      for (double v : p.value.data()) put<double>(out, v);
  if (!out) throw CheckpointError("failed writing checkpoint");
}

TrainedGnn load_checkpoint(std::istream& in) {
  std::array<char, 8> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic) throw CheckpointError("not a GNN checkpoint");
  TrainedGnn model;
  model.arch = kind_from_tag(get<std::uint32_t>(in));
  if (get<std::uint32_t>(in) != 2) throw CheckpointError("checkpoint must hold exactly two layers");
  model.num_classes = get<std::uint64_t>(in);
  model.dropout = get<double>(in);
  for (GnnLayer* layer : {&model.layer1, &model.layer2}) {
    layer->kind = kind_from_tag(get<std::uint32_t>(in));
    layer->in_dim = get<std::uint64_t>(in);
    layer->out_dim = get<std::uint64_t>(in);
    layer->heads = get<std::uint64_t>(in);
    const auto count = get<std::uint32_t>(in);
    if (count > 64) throw CheckpointError("implausible tensor count in checkpoint");
    for (std::uint32_t i = 0; i < count; ++i) {
      const auto rows = get<std::uint64_t>(in);
      const auto cols = get<std::uint64_t>(in);
      if (rows > (1u << 24) || cols > (1u << 24)) throw CheckpointError("implausible tensor shape in checkpoint");
      layer->params.emplace_back(Tensor(rows, cols));
    }
  }
  for (GnnLayer* layer : {&model.layer1, &model.layer2})
    for (Parameter& p : layer->params)
      for (double& v : p.value.data()) v = get<double>(in);
  if (model.layer2.out_dim != model.num_classes) throw CheckpointError("output width does not match class count");
  return model;
}

void save_checkpoint(const std::filesystem::path& path, const TrainedGnn& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CheckpointError("cannot open " + path.string());
  save_checkpoint(out, model);
}

TrainedGnn load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open " + path.string());
  return load_checkpoint(in);
}

}  // namespace linksteal
