#include "mpt/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <stdexcept>

namespace mpt {
namespace {

enum class LayerTag : std::uint32_t { kDense = 0, kConv2d = 1, kCRelu = 2, kFlatten = 3 };

class Writer {
 public:
  void u32(std::uint32_t v) { put(v, 4); }
  void u64(std::uint64_t v) { put(v, 8); }
  void f64(double v) { put(std::bit_cast<std::uint64_t>(v), 8); }
  void raw(const char* s, std::size_t n) { bytes.insert(bytes.end(), s, s + n); }
  std::vector<std::uint8_t> bytes;

 private:
  void put(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) bytes.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
};

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& b) : bytes_(b) {}
  std::uint32_t u32() { return static_cast<std::uint32_t>(get(4)); }
  std::uint64_t u64() { return get(8); }
  double f64() { return std::bit_cast<double>(get(8)); }
  void expect(const char* s, std::size_t n) {
    need(n);
    if (std::memcmp(bytes_.data() + pos_, s, n) != 0) {
      throw std::runtime_error("not a checkpoint: bad magic bytes");
    }
    pos_ += n;
  }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw std::runtime_error("checkpoint truncated");
  }
  std::uint64_t get(int n) {
    need(static_cast<std::size_t>(n));
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= std::uint64_t{bytes_[pos_ + i]} << (8 * i);
    pos_ += static_cast<std::size_t>(n);
    return v;
  }
  const std::vector<std::uint8_t>& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const NetworkSpec& spec, const ParameterVector& params) {
  if (params.size() != parameter_count(spec)) {
    throw std::invalid_argument("parameter count does not match network spec");
  }
  Writer w;
  w.raw("MPTF", 4);
  w.u32(kCheckpointVersion);
  w.u32(spec.num_labels);
  w.u32(static_cast<std::uint32_t>(spec.input_shape.size()));
  for (auto d : spec.input_shape) w.u32(d);
  w.u32(static_cast<std::uint32_t>(spec.layers.size()));
  for (const auto& layer : spec.layers) {
    if (const auto* d = std::get_if<Dense>(&layer)) {
      w.u32(static_cast<std::uint32_t>(LayerTag::kDense));
      w.u32(d->in_dim);
      w.u32(d->out_dim);
    } else if (const auto* c = std::get_if<Conv2d>(&layer)) {
      w.u32(static_cast<std::uint32_t>(LayerTag::kConv2d));
      w.u32(c->in_channels);
      w.u32(c->out_channels);
      w.u32(c->kernel_size);
      w.u32(c->stride);
    } else if (std::holds_alternative<CRelu>(layer)) {
      w.u32(static_cast<std::uint32_t>(LayerTag::kCRelu));
    } else {
      w.u32(static_cast<std::uint32_t>(LayerTag::kFlatten));
    }
  }
  w.u64(params.size());
  for (double v : params.values) w.f64(v);
  return std::move(w.bytes);
}

Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes) {
  Reader r(bytes);
  r.expect("MPTF", 4);
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion) {
    throw std::runtime_error("unsupported checkpoint version " + std::to_string(version));
  }
  Checkpoint ck;
  ck.spec.num_labels = r.u32();
  const std::uint32_t rank = r.u32();
  if (rank > r.remaining() / 4) throw std::runtime_error("checkpoint truncated");
  for (std::uint32_t i = 0; i < rank; ++i) ck.spec.input_shape.push_back(r.u32());
  const std::uint32_t n_layers = r.u32();
  if (n_layers > r.remaining() / 4) throw std::runtime_error("checkpoint truncated");
  for (std::uint32_t i = 0; i < n_layers; ++i) {
    switch (static_cast<LayerTag>(r.u32())) {
      case LayerTag::kDense: {
        Dense d;
        d.in_dim = r.u32();
        d.out_dim = r.u32();
        ck.spec.layers.emplace_back(d);
        break;
      }
      case LayerTag::kConv2d: {
        Conv2d c;
        c.in_channels = r.u32();
        c.out_channels = r.u32();
        c.kernel_size = r.u32();
        c.stride = r.u32();
        ck.spec.layers.emplace_back(c);
        break;
      }
      case LayerTag::kCRelu:
        ck.spec.layers.emplace_back(CRelu{});
        break;
      case LayerTag::kFlatten:
        ck.spec.layers.emplace_back(Flatten{});
        break;
      default:
        throw std::runtime_error("unknown layer tag in checkpoint");
    }
  }
  const std::uint64_t count = r.u64();
  if (count != parameter_count(ck.spec)) {
    throw std::runtime_error("checkpoint parameter count does not match its network spec");
  }
  if (count > r.remaining() / 8) throw std::runtime_error("checkpoint truncated");
  ck.params.values.resize(count);
  for (auto& v : ck.params.values) v = r.f64();
  if (r.remaining() != 0) throw std::runtime_error("trailing bytes after checkpoint");
  return ck;
}

void save_checkpoint(const std::filesystem::path& path, const NetworkSpec& spec,
                     const ParameterVector& params) {
  const auto bytes = encode_checkpoint(spec, params);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes);
}

}  // namespace mpt
