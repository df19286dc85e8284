#include "hierseg/model.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <random>

#include "hierseg/error.hpp"
#include "hierseg/io.hpp"

namespace hierseg {

namespace {

constexpr std::array<std::uint8_t, 8> kMagic{'H', 'S', 'E', 'G', 'W', 'T', 'S', 0};
constexpr std::uint32_t kFormatVersion = 1;

// 3x3 "same" convolution with zero padding. weight is [out][in][3][3].
void conv3x3_forward(const Tensor3& in, std::span<const double> weight, std::span<const double> bias, Tensor3& out) {
  const int h = in.height();
  const int w = in.width();
  for (int o = 0; o < out.channels(); ++o) {
    auto dst = out.channel(o);
    std::fill(dst.begin(), dst.end(), bias[static_cast<std::size_t>(o)]);
    for (int i = 0; i < in.channels(); ++i) {
      const auto src = in.channel(i);
      const double* k = weight.data() + (static_cast<std::size_t>(o) * static_cast<std::size_t>(in.channels()) + static_cast<std::size_t>(i)) * 9;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const double kv = k[(dy + 1) * 3 + (dx + 1)];
          const int y0 = std::max(0, -dy);
          const int y1 = std::min(h, h - dy);
          const int x0 = std::max(0, -dx);
          const int x1 = std::min(w, w - dx);
          for (int y = y0; y < y1; ++y) {
            double* drow = dst.data() + static_cast<std::size_t>(y) * static_cast<std::size_t>(w);
            const double* srow = src.data() + static_cast<std::size_t>(y + dy) * static_cast<std::size_t>(w) + dx;
            for (int x = x0; x < x1; ++x) drow[x] += kv * srow[x];
          }
        }
      }
    }
  }
}

// Accumulates weight/bias gradients and, when `din` is given, the input
// gradient of conv3x3_forward.
void conv3x3_backward(const Tensor3& in, std::span<const double> weight, const Tensor3& dout,
                      std::span<double> dweight, std::span<double> dbias, Tensor3* din) {
  const int h = in.height();
  const int w = in.width();
  for (int o = 0; o < dout.channels(); ++o) {
    const auto g = dout.channel(o);
    double bsum = 0.0;
    for (double v : g) bsum += v;
    dbias[static_cast<std::size_t>(o)] += bsum;
    for (int i = 0; i < in.channels(); ++i) {
      const auto src = in.channel(i);
      const std::size_t base = (static_cast<std::size_t>(o) * static_cast<std::size_t>(in.channels()) + static_cast<std::size_t>(i)) * 9;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const std::size_t kidx = base + static_cast<std::size_t>((dy + 1) * 3 + (dx + 1));
          const double kv = weight[kidx];
          const int y0 = std::max(0, -dy);
          const int y1 = std::min(h, h - dy);
          const int x0 = std::max(0, -dx);
          const int x1 = std::min(w, w - dx);
          double acc = 0.0;
          for (int y = y0; y < y1; ++y) {
            const double* grow = g.data() + static_cast<std::size_t>(y) * static_cast<std::size_t>(w);
            const double* srow = src.data() + static_cast<std::size_t>(y + dy) * static_cast<std::size_t>(w) + dx;
            for (int x = x0; x < x1; ++x) acc += grow[x] * srow[x];
          }
          dweight[kidx] += acc;
          if (din) {
            auto dst = din->channel(i);
            for (int y = y0; y < y1; ++y) {
              const double* grow = g.data() + static_cast<std::size_t>(y) * static_cast<std::size_t>(w);
              double* drow = dst.data() + static_cast<std::size_t>(y + dy) * static_cast<std::size_t>(w) + dx;
              for (int x = x0; x < x1; ++x) drow[x] += kv * grow[x];
            }
          }
        }
      }
    }
  }
}

void relu_inplace(Tensor3& t) {
  for (double& v : t.values()) v = v > 0.0 ? v : 0.0;
}

// Zeroes gradient entries whose forward activation was clipped.
void relu_backward(const Tensor3& activated, Tensor3& grad) {
  const auto a = activated.values();
  auto g = grad.values();
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!(a[i] > 0.0)) g[i] = 0.0;
  }
}

// Little-endian byte writer / bounds-checked reader.
class ByteWriter {
 public:
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void raw(std::span<const std::uint8_t> b) { bytes_.insert(bytes_.end(), b.begin(), b.end()); }
  std::vector<std::uint8_t> take() { return std::move(bytes_); }

 private:
  std::vector<std::uint8_t> bytes_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> b) : bytes_(b) {}
  std::span<const std::uint8_t> raw(std::size_t n) {
    if (bytes_.size() - pos_ < n) throw FormatError("weight file is truncated");
    auto out = bytes_.subspan(pos_, n);
    pos_ += n;
    return out;
  }
  std::uint32_t u32() {
    const auto b = raw(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[static_cast<std::size_t>(i)]) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    const auto b = raw(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[static_cast<std::size_t>(i)]) << (8 * i);
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

Tensor3::Tensor3(int channels, int height, int width, double fill) : channels_(channels), height_(height), width_(width) {
  if (channels <= 0 || height <= 0 || width <= 0) throw ShapeError("tensor dimensions must be positive");
  data_.assign(static_cast<std::size_t>(channels) * plane(), fill);
}

Tensor3 to_tensor(const Raster8& image) {
  Tensor3 t(image.channels(), image.height(), image.width());
  for (int c = 0; c < image.channels(); ++c) {
    for (int y = 0; y < image.height(); ++y) {
      for (int x = 0; x < image.width(); ++x) t.at(c, y, x) = image.at(y, x, c) / 255.0;
    }
  }
  return t;
}

struct DualBranchNet::Activations {
  Tensor3 pooled;
  Tensor3 g1;
  Tensor3 g2;
  Tensor3 l1;
  Tensor3 l2;
  LogitField logits;
};

DualBranchNet::DualBranchNet(NetConfig cfg) : cfg_(cfg) {
  if (cfg.in_channels <= 0 || cfg.global_channels <= 0 || cfg.local_channels <= 0 || cfg.pool <= 0 ||
      cfg.num_leaves < 2) {
    throw ConfigError("network widths must be positive and num_leaves >= 2");
  }
  const int c = cfg.in_channels;
  const int g = cfg.global_channels;
  const int f = cfg.local_channels;
  const int k = cfg.num_leaves;
  const std::vector<std::pair<std::string, std::vector<int>>> layout{
      {"global.conv1.weight", {g, c, 3, 3}}, {"global.conv1.bias", {g}},
      {"global.conv2.weight", {g, g, 3, 3}}, {"global.conv2.bias", {g}},
      {"local.conv1.weight", {f, c, 3, 3}},  {"local.conv1.bias", {f}},
      {"local.conv2.weight", {f, f, 3, 3}},  {"local.conv2.bias", {f}},
      {"head.weight", {k, g + f}},           {"head.bias", {k}},
  };
  std::size_t offset = 0;
  for (const auto& [name, shape] : layout) {
    std::size_t size = 1;
    for (int d : shape) size *= static_cast<std::size_t>(d);
    manifest_.push_back({name, shape, offset, size});
    offset += size;
  }
  params_.assign(offset, 0.0);
}

DualBranchNet DualBranchNet::initialized(NetConfig cfg, std::uint64_t seed) {
  DualBranchNet net(cfg);
  std::mt19937_64 rng(seed);
  for (const auto& t : net.manifest_) {
    if (t.shape.size() == 1) continue;  // biases start at zero
    std::size_t fan_in = 1;
    for (std::size_t d = 1; d < t.shape.size(); ++d) fan_in *= static_cast<std::size_t>(t.shape[d]);
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (std::size_t i = 0; i < t.size; ++i) net.params_[t.offset + i] = dist(rng);
  }
  return net;
}

std::span<double> DualBranchNet::tensor(std::string_view name) {
  for (const auto& t : manifest_) {
    if (t.name == name) return std::span<double>(params_).subspan(t.offset, t.size);
  }
  throw RangeError("no parameter tensor named '" + std::string(name) + "'");
}

std::span<const double> DualBranchNet::tensor(std::string_view name) const {
  return const_cast<DualBranchNet*>(this)->tensor(name);
}

void DualBranchNet::check_input(const Tensor3& image) const {
  if (image.channels() != cfg_.in_channels) {
    throw ShapeError("network expects " + std::to_string(cfg_.in_channels) + " input channels, got " +
                     std::to_string(image.channels()));
  }
  if (image.height() % cfg_.pool != 0 || image.width() % cfg_.pool != 0) {
    throw ShapeError("input " + std::to_string(image.height()) + "x" + std::to_string(image.width()) +
                     " is not divisible by the pool factor " + std::to_string(cfg_.pool));
  }
}

DualBranchNet::Activations DualBranchNet::run(const Tensor3& image) const {
  check_input(image);
  const int h = image.height();
  const int w = image.width();
  const int s = cfg_.pool;
  const int hs = h / s;
  const int ws = w / s;
  const int g = cfg_.global_channels;
  const int f = cfg_.local_channels;
  const int k = cfg_.num_leaves;

  Activations a;
  a.pooled = Tensor3(image.channels(), hs, ws);
  const double inv = 1.0 / (s * s);
  for (int c = 0; c < image.channels(); ++c) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) a.pooled.at(c, y / s, x / s) += image.at(c, y, x) * inv;
    }
  }

  a.g1 = Tensor3(g, hs, ws);
  conv3x3_forward(a.pooled, tensor("global.conv1.weight"), tensor("global.conv1.bias"), a.g1);
  relu_inplace(a.g1);
  a.g2 = Tensor3(g, hs, ws);
  conv3x3_forward(a.g1, tensor("global.conv2.weight"), tensor("global.conv2.bias"), a.g2);
  relu_inplace(a.g2);

  a.l1 = Tensor3(f, h, w);
  conv3x3_forward(image, tensor("local.conv1.weight"), tensor("local.conv1.bias"), a.l1);
  relu_inplace(a.l1);
  a.l2 = Tensor3(f, h, w);
  conv3x3_forward(a.l1, tensor("local.conv2.weight"), tensor("local.conv2.bias"), a.l2);
  relu_inplace(a.l2);

  const auto hw = tensor("head.weight");
  const auto hb = tensor("head.bias");
  a.logits = LogitField(h, w, k);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      auto out = a.logits.pixel(static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x));
      for (int j = 0; j < k; ++j) {
        const double* row = hw.data() + static_cast<std::size_t>(j) * static_cast<std::size_t>(g + f);
        double v = hb[static_cast<std::size_t>(j)];
        for (int c = 0; c < g; ++c) v += row[c] * a.g2.at(c, y / s, x / s);
        for (int c = 0; c < f; ++c) v += row[g + c] * a.l2.at(c, y, x);
        out[static_cast<std::size_t>(j)] = v;
      }
    }
  }
  return a;
}

LogitField DualBranchNet::forward(const Tensor3& image) const { return run(image).logits; }

LossBreakdown DualBranchNet::accumulate_gradient(const Tensor3& image, const TargetField& target,
                                                 const ClassHierarchy& h, const LossConfig& cfg,
                                                 std::span<double> grad) const {
  if (grad.size() != params_.size()) throw ShapeError("gradient buffer does not match the parameter count");
  const Activations a = run(image);
  for (double v : a.logits.values()) {
    if (!std::isfinite(v)) throw NumericalError("network produced non-finite logits");
  }
  GradientField dlogits;
  const LossBreakdown loss = combined_loss_with_grad(a.logits, target, h, cfg, dlogits);

  auto slice = [&](std::string_view name) {
    for (const auto& t : manifest_) {
      if (t.name == name) return grad.subspan(t.offset, t.size);
    }
    throw RangeError("no parameter tensor named '" + std::string(name) + "'");
  };

  const int hgt = image.height();
  const int wid = image.width();
  const int s = cfg_.pool;
  const int g = cfg_.global_channels;
  const int f = cfg_.local_channels;
  const int k = cfg_.num_leaves;

  // Predictor head.
  const auto hw = tensor("head.weight");
  auto dhw = slice("head.weight");
  auto dhb = slice("head.bias");
  Tensor3 dg2(g, a.g2.height(), a.g2.width());
  Tensor3 dl2(f, hgt, wid);
  for (int y = 0; y < hgt; ++y) {
    for (int x = 0; x < wid; ++x) {
      const auto dl = dlogits.pixel(static_cast<std::size_t>(y) * static_cast<std::size_t>(wid) + static_cast<std::size_t>(x));
      for (int j = 0; j < k; ++j) {
        const double d = dl[static_cast<std::size_t>(j)];
        dhb[static_cast<std::size_t>(j)] += d;
        const std::size_t row = static_cast<std::size_t>(j) * static_cast<std::size_t>(g + f);
        for (int c = 0; c < g; ++c) {
          dhw[row + static_cast<std::size_t>(c)] += d * a.g2.at(c, y / s, x / s);
          // Nearest upsampling routes every output pixel back to its block.
          dg2.at(c, y / s, x / s) += d * hw[row + static_cast<std::size_t>(c)];
        }
        for (int c = 0; c < f; ++c) {
          dhw[row + static_cast<std::size_t>(g + c)] += d * a.l2.at(c, y, x);
          dl2.at(c, y, x) += d * hw[row + static_cast<std::size_t>(g + c)];
        }
      }
    }
  }

  // Global branch.
  relu_backward(a.g2, dg2);
  Tensor3 dg1(g, a.g1.height(), a.g1.width());
  conv3x3_backward(a.g1, tensor("global.conv2.weight"), dg2, slice("global.conv2.weight"), slice("global.conv2.bias"),
                   &dg1);
  relu_backward(a.g1, dg1);
  conv3x3_backward(a.pooled, tensor("global.conv1.weight"), dg1, slice("global.conv1.weight"),
                   slice("global.conv1.bias"), nullptr);

  // Local branch.
  relu_backward(a.l2, dl2);
  Tensor3 dl1(f, hgt, wid);
  conv3x3_backward(a.l1, tensor("local.conv2.weight"), dl2, slice("local.conv2.weight"), slice("local.conv2.bias"),
                   &dl1);
  relu_backward(a.l1, dl1);
  conv3x3_backward(image, tensor("local.conv1.weight"), dl1, slice("local.conv1.weight"), slice("local.conv1.bias"),
                   nullptr);
  return loss;
}

LabelMask DualBranchNet::predict(const Tensor3& image) const { return predict_labels(forward(image)); }

std::vector<bool> DualBranchNet::activation_pattern(const Tensor3& image) const {
  const Activations a = run(image);
  std::vector<bool> bits;
  for (const Tensor3* t : {&a.g1, &a.g2, &a.l1, &a.l2}) {
    for (double v : t->values()) bits.push_back(v > 0.0);
  }
  return bits;
}

LabelMask predict_labels(const LogitField& logits) {
  if (logits.channels() > kNumContactClasses) {
    throw RangeError("label masks hold at most " + std::to_string(kNumContactClasses) + " classes");
  }
  LabelMask out(logits.height(), logits.width());
  for (int y = 0; y < logits.height(); ++y) {
    for (int x = 0; x < logits.width(); ++x) {
      const auto v = logits.pixel(static_cast<std::size_t>(y) * static_cast<std::size_t>(logits.width()) + static_cast<std::size_t>(x));
      int best = 0;
      for (int c = 1; c < logits.channels(); ++c) {
        if (v[static_cast<std::size_t>(c)] > v[static_cast<std::size_t>(best)]) best = c;
      }
      out.set(y, x, static_cast<ContactClass>(best));
    }
  }
  return out;
}

std::vector<std::uint8_t> serialize_weights(const DualBranchNet& net) {
  ByteWriter w;
  w.raw(kMagic);
  w.u32(kFormatVersion);
  const auto& c = net.config();
  for (int v : {c.in_channels, c.global_channels, c.local_channels, c.pool, c.num_leaves}) {
    w.u32(static_cast<std::uint32_t>(v));
  }
  w.u32(static_cast<std::uint32_t>(net.manifest().size()));
  for (const auto& t : net.manifest()) {
    w.u32(static_cast<std::uint32_t>(t.name.size()));
    w.raw({reinterpret_cast<const std::uint8_t*>(t.name.data()), t.name.size()});
    w.u32(static_cast<std::uint32_t>(t.shape.size()));
    for (int d : t.shape) w.u32(static_cast<std::uint32_t>(d));
  }
  w.u64(net.parameters().size());
  for (double v : net.parameters()) w.f64(v);
  return w.take();
}

DualBranchNet deserialize_weights(std::span<const std::uint8_t> bytes, std::optional<int> expected_leaves) {
  ByteReader r(bytes);
  const auto magic = r.raw(kMagic.size());
  if (!std::equal(magic.begin(), magic.end(), kMagic.begin())) throw FormatError("not a weight file (bad magic)");
  const auto version = r.u32();
  if (version != kFormatVersion) throw FormatError("unsupported weight file version " + std::to_string(version));

  NetConfig cfg;
  cfg.in_channels = static_cast<int>(r.u32());
  cfg.global_channels = static_cast<int>(r.u32());
  cfg.local_channels = static_cast<int>(r.u32());
  cfg.pool = static_cast<int>(r.u32());
  cfg.num_leaves = static_cast<int>(r.u32());
  if (expected_leaves && cfg.num_leaves != *expected_leaves) {
    throw FormatError("weight file predicts " + std::to_string(cfg.num_leaves) + " classes, expected " +
                      std::to_string(*expected_leaves));
  }
  DualBranchNet net = [&] {
    try {
      return DualBranchNet(cfg);
    } catch (const ConfigError& e) {
      throw FormatError(std::string("weight file header: ") + e.what());
    }
  }();

  const auto count = r.u32();
  if (count != net.manifest().size()) throw FormatError("weight file manifest has the wrong tensor count");
  for (const auto& expected : net.manifest()) {
    const auto len = r.u32();
    const auto name_bytes = r.raw(len);
    const std::string name(name_bytes.begin(), name_bytes.end());
    const auto rank = r.u32();
    std::vector<int> shape;
    for (std::uint32_t i = 0; i < rank && i < 8; ++i) shape.push_back(static_cast<int>(r.u32()));
    if (name != expected.name || shape != expected.shape) {
      throw FormatError("weight file manifest entry '" + name + "' does not match the network layout");
    }
  }
  if (r.u64() != net.parameters().size()) throw FormatError("weight file parameter count mismatch");
  for (double& v : net.parameters()) v = r.f64();
  if (!r.done()) throw FormatError("weight file has trailing bytes");
  return net;
}

void save_weights(const DualBranchNet& net, const std::filesystem::path& path) {
  write_file_atomic(path, std::span<const std::uint8_t>(serialize_weights(net)));
}

DualBranchNet load_weights(const std::filesystem::path& path, std::optional<int> expected_leaves) {
  try {
    return deserialize_weights(read_file_bytes(path), expected_leaves);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace hierseg
