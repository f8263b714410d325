#include "numerics/params.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "common/config.hpp"
#include "common/error.hpp"

namespace graphmem::num {

Tensor &ParamSet::add(const std::string &name, Tensor value) {
  if (contains(name))
    throw DimensionError("duplicate parameter name: " + name);
  index_[name] = entries_.size();
  entries_.emplace_back(name, std::move(value));
  return entries_.back().second;
}

Tensor &ParamSet::at(const std::string &name) {
  auto it = index_.find(name);
  if (it == index_.end())
    throw DimensionError("unknown parameter: " + name);
  return entries_[it->second].second;
}

const Tensor &ParamSet::at(const std::string &name) const {
  auto it = index_.find(name);
  if (it == index_.end())
    throw DimensionError("unknown parameter: " + name);
  return entries_[it->second].second;
}

ParamSet ParamSet::zeros_like() const {
  ParamSet out;
  for (const auto &[n, t]: entries_)
    out.add(n, Tensor(t.rows(), t.cols()));
  return out;
}

void ParamSet::add_inplace(const ParamSet &other) {
  for (auto &[n, t]: entries_)
    t.add_inplace(other.at(n));
}

void ParamSet::scale_inplace(double s) {
  for (auto &[n, t]: entries_)
    t.scale_inplace(s);
}

std::size_t ParamSet::scalar_count() const {
  std::size_t n = 0;
  for (const auto &e: entries_)
    n += e.second.size();
  return n;
}

Tensor glorot_uniform(std::size_t rows, std::size_t cols, Rng &rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  Tensor t(rows, cols);
  for (auto &v: t.data())
    v = rng.uniform(-limit, limit);
  return t;
}

BoundParams::BoundParams(Tape &tape, const ParamSet &params,
                         bool requires_grad)
    : tape_(&tape), params_(&params) {
  for (const auto &[name, value]: params)
    vars_.emplace(name, requires_grad ? tape.variable(value)
                                      : tape.constant(value));
}

Var BoundParams::operator[](const std::string &name) const {
  auto it = vars_.find(name);
  if (it == vars_.end())
    throw DimensionError("parameter not bound: " + name);
  return it->second;
}

ParamSet BoundParams::gradients() const {
  ParamSet out;
  for (const auto &[name, value]: *params_)
    out.add(name, tape_->grad_of(vars_.at(name)));
  return out;
}

ParamSet finite_difference_gradient(
    const std::function<double(const ParamSet &)> &f, ParamSet &params,
    double eps) {
  ParamSet grads = params.zeros_like();
  for (std::size_t p = 0; p < params.size(); ++p) {
    Tensor &theta = params.tensor(p);
    Tensor &g = grads.tensor(p);
    for (std::size_t i = 0; i < theta.size(); ++i) {
      const double saved = theta[i];
      theta[i] = saved + eps;
      const double up = f(params);
      theta[i] = saved - eps;
      const double down = f(params);
      theta[i] = saved;
      g[i] = (up - down) / (2.0 * eps);
    }
  }
  return grads;
}

double max_relative_error(const ParamSet &exact, const ParamSet &estimate) {
  double worst = 0;
  for (const auto &[name, a]: exact) {
    const Tensor &b = estimate.at(name);
    require_same_shape(a, b, "max_relative_error");
    for (std::size_t i = 0; i < a.size(); ++i)
      worst = std::max(worst,
                       std::abs(a[i] - b[i]) / std::max(1.0, std::abs(b[i])));
  }
  return worst;
}

namespace {

constexpr char kMagic[8] = {'G', 'M', 'E', 'M', 'C', 'K', 'P', 'T'};

void put_u32(std::ostream &out, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i)
    b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char *>(b), 4);
}

void put_u64(std::ostream &out, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i)
    b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char *>(b), 8);
}

void put_f64(std::ostream &out, double d) {
  std::uint64_t bits;
  std::memcpy(&bits, &d, sizeof bits);
  put_u64(out, bits);
}

void read_exact(std::istream &in, void *buf, std::size_t n) {
  in.read(static_cast<char *>(buf), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n)
    throw FormatError("checkpoint truncated");
}

std::uint32_t get_u32(std::istream &in) {
  unsigned char b[4];
  read_exact(in, b, 4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i)
    v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

std::uint64_t get_u64(std::istream &in) {
  unsigned char b[8];
  read_exact(in, b, 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i)
    v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

} // namespace

void write_checkpoint(std::ostream &out, const Checkpoint &ckpt) {
  out.write(kMagic, sizeof kMagic);
  put_u32(out, kCheckpointVersion);
  std::string meta;
  for (const auto &[k, v]: ckpt.metadata)
    meta += k + "=" + v + "\n";
  put_u32(out, static_cast<std::uint32_t>(meta.size()));
  out.write(meta.data(), static_cast<std::streamsize>(meta.size()));
  put_u32(out, static_cast<std::uint32_t>(ckpt.params.size()));
  for (const auto &[name, t]: ckpt.params) {
    put_u32(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    put_u64(out, t.rows());
    put_u64(out, t.cols());
    for (double d: t.data())
      put_f64(out, d);
  }
}

Checkpoint read_checkpoint(std::istream &in) {
  char magic[8];
  read_exact(in, magic, 8);
  if (std::memcmp(magic, kMagic, 8) != 0)
    throw FormatError("not a checkpoint file (bad magic)");
  const auto version = get_u32(in);
  if (version != kCheckpointVersion)
    throw FormatError("checkpoint format version " + std::to_string(version)
                      + " is not supported (expected "
                      + std::to_string(kCheckpointVersion) + ")");
  Checkpoint ckpt;
  std::string meta(get_u32(in), '\0');
  read_exact(in, meta.data(), meta.size());
  try {
    ckpt.metadata = KeyValueConfig::parse(meta, "checkpoint").entries();
  } catch (const ConfigError &e) {
    throw FormatError(std::string("checkpoint metadata: ") + e.what());
  }
  const auto count = get_u32(in);
  for (std::uint32_t e = 0; e < count; ++e) {
    std::string name(get_u32(in), '\0');
    read_exact(in, name.data(), name.size());
    const auto rows = get_u64(in);
    const auto cols = get_u64(in);
    if (rows > (1u << 24) || cols > (1u << 24))
      throw FormatError("checkpoint entry '" + name + "' has absurd shape");
    Tensor t(rows, cols);
    for (auto &d: t.data()) {
      std::uint64_t bits = get_u64(in);
      std::memcpy(&d, &bits, sizeof d);
    }
    if (ckpt.params.contains(name))
      throw FormatError("checkpoint has duplicate entry '" + name + "'");
    ckpt.params.add(name, std::move(t));
  }
  return ckpt;
}

void save_checkpoint(const std::string &path, const Checkpoint &ckpt) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw DataError("cannot write checkpoint: " + path);
  write_checkpoint(out, ckpt);
}

Checkpoint load_checkpoint(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw DataError("cannot open checkpoint: " + path);
  return read_checkpoint(in);
}

} // namespace graphmem::num
