#include "contlearn/network.hpp"

#include <atomic>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "contlearn/errors.hpp"

namespace contlearn {

namespace {

std::atomic<std::uint64_t> next_network_id{1};

double act_linear(double x) { return x; }
double act_tanh(double x) { return std::tanh(x); }
double act_relu(double x) { return x > 0.0 ? x : 0.0; }

double dact_linear(double) { return 1.0; }
double dact_tanh(double x) {
  const double t = std::tanh(x);
  return 1.0 - t * t;
}
// Derivative at 0 defined as 0.
double dact_relu(double x) { return x > 0.0 ? 1.0 : 0.0; }

void check_layer(const Layer& layer, const char* what) {
  if (layer.weight.empty() || layer.bias.empty()) {
    throw ParameterError(std::string(what) + ": empty layer");
  }
  if (layer.bias.cols() != 1 || layer.bias.rows() != layer.weight.rows()) {
    throw ShapeError(std::string(what) + ": bias shape " +
                     std::to_string(layer.bias.rows()) + "x" +
                     std::to_string(layer.bias.cols()) + " for weight rows " +
                     std::to_string(layer.weight.rows()));
  }
}

void hash_matrix(const Matrix& m, std::uint64_t& h) {
  for (double v : m.data()) {
    const std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
    h = fnv1a64(&bits, sizeof bits, h);
  }
}

}  // namespace

const char* to_string(ActivationKind kind) {
  switch (kind) {
    case ActivationKind::linear: return "linear";
    case ActivationKind::tanh: return "tanh";
    case ActivationKind::relu: return "relu";
  }
  return "?";
}

std::optional<ActivationKind> activation_from_string(const std::string& s) {
  if (s == "linear") return ActivationKind::linear;
  if (s == "tanh") return ActivationKind::tanh;
  if (s == "relu") return ActivationKind::relu;
  return std::nullopt;
}

double apply_activation_scalar(ActivationKind kind, double x) {
  switch (kind) {
    case ActivationKind::linear: return act_linear(x);
    case ActivationKind::tanh: return act_tanh(x);
    case ActivationKind::relu: return act_relu(x);
  }
  return x;
}

double activation_derivative_scalar(ActivationKind kind, double pre_act) {
  switch (kind) {
    case ActivationKind::linear: return dact_linear(pre_act);
    case ActivationKind::tanh: return dact_tanh(pre_act);
    case ActivationKind::relu: return dact_relu(pre_act);
  }
  return 1.0;
}

Matrix apply_activation(ActivationKind kind, const Matrix& pre_act) {
  switch (kind) {
    case ActivationKind::linear: return pre_act;
    case ActivationKind::tanh: return map(pre_act, act_tanh);
    case ActivationKind::relu: return map(pre_act, act_relu);
  }
  return pre_act;
}

Matrix activation_derivative(ActivationKind kind, const Matrix& pre_act) {
  switch (kind) {
    case ActivationKind::linear:
      return Matrix::constant(pre_act.rows(), pre_act.cols(), 1.0);
    case ActivationKind::tanh: return map(pre_act, dact_tanh);
    case ActivationKind::relu: return map(pre_act, dact_relu);
  }
  return pre_act;
}

void Gradients::accumulate(const Gradients& other) {
  if (trunk.size() != other.trunk.size() || heads.size() != other.heads.size()) {
    throw ShapeError("Gradients::accumulate: block structure mismatch");
  }
  for (std::size_t i = 0; i < trunk.size(); ++i) {
    trunk[i].weight = add(trunk[i].weight, other.trunk[i].weight);
    trunk[i].bias = add(trunk[i].bias, other.trunk[i].bias);
  }
  for (auto& [id, layer] : heads) {
    auto it = other.heads.find(id);
    if (it == other.heads.end()) {
      throw ShapeError("Gradients::accumulate: missing head '" + id + "'");
    }
    layer.weight = add(layer.weight, it->second.weight);
    layer.bias = add(layer.bias, it->second.bias);
  }
}

bool Gradients::all_finite() const {
  auto finite = [](const Matrix& m) {
    for (double v : m.data())
      if (!std::isfinite(v)) return false;
    return true;
  };
  for (const auto& l : trunk)
    if (!finite(l.weight) || !finite(l.bias)) return false;
  for (const auto& [id, l] : heads)
    if (!finite(l.weight) || !finite(l.bias)) return false;
  return true;
}

Network Network::gaussian(const std::vector<std::size_t>& dims,
                          ActivationKind activation, double sigma, Rng& rng) {
  if (dims.size() < 2) {
    throw ParameterError("Network::gaussian: need at least [in, out] dims");
  }
  std::vector<Layer> trunk;
  trunk.reserve(dims.size() - 1);
  for (std::size_t k = 1; k < dims.size(); ++k) {
    Layer layer;
    layer.weight = gaussian_init(dims[k], dims[k - 1], sigma, rng);
    layer.bias = Matrix(dims[k], 1);
    trunk.push_back(std::move(layer));
  }
  return Network(std::move(trunk), activation);
}

Network::Network(std::vector<Layer> trunk, ActivationKind activation)
    : trunk_(std::move(trunk)),
      activation_(activation),
      id_(next_network_id.fetch_add(1)) {
  if (trunk_.empty()) throw ParameterError("Network: empty trunk");
  for (std::size_t k = 0; k < trunk_.size(); ++k) {
    check_layer(trunk_[k], "Network trunk");
    if (k > 0 && trunk_[k].weight.cols() != trunk_[k - 1].weight.rows()) {
      throw ShapeError("Network: trunk layer " + std::to_string(k) +
                       " input dim " + std::to_string(trunk_[k].weight.cols()) +
                       " != previous output dim " +
                       std::to_string(trunk_[k - 1].weight.rows()));
    }
  }
}

Network::Network(const Network& other)
    : trunk_(other.trunk_),
      heads_(other.heads_),
      activation_(other.activation_),
      id_(next_network_id.fetch_add(1)),
      version_(0) {}

Network& Network::operator=(const Network& other) {
  if (this == &other) return *this;
  trunk_ = other.trunk_;
  heads_ = other.heads_;
  activation_ = other.activation_;
  id_ = next_network_id.fetch_add(1);
  version_ = 0;
  return *this;
}

std::size_t Network::input_dim() const { return trunk_.front().weight.cols(); }

std::size_t Network::representation_dim() const {
  return trunk_.back().weight.rows();
}

std::vector<std::string> Network::head_ids() const {
  std::vector<std::string> ids;
  ids.reserve(heads_.size());
  for (const auto& [id, _] : heads_) ids.push_back(id);
  return ids;
}

std::size_t Network::head_out_dim(const std::string& id) const {
  auto it = heads_.find(id);
  if (it == heads_.end()) throw LookupError("unknown head '" + id + "'");
  return it->second.weight.rows();
}

void Network::attach_head(const std::string& id, std::size_t out_dim,
                          double sigma, Rng& rng) {
  Layer layer;
  layer.weight = gaussian_init(out_dim, representation_dim(), sigma, rng);
  layer.bias = Matrix(out_dim, 1);
  attach_head(id, std::move(layer));
}

void Network::attach_head(const std::string& id, Layer layer) {
  if (heads_.count(id)) {
    throw UsageError("attach_head: head '" + id + "' already exists");
  }
  check_layer(layer, "attach_head");
  if (layer.weight.cols() != representation_dim()) {
    throw ShapeError("attach_head: head input dim " +
                     std::to_string(layer.weight.cols()) +
                     " != representation dim " +
                     std::to_string(representation_dim()));
  }
  heads_.emplace(id, std::move(layer));
  ++version_;
}

Network::ForwardResult Network::forward(
    const Matrix& x, const std::vector<std::string>& head_ids) const {
  if (x.rows() != input_dim()) {
    throw ShapeError("forward: input rows " + std::to_string(x.rows()) +
                     " != trunk input dim " + std::to_string(input_dim()));
  }
  ForwardResult result;
  ForwardCache& cache = result.cache;
  cache.input_ = x;
  cache.pre_acts_.reserve(trunk_.size());
  cache.post_acts_.reserve(trunk_.size());

  const Matrix* h = &x;
  for (const Layer& layer : trunk_) {
    Matrix z = add_col_broadcast(matmul(layer.weight, *h), layer.bias);
    cache.post_acts_.push_back(apply_activation(activation_, z));
    cache.pre_acts_.push_back(std::move(z));
    h = &cache.post_acts_.back();
  }

  for (const std::string& id : head_ids) {
    auto it = heads_.find(id);
    if (it == heads_.end()) {
      throw LookupError("forward: unknown head '" + id + "'");
    }
    result.logits[id] =
        add_col_broadcast(matmul(it->second.weight, *h), it->second.bias);
  }

  cache.head_ids_ = head_ids;
  cache.net_id_ = id_;
  cache.net_version_ = version_;
  cache.used_ = false;
  return result;
}

Gradients Network::backward(ForwardCache& cache,
                            const std::map<std::string, Matrix>& dlogits) const {
  if (cache.used_) {
    throw UsageError("backward: cache already consumed");
  }
  if (cache.net_id_ != id_ || cache.net_version_ != version_) {
    throw UsageError("backward: cache is stale or from a different network");
  }
  cache.used_ = true;

  const Matrix& rep = cache.post_acts_.back();
  Gradients grads;
  grads.trunk.reserve(trunk_.size());
  for (const Layer& layer : trunk_) {
    grads.trunk.push_back({Matrix(layer.weight.rows(), layer.weight.cols()),
                           Matrix(layer.bias.rows(), 1)});
  }
  for (const auto& [id, layer] : heads_) {
    grads.heads.emplace(id,
                        Layer{Matrix(layer.weight.rows(), layer.weight.cols()),
                              Matrix(layer.bias.rows(), 1)});
  }

  Matrix d_rep(rep.rows(), rep.cols());
  for (const auto& [id, g] : dlogits) {
    bool requested = false;
    for (const auto& requested_id : cache.head_ids_) {
      if (requested_id == id) {
        requested = true;
        break;
      }
    }
    if (!requested) {
      throw UsageError("backward: head '" + id +
                       "' was not part of the forward call");
    }
    const Layer& head = heads_.at(id);
    if (g.rows() != head.weight.rows() || g.cols() != rep.cols()) {
      throw ShapeError("backward: upstream gradient shape for head '" + id +
                       "'");
    }
    Layer& hg = grads.heads.at(id);
    hg.weight = matmul(g, transpose(rep));
    hg.bias = row_sums(g);
    d_rep = add(d_rep, matmul(transpose(head.weight), g));
  }

  Matrix d_h = std::move(d_rep);
  for (std::size_t k = trunk_.size(); k-- > 0;) {
    const Matrix dz =
        hadamard(d_h, activation_derivative(activation_, cache.pre_acts_[k]));
    const Matrix& below =
        k == 0 ? cache.input_ : cache.post_acts_[k - 1];
    grads.trunk[k].weight = matmul(dz, transpose(below));
    grads.trunk[k].bias = row_sums(dz);
    if (k > 0) d_h = matmul(transpose(trunk_[k].weight), dz);
  }
  return grads;
}

void Network::apply_sgd(const Gradients& grads, double lr) {
  if (!(lr > 0.0)) {
    throw ParameterError("apply_sgd: lr must be positive");
  }
  if (grads.trunk.size() != trunk_.size() || grads.heads.size() != heads_.size()) {
    throw ShapeError("apply_sgd: gradient structure mismatch");
  }
  if (!grads.all_finite()) {
    throw NumericalError("apply_sgd: non-finite gradient, step aborted");
  }
  for (std::size_t k = 0; k < trunk_.size(); ++k) {
    trunk_[k].weight = sub(trunk_[k].weight, scale(grads.trunk[k].weight, lr));
    trunk_[k].bias = sub(trunk_[k].bias, scale(grads.trunk[k].bias, lr));
  }
  for (auto& [id, layer] : heads_) {
    const Layer& g = grads.heads.at(id);
    layer.weight = sub(layer.weight, scale(g.weight, lr));
    layer.bias = sub(layer.bias, scale(g.bias, lr));
  }
  ++version_;
}

Matrix Network::end_to_end_map(const std::string& head_id) const {
  if (activation_ != ActivationKind::linear) {
    throw ModeError("end_to_end_map: network activation is not linear");
  }
  for (const Layer& layer : trunk_) {
    if (max_abs(layer.bias) != 0.0) {
      throw ModeError("end_to_end_map: trunk biases are not zero");
    }
  }
  auto it = heads_.find(head_id);
  if (it == heads_.end()) {
    throw LookupError("end_to_end_map: unknown head '" + head_id + "'");
  }
  if (max_abs(it->second.bias) != 0.0) {
    throw ModeError("end_to_end_map: head bias is not zero");
  }
  Matrix product = trunk_.front().weight;
  for (std::size_t k = 1; k < trunk_.size(); ++k) {
    product = matmul(trunk_[k].weight, product);
  }
  return matmul(it->second.weight, product);
}

std::uint64_t Network::param_hash() const {
  std::uint64_t h = trunk_hash();
  for (const auto& [id, layer] : heads_) {
    h = fnv1a64(id.data(), id.size(), h);
    hash_matrix(layer.weight, h);
    hash_matrix(layer.bias, h);
  }
  return h;
}

std::uint64_t Network::trunk_hash() const {
  std::uint64_t h = 1469598103934665603ULL;
  for (const Layer& layer : trunk_) {
    hash_matrix(layer.weight, h);
    hash_matrix(layer.bias, h);
  }
  return h;
}

TeacherSnapshot::TeacherSnapshot(const Network& source) : net_(source) {}

std::map<std::string, Matrix> TeacherSnapshot::forward(
    const Matrix& x, const std::vector<std::string>& head_ids) const {
  return net_.forward(x, head_ids).logits;
}

// --- serialization ---------------------------------------------------------

namespace {

constexpr char kMagic[6] = {'C', 'L', 'N', 'E', 'T', '\0'};
constexpr std::uint16_t kVersion = 1;

void write_u16(std::ostream& os, std::uint16_t v) {
  unsigned char b[2] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>(v >> 8)};
  os.write(reinterpret_cast<const char*>(b), 2);
}

void write_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 4);
}

void write_f64(std::ostream& os, double v) {
  const std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i)
    b[i] = static_cast<unsigned char>(bits >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 8);
}

std::uint16_t read_u16(std::istream& is) {
  unsigned char b[2];
  is.read(reinterpret_cast<char*>(b), 2);
  return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
}

std::uint32_t read_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

double read_f64(std::istream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return std::bit_cast<double>(bits);
}

void write_matrix(std::ostream& os, const Matrix& m) {
  write_u32(os, static_cast<std::uint32_t>(m.rows()));
  write_u32(os, static_cast<std::uint32_t>(m.cols()));
  for (double v : m.data()) write_f64(os, v);
}

Matrix read_matrix(std::istream& is) {
  const std::uint32_t rows = read_u32(is);
  const std::uint32_t cols = read_u32(is);
  if (!is || rows == 0 || cols == 0 || rows > 1u << 20 || cols > 1u << 20) {
    throw IoError("load_network: corrupt matrix header");
  }
  Matrix m(rows, cols);
  for (double& v : m.data()) v = read_f64(is);
  if (!is) throw IoError("load_network: truncated matrix data");
  return m;
}

}  // namespace

void save_network(const Network& net, const std::string& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("save_network: cannot open '" + path + "'");
  os.write(kMagic, sizeof kMagic);
  write_u16(os, kVersion);
  write_u16(os, static_cast<std::uint16_t>(net.activation()));
  write_u32(os, static_cast<std::uint32_t>(net.trunk().size()));
  for (const Layer& layer : net.trunk()) {
    write_matrix(os, layer.weight);
    write_matrix(os, layer.bias);
  }
  write_u32(os, static_cast<std::uint32_t>(net.heads().size()));
  for (const auto& [id, layer] : net.heads()) {
    write_u32(os, static_cast<std::uint32_t>(id.size()));
    os.write(id.data(), static_cast<std::streamsize>(id.size()));
    write_matrix(os, layer.weight);
    write_matrix(os, layer.bias);
  }
  if (!os) throw IoError("save_network: write failed for '" + path + "'");
}

Network load_network(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("load_network: cannot open '" + path + "'");
  char magic[6];
  is.read(magic, sizeof magic);
  if (!is || std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
    throw IoError("load_network: '" + path + "' is not a network file");
  }
  const std::uint16_t version = read_u16(is);
  if (version != kVersion) {
    throw IoError("load_network: unsupported format version " +
                  std::to_string(version));
  }
  const std::uint16_t act = read_u16(is);
  if (act > 2) throw IoError("load_network: bad activation tag");
  const std::uint32_t trunk_count = read_u32(is);
  if (trunk_count == 0 || trunk_count > 1u << 10) {
    throw IoError("load_network: bad trunk count");
  }
  std::vector<Layer> trunk;
  trunk.reserve(trunk_count);
  for (std::uint32_t k = 0; k < trunk_count; ++k) {
    Layer layer;
    layer.weight = read_matrix(is);
    layer.bias = read_matrix(is);
    trunk.push_back(std::move(layer));
  }
  Network net(std::move(trunk), static_cast<ActivationKind>(act));
  const std::uint32_t head_count = read_u32(is);
  if (!is || head_count > 1u << 10) throw IoError("load_network: bad head count");
  for (std::uint32_t k = 0; k < head_count; ++k) {
    const std::uint32_t id_len = read_u32(is);
    if (!is || id_len == 0 || id_len > 4096) {
      throw IoError("load_network: bad head id length");
    }
    std::string id(id_len, '\0');
    is.read(id.data(), id_len);
    Layer layer;
    layer.weight = read_matrix(is);
    layer.bias = read_matrix(is);
    net.attach_head(id, std::move(layer));
  }
  if (!is) throw IoError("load_network: truncated file '" + path + "'");
  return net;
}

}  // namespace contlearn
