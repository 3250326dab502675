#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "contlearn/matrix.hpp"
#include "contlearn/rng.hpp"

namespace contlearn {

enum class ActivationKind { linear, tanh, relu };

const char* to_string(ActivationKind kind);
std::optional<ActivationKind> activation_from_string(const std::string& s);

// One affine block: weight (out x in) plus bias column (out x 1).
struct Layer {
  Matrix weight;
  Matrix bias;
};

// Gradient blocks mirroring a Network's parameters. Heads that were not on
// the backward path carry explicit zero blocks.
struct Gradients {
  std::vector<Layer> trunk;
  std::map<std::string, Layer> heads;

  // In-place sum; shapes must mirror each other.
  void accumulate(const Gradients& other);
  bool all_finite() const;
};

// Multi-head feed-forward network: a shared trunk of affine layers with the
// activation applied after each one, and named affine heads reading the
// final trunk representation. Heads emit raw logits; softmax and every
// other loss-side transform live in losses.
//
// Forward returns a single-use cache consumed by backward. The cache is
// bound to the network identity and parameter version that produced it, so
// training steps in between invalidate it.
class Network {
 public:
  class ForwardCache {
   public:
    ForwardCache() = default;

   private:
    friend class Network;
    Matrix input_;
    std::vector<Matrix> pre_acts_;
    std::vector<Matrix> post_acts_;
    std::vector<std::string> head_ids_;
    std::uint64_t net_id_ = 0;
    std::uint64_t net_version_ = 0;
    bool used_ = true;
  };

  struct ForwardResult {
    std::map<std::string, Matrix> logits;
    ForwardCache cache;
  };

  // Trunk dims [in, h1, ..., rep]; weights Gaussian(0, sigma), biases zero.
  static Network gaussian(const std::vector<std::size_t>& dims,
                          ActivationKind activation, double sigma, Rng& rng);

  // Explicit trunk (tests and tools); validates that layer dims chain.
  Network(std::vector<Layer> trunk, ActivationKind activation);

  ActivationKind activation() const { return activation_; }
  std::size_t input_dim() const;
  std::size_t representation_dim() const;
  const std::vector<Layer>& trunk() const { return trunk_; }
  const std::map<std::string, Layer>& heads() const { return heads_; }
  bool has_head(const std::string& id) const { return heads_.count(id) > 0; }
  std::vector<std::string> head_ids() const;
  std::size_t head_out_dim(const std::string& id) const;

  // New head with Gaussian(0, sigma) weights and zero bias.
  void attach_head(const std::string& id, std::size_t out_dim, double sigma,
                   Rng& rng);
  // Head with explicit parameters (tests and tools).
  void attach_head(const std::string& id, Layer layer);

  // x is a column batch (input_dim x batch). Requested heads must exist.
  ForwardResult forward(const Matrix& x,
                        const std::vector<std::string>& head_ids) const;

  // Exact analytic gradients of the scalar loss whose per-head
  // d(loss)/d(logits) are given. Heads not in the map get zero gradients;
  // every key must have been requested in the matching forward call.
  Gradients backward(ForwardCache& cache,
                     const std::map<std::string, Matrix>& dlogits) const;

  // theta <- theta - lr * grad for every block. Rejects non-finite
  // gradients before touching any parameter.
  void apply_sgd(const Gradients& grads, double lr);

  // For a linear-activation, zero-bias network: the explicit factored map
  // W_head * W_L * ... * W_1.
  Matrix end_to_end_map(const std::string& head_id) const;

  // FNV-1a over all parameter bytes in canonical order.
  std::uint64_t param_hash() const;
  std::uint64_t trunk_hash() const;

  std::uint64_t id() const { return id_; }
  std::uint64_t version() const { return version_; }

  Network(const Network& other);
  Network& operator=(const Network& other);
  Network(Network&&) = default;
  Network& operator=(Network&&) = default;

 private:
  Network() = default;

  std::vector<Layer> trunk_;
  std::map<std::string, Layer> heads_;
  ActivationKind activation_ = ActivationKind::linear;
  std::uint64_t id_ = 0;       // fresh per instance, incl. copies
  std::uint64_t version_ = 0;  // bumped on any parameter change
};

// Immutable deep copy of a Network; the supervision source whose learning
// rate is conceptually zero. Only const access is possible.
class TeacherSnapshot {
 public:
  explicit TeacherSnapshot(const Network& source);

  const Network& net() const { return net_; }

  // Logits only; no cache is produced because a teacher is never trained.
  std::map<std::string, Matrix> forward(
      const Matrix& x, const std::vector<std::string>& head_ids) const;

  std::uint64_t param_hash() const { return net_.param_hash(); }

 private:
  Network net_;
};

inline TeacherSnapshot snapshot_teacher(const Network& net) {
  return TeacherSnapshot(net);
}

double apply_activation_scalar(ActivationKind kind, double x);
double activation_derivative_scalar(ActivationKind kind, double pre_act);
Matrix apply_activation(ActivationKind kind, const Matrix& pre_act);
Matrix activation_derivative(ActivationKind kind, const Matrix& pre_act);

// Versioned little-endian binary parameter format (see README for the
// layout). save overwrites; load validates magic and version.
void save_network(const Network& net, const std::string& path);
Network load_network(const std::string& path);

}  // namespace contlearn
