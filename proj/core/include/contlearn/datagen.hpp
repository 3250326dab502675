#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "contlearn/matrix.hpp"
#include "contlearn/rng.hpp"

namespace contlearn {

enum class LabelKind { semantic, graphical };
enum class TransformKind { orthogonal, permutation };

const char* to_string(LabelKind kind);
const char* to_string(TransformKind kind);
std::optional<TransformKind> transform_from_string(const std::string& s);

// Branching-diffusion generator parameters. Each feature is drawn
// independently: the root takes a uniform +-1 value, every child copies its
// parent with the sign flipped with probability flip_prob, and the
// branching^depth leaves are the items. Leaf correlation falls off as
// (1 - 2*flip_prob)^d in the edge distance d.
struct HierarchyConfig {
  int branching = 2;
  int depth = 3;
  int num_features = 16;
  double flip_prob = 0.15;
  std::uint64_t seed = 0;
};

// Item-feature matrix, rows are the leaves in left-to-right order.
Matrix gen_hierarchy(const HierarchyConfig& cfg);

// Number of leaves, branching^depth (guards against overflow).
std::size_t leaf_count(int branching, int depth);

// Edges on the tree path between two leaves: 2 * (depth - lca_level).
int leaf_edge_distance(std::size_t i, std::size_t j, int branching, int depth);

// Leaf index -> index of its ancestor at the given level (0 = root, so
// level = depth labels each leaf with itself).
std::vector<int> ancestor_classes(int branching, int depth, int level);

// Labeled dataset. Columns of `inputs` are examples; label matrices are
// one-hot with the same column count.
struct Environment {
  Matrix inputs;            // dim x n
  Matrix semantic_labels;   // classes x n, one-hot (y_s)
  Matrix graphical_labels;  // transforms x n, one-hot (y_g)
  std::vector<int> item_ids;
  std::vector<int> transform_ids;

  std::size_t size() const { return inputs.cols(); }
  std::size_t input_dim() const { return inputs.rows(); }
  std::size_t num_semantic_classes() const { return semantic_labels.rows(); }
  std::size_t num_graphical_classes() const { return graphical_labels.rows(); }
  const Matrix& labels(LabelKind kind) const {
    return kind == LabelKind::semantic ? semantic_labels : graphical_labels;
  }

  Environment select(std::span<const std::size_t> idx) const;

  // Throws if the one-hot / equal-count invariants are broken.
  void validate() const;
};

// Transform set acting on feature space; index 0 is always the identity.
std::vector<Matrix> make_transforms(std::size_t dim, int count,
                                    TransformKind kind, Rng& rng);

// Full cross product item x transform. semantic_class[i] gives the class of
// item row i (class count = max + 1); one example per (item, transform).
Environment apply_graphical_factors(const Matrix& items,
                                    const std::vector<int>& semantic_class,
                                    const std::vector<Matrix>& transforms);

// Convenience overload: every item is its own semantic class and the
// transform set is drawn here.
Environment apply_graphical_factors(const Matrix& items, int num_transforms,
                                    TransformKind kind, Rng& rng);

// One view per item: item i appears once, transformed by a uniformly drawn
// member of `transforms`; y_g is the drawn index.
Environment apply_single_view(const Matrix& items,
                              const std::vector<int>& semantic_class,
                              const std::vector<Matrix>& transforms, Rng& rng);

// Declarative description of one generated environment.
struct EnvironmentSpec {
  HierarchyConfig hierarchy;
  int class_level = 0;   // semantic class = ancestor at this tree level
  int num_transforms = 1;
  TransformKind transform_kind = TransformKind::orthogonal;
  bool single_view = false;        // one transform per item instead of crossing
  bool share_transforms = false;   // draw views from the other env's transforms
};

Environment make_environment(const EnvironmentSpec& spec);

// A discrete transition between two environments over one input space.
struct TransitionSpec {
  Environment env1;
  Environment env2;
  bool shared_input_dim = true;
};

// env1: full crossing per `dev`; env2 per `novel`. If novel.share_transforms
// is set, env2 views are drawn from env1's transform set. Input dims must
// match.
TransitionSpec make_transition(const EnvironmentSpec& dev,
                               const EnvironmentSpec& novel);

// Seeded epoch partition: a shuffled permutation of [0, n) split into
// consecutive batches; the final short batch is kept.
std::vector<std::vector<std::size_t>> epoch_batches(std::size_t n,
                                                    std::size_t batch_size,
                                                    Rng& rng);

// Endless batch stream over an environment; reshuffles at epoch boundaries.
class MinibatchStream {
 public:
  MinibatchStream(const Environment& env, std::size_t batch_size, Rng rng);

  Environment next();
  std::size_t batches_per_epoch() const { return batches_per_epoch_; }

 private:
  const Environment* env_;
  std::size_t batch_size_;
  Rng rng_;
  std::vector<std::vector<std::size_t>> current_epoch_;
  std::size_t cursor_ = 0;
  std::size_t batches_per_epoch_ = 0;
};

// Best constant-predictor accuracy: the modal class frequency of the label
// stream (1/K for balanced environments).
double measured_chance(const Environment& env, LabelKind kind);

// CSV round trip: header x0..x{d-1},y_s,y_g then one row per example with
// integer label indices. Import infers class counts from the maxima.
void export_environment_csv(const Environment& env, const std::string& path);
Environment import_environment_csv(const std::string& path);

}  // namespace contlearn
