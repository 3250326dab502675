#pragma once

#include <map>
#include <string>
#include <vector>

#include "contlearn/matrix.hpp"

namespace contlearn {

// Loss value plus its gradient with respect to the logits that produced it.
struct LossResult {
  double value = 0.0;
  Matrix dlogits;
};

enum class LossKind { cross_entropy, l2_distill };

// One summand of a composite objective. For cross-entropy the target is a
// one-hot label matrix; for l2-distill it is a teacher logit matrix.
struct LossTerm {
  std::string head_id;
  LossKind kind = LossKind::cross_entropy;
  Matrix target;
  double weight = 1.0;
};

struct CompositeResult {
  double value = 0.0;
  std::map<std::string, Matrix> dlogits;
};

// Column-wise softmax, stabilized by max subtraction. Exposed for
// diagnostics and tests; each output column sums to 1.
Matrix softmax_columns(const Matrix& logits);

// Mean over batch columns of -log softmax(logits)[label class].
// Gradient is (softmax(logits) - labels) / batch.
// Every label column must be exactly one-hot.
LossResult softmax_cross_entropy(const Matrix& logits, const Matrix& labels);

// (1 / (2 * batch)) * ||student - teacher||_F^2, gradient
// (student - teacher) / batch. The teacher side receives no gradient.
LossResult l2_distillation(const Matrix& student_logits,
                           const Matrix& teacher_logits);

// total = sum_i weight_i * loss_i; per-head gradient is the weighted sum of
// that head's term gradients. Every term's head must be present in logits.
CompositeResult composite_loss(const std::vector<LossTerm>& terms,
                               const std::map<std::string, Matrix>& logits);

}  // namespace contlearn
