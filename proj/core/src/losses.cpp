#include "contlearn/losses.hpp"

#include <cmath>
#include <string>

#include "contlearn/errors.hpp"

namespace contlearn {

namespace {

// Index of the single 1 in a one-hot column; throws otherwise.
std::size_t one_hot_index(const Matrix& labels, std::size_t col) {
  std::size_t idx = labels.rows();
  for (std::size_t i = 0; i < labels.rows(); ++i) {
    const double v = labels(i, col);
    if (v == 1.0) {
      if (idx != labels.rows()) {
        throw ParameterError("label column " + std::to_string(col) +
                             " has more than one 1");
      }
      idx = i;
    } else if (v != 0.0) {
      throw ParameterError("label column " + std::to_string(col) +
                           " is not one-hot");
    }
  }
  if (idx == labels.rows()) {
    throw ParameterError("label column " + std::to_string(col) + " has no 1");
  }
  return idx;
}

}  // namespace

Matrix softmax_columns(const Matrix& logits) {
  Matrix p(logits.rows(), logits.cols());
  for (std::size_t j = 0; j < logits.cols(); ++j) {
    double m = logits(0, j);
    for (std::size_t i = 1; i < logits.rows(); ++i)
      m = std::max(m, logits(i, j));
    double z = 0.0;
    for (std::size_t i = 0; i < logits.rows(); ++i) {
      const double e = std::exp(logits(i, j) - m);
      p(i, j) = e;
      z += e;
    }
    for (std::size_t i = 0; i < logits.rows(); ++i) p(i, j) /= z;
  }
  ensure_finite(p, "softmax_columns");
  return p;
}

LossResult softmax_cross_entropy(const Matrix& logits, const Matrix& labels) {
  if (!logits.same_shape(labels)) {
    throw ShapeError("softmax_cross_entropy: logits " +
                     std::to_string(logits.rows()) + "x" +
                     std::to_string(logits.cols()) + " vs labels " +
                     std::to_string(labels.rows()) + "x" +
                     std::to_string(labels.cols()));
  }
  const std::size_t batch = logits.cols();
  const Matrix p = softmax_columns(logits);
  double loss = 0.0;
  for (std::size_t j = 0; j < batch; ++j) {
    const std::size_t y = one_hot_index(labels, j);
    // log p computed through the stabilized path: log p = (x - m) - log z.
    double m = logits(0, j);
    for (std::size_t i = 1; i < logits.rows(); ++i)
      m = std::max(m, logits(i, j));
    double z = 0.0;
    for (std::size_t i = 0; i < logits.rows(); ++i)
      z += std::exp(logits(i, j) - m);
    loss -= (logits(y, j) - m) - std::log(z);
  }
  loss /= static_cast<double>(batch);
  if (!std::isfinite(loss)) {
    throw NumericalError("softmax_cross_entropy: non-finite loss");
  }
  Matrix grad = scale(sub(p, labels), 1.0 / static_cast<double>(batch));
  return {loss, std::move(grad)};
}

LossResult l2_distillation(const Matrix& student_logits,
                           const Matrix& teacher_logits) {
  if (!student_logits.same_shape(teacher_logits)) {
    throw ShapeError("l2_distillation: student " +
                     std::to_string(student_logits.rows()) + "x" +
                     std::to_string(student_logits.cols()) + " vs teacher " +
                     std::to_string(teacher_logits.rows()) + "x" +
                     std::to_string(teacher_logits.cols()));
  }
  const double batch = static_cast<double>(student_logits.cols());
  const Matrix diff = sub(student_logits, teacher_logits);
  const double n = frobenius_norm(diff);
  const double loss = n * n / (2.0 * batch);
  if (!std::isfinite(loss)) {
    throw NumericalError("l2_distillation: non-finite loss");
  }
  return {loss, scale(diff, 1.0 / batch)};
}

CompositeResult composite_loss(const std::vector<LossTerm>& terms,
                               const std::map<std::string, Matrix>& logits) {
  CompositeResult out;
  for (const LossTerm& term : terms) {
    if (term.weight < 0.0) {
      throw ParameterError("composite_loss: negative weight for head '" +
                           term.head_id + "'");
    }
    auto it = logits.find(term.head_id);
    if (it == logits.end()) {
      throw LookupError("composite_loss: no logits for head '" +
                        term.head_id + "'");
    }
    LossResult r = term.kind == LossKind::cross_entropy
                       ? softmax_cross_entropy(it->second, term.target)
                       : l2_distillation(it->second, term.target);
    out.value += term.weight * r.value;
    Matrix weighted = scale(r.dlogits, term.weight);
    auto [slot, inserted] = out.dlogits.try_emplace(term.head_id, weighted);
    if (!inserted) slot->second = add(slot->second, weighted);
  }
  return out;
}

}  // namespace contlearn
