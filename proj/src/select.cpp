#include "pcf/select.hpp"

#include <algorithm>
#include <stdexcept>

#include "pcf/stats.hpp"

namespace pcf {

ComponentScore score_component(const Vector& z, const Vector& x, const Vector& y, Index index) {
  const Index n = z.size();
  if (x.size() != n || y.size() != n) throw std::invalid_argument("score_component: length mismatch");
  if (n < 4) throw InsufficientSamplesError("score_component: need at least 4 samples");
  if (!z.allFinite()) throw std::invalid_argument("score_component: candidate has non-finite entries");

  ComponentScore s;
  s.index = index;
  if (!((z.array() != z[0]).any())) return s;

  const OlsFit fx = ols_fit(z, x, true);
  s.p_x = fx.p_values[1];

  Matrix design(n, 2);
  design.col(0) = x;
  design.col(1) = z;
  try {
    const OlsFit fy = ols_fit(design, y, true);
    s.p_y = fy.p_values[2];
  } catch (const SingularMatrixError&) {
    // z is an affine function of x: it carries nothing beyond x for y.
    s.p_y = 1.0;
  }
  return s;
}

namespace {

std::vector<ComponentScore> score_all(const Matrix& z_hat, const Vector& x, const Vector& y) {
  if (z_hat.cols() < 1) throw std::invalid_argument("selection: no candidate components");
  std::vector<ComponentScore> scores;
  scores.reserve(static_cast<std::size_t>(z_hat.cols()));
  for (Index j = 0; j < z_hat.cols(); ++j) scores.push_back(score_component(z_hat.col(j), x, y, j));
  std::stable_sort(scores.begin(), scores.end(), [](const ComponentScore& a, const ComponentScore& b) {
    return a.score() < b.score();
  });
  return scores;
}

}  // namespace

SelectionOutput select_confounder(const Matrix& z_hat, const Vector& x, const Vector& y) {
  SelectionOutput out;
  out.mode = SelectionMode::kArgmin;
  out.scores = score_all(z_hat, x, y);
  out.chosen = {out.scores.front().index};
  return out;
}

SelectionOutput select_confounders_threshold(const Matrix& z_hat, const Vector& x, const Vector& y,
                                             double tau) {
  if (!(tau > 0.0 && tau <= 2.0)) throw std::invalid_argument("selection threshold must lie in (0, 2]");
  SelectionOutput out;
  out.mode = SelectionMode::kThreshold;
  out.tau = tau;
  out.scores = score_all(z_hat, x, y);
  for (const auto& s : out.scores)
    if (s.score() <= tau) out.chosen.push_back(s.index);
  return out;
}

}  // namespace pcf
