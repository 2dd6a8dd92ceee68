#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/special_functions/gamma.hpp>

#include "wordfun/common.hpp"

namespace wordfun {

struct LogisticOptions {
  double l2 = 0;  // penalty (l2/2)||w||^2 on the non-intercept coefficients
  double tol = 1e-8;  // on the inf-norm of the penalized gradient
  int max_iter = 100;
};

template <typename Scalar>
struct LogisticModel {
  std::vector<std::string> feature_names;
  Scalar intercept = 0;
  VectorX<Scalar> coefficients;
  Scalar l2 = 0;
  bool converged = false;
  int iterations = 0;
  Scalar loglik = 0;         // unpenalized, at the final iterate
  Scalar gradient_norm = 0;  // inf-norm of the penalized gradient at the final iterate
  std::string diagnostic;

  // Intercept first, then coefficients.
  VectorX<Scalar> parameters() const {
    VectorX<Scalar> theta(coefficients.size() + 1);
    theta << intercept, coefficients;
    return theta;
  }

  template <typename Derived>
  VectorX<Scalar> predict_proba(const Eigen::MatrixBase<Derived>& x) const {
    const VectorX<Scalar> eta = (x * coefficients).array() + intercept;
    return eta.unaryExpr([](Scalar t) { return static_cast<Scalar>(sigmoid(static_cast<double>(t))); });
  }
};

namespace detail {

template <typename Scalar>
Scalar softplus(Scalar t) {
  return t > 0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
}

template <typename Scalar>
void check_logistic_inputs(Eigen::Index rows_x, Eigen::Index cols_x, const VectorX<Scalar>& y,
                           Eigen::Index params) {
  if (y.size() != rows_x) throw NumericError("logistic: X and y row counts differ");
  if (params != cols_x + 1) throw NumericError("logistic: parameter vector must be intercept + one per column");
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y(i) != Scalar(0) && y(i) != Scalar(1)) throw InputError("logistic: labels must be 0 or 1");
  }
}

}  // namespace detail

// theta = (intercept, w).
template <typename Derived>
typename Derived::Scalar logistic_loglik(const VectorX<typename Derived::Scalar>& theta,
                                         const Eigen::MatrixBase<Derived>& x,
                                         const VectorX<typename Derived::Scalar>& y) {
  using Scalar = typename Derived::Scalar;
  detail::check_logistic_inputs(x.rows(), x.cols(), y, theta.size());
  const VectorX<Scalar> eta = (x * theta.tail(x.cols())).array() + theta(0);
  Scalar ll = 0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) ll += y(i) * eta(i) - detail::softplus(eta(i));
  return ll;
}

template <typename Derived>
typename Derived::Scalar penalized_loglik(const VectorX<typename Derived::Scalar>& theta,
                                          const Eigen::MatrixBase<Derived>& x,
                                          const VectorX<typename Derived::Scalar>& y, double l2) {
  using Scalar = typename Derived::Scalar;
  return logistic_loglik(theta, x, y) - static_cast<Scalar>(l2 / 2) * theta.tail(x.cols()).squaredNorm();
}

template <typename Derived>
VectorX<typename Derived::Scalar> penalized_gradient(const VectorX<typename Derived::Scalar>& theta,
                                                     const Eigen::MatrixBase<Derived>& x,
                                                     const VectorX<typename Derived::Scalar>& y, double l2) {
  using Scalar = typename Derived::Scalar;
  detail::check_logistic_inputs(x.rows(), x.cols(), y, theta.size());
  const VectorX<Scalar> eta = (x * theta.tail(x.cols())).array() + theta(0);
  const VectorX<Scalar> resid =
      y - eta.unaryExpr([](Scalar t) { return static_cast<Scalar>(sigmoid(static_cast<double>(t))); });
  VectorX<Scalar> g(theta.size());
  g(0) = resid.sum();
  g.tail(x.cols()) = x.transpose() * resid - static_cast<Scalar>(l2) * theta.tail(x.cols());
  return g;
}

// Newton-Raphson / IRLS with step halving on the penalized log-likelihood.
// Non-convergence (e.g. perfect separation without a penalty) is reported in
// the returned model, not thrown.
template <typename Derived>
LogisticModel<typename Derived::Scalar> fit_logistic(const Eigen::MatrixBase<Derived>& x,
                                                     const VectorX<typename Derived::Scalar>& y,
                                                     const LogisticOptions& options = {},
                                                     std::vector<std::string> names = {}) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols();
  if (n == 0) throw NumericError("logistic: no rows");
  if (!x.allFinite()) throw NumericError("logistic: non-finite feature values");
  if (options.l2 < 0) throw InputError("logistic: l2 must be non-negative");
  if (names.empty()) {
    for (Eigen::Index c = 0; c < p; ++c) names.push_back("x" + std::to_string(c + 1));
  }
  if (static_cast<Eigen::Index>(names.size()) != p) throw NumericError("logistic: feature name count mismatch");
  detail::check_logistic_inputs(n, p, y, p + 1);

  VectorX<Scalar> theta = VectorX<Scalar>::Zero(p + 1);
  const Scalar ybar = y.mean();
  if (ybar > 0 && ybar < 1) theta(0) = std::log(ybar / (1 - ybar));

  MatrixX<Scalar> z(n, p + 1);
  z.col(0).setOnes();
  z.rightCols(p) = x;
  VectorX<Scalar> penalty = VectorX<Scalar>::Constant(p + 1, static_cast<Scalar>(options.l2));
  penalty(0) = 0;

  LogisticModel<Scalar> model;
  model.feature_names = std::move(names);
  model.l2 = static_cast<Scalar>(options.l2);
  Scalar objective = penalized_loglik(theta, x, y, options.l2);
  int iter = 0;
  for (;; ++iter) {
    const VectorX<Scalar> eta = z * theta;
    const VectorX<Scalar> prob =
        eta.unaryExpr([](Scalar t) { return static_cast<Scalar>(sigmoid(static_cast<double>(t))); });
    VectorX<Scalar> grad = z.transpose() * (y - prob);
    grad -= penalty.cwiseProduct(theta);
    model.gradient_norm = grad.template lpNorm<Eigen::Infinity>();
    if (model.gradient_norm < options.tol) {
      model.converged = true;
      break;
    }
    if (iter >= options.max_iter) {
      model.diagnostic = "iteration limit reached";
      break;
    }
    const VectorX<Scalar> w = prob.array() * (1 - prob.array());
    MatrixX<Scalar> hessian = z.transpose() * w.asDiagonal() * z;
    hessian.diagonal() += penalty;
    Eigen::LDLT<MatrixX<Scalar>> ldlt(hessian);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
        ldlt.vectorD().minCoeff() <= Eigen::NumTraits<Scalar>::epsilon() * ldlt.vectorD().maxCoeff()) {
      model.diagnostic = "information matrix is numerically singular";
      break;
    }
    const VectorX<Scalar> step = ldlt.solve(grad);
    Scalar scale = 1;
    bool improved = false;
    for (int halving = 0; halving < 50; ++halving, scale /= 2) {
      const VectorX<Scalar> candidate = theta + scale * step;
      const Scalar value = penalized_loglik(candidate, x, y, options.l2);
      if (std::isfinite(value) && value >= objective - Scalar(1e-12) * std::abs(objective)) {
        theta = candidate;
        objective = value;
        improved = true;
        break;
      }
    }
    if (!improved) {
      model.diagnostic = "step halving failed to improve the objective";
      break;
    }
  }
  model.iterations = iter;
  model.intercept = theta(0);
  model.coefficients = theta.tail(p);
  model.loglik = logistic_loglik(theta, x, y);
  if (model.converged && options.l2 == 0 && theta.norm() > Scalar(10)) {
    // The gradient vanishes along a separating direction too; a fit that
    // reproduces every label to round-off has no finite MLE.
    const VectorX<Scalar> fitted = model.predict_proba(x);
    if ((y - fitted).template lpNorm<Eigen::Infinity>() < Scalar(1e-6)) {
      model.converged = false;
      model.diagnostic = "fitted probabilities are 0 or 1 for every row";
    }
  }
  if (!model.converged) {
    const Scalar norm = theta.norm();
    model.diagnostic += "; ||theta|| = " + format_double(static_cast<double>(norm));
    if (options.l2 == 0 && norm > Scalar(10)) model.diagnostic += " (diverging: possible perfect separation)";
  }
  return model;
}

// ---------------------------------------------------------------------------
// Inference on the unregularized MLE

struct CoefficientRow {
  std::string name;
  double estimate = 0;
  double std_error = 0;
  double z = 0;
  double p = 1;
  double p_bonferroni = 1;
  std::string stars;
};

struct InferenceTable {
  std::vector<CoefficientRow> rows;  // "(Intercept)" first
};

// Codes: 0 '***' 0.001 '**' 0.01 '*' 0.05 '.' 0.1 ' ' 1.
inline std::string significance_stars(double p) {
  if (p < 0.001) return "***";
  if (p < 0.01) return "**";
  if (p < 0.05) return "*";
  if (p < 0.1) return ".";
  return "";
}

inline double two_sided_normal_p(double z) { return std::erfc(std::abs(z) / std::sqrt(2.0)); }

// Standard errors from the inverse observed information (X'WX at the optimum).
template <typename Scalar, typename Derived>
InferenceTable coefficient_inference(const LogisticModel<Scalar>& model, const Eigen::MatrixBase<Derived>& x,
                                     const VectorX<Scalar>& y) {
  if (model.l2 != 0) throw InputError("inference requires an unregularized fit (l2 = 0)");
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols();
  if (model.coefficients.size() != p) throw NumericError("inference: model/design column mismatch");
  if (y.size() != n) throw NumericError("inference: X and y row counts differ");

  MatrixX<Scalar> z(n, p + 1);
  z.col(0).setOnes();
  z.rightCols(p) = x;
  const VectorX<Scalar> prob = model.predict_proba(x);
  const VectorX<Scalar> sqrt_w = (prob.array() * (1 - prob.array())).sqrt();
  const MatrixX<Scalar> weighted = sqrt_w.asDiagonal() * z;

  std::vector<std::string> names{"(Intercept)"};
  names.insert(names.end(), model.feature_names.begin(), model.feature_names.end());

  Eigen::ColPivHouseholderQR<MatrixX<Scalar>> qr(weighted);
  qr.setThreshold(Scalar(1e-10));
  qr.compute(weighted);
  if (qr.rank() < p + 1) {
    std::string culprits;
    for (Eigen::Index k = qr.rank(); k < p + 1; ++k) {
      if (!culprits.empty()) culprits += ", ";
      culprits += names[static_cast<std::size_t>(qr.colsPermutation().indices()(k))];
    }
    throw NumericError("information matrix is singular; collinear features: " + culprits);
  }
  if (!model.converged) throw NumericError("inference requires a converged fit: " + model.diagnostic);
  const MatrixX<Scalar> info = weighted.transpose() * weighted;
  const MatrixX<Scalar> cov = info.ldlt().solve(MatrixX<Scalar>::Identity(p + 1, p + 1));
  const VectorX<Scalar> theta = model.parameters();

  InferenceTable table;
  for (Eigen::Index k = 0; k < p + 1; ++k) {
    CoefficientRow row;
    row.name = names[static_cast<std::size_t>(k)];
    row.estimate = static_cast<double>(theta(k));
    row.std_error = std::sqrt(static_cast<double>(cov(k, k)));
    if (!(row.std_error > 0)) throw NumericError("non-positive variance for '" + row.name + "'");
    row.z = row.estimate / row.std_error;
    row.p = two_sided_normal_p(row.z);
    row.p_bonferroni = k == 0 ? row.p : std::min(1.0, row.p * static_cast<double>(std::max<Eigen::Index>(p, 1)));
    row.stars = significance_stars(row.p);
    table.rows.push_back(std::move(row));
  }
  return table;
}

// ---------------------------------------------------------------------------
// Likelihood-ratio test between nested logistic models

struct LrtResult {
  double statistic = 0;
  int dof = 0;
  double p = 1;
};

inline double chi_squared_upper_tail(double statistic, int dof) {
  if (dof <= 0) return 1.0;
  if (statistic <= 0) return 1.0;
  return boost::math::gamma_q(dof / 2.0, statistic / 2.0);
}

// statistic = 2 (ll_full - ll_nested); round-off below zero is clamped to 0.
inline LrtResult lrt_from_loglik(double ll_full, double ll_nested, int dof) {
  LrtResult r;
  r.dof = dof;
  r.statistic = std::max(0.0, 2.0 * (ll_full - ll_nested));
  r.p = chi_squared_upper_tail(r.statistic, dof);
  return r;
}

inline void check_nested(const std::vector<std::string>& full, const std::vector<std::string>& nested) {
  for (const auto& name : nested) {
    if (std::find(full.begin(), full.end(), name) == full.end()) {
      throw InputError("models are not nested: '" + name + "' is missing from the full model");
    }
  }
}

template <typename Scalar, typename DF, typename DN>
LrtResult likelihood_ratio_test(const LogisticModel<Scalar>& full, const LogisticModel<Scalar>& nested,
                                const Eigen::MatrixBase<DF>& x_full, const Eigen::MatrixBase<DN>& x_nested,
                                const VectorX<Scalar>& y) {
  check_nested(full.feature_names, nested.feature_names);
  if (full.l2 != 0 || nested.l2 != 0) throw InputError("likelihood-ratio test requires unregularized fits");
  if (x_full.rows() != x_nested.rows()) throw InputError("likelihood-ratio test: models use different rows");
  const double ll_full = static_cast<double>(logistic_loglik(full.parameters(), x_full, y));
  const double ll_nested = static_cast<double>(logistic_loglik(nested.parameters(), x_nested, y));
  return lrt_from_loglik(ll_full, ll_nested,
                         static_cast<int>(full.feature_names.size()) - static_cast<int>(nested.feature_names.size()));
}

}  // namespace wordfun
