#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "wordfun/common.hpp"
#include "wordfun/normalizer.hpp"

namespace wordfun {

template <typename Scalar>
struct RidgeSolution {
  VectorX<Scalar> weights;
  Scalar intercept = 0;
  Scalar lambda = 0;
};

// Minimizes ||y - b - X w||^2 + lambda ||w||^2 with the intercept b unpenalized.
//
// The penalized normal equations (Xc'Xc + lambda I) w = Xc'yc are solved as the
// equivalent least-squares problem [Xc; sqrt(lambda) I] w = [yc; 0] by
// column-pivoting QR, which stays exact at lambda = 0 where X'X squares the
// condition number.
template <typename DX, typename DY>
RidgeSolution<typename DX::Scalar> ridge_solve(const Eigen::MatrixBase<DX>& x, const Eigen::MatrixBase<DY>& y,
                                               typename DX::Scalar lambda, bool fit_intercept = true) {
  using Scalar = typename DX::Scalar;
  if (x.rows() != y.rows()) throw NumericError("ridge: X and y row counts differ");
  if (x.rows() == 0) throw NumericError("ridge: no rows");
  if (!(lambda >= 0)) throw NumericError("ridge: lambda must be non-negative");
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols();

  VectorX<Scalar> x_mean = VectorX<Scalar>::Zero(p);
  Scalar y_mean = 0;
  if (fit_intercept) {
    x_mean = x.colwise().mean().transpose();
    y_mean = y.mean();
  }
  MatrixX<Scalar> a(n + p, p);
  a.topRows(n) = x.rowwise() - x_mean.transpose();
  a.bottomRows(p) = std::sqrt(lambda) * MatrixX<Scalar>::Identity(p, p);
  VectorX<Scalar> rhs = VectorX<Scalar>::Zero(n + p);
  rhs.head(n) = y.array() - y_mean;

  RidgeSolution<Scalar> sol;
  sol.lambda = lambda;
  if (p == 0) {
    sol.weights.resize(0);
  } else {
    Eigen::ColPivHouseholderQR<MatrixX<Scalar>> qr(a);
    if (qr.rank() < p) throw NumericError("ridge: design is rank deficient; use lambda > 0");
    sol.weights = qr.solve(rhs);
  }
  sol.intercept = y_mean - x_mean.dot(sol.weights);
  return sol;
}

// 10 logarithmically spaced values in [1e-4, 1e4].
inline std::vector<double> default_lambda_grid() {
  std::vector<double> grid;
  for (int i = 0; i < 10; ++i) grid.push_back(std::pow(10.0, -4.0 + 8.0 * i / 9.0));
  return grid;
}

struct RidgeCvOptions {
  std::vector<double> lambdas = default_lambda_grid();
  int folds = 10;
  std::uint64_t seed = 0;
  double holdout_fraction = 0.2;  // 0 disables the single-split report
};

struct RidgeCvReport {
  std::uint64_t seed = 0;
  int folds = 0;
  std::vector<int> fold_of;  // fold index per row
  std::vector<double> lambdas;
  std::vector<double> lambda_rmse;  // pooled CV RMSE per lambda
  double lambda = 0;                // selected
  std::vector<double> fold_rmse;    // per fold, at the selected lambda
  double rmse = 0;                  // pooled over folds
  double r2 = 0;
  std::size_t holdout_size = 0;
  std::optional<double> holdout_rmse;
  std::optional<double> holdout_r2;
};

// Ridge fitted on z-scored features. Weights live in the normalized space.
template <typename Scalar>
struct RidgeModel {
  Normalizer<Scalar> normalizer;
  VectorX<Scalar> weights;
  Scalar intercept = 0;
  Scalar lambda = 0;
  RidgeCvReport report;

  template <typename Derived>
  VectorX<Scalar> predict(const Eigen::MatrixBase<Derived>& x_raw) const {
    const MatrixX<Scalar> z = zscore_apply(normalizer, x_raw);
    return (z * weights).array() + intercept;
  }

  // Coefficients on the original feature scale.
  VectorX<Scalar> raw_weights() const { return weights.cwiseQuotient(normalizer.sd); }
  Scalar raw_intercept() const { return intercept - raw_weights().dot(normalizer.mean); }
};

namespace detail {

template <typename Scalar>
RidgeSolution<Scalar> fit_normalized(const MatrixX<Scalar>& x, const VectorX<Scalar>& y, Scalar lambda,
                                     const std::vector<std::string>& names, Normalizer<Scalar>& norm_out) {
  norm_out = zscore_fit(x, names);
  return ridge_solve(zscore_apply(norm_out, x), y, lambda);
}

template <typename Scalar>
MatrixX<Scalar> take_rows(const MatrixX<Scalar>& x, const std::vector<Eigen::Index>& rows) {
  MatrixX<Scalar> out(static_cast<Eigen::Index>(rows.size()), x.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = x.row(rows[i]);
  return out;
}

template <typename Scalar>
VectorX<Scalar> take_rows(const VectorX<Scalar>& y, const std::vector<Eigen::Index>& rows) {
  VectorX<Scalar> out(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) out(static_cast<Eigen::Index>(i)) = y(rows[i]);
  return out;
}

}  // namespace detail

// Chooses lambda by pooled k-fold CV RMSE (normalizer refit on every training
// fold), then refits on all rows. Fold assignment is a seeded shuffle.
template <typename Scalar>
RidgeModel<Scalar> fit_ridge_cv(const MatrixX<Scalar>& x, const VectorX<Scalar>& y,
                                const std::vector<std::string>& names, const RidgeCvOptions& options) {
  const Eigen::Index n = x.rows();
  if (options.lambdas.empty()) throw InputError("ridge: empty lambda grid");
  if (options.folds < 2) throw InputError("ridge: need at least 2 folds");
  if (n < options.folds) throw InputError("ridge: fewer rows than folds");
  if (y.rows() != n) throw NumericError("ridge: X and y row counts differ");

  RidgeCvReport report;
  report.seed = options.seed;
  report.folds = options.folds;
  report.lambdas = options.lambdas;
  report.fold_of.assign(static_cast<std::size_t>(n), 0);
  {
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
    Rng rng(options.seed);
    rng.shuffle(order);
    for (std::size_t i = 0; i < order.size(); ++i) {
      report.fold_of[static_cast<std::size_t>(order[i])] = static_cast<int>(i % static_cast<std::size_t>(options.folds));
    }
  }

  const Scalar y_mean = y.mean();
  const double sst = static_cast<double>((y.array() - y_mean).square().sum());
  double best_rmse = std::numeric_limits<double>::infinity();
  std::vector<double> best_fold_rmse;
  double best_sse = 0;
  for (const double lambda : options.lambdas) {
    if (!(lambda >= 0)) throw InputError("ridge: lambda must be non-negative");
    double sse = 0;
    std::vector<double> fold_rmse;
    for (int f = 0; f < options.folds; ++f) {
      std::vector<Eigen::Index> train;
      std::vector<Eigen::Index> test;
      for (Eigen::Index i = 0; i < n; ++i) {
        (report.fold_of[static_cast<std::size_t>(i)] == f ? test : train).push_back(i);
      }
      const MatrixX<Scalar> x_train = detail::take_rows(x, train);
      const VectorX<Scalar> y_train = detail::take_rows(y, train);
      Normalizer<Scalar> norm;
      const auto sol = detail::fit_normalized(x_train, y_train, static_cast<Scalar>(lambda), names, norm);
      const VectorX<Scalar> pred =
          (zscore_apply(norm, detail::take_rows(x, test)) * sol.weights).array() + sol.intercept;
      const double fold_sse = static_cast<double>((pred - detail::take_rows(y, test)).squaredNorm());
      sse += fold_sse;
      fold_rmse.push_back(std::sqrt(fold_sse / static_cast<double>(test.size())));
    }
    const double rmse = std::sqrt(sse / static_cast<double>(n));
    report.lambda_rmse.push_back(rmse);
    if (rmse < best_rmse) {
      best_rmse = rmse;
      report.lambda = lambda;
      best_fold_rmse = std::move(fold_rmse);
      best_sse = sse;
    }
  }
  report.fold_rmse = std::move(best_fold_rmse);
  report.rmse = best_rmse;
  report.r2 = sst > 0 ? 1.0 - best_sse / sst : 0.0;

  if (options.holdout_fraction > 0 && options.holdout_fraction < 1) {
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
    Rng rng(options.seed ^ 0x5deece66dULL);
    rng.shuffle(order);
    const auto n_test = static_cast<std::size_t>(std::llround(options.holdout_fraction * static_cast<double>(n)));
    if (n_test >= 1 && n_test + 2 <= order.size()) {
      const std::vector<Eigen::Index> test(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_test));
      const std::vector<Eigen::Index> train(order.begin() + static_cast<std::ptrdiff_t>(n_test), order.end());
      Normalizer<Scalar> norm;
      const auto sol = detail::fit_normalized(detail::take_rows(x, train), detail::take_rows(y, train),
                                              static_cast<Scalar>(report.lambda), names, norm);
      const VectorX<Scalar> y_test = detail::take_rows(y, test);
      const VectorX<Scalar> pred =
          (zscore_apply(norm, detail::take_rows(x, test)) * sol.weights).array() + sol.intercept;
      const double sse = static_cast<double>((pred - y_test).squaredNorm());
      const double test_sst = static_cast<double>((y_test.array() - y_test.mean()).square().sum());
      report.holdout_size = n_test;
      report.holdout_rmse = std::sqrt(sse / static_cast<double>(n_test));
      report.holdout_r2 = test_sst > 0 ? 1.0 - sse / test_sst : 0.0;
    }
  }

  RidgeModel<Scalar> model;
  const auto sol = detail::fit_normalized(x, y, static_cast<Scalar>(report.lambda), names, model.normalizer);
  model.weights = sol.weights;
  model.intercept = sol.intercept;
  model.lambda = static_cast<Scalar>(report.lambda);
  model.report = std::move(report);
  return model;
}

}  // namespace wordfun
