#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "wordfun/common.hpp"

namespace wordfun {

// Per-column z-scoring with population standard deviations.
template <typename Scalar>
struct Normalizer {
  std::vector<std::string> names;
  VectorX<Scalar> mean;
  VectorX<Scalar> sd;

  Eigen::Index size() const noexcept { return mean.size(); }
};

// Throws NumericError naming the first column whose sd is zero (or not finite).
template <typename Derived>
Normalizer<typename Derived::Scalar> zscore_fit(const Eigen::MatrixBase<Derived>& train,
                                                std::vector<std::string> names = {}) {
  using Scalar = typename Derived::Scalar;
  if (train.rows() == 0) throw NumericError("zscore: empty training matrix");
  if (names.empty()) {
    for (Eigen::Index c = 0; c < train.cols(); ++c) names.push_back("column " + std::to_string(c));
  }
  if (static_cast<Eigen::Index>(names.size()) != train.cols()) {
    throw NumericError("zscore: " + std::to_string(names.size()) + " names for " + std::to_string(train.cols()) +
                       " columns");
  }
  Normalizer<Scalar> norm;
  norm.names = std::move(names);
  norm.mean = train.colwise().mean().transpose();
  norm.sd.resize(train.cols());
  for (Eigen::Index c = 0; c < train.cols(); ++c) {
    const Scalar var = (train.col(c).array() - norm.mean(c)).square().mean();
    norm.sd(c) = std::sqrt(var);
    // Relative cutoff so that columns constant up to round-off are rejected too.
    const Scalar scale = std::max<Scalar>(Scalar(1), std::abs(norm.mean(c)));
    if (!(norm.sd(c) > scale * Eigen::NumTraits<Scalar>::epsilon() * Scalar(16)) || !std::isfinite(norm.sd(c))) {
      throw NumericError("feature '" + norm.names[static_cast<std::size_t>(c)] +
                         "' is constant on the training rows; cannot normalize");
    }
  }
  return norm;
}

template <typename Scalar, typename Derived>
MatrixX<Scalar> zscore_apply(const Normalizer<Scalar>& norm, const Eigen::MatrixBase<Derived>& x) {
  if (x.cols() != norm.size()) {
    throw NumericError("zscore: matrix has " + std::to_string(x.cols()) + " columns, normalizer " +
                       std::to_string(norm.size()));
  }
  MatrixX<Scalar> out = x.template cast<Scalar>();
  out.rowwise() -= norm.mean.transpose();
  out.array().rowwise() /= norm.sd.transpose().array();
  return out;
}

}  // namespace wordfun
