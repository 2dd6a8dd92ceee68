#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "wordfun/common.hpp"

namespace wordfun {

// "NFEAT-10-10-1": hidden widths between the input width and the single sigmoid output.
struct MlpArchitecture {
  std::vector<int> hidden;

  static MlpArchitecture parse(const std::string& spec);
  std::string str() const;
};

enum class MlpInit { he_uniform, zero };

struct MlpOptions {
  MlpArchitecture architecture = MlpArchitecture::parse("NFEAT-10-10-1");
  std::uint64_t seed = 0;
  int epochs = 200;
  double learning_rate = 1e-3;
  int batch_size = 256;
  int patience = 20;  // epochs without a validation-accuracy gain before stopping
  MlpInit init = MlpInit::he_uniform;
};

// Fully connected ReLU network with a sigmoid output, trained on mean binary cross-entropy.
template <typename Scalar>
class Mlp {
 public:
  Mlp(Eigen::Index inputs, const MlpArchitecture& arch, MlpInit init, std::uint64_t seed) {
    std::vector<Eigen::Index> widths{inputs};
    for (const int h : arch.hidden) widths.push_back(h);
    widths.push_back(1);
    Rng rng(seed);
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
      MatrixX<Scalar> w = MatrixX<Scalar>::Zero(widths[l + 1], widths[l]);
      if (init == MlpInit::he_uniform) {
        const double bound = std::sqrt(6.0 / static_cast<double>(widths[l]));
        for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = static_cast<Scalar>((2 * rng.uniform() - 1) * bound);
      }
      weights_.push_back(std::move(w));
      biases_.push_back(VectorX<Scalar>::Zero(widths[l + 1]));
    }
  }

  Eigen::Index inputs() const { return weights_.front().cols(); }
  std::size_t layers() const { return weights_.size(); }
  const MatrixX<Scalar>& weight(std::size_t l) const { return weights_[l]; }
  const VectorX<Scalar>& bias(std::size_t l) const { return biases_[l]; }

  template <typename Derived>
  VectorX<Scalar> logits(const Eigen::MatrixBase<Derived>& x) const {
    MatrixX<Scalar> a = x.transpose().template cast<Scalar>();  // features x samples
    for (std::size_t l = 0; l < weights_.size(); ++l) {
      MatrixX<Scalar> zl = (weights_[l] * a).colwise() + biases_[l];
      a = l + 1 < weights_.size() ? MatrixX<Scalar>(zl.cwiseMax(Scalar(0))) : zl;
    }
    return a.row(0).transpose();
  }

  template <typename Derived>
  VectorX<Scalar> predict_proba(const Eigen::MatrixBase<Derived>& x) const {
    return logits(x).unaryExpr([](Scalar t) { return static_cast<Scalar>(sigmoid(static_cast<double>(t))); });
  }

  template <typename Derived>
  Scalar loss(const Eigen::MatrixBase<Derived>& x, const VectorX<Scalar>& y) const {
    const VectorX<Scalar> eta = logits(x);
    Scalar total = 0;
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
      const Scalar t = eta(i);
      const Scalar sp = t > 0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
      total += sp - y(i) * t;
    }
    return total / static_cast<Scalar>(eta.size());
  }

  // Gradient of loss() with respect to parameters(), by backpropagation.
  template <typename Derived>
  VectorX<Scalar> gradient(const Eigen::MatrixBase<Derived>& x, const VectorX<Scalar>& y) const {
    const auto n = static_cast<Scalar>(x.rows());
    std::vector<MatrixX<Scalar>> activations{x.transpose().template cast<Scalar>()};
    std::vector<MatrixX<Scalar>> pre;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
      MatrixX<Scalar> zl = (weights_[l] * activations.back()).colwise() + biases_[l];
      pre.push_back(zl);
      activations.push_back(l + 1 < weights_.size() ? MatrixX<Scalar>(zl.cwiseMax(Scalar(0))) : zl);
    }
    MatrixX<Scalar> delta(1, x.rows());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      delta(0, i) = (static_cast<Scalar>(sigmoid(static_cast<double>(pre.back()(0, i)))) - y(i)) / n;
    }
    std::vector<MatrixX<Scalar>> grad_w(weights_.size());
    std::vector<VectorX<Scalar>> grad_b(weights_.size());
    for (std::size_t l = weights_.size(); l-- > 0;) {
      grad_w[l] = delta * activations[l].transpose();
      grad_b[l] = delta.rowwise().sum();
      if (l > 0) {
        delta = (weights_[l].transpose() * delta).cwiseProduct(
            pre[l - 1].unaryExpr([](Scalar t) { return t > 0 ? Scalar(1) : Scalar(0); }));
      }
    }
    return flatten(grad_w, grad_b);
  }

  VectorX<Scalar> parameters() const { return flatten(weights_, biases_); }

  void set_parameters(const VectorX<Scalar>& flat) {
    if (flat.size() != parameter_count()) throw NumericError("mlp: parameter vector has the wrong size");
    Eigen::Index k = 0;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
      for (Eigen::Index i = 0; i < weights_[l].size(); ++i) weights_[l].data()[i] = flat(k++);
      for (Eigen::Index i = 0; i < biases_[l].size(); ++i) biases_[l](i) = flat(k++);
    }
  }

  Eigen::Index parameter_count() const {
    Eigen::Index k = 0;
    for (std::size_t l = 0; l < weights_.size(); ++l) k += weights_[l].size() + biases_[l].size();
    return k;
  }

 private:
  static VectorX<Scalar> flatten(const std::vector<MatrixX<Scalar>>& w, const std::vector<VectorX<Scalar>>& b) {
    Eigen::Index total = 0;
    for (std::size_t l = 0; l < w.size(); ++l) total += w[l].size() + b[l].size();
    VectorX<Scalar> flat(total);
    Eigen::Index k = 0;
    for (std::size_t l = 0; l < w.size(); ++l) {
      for (Eigen::Index i = 0; i < w[l].size(); ++i) flat(k++) = w[l].data()[i];
      for (Eigen::Index i = 0; i < b[l].size(); ++i) flat(k++) = b[l](i);
    }
    return flat;
  }

  std::vector<MatrixX<Scalar>> weights_;
  std::vector<VectorX<Scalar>> biases_;
};

template <typename Scalar>
double accuracy_at_half(const VectorX<Scalar>& prob, const VectorX<Scalar>& y) {
  if (prob.size() == 0) return 0;
  Eigen::Index correct = 0;
  for (Eigen::Index i = 0; i < prob.size(); ++i) {
    correct += ((prob(i) > Scalar(0.5)) ? 1 : 0) == static_cast<int>(y(i)) ? 1 : 0;
  }
  return static_cast<double>(correct) / static_cast<double>(prob.size());
}

template <typename Scalar>
struct MlpFit {
  Mlp<Scalar> model;
  int epochs_run = 0;
  int best_epoch = 0;  // 0 = initial weights
  double best_validation_accuracy = 0;
  std::vector<double> train_loss;  // per epoch
};

// Adam on mini-batches; keeps the weights with the best validation accuracy.
template <typename Scalar>
MlpFit<Scalar> fit_mlp(const MatrixX<Scalar>& x_train, const VectorX<Scalar>& y_train, const MatrixX<Scalar>& x_val,
                       const VectorX<Scalar>& y_val, const MlpOptions& options) {
  if (x_train.rows() == 0) throw InputError("mlp: empty training set");
  if (options.batch_size <= 0 || options.epochs < 0) throw InputError("mlp: invalid batch size or epoch count");
  Mlp<Scalar> net(x_train.cols(), options.architecture, options.init, options.seed);
  const bool have_val = x_val.rows() > 0;
  const auto val_accuracy = [&](const Mlp<Scalar>& m) {
    return have_val ? accuracy_at_half<Scalar>(m.predict_proba(x_val), y_val)
                    : accuracy_at_half<Scalar>(m.predict_proba(x_train), y_train);
  };

  MlpFit<Scalar> fit{net, 0, 0, val_accuracy(net), {}};
  VectorX<Scalar> best = net.parameters();
  VectorX<Scalar> theta = best;
  VectorX<Scalar> m1 = VectorX<Scalar>::Zero(theta.size());
  VectorX<Scalar> m2 = VectorX<Scalar>::Zero(theta.size());
  const Scalar beta1 = 0.9;
  const Scalar beta2 = 0.999;
  const Scalar eps = 1e-8;
  long step = 0;

  Rng rng(options.seed ^ 0xa5a5a5a5ULL);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(x_train.rows()));
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<Eigen::Index>(i);
  int since_best = 0;
  for (int epoch = 1; epoch <= options.epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(options.batch_size)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(options.batch_size));
      const auto rows = static_cast<Eigen::Index>(end - start);
      MatrixX<Scalar> xb(rows, x_train.cols());
      VectorX<Scalar> yb(rows);
      for (Eigen::Index r = 0; r < rows; ++r) {
        xb.row(r) = x_train.row(order[start + static_cast<std::size_t>(r)]);
        yb(r) = y_train(order[start + static_cast<std::size_t>(r)]);
      }
      const Scalar batch_loss = net.loss(xb, yb);
      if (!std::isfinite(static_cast<double>(batch_loss))) {
        throw NumericError("mlp: non-finite loss at epoch " + std::to_string(epoch) + " (batch starting at " +
                           std::to_string(start) + ", lr " + format_double(options.learning_rate) +
                           ", ||theta|| " + format_double(static_cast<double>(theta.norm())) + ")");
      }
      epoch_loss += static_cast<double>(batch_loss) * static_cast<double>(rows);
      const VectorX<Scalar> g = net.gradient(xb, yb);
      ++step;
      m1 = beta1 * m1 + (1 - beta1) * g;
      m2 = beta2 * m2 + (1 - beta2) * g.cwiseAbs2();
      const Scalar c1 = 1 - std::pow(beta1, static_cast<Scalar>(step));
      const Scalar c2 = 1 - std::pow(beta2, static_cast<Scalar>(step));
      theta.array() -= static_cast<Scalar>(options.learning_rate) * (m1.array() / c1) /
                       ((m2.array() / c2).sqrt() + eps);
      net.set_parameters(theta);
    }
    fit.train_loss.push_back(epoch_loss / static_cast<double>(order.size()));
    fit.epochs_run = epoch;
    const double acc = val_accuracy(net);
    if (acc > fit.best_validation_accuracy) {
      fit.best_validation_accuracy = acc;
      fit.best_epoch = epoch;
      best = theta;
      since_best = 0;
    } else if (++since_best >= options.patience) {
      break;
    }
  }
  net.set_parameters(best);
  fit.model = net;
  return fit;
}

}  // namespace wordfun
