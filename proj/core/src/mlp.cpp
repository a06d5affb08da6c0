#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "dmlspss/dataset.hpp"
#include "dmlspss/learners.hpp"

namespace dmlspss {
namespace mlp {
namespace {

Matrix activate(const Matrix& z, Activation act) {
  if (act == Activation::ReLU) return z.cwiseMax(0.0);
  return z.array().tanh().matrix();
}

// Derivative of the activation expressed through its pre-activation input.
Matrix activation_slope(const Matrix& z, Activation act) {
  if (act == Activation::ReLU) return (z.array() > 0.0).cast<double>().matrix();
  const auto th = z.array().tanh();
  return (1.0 - th * th).matrix();
}

double weight_penalty(const MlpParams& net) {
  double s = 0.0;
  for (const auto& layer : net.layers) s += layer.weights.squaredNorm();
  return s;
}

}  // namespace

MlpParams init(std::size_t inputs, const std::vector<int>& hidden, Activation activation,
               std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  MlpParams net;
  net.activation = activation;
  std::vector<Eigen::Index> widths{static_cast<Eigen::Index>(inputs)};
  for (int h : hidden) widths.push_back(h);
  widths.push_back(1);
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    const Eigen::Index fan_in = widths[l];
    const Eigen::Index fan_out = widths[l + 1];
    const bool output = l + 2 == widths.size();
    const double limit = (!output && activation == Activation::ReLU)
                             ? std::sqrt(6.0 / static_cast<double>(fan_in))
                             : std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    std::uniform_real_distribution<double> draw(-limit, limit);
    DenseLayer layer;
    layer.weights.resize(fan_out, fan_in);
    for (Eigen::Index i = 0; i < fan_out; ++i) {
      for (Eigen::Index j = 0; j < fan_in; ++j) layer.weights(i, j) = draw(rng);
    }
    layer.bias = Vector::Zero(fan_out);
    net.layers.push_back(std::move(layer));
  }
  return net;
}

Vector forward(const MlpParams& net, const Matrix& x) {
  Matrix a = x;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const auto& layer = net.layers[l];
    Matrix z = a * layer.weights.transpose();
    z.rowwise() += layer.bias.transpose();
    a = l + 1 < net.layers.size() ? activate(z, net.activation) : std::move(z);
  }
  return a.col(0);
}

double loss(const MlpParams& net, const Matrix& x, const Vector& y, double l2_weight) {
  const Vector r = forward(net, x) - y;
  return 0.5 * r.squaredNorm() / static_cast<double>(y.size()) +
         0.5 * l2_weight * weight_penalty(net);
}

Gradient loss_gradient(const MlpParams& net, const Matrix& x, const Vector& y, double l2_weight) {
  const std::size_t depth = net.layers.size();
  std::vector<Matrix> pre(depth);
  std::vector<Matrix> post(depth + 1);
  post[0] = x;
  for (std::size_t l = 0; l < depth; ++l) {
    pre[l] = post[l] * net.layers[l].weights.transpose();
    pre[l].rowwise() += net.layers[l].bias.transpose();
    post[l + 1] = l + 1 < depth ? activate(pre[l], net.activation) : pre[l];
  }
  const auto b = static_cast<double>(y.size());
  const Vector r = post[depth].col(0) - y;

  Gradient g;
  g.loss = 0.5 * r.squaredNorm() / b + 0.5 * l2_weight * weight_penalty(net);
  g.layers.resize(depth);
  Matrix delta = r / b;  // b x 1
  for (std::size_t l = depth; l-- > 0;) {
    g.layers[l].weights = delta.transpose() * post[l] + l2_weight * net.layers[l].weights;
    g.layers[l].bias = delta.colwise().sum().transpose();
    if (l > 0) {
      delta = (delta * net.layers[l].weights).cwiseProduct(activation_slope(pre[l - 1], net.activation));
    }
  }
  return g;
}

}  // namespace mlp

FittedModel fit_mlp(const LearnerSpec& spec, const MlpSpec& cfg, const Matrix& x, const Vector& y) {
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols();

  MlpParams net = mlp::init(static_cast<std::size_t>(p), cfg.hidden, cfg.activation, cfg.seed);
  net.x_mean = Vector::Zero(p);
  net.x_scale = Vector::Ones(p);
  if (cfg.standardize && n >= 2) {
    const Standardized sx = standardize(x);
    net.x_mean = sx.report.means;
    net.x_scale = sx.report.scales;
    net.y_mean = y.mean();
    const double sd = std::sqrt((y.array() - net.y_mean).square().mean());
    net.y_scale = sd > kDegenerateScale ? sd : 1.0;
  }
  Matrix xs = x;
  for (Eigen::Index j = 0; j < p; ++j) {
    xs.col(j) = (xs.col(j).array() - net.x_mean[j]) / net.x_scale[j];
  }
  const Vector ys = (y.array() - net.y_mean) / net.y_scale;

  // Mean-loss objective with penalty l2/(2n) |W|^2 matches ridge(lambda = l2)
  // when there are no hidden layers.
  const double l2_weight = cfg.l2 / static_cast<double>(n);
  constexpr double kBeta1 = 0.9;
  constexpr double kBeta2 = 0.999;
  constexpr double kAdamEps = 1e-8;

  std::vector<DenseLayer> m1(net.layers.size());
  std::vector<DenseLayer> m2(net.layers.size());
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    m1[l].weights = Matrix::Zero(net.layers[l].weights.rows(), net.layers[l].weights.cols());
    m1[l].bias = Vector::Zero(net.layers[l].bias.size());
    m2[l] = m1[l];
  }

  std::mt19937_64 rng(mix_seed(cfg.seed, 1));
  IndexList order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto batch = static_cast<std::size_t>(std::min<Eigen::Index>(cfg.batch, n));
  long step = 0;
  bool diverged = false;

  for (int epoch = 0; epoch < cfg.epochs && !diverged; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) {
      std::uniform_int_distribution<std::size_t> pick(0, i - 1);
      std::swap(order[i - 1], order[pick(rng)]);
    }
    double epoch_loss = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t stop = std::min(order.size(), start + batch);
      const IndexList rows(order.begin() + static_cast<std::ptrdiff_t>(start),
                           order.begin() + static_cast<std::ptrdiff_t>(stop));
      const mlp::Gradient g = mlp::loss_gradient(net, take_rows(xs, rows), take(ys, rows), l2_weight);
      if (!std::isfinite(g.loss)) {
        diverged = true;
        break;
      }
      epoch_loss += g.loss;
      ++batches;
      ++step;
      const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(step));
      for (std::size_t l = 0; l < net.layers.size(); ++l) {
        auto adam = [&](auto& param, auto& first, auto& second, const auto& grad) {
          first = kBeta1 * first + (1.0 - kBeta1) * grad;
          second = kBeta2 * second + (1.0 - kBeta2) * grad.cwiseProduct(grad);
          param.array() -= cfg.step_size * (first.array() / c1) /
                           ((second.array() / c2).sqrt() + kAdamEps);
        };
        adam(net.layers[l].weights, m1[l].weights, m2[l].weights, g.layers[l].weights);
        adam(net.layers[l].bias, m1[l].bias, m2[l].bias, g.layers[l].bias);
      }
    }
    if (!diverged) net.loss_trace.push_back(epoch_loss / static_cast<double>(batches));
  }

  const auto np = static_cast<std::size_t>(n);
  const auto pp = static_cast<std::size_t>(p);
  if (diverged) {
    const auto epochs_done = net.loss_trace.size();
    throw NonConvergenceError(
        "mlp training loss became non-finite after " + std::to_string(epochs_done) + " epochs",
        std::make_shared<const FittedModel>(spec, std::move(net), np, pp));
  }
  return FittedModel(spec, std::move(net), np, pp);
}

}  // namespace dmlspss
