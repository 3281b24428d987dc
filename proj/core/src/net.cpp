#include "dqe/net.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "dqe/container.hpp"
#include "dqe/errors.hpp"
#include "dqe/rng.hpp"

namespace dqe {

namespace {

double softplus(double x) { return x > 30.0 ? x + std::exp(-x) : std::log1p(std::exp(x)); }

double sigmoid(double x) {
  return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

Eigen::MatrixXd mish_matrix(const Eigen::MatrixXd& x) {
  return x.unaryExpr([](double v) { return mish(v); });
}

Eigen::MatrixXd mish_derivative_matrix(const Eigen::MatrixXd& x) {
  return x.unaryExpr([](double v) { return mish_derivative(v); });
}

Eigen::MatrixXd dense_apply(const DenseLayer& fc, const Eigen::MatrixXd& x) {
  return (fc.weight * x).colwise() + fc.bias;
}

// Training-mode batch norm over columns-as-samples; updates running stats.
Eigen::MatrixXd bn_forward_train(BatchNormLayer& bn, const Eigen::MatrixXd& x,
                                 BatchNormCache& cache) {
  const Eigen::Index b = x.cols();
  const Eigen::VectorXd mean = x.rowwise().mean();
  const Eigen::MatrixXd centered = x.colwise() - mean;
  const Eigen::VectorXd var = centered.array().square().rowwise().mean().matrix();
  cache.inv_std = (var.array() + bn.eps).rsqrt().matrix();
  cache.x_hat = cache.inv_std.asDiagonal() * centered;

  // Running statistics use the unbiased batch variance.
  const double unbias = static_cast<double>(b) / static_cast<double>(b - 1);
  bn.running_mean = (1.0 - bn.momentum) * bn.running_mean + bn.momentum * mean;
  bn.running_var = (1.0 - bn.momentum) * bn.running_var + (bn.momentum * unbias) * var;

  Eigen::MatrixXd out = bn.scale.asDiagonal() * cache.x_hat;
  out.colwise() += bn.shift;
  return out;
}

Eigen::MatrixXd bn_forward_eval(const BatchNormLayer& bn, const Eigen::MatrixXd& x) {
  const Eigen::VectorXd inv_std = (bn.running_var.array() + bn.eps).rsqrt().matrix();
  Eigen::MatrixXd out =
      (bn.scale.array() * inv_std.array()).matrix().asDiagonal() * (x.colwise() - bn.running_mean);
  out.colwise() += bn.shift;
  return out;
}

// Gradient through training-mode batch norm, including the batch-statistics
// pathway: dX = inv_std/B * (B dXhat - sum(dXhat) - x_hat * sum(dXhat x_hat)).
Eigen::MatrixXd bn_backward(const BatchNormLayer& bn, const BatchNormCache& cache,
                            const Eigen::MatrixXd& dout, BatchNormGrad& grad) {
  const double b = static_cast<double>(dout.cols());
  grad.scale = (dout.array() * cache.x_hat.array()).rowwise().sum().matrix();
  grad.shift = dout.rowwise().sum();

  const Eigen::MatrixXd dxhat = bn.scale.asDiagonal() * dout;
  const Eigen::VectorXd sum_dxhat = dxhat.rowwise().sum();
  const Eigen::VectorXd sum_dxhat_xhat =
      (dxhat.array() * cache.x_hat.array()).rowwise().sum().matrix();
  Eigen::MatrixXd dx = b * dxhat;
  dx.colwise() -= sum_dxhat;
  dx.noalias() -= sum_dxhat_xhat.asDiagonal() * cache.x_hat;
  return (cache.inv_std / b).asDiagonal() * dx;
}

void glorot_fill(Eigen::MatrixXd& w, Rng& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
  for (Eigen::Index c = 0; c < w.cols(); ++c)
    for (Eigen::Index r = 0; r < w.rows(); ++r) w(r, c) = rng.uniform(-bound, bound);
}

BatchNormLayer make_bn(int width) {
  BatchNormLayer bn;
  bn.scale = Eigen::VectorXd::Ones(width);
  bn.shift = Eigen::VectorXd::Zero(width);
  bn.running_mean = Eigen::VectorXd::Zero(width);
  bn.running_var = Eigen::VectorXd::Ones(width);
  return bn;
}

}  // namespace

double mish(double x) { return x * std::tanh(softplus(x)); }

double mish_derivative(double x) {
  const double t = std::tanh(softplus(x));
  return t + x * (1.0 - t * t) * sigmoid(x);
}

EmulatorNet EmulatorNet::create(int input_dim, int width, int n_blocks, std::uint64_t seed) {
  if (input_dim < 1 || width < 1 || n_blocks < 0)
    throw std::invalid_argument("EmulatorNet::create: invalid architecture");
  EmulatorNet net;
  net.input_dim = input_dim;
  net.width = width;
  net.output_dim = 1;
  Rng rng(seed);

  net.input_proj.weight.resize(width, input_dim);
  glorot_fill(net.input_proj.weight, rng);
  net.input_proj.bias = Eigen::VectorXd::Zero(width);

  net.blocks.resize(n_blocks);
  for (auto& blk : net.blocks) {
    blk.bn1 = make_bn(width);
    blk.fc1.weight.resize(width, width);
    glorot_fill(blk.fc1.weight, rng);
    blk.fc1.bias = Eigen::VectorXd::Zero(width);
    blk.bn2 = make_bn(width);
    blk.fc2.weight.resize(width, width);
    glorot_fill(blk.fc2.weight, rng);
    blk.fc2.bias = Eigen::VectorXd::Zero(width);
  }

  net.head.weight.resize(net.output_dim, width);
  glorot_fill(net.head.weight, rng);
  net.head.bias = Eigen::VectorXd::Zero(net.output_dim);

  net.norm.feature_mean = Eigen::VectorXd::Zero(input_dim);
  net.norm.feature_std = Eigen::VectorXd::Ones(input_dim);
  return net;
}

Eigen::RowVectorXd stack_forward_train(EmulatorNet& net, const Eigen::MatrixXd& x_std,
                                       ForwardCache& cache) {
  if (x_std.rows() != net.input_dim)
    throw std::invalid_argument("stack_forward_train: feature dimension mismatch");
  if (x_std.cols() < 2)
    throw std::invalid_argument("training-mode forward needs a batch of at least 2");
  cache.training = true;
  cache.input = x_std;
  cache.blocks.resize(net.blocks.size());

  Eigen::MatrixXd x = dense_apply(net.input_proj, x_std);
  for (std::size_t i = 0; i < net.blocks.size(); ++i) {
    auto& blk = net.blocks[i];
    auto& bc = cache.blocks[i];
    bc.input = x;
    bc.bn1_out = bn_forward_train(blk.bn1, x, bc.bn1);
    bc.act1 = mish_matrix(bc.bn1_out);
    const Eigen::MatrixXd u1 = dense_apply(blk.fc1, bc.act1);
    bc.bn2_out = bn_forward_train(blk.bn2, u1, bc.bn2);
    bc.act2 = mish_matrix(bc.bn2_out);
    x += dense_apply(blk.fc2, bc.act2);
  }
  cache.head_in = x;
  return dense_apply(net.head, x).row(0);
}

Eigen::RowVectorXd stack_forward_eval(const EmulatorNet& net, const Eigen::MatrixXd& x_std) {
  if (x_std.rows() != net.input_dim)
    throw std::invalid_argument("stack_forward_eval: feature dimension mismatch");
  Eigen::MatrixXd x = dense_apply(net.input_proj, x_std);
  for (const auto& blk : net.blocks) {
    const Eigen::MatrixXd a1 = mish_matrix(bn_forward_eval(blk.bn1, x));
    const Eigen::MatrixXd a2 = mish_matrix(bn_forward_eval(blk.bn2, dense_apply(blk.fc1, a1)));
    x += dense_apply(blk.fc2, a2);
  }
  return dense_apply(net.head, x).row(0);
}

Eigen::VectorXd forward(EmulatorNet& net, const Eigen::MatrixXd& batch, bool training,
                        ForwardCache* cache) {
  net.norm.validate(net.input_dim);
  if (batch.cols() != net.input_dim)
    throw std::invalid_argument("forward: batch must be [batch x input_dim]");
  const Eigen::MatrixXd x_std = net.norm.standardize_features(batch).transpose();
  Eigen::RowVectorXd y_std;
  if (training) {
    ForwardCache local;
    ForwardCache& c = cache ? *cache : local;
    y_std = stack_forward_train(net, x_std, c);
  } else {
    y_std = stack_forward_eval(net, x_std);
  }
  return net.norm.destandardize_targets(y_std.transpose());
}

Gradients backward(const EmulatorNet& net, const ForwardCache& cache,
                   const Eigen::RowVectorXd& dloss_dout) {
  if (!cache.training)
    throw std::invalid_argument("backward: cache was not produced by a training-mode forward");
  if (cache.blocks.size() != net.blocks.size())
    throw std::invalid_argument("backward: cache does not match the net");

  Gradients g;
  g.blocks.resize(net.blocks.size());

  // Head: y = Wh x + bh.
  g.head.weight = dloss_dout * cache.head_in.transpose();
  g.head.bias = Eigen::VectorXd::Constant(1, dloss_dout.sum());
  Eigen::MatrixXd dx = net.head.weight.transpose() * dloss_dout;

  for (Eigen::Index i = static_cast<Eigen::Index>(net.blocks.size()) - 1; i >= 0; --i) {
    const auto& blk = net.blocks[i];
    const auto& bc = cache.blocks[i];
    auto& bg = g.blocks[i];

    // out = x + fc2(mish(bn2(fc1(mish(bn1(x)))))); d(out)/dx carries the
    // identity term plus the transform path.
    bg.fc2.weight = dx * bc.act2.transpose();
    bg.fc2.bias = dx.rowwise().sum();
    Eigen::MatrixXd da2 = blk.fc2.weight.transpose() * dx;
    Eigen::MatrixXd dt2 = da2.array() * mish_derivative_matrix(bc.bn2_out).array();
    const Eigen::MatrixXd du1 = bn_backward(blk.bn2, bc.bn2, dt2, bg.bn2);

    bg.fc1.weight = du1 * bc.act1.transpose();
    bg.fc1.bias = du1.rowwise().sum();
    Eigen::MatrixXd da1 = blk.fc1.weight.transpose() * du1;
    Eigen::MatrixXd dt1 = da1.array() * mish_derivative_matrix(bc.bn1_out).array();
    dx += bn_backward(blk.bn1, bc.bn1, dt1, bg.bn1);
  }

  g.input_proj.weight = dx * cache.input.transpose();
  g.input_proj.bias = dx.rowwise().sum();
  return g;
}

namespace {

// Fixed traversal order of the trainable tensors; optimizer state, gradient
// flattening and checkpoints all follow it.
template <typename Net, typename Fn>
void for_each_tensor(Net& net, Fn&& fn) {
  fn("proj.weight", net.input_proj.weight);
  fn("proj.bias", net.input_proj.bias);
  for (std::size_t i = 0; i < net.blocks.size(); ++i) {
    auto& blk = net.blocks[i];
    const std::string p = "block" + std::to_string(i) + ".";
    fn(p + "bn1.scale", blk.bn1.scale);
    fn(p + "bn1.shift", blk.bn1.shift);
    fn(p + "fc1.weight", blk.fc1.weight);
    fn(p + "fc1.bias", blk.fc1.bias);
    fn(p + "bn2.scale", blk.bn2.scale);
    fn(p + "bn2.shift", blk.bn2.shift);
    fn(p + "fc2.weight", blk.fc2.weight);
    fn(p + "fc2.bias", blk.fc2.bias);
  }
  fn("head.weight", net.head.weight);
  fn("head.bias", net.head.bias);
}

template <typename Grads, typename Fn>
void for_each_gradient(Grads& g, Fn&& fn) {
  fn(g.input_proj.weight);
  fn(g.input_proj.bias);
  for (auto& blk : g.blocks) {
    fn(blk.bn1.scale);
    fn(blk.bn1.shift);
    fn(blk.fc1.weight);
    fn(blk.fc1.bias);
    fn(blk.bn2.scale);
    fn(blk.bn2.shift);
    fn(blk.fc2.weight);
    fn(blk.fc2.bias);
  }
  fn(g.head.weight);
  fn(g.head.bias);
}

}  // namespace

AdaBeliefState AdaBeliefState::for_net(const EmulatorNet& net) {
  AdaBeliefState st;
  for_each_tensor(net, [&st](const std::string&, const auto& tensor) {
    st.m.push_back(Eigen::VectorXd::Zero(tensor.size()));
    st.s.push_back(Eigen::VectorXd::Zero(tensor.size()));
  });
  return st;
}

void adabelief_update(Eigen::Ref<Eigen::VectorXd> param,
                      const Eigen::Ref<const Eigen::VectorXd>& grad, Eigen::VectorXd& m,
                      Eigen::VectorXd& s, long t, double lr, double beta1, double beta2,
                      double eps) {
  m = beta1 * m + (1.0 - beta1) * grad;
  s = (beta2 * s.array() + (1.0 - beta2) * (grad - m).array().square() + eps).matrix();
  const double m_corr = 1.0 - std::pow(beta1, static_cast<double>(t));
  const double s_corr = 1.0 - std::pow(beta2, static_cast<double>(t));
  param.array() -= lr * (m.array() / m_corr) / ((s.array() / s_corr).sqrt() + eps);
}

void adabelief_step(EmulatorNet& net, const Gradients& grads, AdaBeliefState& state, double lr) {
  ++state.step_count;
  std::size_t k = 0;
  std::vector<Eigen::Map<Eigen::VectorXd>> params;
  for_each_tensor(net, [&params](const std::string&, auto& tensor) {
    params.emplace_back(tensor.data(), tensor.size());
  });
  std::vector<Eigen::Map<const Eigen::VectorXd>> gviews;
  for_each_gradient(grads, [&gviews](const auto& tensor) {
    gviews.emplace_back(tensor.data(), tensor.size());
  });
  if (params.size() != gviews.size() || params.size() != state.m.size())
    throw std::invalid_argument("adabelief_step: state does not match the net");
  for (k = 0; k < params.size(); ++k) {
    if (params[k].size() != gviews[k].size() || params[k].size() != state.m[k].size())
      throw std::invalid_argument("adabelief_step: tensor shape mismatch");
    adabelief_update(params[k], gviews[k], state.m[k], state.s[k], state.step_count, lr,
                     state.beta1, state.beta2, state.epsilon);
  }
}

std::vector<EpochLog> train(EmulatorNet& net, const Eigen::MatrixXd& train_features,
                            const Eigen::VectorXd& train_targets,
                            const Eigen::MatrixXd& val_features,
                            const Eigen::VectorXd& val_targets, const TrainSchedule& schedule,
                            std::uint64_t seed) {
  net.norm.validate(net.input_dim);
  const Eigen::Index s_train = train_features.rows();
  if (train_features.cols() != net.input_dim || train_targets.size() != s_train)
    throw std::invalid_argument("train: training array shapes do not match");
  if (val_features.rows() > 0 &&
      (val_features.cols() != net.input_dim || val_targets.size() != val_features.rows()))
    throw std::invalid_argument("train: validation array shapes do not match");
  if (s_train < 2) throw std::invalid_argument("train: need at least 2 training samples");
  if (schedule.epochs < 0 || schedule.batch_size < 2 || schedule.drop_factor <= 0.0)
    throw std::invalid_argument("train: invalid schedule");

  const Eigen::MatrixXd x_train = net.norm.standardize_features(train_features).transpose();
  const Eigen::VectorXd y_train = net.norm.standardize_targets(train_targets);
  const Eigen::MatrixXd x_val = val_features.rows() > 0
                                    ? net.norm.standardize_features(val_features).transpose()
                                    : Eigen::MatrixXd(net.input_dim, 0);
  const Eigen::VectorXd y_val = net.norm.standardize_targets(val_targets);

  Rng rng(seed);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(s_train));
  std::iota(order.begin(), order.end(), Eigen::Index{0});

  AdaBeliefState opt = AdaBeliefState::for_net(net);
  std::vector<EpochLog> log;
  log.reserve(schedule.epochs);

  ForwardCache cache;
  Eigen::MatrixXd xb;
  Eigen::VectorXd yb;
  for (int epoch = 1; epoch <= schedule.epochs; ++epoch) {
    const double lr = epoch > schedule.drop_epoch
                          ? schedule.learning_rate / schedule.drop_factor
                          : schedule.learning_rate;
    deterministic_shuffle(order, rng);

    double loss_sum = 0.0;
    Eigen::Index seen = 0;
    Eigen::Index pos = 0;
    while (pos < s_train) {
      Eigen::Index b = std::min<Eigen::Index>(schedule.batch_size, s_train - pos);
      // A trailing single sample cannot be batch-normalized; fold it in.
      if (s_train - pos - b == 1) b += 1;
      xb.resize(net.input_dim, b);
      yb.resize(b);
      for (Eigen::Index i = 0; i < b; ++i) {
        xb.col(i) = x_train.col(order[pos + i]);
        yb[i] = y_train[order[pos + i]];
      }
      pos += b;

      const Eigen::RowVectorXd pred = stack_forward_train(net, xb, cache);
      const Eigen::RowVectorXd err = pred - yb.transpose();
      const double loss = err.squaredNorm() / static_cast<double>(b);
      loss_sum += loss * static_cast<double>(b);
      seen += b;
      if (!std::isfinite(loss) || loss > 1e6)
        throw NumericError("train: diverged at epoch " + std::to_string(epoch) +
                           " (loss = " + std::to_string(loss) + ")");

      const Eigen::RowVectorXd dout = (2.0 / static_cast<double>(b)) * err;
      const Gradients grads = backward(net, cache, dout);
      adabelief_step(net, grads, opt, lr);
    }

    double val_loss = std::numeric_limits<double>::quiet_NaN();
    if (y_val.size() > 0) {
      const Eigen::RowVectorXd pv = stack_forward_eval(net, x_val);
      val_loss = (pv - y_val.transpose()).squaredNorm() / static_cast<double>(y_val.size());
    }
    log.push_back({epoch, loss_sum / static_cast<double>(seen), val_loss, lr});
  }
  return log;
}

Eigen::VectorXd predict(const EmulatorNet& net, const Eigen::MatrixXd& features) {
  net.norm.validate(net.input_dim);
  if (features.cols() != net.input_dim)
    throw std::invalid_argument("predict: feature width does not match the model input");
  const Eigen::MatrixXd x_std = net.norm.standardize_features(features).transpose();
  return net.norm.destandardize_targets(stack_forward_eval(net, x_std).transpose());
}

void EmulatorNet::save(const std::string& path) const {
  ContainerWriter w("DQM1", 1);
  w.set_meta("kind", "emulator-net");
  w.set_meta("input_dim", static_cast<std::int64_t>(input_dim));
  w.set_meta("width", static_cast<std::int64_t>(width));
  w.set_meta("output_dim", static_cast<std::int64_t>(output_dim));
  w.set_meta("n_blocks", static_cast<std::int64_t>(blocks.size()));
  w.set_meta("target_mean", norm.target_mean);
  w.set_meta("target_std", norm.target_std);
  if (!blocks.empty()) {
    w.set_meta("bn_eps", blocks.front().bn1.eps);
    w.set_meta("bn_momentum", blocks.front().bn1.momentum);
  }
  w.add_vector("norm.feature_mean", norm.feature_mean);
  w.add_vector("norm.feature_std", norm.feature_std);
  for_each_tensor(*this, [&w](const std::string& name, const auto& tensor) {
    if constexpr (std::decay_t<decltype(tensor)>::ColsAtCompileTime == 1)
      w.add_vector(name, tensor);
    else
      w.add_matrix(name, tensor);
  });
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const std::string p = "block" + std::to_string(i) + ".";
    w.add_vector(p + "bn1.running_mean", blocks[i].bn1.running_mean);
    w.add_vector(p + "bn1.running_var", blocks[i].bn1.running_var);
    w.add_vector(p + "bn2.running_mean", blocks[i].bn2.running_mean);
    w.add_vector(p + "bn2.running_var", blocks[i].bn2.running_var);
  }
  w.write(path);
}

EmulatorNet EmulatorNet::load(const std::string& path) {
  ContainerReader r(path, "DQM1", 1);
  EmulatorNet net;
  net.input_dim = static_cast<int>(r.meta_int("input_dim"));
  net.width = static_cast<int>(r.meta_int("width"));
  net.output_dim = static_cast<int>(r.meta_int("output_dim"));
  const int n_blocks = static_cast<int>(r.meta_int("n_blocks"));
  if (net.input_dim < 1 || net.width < 1 || n_blocks < 0 || net.output_dim != 1)
    throw FormatError("'" + path + "': invalid architecture descriptor");
  net.blocks.resize(n_blocks);

  net.norm.feature_mean = r.vector("norm.feature_mean");
  net.norm.feature_std = r.vector("norm.feature_std");
  net.norm.target_mean = r.meta_double("target_mean");
  net.norm.target_std = r.meta_double("target_std");
  if (net.norm.feature_mean.size() != net.input_dim)
    throw FormatError("'" + path + "': normalization stats do not match input_dim");

  const double eps = r.has_meta("bn_eps") ? r.meta_double("bn_eps") : 1e-5;
  const double momentum = r.has_meta("bn_momentum") ? r.meta_double("bn_momentum") : 0.1;

  for_each_tensor(net, [&r, &path](const std::string& name, auto& tensor) {
    if constexpr (std::decay_t<decltype(tensor)>::ColsAtCompileTime == 1)
      tensor = r.vector(name);
    else
      tensor = r.matrix(name);
    if (tensor.size() == 0) throw FormatError("'" + path + "': empty tensor '" + name + "'");
  });
  for (int i = 0; i < n_blocks; ++i) {
    const std::string p = "block" + std::to_string(i) + ".";
    auto& blk = net.blocks[i];
    blk.bn1.running_mean = r.vector(p + "bn1.running_mean");
    blk.bn1.running_var = r.vector(p + "bn1.running_var");
    blk.bn2.running_mean = r.vector(p + "bn2.running_mean");
    blk.bn2.running_var = r.vector(p + "bn2.running_var");
    blk.bn1.eps = blk.bn2.eps = eps;
    blk.bn1.momentum = blk.bn2.momentum = momentum;
  }

  // Shape validation: everything must agree with the descriptor.
  if (net.input_proj.weight.rows() != net.width || net.input_proj.weight.cols() != net.input_dim ||
      net.head.weight.rows() != net.output_dim || net.head.weight.cols() != net.width)
    throw FormatError("'" + path + "': tensor shapes do not match the architecture");
  for (const auto& blk : net.blocks)
    if (blk.fc1.weight.rows() != net.width || blk.fc1.weight.cols() != net.width ||
        blk.fc2.weight.rows() != net.width || blk.fc2.weight.cols() != net.width ||
        blk.bn1.scale.size() != net.width || blk.bn2.scale.size() != net.width ||
        blk.bn1.running_mean.size() != net.width || blk.bn2.running_var.size() != net.width)
      throw FormatError("'" + path + "': block tensor shapes do not match the architecture");
  return net;
}

}  // namespace dqe
