#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "dqe/normalization.hpp"

namespace dqe {

/// Mish activation x * tanh(softplus(x)) with a numerically stable softplus.
double mish(double x);
double mish_derivative(double x);

struct DenseLayer {
  Eigen::MatrixXd weight;  ///< [out x in]
  Eigen::VectorXd bias;    ///< [out]
};

struct BatchNormLayer {
  Eigen::VectorXd scale;
  Eigen::VectorXd shift;
  Eigen::VectorXd running_mean;
  Eigen::VectorXd running_var;
  double eps = 1e-5;
  double momentum = 0.1;
};

// Dimension-preserving transform of two (BatchNorm, Mish, Dense) sub-stacks;
// the block output is transform(x) + x.
struct ResidualBlock {
  BatchNormLayer bn1;
  DenseLayer fc1;
  BatchNormLayer bn2;
  DenseLayer fc2;
};

// Residual MLP mapping a history vector to the current. Input and target
// standardization statistics live inside the model so a saved file is
// self-contained.
struct EmulatorNet {
  int input_dim = 10;
  int width = 64;
  int output_dim = 1;  ///< reserved for multi-observable heads; only 1 is exercised
  DenseLayer input_proj;
  std::vector<ResidualBlock> blocks;
  DenseLayer head;
  NormalizationStats norm;

  /// Fresh net: Glorot-uniform weights, zero biases, identity batch norms.
  static EmulatorNet create(int input_dim, int width, int n_blocks, std::uint64_t seed);

  void save(const std::string& path) const;
  static EmulatorNet load(const std::string& path);
};

struct BatchNormCache {
  Eigen::MatrixXd x_hat;
  Eigen::VectorXd inv_std;
};

struct BlockCache {
  Eigen::MatrixXd input;
  BatchNormCache bn1, bn2;
  Eigen::MatrixXd bn1_out, bn2_out;  // Mish inputs
  Eigen::MatrixXd act1, act2;        // Mish outputs (= dense inputs)
};

struct ForwardCache {
  bool training = false;
  Eigen::MatrixXd input;  // standardized, [features x batch]
  std::vector<BlockCache> blocks;
  Eigen::MatrixXd head_in;
};

/// Forward pass over a batch of raw feature rows [batch x input_dim];
/// returns de-standardized predictions. Training mode uses batch statistics
/// (batch >= 2) and updates the running statistics; inference mode is a pure
/// function of the frozen model.
Eigen::VectorXd forward(EmulatorNet& net, const Eigen::MatrixXd& batch, bool training,
                        ForwardCache* cache = nullptr);

/// Standardized-space forward used by the trainer: input [features x batch],
/// output [1 x batch] in target-standardized units.
Eigen::RowVectorXd stack_forward_train(EmulatorNet& net, const Eigen::MatrixXd& x_std,
                                       ForwardCache& cache);
Eigen::RowVectorXd stack_forward_eval(const EmulatorNet& net, const Eigen::MatrixXd& x_std);

struct DenseGrad {
  Eigen::MatrixXd weight;
  Eigen::VectorXd bias;
};
struct BatchNormGrad {
  Eigen::VectorXd scale;
  Eigen::VectorXd shift;
};
struct BlockGrad {
  BatchNormGrad bn1, bn2;
  DenseGrad fc1, fc2;
};
struct Gradients {
  DenseGrad input_proj, head;
  std::vector<BlockGrad> blocks;
};

/// Exact reverse-mode gradients through the full stack, including the
/// batch-statistics pathway of the batch norms. `dloss_dout` is the loss
/// gradient with respect to the standardized head output, [1 x batch].
Gradients backward(const EmulatorNet& net, const ForwardCache& cache,
                   const Eigen::RowVectorXd& dloss_dout);

// AdaBelief optimizer state: first moment and belief (deviation-from-mean
// second moment) per trainable tensor.
struct AdaBeliefState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-16;
  long step_count = 0;
  std::vector<Eigen::VectorXd> m;
  std::vector<Eigen::VectorXd> s;

  static AdaBeliefState for_net(const EmulatorNet& net);
};

/// One AdaBelief update on a flat parameter vector (step counter t >= 1):
///   m <- b1 m + (1-b1) g
///   s <- b2 s + (1-b2) (g - m)^2 + eps
///   theta <- theta - lr * (m / (1-b1^t)) / (sqrt(s / (1-b2^t)) + eps)
void adabelief_update(Eigen::Ref<Eigen::VectorXd> param, const Eigen::Ref<const Eigen::VectorXd>& grad,
                      Eigen::VectorXd& m, Eigen::VectorXd& s, long t, double lr, double beta1,
                      double beta2, double eps);

/// Apply one optimizer step to every trainable tensor of the net.
void adabelief_step(EmulatorNet& net, const Gradients& grads, AdaBeliefState& state, double lr);

struct TrainSchedule {
  int epochs = 2000;
  double learning_rate = 1.0;
  int drop_epoch = 1500;  ///< epochs after this one use learning_rate / drop_factor
  double drop_factor = 10.0;
  int batch_size = 4096;
};

struct EpochLog {
  int epoch;
  double train_loss;
  double val_loss;
  double learning_rate;
};

/// Minimize mean squared error on standardized targets. net.norm must be
/// fitted (on the training split) before the call; raw features/targets are
/// standardized internally. Single-threaded and bit-reproducible for a fixed
/// seed. Throws NumericError on divergence.
std::vector<EpochLog> train(EmulatorNet& net, const Eigen::MatrixXd& train_features,
                            const Eigen::VectorXd& train_targets,
                            const Eigen::MatrixXd& val_features,
                            const Eigen::VectorXd& val_targets, const TrainSchedule& schedule,
                            std::uint64_t seed);

/// Inference on a whole trajectory in one batched pass: [rows x input_dim]
/// features to de-standardized currents. Pure; no side effects on the net.
Eigen::VectorXd predict(const EmulatorNet& net, const Eigen::MatrixXd& features);

}  // namespace dqe
