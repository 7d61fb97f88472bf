#pragma once

#include <Eigen/Core>

#include <random>
#include <vector>

#include <json.hpp>

namespace hdnf::nets {

// Fully connected net with tanh hidden layers and a linear output layer.
// Rows are batch samples. Output squashing (tanh/sigmoid heads) is applied
// by the caller, which also owns the matching gradient factors.
class Mlp {
 public:
  struct Layer {
    Eigen::MatrixXd w;  // out x in
    Eigen::VectorXd b;
  };

  struct Cache {
    Eigen::MatrixXd input;
    std::vector<Eigen::MatrixXd> activations;  // post-tanh, last layer raw
  };

  using Grads = std::vector<Layer>;

  Mlp() = default;
  // Glorot-uniform init drawn from rng in a fixed order.
  Mlp(const std::vector<int>& layer_sizes, std::mt19937_64& rng);

  Eigen::MatrixXd forward(const Eigen::MatrixXd& input) const;
  Eigen::MatrixXd forward_cached(const Eigen::MatrixXd& input,
                                 Cache& cache) const;

  // Backpropagates grad_output (batch x out), adds parameter gradients into
  // grads (which must be zero_grads()-shaped), returns grad wrt the input.
  Eigen::MatrixXd backward(const Cache& cache,
                           const Eigen::MatrixXd& grad_output,
                           Grads& grads) const;

  Grads zero_grads() const;

  int input_size() const { return layers_.empty() ? 0 : static_cast<int>(layers_.front().w.cols()); }
  int output_size() const { return layers_.empty() ? 0 : static_cast<int>(layers_.back().w.rows()); }
  const std::vector<Layer>& layers() const { return layers_; }
  std::vector<Layer>& layers() { return layers_; }

  nlohmann::json to_json() const;
  static Mlp from_json(const nlohmann::json& j);

 private:
  std::vector<Layer> layers_;
};

// target <- (1 - tau) * target + tau * online
void soft_update(Mlp& target, const Mlp& online, double tau);

class Adam {
 public:
  Adam() = default;
  Adam(const Mlp& net, double lr, double beta1 = 0.9, double beta2 = 0.999,
       double eps = 1e-8);

  void step(Mlp& net, const Mlp::Grads& grads);

  double learning_rate() const { return lr_; }

  nlohmann::json to_json() const;
  static Adam from_json(const nlohmann::json& j);

 private:
  double lr_ = 1e-3;
  double beta1_ = 0.9;
  double beta2_ = 0.999;
  double eps_ = 1e-8;
  long t_ = 0;
  std::vector<Mlp::Layer> m_;
  std::vector<Mlp::Layer> v_;
};

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m);
Eigen::MatrixXd matrix_from_json(const nlohmann::json& j);

}  // namespace hdnf::nets
