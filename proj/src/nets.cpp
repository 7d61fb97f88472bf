#include "hdnf/nets.hpp"

#include <cmath>
#include <stdexcept>

namespace hdnf::nets {

namespace {

Eigen::MatrixXd glorot_uniform(int rows, int cols, std::mt19937_64& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  std::uniform_real_distribution<double> dist(-limit, limit);
  Eigen::MatrixXd w(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      w(r, c) = dist(rng);
    }
  }
  return w;
}

}  // namespace

Mlp::Mlp(const std::vector<int>& layer_sizes, std::mt19937_64& rng) {
  if (layer_sizes.size() < 2) {
    throw std::invalid_argument("Mlp needs at least input and output sizes");
  }
  for (int s : layer_sizes) {
    if (s <= 0) throw std::invalid_argument("Mlp layer sizes must be positive");
  }
  layers_.reserve(layer_sizes.size() - 1);
  for (std::size_t i = 0; i + 1 < layer_sizes.size(); ++i) {
    Layer layer;
    layer.w = glorot_uniform(layer_sizes[i + 1], layer_sizes[i], rng);
    layer.b = Eigen::VectorXd::Zero(layer_sizes[i + 1]);
    layers_.push_back(std::move(layer));
  }
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& input) const {
  Eigen::MatrixXd a = input;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    a = (a * layers_[l].w.transpose()).rowwise() + layers_[l].b.transpose();
    if (l + 1 < layers_.size()) a = a.array().tanh().matrix();
  }
  return a;
}

Eigen::MatrixXd Mlp::forward_cached(const Eigen::MatrixXd& input,
                                    Cache& cache) const {
  cache.input = input;
  cache.activations.clear();
  cache.activations.reserve(layers_.size());
  Eigen::MatrixXd a = input;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    a = (a * layers_[l].w.transpose()).rowwise() + layers_[l].b.transpose();
    if (l + 1 < layers_.size()) a = a.array().tanh().matrix();
    cache.activations.push_back(a);
  }
  return a;
}

Mlp::Grads Mlp::zero_grads() const {
  Grads grads;
  grads.reserve(layers_.size());
  for (const Layer& layer : layers_) {
    Layer g;
    g.w = Eigen::MatrixXd::Zero(layer.w.rows(), layer.w.cols());
    g.b = Eigen::VectorXd::Zero(layer.b.size());
    grads.push_back(std::move(g));
  }
  return grads;
}

Eigen::MatrixXd Mlp::backward(const Cache& cache,
                              const Eigen::MatrixXd& grad_output,
                              Grads& grads) const {
  if (grads.size() != layers_.size()) {
    throw std::invalid_argument("grads shape mismatch; use zero_grads()");
  }
  Eigen::MatrixXd delta = grad_output;
  for (int l = static_cast<int>(layers_.size()) - 1; l >= 0; --l) {
    if (l + 1 < static_cast<int>(layers_.size())) {
      // Hidden layer: fold in tanh'(z) = 1 - a^2.
      const Eigen::MatrixXd& a = cache.activations[l];
      delta = (delta.array() * (1.0 - a.array().square())).matrix();
    }
    const Eigen::MatrixXd& in =
        (l == 0) ? cache.input : cache.activations[l - 1];
    grads[l].w += delta.transpose() * in;
    grads[l].b += delta.colwise().sum().transpose();
    if (l > 0) delta = delta * layers_[l].w;
  }
  return delta * layers_[0].w;
}

void soft_update(Mlp& target, const Mlp& online, double tau) {
  if (target.layers().size() != online.layers().size()) {
    throw std::invalid_argument("soft_update: mismatched architectures");
  }
  for (std::size_t l = 0; l < target.layers().size(); ++l) {
    target.layers()[l].w =
        (1.0 - tau) * target.layers()[l].w + tau * online.layers()[l].w;
    target.layers()[l].b =
        (1.0 - tau) * target.layers()[l].b + tau * online.layers()[l].b;
  }
}

Adam::Adam(const Mlp& net, double lr, double beta1, double beta2, double eps)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
  m_.reserve(net.layers().size());
  v_.reserve(net.layers().size());
  for (const Mlp::Layer& layer : net.layers()) {
    Mlp::Layer zm;
    zm.w = Eigen::MatrixXd::Zero(layer.w.rows(), layer.w.cols());
    zm.b = Eigen::VectorXd::Zero(layer.b.size());
    m_.push_back(zm);
    v_.push_back(std::move(zm));
  }
}

void Adam::step(Mlp& net, const Mlp::Grads& grads) {
  if (grads.size() != m_.size() || net.layers().size() != m_.size()) {
    throw std::invalid_argument("Adam::step: shape mismatch");
  }
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t l = 0; l < m_.size(); ++l) {
    m_[l].w = beta1_ * m_[l].w + (1.0 - beta1_) * grads[l].w;
    v_[l].w = beta2_ * v_[l].w +
              (1.0 - beta2_) * grads[l].w.array().square().matrix();
    m_[l].b = beta1_ * m_[l].b + (1.0 - beta1_) * grads[l].b;
    v_[l].b = beta2_ * v_[l].b +
              (1.0 - beta2_) * grads[l].b.array().square().matrix();
    const Eigen::ArrayXXd mw_hat = m_[l].w.array() / bc1;
    const Eigen::ArrayXXd vw_hat = v_[l].w.array() / bc2;
    net.layers()[l].w.array() -= lr_ * mw_hat / (vw_hat.sqrt() + eps_);
    const Eigen::ArrayXd mb_hat = m_[l].b.array() / bc1;
    const Eigen::ArrayXd vb_hat = v_[l].b.array() / bc2;
    net.layers()[l].b.array() -= lr_ * mb_hat / (vb_hat.sqrt() + eps_);
  }
}

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
  nlohmann::json j;
  j["rows"] = m.rows();
  j["cols"] = m.cols();
  std::vector<double> flat;
  flat.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) flat.push_back(m(r, c));
  }
  j["data"] = flat;
  return j;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
  const Eigen::Index rows = j.at("rows").get<Eigen::Index>();
  const Eigen::Index cols = j.at("cols").get<Eigen::Index>();
  const std::vector<double> flat = j.at("data").get<std::vector<double>>();
  if (static_cast<Eigen::Index>(flat.size()) != rows * cols) {
    throw std::invalid_argument("matrix_from_json: data length mismatch");
  }
  Eigen::MatrixXd m(rows, cols);
  std::size_t idx = 0;
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = flat[idx++];
  }
  return m;
}

nlohmann::json Mlp::to_json() const {
  nlohmann::json layers = nlohmann::json::array();
  for (const Layer& layer : layers_) {
    nlohmann::json jl;
    jl["w"] = matrix_to_json(layer.w);
    jl["b"] = matrix_to_json(layer.b);
    layers.push_back(std::move(jl));
  }
  return nlohmann::json{{"layers", std::move(layers)}};
}

Mlp Mlp::from_json(const nlohmann::json& j) {
  Mlp net;
  for (const nlohmann::json& jl : j.at("layers")) {
    Layer layer;
    layer.w = matrix_from_json(jl.at("w"));
    layer.b = matrix_from_json(jl.at("b"));
    if (layer.b.size() != layer.w.rows()) {
      throw std::invalid_argument("Mlp::from_json: bias/weight mismatch");
    }
    net.layers_.push_back(std::move(layer));
  }
  return net;
}

nlohmann::json Adam::to_json() const {
  nlohmann::json j;
  j["lr"] = lr_;
  j["beta1"] = beta1_;
  j["beta2"] = beta2_;
  j["eps"] = eps_;
  j["t"] = t_;
  nlohmann::json jm = nlohmann::json::array();
  nlohmann::json jv = nlohmann::json::array();
  for (std::size_t l = 0; l < m_.size(); ++l) {
    jm.push_back(nlohmann::json{{"w", matrix_to_json(m_[l].w)},
                                {"b", matrix_to_json(m_[l].b)}});
    jv.push_back(nlohmann::json{{"w", matrix_to_json(v_[l].w)},
                                {"b", matrix_to_json(v_[l].b)}});
  }
  j["m"] = std::move(jm);
  j["v"] = std::move(jv);
  return j;
}

Adam Adam::from_json(const nlohmann::json& j) {
  Adam opt;
  opt.lr_ = j.at("lr").get<double>();
  opt.beta1_ = j.at("beta1").get<double>();
  opt.beta2_ = j.at("beta2").get<double>();
  opt.eps_ = j.at("eps").get<double>();
  opt.t_ = j.at("t").get<long>();
  for (const nlohmann::json& jl : j.at("m")) {
    Mlp::Layer layer;
    layer.w = matrix_from_json(jl.at("w"));
    layer.b = matrix_from_json(jl.at("b"));
    opt.m_.push_back(std::move(layer));
  }
  for (const nlohmann::json& jl : j.at("v")) {
    Mlp::Layer layer;
    layer.w = matrix_from_json(jl.at("w"));
    layer.b = matrix_from_json(jl.at("b"));
    opt.v_.push_back(std::move(layer));
  }
  return opt;
}

}  // namespace hdnf::nets
