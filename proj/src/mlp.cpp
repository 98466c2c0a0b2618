#include "signmimic/mlp.hpp"

#include <Eigen/QR>
#include <cmath>

#include "signmimic/error.hpp"

namespace signmimic {

namespace {

Eigen::MatrixXd activate(const Eigen::MatrixXd& z, Activation a) {
  if (a == Activation::relu) return z.cwiseMax(0.0);
  return z.array().tanh().matrix();
}

// Elementwise derivative of the activation, evaluated from pre-activations.
Eigen::MatrixXd activate_grad(const Eigen::MatrixXd& z, Activation a) {
  if (a == Activation::relu) return (z.array() > 0.0).cast<double>().matrix();
  return (1.0 - z.array().tanh().square()).matrix();
}

Eigen::MatrixXd orthogonal(int rows, int cols, double gain, std::mt19937_64& rng) {
  const int big = std::max(rows, cols);
  const int small = std::min(rows, cols);
  Eigen::MatrixXd a(big, small);
  for (int c = 0; c < small; ++c) {
    for (int r = 0; r < big; ++r) a(r, c) = std::normal_distribution<double>{}(rng);
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(big, small);
  const Eigen::MatrixXd r = qr.matrixQR().topRows(small).triangularView<Eigen::Upper>();
  for (int c = 0; c < small; ++c) {
    if (r(c, c) < 0.0) q.col(c) *= -1.0;
  }
  Eigen::MatrixXd w = rows >= cols ? q : Eigen::MatrixXd(q.transpose());
  return gain * w;
}

}  // namespace

Eigen::Index Mlp::num_parameters() const {
  Eigen::Index n = 0;
  for (const auto& l : layers) n += l.weight.size() + l.bias.size();
  return n;
}

Eigen::MatrixXd forward(const Mlp& net, const Eigen::MatrixXd& x) {
  Eigen::MatrixXd h = x;
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    Eigen::MatrixXd z = net.layers[i].weight * h;
    z.colwise() += net.layers[i].bias;
    h = i + 1 < net.layers.size() ? activate(z, net.activation) : std::move(z);
  }
  return h;
}

Eigen::MatrixXd forward(const Mlp& net, const Eigen::MatrixXd& x, MlpTape& tape) {
  tape.inputs.clear();
  tape.preacts.clear();
  Eigen::MatrixXd h = x;
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    tape.inputs.push_back(h);
    Eigen::MatrixXd z = net.layers[i].weight * h;
    z.colwise() += net.layers[i].bias;
    tape.preacts.push_back(z);
    h = i + 1 < net.layers.size() ? activate(z, net.activation) : std::move(z);
  }
  return h;
}

Mlp backward(const Mlp& net, const MlpTape& tape, const Eigen::MatrixXd& grad_output) {
  Mlp grad = net;
  Eigen::MatrixXd delta = grad_output;
  for (std::size_t k = net.layers.size(); k-- > 0;) {
    if (k + 1 < net.layers.size()) delta = delta.cwiseProduct(activate_grad(tape.preacts[k], net.activation));
    grad.layers[k].weight.noalias() = delta * tape.inputs[k].transpose();
    grad.layers[k].bias = delta.rowwise().sum();
    if (k > 0) delta = net.layers[k].weight.transpose() * delta;
  }
  return grad;
}

Mlp make_mlp(const std::vector<int>& sizes, Activation activation, double output_scale, std::mt19937_64& rng) {
  if (sizes.size() < 2) throw ConfigError("mlp: need at least input and output sizes");
  for (int s : sizes) {
    if (s <= 0) throw ConfigError("mlp: layer sizes must be positive");
  }
  const double gain = activation == Activation::relu ? std::sqrt(2.0) : 5.0 / 3.0;
  Mlp net;
  net.activation = activation;
  for (std::size_t i = 0; i + 1 < sizes.size(); ++i) {
    const bool last = i + 2 == sizes.size();
    DenseLayer layer;
    layer.weight = orthogonal(sizes[i + 1], sizes[i], last ? output_scale : gain, rng);
    layer.bias = Eigen::VectorXd::Zero(sizes[i + 1]);
    net.layers.push_back(std::move(layer));
  }
  return net;
}

Eigen::VectorXd flatten(const Mlp& net) {
  Eigen::VectorXd out(net.num_parameters());
  Eigen::Index k = 0;
  for (const auto& l : net.layers) {
    out.segment(k, l.weight.size()) = l.weight.reshaped();
    k += l.weight.size();
    out.segment(k, l.bias.size()) = l.bias;
    k += l.bias.size();
  }
  return out;
}

void unflatten(Mlp& net, const Eigen::VectorXd& params) {
  if (params.size() != net.num_parameters()) throw ContractError("unflatten: parameter count mismatch");
  Eigen::Index k = 0;
  for (auto& l : net.layers) {
    l.weight.reshaped() = params.segment(k, l.weight.size());
    k += l.weight.size();
    l.bias = params.segment(k, l.bias.size());
    k += l.bias.size();
  }
}

std::string to_string(Activation a) { return a == Activation::relu ? "relu" : "tanh"; }

Activation activation_from_string(const std::string& s) {
  if (s == "relu") return Activation::relu;
  if (s == "tanh") return Activation::tanh;
  throw ConfigError("activation: expected relu or tanh, got '" + s + "'");
}

Json to_json(const Mlp& net) {
  Json j;
  j["activation"] = to_string(net.activation);
  Json layers = Json::array();
  for (const auto& l : net.layers) {
    layers.push_back({{"weight", to_json(l.weight)}, {"bias", to_json(l.bias)}});
  }
  j["layers"] = std::move(layers);
  return j;
}

Mlp mlp_from_json(const Json& j) {
  Mlp net;
  net.activation = activation_from_string(j.at("activation").get<std::string>());
  for (const auto& l : j.at("layers")) {
    DenseLayer layer;
    layer.weight = matrix_from_json(l.at("weight"), "layer.weight");
    layer.bias = vector_from_json(l.at("bias"), "layer.bias");
    if (layer.bias.size() != layer.weight.rows()) throw ParseError("mlp: bias size does not match weight rows");
    if (!net.layers.empty() && net.layers.back().weight.rows() != layer.weight.cols()) {
      throw ParseError("mlp: inconsistent layer shapes");
    }
    net.layers.push_back(std::move(layer));
  }
  if (net.layers.empty()) throw ParseError("mlp: no layers");
  return net;
}

}  // namespace signmimic
