#pragma once

#include <Eigen/Dense>
#include <random>
#include <string>
#include <vector>

#include "signmimic/io.hpp"

namespace signmimic {

enum class Activation { relu, tanh };

struct DenseLayer {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;
};

/// Fully connected network with a linear output layer. Samples are columns.
struct Mlp {
  std::vector<DenseLayer> layers;
  Activation activation = Activation::relu;

  int input_size() const { return static_cast<int>(layers.front().weight.cols()); }
  int output_size() const { return static_cast<int>(layers.back().weight.rows()); }
  Eigen::Index num_parameters() const;
};

/// Cached intermediate values of a forward pass, consumed by backward().
struct MlpTape {
  std::vector<Eigen::MatrixXd> inputs;  // input of every layer
  std::vector<Eigen::MatrixXd> preacts;
};

Eigen::MatrixXd forward(const Mlp& net, const Eigen::MatrixXd& x);
Eigen::MatrixXd forward(const Mlp& net, const Eigen::MatrixXd& x, MlpTape& tape);

/// Gradient of a scalar loss with respect to the parameters, given its
/// gradient with respect to the network output. Returned with the network's
/// shape (weight/bias slots hold derivatives).
Mlp backward(const Mlp& net, const MlpTape& tape, const Eigen::MatrixXd& grad_output);

/// Orthogonal initialization: hidden layers scaled by the activation gain,
/// the output layer by `output_scale`. Biases start at zero.
Mlp make_mlp(const std::vector<int>& sizes, Activation activation, double output_scale, std::mt19937_64& rng);

Eigen::VectorXd flatten(const Mlp& net);
void unflatten(Mlp& net, const Eigen::VectorXd& params);

Json to_json(const Mlp& net);
Mlp mlp_from_json(const Json& j);

std::string to_string(Activation a);
Activation activation_from_string(const std::string& s);

}  // namespace signmimic
