#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "sagin/random.hpp"

namespace sagin {

/// Fully connected network with ReLU hidden layers and a linear output
/// layer; one output per action.
class ValueNet {
 public:
  struct Layer {
    Eigen::MatrixXd weights;  // out x in
    Eigen::VectorXd bias;     // out
  };

  struct Gradients {
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::VectorXd> bias;

    [[nodiscard]] double norm() const;
    void scale(double factor);
  };

  ValueNet() = default;
  /// Weights and biases uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)].
  ValueNet(std::vector<int> layer_sizes, Rng& rng);
  static ValueNet zeros(std::vector<int> layer_sizes);

  [[nodiscard]] Eigen::VectorXd forward(std::span<const double> observation) const;
  /// Columns of `inputs` are observations; returns one column of action values per input.
  [[nodiscard]] Eigen::MatrixXd forward_batch(const Eigen::MatrixXd& inputs) const;

  /// Mean over the batch of (Q(s_k, a_k) - y_k)^2 and its gradient.
  double loss_and_gradients(const Eigen::MatrixXd& inputs, std::span<const int> actions,
                            const Eigen::VectorXd& targets, Gradients& grads) const;

  [[nodiscard]] int input_size() const { return sizes_.empty() ? 0 : sizes_.front(); }
  [[nodiscard]] int output_size() const { return sizes_.empty() ? 0 : sizes_.back(); }
  [[nodiscard]] const std::vector<int>& layer_sizes() const { return sizes_; }
  [[nodiscard]] std::vector<Layer>& layers() { return layers_; }
  [[nodiscard]] const std::vector<Layer>& layers() const { return layers_; }
  [[nodiscard]] std::size_t parameter_count() const;
  [[nodiscard]] std::vector<double> flat_parameters() const;
  void set_flat_parameters(std::span<const double> params);
  [[nodiscard]] bool all_finite() const;

  /// Text checkpoint: header "SAGIN-QNET 1", the layer sizes, every layer's
  /// row-major weights, then every layer's biases.
  void save(std::ostream& out) const;
  static ValueNet load(std::istream& in);
  void save(const std::string& path) const;
  static ValueNet load(const std::string& path);

  friend bool operator==(const ValueNet& a, const ValueNet& b);

 private:
  explicit ValueNet(std::vector<int> layer_sizes);

  std::vector<int> sizes_;
  std::vector<Layer> layers_;
};

class AdamOptimizer {
 public:
  AdamOptimizer() = default;
  explicit AdamOptimizer(const ValueNet& net, double beta1 = 0.9, double beta2 = 0.999, double epsilon = 1e-8);

  void apply(ValueNet& net, const ValueNet::Gradients& grads, double learning_rate);

 private:
  double beta1_ = 0.9;
  double beta2_ = 0.999;
  double epsilon_ = 1e-8;
  long step_ = 0;
  ValueNet::Gradients m_;
  ValueNet::Gradients v_;
};

}  // namespace sagin
