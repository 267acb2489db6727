#include "sagin/nn.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <stdexcept>
#include <string>

namespace sagin {

namespace {

constexpr const char* kCheckpointMagic = "SAGIN-QNET";
constexpr int kCheckpointVersion = 1;

}  // namespace

double ValueNet::Gradients::norm() const {
  double sq = 0.0;
  for (const auto& w : weights) sq += w.squaredNorm();
  for (const auto& b : bias) sq += b.squaredNorm();
  return std::sqrt(sq);
}

void ValueNet::Gradients::scale(double factor) {
  for (auto& w : weights) w *= factor;
  for (auto& b : bias) b *= factor;
}

ValueNet::ValueNet(std::vector<int> layer_sizes) : sizes_(std::move(layer_sizes)) {
  if (sizes_.size() < 2) throw std::invalid_argument("a network needs at least input and output sizes");
  for (int s : sizes_)
    if (s < 1) throw std::invalid_argument("layer sizes must be positive");
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l)
    layers_.push_back({Eigen::MatrixXd::Zero(sizes_[l + 1], sizes_[l]), Eigen::VectorXd::Zero(sizes_[l + 1])});
}

ValueNet::ValueNet(std::vector<int> layer_sizes, Rng& rng) : ValueNet(std::move(layer_sizes)) {
  for (Layer& layer : layers_) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(layer.weights.cols()));
    std::uniform_real_distribution<double> u(-bound, bound);
    for (Eigen::Index r = 0; r < layer.weights.rows(); ++r)
      for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) layer.weights(r, c) = u(rng);
    for (Eigen::Index r = 0; r < layer.bias.size(); ++r) layer.bias(r) = u(rng);
  }
}

ValueNet ValueNet::zeros(std::vector<int> layer_sizes) { return ValueNet(std::move(layer_sizes)); }

Eigen::VectorXd ValueNet::forward(std::span<const double> observation) const {
  if (static_cast<int>(observation.size()) != input_size())
    throw std::invalid_argument("observation has " + std::to_string(observation.size()) + " entries, network expects " +
                                std::to_string(input_size()));
  Eigen::VectorXd a = Eigen::Map<const Eigen::VectorXd>(observation.data(), static_cast<Eigen::Index>(observation.size()));
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    Eigen::VectorXd z = layers_[l].weights * a + layers_[l].bias;
    a = (l + 1 < layers_.size()) ? Eigen::VectorXd(z.cwiseMax(0.0)) : z;
  }
  return a;
}

Eigen::MatrixXd ValueNet::forward_batch(const Eigen::MatrixXd& inputs) const {
  if (inputs.rows() != input_size()) throw std::invalid_argument("batch input size does not match the network");
  Eigen::MatrixXd a = inputs;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    Eigen::MatrixXd z = layers_[l].weights * a;
    z.colwise() += layers_[l].bias;
    a = (l + 1 < layers_.size()) ? Eigen::MatrixXd(z.cwiseMax(0.0)) : z;
  }
  return a;
}

double ValueNet::loss_and_gradients(const Eigen::MatrixXd& inputs, std::span<const int> actions,
                                    const Eigen::VectorXd& targets, Gradients& grads) const {
  const Eigen::Index batch = inputs.cols();
  if (batch == 0) throw std::invalid_argument("empty batch");
  if (static_cast<Eigen::Index>(actions.size()) != batch || targets.size() != batch)
    throw std::invalid_argument("batch, action and target sizes differ");
  if (inputs.rows() != input_size()) throw std::invalid_argument("batch input size does not match the network");

  // Forward pass keeping every activation.
  std::vector<Eigen::MatrixXd> acts;
  acts.reserve(layers_.size() + 1);
  acts.push_back(inputs);
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    Eigen::MatrixXd z = layers_[l].weights * acts.back();
    z.colwise() += layers_[l].bias;
    if (l + 1 < layers_.size()) z = z.cwiseMax(0.0);
    acts.push_back(std::move(z));
  }

  const Eigen::MatrixXd& q = acts.back();
  Eigen::MatrixXd delta = Eigen::MatrixXd::Zero(q.rows(), batch);
  double loss = 0.0;
  for (Eigen::Index k = 0; k < batch; ++k) {
    const int a = actions[static_cast<std::size_t>(k)];
    if (a < 0 || a >= q.rows()) throw std::out_of_range("action index outside the output layer");
    const double err = q(a, k) - targets(k);
    loss += err * err;
    delta(a, k) = 2.0 * err / static_cast<double>(batch);
  }
  loss /= static_cast<double>(batch);

  grads.weights.resize(layers_.size());
  grads.bias.resize(layers_.size());
  for (std::size_t l = layers_.size(); l-- > 0;) {
    grads.weights[l] = delta * acts[l].transpose();
    grads.bias[l] = delta.rowwise().sum();
    if (l == 0) break;
    Eigen::MatrixXd back = layers_[l].weights.transpose() * delta;
    // ReLU derivative from the post-activation values.
    delta = back.cwiseProduct((acts[l].array() > 0.0).cast<double>().matrix());
  }
  return loss;
}

std::size_t ValueNet::parameter_count() const {
  std::size_t n = 0;
  for (const Layer& layer : layers_) n += static_cast<std::size_t>(layer.weights.size() + layer.bias.size());
  return n;
}

std::vector<double> ValueNet::flat_parameters() const {
  std::vector<double> out;
  out.reserve(parameter_count());
  for (const Layer& layer : layers_) {
    for (Eigen::Index r = 0; r < layer.weights.rows(); ++r)
      for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) out.push_back(layer.weights(r, c));
    for (Eigen::Index r = 0; r < layer.bias.size(); ++r) out.push_back(layer.bias(r));
  }
  return out;
}

void ValueNet::set_flat_parameters(std::span<const double> params) {
  if (params.size() != parameter_count()) throw std::invalid_argument("parameter vector length mismatch");
  std::size_t k = 0;
  for (Layer& layer : layers_) {
    for (Eigen::Index r = 0; r < layer.weights.rows(); ++r)
      for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) layer.weights(r, c) = params[k++];
    for (Eigen::Index r = 0; r < layer.bias.size(); ++r) layer.bias(r) = params[k++];
  }
}

bool ValueNet::all_finite() const {
  for (const Layer& layer : layers_)
    if (!layer.weights.allFinite() || !layer.bias.allFinite()) return false;
  return true;
}

bool operator==(const ValueNet& a, const ValueNet& b) {
  if (a.sizes_ != b.sizes_) return false;
  for (std::size_t l = 0; l < a.layers_.size(); ++l) {
    if (a.layers_[l].weights != b.layers_[l].weights || a.layers_[l].bias != b.layers_[l].bias) return false;
  }
  return true;
}

void ValueNet::save(std::ostream& out) const {
  out << kCheckpointMagic << ' ' << kCheckpointVersion << '\n';
  out << sizes_.size();
  for (int s : sizes_) out << ' ' << s;
  out << '\n' << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (const Layer& layer : layers_) {
    for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) out << (c ? " " : "") << layer.weights(r, c);
      out << '\n';
    }
  }
  for (const Layer& layer : layers_) {
    for (Eigen::Index r = 0; r < layer.bias.size(); ++r) out << (r ? " " : "") << layer.bias(r);
    out << '\n';
  }
}

ValueNet ValueNet::load(std::istream& in) {
  std::string magic;
  int version = 0;
  in >> magic >> version;
  if (!in || magic != kCheckpointMagic) throw std::runtime_error("not a value-network checkpoint");
  if (version != kCheckpointVersion)
    throw std::runtime_error("unsupported checkpoint version " + std::to_string(version));
  std::size_t count = 0;
  in >> count;
  std::vector<int> sizes(count);
  for (int& s : sizes) in >> s;
  if (!in) throw std::runtime_error("truncated checkpoint header");
  ValueNet net(sizes);
  for (Layer& layer : net.layers_)
    for (Eigen::Index r = 0; r < layer.weights.rows(); ++r)
      for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) in >> layer.weights(r, c);
  for (Layer& layer : net.layers_)
    for (Eigen::Index r = 0; r < layer.bias.size(); ++r) in >> layer.bias(r);
  if (!in) throw std::runtime_error("truncated checkpoint body");
  return net;
}

void ValueNet::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  save(out);
}

ValueNet ValueNet::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  return load(in);
}

AdamOptimizer::AdamOptimizer(const ValueNet& net, double beta1, double beta2, double epsilon)
    : beta1_(beta1), beta2_(beta2), epsilon_(epsilon) {
  for (const auto& layer : net.layers()) {
    m_.weights.push_back(Eigen::MatrixXd::Zero(layer.weights.rows(), layer.weights.cols()));
    m_.bias.push_back(Eigen::VectorXd::Zero(layer.bias.size()));
  }
  v_ = m_;
}

void AdamOptimizer::apply(ValueNet& net, const ValueNet::Gradients& grads, double learning_rate) {
  ++step_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(step_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(step_));
  auto& layers = net.layers();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    m_.weights[l] = beta1_ * m_.weights[l] + (1.0 - beta1_) * grads.weights[l];
    v_.weights[l] = beta2_ * v_.weights[l] + (1.0 - beta2_) * grads.weights[l].cwiseAbs2();
    m_.bias[l] = beta1_ * m_.bias[l] + (1.0 - beta1_) * grads.bias[l];
    v_.bias[l] = beta2_ * v_.bias[l] + (1.0 - beta2_) * grads.bias[l].cwiseAbs2();
    if (learning_rate == 0.0) continue;
    layers[l].weights.array() -=
        learning_rate * (m_.weights[l].array() / c1) / ((v_.weights[l].array() / c2).sqrt() + epsilon_);
    layers[l].bias.array() -=
        learning_rate * (m_.bias[l].array() / c1) / ((v_.bias[l].array() / c2).sqrt() + epsilon_);
  }
}

}  // namespace sagin
