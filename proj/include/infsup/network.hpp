#ifndef INFSUP_NETWORK_HPP
#define INFSUP_NETWORK_HPP

#include <Eigen/Core>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "infsup/errors.hpp"
#include "infsup/jet.hpp"
#include "infsup/rng.hpp"

namespace infsup {

using RowMajorMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Feedforward tanh network mapping R^d -> R: affine layers with tanh
/// between them and a linear (activation-free) output layer, so outputs
/// are not confined to [-1, 1].
///
/// All parameters live in one flat vector, ordered layer by layer as the
/// row-major weight matrix followed by the bias vector. That order is the
/// external contract for checkpoints and optimizer state.
class MlpNet {
 public:
  MlpNet() = default;

  /// Zero-initialized network. Requires at least one affine layer and a
  /// scalar output.
  explicit MlpNet(std::vector<int> layer_sizes)
      : layer_sizes_(std::move(layer_sizes)) {
    validate_sizes(layer_sizes_);
    offsets_.reserve(num_layers());
    int off = 0;
    for (int k = 0; k < num_layers(); ++k) {
      const int rows = layer_sizes_[k + 1], cols = layer_sizes_[k];
      offsets_.push_back({off, off + rows * cols});
      off += rows * cols + rows;
    }
    params_ = Eigen::VectorXd::Zero(off);
  }

  const std::vector<int>& layer_sizes() const { return layer_sizes_; }
  int input_dim() const { return layer_sizes_.front(); }
  int num_layers() const { return static_cast<int>(layer_sizes_.size()) - 1; }
  int num_params() const { return static_cast<int>(params_.size()); }

  const Eigen::VectorXd& params() const { return params_; }

  void set_params(const Eigen::Ref<const Eigen::VectorXd>& p) {
    if (p.size() != params_.size())
      throw DimensionError("MlpNet::set_params: wrong parameter count");
    params_ = p;
  }

  Eigen::VectorXd& mutable_params() { return params_; }

  Eigen::Map<const RowMajorMatrix> weight(int k) const {
    return {params_.data() + offsets_[k].first, layer_sizes_[k + 1],
            layer_sizes_[k]};
  }
  Eigen::Map<RowMajorMatrix> weight(int k) {
    return {params_.data() + offsets_[k].first, layer_sizes_[k + 1],
            layer_sizes_[k]};
  }
  Eigen::Map<const Eigen::VectorXd> bias(int k) const {
    return {params_.data() + offsets_[k].second, layer_sizes_[k + 1]};
  }
  Eigen::Map<Eigen::VectorXd> bias(int k) {
    return {params_.data() + offsets_[k].second, layer_sizes_[k + 1]};
  }

  // Offsets of layer k's blocks inside the flat parameter vector.
  int weight_offset(int k) const { return offsets_[k].first; }
  int bias_offset(int k) const { return offsets_[k].second; }

  /// Plain forward pass (values only).
  double eval(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    if (x.size() != input_dim())
      throw DimensionError("MlpNet::eval: input dimension mismatch");
    Eigen::VectorXd z = x;
    for (int k = 0; k < num_layers(); ++k) {
      Eigen::VectorXd a = weight(k) * z + bias(k);
      if (k + 1 < num_layers())
        for (auto& v : a) v = tanh_value(v);
      z = std::move(a);
    }
    return z[0];
  }

  /// Forward pass carrying (value, grad, lap) through every layer.
  Jet eval_jet(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    if (x.size() != input_dim())
      throw DimensionError("MlpNet::eval_jet: input dimension mismatch");
    JetBatch z = seed_input(x);
    for (int k = 0; k < num_layers(); ++k) {
      z = affine_jet(weight(k), bias(k), z);
      if (k + 1 < num_layers())
        for (auto& j : z) j = tanh_jet(j);
    }
    return z[0];
  }

  // Field interface used by the loss assembly.
  double value_at(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    return eval(x);
  }
  Jet jet_at(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    return eval_jet(x);
  }

  /// Binary checkpoint: layer sizes then the flat parameter vector.
  /// Round-trips bit-exactly.
  void save(const std::string& path) const {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("MlpNet::save: cannot open " + path);
    const char magic[8] = {'I', 'S', 'N', 'E', 'T', '0', '1', '\0'};
    f.write(magic, sizeof(magic));
    const std::uint64_t n = layer_sizes_.size();
    f.write(reinterpret_cast<const char*>(&n), sizeof(n));
    for (int s : layer_sizes_) {
      const std::int64_t v = s;
      f.write(reinterpret_cast<const char*>(&v), sizeof(v));
    }
    f.write(reinterpret_cast<const char*>(params_.data()),
            static_cast<std::streamsize>(sizeof(double) * params_.size()));
    if (!f) throw ConfigError("MlpNet::save: write failed for " + path);
  }

  static MlpNet load(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError("MlpNet::load: cannot open " + path);
    char magic[8];
    f.read(magic, sizeof(magic));
    if (!f || std::memcmp(magic, "ISNET01", 8) != 0)
      throw ConfigError("MlpNet::load: bad checkpoint header in " + path);
    std::uint64_t n = 0;
    f.read(reinterpret_cast<char*>(&n), sizeof(n));
    if (!f || n < 2 || n > 1024)
      throw ConfigError("MlpNet::load: corrupt layer count in " + path);
    std::vector<int> sizes(n);
    for (auto& s : sizes) {
      std::int64_t v = 0;
      f.read(reinterpret_cast<char*>(&v), sizeof(v));
      s = static_cast<int>(v);
    }
    MlpNet net(sizes);
    f.read(reinterpret_cast<char*>(net.params_.data()),
           static_cast<std::streamsize>(sizeof(double) * net.params_.size()));
    if (!f) throw ConfigError("MlpNet::load: truncated checkpoint " + path);
    return net;
  }

 private:
  static void validate_sizes(const std::vector<int>& sizes) {
    if (sizes.size() < 2)
      throw DimensionError("MlpNet: need at least one affine layer");
    for (int s : sizes)
      if (s < 1) throw DimensionError("MlpNet: layer sizes must be positive");
    if (sizes.back() != 1)
      throw DimensionError("MlpNet: output dimension must be 1");
  }

  std::vector<int> layer_sizes_;
  std::vector<std::pair<int, int>> offsets_;  // (weight, bias) starts per layer
  Eigen::VectorXd params_;
};

/// Xavier-uniform weights (+-sqrt(6/(fan_in+fan_out))), zero biases.
/// Deterministic for a given seed; requires at least one hidden layer.
inline MlpNet init_xavier(const std::vector<int>& layer_sizes,
                          std::uint64_t seed) {
  if (layer_sizes.size() < 3)
    throw DimensionError("init_xavier: need at least one hidden layer");
  MlpNet net(layer_sizes);
  SplitRng rng = SplitRng(seed).split(0x1417u);
  for (int k = 0; k < net.num_layers(); ++k) {
    const double bound =
        std::sqrt(6.0 / (layer_sizes[k] + layer_sizes[k + 1]));
    auto w = net.weight(k);
    for (int i = 0; i < w.rows(); ++i)
      for (int j = 0; j < w.cols(); ++j) w(i, j) = rng.uniform(-bound, bound);
  }
  return net;
}

}  // namespace infsup

#endif  // INFSUP_NETWORK_HPP
