#pragma once

#include <span>
#include <string>
#include <vector>

#include "qgnn/types.hpp"

namespace qgnn {

enum class Activation { kRelu, kLeakyRelu, kIdentity };

struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<Real> a;  // row major

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c, 0.0) {}

  Real& at(std::size_t r, std::size_t c) { return a[r * cols + c]; }
  Real at(std::size_t r, std::size_t c) const { return a[r * cols + c]; }

  // y = W x
  void apply(std::span<const Real> x, std::span<Real> y) const;
};

// Fixed-weight model description. dims chains feature_dim through hidden
// sizes to the output size (dims.size() == layers + 1). GraphSAGE consumes
// the concatenation [x_v, AVG(...)], so its matrices are rows x (2*cols).
// GIN layer k applies W2 * act(W1 * z) with W1: dims[k+1] x dims[k] and
// W2: dims[k+1] x dims[k+1].
struct ModelSpec {
  ModelClass cls = ModelClass::kVanilla;
  std::size_t layers = 1;
  std::vector<std::size_t> dims;
  std::vector<Matrix> weights;                    // all classes except gin
  std::vector<std::pair<Matrix, Matrix>> mlp;     // gin
  Activation hidden_activation = Activation::kRelu;
  double leaky_slope = 0.01;
  Activation output_activation = Activation::kIdentity;
  Aggregator aggregator = Aggregator::kSum;       // vanilla only
  double gin_gamma = 0.0;
  std::uint64_t seed = 0;

  std::size_t input_dim() const { return dims.front(); }
  std::size_t output_dim() const { return dims.back(); }
  Activation activation_at(std::size_t layer) const {
    return layer + 1 == layers ? output_activation : hidden_activation;
  }
  Real activate(Real z, Activation act) const {
    switch (act) {
      case Activation::kRelu: return z > 0 ? z : 0.0;
      case Activation::kLeakyRelu: return z > 0 ? z : leaky_slope * z;
      case Activation::kIdentity: return z;
    }
    return z;
  }

  void validate() const;
};

// Reproducible pseudo-random weights in [-1, 1]; identical across platforms.
ModelSpec generate_model(ModelClass cls, std::size_t layers, std::span<const std::size_t> dims,
                         std::uint64_t seed, Aggregator agg = Aggregator::kSum,
                         double gin_gamma = 0.0);

void save_model(const ModelSpec& m, const std::string& path);
ModelSpec load_model(const std::string& path);

}  // namespace qgnn
