#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "xmv/embedding.hpp"
#include "xmv/rng.hpp"

namespace xmv {

// Trainable affine map followed by length normalization:
//   forward(x) = normalize(W·x + b),  W is d_out × d_in.
// Parameters live in one flat buffer, W row-major then b, which is also
// the order used by gradients, optimizer state and checkpoints.
class EmbeddingHead {
 public:
  EmbeddingHead() = default;
  EmbeddingHead(std::size_t d_out, std::size_t d_in);  // all zeros

  static EmbeddingHead identity(std::size_t dim);

  // Identity when d_out == d_in; otherwise an identity block plus
  // truncated-Gaussian noise (σ = 0.01, cut at 2σ). Bias starts at zero.
  static EmbeddingHead initialize(std::size_t d_out, std::size_t d_in, Rng& rng);

  std::size_t d_out() const noexcept { return d_out_; }
  std::size_t d_in() const noexcept { return d_in_; }
  std::size_t num_params() const noexcept { return params_.size(); }

  double weight(std::size_t row, std::size_t col) const { return params_[row * d_in_ + col]; }
  double& weight(std::size_t row, std::size_t col) { return params_[row * d_in_ + col]; }
  double bias(std::size_t row) const { return params_[d_out_ * d_in_ + row]; }
  double& bias(std::size_t row) { return params_[d_out_ * d_in_ + row]; }

  std::span<const double> params() const noexcept { return params_; }
  std::span<double> params() noexcept { return params_; }

  // W·x + b before normalization. Throws DimensionError if dim(x) != d_in.
  std::vector<double> affine(std::span<const float> x) const;
  std::vector<double> affine(std::span<const double> x) const;

  friend bool operator==(const EmbeddingHead&, const EmbeddingHead&) = default;

 private:
  std::size_t d_out_ = 0;
  std::size_t d_in_ = 0;
  std::vector<double> params_;
};

// Throws NormalizationError when W·x + b is the zero vector.
Embedding forward(const EmbeddingHead& head, std::span<const float> x);
Embedding forward(const EmbeddingHead& head, std::span<const double> x);

// Embeds many inputs; rows are split across `threads` workers.
std::vector<Embedding> forward_all(const EmbeddingHead& head,
                                   const std::vector<std::span<const float>>& inputs,
                                   unsigned threads = 1);

struct TripletFeatures {
  std::span<const float> anchor;
  std::span<const float> positive;
  std::span<const float> negative;
};

struct LossGradient {
  double loss = 0.0;
  std::vector<double> grad;  // same layout as EmbeddingHead::params()
};

// Mean triplet loss over the list and its exact gradient. Backpropagation
// goes through the normalization, whose Jacobian at z = y/‖y‖ is
// (I − z zᵀ)/‖y‖. Inputs that appear in several triplets (same underlying
// buffer) are embedded once. Throws EmptyInputError for an empty list.
LossGradient loss_and_gradient(const EmbeddingHead& head,
                               std::span<const TripletFeatures> triplets, double margin);

// Classical momentum: v ← momentum·v − lr·g, θ ← θ + v.
// Throws DimensionError if the three buffers differ in length.
void sgd_momentum_step(std::span<double> params, std::span<const double> grads,
                       std::span<double> velocity, double lr, double momentum);

}  // namespace xmv
