#include "xmv/head.hpp"

#include <cmath>
#include <unordered_map>

#include "xmv/error.hpp"
#include "xmv/parallel.hpp"

namespace xmv {

namespace {

template <typename T>
std::vector<double> affine_impl(std::size_t d_out, std::size_t d_in,
                                std::span<const double> params, std::span<const T> x) {
  if (x.size() != d_in) {
    throw DimensionError("head expects input of dimension " + std::to_string(d_in) + ", got " +
                         std::to_string(x.size()));
  }
  std::vector<double> wide(x.begin(), x.end());
  std::vector<double> y(d_out);
  for (std::size_t r = 0; r < d_out; ++r) {
    y[r] = dot(params.subspan(r * d_in, d_in), wide) + params[d_out * d_in + r];
  }
  return y;
}

}  // namespace

EmbeddingHead::EmbeddingHead(std::size_t d_out, std::size_t d_in)
    : d_out_(d_out), d_in_(d_in), params_(d_out * d_in + d_out, 0.0) {
  if (d_out == 0 || d_in == 0) throw ConfigError("head dimensions must be positive");
}

EmbeddingHead EmbeddingHead::identity(std::size_t dim) {
  EmbeddingHead h(dim, dim);
  for (std::size_t i = 0; i < dim; ++i) h.weight(i, i) = 1.0;
  return h;
}

EmbeddingHead EmbeddingHead::initialize(std::size_t d_out, std::size_t d_in, Rng& rng) {
  if (d_out == d_in) return identity(d_in);
  constexpr double kSigma = 0.01;
  EmbeddingHead h(d_out, d_in);
  for (std::size_t r = 0; r < d_out; ++r) {
    for (std::size_t c = 0; c < d_in; ++c) {
      double z;
      do {
        z = rng.normal();
      } while (std::abs(z) > 2.0);
      h.weight(r, c) = (r == c ? 1.0 : 0.0) + kSigma * z;
    }
  }
  return h;
}

std::vector<double> EmbeddingHead::affine(std::span<const float> x) const {
  return affine_impl(d_out_, d_in_, params_, x);
}

std::vector<double> EmbeddingHead::affine(std::span<const double> x) const {
  return affine_impl(d_out_, d_in_, params_, x);
}

Embedding forward(const EmbeddingHead& head, std::span<const float> x) {
  return l2_normalize(std::span<const double>(head.affine(x)));
}

Embedding forward(const EmbeddingHead& head, std::span<const double> x) {
  return l2_normalize(std::span<const double>(head.affine(x)));
}

std::vector<Embedding> forward_all(const EmbeddingHead& head,
                                   const std::vector<std::span<const float>>& inputs,
                                   unsigned threads) {
  std::vector<Embedding> out(inputs.size());
  parallel_for(inputs.size(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) out[i] = forward(head, inputs[i]);
  });
  return out;
}

LossGradient loss_and_gradient(const EmbeddingHead& head,
                               std::span<const TripletFeatures> triplets, double margin) {
  if (triplets.empty()) throw EmptyInputError("loss_and_gradient needs at least one triplet");
  const std::size_t d_out = head.d_out();
  const std::size_t d_in = head.d_in();

  // Distinct inputs, keyed by buffer address.
  struct Node {
    std::span<const float> x;
    std::vector<double> z;      // normalized output
    double norm = 0.0;          // ‖W·x + b‖
    std::vector<double> grad_z; // dL/dz, accumulated
  };
  std::vector<Node> nodes;
  std::unordered_map<const float*, std::size_t> slot_of;
  auto slot = [&](std::span<const float> x) {
    auto [it, inserted] = slot_of.try_emplace(x.data(), nodes.size());
    if (inserted) {
      Node n;
      n.x = x;
      auto y = head.affine(x);
      double sq = 0.0;
      for (double v : y) sq += v * v;
      n.norm = std::sqrt(sq);
      if (!(n.norm > 0.0) || !std::isfinite(n.norm)) {
        throw NormalizationError("head output has zero or non-finite norm");
      }
      for (double& v : y) v /= n.norm;
      n.z = std::move(y);
      n.grad_z.assign(d_out, 0.0);
      nodes.push_back(std::move(n));
    } else if (nodes[it->second].x.size() != x.size()) {
      throw DimensionError("same buffer passed with different lengths");
    }
    return it->second;
  };

  const double scale = 1.0 / static_cast<double>(triplets.size());
  LossGradient out;
  for (const auto& t : triplets) {
    const std::size_t ia = slot(t.anchor);
    const std::size_t ip = slot(t.positive);
    const std::size_t in = slot(t.negative);
    const auto& za = nodes[ia].z;
    const auto& zp = nodes[ip].z;
    const auto& zn = nodes[in].z;
    const double d_ap = squared_distance(za, zp);
    const double d_an = squared_distance(za, zn);
    const double hinge = d_ap - d_an + margin;
    if (hinge <= 0.0) continue;
    out.loss += hinge * scale;
    // dL/dza = 2(zn − zp), dL/dzp = −2(za − zp), dL/dzn = 2(za − zn)
    for (std::size_t k = 0; k < d_out; ++k) {
      nodes[ia].grad_z[k] += scale * 2.0 * (zn[k] - zp[k]);
      nodes[ip].grad_z[k] += scale * -2.0 * (za[k] - zp[k]);
      nodes[in].grad_z[k] += scale * 2.0 * (za[k] - zn[k]);
    }
  }

  out.grad.assign(head.num_params(), 0.0);
  std::vector<double> grad_y(d_out);
  for (const auto& n : nodes) {
    double zg = 0.0;
    bool any = false;
    for (std::size_t k = 0; k < d_out; ++k) {
      zg += n.z[k] * n.grad_z[k];
      any = any || n.grad_z[k] != 0.0;
    }
    if (!any) continue;
    for (std::size_t k = 0; k < d_out; ++k) grad_y[k] = (n.grad_z[k] - n.z[k] * zg) / n.norm;
    for (std::size_t r = 0; r < d_out; ++r) {
      const double gy = grad_y[r];
      double* row = out.grad.data() + r * d_in;
      for (std::size_t c = 0; c < d_in; ++c) row[c] += gy * static_cast<double>(n.x[c]);
      out.grad[d_out * d_in + r] += gy;
    }
  }
  return out;
}

void sgd_momentum_step(std::span<double> params, std::span<const double> grads,
                       std::span<double> velocity, double lr, double momentum) {
  if (params.size() != grads.size() || params.size() != velocity.size()) {
    throw DimensionError("parameter, gradient and velocity buffers differ in length");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    velocity[i] = momentum * velocity[i] - lr * grads[i];
    params[i] += velocity[i];
  }
}

}  // namespace xmv
