#include "xmv/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "xmv/error.hpp"
#include "xmv/parallel.hpp"

namespace xmv {

namespace {

void require_same_dim(std::size_t a, std::size_t b) {
  if (a != b) {
    throw DimensionError("dimension mismatch: " + std::to_string(a) + " vs " +
                         std::to_string(b));
  }
}

}  // namespace

Embedding Embedding::from_unit(std::vector<double> values) {
  double sq = 0.0;
  for (double x : values) {
    if (!std::isfinite(x)) throw NormalizationError("non-finite embedding entry");
    sq += x * x;
  }
  if (std::abs(std::sqrt(sq) - 1.0) > kUnitTolerance) {
    throw NormalizationError("embedding is not unit length (norm " +
                             std::to_string(std::sqrt(sq)) + ")");
  }
  return Embedding(std::move(values));
}

Embedding l2_normalize(std::span<const double> v) {
  double sq = 0.0;
  for (double x : v) {
    if (!std::isfinite(x)) throw NormalizationError("non-finite input to l2_normalize");
    sq += x * x;
  }
  const double norm = std::sqrt(sq);
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw NormalizationError("cannot normalize a zero-norm vector");
  }
  std::vector<double> out(v.size());
  std::transform(v.begin(), v.end(), out.begin(), [norm](double x) { return x / norm; });
  return Embedding(std::move(out));
}

Embedding l2_normalize(std::span<const float> v) {
  std::vector<double> wide(v.begin(), v.end());
  return l2_normalize(std::span<const double>(wide));
}

// Four independent partial sums; the summation order is fixed, which is what
// makes the score matrix independent of how rows are scheduled.
double dot(std::span<const double> a, std::span<const double> b) {
  require_same_dim(a.size(), b.size());
  const std::size_t n = a.size();
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += a[i] * b[i];
    s1 += a[i + 1] * b[i + 1];
    s2 += a[i + 2] * b[i + 2];
    s3 += a[i + 3] * b[i + 3];
  }
  for (; i < n; ++i) s0 += a[i] * b[i];
  return (s0 + s1) + (s2 + s3);
}

double cosine_similarity(const Embedding& a, const Embedding& b) {
  require_same_dim(a.dim(), b.dim());
  return std::clamp(dot(a.values(), b.values()), -1.0, 1.0);
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  require_same_dim(a.size(), b.size());
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

double squared_distance(const Embedding& a, const Embedding& b) {
  return squared_distance(a.values(), b.values());
}

ScoreMatrix cross_modal_scores(std::span<const Embedding> docs,
                               std::span<const Embedding> selfies, unsigned threads) {
  if (docs.empty() || selfies.empty()) {
    throw EmptyInputError("cross_modal_scores needs at least one document and one selfie");
  }
  const std::size_t dim = docs.front().dim();
  for (const auto& e : docs) require_same_dim(dim, e.dim());
  for (const auto& e : selfies) require_same_dim(dim, e.dim());

  // Pack documents contiguously so the inner loop streams one buffer.
  std::vector<double> packed(docs.size() * dim);
  for (std::size_t j = 0; j < docs.size(); ++j) {
    std::copy(docs[j].values().begin(), docs[j].values().end(),
              packed.begin() + static_cast<std::ptrdiff_t>(j * dim));
  }

  ScoreMatrix out(selfies.size(), docs.size());
  constexpr std::size_t kColBlock = 64;
  parallel_for(selfies.size(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t c0 = 0; c0 < docs.size(); c0 += kColBlock) {
      const std::size_t c1 = std::min(docs.size(), c0 + kColBlock);
      for (std::size_t i = begin; i < end; ++i) {
        const auto s = selfies[i].values();
        for (std::size_t j = c0; j < c1; ++j) {
          const std::span<const double> d(packed.data() + j * dim, dim);
          out(i, j) = std::clamp(dot(s, d), -1.0, 1.0);
        }
      }
    }
  });
  return out;
}

}  // namespace xmv
