#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

namespace xmv {

// Genuine (same subject) and impostor (different subject) similarity scores.
struct ScoreSet {
  std::vector<double> authentic;
  std::vector<double> impostor;
};

// One operating point. `threshold` is +inf when nothing finite meets the
// FAR target; the accept rule throughout is `score >= threshold`.
struct EvalResult {
  double far_target = 0.0;
  double threshold = 0.0;
  double tar = 0.0;
  double achieved_far = 0.0;
};

// Fraction of `scores` at or above `threshold`.
double accept_rate(std::span<const double> scores, double threshold);

// Smallest observed impostor score t with
//   |{s in impostor : s >= t}| / |impostor| <= far_target,
// or +inf if no observed score qualifies. Ties need no special handling:
// every copy of a tied value is accepted together.
// Throws EmptyInputError for no impostors, RangeError unless 0 <= far < 1.
double threshold_at_far(std::span<const double> impostor, double far_target);

// TAR at the threshold_at_far operating point. When that threshold is +inf,
// the smallest authentic score strictly above every impostor is used
// instead (achieved FAR 0); if there is none, TAR is 0.
EvalResult tar_at_far(const ScoreSet& scores, double far_target);

struct RocPoint {
  double far = 0.0;
  double tar = 0.0;
  friend bool operator==(const RocPoint&, const RocPoint&) = default;
};

// One point per distinct observed score used as threshold, plus the
// zero-FAR point, sorted by (far, tar). Ends at (1, 1).
std::vector<RocPoint> roc_points(const ScoreSet& scores);

// |mean(auth) − mean(imp)| / sqrt((var(auth) + var(imp)) / 2) with n−1
// sample variances. Needs at least two scores per side
// (InsufficientDataError otherwise).
double d_prime(const ScoreSet& scores);

struct ScoreStats {
  static constexpr std::array<double, 5> kQuantileLevels = {0.01, 0.25, 0.50, 0.75, 0.99};

  std::size_t count = 0;
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation, 0 for a single score
  double min = 0.0;
  double max = 0.0;
  std::array<double, 5> quantiles{};
};

// Quantiles interpolate linearly between order statistics at position
// p·(n−1).
ScoreStats score_stats(std::span<const double> scores);

double quantile_sorted(std::span<const double> sorted, double p);

// Histogram with `bins` equal-width bins over [lo, hi]; values outside the
// range are clamped into the end bins.
std::vector<std::size_t> histogram(std::span<const double> scores, std::size_t bins, double lo,
                                   double hi);

// {"far_target":..,"threshold":..,"tar":..,"achieved_far":..}, "inf" for an
// infinite threshold.
std::string to_json(const EvalResult& r);

}  // namespace xmv
