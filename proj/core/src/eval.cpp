#include "xmv/eval.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

#include "xmv/error.hpp"
#include "xmv/text_format.hpp"

namespace xmv {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_far(double far_target) {
  if (!(far_target >= 0.0 && far_target < 1.0)) {
    throw RangeError("FAR target must lie in [0, 1), got " + format_double(far_target));
  }
}

// Number of elements >= t in a descending-sorted range.
std::size_t count_at_or_above(std::span<const double> desc, double t) {
  return static_cast<std::size_t>(
      std::upper_bound(desc.begin(), desc.end(), t, std::greater<>()) - desc.begin());
}

std::vector<double> sorted_desc(std::span<const double> v) {
  std::vector<double> out(v.begin(), v.end());
  std::sort(out.begin(), out.end(), std::greater<>());
  return out;
}

double mean_of(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_variance(std::span<const double> v, double mean) {
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return ss / static_cast<double>(v.size() - 1);
}

}  // namespace

double accept_rate(std::span<const double> scores, double threshold) {
  if (scores.empty()) throw EmptyInputError("accept_rate of an empty score list");
  const auto n = std::count_if(scores.begin(), scores.end(),
                               [threshold](double s) { return s >= threshold; });
  return static_cast<double>(n) / static_cast<double>(scores.size());
}

double threshold_at_far(std::span<const double> impostor, double far_target) {
  if (impostor.empty()) throw EmptyInputError("no impostor scores");
  check_far(far_target);
  const auto desc = sorted_desc(impostor);
  const double n = static_cast<double>(desc.size());

  // Walk distinct values from the top; the count at or above a value is the
  // index just past its last copy. Counts only grow as t decreases, so the
  // answer is the last value that still meets the target.
  double best = kInf;
  std::size_t i = 0;
  while (i < desc.size()) {
    std::size_t j = i;
    while (j < desc.size() && desc[j] == desc[i]) ++j;
    if (static_cast<double>(j) / n <= far_target) {
      best = desc[i];
    } else {
      break;
    }
    i = j;
  }
  return best;
}

EvalResult tar_at_far(const ScoreSet& scores, double far_target) {
  if (scores.authentic.empty()) throw EmptyInputError("no authentic scores");
  EvalResult r;
  r.far_target = far_target;
  r.threshold = threshold_at_far(scores.impostor, far_target);
  if (std::isinf(r.threshold)) {
    const double top = *std::max_element(scores.impostor.begin(), scores.impostor.end());
    double smallest_above = kInf;
    for (double a : scores.authentic) {
      if (a > top && a < smallest_above) smallest_above = a;
    }
    r.threshold = smallest_above;
  }
  if (std::isinf(r.threshold)) {
    r.tar = 0.0;
    r.achieved_far = 0.0;
    return r;
  }
  r.tar = accept_rate(scores.authentic, r.threshold);
  r.achieved_far = accept_rate(scores.impostor, r.threshold);
  return r;
}

std::vector<RocPoint> roc_points(const ScoreSet& scores) {
  if (scores.authentic.empty() || scores.impostor.empty()) {
    throw EmptyInputError("roc_points needs authentic and impostor scores");
  }
  const auto auth = sorted_desc(scores.authentic);
  const auto imp = sorted_desc(scores.impostor);
  const double na = static_cast<double>(auth.size());
  const double ni = static_cast<double>(imp.size());

  std::vector<double> thresholds;
  thresholds.reserve(auth.size() + imp.size());
  thresholds.insert(thresholds.end(), auth.begin(), auth.end());
  thresholds.insert(thresholds.end(), imp.begin(), imp.end());
  std::sort(thresholds.begin(), thresholds.end());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

  std::vector<RocPoint> points;
  points.reserve(thresholds.size() + 1);
  // Zero-FAR point: everything strictly above the top impostor.
  points.push_back({0.0, static_cast<double>(count_at_or_above(auth, std::nextafter(imp.front(), kInf))) / na});
  for (double t : thresholds) {
    points.push_back({static_cast<double>(count_at_or_above(imp, t)) / ni,
                      static_cast<double>(count_at_or_above(auth, t)) / na});
  }
  std::sort(points.begin(), points.end(), [](const RocPoint& a, const RocPoint& b) {
    return a.far != b.far ? a.far < b.far : a.tar < b.tar;
  });
  points.erase(std::unique(points.begin(), points.end()), points.end());
  return points;
}

double d_prime(const ScoreSet& scores) {
  if (scores.authentic.size() < 2 || scores.impostor.size() < 2) {
    throw InsufficientDataError("d_prime needs at least two scores on each side");
  }
  const double ma = mean_of(scores.authentic);
  const double mi = mean_of(scores.impostor);
  const double va = sample_variance(scores.authentic, ma);
  const double vi = sample_variance(scores.impostor, mi);
  const double pooled = std::sqrt((va + vi) / 2.0);
  if (pooled == 0.0) {
    if (ma == mi) return 0.0;
    return kInf;
  }
  return std::abs(ma - mi) / pooled;
}

double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw EmptyInputError("quantile of an empty list");
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

ScoreStats score_stats(std::span<const double> scores) {
  if (scores.empty()) throw EmptyInputError("score_stats of an empty list");
  std::vector<double> sorted(scores.begin(), scores.end());
  std::sort(sorted.begin(), sorted.end());
  ScoreStats st;
  st.count = sorted.size();
  st.mean = mean_of(sorted);
  st.std = sorted.size() > 1 ? std::sqrt(sample_variance(sorted, st.mean)) : 0.0;
  st.min = sorted.front();
  st.max = sorted.back();
  for (std::size_t k = 0; k < ScoreStats::kQuantileLevels.size(); ++k) {
    st.quantiles[k] = quantile_sorted(sorted, ScoreStats::kQuantileLevels[k]);
  }
  return st;
}

std::vector<std::size_t> histogram(std::span<const double> scores, std::size_t bins, double lo,
                                   double hi) {
  if (bins == 0 || !(hi > lo)) throw ConfigError("histogram needs bins > 0 and hi > lo");
  std::vector<std::size_t> counts(bins, 0);
  const double width = (hi - lo) / static_cast<double>(bins);
  for (double s : scores) {
    auto k = static_cast<long long>(std::floor((s - lo) / width));
    k = std::clamp<long long>(k, 0, static_cast<long long>(bins) - 1);
    ++counts[static_cast<std::size_t>(k)];
  }
  return counts;
}

std::string to_json(const EvalResult& r) {
  auto num = [](double x) {
    return std::isinf(x) ? std::string("\"inf\"") : format_double(x);
  };
  return "{\"far_target\":" + num(r.far_target) + ",\"threshold\":" + num(r.threshold) +
         ",\"tar\":" + num(r.tar) + ",\"achieved_far\":" + num(r.achieved_far) + "}";
}

}  // namespace xmv
