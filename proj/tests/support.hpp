#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "xmv/eval.hpp"
#include "xmv/rng.hpp"
#include "xmv/types.hpp"

namespace xmv::test {

// Scratch directory removed on scope exit.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("xmv_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline std::vector<float> random_feature(std::mt19937_64& g, std::size_t dim) {
  std::normal_distribution<float> n(0.0f, 1.0f);
  std::vector<float> v(dim);
  for (auto& x : v) x = n(g);
  return v;
}

// Subjects whose selfie is the document plus `noise`-scaled jitter.
inline PairedDataset random_dataset(std::size_t n, std::size_t dim, std::uint64_t seed,
                                    float noise = 0.5f, int doc_age = 18) {
  std::mt19937_64 g(seed);
  std::normal_distribution<float> jitter(0.0f, noise);
  std::vector<Subject> subjects;
  for (std::size_t i = 0; i < n; ++i) {
    Subject s;
    s.id = "s" + std::to_string(100000 + i);
    s.gender = i % 2 ? Gender::female : Gender::male;
    s.doc_age = doc_age;
    s.selfie_age = 18;
    s.card_format = i % 3 ? CardFormat::blue : CardFormat::yellow;
    s.document_feature = random_feature(g, dim);
    s.selfie_feature = s.document_feature;
    for (auto& x : s.selfie_feature) x += jitter(g);
    subjects.push_back(std::move(s));
  }
  return PairedDataset(std::move(subjects), dim);
}

// Subject with explicit features, for hand-built toys.
inline Subject toy_subject(std::string id, std::vector<float> doc, std::vector<float> selfie) {
  Subject s;
  s.id = std::move(id);
  s.gender = Gender::male;
  s.doc_age = 18;
  s.selfie_age = 18;
  s.card_format = CardFormat::blue;
  s.document_feature = std::move(doc);
  s.selfie_feature = std::move(selfie);
  return s;
}

// Try every candidate threshold (each distinct impostor value, then +inf)
// and keep the smallest one whose impostor acceptance meets the target.
struct OracleResult {
  double threshold;
  double tar;
  double achieved_far;
};

inline OracleResult brute_force_tar(const ScoreSet& s, double far) {
  const double inf = std::numeric_limits<double>::infinity();
  auto accepted = [](const std::vector<double>& v, double t) {
    std::size_t c = 0;
    for (double x : v) c += x >= t ? 1 : 0;
    return c;
  };
  const double ni = static_cast<double>(s.impostor.size());
  const double na = static_cast<double>(s.authentic.size());
  std::vector<double> candidates = s.impostor;
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
  double best = inf;
  for (double t : candidates) {
    if (static_cast<double>(accepted(s.impostor, t)) / ni <= far && t < best) best = t;
  }
  if (best != inf) {
    return {best, static_cast<double>(accepted(s.authentic, best)) / na,
            static_cast<double>(accepted(s.impostor, best)) / ni};
  }
  // No finite impostor value qualifies: only authentic scores strictly
  // above every impostor can be accepted at zero false accepts.
  const double top = *std::max_element(s.impostor.begin(), s.impostor.end());
  double lowest_above = inf;
  std::size_t above = 0;
  for (double a : s.authentic) {
    if (a > top) {
      ++above;
      lowest_above = std::min(lowest_above, a);
    }
  }
  return {lowest_above, static_cast<double>(above) / na, 0.0};
}

// Score set on a coarse grid so ties are frequent.
inline ScoreSet tied_scores(std::mt19937_64& g, std::size_t max_size, std::size_t min_size = 1) {
  std::uniform_int_distribution<std::size_t> size(min_size, max_size);
  std::uniform_int_distribution<int> grid_pick(0, 2);
  const int steps[] = {5, 50, 1000};
  const int grid = steps[grid_pick(g)];
  std::normal_distribution<double> n(0.0, 0.3);
  auto draw = [&](double shift) {
    const double x = std::clamp(n(g) + shift, -1.0, 1.0);
    return std::round(x * grid) / grid;
  };
  ScoreSet s;
  const std::size_t na = size(g), ni = size(g);
  for (std::size_t i = 0; i < na; ++i) s.authentic.push_back(draw(0.5));
  for (std::size_t i = 0; i < ni; ++i) s.impostor.push_back(draw(0.0));
  return s;
}

}  // namespace xmv::test
