#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "xmv/types.hpp"

namespace xmv {

// One age subgroup: documents captured at `doc_age`, selfies at an age drawn
// uniformly from [selfie_age_min, selfie_age_max].
struct SubsetSpec {
  int doc_age = 18;
  int selfie_age_min = 18;
  int selfie_age_max = 19;
  double yellow_fraction = 0.0;  // probability the document is a yellow card
};

// Default subgroups. Yellow-card fractions follow the per-subgroup card
// counts of the reference dataset (630/631, 1936/2010, 138/2620, 2/1619,
// 3/2642).
std::vector<SubsetSpec> default_subsets();

// Feature model, per subject with unit identity z:
//   selfie   = z + σ·ε₁
//   document = z + γ·(selfie_age − doc_age)·w + m + σ·ε₂ (+ σ_y·ε₃ if yellow)
// ε are Gaussian with E‖ε‖² = 1, so σ and σ_y are noise norms independent
// of d_in. m is one global offset of norm μ_m. w is a per-subject unit
// direction drawn inside a shared `drift_rank`-dimensional subspace
// (0 = the whole space).
struct SynthConfig {
  std::size_t n_train_subjects = 20000;
  std::size_t n_test_per_subset = 600;
  std::size_t d_in = 128;
  double modality_offset_norm = 0.8;
  double drift_per_year = 0.2;
  std::size_t drift_rank = 8;
  double noise_sigma = 1.0;
  double yellow_extra_noise = 0.3;
  std::vector<SubsetSpec> subsets = default_subsets();
  double gender_fraction_male = 0.5635;
  std::uint64_t seed = 0;
  unsigned threads = 1;

  // Throws ConfigError on negative magnitudes, empty subsets, fractions
  // outside [0, 1], ages outside [9, 19] or drift_rank > d_in.
  void validate() const;
};

struct SubjectTruth {
  std::string subject_id;
  std::vector<double> identity;  // unit latent z
  int drift_years = 0;
  double drift_norm = 0.0;
  double selfie_noise_norm = 0.0;
  double document_noise_norm = 0.0;
  double yellow_noise_norm = 0.0;
};

// Generator internals kept for diagnostics only; never fed to training.
struct GroundTruth {
  std::vector<double> modality_offset;
  std::vector<std::vector<double>> drift_basis;  // orthonormal rows
  std::vector<SubjectTruth> subjects;            // train first, then subsets in order
};

struct LabeledSubset {
  SubsetLabel label;
  PairedDataset data;
};

struct SynthOutput {
  PairedDataset train;
  std::vector<LabeledSubset> test_subsets;  // in config.subsets order
  GroundTruth truth;
};

// Every subject draws from its own seed derived from (seed, group, index),
// so the output does not depend on config.threads.
SynthOutput generate(const SynthConfig& config);

// CSV `subject_id,drift_years,drift_norm,selfie_noise_norm,document_noise_norm,
// yellow_noise_norm,z0,...`.
void write_truth_csv(const GroundTruth& truth, std::ostream& out);

}  // namespace xmv
