#include "xmv/synth.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "xmv/error.hpp"
#include "xmv/parallel.hpp"
#include "xmv/rng.hpp"
#include "xmv/text_format.hpp"

namespace xmv {

namespace {

constexpr std::uint64_t kGlobalStream = 0;

std::vector<double> gaussian(Rng& rng, std::size_t d, double scale) {
  std::vector<double> v(d);
  for (double& x : v) x = rng.normal() * scale;
  return v;
}

double norm_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

std::vector<double> random_direction(Rng& rng, std::size_t d) {
  std::vector<double> v;
  double n = 0.0;
  do {
    v = gaussian(rng, d, 1.0);
    n = norm_of(v);
  } while (n == 0.0);
  for (double& x : v) x /= n;
  return v;
}

// Rows of an orthonormal basis of a random rank-r subspace (Gram-Schmidt).
std::vector<std::vector<double>> random_basis(Rng& rng, std::size_t d, std::size_t r) {
  std::vector<std::vector<double>> basis;
  while (basis.size() < r) {
    auto v = gaussian(rng, d, 1.0);
    for (const auto& b : basis) {
      double p = 0.0;
      for (std::size_t i = 0; i < d; ++i) p += v[i] * b[i];
      for (std::size_t i = 0; i < d; ++i) v[i] -= p * b[i];
    }
    const double n = norm_of(v);
    if (n < 1e-8) continue;
    for (double& x : v) x /= n;
    basis.push_back(std::move(v));
  }
  return basis;
}

struct Group {
  std::string prefix;
  std::size_t count = 0;
  const SubsetSpec* fixed = nullptr;  // null: draw a subgroup per subject
};

std::string subject_name(const std::string& prefix, std::size_t i, int width) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%0*zu", width, i);
  return prefix + buf;
}

}  // namespace

std::vector<SubsetSpec> default_subsets() {
  return {
      {10, 18, 19, 630.0 / 631.0},  {12, 18, 19, 1936.0 / 2010.0}, {14, 18, 19, 138.0 / 2620.0},
      {16, 18, 19, 2.0 / 1619.0},   {18, 18, 19, 3.0 / 2642.0},
  };
}

void SynthConfig::validate() const {
  if (d_in == 0) throw ConfigError("d_in must be positive");
  for (double v : {modality_offset_norm, drift_per_year, noise_sigma, yellow_extra_noise}) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError("synth magnitudes must be finite and >= 0");
  }
  if (drift_rank > d_in) throw ConfigError("drift_rank cannot exceed d_in");
  if (subsets.empty()) throw ConfigError("at least one subset is required");
  if (!(gender_fraction_male >= 0.0 && gender_fraction_male <= 1.0)) {
    throw ConfigError("gender_fraction_male must lie in [0, 1]");
  }
  for (const auto& s : subsets) {
    if (!(s.yellow_fraction >= 0.0 && s.yellow_fraction <= 1.0)) {
      throw ConfigError("yellow_fraction must lie in [0, 1]");
    }
    if (s.selfie_age_min > s.selfie_age_max) throw ConfigError("empty selfie age range");
    try {
      subset_label(s.doc_age, s.selfie_age_min);
      subset_label(s.doc_age, s.selfie_age_max);
    } catch (const RangeError& e) {
      throw ConfigError(e.what());
    }
  }
}

SynthOutput generate(const SynthConfig& config) {
  config.validate();
  const std::size_t d = config.d_in;
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));

  SynthOutput out;
  {
    Rng global(Rng::derive(config.seed, kGlobalStream));
    out.truth.modality_offset = random_direction(global, d);
    for (double& x : out.truth.modality_offset) x *= config.modality_offset_norm;
    const std::size_t rank = config.drift_rank == 0 ? d : config.drift_rank;
    out.truth.drift_basis = random_basis(global, d, rank);
  }
  const auto& offset = out.truth.modality_offset;
  const auto& basis = out.truth.drift_basis;

  std::vector<Group> groups;
  groups.push_back({"tr", config.n_train_subjects, nullptr});
  for (const auto& s : config.subsets) {
    groups.push_back({subset_label(s.doc_age, s.selfie_age_min).name + "-",
                      config.n_test_per_subset, &s});
  }

  for (std::size_t g = 0; g < groups.size(); ++g) {
    const Group& group = groups[g];
    std::vector<Subject> subjects(group.count);
    std::vector<SubjectTruth> truths(group.count);
    const std::uint64_t group_seed = Rng::derive(config.seed, g + 1);
    const int width = group.count >= 10000 ? 6 : 4;

    parallel_for(group.count, config.threads, [&](std::size_t begin, std::size_t end) {
      for (std::size_t i = begin; i < end; ++i) {
        Rng rng(Rng::derive(group_seed, i));
        const SubsetSpec& spec =
            group.fixed ? *group.fixed : config.subsets[rng.uniform_index(config.subsets.size())];
        const int span = spec.selfie_age_max - spec.selfie_age_min + 1;
        const int selfie_age = spec.selfie_age_min + static_cast<int>(rng.uniform_index(span));
        const bool yellow = rng.uniform01() < spec.yellow_fraction;
        const bool male = rng.uniform01() < config.gender_fraction_male;

        const auto z = random_direction(rng, d);
        // Unit drift direction inside the shared subspace.
        std::vector<double> coeff = random_direction(rng, basis.size());
        std::vector<double> w(d, 0.0);
        for (std::size_t k = 0; k < basis.size(); ++k) {
          for (std::size_t j = 0; j < d; ++j) w[j] += coeff[k] * basis[k][j];
        }
        const int years = selfie_age - spec.doc_age;
        const double drift = config.drift_per_year * static_cast<double>(years);
        const auto e1 = gaussian(rng, d, inv_sqrt_d * config.noise_sigma);
        const auto e2 = gaussian(rng, d, inv_sqrt_d * config.noise_sigma);
        const auto e3 = gaussian(rng, d, inv_sqrt_d * config.yellow_extra_noise);

        Subject& s = subjects[i];
        s.id = subject_name(group.prefix, i, width);
        s.gender = male ? Gender::male : Gender::female;
        s.doc_age = spec.doc_age;
        s.selfie_age = selfie_age;
        s.card_format = yellow ? CardFormat::yellow : CardFormat::blue;
        s.selfie_feature.resize(d);
        s.document_feature.resize(d);
        for (std::size_t j = 0; j < d; ++j) {
          s.selfie_feature[j] = static_cast<float>(z[j] + e1[j]);
          double doc = z[j] + drift * w[j] + offset[j] + e2[j];
          if (yellow) doc += e3[j];
          s.document_feature[j] = static_cast<float>(doc);
        }

        SubjectTruth& t = truths[i];
        t.subject_id = s.id;
        t.identity = z;
        t.drift_years = years;
        t.drift_norm = std::abs(drift);
        t.selfie_noise_norm = norm_of(e1);
        t.document_noise_norm = norm_of(e2);
        t.yellow_noise_norm = yellow ? norm_of(e3) : 0.0;
      }
    });

    PairedDataset ds(std::move(subjects), d);
    out.truth.subjects.insert(out.truth.subjects.end(), std::make_move_iterator(truths.begin()),
                              std::make_move_iterator(truths.end()));
    if (group.fixed == nullptr) {
      out.train = std::move(ds);
    } else {
      out.test_subsets.push_back(
          {subset_label(group.fixed->doc_age, group.fixed->selfie_age_min), std::move(ds)});
    }
  }
  return out;
}

void write_truth_csv(const GroundTruth& truth, std::ostream& out) {
  out << "subject_id,drift_years,drift_norm,selfie_noise_norm,document_noise_norm,"
         "yellow_noise_norm";
  const std::size_t d = truth.modality_offset.size();
  for (std::size_t j = 0; j < d; ++j) out << ",z" << j;
  out << '\n';
  for (const auto& t : truth.subjects) {
    out << t.subject_id << ',' << t.drift_years << ',' << format_double(t.drift_norm) << ','
        << format_double(t.selfie_noise_norm) << ',' << format_double(t.document_noise_norm)
        << ',' << format_double(t.yellow_noise_norm);
    for (double x : t.identity) out << ',' << format_double(x);
    out << '\n';
  }
}

}  // namespace xmv
