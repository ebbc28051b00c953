#include "xmv/cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "xmv/checkpoint.hpp"
#include "xmv/cli/analysis.hpp"
#include "xmv/cli/svg.hpp"
#include "xmv/dataset_io.hpp"
#include "xmv/error.hpp"
#include "xmv/parallel.hpp"
#include "xmv/score_file.hpp"
#include "xmv/text_format.hpp"

namespace xmv::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr std::uint64_t kSplitStream = 11;
constexpr std::uint64_t kValidationStream = 12;
constexpr std::uint64_t kResampleStream = 13;

fs::path require_out_dir(const ExperimentConfig& cfg) {
  if (cfg.out_dir.empty()) throw ConfigError("--out is required");
  if (!fs::is_directory(cfg.out_dir)) {
    throw IoError("output directory '" + cfg.out_dir.string() + "' does not exist");
  }
  return cfg.out_dir;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  auto out = open_out(path);
  out << text;
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return in;
}

PairedDataset load_inputs(const ExperimentConfig& cfg) {
  if (cfg.datasets.empty()) throw ConfigError("at least one --data file is required");
  std::vector<PairedDataset> parts;
  for (const auto& p : cfg.datasets) {
    if (!fs::exists(p)) throw IoError("dataset '" + p.string() + "' does not exist");
    parts.push_back(load_dataset(p));
  }
  return parts.size() == 1 ? std::move(parts.front()) : PairedDataset::merge(parts);
}

EmbeddingHead load_head(const ExperimentConfig& cfg, std::size_t d_in) {
  if (!cfg.checkpoint) return EmbeddingHead::identity(d_in);
  if (!fs::exists(*cfg.checkpoint)) {
    throw IoError("checkpoint '" + cfg.checkpoint->string() + "' does not exist");
  }
  EmbeddingHead head = load_checkpoint(*cfg.checkpoint).head;
  if (head.d_in() != d_in) {
    throw DimensionError("checkpoint expects " + std::to_string(head.d_in()) +
                         "-dimensional features, dataset has " + std::to_string(d_in));
  }
  return head;
}

std::string model_name(const ExperimentConfig& cfg) {
  if (!cfg.model_name.empty()) return cfg.model_name;
  return cfg.checkpoint ? "trained" : "baseline";
}

std::string far_label(double far) {
  // 0.0001 → "0.01%"
  return format_double(std::round(far * 100.0 * 1e9) / 1e9) + "%";
}

std::string series_name(const fs::path& p) {
  const auto parent = p.parent_path().filename().string();
  return parent.empty() ? p.stem().string() : parent;
}

}  // namespace

void cmd_synth(const ExperimentConfig& cfg, std::ostream& log) {
  const fs::path out = require_out_dir(cfg);
  SynthConfig sc = cfg.synth;
  sc.seed = cfg.require_seed("synth");
  sc.threads = resolve_threads(cfg.threads);
  const SynthOutput data = generate(sc);
  const std::string ext = cfg.binary ? ".xmv" : ".csv";

  write_dataset(data.train, out / ("train" + ext));
  log << "train: " << data.train.size() << " subjects\n";
  for (const auto& s : data.test_subsets) {
    write_dataset(s.data, out / (s.label.name + ext));
    log << s.label.name << ": " << s.data.size() << " subjects\n";
  }
  auto truth = open_out(out / "truth.csv");
  write_truth_csv(data.truth, truth);
}

void cmd_train(const ExperimentConfig& cfg, std::ostream& log) {
  const fs::path out = require_out_dir(cfg);
  const std::uint64_t seed = cfg.require_seed("train");
  const PairedDataset all = load_inputs(cfg);

  TrainConfig tc = cfg.train;
  tc.seed = seed;
  tc.threads = resolve_threads(cfg.threads);
  tc.validate();

  Rng split_rng(Rng::derive(seed, kSplitStream));
  auto [train_set, val_pool] = split_subjects(all, cfg.train_fraction, split_rng);

  // Hard pairs are chosen by the untrained head, so the selection does not
  // depend on the model being trained.
  HardValidationOptions vo;
  vo.folds = cfg.val_folds;
  vo.direction = cfg.impostor_direction;
  if (vo.folds == 0) throw ConfigError("val_folds must be positive");
  const std::size_t smallest_fold = val_pool.size() / vo.folds;
  vo.per_fold = std::min(cfg.val_per_fold, smallest_fold);
  if (vo.per_fold < cfg.val_per_fold) {
    log << "note: validation folds hold " << smallest_fold << " subjects; keeping " << vo.per_fold
        << " per fold instead of " << cfg.val_per_fold << '\n';
  }
  if (vo.per_fold < 2) {
    throw InsufficientDataError("validation pool of " + std::to_string(val_pool.size()) +
                                " subjects is too small for " + std::to_string(vo.folds) +
                                " folds");
  }
  const EmbeddingHead baseline = initial_head(tc, all.dim());
  Rng val_rng(Rng::derive(seed, kValidationStream));
  const ValidationSet validation = build_hard_validation(
      val_pool, [&](std::span<const float> x) { return forward(baseline, x); }, vo, val_rng);

  std::vector<Triplet> first_triplets;
  BatchObserver observer;
  if (cfg.dump_triplets) {
    observer = [&](std::size_t it, const MiningBatch&, const std::vector<Triplet>& t) {
      if (it == 1) first_triplets = t;
    };
  }
  log << "training on " << train_set.size() << " subjects, validating on " << val_pool.size()
      << " (" << validation.total_pairs() << " pairs)\n";
  const TrainResult result = train(train_set, val_pool, validation, tc, observer);

  const EvalPoint& best = result.history.best();
  save_checkpoint({result.head, tc, best.iteration, best.validation_tar}, out / "checkpoint.json");
  {
    auto h = open_out(out / "history.csv");
    write_history_csv(result.history, h);
  }
  save_validation(validation, out / "validation.csv");
  if (cfg.dump_triplets) {
    auto t = open_out(out / "triplets.csv");
    write_triplets_csv(first_triplets, t);
  }
  log << "best iteration " << best.iteration << ", validation TAR@FAR=" << far_label(tc.selection_far)
      << " " << format_double(best.validation_tar) << " (iteration 0: "
      << format_double(result.history.points.front().validation_tar) << ")\n";
}

void cmd_eval(const ExperimentConfig& cfg, std::ostream& log) {
  const fs::path out = require_out_dir(cfg);
  cfg.validate();
  const std::string model = model_name(cfg);
  std::vector<GroupEvalRow> rows;
  std::vector<ScoredPair> pairs;

  if (cfg.scores) {
    if (!fs::exists(*cfg.scores)) throw IoError("scores '" + cfg.scores->string() + "' do not exist");
    const ScoreSet s = to_score_set(load_scores(*cfg.scores));
    for (double far : cfg.far_targets) {
      rows.push_back({model, "all", 0, s.authentic.size(), s.impostor.size(), tar_at_far(s, far)});
    }
  } else {
    const PairedDataset ds = load_inputs(cfg);
    const EmbeddingHead head = load_head(cfg, ds.dim());
    const auto groups = group_dataset(ds, cfg.group_by);
    rows = evaluate_groups(groups, head, cfg.far_targets, model, resolve_threads(cfg.threads),
                           cfg.write_scores ? &pairs : nullptr);
  }

  {
    auto csv = open_out(out / "eval.csv");
    write_eval_csv(rows, csv);
  }
  write_text(out / "eval.json", eval_rows_to_json(rows));
  if (cfg.write_scores && !cfg.scores) save_scores(pairs, out / "scores.csv");

  for (const auto& r : rows) {
    log << r.model << ' ' << r.group << " TAR@FAR=" << far_label(r.result.far_target) << ' '
        << format_double(r.result.tar) << '\n';
  }
}

namespace {

void analyze_gender_mode(const ExperimentConfig& cfg, const PairedDataset& ds,
                         const EmbeddingHead& head, const fs::path& out, std::ostream& log) {
  const GenderAnalysis ga = analyze_gender(ds, head, cfg.far_targets, cfg.histogram_bins,
                                           resolve_threads(cfg.threads));
  {
    auto csv = open_out(out / "gender.csv");
    csv << "gender,subset,n_subjects,authentic_mean,authentic_std,impostor_mean,impostor_std,"
           "d_prime,far_target,threshold,tar,achieved_far\n";
    for (const auto& r : ga.rows) {
      for (const auto& e : r.results) {
        csv << r.gender << ',' << r.subset << ',' << r.n_subjects << ','
            << format_double(r.authentic.mean) << ',' << format_double(r.authentic.std) << ','
            << format_double(r.impostor.mean) << ',' << format_double(r.impostor.std) << ','
            << format_double(r.d_prime) << ',' << format_double(e.far_target) << ','
            << format_double(e.threshold) << ',' << format_double(e.tar) << ','
            << format_double(e.achieved_far) << '\n';
      }
    }
  }
  {
    auto csv = open_out(out / "histograms.csv");
    csv << "gender,bin_lo,bin_hi,authentic,impostor\n";
    for (const auto& h : ga.histograms) {
      for (std::size_t b = 0; b < h.authentic.size(); ++b) {
        csv << h.gender << ',' << format_double(ga.bin_edges[b]) << ','
            << format_double(ga.bin_edges[b + 1]) << ',' << h.authentic[b] << ','
            << h.impostor[b] << '\n';
      }
    }
  }
  auto stats = [](const ScoreStats& s) {
    ordered_json q = ordered_json::array();
    for (double v : s.quantiles) q.push_back(v);
    return ordered_json{{"count", s.count}, {"mean", s.mean}, {"std", s.std},
                        {"min", s.min},     {"max", s.max},   {"quantiles", q}};
  };
  ordered_json rows = ordered_json::array();
  for (const auto& r : ga.rows) {
    ordered_json res = ordered_json::array();
    for (const auto& e : r.results) res.push_back(ordered_json::parse(to_json(e)));
    rows.push_back(ordered_json{{"gender", r.gender},
                                {"subset", r.subset},
                                {"n_subjects", r.n_subjects},
                                {"d_prime", r.d_prime},
                                {"authentic", stats(r.authentic)},
                                {"impostor", stats(r.impostor)},
                                {"results", res}});
    if (r.subset == "all") {
      log << r.gender << ": d'=" << format_double(r.d_prime)
          << " authentic mean " << format_double(r.authentic.mean) << ", impostor mean "
          << format_double(r.impostor.mean) << '\n';
    }
  }
  write_text(out / "gender.json", ordered_json{{"mode", "gender"}, {"rows", rows}}.dump(1) + "\n");
}

void analyze_card_mode(const ExperimentConfig& cfg, const PairedDataset& ds,
                       const EmbeddingHead& head, const fs::path& out, std::ostream& log) {
  const std::uint64_t seed = cfg.require_seed("analyze --mode card_format");
  const CardFormatAnalysis ca = analyze_card_format(
      ds, head, cfg.n_draws, Rng::derive(seed, kResampleStream), resolve_threads(cfg.threads));
  {
    auto csv = open_out(out / "card_format.csv");
    csv << "subset,card_format,role,draw,n_subjects,mean_authentic,mean_impostor\n";
    for (const auto& r : ca.rows) {
      csv << r.subset << ',' << to_string(r.format) << ',' << (r.minority ? "minority" : "resampled")
          << ',' << r.draw << ',' << r.n_subjects << ',' << format_double(r.mean_authentic) << ','
          << format_double(r.mean_impostor) << '\n';
    }
  }
  {
    auto csv = open_out(out / "card_format_summary.csv");
    csv << "subset,minority_format,minority_count,majority_count,yellow_authentic_below_blue,"
           "yellow_impostor_above_blue\n";
    for (const auto& s : ca.summaries) {
      csv << s.subset << ',' << to_string(s.minority) << ',' << s.minority_count << ','
          << s.majority_count << ',' << (s.yellow_authentic_below_blue ? "true" : "false") << ','
          << (s.yellow_impostor_above_blue ? "true" : "false") << '\n';
      log << s.subset << ": " << s.minority_count << ' ' << to_string(s.minority) << " vs "
          << s.majority_count << ", yellow authentic below blue in every draw: "
          << (s.yellow_authentic_below_blue ? "yes" : "no") << '\n';
    }
  }
  ordered_json rows = ordered_json::array();
  for (const auto& r : ca.rows) {
    rows.push_back(ordered_json{{"subset", r.subset},
                                {"card_format", to_string(r.format)},
                                {"role", r.minority ? "minority" : "resampled"},
                                {"draw", r.draw},
                                {"n_subjects", r.n_subjects},
                                {"mean_authentic", r.mean_authentic},
                                {"mean_impostor", r.mean_impostor}});
  }
  ordered_json summaries = ordered_json::array();
  for (const auto& s : ca.summaries) {
    summaries.push_back(ordered_json{{"subset", s.subset},
                                     {"minority_format", to_string(s.minority)},
                                     {"minority_count", s.minority_count},
                                     {"majority_count", s.majority_count},
                                     {"yellow_authentic_below_blue", s.yellow_authentic_below_blue},
                                     {"yellow_impostor_above_blue", s.yellow_impostor_above_blue}});
  }
  write_text(out / "card_format.json",
             ordered_json{{"mode", "card_format"}, {"draws", cfg.n_draws}, {"rows", rows},
                          {"summaries", summaries}}
                     .dump(1) +
                 "\n");
}

}  // namespace

void cmd_analyze(const ExperimentConfig& cfg, std::ostream& log) {
  const fs::path out = require_out_dir(cfg);
  cfg.validate();
  if (cfg.analyze_mode != "gender" && cfg.analyze_mode != "card_format") {
    throw ConfigError("--mode must be gender or card_format");
  }
  if (cfg.histogram_bins == 0) throw ConfigError("histogram_bins must be positive");
  const PairedDataset ds = load_inputs(cfg);
  const EmbeddingHead head = load_head(cfg, ds.dim());
  if (cfg.analyze_mode == "gender") {
    analyze_gender_mode(cfg, ds, head, out, log);
  } else {
    analyze_card_mode(cfg, ds, head, out, log);
  }
}

void cmd_report(const ExperimentConfig& cfg, std::ostream& log) {
  const fs::path out = require_out_dir(cfg);
  if (cfg.histories.empty() && cfg.evals.empty() && !cfg.histograms) {
    throw ConfigError("report needs at least one --history, --eval or --histograms input");
  }
  const fs::path dir = out / "report";
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());

  if (!cfg.histories.empty()) {
    std::vector<Series> tar_series, loss_series;
    auto csv = open_out(dir / "training_curve.csv");
    csv << "run,iteration,loss,val_tar\n";
    for (const auto& p : cfg.histories) {
      auto in = open_in(p);
      const TrainHistory h = read_history_csv(in);
      if (h.points.empty()) throw EmptyInputError("history '" + p.string() + "' is empty");
      const std::string name = series_name(p);
      Series tar{name, {}, {}}, loss{name, {}, {}};
      for (const auto& e : h.points) {
        csv << name << ',' << e.iteration << ',' << format_double(e.mean_batch_loss) << ','
            << format_double(e.validation_tar) << '\n';
        tar.x.push_back(static_cast<double>(e.iteration));
        tar.y.push_back(e.validation_tar);
        loss.x.push_back(static_cast<double>(e.iteration));
        loss.y.push_back(e.mean_batch_loss);
      }
      tar_series.push_back(std::move(tar));
      loss_series.push_back(std::move(loss));
    }
    write_text(dir / "training_curve.svg",
               line_chart_svg("Validation TAR during training", "iteration", "validation TAR",
                              tar_series));
    const bool any_loss = std::any_of(loss_series.begin(), loss_series.end(), [](const Series& s) {
      return std::any_of(s.y.begin(), s.y.end(), [](double v) { return std::isfinite(v); });
    });
    if (any_loss) {
      write_text(dir / "training_loss.svg",
                 line_chart_svg("Mean batch loss", "iteration", "triplet loss", loss_series));
    }
    log << "wrote training curves for " << cfg.histories.size() << " run(s)\n";
  }

  if (!cfg.evals.empty()) {
    std::vector<GroupEvalRow> rows;
    for (const auto& p : cfg.evals) {
      auto in = open_in(p);
      auto part = read_eval_csv(in);
      rows.insert(rows.end(), part.begin(), part.end());
    }
    {
      auto csv = open_out(dir / "tar_by_subset.csv");
      write_eval_csv(rows, csv);
    }
    // Categories and models keep first-seen order; FAR targets ascend.
    std::set<double> fars;
    std::vector<std::string> groups, models;
    for (const auto& r : rows) {
      fars.insert(r.result.far_target);
      if (std::find(groups.begin(), groups.end(), r.group) == groups.end()) groups.push_back(r.group);
      if (std::find(models.begin(), models.end(), r.model) == models.end()) models.push_back(r.model);
    }
    std::size_t index = 0;
    for (double far : fars) {
      std::vector<Series> series;
      for (const auto& m : models) {
        Series s{m, {}, std::vector<double>(groups.size(), 0.0)};
        for (const auto& r : rows) {
          if (r.model != m || r.result.far_target != far) continue;
          const auto g = std::find(groups.begin(), groups.end(), r.group) - groups.begin();
          s.y[static_cast<std::size_t>(g)] = r.result.tar;
        }
        series.push_back(std::move(s));
      }
      write_text(dir / ("tar_by_subset_" + std::to_string(index++) + ".svg"),
                 bar_chart_svg("TAR at FAR = " + far_label(far), groups, series));
    }
    log << "wrote TAR charts for " << fars.size() << " FAR target(s)\n";
  }

  if (cfg.histograms) {
    auto in = open_in(*cfg.histograms);
    std::string line;
    std::size_t row = 1;
    if (!std::getline(in, line) ||
        trim_line_end(line) != "gender,bin_lo,bin_hi,authentic,impostor") {
      throw ParseError("not a histograms.csv file", row);
    }
    std::vector<double> edges;
    std::map<std::string, std::pair<Series, Series>> by_gender;
    std::vector<std::string> order;
    while (std::getline(in, line)) {
      ++row;
      const auto text = trim_line_end(line);
      if (text.empty()) continue;
      const auto f = split_csv_line(text);
      if (f.size() != 5) throw ParseError("expected 5 columns", row);
      const auto lo = parse_double(f[1]), hi = parse_double(f[2]);
      const auto a = parse_double(f[3]), im = parse_double(f[4]);
      if (!lo || !hi || !a || !im) throw ParseError("bad histogram row", row);
      const std::string g(f[0]);
      if (!by_gender.count(g)) {
        order.push_back(g);
        by_gender[g] = {Series{g + " authentic", {}, {}}, Series{g + " impostor", {}, {}}};
      }
      auto& [auth, imp] = by_gender[g];
      if (order.front() == g) {
        if (edges.empty()) edges.push_back(*lo);
        edges.push_back(*hi);
      }
      auth.y.push_back(*a);
      imp.y.push_back(*im);
    }
    if (order.empty()) throw EmptyInputError("histograms file is empty");
    std::vector<Series> series;
    for (const auto& g : order) {
      series.push_back(by_gender[g].first);
      series.push_back(by_gender[g].second);
    }
    write_text(dir / "score_histograms.svg",
               histogram_svg("Match score distributions", edges, series));
    fs::copy_file(*cfg.histograms, dir / "score_histograms.csv",
                  fs::copy_options::overwrite_existing, ec);
    if (ec) throw IoError("cannot copy histogram data: " + ec.message());
    log << "wrote score histograms\n";
  }
}

}  // namespace xmv::cli
