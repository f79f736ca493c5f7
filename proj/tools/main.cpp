// semipso command-line tool.
//
// Every subcommand accepts --config FILE with `key = value` lines; keys map
// to the long flag of the same name and explicit flags override them.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "semipso/config.hpp"
#include "semipso/csv.hpp"
#include "semipso/dataset.hpp"
#include "semipso/error.hpp"
#include "semipso/pso.hpp"
#include "semipso/synthetic.hpp"
#include "semipso/trainer.hpp"

namespace fs = std::filesystem;
using namespace semipso;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

struct TrainKey {
  const char* key;
  const char* help;
};

const std::vector<TrainKey>& train_keys() {
  static const std::vector<TrainKey> keys{
      {"iterations", "training iterations"},
      {"batch_size", "items per batch"},
      {"lr_seg", "segmenter learning rate"},
      {"lr_disc", "discriminator learning rate"},
      {"beta1", "Adam beta1"},
      {"beta2", "Adam beta2"},
      {"warmup_iters", "iterations with lambda_semi_bce held at 0 (-1: iterations/4)"},
      {"lambda_adv", "adversarial weight on labeled predictions"},
      {"lambda_semi_adv", "adversarial weight on unlabeled predictions"},
      {"lambda_semi_bce", "self-training weight"},
      {"t_semi_mask", "discriminator confidence threshold"},
      {"gate_semi_adv", "also hold lambda_semi_adv at 0 during warm-up"},
      {"label_fraction", "share of items whose masks are used"},
      {"seed", "training seed"},
      {"split_seed", "labeled/unlabeled split seed"},
      {"crop_size", "training crop (0: full image)"},
      {"augment", "random scaling and cropping"},
      {"base_channels", "U-Net channels at the first level"},
      {"depth", "U-Net pooling levels"},
      {"slope", "Leaky-ReLU slope"},
      {"disc_layers", "discriminator layers (0: fit to input)"},
      {"log_every", "history row interval"},
      {"eval_every", "held-out evaluation interval (0: off)"},
      {"precision", "float or double"},
  };
  return keys;
}

std::string flag_name(std::string key) {
  std::replace(key.begin(), key.end(), '_', '-');
  return "--" + key;
}

/// Holds the string value of every training flag that was given.
struct TrainFlags {
  std::map<std::string, std::string> values;

  void add_to(CLI::App* app) {
    for (const auto& k : train_keys()) {
      app->add_option(flag_name(k.key), values[k.key], k.help)->group("Training");
    }
  }

  TrainConfig build(CLI::App* app) const {
    TrainConfig c;
    for (const auto& k : train_keys()) {
      if (app->count(flag_name(k.key)) > 0) c.set(k.key, values.at(k.key));
    }
    c.validate();
    return c;
  }
};

/// Expands `--config FILE` into flags placed before the remaining arguments
/// so the explicit ones are parsed last and win.
std::vector<std::string> expand_config(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::optional<std::string> path;
  std::vector<std::string> rest;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    } else {
      rest.push_back(args[i]);
    }
  }
  if (!path || rest.empty()) return args;
  std::vector<std::string> out{rest.front()};
  for (const auto& [k, v] : read_key_value_file(*path)) {
    out.push_back(flag_name(k));
    out.push_back(v);
  }
  out.insert(out.end(), rest.begin() + 1, rest.end());
  return out;
}

std::string one_line(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(out.good(), ErrorCode::kIoFailure, "cannot write " + path.string());
  out << text;
  out.flush();
  require(out.good(), ErrorCode::kIoFailure, "failed writing " + path.string());
}

void print_report(const std::string& prefix, const MetricReport& r) {
  std::cout << prefix << "roc_auc=" << format_real(r.roc_auc) << ' ' << prefix
            << "pr_auc=" << format_real(r.pr_auc) << ' ' << prefix
            << "score=" << format_real(r.score) << '\n';
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double("fractions", item));
  require(!out.empty(), ErrorCode::kInvalidConfig, "empty list");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semi-supervised adversarial vessel segmentation with PSO-tuned weights"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  std::string config_path;  // consumed by expand_config, kept for --help

  // gen-data
  auto* gen = app.add_subcommand("gen-data", "Write a synthetic dataset with a manifest");
  fs::path gen_out;
  SyntheticConfig syn;
  double gen_fraction = 1.0;
  std::uint64_t gen_split_seed = 0;
  gen->add_option("--config", config_path, "key = value file");
  gen->add_option("--out", gen_out, "output directory")->required();
  gen->add_option("--count", syn.count, "number of images");
  gen->add_option("--size", syn.image_size, "image side in pixels");
  gen->add_option("--seed", syn.seed, "generator seed");
  gen->add_option("--noise", syn.noise_std, "pixel noise standard deviation");
  gen->add_option("--label-fraction", gen_fraction, "share marked labeled in the manifest");
  gen->add_option("--split-seed", gen_split_seed, "seed of the labeled split");

  // train
  auto* tr = app.add_subcommand("train", "Train segmenter and discriminator");
  TrainFlags tr_flags;
  fs::path tr_data, tr_eval, tr_out, tr_resume;
  long tr_stop = -1;
  bool tr_keep = false;
  tr->add_option("--config", config_path, "key = value file");
  tr->add_option("--data", tr_data, "training manifest")->required();
  tr->add_option("--eval-data", tr_eval, "held-out manifest");
  tr->add_option("--out", tr_out, "output directory")->required();
  tr->add_option("--resume", tr_resume, "checkpoint to continue");
  tr->add_option("--stop-at", tr_stop, "stop at this iteration (resumable)");
  tr->add_flag("--keep-partition", tr_keep, "use the manifest's labeled column");
  tr_flags.add_to(tr);

  // tune
  auto* tu = app.add_subcommand("tune", "Search (lambda_semi_adv, lambda_semi_bce, t_semi_mask) by PSO");
  TrainFlags tu_flags;
  fs::path tu_data, tu_out;
  TuneOptions tune;
  tu->add_option("--config", config_path, "key = value file");
  tu->add_option("--data", tu_data, "training manifest")->required();
  tu->add_option("--out", tu_out, "output directory")->required();
  tu->add_option("--generations", tune.pso.generations, "PSO generations");
  tu->add_option("--population", tune.pso.population, "PSO particles");
  tu->add_option("--pso-seed", tune.pso.seed, "PSO seed");
  tu->add_option("--phi-p", tune.pso.phi_p, "cognitive coefficient");
  tu->add_option("--phi-g", tune.pso.phi_g, "social coefficient");
  tu->add_option("--fitness-iterations", tune.fitness_iterations,
                 "iterations per fitness run (0: max(100, iterations/20))");
  tu->add_option("--fitness-images", tune.fitness_images, "images scored per fitness run");
  tu_flags.add_to(tu);

  // eval
  auto* ev = app.add_subcommand("eval", "Score a checkpoint on a dataset");
  fs::path ev_ckpt, ev_data, ev_out;
  ev->add_option("--config", config_path, "key = value file");
  ev->add_option("--checkpoint", ev_ckpt, "checkpoint file")->required();
  ev->add_option("--data", ev_data, "manifest with masks")->required();
  ev->add_option("--out", ev_out, "optional CSV output");

  // ablate
  auto* ab = app.add_subcommand("ablate", "baseline / +adv / +adv+semi at each label fraction");
  TrainFlags ab_flags;
  fs::path ab_data, ab_eval, ab_out;
  std::string ab_fractions = "0.1,0.5";
  ab->add_option("--config", config_path, "key = value file");
  ab->add_option("--data", ab_data, "training manifest (all items masked)")->required();
  ab->add_option("--eval-data", ab_eval, "held-out manifest")->required();
  ab->add_option("--out", ab_out, "output directory")->required();
  ab->add_option("--fractions", ab_fractions, "comma-separated label fractions");
  ab_flags.add_to(ab);

  // bench-pso
  auto* bp = app.add_subcommand("bench-pso", "PSO on -|x - c|^2 over [-5, 5]^d");
  int bp_seeds = 100;
  int bp_dim = 3;
  double bp_tol = 1e-2;
  PsoConfig bp_cfg;
  bp_cfg.population = 10;
  bp_cfg.generations = 100;
  fs::path bp_out;
  bp->add_option("--config", config_path, "key = value file");
  bp->add_option("--seeds", bp_seeds, "number of seeds");
  bp->add_option("--dim", bp_dim, "dimension");
  bp->add_option("--population", bp_cfg.population, "particles");
  bp->add_option("--generations", bp_cfg.generations, "generations");
  bp->add_option("--tolerance", bp_tol, "success radius");
  bp->add_option("--out", bp_out, "optional per-seed CSV");

  try {
    std::vector<std::string> args = expand_config(argc, argv);
    std::reverse(args.begin(), args.end());
    try {
      app.parse(args);
    } catch (const CLI::CallForHelp& e) {
      return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
      return app.exit(e);
    } catch (const CLI::ParseError& e) {
      std::cerr << "error: usage: " << one_line(e.what()) << '\n';
      return kExitUsage;
    }

    if (*gen) {
      Dataset ds = generate_synthetic(syn);
      if (gen_fraction < 1.0) ds = split_labeled(std::move(ds), gen_fraction, gen_split_seed);
      write_dataset(gen_out, ds);
      std::cout << "items=" << ds.size() << " labeled=" << ds.labeled.size()
                << " manifest=" << (gen_out / "manifest.tsv").string() << '\n';
    } else if (*tr) {
      const TrainConfig cfg = tr_flags.build(tr);
      const Dataset data = load_manifest(tr_data);
      std::optional<Dataset> heldout;
      if (!tr_eval.empty()) heldout = load_manifest(tr_eval);
      fs::create_directories(tr_out);
      TrainOptions opts;
      opts.keep_partition = tr_keep;
      if (!tr_resume.empty()) opts.resume_from = tr_resume;
      if (tr_stop >= 0) opts.stop_at = tr_stop;
      const TrainOutputs outs{tr_out / "checkpoint.bin", tr_out / "history.csv",
                              tr_out / "eval.csv"};
      const TrainSummary s = train(cfg, data, heldout ? &*heldout : nullptr, outs, opts);
      std::cout << "iterations=" << s.iterations;
      if (s.last) {
        std::cout << " bce=" << format_real(s.last->seg.bce)
                  << " total=" << format_real(s.last->seg.total)
                  << " d_loss=" << format_real(s.last->d_loss);
      }
      std::cout << '\n';
      if (s.heldout) print_report("heldout_", *s.heldout);
    } else if (*tu) {
      const TrainConfig cfg = tu_flags.build(tu);
      const Dataset data = load_manifest(tu_data);
      fs::create_directories(tu_out);
      const TuneResult r = pso_tune(cfg, data, tune, [](const GenerationRecord& g) {
        std::cerr << "generation " << g.generation << " best=" << format_real(g.best_fitness)
                  << '\n';
      });
      std::ostringstream trace;
      write_trace_csv(trace, r.pso.trace);
      write_text_file(tu_out / "pso_trace.csv", trace.str());
      std::ostringstream best;
      best << "lambda_semi_adv = " << format_real(r.best[0]) << '\n'
           << "lambda_semi_bce = " << format_real(r.best[1]) << '\n'
           << "t_semi_mask = " << format_real(r.best[2]) << '\n';
      write_text_file(tu_out / "best.conf", best.str());
      std::cout << "lambda_semi_adv=" << format_real(r.best[0])
                << " lambda_semi_bce=" << format_real(r.best[1])
                << " t_semi_mask=" << format_real(r.best[2])
                << " fitness=" << format_real(r.pso.best_fitness) << '\n';
    } else if (*ev) {
      const MetricReport r = evaluate_checkpoint(ev_ckpt, load_manifest(ev_data));
      print_report("", r);
      if (!ev_out.empty()) {
        write_text_file(ev_out, "roc_auc,pr_auc,score\n" + format_real(r.roc_auc) + "," +
                                    format_real(r.pr_auc) + "," + format_real(r.score) + "\n");
      }
    } else if (*ab) {
      const TrainConfig cfg = ab_flags.build(ab);
      const Dataset data = load_manifest(ab_data);
      const Dataset heldout = load_manifest(ab_eval);
      const std::vector<double> fractions = parse_list(ab_fractions);
      fs::create_directories(ab_out);
      const auto rows = ablation(cfg, data, heldout, fractions, [](const ExperimentRow& row) {
        std::cerr << row.model << " fraction=" << format_real(row.fraction)
                  << " score=" << format_real(row.report.score) << '\n';
      });
      std::ostringstream csv;
      write_ablation_csv(csv, rows);
      write_text_file(ab_out / "ablation.csv", csv.str());
      std::cout << csv.str();
    } else if (*bp) {
      require(bp_dim >= 1 && bp_seeds >= 1, ErrorCode::kInvalidConfig,
              "bench-pso needs dim >= 1 and seeds >= 1");
      bp_cfg.lower.assign(static_cast<std::size_t>(bp_dim), -5.0);
      bp_cfg.upper.assign(static_cast<std::size_t>(bp_dim), 5.0);
      std::vector<double> center(static_cast<std::size_t>(bp_dim));
      for (int d = 0; d < bp_dim; ++d) center[static_cast<std::size_t>(d)] = 1.5 - 0.7 * d;
      int hits = 0;
      std::ostringstream csv;
      csv << "seed,distance,evaluations,best_fitness\n";
      const auto t0 = std::chrono::steady_clock::now();
      for (int s = 0; s < bp_seeds; ++s) {
        bp_cfg.seed = static_cast<std::uint64_t>(s);
        const PsoResult r = pso_optimize(
            [&](std::span<const double> x) {
              double acc = 0;
              for (std::size_t i = 0; i < x.size(); ++i) acc += (x[i] - center[i]) * (x[i] - center[i]);
              return -acc;
            },
            bp_cfg);
        double d2 = 0;
        for (std::size_t i = 0; i < center.size(); ++i) {
          d2 += (r.best_position[i] - center[i]) * (r.best_position[i] - center[i]);
        }
        const double dist = std::sqrt(d2);
        hits += dist < bp_tol ? 1 : 0;
        csv << s << ',' << format_real(dist) << ',' << r.trace.evaluations << ','
            << format_real(r.best_fitness) << '\n';
      }
      const double secs =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      if (!bp_out.empty()) write_text_file(bp_out, csv.str());
      std::cout << "seeds=" << bp_seeds << " converged=" << hits << " seconds=" << secs << '\n';
    }
  } catch (const TrainingDiverged& e) {
    std::cerr << "error: " << error_code_name(e.code()) << ": iteration " << e.iteration() << ": "
              << one_line(e.what()) << '\n';
    return kExitFailure;
  } catch (const Error& e) {
    std::cerr << "error: " << error_code_name(e.code()) << ": " << one_line(e.what()) << '\n';
    return kExitFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << one_line(e.what()) << '\n';
    return kExitFailure;
  }
  return 0;
}
