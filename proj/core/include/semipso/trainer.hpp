#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "semipso/adam.hpp"
#include "semipso/checkpoint.hpp"
#include "semipso/config.hpp"
#include "semipso/dataset.hpp"
#include "semipso/losses.hpp"
#include "semipso/metrics.hpp"
#include "semipso/models.hpp"
#include "semipso/pso.hpp"

namespace semipso {

enum class Precision { kFloat, kDouble };

struct TrainConfig {
  long iterations = 2000;
  int batch_size = 2;
  double lr_seg = 1e-4;
  double lr_disc = 1e-6;
  double beta1 = 0.5;
  double beta2 = 0.9;
  /// Negative means a quarter of `iterations`.
  long warmup_iters = -1;
  LossWeights weights;
  double label_fraction = 0.1;
  std::uint64_t seed = 0;
  std::uint64_t split_seed = 0;
  /// Square training crop; 0 uses the full image.
  int crop_size = 0;
  bool augment = true;
  SegmenterConfig segmenter;
  /// 0 picks the deepest toy schedule that fits the training crop.
  int disc_layers = 0;
  long log_every = 1;
  long eval_every = 0;
  Precision precision = Precision::kFloat;

  /// Applies one `key = value` setting; unknown keys are kInvalidConfig.
  void set(const std::string& key, const std::string& value);
  void apply(const KeyValues& values);
  /// Every key in a fixed order, reals in shortest round-trip form.
  [[nodiscard]] std::string to_text() const;
  static TrainConfig from_text(const std::string& text);

  [[nodiscard]] long resolved_warmup() const;
  /// Loss weights with the warm-up resolved.
  [[nodiscard]] LossWeights loss_weights() const;
  [[nodiscard]] DiscriminatorConfig discriminator(int input_size) const;
  void validate() const;
};

std::string_view precision_name(Precision p) noexcept;

/// Both networks with their optimiser state.
template <Real T>
struct Networks {
  SegmenterConfig seg_config;
  DiscriminatorConfig disc_config;
  ModelParams<T> seg;
  ModelParams<T> disc;

  /// Initialised from substreams of config.seed.
  static Networks init(const TrainConfig& config, int input_size);
};

template <Real T>
struct Batch {
  Tensor4<T> images;
  Tensor4<T> masks;  // empty for unlabeled batches

  [[nodiscard]] bool empty() const noexcept { return images.empty(); }
};

/// Draws `batch_size` items with replacement from `pool`, each followed by its
/// augmentation draws, all from one generator seeded with `stream_seed`.
template <Real T>
Batch<T> sample_batch(const Dataset& data, std::span<const std::size_t> pool,
                      const TrainConfig& config, bool with_masks, std::uint64_t stream_seed);

/// Gradients of one phase for every parameter of both networks.
template <Real T>
struct PhaseResult {
  double loss = 0;
  LossBreakdown breakdown;  // segmenter phase only
  std::vector<Tensor4<T>> seg_grads;
  std::vector<Tensor4<T>> disc_grads;
};

/// Discriminator objective on the labeled batch; the segmenter is a constant.
template <Real T>
PhaseResult<T> discriminator_phase(const Networks<T>& nets, const Batch<T>& labeled);

/// Segmenter objective; the discriminator is a constant. Unlabeled terms are
/// skipped when their configured weights are zero or the batch is empty.
template <Real T>
PhaseResult<T> segmenter_phase(const Networks<T>& nets, const LossWeights& weights,
                               const Batch<T>& labeled, const Batch<T>& unlabeled,
                               long iteration);

struct StepRecord {
  long iteration = 0;
  LossBreakdown seg;
  double d_loss = 0;

  friend bool operator==(const StepRecord&, const StepRecord&) = default;
};

/// Discriminator update, then segmenter update against the updated
/// discriminator. Throws TrainingDiverged on a non-finite loss.
template <Real T>
StepRecord train_step(Networks<T>& nets, const TrainConfig& config, const Batch<T>& labeled,
                      const Batch<T>& unlabeled, long iteration);

template <Real T>
class Trainer {
 public:
  /// `data` carries the labeled/unlabeled partition to train on.
  Trainer(TrainConfig config, Dataset data);
  /// Continues from a checkpoint; its config text replaces any other config.
  Trainer(const Checkpoint<T>& checkpoint, Dataset data);

  StepRecord step();
  void run_until(long iteration, const std::function<void(const StepRecord&)>& on_step = {});

  [[nodiscard]] long iteration() const noexcept { return iteration_; }
  [[nodiscard]] const TrainConfig& config() const noexcept { return config_; }
  [[nodiscard]] const Networks<T>& networks() const noexcept { return nets_; }
  [[nodiscard]] Checkpoint<T> checkpoint() const;

 private:
  TrainConfig config_;
  Dataset data_;
  Networks<T> nets_;
  long iteration_ = 0;
};

/// Pooled metrics of the segmenter over every masked item of `data`.
template <Real T>
MetricReport evaluate(const SegmenterConfig& config, const ModelParams<T>& params,
                      const Dataset& data);

MetricReport evaluate_checkpoint(const std::filesystem::path& checkpoint, const Dataset& data);

void write_history_header(std::ostream& out);
void write_history_row(std::ostream& out, const StepRecord& record);

struct TrainOutputs {
  std::filesystem::path checkpoint;
  std::filesystem::path history;
  /// Written when a held-out set is given and eval_every > 0.
  std::filesystem::path eval_history;
};

struct TrainSummary {
  long iterations = 0;
  std::optional<StepRecord> first;
  std::optional<StepRecord> last;
  std::optional<MetricReport> heldout;
};

struct TrainOptions {
  /// Use the partition stored in the dataset instead of splitting it.
  bool keep_partition = false;
  /// Continue this checkpoint (its config replaces `config`) and append to the history.
  std::optional<std::filesystem::path> resume_from;
  /// Stop early at this iteration; the checkpoint can be resumed later.
  std::optional<long> stop_at;
};

/// Splits `data` by config.label_fraction unless keep_partition, trains, and
/// writes the checkpoint and history files.
TrainSummary train(const TrainConfig& config, const Dataset& data, const Dataset* heldout,
                   const TrainOutputs& outputs, const TrainOptions& options = {});

/// Trains in memory on an already partitioned dataset.
template <Real T>
Networks<T> train_networks(const TrainConfig& config, const Dataset& partitioned);

struct TuneOptions {
  PsoConfig pso = PsoConfig::hyperparameter_defaults();
  /// Length of each fitness run; 0 means max(100, iterations / 20).
  long fitness_iterations = 0;
  int fitness_images = 2;
};

struct TuneResult {
  std::array<double, 3> best{};  // lambda_semi_adv, lambda_semi_bce, t_semi_mask
  PsoResult pso;
};

/// Fitness subset: `count` masked items chosen with `seed`, preferring the
/// unlabeled pool when it has masks.
std::vector<std::size_t> fitness_subset(const Dataset& partitioned, int count, std::uint64_t seed);

/// Fitness of P: Score of a shortened training run from scratch with P as
/// (lambda_semi_adv, lambda_semi_bce, t_semi_mask); divergence scores -inf.
double tuning_fitness(const TrainConfig& base, const Dataset& partitioned,
                      const std::vector<std::size_t>& eval_items, long fitness_iterations,
                      std::span<const double> p);

TuneResult pso_tune(const TrainConfig& base, const Dataset& data, const TuneOptions& options,
                    const TraceSink& sink = {});

struct ExperimentRow {
  std::string model;  // baseline, +adv, +adv+semi
  double fraction = 0;
  MetricReport report;
};

/// For each fraction trains the three nested configurations from the same
/// seeds and evaluates them on `heldout`.
std::vector<ExperimentRow> ablation(const TrainConfig& config, const Dataset& data,
                                    const Dataset& heldout, std::span<const double> fractions,
                                    const std::function<void(const ExperimentRow&)>& on_row = {});

void write_ablation_csv(std::ostream& out, std::span<const ExperimentRow> rows);

}  // namespace semipso
