#include "semipso/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "semipso/augment.hpp"
#include "semipso/csv.hpp"
#include "semipso/error.hpp"
#include "semipso/ops.hpp"
#include "semipso/rng.hpp"

namespace semipso {
namespace {

// Substream tags under config.seed.
constexpr std::uint64_t kLabeledStream = 1;
constexpr std::uint64_t kUnlabeledStream = 2;
constexpr std::uint64_t kFitnessSubsetStream = 3;
constexpr std::uint64_t kSegInitStream = 10;
constexpr std::uint64_t kDiscInitStream = 11;

template <typename F>
decltype(auto) with_precision(Precision p, F&& f) {
  if (p == Precision::kDouble) return f.template operator()<double>();
  return f.template operator()<float>();
}

std::uint64_t parse_seed(const std::string& key, const std::string& value) {
  const long v = parse_long(key, value);
  require(v >= 0, ErrorCode::kInvalidConfig, "'" + key + "' must be nonnegative");
  return static_cast<std::uint64_t>(v);
}

int parse_int(const std::string& key, const std::string& value) {
  const long v = parse_long(key, value);
  require(v >= -(1L << 30) && v <= (1L << 30), ErrorCode::kInvalidConfig,
          "'" + key + "' is out of range");
  return static_cast<int>(v);
}

int training_input_size(const TrainConfig& config, const Dataset& data) {
  if (config.crop_size > 0) return config.crop_size;
  require(!data.labeled.empty(), ErrorCode::kInvalidArgument, "training needs labeled items");
  const Shape4 s = data.items[data.labeled.front()].image.shape();
  return std::min(s.h, s.w);
}

template <Real T>
std::vector<Tensor4<T>> collect_grads(const Tape<T>& tape, const BoundParams<T>& params) {
  std::vector<Tensor4<T>> out;
  out.reserve(params.size());
  for (const auto& v : params) out.push_back(tape.grad(v));
  return out;
}

template <Real T>
void apply_adam(ModelParams<T>& params, const std::vector<Tensor4<T>>& grads,
                const AdamHyper& hyper) {
  for (std::size_t i = 0; i < params.items.size(); ++i) {
    adam_step(params.items[i].value, grads[i], params.items[i].adam, hyper);
  }
}

template <Real T>
void copy_params(ModelParams<T>& dst, const ModelParams<T>& src, const std::string& what) {
  require(dst.size() == src.size(), ErrorCode::kBadCheckpoint,
          what + " parameter count differs from the configuration");
  for (std::size_t i = 0; i < dst.size(); ++i) {
    require(dst.items[i].name == src.items[i].name &&
                dst.items[i].value.shape() == src.items[i].value.shape(),
            ErrorCode::kBadCheckpoint,
            what + " parameter '" + src.items[i].name + "' does not match the configuration");
  }
  dst = src;
}

void write_eval_row(std::ostream& out, long iteration, const MetricReport& r) {
  out << iteration << ',' << format_real(r.roc_auc) << ',' << format_real(r.pr_auc) << ','
      << format_real(r.score) << '\n';
}

}  // namespace

std::string_view precision_name(Precision p) noexcept {
  return p == Precision::kDouble ? "double" : "float";
}

void TrainConfig::set(const std::string& raw_key, const std::string& value) {
  const std::string key = normalize_key(raw_key);
  if (key == "iterations") iterations = parse_long(key, value);
  else if (key == "batch_size") batch_size = parse_int(key, value);
  else if (key == "lr_seg") lr_seg = parse_double(key, value);
  else if (key == "lr_disc") lr_disc = parse_double(key, value);
  else if (key == "beta1") beta1 = parse_double(key, value);
  else if (key == "beta2") beta2 = parse_double(key, value);
  else if (key == "warmup_iters") warmup_iters = parse_long(key, value);
  else if (key == "lambda_adv") weights.lambda_adv = parse_double(key, value);
  else if (key == "lambda_semi_adv") weights.lambda_semi_adv = parse_double(key, value);
  else if (key == "lambda_semi_bce") weights.lambda_semi_bce = parse_double(key, value);
  else if (key == "t_semi_mask") weights.t_semi_mask = parse_double(key, value);
  else if (key == "gate_semi_adv") weights.gate_semi_adv = parse_bool(key, value);
  else if (key == "label_fraction") label_fraction = parse_double(key, value);
  else if (key == "seed") seed = parse_seed(key, value);
  else if (key == "split_seed") split_seed = parse_seed(key, value);
  else if (key == "crop_size") crop_size = parse_int(key, value);
  else if (key == "augment") augment = parse_bool(key, value);
  else if (key == "base_channels") segmenter.base_channels = parse_int(key, value);
  else if (key == "depth") segmenter.depth = parse_int(key, value);
  else if (key == "slope") segmenter.slope = parse_double(key, value);
  else if (key == "disc_layers") disc_layers = parse_int(key, value);
  else if (key == "log_every") log_every = parse_long(key, value);
  else if (key == "eval_every") eval_every = parse_long(key, value);
  else if (key == "precision") {
    if (value == "float") precision = Precision::kFloat;
    else if (value == "double") precision = Precision::kDouble;
    else fail(ErrorCode::kInvalidConfig, "'precision' must be float or double, got '" + value + "'");
  } else {
    fail(ErrorCode::kInvalidConfig, "unknown training key '" + key + "'");
  }
}

void TrainConfig::apply(const KeyValues& values) {
  for (const auto& [k, v] : values) set(k, v);
}

std::string TrainConfig::to_text() const {
  std::ostringstream out;
  const auto b = [](bool v) { return v ? "true" : "false"; };
  out << "iterations = " << iterations << '\n'
      << "batch_size = " << batch_size << '\n'
      << "lr_seg = " << format_real(lr_seg) << '\n'
      << "lr_disc = " << format_real(lr_disc) << '\n'
      << "beta1 = " << format_real(beta1) << '\n'
      << "beta2 = " << format_real(beta2) << '\n'
      << "warmup_iters = " << warmup_iters << '\n'
      << "lambda_adv = " << format_real(weights.lambda_adv) << '\n'
      << "lambda_semi_adv = " << format_real(weights.lambda_semi_adv) << '\n'
      << "lambda_semi_bce = " << format_real(weights.lambda_semi_bce) << '\n'
      << "t_semi_mask = " << format_real(weights.t_semi_mask) << '\n'
      << "gate_semi_adv = " << b(weights.gate_semi_adv) << '\n'
      << "label_fraction = " << format_real(label_fraction) << '\n'
      << "seed = " << seed << '\n'
      << "split_seed = " << split_seed << '\n'
      << "crop_size = " << crop_size << '\n'
      << "augment = " << b(augment) << '\n'
      << "base_channels = " << segmenter.base_channels << '\n'
      << "depth = " << segmenter.depth << '\n'
      << "slope = " << format_real(segmenter.slope) << '\n'
      << "disc_layers = " << disc_layers << '\n'
      << "log_every = " << log_every << '\n'
      << "eval_every = " << eval_every << '\n'
      << "precision = " << precision_name(precision) << '\n';
  return out.str();
}

TrainConfig TrainConfig::from_text(const std::string& text) {
  TrainConfig c;
  c.apply(parse_key_values(text, "<checkpoint config>"));
  return c;
}

long TrainConfig::resolved_warmup() const {
  return warmup_iters < 0 ? iterations / 4 : warmup_iters;
}

LossWeights TrainConfig::loss_weights() const {
  LossWeights w = weights;
  w.warmup_iters = resolved_warmup();
  return w;
}

DiscriminatorConfig TrainConfig::discriminator(int input_size) const {
  return disc_layers == 0 ? DiscriminatorConfig::for_input(input_size)
                          : DiscriminatorConfig::toy(disc_layers);
}

void TrainConfig::validate() const {
  require(iterations >= 0, ErrorCode::kInvalidConfig, "iterations must be >= 0");
  require(batch_size >= 1, ErrorCode::kInvalidConfig, "batch_size must be >= 1");
  require(lr_seg >= 0 && lr_disc >= 0, ErrorCode::kInvalidConfig,
          "learning rates must be nonnegative");
  require(beta1 >= 0 && beta1 < 1 && beta2 >= 0 && beta2 < 1, ErrorCode::kInvalidConfig,
          "Adam betas must lie in [0, 1)");
  require(resolved_warmup() <= iterations, ErrorCode::kInvalidConfig,
          "warmup_iters must not exceed iterations");
  require(label_fraction > 0 && label_fraction <= 1, ErrorCode::kInvalidConfig,
          "label_fraction must lie in (0, 1]");
  require(crop_size >= 0, ErrorCode::kInvalidConfig, "crop_size must be >= 0");
  require(disc_layers == 0 || (disc_layers >= 3 && disc_layers <= 5), ErrorCode::kInvalidConfig,
          "disc_layers must be 0 (auto) or 3..5");
  require(log_every >= 1 && eval_every >= 0, ErrorCode::kInvalidConfig,
          "log_every must be >= 1 and eval_every >= 0");
  weights.validate();
  segmenter.validate();
  if (crop_size > 0) {
    require(crop_size % segmenter.divisor() == 0, ErrorCode::kInvalidConfig,
            "crop_size must be a multiple of " + std::to_string(segmenter.divisor()));
  }
}

template <Real T>
Networks<T> Networks<T>::init(const TrainConfig& config, int input_size) {
  Networks n;
  n.seg_config = config.segmenter;
  n.disc_config = config.discriminator(input_size);
  n.disc_config.slope = config.segmenter.slope;
  n.seg = init_params<T>(n.seg_config, derive_seed(config.seed, {kSegInitStream}));
  n.disc = init_params<T>(n.disc_config, derive_seed(config.seed, {kDiscInitStream}));
  return n;
}

template <Real T>
Batch<T> sample_batch(const Dataset& data, std::span<const std::size_t> pool,
                      const TrainConfig& config, bool with_masks, std::uint64_t stream_seed) {
  require(!pool.empty(), ErrorCode::kInvalidArgument, "cannot sample a batch from an empty pool");
  Rng rng(stream_seed);
  std::vector<Tensor4<T>> images;
  std::vector<Tensor4<T>> masks;
  for (int b = 0; b < config.batch_size; ++b) {
    const Sample& s = data.items[pool[uniform_index(rng, pool.size())]];
    const Shape4 shape = s.image.shape();
    require(!with_masks || s.has_mask(), ErrorCode::kMissingMasks,
            "labeled item '" + s.name + "' has no mask");
    Tensor4<T> image = s.image.cast<T>();
    Tensor4<T> mask = with_masks ? s.mask.cast<T>() : Tensor4<T>(Shape4{1, 1, shape.h, shape.w});
    const int crop = config.crop_size > 0 ? config.crop_size : std::min(shape.h, shape.w);
    if (config.augment) {
      auto out = random_scale_crop(image, mask, crop, rng);
      image = std::move(out.image);
      mask = std::move(out.mask);
    } else if (crop != shape.h || crop != shape.w) {
      const int y0 = static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(shape.h - crop + 1)));
      const int x0 = static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(shape.w - crop + 1)));
      auto out = scale_crop(image, mask, 1.0, y0, x0, crop);
      image = std::move(out.image);
      mask = std::move(out.mask);
    }
    images.push_back(std::move(image));
    masks.push_back(std::move(mask));
  }
  Batch<T> batch;
  batch.images = stack_batch<T>(images);
  if (with_masks) batch.masks = stack_batch<T>(masks);
  return batch;
}

template <Real T>
PhaseResult<T> discriminator_phase(const Networks<T>& nets, const Batch<T>& labeled) {
  Tape<T> tape;
  const auto sp = bind(tape, nets.seg, false);
  const auto dp = bind(tape, nets.disc, true);
  const Var<T> s = segmenter_forward(nets.seg_config, sp, tape.constant(labeled.images));
  const Var<T> d_fake = discriminator_forward(nets.disc_config, dp, s);
  const Var<T> d_real = discriminator_forward(nets.disc_config, dp, tape.constant(labeled.masks));
  const Var<T> loss = discriminator_loss(d_fake, d_real);
  tape.backward(loss);
  PhaseResult<T> r;
  r.loss = static_cast<double>(loss.value()[0]);
  r.seg_grads = collect_grads(tape, sp);
  r.disc_grads = collect_grads(tape, dp);
  return r;
}

template <Real T>
PhaseResult<T> segmenter_phase(const Networks<T>& nets, const LossWeights& weights,
                               const Batch<T>& labeled, const Batch<T>& unlabeled,
                               long iteration) {
  Tape<T> tape;
  const auto sp = bind(tape, nets.seg, true);
  const auto dp = bind(tape, nets.disc, false);
  const EffectiveWeights ew = effective_weights(weights, iteration);

  std::vector<Var<T>> terms;
  std::vector<T> coefs;
  LossTerms lt;

  const Var<T> s_l = segmenter_forward(nets.seg_config, sp, tape.constant(labeled.images));
  const Var<T> bce = bce_loss(s_l, labeled.masks);
  lt.bce = static_cast<double>(bce.value()[0]);
  terms.push_back(bce);
  coefs.push_back(T(1));

  if (weights.lambda_adv != 0) {
    const Var<T> adv = adv_loss(discriminator_forward(nets.disc_config, dp, s_l));
    lt.adv = static_cast<double>(adv.value()[0]);
    if (ew.adv != 0) {
      terms.push_back(adv);
      coefs.push_back(static_cast<T>(ew.adv));
    }
  }

  const bool semi = weights.lambda_semi_adv != 0 || weights.lambda_semi_bce != 0;
  if (semi && !unlabeled.empty()) {
    const Var<T> s_u = segmenter_forward(nets.seg_config, sp, tape.constant(unlabeled.images));
    const Var<T> d_u = discriminator_forward(nets.disc_config, dp, s_u);
    if (weights.lambda_semi_adv != 0) {
      const Var<T> semi_adv = adv_loss(d_u);
      lt.semi_adv = static_cast<double>(semi_adv.value()[0]);
      if (ew.semi_adv != 0) {
        terms.push_back(semi_adv);
        coefs.push_back(static_cast<T>(ew.semi_adv));
      }
    }
    if (weights.lambda_semi_bce != 0) {
      const T threshold = static_cast<T>(weights.t_semi_mask);
      const Var<T> semi_bce = semi_bce_loss(s_u, d_u.value(), threshold);
      lt.semi_bce = static_cast<double>(semi_bce.value()[0]);
      const Tensor4<T> mask = confidence_mask(d_u.value(), threshold);
      lt.masked_pixel_fraction = static_cast<double>(mask.sum()) / static_cast<double>(mask.numel());
      if (ew.semi_bce != 0) {
        terms.push_back(semi_bce);
        coefs.push_back(static_cast<T>(ew.semi_bce));
      }
    }
  }

  const Var<T> total = linear_combination<T>(terms, coefs);
  tape.backward(total);
  PhaseResult<T> r;
  r.breakdown = seg_total_loss(lt, weights, iteration);
  r.loss = r.breakdown.total;
  r.seg_grads = collect_grads(tape, sp);
  r.disc_grads = collect_grads(tape, dp);
  return r;
}

template <Real T>
StepRecord train_step(Networks<T>& nets, const TrainConfig& config, const Batch<T>& labeled,
                      const Batch<T>& unlabeled, long iteration) {
  StepRecord rec;
  rec.iteration = iteration;

  const PhaseResult<T> d = discriminator_phase(nets, labeled);
  if (!std::isfinite(d.loss)) {
    throw TrainingDiverged(iteration, "discriminator loss is not finite at iteration " +
                                          std::to_string(iteration));
  }
  apply_adam(nets.disc, d.disc_grads, AdamHyper{config.lr_disc, config.beta1, config.beta2});
  rec.d_loss = d.loss;

  const PhaseResult<T> s = segmenter_phase(nets, config.loss_weights(), labeled, unlabeled, iteration);
  if (!std::isfinite(s.loss)) {
    throw TrainingDiverged(iteration, "segmenter loss is not finite at iteration " +
                                          std::to_string(iteration));
  }
  apply_adam(nets.seg, s.seg_grads, AdamHyper{config.lr_seg, config.beta1, config.beta2});
  rec.seg = s.breakdown;
  return rec;
}

template <Real T>
Trainer<T>::Trainer(TrainConfig config, Dataset data)
    : config_(std::move(config)), data_(std::move(data)) {
  config_.validate();
  data_.validate();
  require(!data_.labeled.empty(), ErrorCode::kInvalidArgument, "training needs labeled items");
  nets_ = Networks<T>::init(config_, training_input_size(config_, data_));
}

template <Real T>
Trainer<T>::Trainer(const Checkpoint<T>& checkpoint, Dataset data)
    : Trainer(TrainConfig::from_text(checkpoint.config_text), std::move(data)) {
  copy_params(nets_.seg, checkpoint.segmenter, "segmenter");
  copy_params(nets_.disc, checkpoint.discriminator, "discriminator");
  require(checkpoint.iteration >= 0, ErrorCode::kBadCheckpoint, "negative checkpoint iteration");
  iteration_ = checkpoint.iteration;
}

template <Real T>
StepRecord Trainer<T>::step() {
  const Batch<T> labeled = sample_batch<T>(data_, data_.labeled, config_, true,
                                           derive_seed(config_.seed, {kLabeledStream,
                                                                      static_cast<std::uint64_t>(iteration_)}));
  Batch<T> unlabeled;
  const bool semi = config_.weights.lambda_semi_adv != 0 || config_.weights.lambda_semi_bce != 0;
  if (semi && !data_.unlabeled.empty()) {
    unlabeled = sample_batch<T>(data_, data_.unlabeled, config_, false,
                                derive_seed(config_.seed, {kUnlabeledStream,
                                                           static_cast<std::uint64_t>(iteration_)}));
  }
  const StepRecord rec = train_step(nets_, config_, labeled, unlabeled, iteration_);
  ++iteration_;
  return rec;
}

template <Real T>
void Trainer<T>::run_until(long iteration, const std::function<void(const StepRecord&)>& on_step) {
  while (iteration_ < iteration) {
    const StepRecord rec = step();
    if (on_step) on_step(rec);
  }
}

template <Real T>
Checkpoint<T> Trainer<T>::checkpoint() const {
  return Checkpoint<T>{config_.to_text(), iteration_, nets_.seg, nets_.disc};
}

template <Real T>
MetricReport evaluate(const SegmenterConfig& config, const ModelParams<T>& params,
                      const Dataset& data) {
  std::vector<Tensor4<T>> preds;
  std::vector<Tensor4<T>> masks;
  std::vector<Tensor4<T>> eval_masks;
  bool all_eval = true;
  for (const Sample& s : data.items) {
    if (!s.has_mask()) continue;
    preds.push_back(segment<T>(config, params, s.image.cast<T>()));
    masks.push_back(s.mask.cast<T>());
    all_eval = all_eval && !s.eval_mask.empty();
    if (!s.eval_mask.empty()) eval_masks.push_back(s.eval_mask.cast<T>());
  }
  require(!preds.empty(), ErrorCode::kMissingMasks, "evaluation needs items with masks");
  if (!all_eval) eval_masks.clear();
  return pooled_report<T>(preds, masks, eval_masks);
}

MetricReport evaluate_checkpoint(const std::filesystem::path& path, const Dataset& data) {
  const Precision p =
      checkpoint_real_bytes(path) == 8 ? Precision::kDouble : Precision::kFloat;
  return with_precision(p, [&]<typename T>() {
    const Checkpoint<T> ck = load_checkpoint<T>(path);
    const TrainConfig config = TrainConfig::from_text(ck.config_text);
    return evaluate<T>(config.segmenter, ck.segmenter, data);
  });
}

void write_history_header(std::ostream& out) {
  out << "iteration,bce,adv,semi_adv,semi_bce,total,d_loss\n";
}

void write_history_row(std::ostream& out, const StepRecord& r) {
  out << r.iteration << ',' << format_real(r.seg.bce) << ',' << format_real(r.seg.adv) << ','
      << format_real(r.seg.semi_adv) << ',' << format_real(r.seg.semi_bce) << ','
      << format_real(r.seg.total) << ',' << format_real(r.d_loss) << '\n';
}

namespace {

template <Real T>
TrainSummary run_training(const TrainConfig& requested, const Dataset& data,
                          const Dataset* heldout, const TrainOutputs& outputs,
                          const TrainOptions& options) {
  std::optional<Checkpoint<T>> resume;
  TrainConfig config = requested;
  if (options.resume_from) {
    resume = load_checkpoint<T>(*options.resume_from);
    config = TrainConfig::from_text(resume->config_text);
  }
  const Dataset part =
      options.keep_partition ? data : split_labeled(data, config.label_fraction, config.split_seed);
  Trainer<T> trainer = resume ? Trainer<T>(*resume, part) : Trainer<T>(config, part);

  const auto mode = resume ? std::ios::app : std::ios::trunc;
  std::ofstream history(outputs.history, std::ios::binary | mode);
  require(history.good(), ErrorCode::kIoFailure, "cannot write " + outputs.history.string());
  if (!resume) write_history_header(history);

  const bool periodic_eval = heldout != nullptr && config.eval_every > 0;
  std::ofstream eval_out;
  if (periodic_eval) {
    eval_out.open(outputs.eval_history, std::ios::binary | mode);
    require(eval_out.good(), ErrorCode::kIoFailure,
            "cannot write " + outputs.eval_history.string());
    if (!resume) eval_out << "iteration,roc_auc,pr_auc,score\n";
  }

  TrainSummary summary;
  const long stop = options.stop_at ? std::min(*options.stop_at, config.iterations)
                                    : config.iterations;
  trainer.run_until(stop, [&](const StepRecord& rec) {
    if (!summary.first) summary.first = rec;
    summary.last = rec;
    if (rec.iteration % config.log_every == 0 || rec.iteration + 1 == config.iterations) {
      write_history_row(history, rec);
    }
    if (periodic_eval && (rec.iteration + 1) % config.eval_every == 0) {
      const auto& nets = trainer.networks();
      write_eval_row(eval_out, rec.iteration + 1, evaluate<T>(nets.seg_config, nets.seg, *heldout));
    }
  });
  history.flush();
  require(history.good(), ErrorCode::kIoFailure, "failed writing " + outputs.history.string());

  save_checkpoint(outputs.checkpoint, trainer.checkpoint());
  summary.iterations = trainer.iteration();
  if (heldout != nullptr) {
    const auto& nets = trainer.networks();
    summary.heldout = evaluate<T>(nets.seg_config, nets.seg, *heldout);
  }
  return summary;
}

}  // namespace

TrainSummary train(const TrainConfig& config, const Dataset& data, const Dataset* heldout,
                   const TrainOutputs& outputs, const TrainOptions& options) {
  Precision p = config.precision;
  if (options.resume_from) {
    p = checkpoint_real_bytes(*options.resume_from) == 8 ? Precision::kDouble : Precision::kFloat;
  }
  return with_precision(p, [&]<typename T>() {
    return run_training<T>(config, data, heldout, outputs, options);
  });
}

template <Real T>
Networks<T> train_networks(const TrainConfig& config, const Dataset& partitioned) {
  Trainer<T> trainer(config, partitioned);
  trainer.run_until(config.iterations);
  return trainer.networks();
}

std::vector<std::size_t> fitness_subset(const Dataset& partitioned, int count, std::uint64_t seed) {
  std::vector<std::size_t> candidates;
  for (std::size_t i : partitioned.unlabeled) {
    if (partitioned.items[i].has_mask()) candidates.push_back(i);
  }
  if (candidates.empty()) {
    for (std::size_t i = 0; i < partitioned.size(); ++i) {
      if (partitioned.items[i].has_mask()) candidates.push_back(i);
    }
  }
  require(!candidates.empty(), ErrorCode::kMissingMasks, "tuning needs items with masks");
  Rng rng(seed);
  for (std::size_t i = candidates.size(); i > 1; --i) {
    std::swap(candidates[i - 1], candidates[uniform_index(rng, i)]);
  }
  candidates.resize(std::min(candidates.size(), static_cast<std::size_t>(std::max(count, 1))));
  std::sort(candidates.begin(), candidates.end());
  return candidates;
}

double tuning_fitness(const TrainConfig& base, const Dataset& partitioned,
                      const std::vector<std::size_t>& eval_items, long fitness_iterations,
                      std::span<const double> p) {
  require(p.size() == 3, ErrorCode::kInvalidArgument, "tuning expects a 3-component position");
  TrainConfig cfg = base;
  cfg.iterations = fitness_iterations;
  cfg.warmup_iters = -1;
  cfg.eval_every = 0;
  cfg.weights.lambda_semi_adv = p[0];
  cfg.weights.lambda_semi_bce = p[1];
  cfg.weights.t_semi_mask = p[2];
  const Dataset eval_set = subset(partitioned, eval_items);
  try {
    return with_precision(cfg.precision, [&]<typename T>() {
      const Networks<T> nets = train_networks<T>(cfg, partitioned);
      return evaluate<T>(nets.seg_config, nets.seg, eval_set).score;
    });
  } catch (const TrainingDiverged&) {
    return -std::numeric_limits<double>::infinity();
  }
}

TuneResult pso_tune(const TrainConfig& base, const Dataset& data, const TuneOptions& options,
                    const TraceSink& sink) {
  base.validate();
  require(options.pso.lower.size() == 3, ErrorCode::kInvalidConfig,
          "tuning searches exactly three hyperparameters");
  const Dataset part = split_labeled(data, base.label_fraction, base.split_seed);
  const auto items = fitness_subset(part, options.fitness_images,
                                    derive_seed(base.seed, {kFitnessSubsetStream}));
  const long iters = options.fitness_iterations > 0 ? options.fitness_iterations
                                                    : std::max(100L, base.iterations / 20);
  const FitnessFn fitness = [&](std::span<const double> p) {
    return tuning_fitness(base, part, items, iters, p);
  };
  TuneResult r;
  r.pso = pso_optimize(fitness, options.pso, sink);
  std::copy_n(r.pso.best_position.begin(), 3, r.best.begin());
  return r;
}

std::vector<ExperimentRow> ablation(const TrainConfig& config, const Dataset& data,
                                    const Dataset& heldout, std::span<const double> fractions,
                                    const std::function<void(const ExperimentRow&)>& on_row) {
  config.validate();
  std::vector<ExperimentRow> rows;
  for (double fraction : fractions) {
    const Dataset part = split_labeled(data, fraction, config.split_seed);
    for (int variant = 0; variant < 3; ++variant) {
      TrainConfig cfg = config;
      cfg.label_fraction = fraction;
      if (variant < 2) {
        cfg.weights.lambda_semi_adv = 0;
        cfg.weights.lambda_semi_bce = 0;
      }
      if (variant == 0) cfg.weights.lambda_adv = 0;
      ExperimentRow row;
      row.model = variant == 0 ? "baseline" : variant == 1 ? "+adv" : "+adv+semi";
      row.fraction = fraction;
      row.report = with_precision(cfg.precision, [&]<typename T>() {
        const Networks<T> nets = train_networks<T>(cfg, part);
        return evaluate<T>(nets.seg_config, nets.seg, heldout);
      });
      if (on_row) on_row(row);
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

void write_ablation_csv(std::ostream& out, std::span<const ExperimentRow> rows) {
  out << "model,fraction,roc_auc,pr_auc,score\n";
  for (const auto& r : rows) {
    out << r.model << ',' << format_real(r.fraction) << ',' << format_real(r.report.roc_auc)
        << ',' << format_real(r.report.pr_auc) << ',' << format_real(r.report.score) << '\n';
  }
}

#define SEMIPSO_INSTANTIATE_TRAINER(T)                                                        \
  template struct Networks<T>;                                                                \
  template Batch<T> sample_batch<T>(const Dataset&, std::span<const std::size_t>,             \
                                    const TrainConfig&, bool, std::uint64_t);                 \
  template PhaseResult<T> discriminator_phase(const Networks<T>&, const Batch<T>&);           \
  template PhaseResult<T> segmenter_phase(const Networks<T>&, const LossWeights&,             \
                                          const Batch<T>&, const Batch<T>&, long);            \
  template StepRecord train_step(Networks<T>&, const TrainConfig&, const Batch<T>&,           \
                                 const Batch<T>&, long);                                      \
  template class Trainer<T>;                                                                  \
  template MetricReport evaluate<T>(const SegmenterConfig&, const ModelParams<T>&,            \
                                    const Dataset&);                                          \
  template Networks<T> train_networks<T>(const TrainConfig&, const Dataset&);

SEMIPSO_INSTANTIATE_TRAINER(float)
SEMIPSO_INSTANTIATE_TRAINER(double)

}  // namespace semipso
