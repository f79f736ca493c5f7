#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <span>
#include <vector>

namespace semipso {

/// Global-best particle swarm maximiser over a box.
struct PsoConfig {
  std::vector<double> lower;
  std::vector<double> upper;
  int generations = 10;
  int population = 3;
  double phi_p = 1.0;
  double phi_g = 1.0;
  double omega_max = 0.5;
  double omega_min = 0.1;
  std::uint64_t seed = 0;

  void validate() const;

  /// Search box for (lambda_semi_adv, lambda_semi_bce, t_semi_mask) with
  /// G = 10, S = 3, phi_p = phi_g = 1, omega 0.5 -> 0.1.
  static PsoConfig hyperparameter_defaults();
};

struct Particle {
  std::vector<double> position;
  std::vector<double> velocity;
  std::vector<double> best_position;
  double best_fitness = -std::numeric_limits<double>::infinity();
};

struct GenerationRecord {
  int generation = 0;  // 0 is the initial swarm
  double best_fitness = 0;
  double mean_personal_best = 0;

  friend bool operator==(const GenerationRecord&, const GenerationRecord&) = default;
};

struct SwarmTrace {
  std::vector<GenerationRecord> records;
  std::size_t evaluations = 0;
  /// Evaluations whose fitness was NaN and was scored as -inf.
  std::size_t non_finite_evaluations = 0;
};

struct PsoResult {
  std::vector<double> best_position;
  double best_fitness = -std::numeric_limits<double>::infinity();
  std::vector<Particle> particles;
  SwarmTrace trace;
};

using FitnessFn = std::function<double(std::span<const double>)>;
using TraceSink = std::function<void(const GenerationRecord&)>;

/// omega_g = omega_max - (omega_max - omega_min) * g / n_iter.
double inertia(int g, double omega_max, double omega_min, int n_iter);

/// omega*v + phi_p*r_p*(best - x) + phi_g*r_g*(swarm_best - x).
std::vector<double> velocity_update(const Particle& particle, std::span<const double> swarm_best,
                                    double omega, double phi_p, double phi_g, double r_p,
                                    double r_g);

/// Runs the swarm for `generations` rounds after an evaluated initial swarm:
/// population * (generations + 1) fitness calls in total. Improvements must
/// be strict, positions are clamped to the box (zeroing the clamped velocity
/// component) and NaN fitness counts as -inf. Draw order: per particle the
/// position then the velocity at initialisation; per particle r_p then r_g in
/// each generation.
PsoResult pso_optimize(const FitnessFn& fitness, const PsoConfig& config,
                       const TraceSink& sink = {});

/// CSV with header `generation,best_fitness,mean_personal_best`.
void write_trace_csv(std::ostream& out, const SwarmTrace& trace);

}  // namespace semipso
