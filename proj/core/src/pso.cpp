#include "semipso/pso.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "semipso/csv.hpp"
#include "semipso/error.hpp"
#include "semipso/rng.hpp"

namespace semipso {
namespace {

double score_or_neg_inf(double f, SwarmTrace& trace) {
  ++trace.evaluations;
  if (std::isnan(f)) {
    ++trace.non_finite_evaluations;
    return -std::numeric_limits<double>::infinity();
  }
  return f;
}

GenerationRecord summarize(int generation, double best, const std::vector<Particle>& swarm) {
  double acc = 0;
  for (const auto& p : swarm) acc += p.best_fitness;
  return {generation, best, acc / static_cast<double>(swarm.size())};
}

}  // namespace

void PsoConfig::validate() const {
  require(!lower.empty() && lower.size() == upper.size(), ErrorCode::kInvalidConfig,
          "pso bounds must be non-empty and of equal dimension");
  for (std::size_t i = 0; i < lower.size(); ++i) {
    require(std::isfinite(lower[i]) && std::isfinite(upper[i]) && lower[i] <= upper[i],
            ErrorCode::kInvalidConfig,
            "pso bound " + std::to_string(i) + " is empty or non-finite");
  }
  require(generations >= 1, ErrorCode::kInvalidConfig, "pso generations must be >= 1");
  require(population >= 1, ErrorCode::kInvalidConfig, "pso population must be >= 1");
  require(omega_min <= omega_max, ErrorCode::kInvalidConfig, "pso requires omega_min <= omega_max");
}

PsoConfig PsoConfig::hyperparameter_defaults() {
  PsoConfig c;
  c.lower = {0.0, 0.0, 0.0};
  c.upper = {0.01, 0.3, 0.5};
  return c;
}

double inertia(int g, double omega_max, double omega_min, int n_iter) {
  require(n_iter >= 1, ErrorCode::kInvalidArgument, "inertia: n_iter must be >= 1");
  require(g >= 0 && g <= n_iter, ErrorCode::kInvalidArgument,
          "inertia: generation " + std::to_string(g) + " outside [0, n_iter]");
  // Convex-combination form keeps the endpoints and midpoint exact.
  return (omega_max * (n_iter - g) + omega_min * g) / n_iter;
}

std::vector<double> velocity_update(const Particle& particle, std::span<const double> swarm_best,
                                    double omega, double phi_p, double phi_g, double r_p,
                                    double r_g) {
  const std::size_t d = particle.position.size();
  require(particle.velocity.size() == d && particle.best_position.size() == d &&
              swarm_best.size() == d,
          ErrorCode::kShapeMismatch, "velocity_update: dimension mismatch");
  std::vector<double> v(d);
  for (std::size_t i = 0; i < d; ++i) {
    v[i] = omega * particle.velocity[i] +
           phi_p * r_p * (particle.best_position[i] - particle.position[i]) +
           phi_g * r_g * (swarm_best[i] - particle.position[i]);
  }
  return v;
}

PsoResult pso_optimize(const FitnessFn& fitness, const PsoConfig& config, const TraceSink& sink) {
  config.validate();
  const std::size_t dim = config.lower.size();
  Rng rng(config.seed);
  PsoResult result;
  auto& swarm = result.particles;
  swarm.resize(static_cast<std::size_t>(config.population));
  bool have_best = false;

  for (auto& p : swarm) {
    p.position.resize(dim);
    for (std::size_t k = 0; k < dim; ++k) {
      p.position[k] = uniform(rng, config.lower[k], config.upper[k]);
    }
    p.best_position = p.position;
    p.best_fitness = score_or_neg_inf(fitness(p.position), result.trace);
    // The first particle seeds the swarm best even when it scores -inf, so the
    // velocity update always has a reference point.
    if (!have_best || p.best_fitness > result.best_fitness) {
      result.best_position = p.best_position;
      result.best_fitness = p.best_fitness;
      have_best = true;
    }
    p.velocity.resize(dim);
    for (std::size_t k = 0; k < dim; ++k) {
      const double span = std::abs(config.upper[k] - config.lower[k]);
      p.velocity[k] = uniform(rng, -span, span);
    }
  }
  result.trace.records.push_back(summarize(0, result.best_fitness, swarm));
  if (sink) sink(result.trace.records.back());

  for (int g = 1; g <= config.generations; ++g) {
    const double omega = inertia(g, config.omega_max, config.omega_min, config.generations);
    for (auto& p : swarm) {
      const double r_p = uniform01(rng);
      const double r_g = uniform01(rng);
      p.velocity = velocity_update(p, result.best_position, omega, config.phi_p, config.phi_g,
                                   r_p, r_g);
      for (std::size_t k = 0; k < dim; ++k) {
        const double moved = p.position[k] + p.velocity[k];
        const double clamped = std::clamp(moved, config.lower[k], config.upper[k]);
        if (clamped != moved) p.velocity[k] = 0.0;
        p.position[k] = clamped;
      }
      const double f = score_or_neg_inf(fitness(p.position), result.trace);
      if (f > p.best_fitness) {
        p.best_position = p.position;
        p.best_fitness = f;
        if (p.best_fitness > result.best_fitness) {
          result.best_position = p.best_position;
          result.best_fitness = p.best_fitness;
        }
      }
    }
    result.trace.records.push_back(summarize(g, result.best_fitness, swarm));
    if (sink) sink(result.trace.records.back());
  }
  return result;
}

void write_trace_csv(std::ostream& out, const SwarmTrace& trace) {
  out << "generation,best_fitness,mean_personal_best\n";
  for (const auto& r : trace.records) {
    out << r.generation << ',' << format_real(r.best_fitness) << ','
        << format_real(r.mean_personal_best) << '\n';
  }
}

}  // namespace semipso
