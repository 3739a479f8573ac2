#pragma once

// Orchestration of the delay sweep, the heralded-state timeline and the
// cross-module validation suite.

#include <array>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "raman/config.hpp"

namespace raman {

enum class Variant { noisy, ideal, mixture };

const char* variant_name(Variant v);
Variant parse_variant(const std::string& name);

struct SweepRecord {
  double delta_t_ps = 0.0;
  Variant variant = Variant::noisy;
  double g2 = 0.0;
  double p_s = 0.0;
  double p_a = 0.0;
  double p_sa = 0.0;
};

/// Runs fn(0..n-1) on `jobs` worker threads (0 = hardware concurrency).
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn);

/// Detection statistics of every delay for each variant, sorted by variant then delay.
///   noisy:   configured detectors and four-wave mixing
///   ideal:   unit efficiency, no dark counts, no four-wave mixing
///   mixture: probability-weighted single-isotope runs (beta = (1,0) and (0,1))
std::vector<SweepRecord> run_sweep(const RunConfig& config, std::span<const Variant> variants,
                                   int jobs = 0);

/// g2 of the noisy variant at the given delays (convenience for analyses).
std::vector<double> g2_curve(const RunConfig& config, std::span<const double> delays, int jobs = 0);

struct HeraldRecord {
  double t_ps = 0.0;  ///< time after the end of the write window
  std::array<double, 3> pop_b1{};
  std::array<double, 3> pop_b2{};
  double e_n = 0.0;
  double herald_prob = 0.0;
};

/// Heralds the post-write state with the configured Stokes detector and evolves the
/// conditional phonon state with the bath alone.
std::vector<HeraldRecord> run_herald(const RunConfig& config);

struct CheckResult {
  std::string name;
  double deviation = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  std::string detail;
};

std::vector<CheckResult> run_validation(const RunConfig& config, int jobs = 0);

/// Local maxima of a sampled curve, refined by parabolic interpolation.
std::vector<double> local_maxima(std::span<const double> x, std::span<const double> y);
std::vector<double> local_minima(std::span<const double> x, std::span<const double> y);

struct BiExponentialFit {
  double a1 = 0.0, tau1 = 0.0;  ///< slower component
  double a2 = 0.0, tau2 = 0.0;  ///< faster component
  double r_squared = 0.0;
};

/// Least-squares fit of y = a1 exp(-x/tau1) + a2 exp(-x/tau2).
BiExponentialFit fit_biexponential(std::span<const double> x, std::span<const double> y,
                                   double tau_guess_slow, double tau_guess_fast);

/// CSV writers for the documented column layouts.
std::string sweep_csv(std::span<const SweepRecord> records);
std::string herald_csv(std::span<const HeraldRecord> records);

}  // namespace raman
