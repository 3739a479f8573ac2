// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "raman/config.hpp"
#include "raman/experiments.hpp"
#include "raman/spectra.hpp"

using namespace raman;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

struct Curves {
  std::vector<double> x;
  std::vector<double> noisy, ideal, mixture;
  std::vector<double> p_s, p_a;
};

Curves sweep(const RunConfig& config, std::span<const Variant> variants) {
  Curves c;
  c.x = config.delays_ps;
  for (const auto& r : run_sweep(config, variants)) {
    switch (r.variant) {
      case Variant::noisy:
        c.noisy.push_back(r.g2);
        c.p_s.push_back(r.p_s);
        c.p_a.push_back(r.p_a);
        break;
      case Variant::ideal: c.ideal.push_back(r.g2); break;
      case Variant::mixture: c.mixture.push_back(r.g2); break;
    }
  }
  return c;
}

double mean_spacing(const std::vector<double>& v) {
  if (v.size() < 2) return std::nan("");
  return (v.back() - v.front()) / static_cast<double>(v.size() - 1);
}

// Mean displacement of the extrema of `b` relative to the nearest extrema of `a`.
double extremum_shift(std::span<const double> x, std::span<const double> a, std::span<const double> b,
                      double max_distance) {
  double sum = 0.0;
  int count = 0;
  const auto accumulate = [&](const std::vector<double>& ea, const std::vector<double>& eb) {
    for (double tb : eb) {
      double best = std::numeric_limits<double>::infinity();
      for (double ta : ea)
        if (std::abs(tb - ta) < std::abs(best)) best = tb - ta;
      if (std::abs(best) < max_distance) {
        sum += best;
        ++count;
      }
    }
  };
  accumulate(local_maxima(x, a), local_maxima(x, b));
  accumulate(local_minima(x, a), local_minima(x, b));
  return count ? sum / count : std::nan("");
}

double rel_diff(double a, double b) { return std::abs(a - b) / std::abs(b); }

double g2_at(const SystemParams& params, const std::array<int, 4>& dims, const IntegratorConfig& integrator,
             double dt, std::vector<DensityMatrix>* states = nullptr, std::span<const double> samples = {}) {
  const HilbertSpace space = raman_space(dims);
  const ProtocolResult r = run_two_pulse(dt, params, space, integrator);
  if (states) {
    const TwoPulseProtocol protocol(params, space, integrator);
    for (auto& s : protocol.run(dt, samples).timeline) states->push_back(s.rho);
  }
  const DetectorModel det{};
  return coincidence_g2(r.rho_final, detection_operator(Channel::stokes, det, space),
                        detection_operator(Channel::anti_stokes, det, space));
}

}  // namespace

int main() {
  const auto start = std::chrono::steady_clock::now();
  const RunConfig defaults;
  const double beat = defaults.system.phonons[0].delta - defaults.system.phonons[1].delta;
  const double period = 2.0 * std::numbers::pi / std::abs(beat);

  const Variant all[] = {Variant::noisy, Variant::ideal, Variant::mixture};
  const Curves main = sweep(defaults, all);

  std::vector<std::pair<std::string, std::function<Outcome()>>> criteria;

  criteria.emplace_back("1 beat period", [&] {
    const auto maxima = local_maxima(main.x, main.noisy);
    const double measured = mean_spacing(maxima);
    const bool ok = std::abs(measured - 3.88) <= 0.05 * 3.88 && std::abs(period - 3.88) <= 0.05 * 3.88;
    return Outcome{ok, fmt("maxima spacing %.3f ps", measured) + fmt(" (2pi/|d1-d2| = %.3f ps, target 3.88 +- 5%%)", period)};
  });

  criteria.emplace_back("2 phase sensitivity", [&] {
    const Variant noisy[] = {Variant::noisy};
    RunConfig c = defaults;
    c.system.theta = 0.0;
    const Curves zero = sweep(c, noisy);
    c.system.theta = std::numbers::pi / 12.0;
    const Curves half = sweep(c, noisy);
    const double shift = extremum_shift(main.x, zero.noisy, main.noisy, 0.5 * period);
    const double shift_half = extremum_shift(main.x, zero.noisy, half.noisy, 0.5 * period);
    const double expected = (std::numbers::pi / 6.0) / std::abs(beat);
    const bool monotone = std::abs(shift_half) < std::abs(shift) && shift_half * shift > 0.0;
    const bool ok = std::abs(std::abs(shift) - expected) <= 0.05 && monotone;
    return Outcome{ok, fmt("extrema shift %.3f ps", shift) + fmt(" for theta = pi/6 (expected |shift| %.3f +- 0.05)", expected) +
                           fmt(", %.3f ps for pi/12", shift_half)};
  });

  criteria.emplace_back("3 mixture foil", [&] {
    std::vector<double> y;
    bool monotone = true;
    for (std::size_t i = 0; i < main.x.size(); ++i) {
      y.push_back(main.mixture[i] - 1.0);
      if (i > 0 && !(y[i] < y[i - 1])) monotone = false;
    }
    const double tau1 = defaults.system.phonons[0].tau_ps(), tau2 = defaults.system.phonons[1].tau_ps();
    const BiExponentialFit f = fit_biexponential(main.x, y, tau1, tau2);
    const bool taus = std::abs(f.tau1 / tau1 - 1.0) <= 0.3 && std::abs(f.tau2 / tau2 - 1.0) <= 0.3;
    const bool extrema = local_maxima(main.x, main.mixture).empty() && local_minima(main.x, main.mixture).empty();
    const bool ok = monotone && extrema && f.r_squared > 0.999 && taus;
    return Outcome{ok, std::string(monotone && extrema ? "monotone" : "NOT monotone") +
                           fmt(", fit tau = %.2f", f.tau1) + fmt(" / %.2f ps", f.tau2) +
                           fmt(" vs phonon lifetimes %.1f", tau1) + fmt(" / %.1f ps (+-30%%)", tau2) +
                           fmt(", R^2 = %.6f", f.r_squared)};
  });

  criteria.emplace_back("4 thermal bound", [&] {
    double lo = 1e300, hi = -1e300;
    for (std::size_t i = 0; i < main.x.size(); ++i)
      if (main.x[i] > 0.5) {
        lo = std::min(lo, main.ideal[i]);
        hi = std::max(hi, main.ideal[i]);
      }
    const double bound = 1.0 + 1.0 / defaults.system.n_th;
    return Outcome{lo >= 1.0 && hi <= bound + 1e-6,
                   fmt("ideal g2 in [%.4f, ", lo) + fmt("%.4f] for dt > 0.5 ps", hi) + fmt(", bound %.1f", bound)};
  });

  criteria.emplace_back("5 count rates", [&] {
    const auto [smin, smax] = std::minmax_element(main.p_s.begin(), main.p_s.end());
    const auto [amin, amax] = std::minmax_element(main.p_a.begin(), main.p_a.end());
    const bool ok = *smin >= 1.8e-4 && *smax <= 4e-4 && *amin >= 0.6e-5 && *amax <= 3.6e-5;
    return Outcome{ok, fmt("p_S in [%.3g, ", *smin) + fmt("%.3g]", *smax) + fmt(", p_A in [%.3g, ", *amin) +
                           fmt("%.3g]", *amax)};
  });

  criteria.emplace_back("6 entanglement lifetime", [&] {
    RunConfig c = defaults;
    const auto records = run_herald(c);
    const double e0 = records.front().e_n;
    double drop = std::nan("");
    for (const auto& r : records)
      if (r.e_n < 0.05 * e0) {
        drop = r.t_ps;
        break;
      }
    c.detectors.eta_stokes = 0.0;
    double blind = 0.0;
    for (const auto& r : run_herald(c)) blind = std::max(blind, std::abs(r.e_n));
    // Ideal Stokes detector, for the record.
    RunConfig ideal = defaults;
    ideal.detectors = DetectorModel::ideal();
    const auto ideal_records = run_herald(ideal);
    double ideal_drop = std::nan("");
    for (const auto& r : ideal_records)
      if (r.e_n < 0.05 * ideal_records.front().e_n) {
        ideal_drop = r.t_ps;
        break;
      }
    const bool ok = e0 > 0.3 && std::abs(drop - 4.5) <= 1.0 && blind <= 1e-9;
    return Outcome{ok, fmt("E_N(0) = %.3g", e0) + fmt(" (need > 0.3), below 5%% at %.2f ps", drop) +
                           fmt(", |E_N| with eta=0: %.1e", blind) +
                           fmt("; ideal detector: E_N(0) = %.3f", ideal_records.front().e_n) +
                           fmt(", below 5%% at %.2f ps", ideal_drop)};
  });

  criteria.emplace_back("7 log-negativity oracle", [&] {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> angle(0.0, std::numbers::pi / 2);
    const HilbertSpace two({{"b1", 3}, {"b2", 3}});
    double worst = 0.0;
    for (int i = 0; i < 10; ++i) {
      const double a = angle(rng), b1 = std::cos(a), b2 = std::sin(a);
      Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(9);
      psi(3) = b1;  // |10>
      psi(1) = b2;  // |01>
      const double en = log_negativity(DensityMatrix(two, psi * psi.adjoint()));
      worst = std::max(worst, std::abs(en - std::log2(1.0 + 2.0 * b1 * b2)));
    }
    return Outcome{worst <= 1e-6, fmt("max deviation %.2e over 10 random pairs", worst)};
  });

  criteria.emplace_back("8 spectrum round trip", [&] {
    const auto fwhm = [](double tau) { return 1.0 / (2.0 * std::numbers::pi * tau * kSpeedOfLightCmPerPs); };
    const std::vector<VoigtPeak> truth = {{646.7, fwhm(1.7), 0.3, 1.0}, {655.3, fwhm(8.4), 0.3, 0.5}};
    const auto grid = uniform_grid(620.0, 690.0, 0.05);
    int passed = 0;
    double worst_beta = 0.0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      const Spectrum s = synthesize_spectrum(truth, grid, 0.02, 0.01, seed);
      try {
        const FitResult fit = fit_voigt_peaks(s, {{646.0, 2.0, 0.5, 0.8}, {656.0, 1.0, 0.5, 0.8}});
        const DerivedParams d = derive_model_params({fit.peaks[0], fit.peaks[1]});
        worst_beta = std::max(worst_beta, std::abs(d.beta[0] - 0.577));
        if (std::abs(d.beta[0] - 0.577) <= 0.012 && std::abs(d.tau_ps(0) / 8.4 - 1.0) <= 0.05 &&
            std::abs(d.tau_ps(1) / 1.7 - 1.0) <= 0.05)
          ++passed;
      } catch (const NumericalError&) {
      }
    }
    return Outcome{passed >= 18, fmt("%.0f/20 realizations within tolerance", passed) +
                                     fmt(", max |beta1 - 0.577| = %.4f", worst_beta)};
  });

  criteria.emplace_back("9 numerical hygiene", [&] {
    const SystemParams& p = defaults.system;
    // Trace and positivity along a full protocol.
    std::vector<double> samples;
    for (double t = -0.5; t <= 4.5; t += 0.1) samples.push_back(t);
    std::vector<DensityMatrix> states;
    g2_at(p, defaults.dims, defaults.integrator, 4.0, &states, samples);
    double drift = 0.0, min_eig = 1.0;
    for (const auto& s : states) {
      drift = std::max(drift, std::abs(s.matrix().trace().real() - 1.0));
      min_eig = std::min(min_eig, s.min_eigenvalue());
    }
    // Truncation: dim 3 against dim 4 across the delay range.
    double trunc = 0.0, trunc_at = 0.0;
    for (double dt : {0.3, 0.6, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 8.0, 10.0}) {
      const double d = rel_diff(g2_at(p, {3, 3, 3, 3}, defaults.integrator, dt),
                                g2_at(p, {4, 4, 4, 4}, defaults.integrator, dt));
      if (d > trunc) trunc = d, trunc_at = dt;
    }
    // Fixed-step RK4 at h and h/2.
    IntegratorConfig h;
    h.method = IntegrationMethod::rk4;
    h.fixed_step_ps = 1e-3;
    IntegratorConfig h2 = h;
    h2.fixed_step_ps = 0.5e-3;
    double halving = 0.0;
    for (double dt : {0.6, 2.0})
      halving = std::max(halving, rel_diff(g2_at(p, defaults.dims, h, dt), g2_at(p, defaults.dims, h2, dt)));
    const bool ok = drift < 1e-8 && min_eig >= -1e-8 && trunc < 5e-3 && halving < 1e-4;
    return Outcome{ok, fmt("trace drift %.1e", drift) + fmt(", min eigenvalue %.1e", min_eig) +
                           fmt(", dim 3 vs 4: %.3f%%", 100 * trunc) + fmt(" (worst at %.1f ps, need < 0.5%%)", trunc_at) +
                           fmt(", RK4 halving %.1e", halving)};
  });

  criteria.emplace_back("10 frame and phase-split invariance", [&] {
    const SystemParams& p = defaults.system;
    double worst = 0.0;
    for (double dt : {0.6, 2.0, 4.2}) {
      const double ref = g2_at(p, defaults.dims, defaults.integrator, dt);
      for (double c : {2.0, -1.3}) {
        SystemParams q = p;
        q.phonons[0].delta += c;
        q.phonons[1].delta += c;
        q.delta_stokes -= c;
        q.delta_antistokes += c;
        worst = std::max(worst, rel_diff(g2_at(q, defaults.dims, defaults.integrator, dt), ref));
      }
      for (double split : {p.theta, 0.5 * p.theta, -0.8}) {
        SystemParams q = p;
        q.theta_split = split;
        worst = std::max(worst, rel_diff(g2_at(q, defaults.dims, defaults.integrator, dt), ref));
      }
    }
    return Outcome{worst <= 1e-6, fmt("max relative change %.1e", worst)};
  });

  bool all_pass = true;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    all_pass = all_pass && o.pass;
    std::printf("%s  %-38s %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::printf("total runtime %.0f s\n", secs);
  return all_pass ? 0 : 1;
}
