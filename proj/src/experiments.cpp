#include "raman/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <thread>

#include "raman/error.hpp"
#include "raman/least_squares.hpp"

namespace raman {

namespace {

struct Detectors {
  Op d_s;
  Op d_a;
};

Detectors make_detectors(const DetectorModel& model, const HilbertSpace& space) {
  return {detection_operator(Channel::stokes, model, space),
          detection_operator(Channel::anti_stokes, model, space)};
}

SystemParams single_isotope(SystemParams p, std::size_t which) {
  p.phonons[which].beta = 1.0;
  p.phonons[1 - which].beta = 0.0;
  return p;
}

std::vector<double> sorted(std::span<const double> v) {
  std::vector<double> out(v.begin(), v.end());
  std::sort(out.begin(), out.end());
  return out;
}

double rel_diff(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

const char* variant_name(Variant v) {
  switch (v) {
    case Variant::noisy: return "noisy";
    case Variant::ideal: return "ideal";
    case Variant::mixture: return "mixture";
  }
  return "?";
}

Variant parse_variant(const std::string& name) {
  if (name == "noisy") return Variant::noisy;
  if (name == "ideal") return Variant::ideal;
  if (name == "mixture") return Variant::mixture;
  throw ConfigError("unknown variant '" + name + "' (expected noisy, ideal or mixture)");
}

void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
  std::size_t workers = jobs > 0 ? static_cast<std::size_t>(jobs)
                                 : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next = n;
        }
      }
    });
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

std::vector<SweepRecord> run_sweep(const RunConfig& config, std::span<const Variant> variants,
                                   int jobs) {
  config.validate();
  const HilbertSpace space = raman_space(config.dims);
  const std::vector<double> delays = sorted(config.delays_ps);
  const auto has = [&](Variant v) { return std::find(variants.begin(), variants.end(), v) != variants.end(); };

  const Detectors noisy = make_detectors(config.detectors, space);
  const Detectors ideal = make_detectors(DetectorModel::ideal(), space);

  SystemParams no_fwm = config.system;
  no_fwm.lambda_fwm = 0.0;
  const bool shared_ideal = config.system.lambda_fwm == 0.0;

  std::unique_ptr<TwoPulseProtocol> coherent, coherent_no_fwm, isotope1, isotope2;
  if (has(Variant::noisy) || (has(Variant::ideal) && shared_ideal))
    coherent = std::make_unique<TwoPulseProtocol>(config.system, space, config.integrator);
  if (has(Variant::ideal) && !shared_ideal)
    coherent_no_fwm = std::make_unique<TwoPulseProtocol>(no_fwm, space, config.integrator);
  if (has(Variant::mixture)) {
    isotope1 = std::make_unique<TwoPulseProtocol>(single_isotope(config.system, 0), space, config.integrator);
    isotope2 = std::make_unique<TwoPulseProtocol>(single_isotope(config.system, 1), space, config.integrator);
  }
  const TwoPulseProtocol* ideal_protocol = shared_ideal ? coherent.get() : coherent_no_fwm.get();
  const double w1 = config.system.phonons[0].beta * config.system.phonons[0].beta;
  const double w2 = config.system.phonons[1].beta * config.system.phonons[1].beta;

  std::map<Variant, std::vector<SweepRecord>> results;
  for (Variant v : variants) results[v].resize(delays.size());

  parallel_for(delays.size(), jobs, [&](std::size_t i) {
    const double dt = delays[i];
    const auto record = [&](Variant v, const CoincidenceStats& s) {
      results.at(v)[i] = SweepRecord{dt, v, s.g2, s.p_s, s.p_a, s.p_sa};
    };
    std::optional<ProtocolResult> main;
    if (coherent) main = coherent->run(dt);
    if (has(Variant::noisy)) record(Variant::noisy, coincidence_stats(main->rho_final, noisy.d_s, noisy.d_a));
    if (has(Variant::ideal)) {
      const ProtocolResult r = shared_ideal ? *main : ideal_protocol->run(dt);
      record(Variant::ideal, coincidence_stats(r.rho_final, ideal.d_s, ideal.d_a));
    }
    if (has(Variant::mixture)) {
      const CoincidenceStats a = coincidence_stats(isotope1->run(dt).rho_final, noisy.d_s, noisy.d_a);
      const CoincidenceStats b = coincidence_stats(isotope2->run(dt).rho_final, noisy.d_s, noisy.d_a);
      CoincidenceStats m;
      m.p_s = w1 * a.p_s + w2 * b.p_s;
      m.p_a = w1 * a.p_a + w2 * b.p_a;
      m.p_sa = w1 * a.p_sa + w2 * b.p_sa;
      m.g2 = m.p_sa / (m.p_s * m.p_a);
      record(Variant::mixture, m);
    }
  });

  std::vector<SweepRecord> out;
  for (Variant v : variants)
    if (results.count(v)) {
      out.insert(out.end(), results[v].begin(), results[v].end());
      results.erase(v);
    }
  return out;
}

std::vector<double> g2_curve(const RunConfig& config, std::span<const double> delays, int jobs) {
  RunConfig c = config;
  c.delays_ps.assign(delays.begin(), delays.end());
  const Variant v[] = {Variant::noisy};
  std::vector<double> out;
  for (const auto& r : run_sweep(c, v, jobs)) out.push_back(r.g2);
  return out;
}

std::vector<HeraldRecord> run_herald(const RunConfig& config) {
  config.validate();
  const HilbertSpace space = raman_space(config.dims);
  const TwoPulseProtocol protocol(config.system, space, config.integrator);
  const DensityMatrix after_write(space, protocol.after_write(), {1e-10, 1e-8, -1e-8});
  const Op d_s = detection_operator(Channel::stokes, config.detectors, space);
  const double prob = expectation(after_write, d_s).real();
  if (!(prob >= 1e-12))
    throw NumericalError("herald probability " + std::to_string(prob) + " is below 1e-12");
  const HeraldedState heralded = herald_conditional_state(after_write, d_s);

  const HilbertSpace& phonons = heralded.rho_ph.space();
  const std::vector<ModeGenerator> all = free_generators(config.system);
  const std::vector<ModeGenerator> gens(all.begin(), all.begin() + 2);

  std::vector<HeraldRecord> out;
  const auto n = static_cast<std::size_t>(
      std::floor((config.herald.stop_ps - config.herald.start_ps) / config.herald.step_ps + 1e-9));
  for (std::size_t i = 0; i <= n; ++i) {
    const double t = config.herald.start_ps + static_cast<double>(i) * config.herald.step_ps;
    const Matrix m = t > 0.0 ? free_evolution(heralded.rho_ph.matrix(), phonons, gens, t)
                             : heralded.rho_ph.matrix();
    const DensityMatrix rho(phonons, m, {1e-10, 1e-8, -1e-8});
    HeraldRecord r;
    r.t_ps = t;
    const RealVector p1 = fock_populations(rho, 0, 3);
    const RealVector p2 = fock_populations(rho, 1, 3);
    for (int k = 0; k < 3; ++k) {
      r.pop_b1[k] = p1(k);
      r.pop_b2[k] = p2(k);
    }
    r.e_n = log_negativity(rho);
    r.herald_prob = heralded.herald_prob;
    out.push_back(r);
  }
  return out;
}

std::vector<double> local_maxima(std::span<const double> x, std::span<const double> y) {
  std::vector<double> out;
  for (std::size_t i = 1; i + 1 < y.size(); ++i) {
    if (!(y[i] > y[i - 1] && y[i] >= y[i + 1])) continue;
    // Vertex of the parabola through the three samples.
    const double x0 = x[i - 1], x1 = x[i], x2 = x[i + 1];
    const double y0 = y[i - 1], y1 = y[i], y2 = y[i + 1];
    const double denom = (x0 - x1) * (x0 - x2) * (x1 - x2);
    const double a = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / denom;
    const double b = (x2 * x2 * (y0 - y1) + x1 * x1 * (y2 - y0) + x0 * x0 * (y1 - y2)) / denom;
    out.push_back(a != 0.0 ? -b / (2.0 * a) : x1);
  }
  return out;
}

std::vector<double> local_minima(std::span<const double> x, std::span<const double> y) {
  std::vector<double> neg(y.begin(), y.end());
  for (double& v : neg) v = -v;
  return local_maxima(x, neg);
}

BiExponentialFit fit_biexponential(std::span<const double> x, std::span<const double> y,
                                   double tau_slow, double tau_fast) {
  if (x.size() != y.size() || x.size() < 5) throw InvalidArgument("fit_biexponential: need >= 5 points");
  const auto n = static_cast<Eigen::Index>(x.size());
  const ResidualFunction residual = [&](const Eigen::VectorXd& p) {
    Eigen::VectorXd r(n);
    for (Eigen::Index i = 0; i < n; ++i)
      r(i) = p(0) * std::exp(-x[i] * std::exp(-p(1))) + p(2) * std::exp(-x[i] * std::exp(-p(3))) - y[i];
    return r;
  };
  Eigen::VectorXd p0(4);
  p0 << 0.5 * y[0], std::log(tau_slow), 0.5 * y[0], std::log(tau_fast);
  const LmResult lm = levenberg_marquardt(residual, p0);
  BiExponentialFit fit{lm.params(0), std::exp(lm.params(1)), lm.params(2), std::exp(lm.params(3)), 0.0};
  if (fit.tau1 < fit.tau2) {
    std::swap(fit.a1, fit.a2);
    std::swap(fit.tau1, fit.tau2);
  }
  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(y.size());
  double ss_tot = 0.0;
  for (double v : y) ss_tot += (v - mean) * (v - mean);
  fit.r_squared = 1.0 - lm.cost / ss_tot;
  return fit;
}

std::string sweep_csv(std::span<const SweepRecord> records) {
  std::ostringstream os;
  os << "delta_t_ps,variant,g2,p_s,p_a,p_sa\n";
  for (const auto& r : records)
    os << fmt(r.delta_t_ps) << "," << variant_name(r.variant) << "," << fmt(r.g2) << ","
       << fmt(r.p_s) << "," << fmt(r.p_a) << "," << fmt(r.p_sa) << "\n";
  return os.str();
}

std::string herald_csv(std::span<const HeraldRecord> records) {
  std::ostringstream os;
  os << "t_ps,p0_b1,p1_b1,p2_b1,p0_b2,p1_b2,p2_b2,e_n,herald_prob\n";
  for (const auto& r : records) {
    os << fmt(r.t_ps);
    for (double p : r.pop_b1) os << "," << fmt(p);
    for (double p : r.pop_b2) os << "," << fmt(p);
    os << "," << fmt(r.e_n) << "," << fmt(r.herald_prob) << "\n";
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// validation suite

namespace {

CheckResult check(std::string name, double deviation, double tolerance, std::string detail = {}) {
  return {std::move(name), deviation, tolerance, deviation <= tolerance, std::move(detail)};
}

double noisy_g2(const SystemParams& params, const std::array<int, 4>& dims,
                const IntegratorConfig& integrator, const DetectorModel& detectors, double dt) {
  const HilbertSpace space = raman_space(dims);
  const ProtocolResult r = run_two_pulse(dt, params, space, integrator);
  const Detectors d = make_detectors(detectors, space);
  return coincidence_g2(r.rho_final, d.d_s, d.d_a);
}

}  // namespace

std::vector<CheckResult> run_validation(const RunConfig& config, int jobs) {
  config.validate();
  const SystemParams& sys = config.system;
  const std::array<double, 3> probe_delays = {0.6, 2.0, 4.0};
  std::vector<std::function<CheckResult()>> checks;

  checks.emplace_back([&] {
    const HilbertSpace space = raman_space(config.dims);
    const TwoPulseProtocol protocol(sys, space, config.integrator);
    std::vector<double> samples;
    for (double t = 0.0; t <= 3.0 + 1e-12; t += 0.25) samples.push_back(t);
    const ProtocolResult r = protocol.run(2.5, samples);
    double drift = std::abs(r.rho_final.matrix().trace().real() - 1.0);
    double min_eig = r.rho_final.min_eigenvalue();
    for (const auto& s : r.timeline) {
      drift = std::max(drift, std::abs(s.rho.matrix().trace().real() - 1.0));
      min_eig = std::min(min_eig, s.rho.min_eigenvalue());
    }
    const double dev = std::max(drift, std::max(-min_eig, 0.0));
    return check("trace_and_positivity", dev, 1e-8,
                 "trace drift " + fmt(drift) + ", min eigenvalue " + fmt(min_eig));
  });

  checks.emplace_back([&] {
    double worst = 0.0;
    const double c = 1.5;
    SystemParams shifted = sys;
    shifted.phonons[0].delta += c;
    shifted.phonons[1].delta += c;
    shifted.delta_stokes -= c;
    shifted.delta_antistokes += c;
    for (double dt : probe_delays)
      worst = std::max(worst, rel_diff(noisy_g2(shifted, config.dims, config.integrator, config.detectors, dt),
                                       noisy_g2(sys, config.dims, config.integrator, config.detectors, dt)));
    return check("frame_invariance", worst, 1e-6, "detuning offset 1.5 rad/ps");
  });

  checks.emplace_back([&] {
    double worst = 0.0;
    SystemParams split = sys;
    split.theta_split = 0.5 * sys.theta + 0.3;
    for (double dt : probe_delays)
      worst = std::max(worst, rel_diff(noisy_g2(split, config.dims, config.integrator, config.detectors, dt),
                                       noisy_g2(sys, config.dims, config.integrator, config.detectors, dt)));
    return check("theta_split_invariance", worst, 1e-6);
  });

  checks.emplace_back([&] {
    std::array<int, 4> ref_dims{};
    for (std::size_t k = 0; k < 4; ++k) ref_dims[k] = std::max(4, config.dims[k] + 1);
    double worst = 0.0;
    for (double dt : probe_delays)
      worst = std::max(worst, rel_diff(noisy_g2(sys, config.dims, config.integrator, config.detectors, dt),
                                       noisy_g2(sys, ref_dims, config.integrator, config.detectors, dt)));
    return check("truncation_convergence", worst, 5e-3,
                 "dims " + std::to_string(config.dims[0]) + " vs reference " + std::to_string(ref_dims[0]));
  });

  checks.emplace_back([&] {
    IntegratorConfig h = config.integrator;
    h.method = IntegrationMethod::rk4;
    h.fixed_step_ps = 1e-3;
    IntegratorConfig half = h;
    half.fixed_step_ps = 0.5e-3;
    const double a = noisy_g2(sys, config.dims, h, config.detectors, 2.0);
    const double b = noisy_g2(sys, config.dims, half, config.detectors, 2.0);
    return check("rk4_step_halving", rel_diff(a, b), 1e-4, "h = 1 fs vs 0.5 fs at 2 ps");
  });

  checks.emplace_back([&] {
    IntegratorConfig ref = config.integrator;
    ref.method = IntegrationMethod::rk4;
    ref.fixed_step_ps = 0.5e-3;
    double worst = 0.0;
    for (double dt : {0.6, 2.0}) {
      const double a = noisy_g2(sys, config.dims, config.integrator, config.detectors, dt);
      const double b = noisy_g2(sys, config.dims, ref, config.detectors, dt);
      worst = std::max(worst, rel_diff(a, b));
    }
    return check("step_convergence", worst, 1e-4, "configured integrator vs RK4 at 0.5 fs");
  });

  checks.emplace_back([&] {
    // Exact gap propagation against brute-force integration of the same interval.
    const HilbertSpace space = raman_space(config.dims);
    const TwoPulseProtocol protocol(sys, space, config.integrator);
    const Matrix start = protocol.after_write();
    SystemParams p = sys;
    p.read.t0_ps = 100.0;
    const MasterEquation eq(p, space);
    IntegratorConfig tight;
    tight.rel_tol = 1e-11;
    tight.abs_tol = 1e-14;
    const double t0 = sys.write.window_end();
    const Matrix brute = integrate(eq, start, t0, t0 + 3.0, tight);
    const Matrix fast = free_evolution(start, space, free_generators(p), 3.0);
    return check("analytic_gap_vs_integration", (brute - fast).cwiseAbs().maxCoeff(), 1e-9);
  });

  checks.emplace_back([&] {
    // Single excitation shared by the two modes: E_N = log2(1 + 2 b1 b2).
    const double b1 = sys.phonons[0].beta, b2 = sys.phonons[1].beta;
    const HilbertSpace two({{"b1", 3}, {"b2", 3}});
    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(9);
    psi(1 * 3 + 0) = b1;
    psi(0 * 3 + 1) = b2;
    const DensityMatrix rho(two, psi * psi.adjoint());
    return check("log_negativity_oracle", std::abs(log_negativity(rho) - std::log2(1.0 + 2.0 * b1 * b2)), 1e-9);
  });

  checks.emplace_back([&] {
    // Free evolution leaves the truncated thermal state stationary.
    const HilbertSpace space = raman_space(config.dims);
    const DensityMatrix rho0 = initial_state(sys, space);
    const Matrix later = free_evolution(rho0.matrix(), space, free_generators(sys), 20.0 * sys.phonons[0].tau_ps());
    return check("thermal_stationarity", (later - rho0.matrix()).cwiseAbs().maxCoeff(), 1e-12);
  });

  std::vector<CheckResult> results(checks.size());
  parallel_for(checks.size(), jobs, [&](std::size_t i) {
    try {
      results[i] = checks[i]();
    } catch (const Error& e) {
      results[i] = CheckResult{"check_" + std::to_string(i), 0.0, 0.0, false, e.what()};
    }
  });
  return results;
}

}  // namespace raman
