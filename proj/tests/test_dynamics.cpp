#include <cmath>
#include <numbers>

#include "doctest.h"
#include "raman/dynamics.hpp"
#include "raman/error.hpp"
#include "raman/measurement.hpp"

using namespace raman;

namespace {

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

SystemParams no_pulses() {
  SystemParams p = SystemParams::cs2_defaults();
  p.lambda_write_stokes = p.lambda_read_antistokes = p.lambda_fwm = 0.0;
  return p;
}

Op number(const HilbertSpace& s, std::size_t k) { return embed(number_op(s.dim(k)), k, s); }

}  // namespace

TEST_CASE("Lindblad derivative: trivial generators") {
  const HilbertSpace one({{"m", 3}});
  const DensityMatrix rho(one, thermal_state(3, 0.2));
  const Op zero(one, Matrix::Zero(3, 3));
  CHECK(max_abs(lindblad_derivative(rho, zero, {})) == 0.0);

  // Decay of |1>: d<n>/dt = -kappa.
  const double kappa = 0.7;
  const DensityMatrix fock1(one, fock_state(3, 1));
  const Op a = embed(annihilation_op(3), 0, one);
  const Op c[] = {cplx(std::sqrt(kappa)) * a};
  const Matrix d1 = lindblad_derivative(fock1, zero, c);
  CHECK((d1 * number_op(3)).trace().real() == doctest::Approx(-kappa));
  CHECK(std::abs(d1.trace()) < 1e-15);

  // Thermal pumping out of vacuum: d<n>/dt = kappa n_th.
  const double nth = 0.04;
  const Op pair[] = {cplx(std::sqrt(kappa * (1 + nth))) * a, cplx(std::sqrt(kappa * nth)) * a.adjoint()};
  const DensityMatrix vac(one, fock_state(3, 0));
  CHECK((lindblad_derivative(vac, zero, pair) * number_op(3)).trace().real() ==
        doctest::Approx(kappa * nth));

  // The truncated thermal state is stationary under the thermal pair.
  const DensityMatrix th(one, thermal_state(3, nth));
  CHECK(max_abs(lindblad_derivative(th, zero, pair)) < 1e-15);
}

TEST_CASE("sparse master equation matches the dense derivative") {
  SystemParams p = SystemParams::cs2_defaults();
  p.lambda_fwm = 0.03;
  p.read.t0_ps = 0.3;
  const HilbertSpace s = raman_space();
  const MasterEquation eq(p, s);
  const auto c = collapse_operators(p, s);
  const HamiltonianParts parts = hamiltonian_parts(p, s);
  Matrix rho = initial_state(p, s).matrix();
  rho = 0.9 * rho + 0.1 * Matrix::Identity(81, 81) / 81.0;
  for (double t : {-0.2, 0.0, 0.1, 0.3, 0.9}) {
    const Matrix dense = lindblad_derivative(rho, parts.at(t, p).matrix(), c);
    CHECK(max_abs(eq.derivative(t, rho) - dense) < 1e-12);
  }
  CHECK(eq.interaction_free(p.write.window_end(), p.read.window_begin()));
  CHECK_FALSE(eq.interaction_free(0.0, 0.1));
}

TEST_CASE("free evolution conserves Fock populations without damping") {
  SystemParams p = no_pulses();
  p.phonons[0].kappa = p.phonons[1].kappa = 1e-300;
  const HilbertSpace s = raman_space();
  Matrix rho = Matrix::Zero(81, 81);
  rho(0, 0) = 0.5;
  rho(s.stride(mode::b1), s.stride(mode::b1)) = 0.3;
  rho(s.stride(mode::b2), s.stride(mode::b2)) = 0.2;
  const DensityMatrix rho0(s, rho);
  const double t = 2.3;
  const DensityMatrix out = evolve(rho0, 0.0, t, p, {});
  CHECK(max_abs(out.matrix() - rho0.matrix()) < 1e-9);
}

TEST_CASE("single-mode decay of one quantum") {
  SystemParams p = no_pulses();
  p.n_th = 0.0;
  const HilbertSpace s = raman_space();
  const Eigen::Index one_b2 = s.stride(mode::b2);
  Matrix rho = Matrix::Zero(81, 81);
  rho(one_b2, one_b2) = 1.0;
  const DensityMatrix rho0(s, rho);
  const DensityMatrix out = evolve(rho0, 0.0, 1.7, p, {});
  CHECK(std::abs(expectation(out, number(s, mode::b2)).real() - std::exp(-1.0)) < 1e-4);

  const Matrix exact = free_evolution(rho, s, free_generators(p), 1.7);
  CHECK(max_abs(exact - out.matrix()) < 1e-8);
}

TEST_CASE("two-mode beat period") {
  SystemParams p = no_pulses();
  p.phonons[0].kappa = p.phonons[1].kappa = 1e-300;
  p.n_th = 0.0;
  const HilbertSpace s = raman_space();
  const double b1 = p.phonons[0].beta, b2 = p.phonons[1].beta;
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(81);
  psi(s.stride(mode::b1)) = b1;
  psi(s.stride(mode::b2)) = b2 * std::polar(1.0, p.theta);
  const Matrix rho0 = psi * psi.adjoint();
  const auto gens = free_generators(p);
  // Phase of the coherence between |10> and |01> winds at delta1 - delta2.
  const Eigen::Index i = s.stride(mode::b1), j = s.stride(mode::b2);
  const auto coherence_at = [&](double t) { return free_evolution(rho0, s, gens, t)(i, j) / rho0(i, j); };
  const double period = 2 * std::numbers::pi / (p.phonons[0].delta - p.phonons[1].delta);
  CHECK(period == doctest::Approx(3.876).epsilon(3e-4));
  CHECK(std::abs(coherence_at(period) - 1.0) < 1e-9);
  CHECK(std::abs(coherence_at(0.5 * period) + 1.0) < 1e-9);
  // Direct search for the first revival on a 1 fs grid.
  double revival = 0.0, best = -2.0;
  for (double t = 3.5; t < 4.5; t += 1e-3)
    if (const double v = coherence_at(t).real(); v > best) best = v, revival = t;
  CHECK(std::abs(revival - 3.876) < 1e-3);
}

TEST_CASE("free evolution relaxes to the thermal occupancy") {
  const SystemParams p = no_pulses();
  const HilbertSpace s = raman_space();
  Matrix rho = Matrix::Zero(81, 81);
  rho(s.stride(mode::b1) * 2, s.stride(mode::b1) * 2) = 1.0;  // |2> in b1
  const auto gens = free_generators(p);
  const Matrix late = free_evolution(rho, s, gens, 20.0 * p.phonons[0].tau_ps());
  const DensityMatrix out(s, late);
  const double nbar = thermal_populations(3, p.n_th).dot(RealVector::LinSpaced(3, 0, 2));
  CHECK(std::abs(expectation(out, number(s, mode::b1)).real() - nbar) < 1e-4);
  CHECK(std::abs(nbar - p.n_th) < 1e-3);
}

TEST_CASE("protocol with no couplings leaves thermal phonons and photon vacuum") {
  const SystemParams p = no_pulses();
  const HilbertSpace s = raman_space();
  const ProtocolResult r = run_two_pulse(1.5, p, s, {});
  CHECK(max_abs(r.rho_final.matrix() - initial_state(p, s).matrix()) < 1e-12);
  const CoincidenceStats stats = coincidence_stats(
      r.rho_final, detection_operator(Channel::stokes, {}, s), detection_operator(Channel::anti_stokes, {}, s));
  CHECK(stats.p_s == doctest::Approx(2e-4));
  CHECK(stats.p_a == doctest::Approx(1e-5));
  CHECK(stats.g2 == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("default protocol: Stokes population and invariants") {
  const SystemParams p = SystemParams::cs2_defaults();
  const HilbertSpace s = raman_space();
  const TwoPulseProtocol protocol(p, s, {});
  const double samples[] = {-0.3, 0.0, 0.5, 1.0, 1.4};
  const ProtocolResult r = protocol.run(1.0, samples);
  REQUIRE(r.timeline.size() == 5);
  const double n_s = expectation(r.rho_final, number(s, mode::stokes)).real();
  const double r_sq = std::pow(p.lambda_write_stokes * std::sqrt(2 * std::numbers::pi) * p.write.sigma_ps, 2);
  CHECK(r_sq == doctest::Approx(4.9e-4).epsilon(0.05));
  CHECK(std::abs(n_s - 4.9e-4) < 0.2 * 4.9e-4);
  for (const auto& sample : r.timeline) {
    CHECK(std::abs(sample.rho.matrix().trace().real() - 1.0) < 1e-8);
    CHECK(sample.rho.min_eigenvalue() >= -1e-8);
  }
  // The cached post-write state equals an explicit integration.
  const DensityMatrix direct = evolve(initial_state(p, s), p.write.window_begin(), p.write.window_end(),
                                      [&] { SystemParams q = p; q.read.t0_ps = 50.0; return q; }(), {});
  CHECK(max_abs(direct.matrix() - r.rho_after_write.matrix()) < 1e-10);
}

TEST_CASE("no read coupling leaves the anti-Stokes mode empty") {
  SystemParams p = SystemParams::cs2_defaults();
  p.lambda_read_antistokes = 0.0;
  const HilbertSpace s = raman_space();
  const ProtocolResult r = run_two_pulse(2.0, p, s, {});
  CHECK(expectation(r.rho_final, number(s, mode::anti_stokes)).real() < 1e-12);
}

TEST_CASE("overlapping pulses are integrated without the cache") {
  SystemParams p = SystemParams::cs2_defaults();
  p.lambda_fwm = 0.05;
  const HilbertSpace s = raman_space();
  const TwoPulseProtocol protocol(p, s, {});
  const ProtocolResult overlap = protocol.run(0.1);
  CHECK(std::abs(overlap.rho_final.matrix().trace().real() - 1.0) < 1e-8);
  CHECK_THROWS_AS(protocol.run(-0.2), InvalidArgument);
}

TEST_CASE("RK4 and the adaptive integrator agree") {
  const SystemParams p = SystemParams::cs2_defaults();
  const HilbertSpace s = raman_space();
  IntegratorConfig rk4;
  rk4.method = IntegrationMethod::rk4;
  rk4.fixed_step_ps = 2e-3;
  rk4.analytic_gaps = false;
  const ProtocolResult a = run_two_pulse(1.2, p, s, {});
  const ProtocolResult b = run_two_pulse(1.2, p, s, rk4);
  CHECK(max_abs(a.rho_final.matrix() - b.rho_final.matrix()) < 1e-9);
}

TEST_CASE("integrator configuration is validated") {
  IntegratorConfig c;
  c.rel_tol = 0.0;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  c = {};
  c.max_step_ps = -1.0;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
}
