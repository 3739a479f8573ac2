#pragma once

#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/SparseCore>

#include "raman/hilbert.hpp"
#include "raman/model.hpp"

namespace raman {

enum class IntegrationMethod { adaptive, rk4 };

struct IntegratorConfig {
  double rel_tol = 1e-8;
  double abs_tol = 1e-10;
  double max_step_ps = 0.05;
  /// Step of the fixed-step RK4 method.
  double fixed_step_ps = 1e-3;
  IntegrationMethod method = IntegrationMethod::adaptive;
  /// Propagate interaction-free gaps with the exact factorized solution.
  bool analytic_gaps = true;

  void validate() const;
};

/// -i[H, rho] + sum_k (C rho C^dagger - 1/2 {C^dagger C, rho}).
Matrix lindblad_derivative(const DensityMatrix& rho, const Op& hamiltonian,
                           std::span<const Op> collapse);

/// Same, on a raw matrix (no state invariants required).
Matrix lindblad_derivative(const Matrix& rho, const Matrix& hamiltonian,
                           std::span<const Op> collapse);

/// Time-dependent master equation of the Raman model in sparse form.
class MasterEquation {
 public:
  MasterEquation(const SystemParams& params, const HilbertSpace& space);

  const HilbertSpace& space() const { return space_; }
  const SystemParams& params() const { return params_; }

  Matrix derivative(double t_ps, const Matrix& rho) const;

  /// True when neither pulse envelope matters anywhere on [t0, t1].
  bool interaction_free(double t0_ps, double t1_ps) const;

 private:
  using Sparse = Eigen::SparseMatrix<cplx, Eigen::RowMajor>;

  SystemParams params_;
  HilbertSpace space_;
  Sparse free_eff_;  // H_free - i/2 sum C^dagger C
  Sparse write_;
  Sparse read_;
  Sparse fwm_;
  std::vector<Sparse> collapse_;
};

/// Generator of one mode with no interactions: rotation at `frequency` plus
/// thermal damping at rate `kappa` towards occupation `n_th`.
struct ModeGenerator {
  double frequency = 0.0;
  double kappa = 0.0;
  double n_th = 0.0;
};

/// Per-mode generators of the interaction-free Raman model, in mode order.
std::vector<ModeGenerator> free_generators(const SystemParams& params);

/// Exact propagation under independent per-mode generators (one per mode of `space`).
Matrix free_evolution(const Matrix& rho, const HilbertSpace& space,
                      std::span<const ModeGenerator> generators, double duration_ps);

/// Integrates the master equation from t_start to t_end (always numerically).
DensityMatrix evolve(const DensityMatrix& rho0, double t_start_ps, double t_end_ps,
                     const SystemParams& params, const IntegratorConfig& config);

/// Raw integration on a MasterEquation; result is Hermitian-symmetrized.
Matrix integrate(const MasterEquation& eq, Matrix rho, double t_start_ps, double t_end_ps,
                 const IntegratorConfig& config);

struct TimelineSample {
  double t_ps;
  DensityMatrix rho;
};

struct ProtocolResult {
  DensityMatrix rho_final;
  DensityMatrix rho_after_write;
  std::vector<TimelineSample> timeline;
};

/// Thermal phonons (occupation n_th) times photon vacuum.
DensityMatrix initial_state(const SystemParams& params, const HilbertSpace& space);

/// Write pulse centred at t = 0, read pulse at t = delta_t.
///
/// The state right after the write window does not depend on delta_t when the
/// windows do not overlap; it is computed once per protocol and reused.
class TwoPulseProtocol {
 public:
  TwoPulseProtocol(SystemParams params, HilbertSpace space, IntegratorConfig config);

  /// Runs the protocol; `sample_times_ps` adds timeline records (sorted, inside the run).
  ProtocolResult run(double delta_t_ps, std::span<const double> sample_times_ps = {}) const;

  /// State at the end of the write window for non-overlapping pulses.
  const Matrix& after_write() const;

  const SystemParams& params() const { return params_; }
  const HilbertSpace& space() const { return space_; }
  const IntegratorConfig& config() const { return config_; }

 private:
  Matrix propagate(const MasterEquation& eq, const Matrix& rho, double t0, double t1) const;

  SystemParams params_;
  HilbertSpace space_;
  IntegratorConfig config_;
  std::vector<ModeGenerator> generators_;
  mutable std::once_flag write_once_;
  mutable std::optional<Matrix> after_write_;
};

ProtocolResult run_two_pulse(double delta_t_ps, const SystemParams& params,
                             const HilbertSpace& space, const IntegratorConfig& config);

}  // namespace raman
