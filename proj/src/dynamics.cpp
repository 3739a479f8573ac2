#include "raman/dynamics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include <unsupported/Eigen/MatrixFunctions>

#include "raman/error.hpp"

namespace raman {

namespace {

using Sparse = Eigen::SparseMatrix<cplx, Eigen::RowMajor>;

Sparse to_sparse(const Matrix& m) { return m.sparseView(cplx(1.0), 1e-300); }

bool inside(double t, const PulseSpec& p) { return t >= p.window_begin() && t <= p.window_end(); }

// Gaussian envelope truncated to the +-6 sigma window.
double windowed_envelope(double t, const PulseSpec& p) { return inside(t, p) ? envelope(t, p) : 0.0; }

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
// b - b* (error estimate weights)
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

template <class Rhs>
Matrix integrate_dopri(const Rhs& f, Matrix y, double t0, double t1, const IntegratorConfig& cfg) {
  const double span = t1 - t0;
  double h = std::min({cfg.max_step_ps, span, 1e-3});
  double t = t0;
  Matrix k1 = f(t, y);
  int steps = 0;
  while (t < t1) {
    if (t + h > t1) h = t1 - t;
    const Matrix k2 = f(t + c2 * h, y + h * (a21 * k1));
    const Matrix k3 = f(t + c3 * h, y + h * (a31 * k1 + a32 * k2));
    const Matrix k4 = f(t + c4 * h, y + h * (a41 * k1 + a42 * k2 + a43 * k3));
    const Matrix k5 = f(t + c5 * h, y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    const Matrix k6 =
        f(t + h, y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    Matrix y_new = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    const Matrix k7 = f(t + h, y_new);
    const Matrix err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

    const auto scale = (cfg.abs_tol + cfg.rel_tol * y.cwiseAbs().cwiseMax(y_new.cwiseAbs()).array());
    const double err_norm = (err.cwiseAbs().array() / scale).maxCoeff();

    if (err_norm <= 1.0) {
      t += h;
      y = symmetrized(y_new);
      k1 = f(t, y);
      ++steps;
    }
    const double factor =
        err_norm == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err_norm, -0.2), 0.2, 5.0);
    h = std::min(h * factor, cfg.max_step_ps);
    if (t < t1 && h < 1e-12 * std::max(1.0, std::abs(t))) {
      std::ostringstream os;
      os << "step size underflow at t = " << t << " ps (h = " << h << " ps, error norm "
         << err_norm << ", " << steps << " accepted steps)";
      throw NumericalError(os.str());
    }
  }
  return y;
}

template <class Rhs>
Matrix integrate_rk4(const Rhs& f, Matrix y, double t0, double t1, double step) {
  const auto n = static_cast<long>(std::ceil((t1 - t0) / step - 1e-9));
  const double h = (t1 - t0) / static_cast<double>(std::max(n, 1L));
  for (long i = 0; i < std::max(n, 1L); ++i) {
    const double t = t0 + static_cast<double>(i) * h;
    const Matrix k1 = f(t, y);
    const Matrix k2 = f(t + 0.5 * h, y + (0.5 * h) * k1);
    const Matrix k3 = f(t + 0.5 * h, y + (0.5 * h) * k2);
    const Matrix k4 = f(t + h, y + h * k3);
    y = symmetrized(y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
  }
  return y;
}

// Superoperator of one mode acting on vec(X), index i * d + j for X(i, j).
Matrix mode_superoperator(int d, const ModeGenerator& g) {
  const Matrix a = annihilation_op(d);
  const Matrix ad = a.adjoint();
  const Matrix n = number_op(d);
  std::vector<Matrix> jumps;
  if (g.kappa > 0.0) {
    jumps.push_back(std::sqrt(g.kappa * (1.0 + g.n_th)) * a);
    if (g.n_th > 0.0) jumps.push_back(std::sqrt(g.kappa * g.n_th) * ad);
  }
  const cplx i(0.0, 1.0);
  Matrix s = Matrix::Zero(d * d, d * d);
  for (int p = 0; p < d; ++p)
    for (int q = 0; q < d; ++q) {
      Matrix x = Matrix::Zero(d, d);
      x(p, q) = 1.0;
      Matrix out = -i * g.frequency * (n * x - x * n);
      for (const auto& c : jumps) {
        const Matrix cdc = c.adjoint() * c;
        out += c * x * c.adjoint() - 0.5 * (cdc * x + x * cdc);
      }
      for (int r = 0; r < d; ++r)
        for (int s2 = 0; s2 < d; ++s2) s(r * d + s2, p * d + q) = out(r, s2);
    }
  return s;
}

}  // namespace

void IntegratorConfig::validate() const {
  if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) throw InvalidArgument("integrator tolerances must be > 0");
  if (!(max_step_ps > 0.0)) throw InvalidArgument("integrator max_step must be > 0");
  if (!(fixed_step_ps > 0.0)) throw InvalidArgument("integrator fixed step must be > 0");
}

Matrix lindblad_derivative(const Matrix& rho, const Matrix& h, std::span<const Op> collapse) {
  if (rho.rows() != h.rows() || rho.cols() != h.cols())
    throw DimensionError("lindblad_derivative: state and Hamiltonian dimensions differ");
  const cplx i(0.0, 1.0);
  Matrix out = -i * (h * rho - rho * h);
  for (const Op& c : collapse) {
    const Matrix& cm = c.matrix();
    if (cm.rows() != rho.rows())
      throw DimensionError("lindblad_derivative: collapse operator dimension mismatch");
    const Matrix cdc = cm.adjoint() * cm;
    out += cm * rho * cm.adjoint() - 0.5 * (cdc * rho + rho * cdc);
  }
  return out;
}

Matrix lindblad_derivative(const DensityMatrix& rho, const Op& hamiltonian,
                           std::span<const Op> collapse) {
  if (!(rho.space() == hamiltonian.space()))
    throw DimensionError("lindblad_derivative: state and Hamiltonian live on different spaces");
  for (const Op& c : collapse)
    if (!(c.space() == rho.space()))
      throw DimensionError("lindblad_derivative: collapse operator on a different space");
  return lindblad_derivative(rho.matrix(), hamiltonian.matrix(), collapse);
}

MasterEquation::MasterEquation(const SystemParams& params, const HilbertSpace& space)
    : params_(params), space_(space) {
  params_.validate();
  const HamiltonianParts parts = hamiltonian_parts(params_, space_);
  Matrix damping = Matrix::Zero(space_.total_dim(), space_.total_dim());
  for (const Op& c : collapse_operators(params_, space_)) {
    damping += c.matrix().adjoint() * c.matrix();
    collapse_.push_back(to_sparse(c.matrix()));
  }
  free_eff_ = to_sparse(parts.free.matrix() - cplx(0.0, 0.5) * damping);
  write_ = to_sparse(parts.write.matrix());
  read_ = to_sparse(parts.read.matrix());
  fwm_ = to_sparse(parts.fwm.matrix());
}

Matrix MasterEquation::derivative(double t, const Matrix& rho) const {
  // With H_eff = H - i/2 sum C^dagger C and rho Hermitian:
  //   d rho = Y + Y^dagger + sum C rho C^dagger,  Y = -i H_eff rho.
  const double gw = windowed_envelope(t, params_.write);
  const double gr = windowed_envelope(t, params_.read);
  Matrix hr = free_eff_ * rho;
  if (gw != 0.0) hr += gw * (write_ * rho);
  if (gr != 0.0) hr += gr * (read_ * rho);
  if (gw != 0.0 && gr != 0.0 && fwm_.nonZeros() > 0) hr += (gw * gr) * (fwm_ * rho);
  const Matrix y = cplx(0.0, -1.0) * hr;
  Matrix out = y + y.adjoint();
  for (const Sparse& c : collapse_) {
    const Matrix cr = c * rho;                 // C rho
    out += c * Matrix(cr.adjoint());           // C (C rho)^dagger = C rho C^dagger
  }
  return out;
}

bool MasterEquation::interaction_free(double t0, double t1) const {
  const auto clear = [&](const PulseSpec& p) { return t1 <= p.window_begin() || t0 >= p.window_end(); };
  return clear(params_.write) && clear(params_.read);
}

std::vector<ModeGenerator> free_generators(const SystemParams& params) {
  return {{params.phonons[0].delta, params.phonons[0].kappa, params.n_th},
          {params.phonons[1].delta, params.phonons[1].kappa, params.n_th},
          {params.delta_stokes, 0.0, 0.0},
          {params.delta_antistokes, 0.0, 0.0}};
}

Matrix free_evolution(const Matrix& rho, const HilbertSpace& space,
                      std::span<const ModeGenerator> generators, double duration) {
  if (generators.size() != space.num_modes())
    throw DimensionError("free_evolution: need one generator per mode");
  if (rho.rows() != space.total_dim() || rho.cols() != space.total_dim())
    throw DimensionError("free_evolution: state does not match space");
  Matrix out = rho;
  const Eigen::Index n = space.total_dim();
  for (std::size_t k = 0; k < space.num_modes(); ++k) {
    const int d = space.dim(k);
    const Eigen::Index s = space.stride(k);
    const Matrix prop = (mode_superoperator(d, generators[k]) * duration).exp();
    Eigen::VectorXcd v(d * d);
    for (Eigen::Index r = 0; r < n; ++r) {
      if (space.level(r, k) != 0) continue;
      for (Eigen::Index c = 0; c < n; ++c) {
        if (space.level(c, k) != 0) continue;
        for (int i = 0; i < d; ++i)
          for (int j = 0; j < d; ++j) v(i * d + j) = out(r + i * s, c + j * s);
        const Eigen::VectorXcd w = prop * v;
        for (int i = 0; i < d; ++i)
          for (int j = 0; j < d; ++j) out(r + i * s, c + j * s) = w(i * d + j);
      }
    }
  }
  return symmetrized(out);
}

Matrix integrate(const MasterEquation& eq, Matrix rho, double t0, double t1,
                 const IntegratorConfig& config) {
  config.validate();
  if (!(t1 > t0)) throw InvalidArgument("integrate: t_end must be after t_start");
  const auto f = [&eq](double t, const Matrix& y) { return eq.derivative(t, y); };
  if (config.method == IntegrationMethod::rk4)
    return integrate_rk4(f, std::move(rho), t0, t1, config.fixed_step_ps);
  return integrate_dopri(f, std::move(rho), t0, t1, config);
}

DensityMatrix evolve(const DensityMatrix& rho0, double t0, double t1, const SystemParams& params,
                     const IntegratorConfig& config) {
  const MasterEquation eq(params, rho0.space());
  Matrix out = integrate(eq, rho0.matrix(), t0, t1, config);
  return DensityMatrix(rho0.space(), std::move(out), {1e-10, 1e-8, -1e-8});
}

DensityMatrix initial_state(const SystemParams& params, const HilbertSpace& space) {
  require_raman_space(space);
  const std::array<Matrix, 4> factors = {
      thermal_state(space.dim(mode::b1), params.n_th),
      thermal_state(space.dim(mode::b2), params.n_th),
      fock_state(space.dim(mode::stokes), 0),
      fock_state(space.dim(mode::anti_stokes), 0)};
  return DensityMatrix(space, kron(factors));
}

TwoPulseProtocol::TwoPulseProtocol(SystemParams params, HilbertSpace space, IntegratorConfig config)
    : params_(std::move(params)), space_(std::move(space)), config_(config) {
  params_.validate();
  config_.validate();
  require_raman_space(space_);
  params_.write.t0_ps = 0.0;
  generators_ = free_generators(params_);
}

Matrix TwoPulseProtocol::propagate(const MasterEquation& eq, const Matrix& rho, double t0,
                                   double t1) const {
  if (t1 <= t0) return rho;
  if (config_.analytic_gaps && eq.interaction_free(t0, t1))
    return free_evolution(rho, space_, generators_, t1 - t0);
  return integrate(eq, rho, t0, t1, config_);
}

const Matrix& TwoPulseProtocol::after_write() const {
  std::call_once(write_once_, [this] {
    SystemParams p = params_;
    p.read.t0_ps = std::numeric_limits<double>::infinity();
    const MasterEquation eq(p, space_);
    after_write_ = integrate(eq, initial_state(p, space_).matrix(), p.write.window_begin(),
                             p.write.window_end(), config_);
  });
  return *after_write_;
}

ProtocolResult TwoPulseProtocol::run(double delta_t, std::span<const double> sample_times) const {
  SystemParams p = params_;
  p.read.t0_ps = delta_t;
  const double t_begin = p.write.window_begin();
  const double t_write_end = p.write.window_end();
  if (p.read.window_begin() < t_begin)
    throw InvalidArgument("run_two_pulse: read window starts before the write window");
  const double t_end = std::max(p.read.window_end(), t_write_end);
  const bool separated = p.read.window_begin() >= t_write_end;

  const MasterEquation eq(p, space_);
  const auto make_state = [&](const Matrix& m) {
    return DensityMatrix(space_, m, {1e-10, 1e-8, -1e-8});
  };

  std::vector<double> samples(sample_times.begin(), sample_times.end());
  std::sort(samples.begin(), samples.end());
  for (double s : samples)
    if (s < t_begin || s > t_end)
      throw InvalidArgument("run_two_pulse: sample time outside the simulated interval");
  const bool use_cache = separated && (samples.empty() || samples.front() >= t_write_end);

  std::vector<double> marks = {t_write_end, p.read.window_begin(), t_end};
  marks.insert(marks.end(), samples.begin(), samples.end());
  std::sort(marks.begin(), marks.end());
  marks.erase(std::unique(marks.begin(), marks.end()), marks.end());

  Matrix rho = use_cache ? after_write() : initial_state(p, space_).matrix();
  double t = use_cache ? t_write_end : t_begin;
  std::optional<Matrix> after_write_state;
  if (use_cache) after_write_state = rho;

  std::vector<TimelineSample> timeline;
  for (double m : marks) {
    if (m < t) continue;
    rho = propagate(eq, rho, t, m);
    t = m;
    if (t == t_write_end && !after_write_state) after_write_state = rho;
    if (std::binary_search(samples.begin(), samples.end(), m))
      timeline.push_back({m, make_state(rho)});
  }
  return ProtocolResult{make_state(rho), make_state(*after_write_state), std::move(timeline)};
}

ProtocolResult run_two_pulse(double delta_t, const SystemParams& params, const HilbertSpace& space,
                             const IntegratorConfig& config) {
  const TwoPulseProtocol protocol(params, space, config);
  return protocol.run(delta_t);
}

}  // namespace raman
