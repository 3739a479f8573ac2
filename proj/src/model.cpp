#include "raman/model.hpp"

#include <cmath>
#include <string>

#include "raman/error.hpp"

namespace raman {

namespace {

const std::array<const char*, 4> kModeLabels = {"b1", "b2", "a_S", "a_A"};

}  // namespace

HilbertSpace raman_space(const std::array<int, 4>& dims) {
  std::vector<ModeSpec> modes;
  for (std::size_t k = 0; k < 4; ++k) modes.push_back({kModeLabels[k], dims[k]});
  return HilbertSpace(std::move(modes));
}

void require_raman_space(const HilbertSpace& space) {
  if (space.num_modes() != 4)
    throw DimensionError("expected the four-mode (b1, b2, a_S, a_A) space, got " +
                         std::to_string(space.num_modes()) + " modes");
  for (std::size_t k = 0; k < 4; ++k)
    if (space.mode(k).label != kModeLabels[k])
      throw DimensionError("mode " + std::to_string(k) + " is '" + space.mode(k).label +
                           "', expected '" + kModeLabels[k] + "'");
}

void SystemParams::validate() const {
  const double norm = phonons[0].beta * phonons[0].beta + phonons[1].beta * phonons[1].beta;
  if (std::abs(norm - 1.0) > 1e-9)
    throw InvalidArgument("beta_1^2 + beta_2^2 = " + std::to_string(norm) + ", must be 1");
  for (std::size_t j = 0; j < 2; ++j)
    if (!(phonons[j].kappa > 0.0))
      throw InvalidArgument("phonon " + std::to_string(j + 1) + " decay rate must be > 0");
  if (!(n_th >= 0.0)) throw InvalidArgument("n_th must be >= 0");
  if (!(write.sigma_ps > 0.0) || !(read.sigma_ps > 0.0))
    throw InvalidArgument("pulse sigma must be > 0");
}

SystemParams SystemParams::cs2_defaults() {
  SystemParams p;
  // 655.3 cm^-1 (b1) and 646.7 cm^-1 (b2), 258 GHz apart, split about the mean.
  const double half_beat = std::numbers::pi * 0.258;
  p.phonons[0] = {half_beat, std::sqrt(1.0 / 3.0), 1.0 / 8.4};
  p.phonons[1] = {-half_beat, std::sqrt(2.0 / 3.0), 1.0 / 1.7};
  p.write = {0.0, sigma_from_fwhm(0.2), PulseRole::write};
  p.read = {1.0, sigma_from_fwhm(0.2), PulseRole::read};
  return p;
}

double sigma_from_fwhm(double fwhm_ps) {
  return fwhm_ps / (2.0 * std::sqrt(2.0 * std::numbers::ln2));
}

double envelope(double t_ps, const PulseSpec& pulse) {
  const double x = (t_ps - pulse.t0_ps) / pulse.sigma_ps;
  return std::exp(-0.5 * x * x);
}

Op HamiltonianParts::at(double t_ps, const SystemParams& params) const {
  const double gw = envelope(t_ps, params.write);
  const double gr = envelope(t_ps, params.read);
  return Op(free.space(), free.matrix() + gw * write.matrix() + gr * read.matrix() +
                              (gw * gr) * fwm.matrix());
}

HamiltonianParts hamiltonian_parts(const SystemParams& params, const HilbertSpace& space) {
  require_raman_space(space);
  const auto lower = [&](std::size_t k) { return embed(annihilation_op(space.dim(k)), k, space); };
  const auto number = [&](std::size_t k) { return embed(number_op(space.dim(k)), k, space); };

  const Op b1 = lower(mode::b1);
  const Op b2 = lower(mode::b2);
  const Op as = lower(mode::stokes);
  const Op aa = lower(mode::anti_stokes);
  const double beta1 = params.phonons[0].beta;
  const double beta2 = params.phonons[1].beta;
  const cplx phase_w = std::polar(1.0, -params.theta_write());
  const cplx phase_r = std::polar(1.0, -params.theta_read());

  const Op free = cplx(params.phonons[0].delta) * number(mode::b1) +
                  cplx(params.phonons[1].delta) * number(mode::b2) +
                  cplx(params.delta_stokes) * number(mode::stokes) +
                  cplx(params.delta_antistokes) * number(mode::anti_stokes);

  // Stokes: a_S^dagger (beta1 b1^dagger + e^{-i theta_w} beta2 b2^dagger)
  const Op stokes_pair =
      as.adjoint() * (cplx(beta1) * b1.adjoint() + (phase_w * beta2) * b2.adjoint());
  // anti-Stokes: a_A^dagger (beta1 b1 + e^{-i theta_r} beta2 b2)
  const Op antistokes_swap = aa.adjoint() * (cplx(beta1) * b1 + (phase_r * beta2) * b2);
  const Op fwm_pair = as * aa;

  const auto hermitian = [](double lambda, const Op& x) {
    return cplx(lambda) * (x + x.adjoint());
  };
  return HamiltonianParts{free, hermitian(params.lambda_write_stokes, stokes_pair),
                          hermitian(params.lambda_read_antistokes, antistokes_swap),
                          hermitian(params.lambda_fwm, fwm_pair)};
}

Op hamiltonian_at(double t_ps, const SystemParams& params, const HilbertSpace& space) {
  return hamiltonian_parts(params, space).at(t_ps, params);
}

std::vector<Op> collapse_operators(const SystemParams& params, const HilbertSpace& space) {
  require_raman_space(space);
  std::vector<Op> out;
  const std::array<std::size_t, 2> modes = {mode::b1, mode::b2};
  for (std::size_t j = 0; j < 2; ++j) {
    const Op b = embed(annihilation_op(space.dim(modes[j])), modes[j], space);
    const double kappa = params.phonons[j].kappa;
    out.push_back(cplx(std::sqrt(kappa * (1.0 + params.n_th))) * b);
    out.push_back(cplx(std::sqrt(kappa * params.n_th)) * b.adjoint());
  }
  return out;
}

}  // namespace raman
