#include "raman/measurement.hpp"

#include <algorithm>

#include <cmath>
#include <string>

#include "raman/error.hpp"
#include "raman/model.hpp"

namespace raman {

namespace {

bool is_diagonal(const Op& op) {
  const Matrix& m = op.matrix();
  return (m - Matrix(m.diagonal().asDiagonal())).cwiseAbs().maxCoeff() == 0.0;
}

// Detection operators are diagonal in the Fock basis; this is their diagonal.
Eigen::VectorXd diagonal_of(const Op& op) {
  if (!is_diagonal(op)) throw InvalidArgument("detection operator must be diagonal in the Fock basis");
  return op.matrix().diagonal().real();
}

double diagonal_expectation(const DensityMatrix& rho, const Eigen::VectorXd& d) {
  return rho.matrix().diagonal().real().dot(d);
}

}  // namespace

void DetectorModel::validate() const {
  for (Channel c : {Channel::stokes, Channel::anti_stokes}) {
    const char* name = c == Channel::stokes ? "Stokes" : "anti-Stokes";
    if (!(eta(c) >= 0.0 && eta(c) <= 1.0))
      throw InvalidArgument(std::string(name) + " efficiency must lie in [0, 1]");
    if (!(pdc(c) >= 0.0 && pdc(c) < 1.0))
      throw InvalidArgument(std::string(name) + " dark-count probability must lie in [0, 1)");
  }
}

Op detection_operator(Channel channel, const DetectorModel& model, const HilbertSpace& space) {
  model.validate();
  require_raman_space(space);
  const std::size_t k = channel == Channel::stokes ? mode::stokes : mode::anti_stokes;
  const int d = space.dim(k);
  Matrix local = Matrix::Zero(d, d);
  for (int n = 0; n < d; ++n)
    local(n, n) = 1.0 - (1.0 - model.pdc(channel)) * std::pow(1.0 - model.eta(channel), n);
  return embed(local, k, space);
}

CoincidenceStats coincidence_stats(const DensityMatrix& rho, const Op& d_s, const Op& d_a) {
  if (!(rho.space() == d_s.space()) || !(rho.space() == d_a.space()))
    throw DimensionError("coincidence_stats: operators and state live on different spaces");
  CoincidenceStats out;
  if (is_diagonal(d_s) && is_diagonal(d_a)) {
    const Eigen::VectorXd ds = diagonal_of(d_s);
    const Eigen::VectorXd da = diagonal_of(d_a);
    out.p_s = diagonal_expectation(rho, ds);
    out.p_a = diagonal_expectation(rho, da);
    out.p_sa = diagonal_expectation(rho, ds.cwiseProduct(da));
  } else {
    out.p_s = expectation(rho, d_s).real();
    out.p_a = expectation(rho, d_a).real();
    out.p_sa = expectation(rho, d_s * d_a).real();
  }
  if (!(out.p_s > 0.0) || !(out.p_a > 0.0))
    throw NumericalError("g2 normalization undefined: <D_S> = " + std::to_string(out.p_s) +
                         ", <D_A> = " + std::to_string(out.p_a));
  out.g2 = out.p_sa / (out.p_s * out.p_a);
  return out;
}

double coincidence_g2(const DensityMatrix& rho, const Op& d_s, const Op& d_a) {
  return coincidence_stats(rho, d_s, d_a).g2;
}

HeraldedState herald_conditional_state(const DensityMatrix& rho, const Op& d_s) {
  if (!(rho.space() == d_s.space()))
    throw DimensionError("herald_conditional_state: operator and state live on different spaces");
  require_raman_space(rho.space());
  const Eigen::VectorXd d = diagonal_of(d_s);
  const double prob = diagonal_expectation(rho, d);
  if (!(prob > 0.0)) throw NumericalError("herald impossible: <D_S> = " + std::to_string(prob));
  const Eigen::VectorXd root = d.cwiseMax(0.0).cwiseSqrt();
  const Matrix post = root.cast<cplx>().asDiagonal() * rho.matrix() * root.cast<cplx>().asDiagonal();
  Matrix reduced = partial_trace(post, rho.space(), kPhononModes) / prob;
  return {DensityMatrix(rho.space().subspace(kPhononModes), symmetrized(reduced),
                        {1e-10, 1e-8, -1e-8}),
          prob};
}

RealVector fock_populations(const DensityMatrix& rho, std::size_t mode, int n_max) {
  if (mode >= rho.space().num_modes())
    throw DimensionError("fock_populations: mode index out of range");
  const std::size_t keep[1] = {mode};
  const Matrix marginal = partial_trace(rho.matrix(), rho.space(), keep);
  RealVector out = RealVector::Zero(n_max);
  for (int n = 0; n < n_max && n < marginal.rows(); ++n) out(n) = marginal(n, n).real();
  return out;
}

double log_negativity(const DensityMatrix& rho_ph) {
  // ||rho^T||_1 >= tr rho^T = 1; clamp the rounding noise of separable states.
  return std::max(0.0, std::log2(trace_norm(partial_transpose(rho_ph, 1))));
}

}  // namespace raman
