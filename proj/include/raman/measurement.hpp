#pragma once

#include <cstddef>
#include <span>

#include "raman/hilbert.hpp"

namespace raman {

enum class Channel { stokes, anti_stokes };

/// Click detector with finite efficiency and dark counts, per detection window.
struct DetectorModel {
  double eta_stokes = 0.1;
  double eta_antistokes = 0.1;
  double pdc_stokes = 2e-4;
  double pdc_antistokes = 1e-5;

  double eta(Channel c) const { return c == Channel::stokes ? eta_stokes : eta_antistokes; }
  double pdc(Channel c) const { return c == Channel::stokes ? pdc_stokes : pdc_antistokes; }

  void validate() const;

  /// Unit efficiency, no dark counts.
  static DetectorModel ideal() { return {1.0, 1.0, 0.0, 0.0}; }
};

/// D = 1 - (1 - p_dc)(1 - eta)^n on the channel's photon mode, identity elsewhere.
Op detection_operator(Channel channel, const DetectorModel& model, const HilbertSpace& space);

struct CoincidenceStats {
  double p_s = 0.0;
  double p_a = 0.0;
  double p_sa = 0.0;
  double g2 = 0.0;
};

/// Click probabilities and their normalized coincidence <D_S D_A> / (<D_S><D_A>).
CoincidenceStats coincidence_stats(const DensityMatrix& rho, const Op& d_s, const Op& d_a);

double coincidence_g2(const DensityMatrix& rho, const Op& d_s, const Op& d_a);

struct HeraldedState {
  DensityMatrix rho_ph;  ///< reduced state of the two phonon modes
  double herald_prob;    ///< <D_S> before the herald
};

/// Phonon state conditioned on a Stokes click: tr_photons(sqrt(D) rho sqrt(D)) / <D>.
HeraldedState herald_conditional_state(const DensityMatrix& rho_after_write, const Op& d_s);

/// Fock distribution P(0..n_max-1) of one mode of a two-mode (or any) state.
RealVector fock_populations(const DensityMatrix& rho, std::size_t mode, int n_max);

/// log2 || rho^{T_b2} ||_1 of a two-mode state.
double log_negativity(const DensityMatrix& rho_ph);

/// The two phonon modes of the four-mode space.
inline constexpr std::size_t kPhononModes[2] = {0, 1};

}  // namespace raman
