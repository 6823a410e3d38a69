#pragma once

#include <cmath>
#include <string>

#include "fewbose/constants.hpp"
#include "fewbose/errors.hpp"

namespace fewbose {

// Published Feshbach-resonance descriptor, in experimental units.
struct ResonanceParams {
  std::string label;
  double B0_gauss = 0.0;
  double delta_B_gauss = 0.0;  // resonance width
  double a_bg_a0 = 0.0;        // background scattering length, Bohr radii
  double delta_mu_muB = 0.0;   // magnetic-moment difference, signed, |mu_B| units
  double R_vdW_a0 = 0.0;       // van der Waals length, Bohr radii
  double b_a0 = 0.0;           // interaction range; <= 0 means "use R_vdW"
  double mass_amu = 0.0;

  double effective_b_a0() const { return b_a0 > 0.0 ? b_a0 : R_vdW_a0; }

  void validate() const {
    if (mass_amu <= 0.0) throw ConfigError(label + ": mass must be positive");
    if (R_vdW_a0 <= 0.0) throw ConfigError(label + ": R_vdW must be positive");
    if (effective_b_a0() <= 0.0) throw ConfigError(label + ": b must be positive");
    if (delta_mu_muB * delta_B_gauss * a_bg_a0 < 0.0)
      throw SignMismatch(label +
                         ": delta_mu*DeltaB must have the same sign as a_bg");
  }
};

// Internal convention: hbar = m = 1, lengths in units of the interaction
// range b. The unit system is the single place carrying physical constants.
struct UnitSystem {
  double mass_amu = 0.0;
  double length_a0 = 0.0;  // one internal length, in Bohr radii

  double mass_kg() const { return mass_amu * constants::amu; }
  double length_m() const { return length_a0 * constants::bohr_radius; }
  double energy_joule() const {
    const double l = length_m();
    return constants::hbar * constants::hbar / (mass_kg() * l * l);
  }
  double energy_h_mhz() const { return energy_joule() / constants::planck_h * 1e-6; }
  double time_s() const { return constants::hbar / energy_joule(); }
  // cm^6/s carried by one unit of reduced recombination constant (l^4 hbar/m).
  double alpha_cm6_s() const {
    const double l = length_m();
    return l * l * l * l * constants::hbar / mass_kg() * 1e12;
  }
  // Reduced energy per gauss for a magnetic-moment difference in |mu_B| units.
  double gauss_to_energy(double delta_mu_muB) const {
    return delta_mu_muB * constants::bohr_magneton * constants::gauss /
           energy_joule();
  }

  static UnitSystem for_resonance(const ResonanceParams& res) {
    return UnitSystem{res.mass_amu, res.effective_b_a0()};
  }
};

// Two-channel couplings in reduced units (hbar = m = 1, length = b).
struct ModelCouplings {
  double g0 = 0.0;       // open-channel separable strength
  double g0_crit = 0.0;  // -4 pi^(3/2) b
  double lambda = 0.0;   // interchannel coupling, chosen real positive
  double nu_offset = 0.0;  // E_mol - nu = 2 lambda^2/g0 - delta_mu*DeltaB
  double b = 1.0;
};

namespace detail {
inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kSqrtPi = 1.77245385090551602730;
}  // namespace detail

// Calibrated model in reduced units plus the field map back to gauss.
struct Model {
  std::string label;
  double a_bg = 0.0;     // reduced
  double b = 1.0;        // reduced (1 unless running range studies)
  double W = 0.0;        // delta_mu * DeltaB, reduced energy
  double delta_mu = 0.0; // reduced energy per gauss
  double B0 = 0.0;       // gauss
  double delta_B = 0.0;  // gauss
  double R_vdW = 1.0;    // reduced
  ModelCouplings couplings;
  UnitSystem units;

  double nu(double B) const { return delta_mu * (B - B0); }

  // a(B) = a_bg (1 - DeltaB/(B - B0)), reduced.
  double scattering_length(double B) const {
    if (B == B0) throw PoleAtResonance(label + ": B = B0");
    return a_bg * (1.0 - delta_B / (B - B0));
  }

  double e_mol(double nu_val) const { return nu_val + couplings.nu_offset; }
  double r_star() const { return 1.0 / (a_bg * W); }

  static Model from_resonance(const ResonanceParams& res);
  // Purely reduced parameter set (for range studies); the field map is the
  // identity on nu: B plays the role of nu directly.
  static Model from_reduced(double a_bg, double b, double W,
                            std::string label = "reduced");
};

// Inverts a_bg = b g0 sqrt(pi)/(g0 - g0c), DeltaB = 8 pi lambda^2 a_bg/(g0^2 delta_mu).
inline ModelCouplings derive_couplings_reduced(double a_bg, double b, double W,
                                               const std::string& label = "") {
  const double g0_crit = -4.0 * detail::kPi * detail::kSqrtPi * b;
  const double denom = a_bg - b * detail::kSqrtPi;
  if (std::abs(denom) < 1e-10 * b)
    throw SingularBackground(label + ": a_bg = b*sqrt(pi)");
  if (W * a_bg < 0.0)
    throw SignMismatch(label + ": delta_mu*DeltaB and a_bg differ in sign");
  ModelCouplings c;
  c.b = b;
  c.g0_crit = g0_crit;
  c.g0 = a_bg * g0_crit / denom;
  const double lambda2 = c.g0 * c.g0 * W / (8.0 * detail::kPi * a_bg);
  c.lambda = std::sqrt(lambda2);
  c.nu_offset = 2.0 * lambda2 / c.g0 - W;
  return c;
}

inline ModelCouplings derive_couplings(const ResonanceParams& res) {
  res.validate();
  const UnitSystem u = UnitSystem::for_resonance(res);
  const double b = 1.0;
  const double a_bg = res.a_bg_a0 / res.effective_b_a0();
  const double W = u.gauss_to_energy(res.delta_mu_muB) * res.delta_B_gauss;
  return derive_couplings_reduced(a_bg, b, W, res.label);
}

// Round-trip checks for the coupling inversion.
inline double a_bg_from_couplings(const ModelCouplings& c) {
  return c.b * c.g0 * detail::kSqrtPi / (c.g0 - c.g0_crit);
}
inline double delta_B_from_couplings(const ModelCouplings& c, double a_bg,
                                     double delta_mu) {
  return 8.0 * detail::kPi * c.lambda * c.lambda * a_bg /
         (c.g0 * c.g0 * delta_mu);
}

inline Model Model::from_resonance(const ResonanceParams& res) {
  res.validate();
  Model m;
  m.label = res.label;
  m.units = UnitSystem::for_resonance(res);
  m.b = 1.0;
  m.a_bg = res.a_bg_a0 / res.effective_b_a0();
  m.R_vdW = res.R_vdW_a0 / res.effective_b_a0();
  m.delta_mu = m.units.gauss_to_energy(res.delta_mu_muB);
  m.B0 = res.B0_gauss;
  m.delta_B = res.delta_B_gauss;
  m.W = m.delta_mu * m.delta_B;
  m.couplings = derive_couplings_reduced(m.a_bg, m.b, m.W, m.label);
  return m;
}

inline Model Model::from_reduced(double a_bg, double b, double W,
                                 std::string label) {
  Model m;
  m.label = std::move(label);
  m.a_bg = a_bg;
  m.b = b;
  m.W = W;
  m.delta_mu = 1.0;  // nu(B) = B
  m.B0 = 0.0;
  m.delta_B = W;
  m.R_vdW = b;
  m.couplings = derive_couplings_reduced(a_bg, b, W, m.label);
  m.units = UnitSystem{1.0, 1.0};
  return m;
}

// Energy detuning nu = delta_mu (B - B0), reduced units.
inline double detuning(const ResonanceParams& res, double B_gauss) {
  return UnitSystem::for_resonance(res).gauss_to_energy(res.delta_mu_muB) *
         (B_gauss - res.B0_gauss);
}

// a(B) in Bohr radii.
inline double scattering_length(const ResonanceParams& res, double B_gauss) {
  if (B_gauss == res.B0_gauss) throw PoleAtResonance(res.label + ": B = B0");
  return res.a_bg_a0 * (1.0 - res.delta_B_gauss / (B_gauss - res.B0_gauss));
}

}  // namespace fewbose
