#pragma once

#include <numbers>

#include "nvcav/errors.hpp"

namespace nvcav {

// Physical constants, SI. kJoulesPerEv is the only eV<->J conversion factor
// in the codebase; everything downstream works in SI and converts at the API
// boundary.
inline constexpr double kSpeedOfLight = 299'792'458.0;             // m/s
inline constexpr double kPlanck = 6.626'070'15e-34;                // J s
inline constexpr double kReducedPlanck = kPlanck / (2.0 * std::numbers::pi);
inline constexpr double kVacuumPermittivity = 8.854'187'8128e-12;  // F/m
inline constexpr double kJoulesPerEv = 1.602'176'634e-19;          // J
inline constexpr double kDiamondRefractiveIndex = 2.4;

// Energy of a single photon. Canonically stored in eV (so eV round-trips are
// bit-exact); joules, vacuum wavelength and angular frequency convert at the
// accessor boundary.
class PhotonEnergy {
 public:
  static PhotonEnergy from_ev(double ev);
  static PhotonEnergy from_joules(double joules) { return from_ev(joules / kJoulesPerEv); }
  static PhotonEnergy from_wavelength(double lambda_m);  // E = h c / lambda
  static PhotonEnergy from_angular_frequency(double omega_rad_s);

  double ev() const { return ev_; }
  double joules() const { return ev_ * kJoulesPerEv; }
  double angular_frequency() const { return joules() / kReducedPlanck; }   // rad/s
  double wavelength() const { return kPlanck * kSpeedOfLight / joules(); }  // m

 private:
  explicit PhotonEnergy(double ev) : ev_(ev) {}
  double ev_;
};

PhotonEnergy energy_from_wavelength(double lambda_m);

// eps0 * n^2 for a non-magnetic medium of refractive index n.
double dielectric_constant(double refractive_index);  // F/m

}  // namespace nvcav
