#include "nvcav/units.hpp"

#include <cmath>
#include <string>

namespace nvcav {

PhotonEnergy PhotonEnergy::from_ev(double ev) {
  if (!std::isfinite(ev) || ev <= 0.0) {
    throw ValidationError("photon energy must be positive and finite, got " +
                          std::to_string(ev) + " eV");
  }
  return PhotonEnergy(ev);
}

PhotonEnergy PhotonEnergy::from_wavelength(double lambda_m) {
  if (!std::isfinite(lambda_m) || lambda_m <= 0.0) {
    throw ValidationError("wavelength must be positive and finite, got " +
                          std::to_string(lambda_m) + " m");
  }
  return from_joules(kPlanck * kSpeedOfLight / lambda_m);
}

PhotonEnergy PhotonEnergy::from_angular_frequency(double omega_rad_s) {
  return from_joules(kReducedPlanck * omega_rad_s);
}

PhotonEnergy energy_from_wavelength(double lambda_m) {
  return PhotonEnergy::from_wavelength(lambda_m);
}

double dielectric_constant(double refractive_index) {
  if (!(refractive_index >= 1.0)) {
    throw ValidationError("refractive index must be >= 1, got " +
                          std::to_string(refractive_index));
  }
  return kVacuumPermittivity * refractive_index * refractive_index;
}

}  // namespace nvcav
