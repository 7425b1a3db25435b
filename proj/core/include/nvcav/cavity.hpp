#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "nvcav/errors.hpp"
#include "nvcav/units.hpp"

namespace nvcav {

// Fiber-coupled whispering-gallery mode, SI units throughout. gamma_beta is
// the backscattering rate splitting the clockwise/counter-clockwise pair into
// a standing-wave doublet; 0 means singlet. mode_volume (peak-energy-density
// definition) and group_index come from mode simulations and may be absent on
// freshly fitted modes.
struct CavityMode {
  double resonance_wavelength = 0.0;  // m
  double kappa = 0.0;                 // total energy decay rate, rad/s
  double kappa_ex = 0.0;              // taper coupling rate, rad/s
  double gamma_beta = 0.0;            // backscattering splitting, rad/s
  std::optional<double> mode_volume;  // m^3
  std::optional<double> group_index;
  std::string label;

  double resonance_angular_frequency() const;
  double loaded_q() const;  // omega_0 / kappa
  bool is_doublet() const { return gamma_beta > 0.0; }
  void validate() const;
};

// Transmission scan across a resonance. PL channels are optional and carry
// detector counts synchronized with the wavelength sweep. input_power is the
// power at the coupling region in watts; 0 means "not recorded".
struct DetuningScan {
  std::vector<double> wavelength;    // m, ascending
  std::vector<double> transmission;  // normalized to the off-resonant level
  std::vector<double> pl_nv0;        // counts/s, empty if not recorded
  std::vector<double> pl_nvm;
  double input_power = 0.0;  // W

  void validate(bool require_power = false) const;
};

// Mean intracavity photon number for power P incident in the taper,
// detuning Delta = omega_cav - omega.
double photons_singlet(const CavityMode& mode, double detuning, double power,
                       const PhotonEnergy& photon);
double photons_doublet(const CavityMode& mode, double detuning, double power,
                       const PhotonEnergy& photon);
// Dispatches on gamma_beta.
double intracavity_photons(const CavityMode& mode, double detuning, double power,
                           const PhotonEnergy& photon);

// Coupled-mode (amplitude-coherent) transmission lineshape.
double transmission_model(const CavityMode& mode, double detuning);

// Peak single-photon intensity inside the dielectric, c*hbar*omega/(4 n_g V_o).
double intensity_per_photon(const CavityMode& mode, const PhotonEnergy& photon);  // W/m^2
// Peak field per photon sqrt(hbar*omega / (2 eps V_o)).
double peak_field_per_photon(const CavityMode& mode, const PhotonEnergy& photon,
                             double permittivity);  // V/m

enum class LineshapeModel { singlet, doublet };

struct LineshapeFitOptions {
  int max_iterations = 300;
  double min_dip_depth = 0.02;  // no-resonance floor on max(T) - min(T)
};

struct LineshapeFit {
  CavityMode mode;
  double residual_rms = 0.0;
  int iterations = 0;
  bool converged = false;
};

class LineshapeFitError : public NonConvergenceError {
 public:
  LineshapeFitError(const std::string& what, LineshapeFit best)
      : NonConvergenceError(what), best_(std::move(best)) {}
  const LineshapeFit& best() const { return best_; }

 private:
  LineshapeFit best_;
};

// Least-squares fit of the coupled-mode lineshape. Seeds itself from the dip
// geometry; reports the undercoupled branch of kappa_ex (the lineshape cannot
// distinguish it from the overcoupled one). Throws NoResonanceError on flat
// scans and LineshapeFitError (carrying the best iterate) on non-convergence.
LineshapeFit fit_lineshape(const DetuningScan& scan, LineshapeModel model,
                           const LineshapeFitOptions& options = {});

// Plain incoherent two-Lorentzian-dip fit, for cross-checking doublet scans.
// Reports a loaded Q per dip.
struct TwoLorentzianFit {
  struct Dip {
    double wavelength = 0.0;  // m
    double kappa = 0.0;       // FWHM in rad/s
    double depth = 0.0;
    double loaded_q = 0.0;
  };
  std::array<Dip, 2> dips;  // ascending wavelength
  double residual_rms = 0.0;
  int iterations = 0;
  bool converged = false;
};

TwoLorentzianFit fit_two_lorentzian(const DetuningScan& scan,
                                    const LineshapeFitOptions& options = {});

}  // namespace nvcav
