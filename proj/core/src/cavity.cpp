#include "nvcav/cavity.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "nvcav/least_squares.hpp"

namespace nvcav {

using std::numbers::pi;

double CavityMode::resonance_angular_frequency() const {
  return 2.0 * pi * kSpeedOfLight / resonance_wavelength;
}

double CavityMode::loaded_q() const {
  return resonance_angular_frequency() / kappa;
}

void CavityMode::validate() const {
  if (!(resonance_wavelength > 0.0)) throw ValidationError("cavity mode: resonance wavelength must be positive");
  if (!(kappa > 0.0)) throw ValidationError("cavity mode: kappa must be positive");
  if (kappa_ex < 0.0 || kappa_ex > kappa) throw ValidationError("cavity mode: kappa_ex must lie in [0, kappa]");
  if (gamma_beta < 0.0) throw ValidationError("cavity mode: gamma_beta must be nonnegative");
  if (mode_volume && !(*mode_volume > 0.0)) throw ValidationError("cavity mode: mode volume must be positive");
  if (group_index && !(*group_index >= 1.0)) throw ValidationError("cavity mode: group index must be >= 1");
}

void DetuningScan::validate(bool require_power) const {
  if (wavelength.size() < 16) throw ValidationError("detuning scan: need at least 16 samples");
  if (transmission.size() != wavelength.size())
    throw ValidationError("detuning scan: wavelength/transmission length mismatch");
  if (!pl_nv0.empty() && pl_nv0.size() != wavelength.size())
    throw ValidationError("detuning scan: pl_nv0 length mismatch");
  if (!pl_nvm.empty() && pl_nvm.size() != wavelength.size())
    throw ValidationError("detuning scan: pl_nvm length mismatch");
  for (std::size_t i = 1; i < wavelength.size(); ++i) {
    if (!(wavelength[i] > wavelength[i - 1]))
      throw ValidationError("detuning scan: wavelengths must be strictly ascending");
  }
  constexpr double tol = 0.1;  // allowance for detector noise above unity
  for (double t : transmission) {
    if (!(t >= -tol && t <= 1.0 + tol))
      throw ValidationError("detuning scan: transmission outside [0, 1+tol]");
  }
  if (require_power && !(input_power > 0.0))
    throw ValidationError("detuning scan: input power required but not recorded");
  if (input_power < 0.0) throw ValidationError("detuning scan: input power must be nonnegative");
}

double photons_singlet(const CavityMode& mode, double detuning, double power,
                       const PhotonEnergy& photon) {
  if (power < 0.0) throw ValidationError("intracavity photons: power must be nonnegative");
  const std::complex<double> denom(mode.kappa / 2.0, -detuning);
  const std::complex<double> amplitude = std::sqrt(mode.kappa_ex) / denom;
  return std::norm(amplitude) * power / photon.joules();
}

double photons_doublet(const CavityMode& mode, double detuning, double power,
                       const PhotonEnergy& photon) {
  if (power < 0.0) throw ValidationError("intracavity photons: power must be nonnegative");
  const double half_kappa = mode.kappa / 2.0;
  const double half_split = mode.gamma_beta / 2.0;
  const double root = std::sqrt(mode.kappa_ex / 2.0);
  const std::complex<double> t_plus = root / std::complex<double>(half_kappa, -(detuning + half_split));
  const std::complex<double> t_minus = root / std::complex<double>(half_kappa, -(detuning - half_split));
  return std::norm(t_plus + t_minus) * power / photon.joules();
}

double intracavity_photons(const CavityMode& mode, double detuning, double power,
                           const PhotonEnergy& photon) {
  return mode.is_doublet() ? photons_doublet(mode, detuning, power, photon)
                           : photons_singlet(mode, detuning, power, photon);
}

double transmission_model(const CavityMode& mode, double detuning) {
  const double half_kappa = mode.kappa / 2.0;
  if (mode.is_doublet()) {
    const double half_split = mode.gamma_beta / 2.0;
    const std::complex<double> one(1.0, 0.0);
    const std::complex<double> a =
        (mode.kappa_ex / 2.0) / std::complex<double>(half_kappa, -(detuning + half_split));
    const std::complex<double> b =
        (mode.kappa_ex / 2.0) / std::complex<double>(half_kappa, -(detuning - half_split));
    return std::norm(one - a - b);
  }
  const std::complex<double> one(1.0, 0.0);
  const std::complex<double> a = mode.kappa_ex / std::complex<double>(half_kappa, -detuning);
  return std::norm(one - a);
}

double intensity_per_photon(const CavityMode& mode, const PhotonEnergy& photon) {
  if (!mode.mode_volume) throw ValidationError("intensity per photon: mode volume not set");
  if (!mode.group_index) throw ValidationError("intensity per photon: group index not set");
  return kSpeedOfLight * photon.joules() / (4.0 * *mode.group_index * *mode.mode_volume);
}

double peak_field_per_photon(const CavityMode& mode, const PhotonEnergy& photon,
                             double permittivity) {
  if (!(permittivity > 0.0)) throw ValidationError("peak field per photon: permittivity must be positive");
  if (!mode.mode_volume) throw ValidationError("peak field per photon: mode volume not set");
  return std::sqrt(photon.joules() / (2.0 * permittivity * *mode.mode_volume));
}

namespace {

double logistic(double u) { return 1.0 / (1.0 + std::exp(-u)); }
double logit(double s) { return std::log(s / (1.0 - s)); }

struct DipSeed {
  double omega0 = 0.0;      // rad/s
  double kappa = 0.0;       // rad/s
  double coupling = 0.3;    // kappa_ex / kappa
  double gamma_beta = 0.0;  // rad/s
};

// Geometry-derived initial guess: resonance from the transmission minimum,
// kappa from the dip FWHM, coupling from the dip depth, splitting from the
// separation of the two deepest minima.
DipSeed seed_from_scan(const std::vector<double>& omega, const std::vector<double>& t,
                       bool doublet) {
  const std::size_t n = omega.size();
  const double baseline = *std::max_element(t.begin(), t.end());

  const std::size_t i0 =
      static_cast<std::size_t>(std::min_element(t.begin(), t.end()) - t.begin());
  const double t_min = t[i0];
  const double half_level = 0.5 * (t_min + baseline);

  // half-depth crossings around the main dip
  double w_left = omega[i0], w_right = omega[i0];
  for (std::size_t i = i0; i-- > 0;) {
    if (t[i] >= half_level) { w_left = omega[i]; break; }
  }
  for (std::size_t i = i0 + 1; i < n; ++i) {
    if (t[i] >= half_level) { w_right = omega[i]; break; }
  }
  double fwhm = std::abs(w_left - w_right);
  if (!(fwhm > 0.0)) fwhm = std::abs(omega.front() - omega.back()) / 10.0;

  DipSeed seed;
  seed.omega0 = omega[i0];
  seed.kappa = fwhm;
  const double depth_ratio = std::clamp(t_min / std::max(baseline, 1e-12), 0.0, 1.0);
  seed.coupling = std::clamp(0.5 * (1.0 - std::sqrt(depth_ratio)), 0.02, 0.49);

  if (doublet) {
    // second-deepest minimum outside the first dip's FWHM window
    double best = baseline;
    std::size_t i1 = i0;
    for (std::size_t i = 0; i < n; ++i) {
      if (std::abs(omega[i] - omega[i0]) <= fwhm) continue;
      if (t[i] < best) { best = t[i]; i1 = i; }
    }
    if (i1 != i0 && best < baseline - 0.25 * (baseline - t_min)) {
      seed.gamma_beta = std::abs(omega[i1] - omega[i0]);
      seed.omega0 = 0.5 * (omega[i1] + omega[i0]);
    } else {
      seed.gamma_beta = fwhm;  // unresolved splitting
    }
  }
  return seed;
}

}  // namespace

LineshapeFit fit_lineshape(const DetuningScan& scan, LineshapeModel model,
                           const LineshapeFitOptions& options) {
  scan.validate();
  const bool doublet = model == LineshapeModel::doublet;

  const double t_max = *std::max_element(scan.transmission.begin(), scan.transmission.end());
  const double t_min = *std::min_element(scan.transmission.begin(), scan.transmission.end());
  if (t_max - t_min < options.min_dip_depth) {
    throw NoResonanceError("no resonance: transmission modulation " +
                           std::to_string(t_max - t_min) + " below floor " +
                           std::to_string(options.min_dip_depth));
  }

  std::vector<double> omega(scan.wavelength.size());
  for (std::size_t i = 0; i < omega.size(); ++i) {
    omega[i] = 2.0 * pi * kSpeedOfLight / scan.wavelength[i];
  }
  const DipSeed seed = seed_from_scan(omega, scan.transmission, doublet);

  // Unconstrained parameterization: detuning offset in units of the seed
  // kappa, log kappa, logit of kappa_ex/kappa, log gamma_beta.
  const double omega_ref = seed.omega0;
  const double kappa_ref = seed.kappa;
  auto unpack = [&](const Eigen::VectorXd& x) {
    CavityMode m;
    m.kappa = kappa_ref * std::exp(x[1]);
    m.kappa_ex = m.kappa * logistic(x[2]);
    m.gamma_beta = doublet ? kappa_ref * std::exp(x[3]) : 0.0;
    const double omega0 = omega_ref + x[0] * kappa_ref;
    m.resonance_wavelength = 2.0 * pi * kSpeedOfLight / omega0;
    return m;
  };

  ResidualFn residual = [&](const Eigen::VectorXd& x) {
    const CavityMode m = unpack(x);
    const double omega0 = m.resonance_angular_frequency();
    Eigen::VectorXd r(static_cast<Eigen::Index>(omega.size()));
    for (std::size_t i = 0; i < omega.size(); ++i) {
      r[static_cast<Eigen::Index>(i)] =
          transmission_model(m, omega0 - omega[i]) - scan.transmission[i];
    }
    return r;
  };

  Eigen::VectorXd x0(doublet ? 4 : 3);
  x0[0] = 0.0;
  x0[1] = 0.0;
  x0[2] = logit(std::clamp(seed.coupling, 0.02, 0.98));
  if (doublet) x0[3] = std::log(std::max(seed.gamma_beta, 1e-3 * kappa_ref) / kappa_ref);

  LeastSquaresOptions lsq;
  lsq.max_iterations = options.max_iterations;
  const LeastSquaresResult res = levenberg_marquardt(residual, x0, lsq);

  LineshapeFit fit;
  fit.mode = unpack(res.parameters);
  fit.residual_rms = res.residual_rms;
  fit.iterations = res.iterations;
  fit.converged = res.converged;
  if (!res.converged) {
    throw LineshapeFitError("lineshape fit did not converge within " +
                            std::to_string(options.max_iterations) + " iterations",
                            fit);
  }
  return fit;
}

TwoLorentzianFit fit_two_lorentzian(const DetuningScan& scan,
                                    const LineshapeFitOptions& options) {
  scan.validate();
  const double t_max = *std::max_element(scan.transmission.begin(), scan.transmission.end());
  const double t_min = *std::min_element(scan.transmission.begin(), scan.transmission.end());
  if (t_max - t_min < options.min_dip_depth) {
    throw NoResonanceError("no resonance: transmission modulation below floor");
  }

  std::vector<double> omega(scan.wavelength.size());
  for (std::size_t i = 0; i < omega.size(); ++i) {
    omega[i] = 2.0 * pi * kSpeedOfLight / scan.wavelength[i];
  }
  const DipSeed seed = seed_from_scan(omega, scan.transmission, true);

  const double kappa_ref = seed.kappa;
  // per dip: center offset, log kappa, logit depth
  auto unpack = [&](const Eigen::VectorXd& x, int k) {
    const double center = seed.omega0 + x[3 * k + 0] * kappa_ref;
    const double kappa = kappa_ref * std::exp(x[3 * k + 1]);
    const double depth = logistic(x[3 * k + 2]);
    return std::array<double, 3>{center, kappa, depth};
  };
  auto model_t = [&](const Eigen::VectorXd& x, double w) {
    double t = 1.0;
    for (int k = 0; k < 2; ++k) {
      const auto [c, kap, d] = unpack(x, k);
      const double u = 2.0 * (w - c) / kap;
      t -= d / (1.0 + u * u);
    }
    return t;
  };
  ResidualFn residual = [&](const Eigen::VectorXd& x) {
    Eigen::VectorXd r(static_cast<Eigen::Index>(omega.size()));
    for (std::size_t i = 0; i < omega.size(); ++i) {
      r[static_cast<Eigen::Index>(i)] = model_t(x, omega[i]) - scan.transmission[i];
    }
    return r;
  };

  Eigen::VectorXd x0(6);
  const double split = std::max(seed.gamma_beta, 0.5 * kappa_ref);
  x0 << -0.5 * split / kappa_ref, 0.0, logit(0.5), 0.5 * split / kappa_ref, 0.0, logit(0.5);

  LeastSquaresOptions lsq;
  lsq.max_iterations = options.max_iterations;
  const LeastSquaresResult res = levenberg_marquardt(residual, x0, lsq);

  TwoLorentzianFit fit;
  std::array<std::array<double, 3>, 2> dips{unpack(res.parameters, 0), unpack(res.parameters, 1)};
  // ascending wavelength = descending omega
  if (dips[0][0] < dips[1][0]) std::swap(dips[0], dips[1]);
  for (int k = 0; k < 2; ++k) {
    fit.dips[k].wavelength = 2.0 * pi * kSpeedOfLight / dips[k][0];
    fit.dips[k].kappa = dips[k][1];
    fit.dips[k].depth = dips[k][2];
    fit.dips[k].loaded_q = dips[k][0] / dips[k][1];
  }
  fit.residual_rms = res.residual_rms;
  fit.iterations = res.iterations;
  fit.converged = res.converged;
  return fit;
}

}  // namespace nvcav
