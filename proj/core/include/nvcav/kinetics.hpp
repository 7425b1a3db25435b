#pragma once

#include <Eigen/Dense>
#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nvcav/errors.hpp"

namespace nvcav {

// Level order of the seven-level NV-/NV0 charge-state model:
//   1 = 3A2 (NV- ground)      2 = 3E (NV- excited)
//   3 = 1A1 (singlet excited) 4 = 1E (singlet ground)
//   5 = 4A2 (NV0 quartet)     6 = 2E (NV0 ground)   7 = 2A2 (NV0 excited)
inline constexpr int kNumLevels = 7;
inline constexpr std::array<std::string_view, kNumLevels> kLevelNames{
    "3A2", "3E", "1A1", "1E", "4A2", "2E", "2A2"};

int level_index(std::string_view name);  // 1-based; throws ValidationError

using Matrix7 = Eigen::Matrix<double, 7, 7>;
using Vector7 = Eigen::Matrix<double, 7, 1>;

// Charge-preserving internal rates, Hz.
struct InternalRates {
  double kf_minus = 0.0;  // 3E -> 3A2 fluorescence
  double kf_0 = 0.0;      // 2A2 -> 2E fluorescence
  double k23 = 0.0;       // 3E -> 1A1 intersystem crossing
  double k34 = 0.0;       // 1A1 -> 1E
  double k41 = 0.0;       // 1E -> 3A2
  double k56 = 0.0;       // 4A2 -> 2E non-radiative
  double k75 = 0.0;       // 2A2 -> 4A2
};

// Green-power-proportional coefficients, Hz per mW.
struct GreenCoefficients {
  double ke_minus = 0.0;  // 3A2 -> 3E excitation
  double ke_0 = 0.0;      // 2E -> 2A2 excitation
  double k25_1g = 0.0;    // one-green-photon ionization contribution
  double k51_1g = 0.0;    // one-green-photon recombination 4A2 -> 3A2
  double k74_1g = 0.0;    // one-green-photon recombination 2A2 -> 1E
};

// Intracavity-photon-number-proportional coefficients for one IR mode.
// Starred values belong to the model variant with the singlet re-excitation
// channel enabled.
struct IrCoefficients {
  double k25_2ir = 0.0;  // Hz / photon^2, two-photon ionization
  double k74_1ir = 0.0;  // Hz / photon, one-photon recombination
  std::optional<double> k25_2ir_star;
  std::optional<double> k74_1ir_star;
};

struct RateCoefficients {
  InternalRates internal;
  GreenCoefficients green_per_mw;
  std::map<std::string, IrCoefficients> ir_per_photon;  // keyed by mode label
  std::optional<double> k43_singlet_per_photon;         // Hz / photon, off by default

  const IrCoefficients& ir(const std::string& label) const;
  void validate() const;
};

// Bundled reference coefficient set for the calibrated device ("966nm" and
// "1524nm" IR modes). Useful as fit seeds and for the canned configurations.
RateCoefficients default_rate_coefficients();

// Returns a copy with the 1E -> 1A1 IR re-excitation channel enabled at the
// given per-photon rate.
RateCoefficients enable_singlet_extension(RateCoefficients coeffs, double k43_per_photon);

// Optical drive at one instant.
struct DriveInstant {
  double green_power_mw = 0.0;
  std::string ir_label;  // selects the IR coefficient set
  double n_ir = 0.0;     // mean intracavity photon number
};

struct WaveformSegment {
  double duration = 0.0;  // s
  double n_ir = 0.0;
};

// All per-edge rates of the model at one instant, Hz.
struct EffectiveRates {
  double ke_minus = 0.0, kf_minus = 0.0, k23 = 0.0, k34 = 0.0, k41 = 0.0;
  double k25 = 0.0;  // ionization 3E -> 4A2 (two IR photons or one green)
  double k51 = 0.0, k56 = 0.0;
  double ke_0 = 0.0, kf_0 = 0.0, k75 = 0.0;
  double k74 = 0.0;  // recombination 2A2 -> 1E (one IR photon or one green)
  double k43 = 0.0;  // singlet re-excitation extension
};

EffectiveRates effective_rates(const RateCoefficients& coeffs, const DriveInstant& drive);

// Rate-equation generator: column j holds the outflow of level j+1 on the
// diagonal and its inflows to other levels off the diagonal. Columns sum to
// zero exactly under column_sum().
Matrix7 assemble_generator(const EffectiveRates& rates);

// Canonical column sum (ascending row order); the balance the generator is
// constructed to satisfy bit-exactly.
double column_sum(const Matrix7& generator, int column);

struct Populations {
  std::array<double, 7> p{};

  double sum() const;
  double operator[](int level_1based) const { return p.at(level_1based - 1); }
  void validate(double tol = 1e-9) const;
  Vector7 vector() const;
  static Populations from_vector(const Eigen::Ref<const Vector7>& v);
};

// Unique stationary distribution of the generator. Levels with neither inflow
// nor outflow are excluded (they hold no population); if the remaining rate
// graph has more than one absorbing component the steady state is not unique
// and NonUniqueSteadyStateError lists the components.
Populations steady_state(const RateCoefficients& coeffs, const DriveInstant& drive);

// Matrix-exponential stepper for a fixed (coefficients, green power, IR mode)
// family. Exponentials are cached per (n_ir, dt), so piecewise-constant
// waveforms with repeated segments cost one expm each.
class Propagator {
 public:
  Propagator(const RateCoefficients& coeffs, double green_power_mw, std::string ir_label);

  const Matrix7& exponential(double n_ir, double dt);
  void advance(Vector7& state, double n_ir, double dt);
  Matrix7 generator(double n_ir) const;

 private:
  RateCoefficients coeffs_;
  double green_power_mw_;
  std::string ir_label_;
  std::map<std::pair<double, double>, Matrix7> cache_;
};

struct Trajectory {
  std::vector<double> time;  // s
  std::vector<Populations> states;
};

// Piecewise-exact propagation of the waveform from p0, sampled at the given
// times (seconds from the waveform start, ascending, within its total span).
Trajectory propagate(const RateCoefficients& coeffs, double green_power_mw,
                     const std::string& ir_label, std::span<const WaveformSegment> waveform,
                     const Populations& p0, std::span<const double> sample_times);

// Emission rates proportional to the excited-state populations, Hz.
struct PlRates {
  double nv_minus = 0.0;
  double nv0 = 0.0;
};

// crosstalk is a row-major 2x2 mixing applied as (nv_minus', nv0') =
// M * (nv_minus, nv0); identity models perfect spectral separation.
PlRates pl_observables(const Populations& p, const RateCoefficients& coeffs,
                       const std::array<double, 4>& crosstalk = {1.0, 0.0, 0.0, 1.0});

// Steady-state sweep over photon number with PL normalized to the n_ir = 0
// point at the same green power.
struct SweepPoint {
  double n_ir = 0.0;
  Populations populations;
  double pl_nvm_norm = 0.0;
  double pl_nv0_norm = 0.0;
  bool ok = true;  // false if the steady state was degenerate at this point
};

std::vector<SweepPoint> steady_sweep(const RateCoefficients& coeffs, double green_power_mw,
                                     const std::string& ir_label, std::span<const double> n_grid);

// Total decay rate of the quartet state: k56 + k51_1g * P_G.
double effective_quartet_decay(const RateCoefficients& coeffs, double green_power_mw);

struct ContrastOptions {
  double green_power_mw = 0.0;
  std::string ir_label;
  double n_high = 0.0;
  double extinction_db = 25.0;   // n_low = n_high * 10^(-dB/10)
  double omega_eom = 0.0;        // rad/s square-wave modulation
  double duty = 0.5;             // fraction of the period at n_high
  int samples_per_period = 256;
  double settle_tolerance = 1e-6;  // period-to-period change of normalized PL
  int max_extra_periods = 20000;
};

struct ContrastResult {
  double contrast = 0.0;  // (max PL- - min PL-) / max PL- over one settled period
  bool settled = false;
  int periods = 0;
  double pl_max = 0.0;  // Hz
  double pl_min = 0.0;
};

// Square-wave-modulated IR drive propagated to its periodic steady state.
ContrastResult modulation_contrast(const RateCoefficients& coeffs, const ContrastOptions& options);

// omega_EOM -> 0 limit: contrast between the two DC steady states.
double dc_contrast(const RateCoefficients& coeffs, double green_power_mw,
                   const std::string& ir_label, double n_high, double extinction_db);

}  // namespace nvcav
