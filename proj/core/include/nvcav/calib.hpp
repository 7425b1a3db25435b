#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nvcav/cavity.hpp"
#include "nvcav/kinetics.hpp"

namespace nvcav {

enum class Channel { nv_minus, nv0 };

std::string_view channel_name(Channel c);       // "NV-" / "NV0"
Channel channel_from_name(std::string_view s);  // throws ValidationError

struct DataPoint {
  double n_ir = 0.0;
  double pl_norm = 0.0;
  Channel channel = Channel::nv_minus;
};

// Background-corrected normalized PL versus intracavity photon number for one
// green power and one IR mode. Points are sorted by channel then photon
// number, strictly increasing within a channel.
struct CompiledDataset {
  std::string ir_label;
  double green_power_mw = 0.0;
  double background_fraction = 0.0;
  std::vector<DataPoint> points;

  void validate() const;
};

// (raw/reference - b) / (1 - b): division by the no-IR signal followed by
// subtraction of the background fraction b contributed by emitters the
// cavity field never reaches.
double normalize_and_correct(double raw_pl, double reference_pl_no_ir,
                             double background_fraction);

struct CompileOptions {
  std::string ir_label;
  double green_power_mw = 0.0;
  double taper_efficiency = 1.0;  // fraction of the recorded power reaching the cavity
  double background_fraction = 0.0;
  // Explicit no-IR reference counts per channel; when absent the reference is
  // the mean PL over samples with photon number below
  // reference_photon_fraction times the scan maximum.
  std::optional<double> reference_nvm;
  std::optional<double> reference_nv0;
  double reference_photon_fraction = 1e-2;
};

// Converts detuning scans (transmission + PL channels) into PL versus photon
// number, using the fitted mode to map each sample's detuning and power to an
// intracavity photon number. Scans of different input power merge into one
// dataset; samples with equal photon number (symmetric detunings) average.
CompiledDataset compile_dataset(std::span<const DetuningScan> scans, const CavityMode& mode,
                                const CompileOptions& options);

struct NoiseModel {
  enum class Kind { none, multiplicative_gaussian };
  Kind kind = Kind::none;
  double sigma = 0.0;
  std::uint64_t seed = 0;
};

// Model-generated dataset (both channels on the given photon-number grid),
// with optional multiplicative noise. Bit-reproducible for a fixed seed.
CompiledDataset synth_dataset(const RateCoefficients& coeffs, double green_power_mw,
                              const std::string& ir_label, std::span<const double> n_grid,
                              const NoiseModel& noise = {});

enum class FitLoss { linear_pl, log_pl };

struct JointFitOptions {
  FitLoss loss = FitLoss::linear_pl;
  int max_iterations = 400;
  int restarts = 0;  // extra perturbed starts; best final cost wins
  std::uint64_t seed = 0;
};

// Names of the coefficients the joint fit adjusts: per-IR-label
// "<label>.K_25_2IR" and "<label>.K_74_1IR", plus the shared green and
// quartet coefficients.
std::vector<std::string> joint_fit_parameter_names(std::span<const CompiledDataset> datasets);

struct FitResult {
  RateCoefficients coefficients;
  std::vector<std::string> fitted_names;
  std::vector<double> confidence_scale;  // relative 1-sigma proxy per fitted name
  double residual_rms = 0.0;
  int iterations = 0;
  bool converged = false;
  std::string diagnostic;
  FitLoss loss = FitLoss::linear_pl;
  std::uint64_t seed = 0;
};

// Joint least-squares calibration of the IR and green rate coefficients
// across datasets of different green power (and possibly different IR modes).
// Free coefficients are fitted in log space; internal rates and the green
// excitation rates stay fixed at their start values.
FitResult joint_fit(std::span<const CompiledDataset> datasets, const RateCoefficients& start,
                    const JointFitOptions& options = {});

}  // namespace nvcav
