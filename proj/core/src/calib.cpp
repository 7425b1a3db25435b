#include "nvcav/calib.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "nvcav/least_squares.hpp"

namespace nvcav {

std::string_view channel_name(Channel c) {
  return c == Channel::nv_minus ? "NV-" : "NV0";
}

Channel channel_from_name(std::string_view s) {
  if (s == "NV-") return Channel::nv_minus;
  if (s == "NV0") return Channel::nv0;
  throw ValidationError("unknown PL channel '" + std::string(s) + "' (expected NV- or NV0)");
}

void CompiledDataset::validate() const {
  if (ir_label.empty()) throw ValidationError("compiled dataset: missing IR mode label");
  if (!(green_power_mw >= 0.0)) throw ValidationError("compiled dataset: negative green power");
  if (!(background_fraction >= 0.0 && background_fraction < 1.0))
    throw ValidationError("compiled dataset: background fraction must lie in [0, 1)");
  const DataPoint* prev_minus = nullptr;
  const DataPoint* prev_0 = nullptr;
  for (const auto& pt : points) {
    if (!(pt.n_ir >= 0.0)) throw ValidationError("compiled dataset: negative photon number");
    if (!(pt.pl_norm > 0.0)) throw ValidationError("compiled dataset: normalized PL must be positive");
    const DataPoint*& prev = pt.channel == Channel::nv_minus ? prev_minus : prev_0;
    if (prev && !(pt.n_ir > prev->n_ir)) {
      throw ValidationError("compiled dataset: photon numbers must be strictly increasing per channel");
    }
    prev = &pt;
  }
}

double normalize_and_correct(double raw_pl, double reference_pl_no_ir,
                             double background_fraction) {
  if (!(reference_pl_no_ir > 0.0))
    throw ValidationError("normalize: reference PL must be positive");
  if (!(background_fraction >= 0.0 && background_fraction < 1.0))
    throw ValidationError("normalize: background fraction must lie in [0, 1)");
  return (raw_pl / reference_pl_no_ir - background_fraction) / (1.0 - background_fraction);
}

namespace {

struct RawPoint {
  double n_ir;
  double pl_norm;
  Channel channel;
};

// Average samples that landed on the same photon number (symmetric detunings
// produce exact pairs) so the compiled abscissae are strictly increasing.
std::vector<DataPoint> merge_equal_photon_numbers(std::vector<RawPoint> raw) {
  std::sort(raw.begin(), raw.end(), [](const RawPoint& a, const RawPoint& b) {
    if (a.channel != b.channel) return a.channel < b.channel;
    return a.n_ir < b.n_ir;
  });
  std::vector<DataPoint> merged;
  std::size_t i = 0;
  while (i < raw.size()) {
    std::size_t j = i + 1;
    double pl_sum = raw[i].pl_norm;
    while (j < raw.size() && raw[j].channel == raw[i].channel &&
           raw[j].n_ir - raw[i].n_ir <= 1e-12 * std::max(raw[j].n_ir, 1e-300)) {
      pl_sum += raw[j].pl_norm;
      ++j;
    }
    merged.push_back({raw[i].n_ir, pl_sum / static_cast<double>(j - i), raw[i].channel});
    i = j;
  }
  return merged;
}

}  // namespace

CompiledDataset compile_dataset(std::span<const DetuningScan> scans, const CavityMode& mode,
                                const CompileOptions& options) {
  if (scans.empty()) throw ValidationError("compile: no scans given");
  mode.validate();
  if (!(options.taper_efficiency > 0.0 && options.taper_efficiency <= 1.0))
    throw ValidationError("compile: taper efficiency must lie in (0, 1]");
  if (options.ir_label.empty()) throw ValidationError("compile: missing IR mode label");

  const double omega_cav = mode.resonance_angular_frequency();
  std::vector<RawPoint> raw;

  for (const auto& scan : scans) {
    scan.validate(/*require_power=*/true);
    if (mode.resonance_wavelength < scan.wavelength.front() ||
        mode.resonance_wavelength > scan.wavelength.back()) {
      throw ValidationError("compile: scan does not cover the fitted resonance wavelength");
    }
    if (scan.pl_nvm.empty() && scan.pl_nv0.empty()) {
      throw ValidationError("compile: scan carries no PL channel");
    }

    const double power = scan.input_power * options.taper_efficiency;
    std::vector<double> n_ir(scan.wavelength.size());
    double n_max = 0.0;
    for (std::size_t i = 0; i < scan.wavelength.size(); ++i) {
      const PhotonEnergy photon = PhotonEnergy::from_wavelength(scan.wavelength[i]);
      const double detuning = omega_cav - photon.angular_frequency();
      n_ir[i] = intracavity_photons(mode, detuning, power, photon);
      n_max = std::max(n_max, n_ir[i]);
    }

    auto auto_reference = [&](const std::vector<double>& pl) {
      double sum = 0.0;
      int count = 0;
      for (std::size_t i = 0; i < pl.size(); ++i) {
        if (n_ir[i] <= options.reference_photon_fraction * n_max) {
          sum += pl[i];
          ++count;
        }
      }
      if (count == 0) {
        throw ValidationError(
            "compile: no far-detuned samples to define the no-IR reference; "
            "pass an explicit reference");
      }
      return sum / count;
    };

    auto add_channel = [&](const std::vector<double>& pl, Channel channel,
                           const std::optional<double>& explicit_ref) {
      if (pl.empty()) return;
      const double ref = explicit_ref ? *explicit_ref : auto_reference(pl);
      for (std::size_t i = 0; i < pl.size(); ++i) {
        const double value = normalize_and_correct(pl[i], ref, options.background_fraction);
        if (value > 0.0) raw.push_back({n_ir[i], value, channel});
        // nonpositive corrected PL carries no usable signal and is dropped
      }
    };
    add_channel(scan.pl_nvm, Channel::nv_minus, options.reference_nvm);
    add_channel(scan.pl_nv0, Channel::nv0, options.reference_nv0);
  }

  CompiledDataset out;
  out.ir_label = options.ir_label;
  out.green_power_mw = options.green_power_mw;
  out.background_fraction = options.background_fraction;
  out.points = merge_equal_photon_numbers(std::move(raw));
  out.validate();
  return out;
}

CompiledDataset synth_dataset(const RateCoefficients& coeffs, double green_power_mw,
                              const std::string& ir_label, std::span<const double> n_grid,
                              const NoiseModel& noise) {
  if (n_grid.empty()) throw ValidationError("synth: empty photon-number grid");
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    if (!(n_grid[i] >= 0.0)) throw ValidationError("synth: negative photon number");
    if (i > 0 && !(n_grid[i] > n_grid[i - 1]))
      throw ValidationError("synth: photon-number grid must be strictly ascending");
  }
  coeffs.ir(ir_label);  // fail early on unknown labels

  const std::vector<SweepPoint> sweep = steady_sweep(coeffs, green_power_mw, ir_label, n_grid);

  std::mt19937_64 rng(noise.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto apply_noise = [&](double pl) {
    if (noise.kind == NoiseModel::Kind::multiplicative_gaussian && noise.sigma > 0.0) {
      pl *= 1.0 + noise.sigma * gauss(rng);
    }
    return std::max(pl, 1e-12);
  };

  CompiledDataset out;
  out.ir_label = ir_label;
  out.green_power_mw = green_power_mw;
  for (const auto& pt : sweep) {
    if (!pt.ok) throw DegenerateError("synth: degenerate steady state in the sweep");
    out.points.push_back({pt.n_ir, apply_noise(pt.pl_nvm_norm), Channel::nv_minus});
  }
  for (const auto& pt : sweep) {
    out.points.push_back({pt.n_ir, apply_noise(pt.pl_nv0_norm), Channel::nv0});
  }
  out.validate();
  return out;
}

namespace {

struct ParameterBinding {
  std::string name;
  double* slot;  // into a RateCoefficients instance
};

std::vector<std::string> sorted_labels(std::span<const CompiledDataset> datasets) {
  std::vector<std::string> labels;
  for (const auto& d : datasets) labels.push_back(d.ir_label);
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  return labels;
}

std::vector<ParameterBinding> bind_parameters(RateCoefficients& coeffs,
                                              const std::vector<std::string>& labels) {
  std::vector<ParameterBinding> bindings;
  for (const auto& label : labels) {
    auto it = coeffs.ir_per_photon.find(label);
    if (it == coeffs.ir_per_photon.end()) {
      throw ValidationError("joint fit: no start coefficients for IR label '" + label + "'");
    }
    bindings.push_back({label + ".K_25_2IR", &it->second.k25_2ir});
    bindings.push_back({label + ".K_74_1IR", &it->second.k74_1ir});
  }
  bindings.push_back({"K_25_1G", &coeffs.green_per_mw.k25_1g});
  bindings.push_back({"K_51_1G", &coeffs.green_per_mw.k51_1g});
  bindings.push_back({"K_74_1G", &coeffs.green_per_mw.k74_1g});
  bindings.push_back({"K_56", &coeffs.internal.k56});
  bindings.push_back({"K_75", &coeffs.internal.k75});
  return bindings;
}

}  // namespace

std::vector<std::string> joint_fit_parameter_names(std::span<const CompiledDataset> datasets) {
  std::vector<std::string> names;
  for (const auto& label : sorted_labels(datasets)) {
    names.push_back(label + ".K_25_2IR");
    names.push_back(label + ".K_74_1IR");
  }
  for (const char* shared : {"K_25_1G", "K_51_1G", "K_74_1G", "K_56", "K_75"}) {
    names.emplace_back(shared);
  }
  return names;
}

FitResult joint_fit(std::span<const CompiledDataset> datasets, const RateCoefficients& start,
                    const JointFitOptions& options) {
  if (datasets.empty()) throw ValidationError("joint fit: no datasets");
  std::size_t total_points = 0;
  for (const auto& d : datasets) {
    d.validate();
    if (!(d.green_power_mw > 0.0))
      throw ValidationError("joint fit: datasets must have positive green power");
    total_points += d.points.size();
  }
  start.validate();

  const std::vector<std::string> labels = sorted_labels(datasets);

  // Working copy whose fitted slots the parameter vector writes into.
  RateCoefficients work = start;
  std::vector<ParameterBinding> bindings = bind_parameters(work, labels);
  const int n_params = static_cast<int>(bindings.size());

  Eigen::VectorXd x0(n_params);
  for (int i = 0; i < n_params; ++i) {
    if (!(*bindings[static_cast<std::size_t>(i)].slot > 0.0)) {
      throw ValidationError("joint fit: free coefficient " +
                            bindings[static_cast<std::size_t>(i)].name +
                            " needs a positive start value (fitted in log space)");
    }
    x0[i] = std::log(*bindings[static_cast<std::size_t>(i)].slot);
  }

  const bool log_loss = options.loss == FitLoss::log_pl;
  ResidualFn residual = [&](const Eigen::VectorXd& x) {
    for (int i = 0; i < n_params; ++i) {
      *bindings[static_cast<std::size_t>(i)].slot = std::exp(x[i]);
    }
    Eigen::VectorXd r(static_cast<Eigen::Index>(total_points));
    Eigen::Index k = 0;
    for (const auto& d : datasets) {
      const Populations ref =
          steady_state(work, DriveInstant{d.green_power_mw, d.ir_label, 0.0});
      const double ref_minus = ref[2];
      const double ref_0 = ref[7];
      for (const auto& pt : d.points) {
        const Populations p =
            steady_state(work, DriveInstant{d.green_power_mw, d.ir_label, pt.n_ir});
        const double model = pt.channel == Channel::nv_minus ? p[2] / ref_minus : p[7] / ref_0;
        r[k++] = log_loss ? std::log(std::max(model, 1e-300) / pt.pl_norm)
                          : model - pt.pl_norm;
      }
    }
    return r;
  };

  LeastSquaresOptions lsq;
  lsq.max_iterations = options.max_iterations;

  LeastSquaresResult best = levenberg_marquardt(residual, x0, lsq);
  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> gauss(0.0, std::log(2.0));
  for (int restart = 0; restart < options.restarts; ++restart) {
    Eigen::VectorXd xr = x0;
    for (int i = 0; i < n_params; ++i) xr[i] += gauss(rng);
    const LeastSquaresResult candidate = levenberg_marquardt(residual, xr, lsq);
    if (candidate.cost < best.cost) best = candidate;
  }

  FitResult result;
  for (int i = 0; i < n_params; ++i) {
    *bindings[static_cast<std::size_t>(i)].slot = std::exp(best.parameters[i]);
  }
  result.coefficients = work;
  for (const auto& b : bindings) result.fitted_names.push_back(b.name);
  result.confidence_scale.assign(best.confidence_scale.data(),
                                 best.confidence_scale.data() + n_params);
  result.residual_rms = best.residual_rms;
  result.iterations = best.iterations;
  result.converged = best.converged;
  result.loss = options.loss;
  result.seed = options.seed;
  if (best.jacobian_rank < n_params) {
    result.converged = false;
    std::ostringstream os;
    os << "rank-deficient Jacobian (rank " << best.jacobian_rank << " of " << n_params
       << "): the datasets do not constrain all free coefficients";
    result.diagnostic = os.str();
  } else if (!best.converged) {
    result.diagnostic = "no convergence within the iteration budget";
  } else {
    // Normalized steady-state PL is almost invariant under a common scaling
    // of the slow coefficients, so flag combinations the data barely pins.
    double worst = 0.0;
    for (double c : result.confidence_scale) worst = std::max(worst, c);
    if (worst > 0.5) {
      std::ostringstream os;
      os << "weakly constrained parameter combination (relative confidence scale up to "
         << worst << "); coefficient ratios are meaningful, the common scale is not";
      result.diagnostic = os.str();
    }
  }
  return result;
}

}  // namespace nvcav
