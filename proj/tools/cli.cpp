#include "cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "nvcav/calib.hpp"
#include "nvcav/cavity.hpp"
#include "nvcav/csv.hpp"
#include "nvcav/formats.hpp"
#include "nvcav/interaction.hpp"
#include "nvcav/kinetics.hpp"
#include "nvcav/provenance.hpp"
#include "nvcav/thresholds.hpp"

namespace nvcav {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitDegenerate = 2;
constexpr int kExitNonConvergence = 3;

json load_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  json j = json::parse(buf.str(), nullptr, false);
  if (j.is_discarded()) throw ValidationError("malformed JSON in '" + path.string() + "'");
  return j;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write '" + path.string() + "'");
  out << text;
}

void check_keys(const json& obj, const std::string& what,
                std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ValidationError(what + ": expected a JSON object");
  for (const auto& [key, value] : obj.items()) {
    bool known = false;
    for (const char* a : allowed) known = known || key == a;
    if (!known) throw ValidationError(what + ": unknown key '" + key + "'");
  }
}

double need_number(const json& obj, const std::string& what, const char* key) {
  if (!obj.contains(key)) throw ValidationError(what + ": missing key '" + key + "'");
  if (!obj[key].is_number()) throw ValidationError(what + ": '" + key + "' must be a number");
  return obj[key].get<double>();
}

// Configuration of a subcommand; the path comes from --config or, as the only
// environment override, NVCAV_CONFIG.
json load_config(const std::string& config_flag, Provenance& prov) {
  std::string path = config_flag;
  if (path.empty()) {
    if (const char* env = std::getenv("NVCAV_CONFIG")) path = env;
  }
  if (path.empty()) {
    throw ValidationError("no configuration given (use --config or NVCAV_CONFIG)");
  }
  prov.add_input(path);
  return load_json_file(path);
}

// "coefficients": path string or inline object; absent selects the bundled
// reference coefficient set.
RateCoefficients coefficients_from_config(const json& cfg, Provenance& prov) {
  if (!cfg.contains("coefficients")) return default_rate_coefficients();
  const json& c = cfg["coefficients"];
  if (c.is_string()) {
    const std::string path = c.get<std::string>();
    prov.add_input(path);
    return load_rate_coefficients(path);
  }
  return rate_coefficients_from_json(c.dump());
}

std::vector<double> grid_from_config(const json& cfg, const std::string& what) {
  check_keys(cfg, what, {"kind", "min", "max", "points", "values"});
  const std::string kind = cfg.value("kind", "log");
  std::vector<double> grid;
  if (kind == "list") {
    if (!cfg.contains("values") || !cfg["values"].is_array()) {
      throw ValidationError(what + ": kind 'list' needs a 'values' array");
    }
    for (const auto& v : cfg["values"]) grid.push_back(v.get<double>());
    return grid;
  }
  const double lo = need_number(cfg, what, "min");
  const double hi = need_number(cfg, what, "max");
  const int n = static_cast<int>(need_number(cfg, what, "points"));
  if (n < 1) throw ValidationError(what + ": need at least one point");
  if (kind == "log") {
    if (!(lo > 0.0 && hi > lo)) throw ValidationError(what + ": log grid needs 0 < min < max");
    for (int i = 0; i < n; ++i) {
      grid.push_back(n == 1 ? lo : lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1)));
    }
  } else if (kind == "linear") {
    for (int i = 0; i < n; ++i) {
      grid.push_back(n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / (n - 1));
    }
  } else {
    throw ValidationError(what + ": unknown grid kind '" + kind + "'");
  }
  return grid;
}

int cmd_cavity_fit(const std::string& scan_path, const std::string& sidecar,
                   const std::string& model_name, bool two_lorentzian,
                   const std::string& label, double min_dip_depth,
                   const std::string& out_path) {
  Provenance prov;
  prov.add_input(scan_path);
  std::optional<fs::path> sidecar_path;
  if (!sidecar.empty()) {
    sidecar_path = sidecar;
    prov.add_input(sidecar);
  }
  const DetuningScan scan = load_detuning_scan(scan_path, sidecar_path);

  LineshapeFitOptions options;
  options.min_dip_depth = min_dip_depth;
  const LineshapeModel model =
      model_name == "doublet" ? LineshapeModel::doublet : LineshapeModel::singlet;

  LineshapeFit fit = fit_lineshape(scan, model, options);
  fit.mode.label = label;

  json out = json::parse(cavity_mode_to_json(fit.mode, &prov));
  out["fit"] = {{"residual_rms", fit.residual_rms},
                {"iterations", fit.iterations},
                {"converged", fit.converged}};
  if (two_lorentzian) {
    const TwoLorentzianFit dips = fit_two_lorentzian(scan, options);
    json arr = json::array();
    for (const auto& dip : dips.dips) {
      arr.push_back({{"wavelength_m", dip.wavelength},
                     {"kappa_rad_s", dip.kappa},
                     {"depth", dip.depth},
                     {"Q_loaded", dip.loaded_q}});
    }
    out["two_lorentzian_dips"] = arr;
  }
  write_text(out_path, out.dump(2) + "\n");
  std::cout << "Q_loaded " << format_double(fit.mode.loaded_q()) << " residual_rms "
            << format_double(fit.residual_rms) << "\n";
  return kExitOk;
}

int cmd_photons(const std::string& mode_path, double power_mw, double detuning,
                double wavelength_nm, const std::string& out_path) {
  Provenance prov;
  prov.add_input(mode_path);
  const CavityMode mode = load_cavity_mode(mode_path);
  double delta = detuning;
  PhotonEnergy photon = energy_from_wavelength(mode.resonance_wavelength);
  if (wavelength_nm > 0.0) {
    photon = energy_from_wavelength(wavelength_nm * 1e-9);
    delta = mode.resonance_angular_frequency() - photon.angular_frequency();
  }
  const double n = intracavity_photons(mode, delta, power_mw * 1e-3, photon);
  std::cout << format_double(n) << "\n";
  if (!out_path.empty()) {
    json out;
    out["n_ir"] = n;
    out["detuning_rad_s"] = delta;
    out["power_mW"] = power_mw;
    json p;
    p["tool"] = prov.tool;
    for (const auto& [name, digest] : prov.inputs) p["inputs"][name] = digest;
    out["provenance"] = p;
    write_text(out_path, out.dump(2) + "\n");
  }
  return kExitOk;
}

int cmd_sweep(const std::string& config_flag, const std::string& out_path) {
  Provenance prov;
  const json cfg = load_config(config_flag, prov);
  check_keys(cfg, "sweep config", {"coefficients", "green_power_mW", "ir_label", "n_ir_grid"});
  const RateCoefficients coeffs = coefficients_from_config(cfg, prov);
  const double green = need_number(cfg, "sweep config", "green_power_mW");
  const std::string label = cfg.value("ir_label", std::string());
  const std::vector<double> grid = grid_from_config(cfg.at("n_ir_grid"), "n_ir_grid");

  const auto sweep = steady_sweep(coeffs, green, label, grid);
  save_sweep_csv(out_path, sweep, prov);
  int bad = 0;
  for (const auto& pt : sweep) bad += pt.ok ? 0 : 1;
  if (bad > 0) {
    std::cerr << bad << " grid points had a degenerate steady state (flagged rows)\n";
    return kExitDegenerate;
  }
  return kExitOk;
}

int cmd_timedomain(const std::string& config_flag, const std::string& out_path) {
  Provenance prov;
  const json cfg = load_config(config_flag, prov);
  check_keys(cfg, "timedomain config",
             {"coefficients", "green_power_mW", "ir_label", "waveform", "samples"});
  const RateCoefficients coeffs = coefficients_from_config(cfg, prov);
  const double green = need_number(cfg, "timedomain config", "green_power_mW");
  const std::string label = cfg.value("ir_label", std::string());

  const json& w = cfg.at("waveform");
  std::vector<WaveformSegment> segments;
  if (w.value("kind", "square") == "segments") {
    check_keys(w, "waveform", {"kind", "segments"});
    for (const auto& s : w.at("segments")) {
      check_keys(s, "segment", {"duration_s", "n_ir"});
      segments.push_back(
          {need_number(s, "segment", "duration_s"), need_number(s, "segment", "n_ir")});
    }
  } else {
    check_keys(w, "waveform",
               {"kind", "n_high", "omega_eom_rad_s", "f_eom_hz", "extinction_dB", "duty",
                "periods"});
    const double omega = w.contains("omega_eom_rad_s")
                             ? need_number(w, "waveform", "omega_eom_rad_s")
                             : 2.0 * std::numbers::pi * need_number(w, "waveform", "f_eom_hz");
    const double n_high = need_number(w, "waveform", "n_high");
    const double extinction_db = w.value("extinction_dB", 25.0);
    const double duty = w.value("duty", 0.5);
    const int periods = static_cast<int>(w.value("periods", 8.0));
    const double period = 2.0 * std::numbers::pi / omega;
    const double n_low = n_high * std::pow(10.0, -extinction_db / 10.0);
    for (int i = 0; i < periods; ++i) {
      segments.push_back({duty * period, n_high});
      segments.push_back({(1.0 - duty) * period, n_low});
    }
  }
  if (segments.empty()) throw ValidationError("timedomain config: empty waveform");

  double total = 0.0;
  for (const auto& s : segments) total += s.duration;
  std::vector<double> samples;
  if (cfg.contains("samples")) {
    json grid_cfg = cfg.at("samples");
    if (grid_cfg.is_object() && !grid_cfg.contains("kind")) grid_cfg["kind"] = "linear";
    samples = grid_from_config(grid_cfg, "samples");
  } else {
    const int n = 512;
    for (int i = 0; i <= n; ++i) samples.push_back(total * i / n);
  }

  const Populations p0 =
      steady_state(coeffs, DriveInstant{green, label, segments.front().n_ir});
  const Trajectory traj = propagate(coeffs, green, label, segments, p0, samples);

  const Populations ref = steady_state(coeffs, DriveInstant{green, label, 0.0});
  const PlRates ref_pl = pl_observables(ref, coeffs);

  auto n_at = [&](double t) {
    double acc = 0.0;
    for (const auto& s : segments) {
      acc += s.duration;
      if (t <= acc) return s.n_ir;
    }
    return segments.back().n_ir;
  };

  std::vector<TraceRow> rows;
  for (std::size_t i = 0; i < traj.time.size(); ++i) {
    const PlRates pl = pl_observables(traj.states[i], coeffs);
    rows.push_back({traj.time[i], traj.states[i], pl.nv_minus / ref_pl.nv_minus,
                    pl.nv0 / ref_pl.nv0, n_at(traj.time[i])});
  }
  save_trace_csv(out_path, rows, prov);
  return kExitOk;
}

int cmd_contrast(const std::string& config_flag, const std::string& out_path) {
  Provenance prov;
  const json cfg = load_config(config_flag, prov);
  check_keys(cfg, "contrast config",
             {"coefficients", "green_power_mW", "ir_label", "n_high", "extinction_dB", "duty",
              "f_eom_grid_hz", "samples_per_period", "settle_tolerance", "max_extra_periods"});
  const RateCoefficients coeffs = coefficients_from_config(cfg, prov);

  ContrastOptions options;
  options.green_power_mw = need_number(cfg, "contrast config", "green_power_mW");
  options.ir_label = cfg.value("ir_label", std::string());
  options.n_high = need_number(cfg, "contrast config", "n_high");
  options.extinction_db = cfg.value("extinction_dB", 25.0);
  options.duty = cfg.value("duty", 0.5);
  if (cfg.contains("samples_per_period")) {
    options.samples_per_period = static_cast<int>(cfg["samples_per_period"].get<double>());
  }
  if (cfg.contains("settle_tolerance")) {
    options.settle_tolerance = cfg["settle_tolerance"].get<double>();
  }
  if (cfg.contains("max_extra_periods")) {
    options.max_extra_periods = static_cast<int>(cfg["max_extra_periods"].get<double>());
  }

  const std::vector<double> freqs = grid_from_config(cfg.at("f_eom_grid_hz"), "f_eom_grid_hz");
  std::vector<ContrastRow> rows;
  bool unsettled = false;
  for (double f : freqs) {
    options.omega_eom = 2.0 * std::numbers::pi * f;
    const ContrastResult r = modulation_contrast(coeffs, options);
    rows.push_back({options.omega_eom, r.contrast, r.settled});
    unsettled = unsettled || !r.settled;
  }
  save_contrast_csv(out_path, rows, prov);
  if (unsettled) {
    std::cerr << "warning: periodic state not settled at some frequencies (flagged rows)\n";
  }
  return kExitOk;
}

int cmd_thresholds(const std::string& ledger_path, const std::string& catalog_path,
                   int max_order, const std::string& out_path, bool table) {
  Provenance prov;
  EnergyLedger ledger = EnergyLedger::defaults();
  if (!ledger_path.empty()) {
    prov.add_input(ledger_path);
    ledger = load_ledger(ledger_path);
  }
  std::vector<ChargeProcess> catalog = default_process_catalog();
  if (!catalog_path.empty()) {
    prov.add_input(catalog_path);
    catalog = load_catalog(catalog_path);
  }

  const std::vector<LightSource> sources{
      {"532", energy_from_wavelength(532e-9).ev(), true},
      {"966", energy_from_wavelength(966e-9).ev(), false},
      {"1524", energy_from_wavelength(1524e-9).ev(), false}};

  const auto verdicts = select_processes(catalog, ledger, sources, max_order);

  std::map<std::string, double> delta0_bounds;
  std::map<std::string, int> photon_counts;
  for (const auto& s : sources) {
    const PhotonEnergy photon = PhotonEnergy::from_ev(s.energy_ev);
    if (!s.is_green) delta0_bounds[s.label] = constrain_delta0(ledger, photon);
    photon_counts[s.label] = min_photons(ledger.ip_3a2_2e.hi, photon);
  }

  const std::string report =
      threshold_report_json(ledger, verdicts, delta0_bounds, photon_counts, prov);
  if (!out_path.empty()) write_text(out_path, report);
  if (table || out_path.empty()) {
    std::cout << threshold_report_table(ledger, verdicts, delta0_bounds, photon_counts);
  }
  return kExitOk;
}

int cmd_xsection(const std::string& rates_path, const std::string& mode_path,
                 const std::string& gamma_path, bool starred, const std::string& out_path) {
  Provenance prov;
  prov.add_input(rates_path);
  prov.add_input(mode_path);
  prov.add_input(gamma_path);
  const RateCoefficients coeffs = load_rate_coefficients(rates_path);
  const CavityMode mode = load_cavity_mode(mode_path);
  const auto gammas = load_gammas(gamma_path);

  auto it = gammas.find(mode.label);
  if (it == gammas.end()) {
    throw ValidationError("gamma file has no entry for mode label '" + mode.label + "'");
  }
  const IrCoefficients& ir = coeffs.ir(mode.label);

  double k74 = ir.k74_1ir;
  double k25 = ir.k25_2ir;
  if (starred) {
    if (!ir.k74_1ir_star || !ir.k25_2ir_star) {
      throw ValidationError("no starred coefficients for label '" + mode.label + "'");
    }
    k74 = *ir.k74_1ir_star;
    k25 = *ir.k25_2ir_star;
  }

  const CrossSection sigma1 = cross_section_from_rate(k74, 1, mode, it->second.gamma1);
  const CrossSection sigma2 = cross_section_from_rate(k25, 2, mode, it->second.gamma2);

  json out;
  out["label"] = mode.label;
  out["starred_model"] = starred;
  out["sigma_recombination_1photon_m2"] = sigma1.value;
  out["sigma_ionization_2photon_m4s"] = sigma2.value;
  out["gamma"] = it->second.gamma1;
  out["gamma2"] = it->second.gamma2;
  json p;
  p["tool"] = prov.tool;
  for (const auto& [name, digest] : prov.inputs) p["inputs"][name] = digest;
  out["provenance"] = p;
  write_text(out_path, out.dump(2) + "\n");
  std::cout << "sigma1 " << format_double(sigma1.value) << " m^2, sigma2 "
            << format_double(sigma2.value) << " m^4 s\n";
  return kExitOk;
}

int cmd_gamma(const std::string& grid_path, int order, bool green_weighted) {
  const FieldGrid grid = load_field_grid(grid_path);
  const double g = confinement_factor(grid, order,
                                      green_weighted ? ExcitationWeighting::green_intensity
                                                     : ExcitationWeighting::indicator);
  std::cout << format_double(g) << "\n";
  return kExitOk;
}

int cmd_fit(const std::vector<std::string>& dataset_paths, const std::string& config_flag,
            const std::string& out_path) {
  Provenance prov;
  JointFitOptions options;
  RateCoefficients start = default_rate_coefficients();
  if (!config_flag.empty() || std::getenv("NVCAV_CONFIG") != nullptr) {
    const json cfg = load_config(config_flag, prov);
    check_keys(cfg, "fit config",
               {"start_coefficients", "loss", "max_iterations", "restarts", "seed"});
    if (cfg.contains("start_coefficients")) {
      const json& c = cfg["start_coefficients"];
      if (c.is_string()) {
        prov.add_input(c.get<std::string>());
        start = load_rate_coefficients(c.get<std::string>());
      } else {
        start = rate_coefficients_from_json(c.dump());
      }
    }
    const std::string loss = cfg.value("loss", "linear_pl");
    if (loss == "log_pl") {
      options.loss = FitLoss::log_pl;
    } else if (loss != "linear_pl") {
      throw ValidationError("fit config: unknown loss '" + loss + "'");
    }
    if (cfg.contains("max_iterations")) {
      options.max_iterations = static_cast<int>(cfg["max_iterations"].get<double>());
    }
    if (cfg.contains("restarts")) options.restarts = static_cast<int>(cfg["restarts"].get<double>());
    if (cfg.contains("seed")) options.seed = cfg["seed"].get<std::uint64_t>();
  }

  std::vector<CompiledDataset> datasets;
  for (const auto& path : dataset_paths) {
    prov.add_input(path);
    for (auto& d : load_compiled_datasets(path)) datasets.push_back(std::move(d));
  }
  prov.seed = options.seed;

  const FitResult result = joint_fit(datasets, start, options);
  write_text(out_path, fit_result_to_json(result, prov));
  std::cout << (result.converged ? "converged" : "NOT converged") << ", residual_rms "
            << format_double(result.residual_rms) << "\n";
  if (!result.diagnostic.empty()) std::cerr << result.diagnostic << "\n";
  return result.converged ? kExitOk : kExitNonConvergence;
}

int cmd_synth(const std::string& config_flag, const std::string& out_path) {
  Provenance prov;
  const json cfg = load_config(config_flag, prov);
  check_keys(cfg, "synth config",
             {"coefficients", "green_power_mW", "ir_label", "n_ir_grid", "noise"});
  const RateCoefficients coeffs = coefficients_from_config(cfg, prov);
  const double green = need_number(cfg, "synth config", "green_power_mW");
  const std::string label = cfg.value("ir_label", std::string());
  const std::vector<double> grid = grid_from_config(cfg.at("n_ir_grid"), "n_ir_grid");

  NoiseModel noise;
  if (cfg.contains("noise")) {
    const json& n = cfg["noise"];
    check_keys(n, "noise", {"kind", "sigma", "seed"});
    const std::string kind = n.value("kind", "none");
    if (kind == "multiplicative_gaussian") {
      noise.kind = NoiseModel::Kind::multiplicative_gaussian;
      noise.sigma = need_number(n, "noise", "sigma");
      noise.seed = n.value("seed", std::uint64_t{0});
      prov.seed = noise.seed;
    } else if (kind != "none") {
      throw ValidationError("noise: unknown kind '" + kind + "'");
    }
  }

  const CompiledDataset dataset = synth_dataset(coeffs, green, label, grid, noise);
  save_compiled_datasets(out_path, std::vector{dataset}, prov);
  return kExitOk;
}

int cmd_gridgen(const SyntheticGridSpec& spec, int refine, const std::string& out_path) {
  const FieldGrid grid = synthetic_grid(spec, refine);
  save_field_grid(out_path, grid, Provenance{});
  std::cout << grid.nodes.size() << " nodes\n";
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Cavity-coupled NV charge-state photodynamics toolkit"};
  app.require_subcommand(1);

  auto* fit_cmd = app.add_subcommand("cavity-fit", "Fit a coupled-mode lineshape to a scan");
  std::string scan_path, sidecar, model = "singlet", label, mode_out = "mode.json";
  bool two_lorentzian = false;
  double min_dip_depth = 0.02;
  fit_cmd->add_option("scan", scan_path, "Detuning scan CSV")->required();
  fit_cmd->add_option("--model", model, "singlet|doublet")
      ->check(CLI::IsMember({"singlet", "doublet"}));
  fit_cmd->add_option("--sidecar", sidecar, "Metadata sidecar JSON");
  fit_cmd->add_flag("--two-lorentzian", two_lorentzian,
                    "Also fit two independent Lorentzian dips (reports both loaded Q)");
  fit_cmd->add_option("--label", label, "Mode label stored in the output");
  fit_cmd->add_option("--min-dip-depth", min_dip_depth, "No-resonance floor");
  fit_cmd->add_option("-o,--output", mode_out, "Output mode JSON");

  auto* photons_cmd = app.add_subcommand("photons", "Intracavity photon number of a mode");
  std::string photons_mode, photons_out;
  double power_mw = 0.0, detuning = 0.0, wavelength_nm = 0.0;
  photons_cmd->add_option("--mode", photons_mode, "Cavity mode JSON")->required();
  photons_cmd->add_option("--power-mw", power_mw, "Power at the coupling region, mW")
      ->required();
  photons_cmd->add_option("--detuning-rad-s", detuning, "Detuning omega_cav - omega, rad/s");
  photons_cmd->add_option("--wavelength-nm", wavelength_nm,
                          "Laser wavelength (overrides --detuning-rad-s)");
  photons_cmd->add_option("-o,--output", photons_out, "Optional JSON output");

  std::string sweep_cfg, sweep_out = "sweep.csv";
  auto* sweep_cmd =
      app.add_subcommand("sweep", "Steady-state populations and PL vs photon number");
  sweep_cmd->add_option("--config", sweep_cfg, "Configuration JSON");
  sweep_cmd->add_option("-o,--output", sweep_out, "Output CSV");

  std::string td_cfg, td_out = "trace.csv";
  auto* td_cmd = app.add_subcommand("timedomain", "Time-resolved populations under a waveform");
  td_cmd->add_option("--config", td_cfg, "Configuration JSON");
  td_cmd->add_option("-o,--output", td_out, "Output CSV");

  std::string contrast_cfg, contrast_out = "contrast.csv";
  auto* contrast_cmd = app.add_subcommand("contrast", "PL contrast vs modulation frequency");
  contrast_cmd->add_option("--config", contrast_cfg, "Configuration JSON");
  contrast_cmd->add_option("-o,--output", contrast_out, "Output CSV");

  auto* thresholds_cmd = app.add_subcommand("thresholds", "Energy-threshold report");
  std::string ledger_path, catalog_path, thresholds_out;
  int max_order = 2;
  bool table = false;
  thresholds_cmd->add_option("--ledger", ledger_path, "Energy ledger JSON");
  thresholds_cmd->add_option("--catalog", catalog_path, "Process catalog JSON");
  thresholds_cmd->add_option("--max-order", max_order, "Largest IR photon order considered");
  thresholds_cmd->add_option("-o,--output", thresholds_out, "Report JSON");
  thresholds_cmd->add_flag("--table", table, "Print the human-readable table");

  auto* xsection_cmd = app.add_subcommand("xsection", "Cross sections from fitted coefficients");
  std::string xs_rates, xs_mode, xs_gamma, xs_out = "sigma.json";
  bool starred = false;
  xsection_cmd->add_option("--rates", xs_rates, "Rate coefficients or fit-result JSON")
      ->required();
  xsection_cmd->add_option("--mode", xs_mode, "Cavity mode JSON (label selects coefficients)")
      ->required();
  xsection_cmd->add_option("--gamma", xs_gamma, "Confinement factors JSON")->required();
  xsection_cmd->add_flag("--starred", starred, "Use the singlet-extension coefficient set");
  xsection_cmd->add_option("-o,--output", xs_out, "Output JSON");

  auto* gamma_cmd = app.add_subcommand("gamma", "Confinement factor of a field grid");
  std::string gamma_grid;
  int gamma_order = 1;
  bool green_weighted = false;
  gamma_cmd->add_option("grid", gamma_grid, "Field grid CSV")->required();
  gamma_cmd->add_option("--p", gamma_order, "Photon order");
  gamma_cmd->add_flag("--green-weighted", green_weighted,
                      "Weight by the recorded |E_green|^2 instead of the indicator region");

  auto* fitdata_cmd = app.add_subcommand("fit", "Joint fit of rate coefficients to datasets");
  std::vector<std::string> dataset_paths;
  std::string fit_cfg, fit_out = "fit.json";
  fitdata_cmd->add_option("datasets", dataset_paths, "Compiled dataset CSVs")->required();
  fitdata_cmd->add_option("--config", fit_cfg, "Fit configuration JSON");
  fitdata_cmd->add_option("-o,--output", fit_out, "Output fit JSON");

  std::string synth_cfg, synth_out = "dataset.csv";
  auto* synth_cmd = app.add_subcommand("synth", "Model-generated dataset");
  synth_cmd->add_option("--config", synth_cfg, "Configuration JSON");
  synth_cmd->add_option("-o,--output", synth_out, "Output CSV");

  auto* gridgen_cmd = app.add_subcommand("gridgen", "Analytic Gaussian-ring test grid");
  SyntheticGridSpec spec;
  int refine = 1;
  std::string grid_out = "grid.csv";
  bool with_green = false;
  GaussianRing green_ring{2.2e-6, 0.0, 0.3e-6, 0.2e-6};
  gridgen_cmd->add_option("--nr", spec.nr, "Radial cells");
  gridgen_cmd->add_option("--nz", spec.nz, "Axial cells");
  gridgen_cmd->add_option("--r-min", spec.r_min, "m");
  gridgen_cmd->add_option("--r-max", spec.r_max, "m");
  gridgen_cmd->add_option("--z-half", spec.z_half, "m");
  gridgen_cmd->add_option("--ir-r0", spec.ir.r0, "IR ring center, m");
  gridgen_cmd->add_option("--ir-z0", spec.ir.z0, "m");
  gridgen_cmd->add_option("--ir-sigma-r", spec.ir.sigma_r, "m");
  gridgen_cmd->add_option("--ir-sigma-z", spec.ir.sigma_z, "m");
  gridgen_cmd->add_option("--nv-r0", spec.nv.r0, "Collection-mode ring center, m");
  gridgen_cmd->add_option("--nv-z0", spec.nv.z0, "m");
  gridgen_cmd->add_option("--nv-sigma-r", spec.nv.sigma_r, "m");
  gridgen_cmd->add_option("--nv-sigma-z", spec.nv.sigma_z, "m");
  gridgen_cmd->add_option("--spot-r", spec.spot_r_center, "Excitation annulus center, m");
  gridgen_cmd->add_option("--spot-half-width", spec.spot_half_width, "m");
  gridgen_cmd->add_option("--index", spec.refractive_index, "Refractive index");
  gridgen_cmd->add_flag("--green", with_green, "Emit an |E_green|^2 column");
  gridgen_cmd->add_option("--green-r0", green_ring.r0, "m");
  gridgen_cmd->add_option("--green-sigma-r", green_ring.sigma_r, "m");
  gridgen_cmd->add_option("--green-sigma-z", green_ring.sigma_z, "m");
  gridgen_cmd->add_option("--refine", refine, "Subdivide every cell in both directions");
  gridgen_cmd->add_option("-o,--output", grid_out, "Output CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (fit_cmd->parsed()) {
      return cmd_cavity_fit(scan_path, sidecar, model, two_lorentzian, label, min_dip_depth,
                            mode_out);
    }
    if (photons_cmd->parsed()) {
      return cmd_photons(photons_mode, power_mw, detuning, wavelength_nm, photons_out);
    }
    if (sweep_cmd->parsed()) return cmd_sweep(sweep_cfg, sweep_out);
    if (td_cmd->parsed()) return cmd_timedomain(td_cfg, td_out);
    if (contrast_cmd->parsed()) return cmd_contrast(contrast_cfg, contrast_out);
    if (thresholds_cmd->parsed()) {
      return cmd_thresholds(ledger_path, catalog_path, max_order, thresholds_out, table);
    }
    if (xsection_cmd->parsed()) {
      return cmd_xsection(xs_rates, xs_mode, xs_gamma, starred, xs_out);
    }
    if (gamma_cmd->parsed()) return cmd_gamma(gamma_grid, gamma_order, green_weighted);
    if (fitdata_cmd->parsed()) return cmd_fit(dataset_paths, fit_cfg, fit_out);
    if (synth_cmd->parsed()) return cmd_synth(synth_cfg, synth_out);
    if (gridgen_cmd->parsed()) {
      if (with_green) spec.green = green_ring;
      return cmd_gridgen(spec, refine, grid_out);
    }
  } catch (const LineshapeFitError& e) {
    std::cerr << "error: " << e.what() << "\n"
              << "best iterate: Q_loaded " << format_double(e.best().mode.loaded_q())
              << ", residual_rms " << format_double(e.best().residual_rms) << "\n";
    return kExitNonConvergence;
  } catch (const DegenerateError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDegenerate;
  } catch (const NonConvergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNonConvergence;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitValidation;
}

}  // namespace nvcav
