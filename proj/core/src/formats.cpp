#include "nvcav/formats.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "nvcav/csv.hpp"

namespace nvcav {

using nlohmann::json;

namespace {

json parse_json(const std::string& text) {
  json j = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) throw ValidationError("malformed JSON");
  return j;
}

json load_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_json(buf.str());
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write '" + path.string() + "'");
  out << text;
}

// Catch typos: every object key must be known (derived and provenance keys
// written by our own savers count as known).
void check_keys(const json& obj, const char* what, std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : obj.items()) {
    if (std::find_if(allowed.begin(), allowed.end(),
                     [&](const char* a) { return key == a; }) == allowed.end()) {
      throw ValidationError(std::string(what) + ": unknown key '" + key + "'");
    }
  }
}

double require_number(const json& obj, const char* what, const char* key) {
  if (!obj.contains(key)) throw ValidationError(std::string(what) + ": missing key '" + key + "'");
  if (!obj[key].is_number()) throw ValidationError(std::string(what) + ": '" + key + "' must be a number");
  return obj[key].get<double>();
}

json provenance_json(const Provenance& prov) {
  json j;
  j["tool"] = prov.tool;
  json inputs = json::object();
  for (const auto& [name, digest] : prov.inputs) inputs[name] = digest;
  j["inputs"] = inputs;
  if (prov.seed) j["seed"] = *prov.seed;
  return j;
}

}  // namespace

DetuningScan load_detuning_scan(const std::filesystem::path& csv,
                                const std::optional<std::filesystem::path>& sidecar) {
  const CsvTable table = read_csv_file(csv);
  DetuningScan scan;
  for (double nm : table.numeric_column("wavelength_nm")) scan.wavelength.push_back(nm * 1e-9);
  scan.transmission = table.numeric_column("transmission");
  if (table.has_column("pl_nv0")) scan.pl_nv0 = table.numeric_column("pl_nv0");
  if (table.has_column("pl_nvm")) scan.pl_nvm = table.numeric_column("pl_nvm");

  std::optional<std::filesystem::path> meta = sidecar;
  if (!meta) {
    std::filesystem::path candidate = csv;
    candidate.replace_extension(".json");
    if (std::filesystem::exists(candidate)) meta = candidate;
  }
  if (meta) {
    const json j = load_json_file(*meta);
    check_keys(j, "scan sidecar", {"input_power_mW", "taper_transmission_efficiency", "provenance"});
    scan.input_power = require_number(j, "scan sidecar", "input_power_mW") * 1e-3;
  }
  scan.validate();
  return scan;
}

void save_detuning_scan(const std::filesystem::path& csv, const DetuningScan& scan,
                        const Provenance& prov) {
  scan.validate();
  std::vector<std::string> header{"wavelength_nm", "transmission"};
  const bool has_nv0 = !scan.pl_nv0.empty();
  const bool has_nvm = !scan.pl_nvm.empty();
  if (has_nv0) header.push_back("pl_nv0");
  if (has_nvm) header.push_back("pl_nvm");
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < scan.wavelength.size(); ++i) {
    std::vector<std::string> row{format_double(scan.wavelength[i] * 1e9),
                                 format_double(scan.transmission[i])};
    if (has_nv0) row.push_back(format_double(scan.pl_nv0[i]));
    if (has_nvm) row.push_back(format_double(scan.pl_nvm[i]));
    rows.push_back(std::move(row));
  }
  write_csv_file(csv, prov.comment_lines(), header, rows);
  if (scan.input_power > 0.0) {
    json j;
    j["input_power_mW"] = scan.input_power * 1e3;
    j["taper_transmission_efficiency"] = 1.0;
    std::filesystem::path meta = csv;
    meta.replace_extension(".json");
    write_text_file(meta, j.dump(2) + "\n");
  }
}

CavityMode cavity_mode_from_json(const std::string& text) {
  const json j = parse_json(text);
  check_keys(j, "cavity mode",
             {"label", "resonance_wavelength_m", "kappa_rad_s", "kappa_ex_rad_s",
              "gamma_beta_rad_s", "mode_volume_m3", "group_index", "Q_loaded", "provenance"});
  CavityMode mode;
  mode.label = j.value("label", std::string());
  mode.resonance_wavelength = require_number(j, "cavity mode", "resonance_wavelength_m");
  mode.kappa = require_number(j, "cavity mode", "kappa_rad_s");
  mode.kappa_ex = require_number(j, "cavity mode", "kappa_ex_rad_s");
  mode.gamma_beta = j.contains("gamma_beta_rad_s")
                        ? require_number(j, "cavity mode", "gamma_beta_rad_s")
                        : 0.0;
  if (j.contains("mode_volume_m3")) mode.mode_volume = require_number(j, "cavity mode", "mode_volume_m3");
  if (j.contains("group_index")) mode.group_index = require_number(j, "cavity mode", "group_index");
  mode.validate();
  return mode;
}

std::string cavity_mode_to_json(const CavityMode& mode, const Provenance* prov) {
  mode.validate();
  json j;
  j["label"] = mode.label;
  j["resonance_wavelength_m"] = mode.resonance_wavelength;
  j["kappa_rad_s"] = mode.kappa;
  j["kappa_ex_rad_s"] = mode.kappa_ex;
  j["gamma_beta_rad_s"] = mode.gamma_beta;
  if (mode.mode_volume) j["mode_volume_m3"] = *mode.mode_volume;
  if (mode.group_index) j["group_index"] = *mode.group_index;
  j["Q_loaded"] = mode.loaded_q();
  if (prov) j["provenance"] = provenance_json(*prov);
  return j.dump(2) + "\n";
}

CavityMode load_cavity_mode(const std::filesystem::path& path) {
  return cavity_mode_from_json(load_json_file(path).dump());
}

void save_cavity_mode(const std::filesystem::path& path, const CavityMode& mode,
                      const Provenance& prov) {
  write_text_file(path, cavity_mode_to_json(mode, &prov));
}

FieldGrid load_field_grid(const std::filesystem::path& path) {
  const CsvTable table = read_csv_file(path);
  const auto r = table.numeric_column("r_m");
  const auto z = table.numeric_column("z_m");
  const auto w = table.numeric_column("weight_m3");
  const auto ir = table.numeric_column("e2_ir");
  const auto nv = table.numeric_column("e2_nv");
  const auto eps = table.numeric_column("eps");
  const auto ex = table.numeric_column("in_excitation");
  FieldGrid grid;
  grid.has_green = table.has_column("e2_green");
  const std::vector<double> green =
      grid.has_green ? table.numeric_column("e2_green") : std::vector<double>(r.size(), 0.0);
  for (std::size_t i = 0; i < r.size(); ++i) {
    grid.nodes.push_back({r[i], z[i], w[i], ir[i], nv[i], eps[i], ex[i] != 0.0, green[i]});
  }
  grid.validate();
  return grid;
}

void save_field_grid(const std::filesystem::path& path, const FieldGrid& grid,
                     const Provenance& prov) {
  std::vector<std::string> header{"r_m", "z_m", "weight_m3", "e2_ir", "e2_nv", "eps",
                                  "in_excitation"};
  if (grid.has_green) header.push_back("e2_green");
  std::vector<std::vector<std::string>> rows;
  rows.reserve(grid.nodes.size());
  for (const auto& n : grid.nodes) {
    std::vector<std::string> row{format_double(n.r),     format_double(n.z),
                                 format_double(n.weight), format_double(n.e2_ir),
                                 format_double(n.e2_nv),  format_double(n.eps),
                                 n.in_excitation ? "1" : "0"};
    if (grid.has_green) row.push_back(format_double(n.e2_green));
    rows.push_back(std::move(row));
  }
  write_csv_file(path, prov.comment_lines(), header, rows);
}

RateCoefficients rate_coefficients_from_json(const std::string& text) {
  json j = parse_json(text);
  if (j.contains("coefficients")) j = j["coefficients"];  // fit-result wrapper
  check_keys(j, "rate coefficients",
             {"internal", "green_per_mW", "ir_per_photon", "K_43_s", "provenance"});
  RateCoefficients c;

  const json& internal = j.at("internal");
  check_keys(internal, "internal rates",
             {"K_f_minus", "K_f_0", "K_23", "K_34", "K_41", "K_56", "K_75"});
  c.internal.kf_minus = require_number(internal, "internal rates", "K_f_minus");
  c.internal.kf_0 = require_number(internal, "internal rates", "K_f_0");
  c.internal.k23 = require_number(internal, "internal rates", "K_23");
  c.internal.k34 = require_number(internal, "internal rates", "K_34");
  c.internal.k41 = require_number(internal, "internal rates", "K_41");
  c.internal.k56 = require_number(internal, "internal rates", "K_56");
  c.internal.k75 = require_number(internal, "internal rates", "K_75");

  const json& green = j.at("green_per_mW");
  check_keys(green, "green coefficients",
             {"K_e_minus", "K_e_0", "K_25_1G", "K_51_1G", "K_74_1G"});
  c.green_per_mw.ke_minus = require_number(green, "green coefficients", "K_e_minus");
  c.green_per_mw.ke_0 = require_number(green, "green coefficients", "K_e_0");
  c.green_per_mw.k25_1g = require_number(green, "green coefficients", "K_25_1G");
  c.green_per_mw.k51_1g = require_number(green, "green coefficients", "K_51_1G");
  c.green_per_mw.k74_1g = require_number(green, "green coefficients", "K_74_1G");

  const json& ir = j.at("ir_per_photon");
  if (!ir.is_object() || ir.empty())
    throw ValidationError("rate coefficients: ir_per_photon must be a non-empty object");
  for (const auto& [label, entry] : ir.items()) {
    check_keys(entry, "IR coefficients",
               {"K_25_2IR", "K_74_1IR", "K_25_2IR_star", "K_74_1IR_star"});
    IrCoefficients e;
    e.k25_2ir = require_number(entry, "IR coefficients", "K_25_2IR");
    e.k74_1ir = require_number(entry, "IR coefficients", "K_74_1IR");
    if (entry.contains("K_25_2IR_star"))
      e.k25_2ir_star = require_number(entry, "IR coefficients", "K_25_2IR_star");
    if (entry.contains("K_74_1IR_star"))
      e.k74_1ir_star = require_number(entry, "IR coefficients", "K_74_1IR_star");
    c.ir_per_photon[label] = e;
  }
  if (j.contains("K_43_s")) c.k43_singlet_per_photon = require_number(j, "rate coefficients", "K_43_s");
  c.validate();
  return c;
}

namespace {

json rate_coefficients_json(const RateCoefficients& c) {
  json j;
  j["internal"] = {{"K_f_minus", c.internal.kf_minus}, {"K_f_0", c.internal.kf_0},
                   {"K_23", c.internal.k23},           {"K_34", c.internal.k34},
                   {"K_41", c.internal.k41},           {"K_56", c.internal.k56},
                   {"K_75", c.internal.k75}};
  j["green_per_mW"] = {{"K_e_minus", c.green_per_mw.ke_minus},
                       {"K_e_0", c.green_per_mw.ke_0},
                       {"K_25_1G", c.green_per_mw.k25_1g},
                       {"K_51_1G", c.green_per_mw.k51_1g},
                       {"K_74_1G", c.green_per_mw.k74_1g}};
  json ir = json::object();
  for (const auto& [label, e] : c.ir_per_photon) {
    json entry = {{"K_25_2IR", e.k25_2ir}, {"K_74_1IR", e.k74_1ir}};
    if (e.k25_2ir_star) entry["K_25_2IR_star"] = *e.k25_2ir_star;
    if (e.k74_1ir_star) entry["K_74_1IR_star"] = *e.k74_1ir_star;
    ir[label] = entry;
  }
  j["ir_per_photon"] = ir;
  if (c.k43_singlet_per_photon) j["K_43_s"] = *c.k43_singlet_per_photon;
  return j;
}

}  // namespace

std::string rate_coefficients_to_json(const RateCoefficients& coeffs, const Provenance* prov) {
  coeffs.validate();
  json j = rate_coefficients_json(coeffs);
  if (prov) j["provenance"] = provenance_json(*prov);
  return j.dump(2) + "\n";
}

RateCoefficients load_rate_coefficients(const std::filesystem::path& path) {
  return rate_coefficients_from_json(load_json_file(path).dump());
}

void save_rate_coefficients(const std::filesystem::path& path, const RateCoefficients& coeffs,
                            const Provenance& prov) {
  write_text_file(path, rate_coefficients_to_json(coeffs, &prov));
}

namespace {

EnergyBound bound_from_json(const json& j, const char* key) {
  if (j.is_number()) return EnergyBound::point(j.get<double>());
  if (j.is_array()) {
    if (j.size() != 2 || !j[0].is_number() || !j[1].is_number())
      throw ValidationError(std::string("energy ledger: '") + key + "' interval must be [lo, hi]");
    return EnergyBound::interval(j[0].get<double>(), j[1].get<double>());
  }
  if (j.is_object()) {
    check_keys(j, "energy bound", {"value", "lo", "hi", "upper", "provenance"});
    const std::string prov = j.value("provenance", std::string());
    if (j.contains("value")) return EnergyBound::point(j["value"].get<double>(), prov);
    if (j.contains("upper")) return EnergyBound::upper(j["upper"].get<double>(), prov);
    if (j.contains("lo") && j.contains("hi"))
      return EnergyBound::interval(j["lo"].get<double>(), j["hi"].get<double>(), prov);
  }
  throw ValidationError(std::string("energy ledger: cannot parse '") + key + "'");
}

json bound_to_json(const EnergyBound& b) {
  json j;
  j["lo"] = b.lo;
  j["hi"] = b.hi;
  if (!b.provenance.empty()) j["provenance"] = b.provenance;
  return j;
}

}  // namespace

EnergyLedger ledger_from_json(const std::string& text) {
  const json j = parse_json(text);
  check_keys(j, "energy ledger",
             {"ip_3A2_2E", "E_ZPL_minus", "E_ZPL_0", "delta_minus", "delta_0", "R_2A2_1E",
              "singlet_gap", "provenance"});
  EnergyLedger ledger = EnergyLedger::defaults();
  auto maybe = [&](const char* key, EnergyBound& slot) {
    if (j.contains(key)) slot = bound_from_json(j[key], key);
  };
  maybe("ip_3A2_2E", ledger.ip_3a2_2e);
  maybe("E_ZPL_minus", ledger.e_zpl_minus);
  maybe("E_ZPL_0", ledger.e_zpl_0);
  maybe("delta_minus", ledger.delta_minus);
  maybe("delta_0", ledger.delta_0);
  maybe("R_2A2_1E", ledger.r_2a2_1e);
  maybe("singlet_gap", ledger.singlet_gap);
  ledger.validate();
  return ledger;
}

std::string ledger_to_json(const EnergyLedger& ledger) {
  json j;
  j["ip_3A2_2E"] = bound_to_json(ledger.ip_3a2_2e);
  j["E_ZPL_minus"] = bound_to_json(ledger.e_zpl_minus);
  j["E_ZPL_0"] = bound_to_json(ledger.e_zpl_0);
  j["delta_minus"] = bound_to_json(ledger.delta_minus);
  j["delta_0"] = bound_to_json(ledger.delta_0);
  j["R_2A2_1E"] = bound_to_json(ledger.r_2a2_1e);
  j["singlet_gap"] = bound_to_json(ledger.singlet_gap);
  return j.dump(2) + "\n";
}

EnergyLedger load_ledger(const std::filesystem::path& path) {
  return ledger_from_json(load_json_file(path).dump());
}

namespace {

ThresholdRule rule_from_name(const std::string& name) {
  for (ThresholdRule rule :
       {ThresholdRule::ip_ground, ThresholdRule::ip_singlet_ground,
        ThresholdRule::ip_singlet_excited, ThresholdRule::ip_excited_to_2a2,
        ThresholdRule::ip_excited_to_4a2, ThresholdRule::rec_2a2_to_1e,
        ThresholdRule::rec_2a2_to_1a1, ThresholdRule::rec_2a2_to_3a2,
        ThresholdRule::rec_4a2_to_3a2}) {
    if (threshold_rule_name(rule) == name) return rule;
  }
  throw ValidationError("unknown threshold rule '" + name + "'");
}

}  // namespace

std::vector<ChargeProcess> catalog_from_json(const std::string& text) {
  const json j = parse_json(text);
  if (!j.is_array()) throw ValidationError("process catalog: expected an array");
  std::vector<ChargeProcess> catalog;
  for (const auto& entry : j) {
    check_keys(entry, "process",
               {"name", "from", "to", "direction", "threshold", "green_route", "veto_reason",
                "note"});
    ChargeProcess p;
    p.name = entry.at("name").get<std::string>();
    p.from_level = entry.at("from").is_string() ? level_index(entry.at("from").get<std::string>())
                                                : entry.at("from").get<int>();
    p.to_level = entry.at("to").is_string() ? level_index(entry.at("to").get<std::string>())
                                            : entry.at("to").get<int>();
    const std::string dir = entry.at("direction").get<std::string>();
    if (dir == "ionization") p.direction = ProcessDirection::ionization;
    else if (dir == "recombination") p.direction = ProcessDirection::recombination;
    else throw ValidationError("process: direction must be ionization or recombination");
    p.threshold = rule_from_name(entry.at("threshold").get<std::string>());
    p.green_route = entry.value("green_route", true);
    p.veto_reason = entry.value("veto_reason", std::string());
    p.note = entry.value("note", std::string());
    catalog.push_back(std::move(p));
  }
  return catalog;
}

std::vector<ChargeProcess> load_catalog(const std::filesystem::path& path) {
  return catalog_from_json(load_json_file(path).dump());
}

std::vector<CompiledDataset> load_compiled_datasets(const std::filesystem::path& path) {
  const CsvTable table = read_csv_file(path);
  const std::size_t c_n = table.column("n_ir");
  const std::size_t c_pl = table.column("pl_norm");
  const std::size_t c_ch = table.column("channel");
  const std::size_t c_pg = table.column("green_power_mW");
  const std::size_t c_label = table.column("ir_label");

  std::map<std::pair<std::string, std::string>, CompiledDataset> groups;
  for (const auto& row : table.rows) {
    const std::string pg_text = row[c_pg];
    const auto key = std::make_pair(row[c_label], pg_text);
    auto [it, inserted] = groups.try_emplace(key);
    if (inserted) {
      it->second.ir_label = row[c_label];
      it->second.green_power_mw = parse_double(pg_text);
    }
    it->second.points.push_back(
        {parse_double(row[c_n]), parse_double(row[c_pl]), channel_from_name(row[c_ch])});
  }
  std::vector<CompiledDataset> datasets;
  for (auto& [key, dataset] : groups) {
    std::sort(dataset.points.begin(), dataset.points.end(),
              [](const DataPoint& a, const DataPoint& b) {
                if (a.channel != b.channel) return a.channel < b.channel;
                return a.n_ir < b.n_ir;
              });
    dataset.validate();
    datasets.push_back(std::move(dataset));
  }
  return datasets;
}

void save_compiled_datasets(const std::filesystem::path& path,
                            std::span<const CompiledDataset> datasets, const Provenance& prov) {
  const std::vector<std::string> header{"n_ir", "pl_norm", "channel", "green_power_mW",
                                        "ir_label"};
  std::vector<std::vector<std::string>> rows;
  for (const auto& d : datasets) {
    d.validate();
    for (const auto& pt : d.points) {
      rows.push_back({format_double(pt.n_ir), format_double(pt.pl_norm),
                      std::string(channel_name(pt.channel)), format_double(d.green_power_mw),
                      d.ir_label});
    }
  }
  write_csv_file(path, prov.comment_lines(), header, rows);
}

std::string fit_result_to_json(const FitResult& result, const Provenance& prov) {
  json j;
  j["coefficients"] = rate_coefficients_json(result.coefficients);
  json fitted = json::object();
  json confidence = json::object();
  for (std::size_t i = 0; i < result.fitted_names.size(); ++i) {
    fitted[result.fitted_names[i]] = true;
    confidence[result.fitted_names[i]] =
        i < result.confidence_scale.size() ? result.confidence_scale[i] : 0.0;
  }
  j["fitted"] = fitted;
  j["confidence_scale_relative"] = confidence;
  j["residual_rms"] = result.residual_rms;
  j["iterations"] = result.iterations;
  j["converged"] = result.converged;
  j["loss"] = result.loss == FitLoss::linear_pl ? "linear_pl" : "log_pl";
  j["seed"] = result.seed;
  if (!result.diagnostic.empty()) j["diagnostic"] = result.diagnostic;
  j["provenance"] = provenance_json(prov);
  return j.dump(2) + "\n";
}

std::map<std::string, GammaSet> gammas_from_json(const std::string& text) {
  const json j = parse_json(text);
  if (!j.is_object() || j.empty())
    throw ValidationError("gamma file: expected { label: {gamma, gamma2} }");
  std::map<std::string, GammaSet> out;
  for (const auto& [label, entry] : j.items()) {
    if (label == "provenance") continue;
    check_keys(entry, "gamma entry", {"gamma", "gamma2"});
    auto reduce = [&](const json& value) {
      if (value.is_number()) return value.get<double>();
      if (value.is_array() && !value.empty()) {
        std::vector<double> v;
        for (const auto& x : value) v.push_back(x.get<double>());
        return median(v);
      }
      throw ValidationError("gamma file: values must be numbers or arrays");
    };
    GammaSet set;
    set.gamma1 = reduce(entry.at("gamma"));
    set.gamma2 = reduce(entry.at("gamma2"));
    out[label] = set;
  }
  return out;
}

std::map<std::string, GammaSet> load_gammas(const std::filesystem::path& path) {
  return gammas_from_json(load_json_file(path).dump());
}

namespace {

std::vector<std::string> population_header(const char* first) {
  std::vector<std::string> h{first};
  for (int i = 1; i <= kNumLevels; ++i) h.push_back("p" + std::to_string(i));
  h.push_back("pl_nvm_norm");
  h.push_back("pl_nv0_norm");
  return h;
}

}  // namespace

void save_sweep_csv(const std::filesystem::path& path, std::span<const SweepPoint> sweep,
                    const Provenance& prov) {
  std::vector<std::string> header = population_header("t_s_or_N_IR");
  header.push_back("ok");
  std::vector<std::vector<std::string>> rows;
  for (const auto& pt : sweep) {
    std::vector<std::string> row{format_double(pt.n_ir)};
    for (double p : pt.populations.p) row.push_back(format_double(p));
    row.push_back(format_double(pt.pl_nvm_norm));
    row.push_back(format_double(pt.pl_nv0_norm));
    row.push_back(pt.ok ? "1" : "0");
    rows.push_back(std::move(row));
  }
  write_csv_file(path, prov.comment_lines(), header, rows);
}

void save_trace_csv(const std::filesystem::path& path, std::span<const TraceRow> rows,
                    const Provenance& prov) {
  std::vector<std::string> header = population_header("t_s_or_N_IR");
  header.push_back("n_ir");
  std::vector<std::vector<std::string>> out;
  for (const auto& r : rows) {
    std::vector<std::string> row{format_double(r.t)};
    for (double p : r.populations.p) row.push_back(format_double(p));
    row.push_back(format_double(r.pl_nvm_norm));
    row.push_back(format_double(r.pl_nv0_norm));
    row.push_back(format_double(r.n_ir));
    out.push_back(std::move(row));
  }
  write_csv_file(path, prov.comment_lines(), header, out);
}

void save_contrast_csv(const std::filesystem::path& path, std::span<const ContrastRow> rows,
                       const Provenance& prov) {
  const std::vector<std::string> header{"omega_eom_rad_s", "f_eom_hz", "contrast", "settled"};
  std::vector<std::vector<std::string>> out;
  for (const auto& r : rows) {
    out.push_back({format_double(r.omega_eom),
                   format_double(r.omega_eom / (2.0 * std::numbers::pi)),
                   format_double(r.contrast), r.settled ? "1" : "0"});
  }
  write_csv_file(path, prov.comment_lines(), header, out);
}

namespace {

json verdict_json(const ProcessVerdict& v) {
  json j;
  j["name"] = v.process.name;
  j["from"] = std::string(kLevelNames[static_cast<std::size_t>(v.process.from_level - 1)]);
  j["to"] = std::string(kLevelNames[static_cast<std::size_t>(v.process.to_level - 1)]);
  j["direction"] =
      v.process.direction == ProcessDirection::ionization ? "ionization" : "recombination";
  j["threshold"] = threshold_rule_name(v.process.threshold);
  j["active"] = v.active;
  j["reason"] = v.reason;
  j["photon_order"] = v.photon_order;
  if (v.ir_order > 0) j["ir_order"] = v.ir_order;
  j["green_active"] = v.green_active;
  if (v.order_ambiguous) j["order_ambiguous"] = true;
  return j;
}

}  // namespace

std::string threshold_report_json(const EnergyLedger& ledger,
                                  std::span<const ProcessVerdict> verdicts,
                                  const std::map<std::string, double>& delta0_bounds,
                                  const std::map<std::string, int>& photon_counts,
                                  const Provenance& prov) {
  json j;
  json derived = json::object();
  for (const auto& [name, bound] : derived_thresholds(ledger)) {
    derived[name] = bound_to_json(bound);
  }
  j["derived_thresholds_eV"] = derived;
  j["delta0_lower_bound_eV"] = delta0_bounds;
  j["min_photons_to_ionize_ground"] = photon_counts;
  json processes = json::array();
  for (const auto& v : verdicts) processes.push_back(verdict_json(v));
  j["processes"] = processes;
  j["ledger"] = parse_json(ledger_to_json(ledger));
  j["provenance"] = provenance_json(prov);
  return j.dump(2) + "\n";
}

std::string threshold_report_table(const EnergyLedger& ledger,
                                   std::span<const ProcessVerdict> verdicts,
                                   const std::map<std::string, double>& delta0_bounds,
                                   const std::map<std::string, int>& photon_counts) {
  std::ostringstream os;
  os << "derived thresholds (eV)\n";
  for (const auto& [name, bound] : derived_thresholds(ledger)) {
    os << "  " << name << ": ";
    if (bound.is_point()) {
      os << bound.lo;
    } else if (bound.lo == 0.0) {
      os << "< " << bound.hi;
    } else {
      os << "[" << bound.lo << ", " << bound.hi << "]";
    }
    os << "\n";
  }
  for (const auto& [label, value] : delta0_bounds) {
    os << "quartet offset lower bound via " << label << ": > " << value << " eV\n";
  }
  os << "photons to ionize the ground state:";
  for (const auto& [label, n] : photon_counts) os << "  " << label << ": " << n;
  os << "\nprocesses\n";
  for (const auto& v : verdicts) {
    os << "  " << (v.active ? "active  " : "rejected") << "  " << v.process.name << "  ("
       << kLevelNames[static_cast<std::size_t>(v.process.from_level - 1)] << " -> "
       << kLevelNames[static_cast<std::size_t>(v.process.to_level - 1)] << ")  " << v.reason
       << "\n";
  }
  return os.str();
}

}  // namespace nvcav
