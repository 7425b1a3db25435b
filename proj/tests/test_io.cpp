#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "nvcav/csv.hpp"
#include "nvcav/formats.hpp"
#include "testutil.hpp"

using namespace nvcav;
using nvcav::testutil::TempDir;

TEST_CASE("doubles are written with shortest round-trip precision") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 2000; ++i) {
    const double x = u(rng) * std::pow(10.0, static_cast<int>(40 * u(rng)));
    CHECK(parse_double(format_double(x)) == x);
  }
  CHECK(format_double(0.1) == "0.1");
  CHECK_THROWS_AS(parse_double("1.2.3"), ValidationError);
  CHECK_THROWS_AS(parse_double(""), ValidationError);
}

TEST_CASE("csv comments and headers") {
  std::istringstream in(
      "# nvcav 0.1.0\n"
      "# input scan.csv fnv1a64=0123456789abcdef\n"
      "a,b\n"
      "1,2\n"
      "\n"
      "3,4\n");
  const CsvTable table = read_csv(in);
  CHECK(table.header == std::vector<std::string>{"a", "b"});
  REQUIRE(table.rows.size() == 2);
  CHECK(table.numeric_column("b") == std::vector<double>{2.0, 4.0});
  CHECK_THROWS_WITH_AS(table.column("missing"), "missing CSV column 'missing'",
                       ValidationError);
}

TEST_CASE("detuning scan round-trips with its sidecar") {
  TempDir dir("scan");
  DetuningScan scan;
  for (int i = 0; i < 32; ++i) {
    scan.wavelength.push_back(1524e-9 + i * 1e-12);
    scan.transmission.push_back(0.5 + 0.01 * (i % 3));
    scan.pl_nvm.push_back(1000.0 + i);
  }
  scan.input_power = 1.1e-3;
  save_detuning_scan(dir.file("scan.csv"), scan);
  const DetuningScan loaded = load_detuning_scan(dir.file("scan.csv"));
  REQUIRE(loaded.wavelength.size() == scan.wavelength.size());
  for (std::size_t i = 0; i < scan.wavelength.size(); ++i) {
    CHECK(loaded.wavelength[i] == doctest::Approx(scan.wavelength[i]).epsilon(1e-14));
    CHECK(loaded.transmission[i] == scan.transmission[i]);
    CHECK(loaded.pl_nvm[i] == scan.pl_nvm[i]);
  }
  CHECK(loaded.pl_nv0.empty());
  CHECK(loaded.input_power == doctest::Approx(1.1e-3).epsilon(1e-12));
}

TEST_CASE("malformed scan headers name the offending column") {
  TempDir dir("badscan");
  {
    std::ofstream out(dir.file("scan.csv"));
    out << "wavelength_nm,transmision\n1524,0.5\n";  // typo in the header
  }
  CHECK_THROWS_WITH_AS(load_detuning_scan(dir.file("scan.csv")),
                       "missing CSV column 'transmission'", ValidationError);
}

TEST_CASE("cavity mode JSON carries SI fields plus the loaded Q") {
  CavityMode mode;
  mode.resonance_wavelength = 1524e-9;
  mode.kappa = 1.4045e10;
  mode.kappa_ex = 2.8e9;
  mode.gamma_beta = 4.2e10;
  mode.mode_volume = 3.07e-18;
  mode.group_index = 1.14;
  mode.label = "1524nm";

  const std::string text = cavity_mode_to_json(mode);
  CHECK(text.find("Q_loaded") != std::string::npos);
  const CavityMode loaded = cavity_mode_from_json(text);
  CHECK(loaded.kappa == mode.kappa);
  CHECK(loaded.kappa_ex == mode.kappa_ex);
  CHECK(loaded.gamma_beta == mode.gamma_beta);
  CHECK(*loaded.mode_volume == *mode.mode_volume);
  CHECK(*loaded.group_index == *mode.group_index);
  CHECK(loaded.label == "1524nm");

  CHECK_THROWS_AS(cavity_mode_from_json("{\"resonance_wavelength_m\": 1e-6}"),
                  ValidationError);
  CHECK_THROWS_AS(cavity_mode_from_json(
                      "{\"label\":\"x\",\"resonance_wavelength_m\":1e-6,"
                      "\"kappa_rad_s\":1e10,\"kappa_ex_rad_s\":1e9,\"typo\":1}"),
                  ValidationError);
}

TEST_CASE("field grid CSV round-trips including the green column") {
  TempDir dir("grid");
  SyntheticGridSpec spec;
  spec.nr = 24;
  spec.nz = 12;
  spec.green = GaussianRing{2.2e-6, 0.0, 0.3e-6, 0.2e-6};
  const FieldGrid grid = synthetic_grid(spec);
  save_field_grid(dir.file("grid.csv"), grid);
  const FieldGrid loaded = load_field_grid(dir.file("grid.csv"));
  REQUIRE(loaded.nodes.size() == grid.nodes.size());
  CHECK(loaded.has_green);
  for (std::size_t i = 0; i < grid.nodes.size(); i += 37) {
    CHECK(loaded.nodes[i].r == grid.nodes[i].r);
    CHECK(loaded.nodes[i].weight == grid.nodes[i].weight);
    CHECK(loaded.nodes[i].e2_ir == grid.nodes[i].e2_ir);
    CHECK(loaded.nodes[i].in_excitation == grid.nodes[i].in_excitation);
    CHECK(loaded.nodes[i].e2_green == grid.nodes[i].e2_green);
  }
  CHECK(confinement_factor(loaded, 2) == confinement_factor(grid, 2));
}

TEST_CASE("rate coefficients JSON round-trips, including starred entries") {
  const RateCoefficients coeffs = default_rate_coefficients();
  const std::string text = rate_coefficients_to_json(coeffs);
  const RateCoefficients loaded = rate_coefficients_from_json(text);
  CHECK(loaded.internal.kf_minus == 77e6);
  CHECK(loaded.internal.k75 == 1.4e3);
  CHECK(loaded.green_per_mw.k51_1g == 12.6e3);
  CHECK(loaded.ir("966nm").k25_2ir == 5.5e-3);
  CHECK(loaded.ir("966nm").k74_1ir == 22.8);
  REQUIRE(loaded.ir("966nm").k25_2ir_star.has_value());
  CHECK(*loaded.ir("966nm").k25_2ir_star == 0.11);
  CHECK(*loaded.ir("966nm").k74_1ir_star == 239.0);
  CHECK(loaded.ir("1524nm").k74_1ir == 0.6);
  CHECK_FALSE(loaded.ir("1524nm").k25_2ir_star.has_value());
  CHECK_FALSE(loaded.k43_singlet_per_photon.has_value());

  const RateCoefficients extended = enable_singlet_extension(coeffs, 2.5);
  const RateCoefficients loaded2 =
      rate_coefficients_from_json(rate_coefficients_to_json(extended));
  CHECK(*loaded2.k43_singlet_per_photon == 2.5);

  CHECK_THROWS_AS(rate_coefficients_from_json("{\"internal\": {}}"), ValidationError);
}

TEST_CASE("energy ledger JSON accepts points, intervals and upper bounds") {
  const std::string text = R"json({
    "ip_3A2_2E": 2.65,
    "delta_minus": [0.21, 0.35],
    "R_2A2_1E": {"upper": 0.81, "provenance": "one-photon access"}
  })json";
  const EnergyLedger ledger = ledger_from_json(text);
  CHECK(ledger.ip_3a2_2e.is_point());
  CHECK(ledger.ip_3a2_2e.lo == 2.65);
  CHECK(ledger.delta_minus.lo == 0.21);
  CHECK(ledger.delta_minus.hi == 0.35);
  CHECK(ledger.r_2a2_1e.lo == 0.0);
  CHECK(ledger.r_2a2_1e.hi == 0.81);
  CHECK(ledger.r_2a2_1e.provenance == "one-photon access");
  // untouched entries keep their defaults
  CHECK(ledger.e_zpl_minus.lo == 1.946);

  const EnergyLedger round = ledger_from_json(ledger_to_json(ledger));
  CHECK(round.delta_minus.lo == ledger.delta_minus.lo);
  CHECK(round.delta_minus.hi == ledger.delta_minus.hi);

  CHECK_THROWS_AS(ledger_from_json("{\"ip_3a2\": 1.0}"), ValidationError);
}

TEST_CASE("process catalog JSON") {
  const std::string text = R"json([
    {"name": "Ki25", "from": "3E", "to": "4A2", "direction": "ionization",
     "threshold": "IP(3E->4A2)", "green_route": true},
    {"name": "Kr74", "from": 7, "to": 4, "direction": "recombination",
     "threshold": "R(2A2->1E)"}
  ])json";
  const auto catalog = catalog_from_json(text);
  REQUIRE(catalog.size() == 2);
  CHECK(catalog[0].from_level == 2);
  CHECK(catalog[0].to_level == 5);
  CHECK(catalog[0].threshold == ThresholdRule::ip_excited_to_4a2);
  CHECK(catalog[1].from_level == 7);
  CHECK(catalog[1].direction == ProcessDirection::recombination);
}

TEST_CASE("compiled datasets CSV groups by power and label") {
  TempDir dir("data");
  CompiledDataset a;
  a.ir_label = "966nm";
  a.green_power_mw = 0.4;
  a.points = {{1.0, 1.0, Channel::nv_minus},
              {10.0, 1.05, Channel::nv_minus},
              {1.0, 0.99, Channel::nv0}};
  CompiledDataset b;
  b.ir_label = "966nm";
  b.green_power_mw = 4.6;
  b.points = {{1.0, 1.0, Channel::nv_minus}, {100.0, 1.1, Channel::nv_minus}};

  save_compiled_datasets(dir.file("data.csv"), std::vector{a, b});
  const auto loaded = load_compiled_datasets(dir.file("data.csv"));
  REQUIRE(loaded.size() == 2);
  CHECK(loaded[0].green_power_mw == 0.4);
  CHECK(loaded[0].points.size() == 3);
  CHECK(loaded[1].green_power_mw == 4.6);
  CHECK(loaded[1].points[1].pl_norm == 1.1);
}

TEST_CASE("gamma files reduce candidate lists to medians") {
  const std::string text = R"json({
    "966nm": {"gamma": [0.11, 0.29, 0.45], "gamma2": [0.03, 0.14, 0.27]},
    "1524nm": {"gamma": 0.38, "gamma2": 0.20}
  })json";
  const auto gammas = gammas_from_json(text);
  CHECK(gammas.at("966nm").gamma1 == 0.29);
  CHECK(gammas.at("966nm").gamma2 == 0.14);
  CHECK(gammas.at("1524nm").gamma1 == 0.38);
  CHECK(gammas.at("1524nm").gamma2 == 0.20);
}

TEST_CASE("provenance block is deterministic and digest-based") {
  TempDir dir("prov");
  {
    std::ofstream out(dir.file("input.csv"));
    out << "a,b\n1,2\n";
  }
  Provenance prov;
  prov.add_input(dir.file("input.csv"));
  prov.seed = 42;
  const auto lines = prov.comment_lines();
  REQUIRE(lines.size() == 3);
  CHECK(lines[0] == "nvcav 0.1.0");
  CHECK(lines[1].find("fnv1a64=") != std::string::npos);
  CHECK(lines[2] == "seed 42");
  // same content, same digest
  Provenance again;
  again.add_input(dir.file("input.csv"));
  CHECK(again.inputs[0].second == prov.inputs[0].second);
}

TEST_CASE("fit result JSON carries fitted flags and provenance") {
  FitResult result;
  result.coefficients = default_rate_coefficients();
  result.fitted_names = {"966nm.K_25_2IR", "K_56"};
  result.confidence_scale = {0.01, 0.02};
  result.residual_rms = 1e-4;
  result.iterations = 12;
  result.converged = true;
  const std::string text = fit_result_to_json(result);
  CHECK(text.find("\"966nm.K_25_2IR\": true") != std::string::npos);
  CHECK(text.find("\"converged\": true") != std::string::npos);
  CHECK(text.find("provenance") != std::string::npos);
  // a fit result is accepted wherever coefficients are expected
  const RateCoefficients loaded = rate_coefficients_from_json(text);
  CHECK(loaded.internal.kf_minus == 77e6);
}
