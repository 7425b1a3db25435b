#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "nvcav/units.hpp"

using namespace nvcav;

TEST_CASE("photon energies of the three experiment wavelengths") {
  CHECK(energy_from_wavelength(966e-9).ev() == doctest::Approx(1.283).epsilon(0.001));
  CHECK(energy_from_wavelength(1524e-9).ev() == doctest::Approx(0.813).epsilon(0.0013));
  CHECK(energy_from_wavelength(532e-9).ev() == doctest::Approx(2.330).epsilon(0.001));
}

TEST_CASE("conversions are exact inverses") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int i = 0; i < 1000; ++i) {
    const double ev = std::pow(10.0, u(rng));
    const PhotonEnergy e = PhotonEnergy::from_ev(ev);
    CHECK(PhotonEnergy::from_joules(e.joules()).ev() == doctest::Approx(ev).epsilon(1e-12));
    CHECK(PhotonEnergy::from_wavelength(e.wavelength()).ev() ==
          doctest::Approx(ev).epsilon(1e-12));
    CHECK(PhotonEnergy::from_angular_frequency(e.angular_frequency()).ev() ==
          doctest::Approx(ev).epsilon(1e-12));
  }
}

TEST_CASE("wavelength and angular frequency are mutually consistent") {
  const PhotonEnergy e = energy_from_wavelength(966e-9);
  CHECK(e.wavelength() == doctest::Approx(966e-9).epsilon(1e-12));
  // omega = 2 pi c / lambda must hold through the energy representation
  CHECK(e.angular_frequency() ==
        doctest::Approx(2.0 * 3.14159265358979323846 * kSpeedOfLight / 966e-9).epsilon(1e-12));
}

TEST_CASE("dielectric constant") {
  CHECK(dielectric_constant(1.0) == kVacuumPermittivity);
  CHECK(dielectric_constant(2.4) == doctest::Approx(5.10e-11).epsilon(0.005));
  CHECK_THROWS_AS(dielectric_constant(0.5), ValidationError);
}

TEST_CASE("invalid inputs are rejected") {
  CHECK_THROWS_AS(energy_from_wavelength(0.0), ValidationError);
  CHECK_THROWS_AS(energy_from_wavelength(-1e-6), ValidationError);
  CHECK_THROWS_AS(PhotonEnergy::from_ev(0.0), ValidationError);
  CHECK_THROWS_AS(PhotonEnergy::from_ev(-1.0), ValidationError);
}
