#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "ssl/analytic.hpp"
#include "ssl/errors.hpp"

using namespace ssl;
using namespace ssl::analytic;

TEST_CASE("cw_transfer_exact limits and frozen point") {
  SUBCASE("delta = 0 is the lossless identity") {
    const auto tm = cw_transfer_exact(20.0, 0.51, 0.0);
    const auto [ta, tb] = tm.transmissions_for_a_input();
    CHECK(ta == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(tb == doctest::Approx(0.0));
  }
  SUBCASE("alpha=20, Omega=0.51, delta=0.01") {
    const auto pb = PhaseBeta::from(20.0, 0.51, 0.01);
    CHECK(pb.beta == doctest::Approx(26.01).epsilon(1e-12));
    CHECK(pb.phi_exact == doctest::Approx(0.3839000496073844).epsilon(1e-12));
    CHECK(pb.loss_exponent == doctest::Approx(0.0147597097119332).epsilon(1e-10));
    const auto [ta, tb] = cw_transfer_exact(20.0, 0.51, 0.01).transmissions_for_a_input();
    CHECK(ta == doctest::Approx(0.8347126589).epsilon(1e-9));
    CHECK(tb == doctest::Approx(0.1361993640).epsilon(1e-8));
  }
  SUBCASE("phi_exact = pi/2 nulls T_A") {
    // large root of beta^2 - (alpha/pi) beta + 1 = 0
    const double alpha = 20.0, omega = 0.51;
    const double c = alpha / kPi;
    const double beta = 0.5 * (c + std::sqrt(c * c - 4.0));
    const double delta = omega * omega / beta;
    const auto [ta, tb] = cw_transfer_exact(alpha, omega, delta).transmissions_for_a_input();
    CHECK(ta < 1e-25);
    CHECK(tb > 0.0);
  }
  SUBCASE("invalid parameters") {
    CHECK_THROWS_AS(cw_transfer_exact(-1.0, 0.51, 0.01), InvalidParams);
    CHECK_THROWS_AS(cw_transfer_exact(20.0, 0.0, 0.01), InvalidParams);
  }
}

TEST_CASE("cw_transfer_approx against the exact law") {
  SUBCASE("delta = 0 identity") {
    const auto tm = cw_transfer_approx(20.0, 0.51, 0.0);
    CHECK((tm.m - Mat2c::Identity()).norm() == doctest::Approx(0.0));
  }
  SUBCASE("reference point agrees within 0.5% (beta = 26)") {
    const auto [ta, tb] = cw_transfer_approx(20.0, 0.51, 0.01).transmissions_for_a_input();
    CHECK(ta == doctest::Approx(0.8342933604).epsilon(1e-9));
    CHECK(tb == doctest::Approx(0.1365762985).epsilon(1e-8));
    const auto [tae, tbe] = cw_transfer_exact(20.0, 0.51, 0.01).transmissions_for_a_input();
    CHECK(std::abs(ta - tae) / tae < 5e-3);
  }
  SUBCASE("phase and loss exponent converge as 1/beta^2") {
    const double alpha = 20.0, omega = 0.51;
    for (double beta : {10.0, 26.0, 100.0}) {
      const double delta = omega * omega / beta;
      const auto pb = PhaseBeta::from(alpha, omega, delta);
      CHECK(std::abs(pb.phi_approx - pb.phi_exact) / pb.phi_exact <=
            1.0 / (beta * beta) + 1e-12);
      const double loss_approx = 2.0 * pb.phi_approx * pb.phi_approx / alpha;
      CHECK(std::abs(loss_approx - pb.loss_exponent) / pb.loss_exponent <=
            1.0 / (beta * beta) + 1e-12);
    }
  }
  SUBCASE("symmetric beam-splitter point") {
    // rotation by pi/4 with negligible loss splits a one-channel input evenly
    const double omega = 0.51;
    const double alpha = 1e9;
    const double delta = kPi / 4.0 * 2.0 * omega * omega / alpha;
    const auto tm = cw_transfer_approx(alpha, omega, delta);
    const auto out = tm.apply(ProbePair{0.0, 1.0});
    CHECK(std::norm(out.epsA) == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(std::norm(out.epsB) == doctest::Approx(0.5).epsilon(1e-6));
  }
}

TEST_CASE("rotation structure of the exact transfer matrix") {
  // m^T m = s^2 I with s the scalar loss, over a delta grid
  for (double delta : {-0.05, -0.02, -0.005, 0.004, 0.01, 0.03}) {
    const auto tm = cw_transfer_exact(20.0, 0.51, delta);
    const Mat2c mtm = tm.m.transpose() * tm.m;
    const double s2 = std::exp(-2.0 * PhaseBeta::from(20.0, 0.51, delta).loss_exponent);
    CHECK((mtm - s2 * Mat2c::Identity()).norm() < 1e-14);
    CHECK(std::abs(tm.m.determinant()) <= 1.0 + 1e-14);
  }
}

TEST_CASE("transmission_pair") {
  SUBCASE("phi = 0 transmits channel A only") {
    const auto [ta, tb] = transmission_pair(0.0, 20.0);
    CHECK(ta == doctest::Approx(1.0));
    CHECK(tb == doctest::Approx(0.0));
  }
  SUBCASE("conversion point phi = pi/2 at OD 250") {
    const auto [ta, tb] = transmission_pair(kPi / 2.0, 250.0);
    CHECK(ta < 1e-30);
    CHECK(tb == doctest::Approx(0.9612907007229459).epsilon(1e-12));
  }
  SUBCASE("full cycle phi = pi at OD 20") {
    const auto [ta, tb] = transmission_pair(kPi, 20.0);
    CHECK(ta == doctest::Approx(0.13891113314280026).epsilon(1e-12));
    CHECK(tb < 1e-30);
  }
  SUBCASE("T_A + T_B equals the envelope exactly") {
    for (double phi : {0.1, 0.7, 1.3, 2.9, 4.2})
      CHECK(transmission_pair(phi, 20.0).first + transmission_pair(phi, 20.0).second ==
            doctest::Approx(std::exp(-4.0 * phi * phi / 20.0)).epsilon(1e-14));
  }
  SUBCASE("matches the exact transfer at matching delta for large beta") {
    const double alpha = 20.0, omega = 0.51;
    for (double beta : {30.0, 80.0}) {
      const double delta = omega * omega / beta;
      const auto pb = PhaseBeta::from(alpha, omega, delta);
      const auto [ta, tb] = transmission_pair(pb.phi_approx, alpha);
      const auto [tae, tbe] = cw_transfer_exact(alpha, omega, delta).transmissions_for_a_input();
      CHECK(std::abs(ta - tae) / tae < 10.0 / (beta * beta));
      CHECK(std::abs(tb - tbe) / tbe < 10.0 / (beta * beta));
    }
  }
}

TEST_CASE("storage_phase") {
  UnitSystem units;
  CHECK(storage_phase(100.0, 40.0, 0.0) == 0.0);
  SUBCASE("16 us of accumulated time gives a 31.25 kHz energy period") {
    const double total = units.time_from_us(16.0);
    // cos^2 repeats when the phase grows by pi
    const double period = kPi / total;
    CHECK(units.kHz_from_detuning(period) == doctest::Approx(31.25).epsilon(1e-9));
    CHECK(std::abs(units.kHz_from_detuning(period) - 30.8) / 30.8 < 0.015);
  }
  SUBCASE("time-domain period maps back to the detuning") {
    const double ts = units.time_from_us(49.9);
    CHECK(units.kHz_from_detuning(kPi / ts) == doctest::Approx(10.02).epsilon(1e-3));
  }
}

TEST_CASE("eit_peak_transmission") {
  CHECK(eit_peak_transmission(20.0, 0.51, 0.0) == doctest::Approx(1.0));
  SUBCASE("frozen point") {
    CHECK(eit_peak_transmission(20.0, 0.51, 0.02) ==
          doctest::Approx(0.8884719388).epsilon(1e-9));
  }
  SUBCASE("equals the oscillation envelope over a sweep") {
    for (double delta : {0.001, 0.005, 0.01, 0.03, 0.05}) {
      const double phi = 20.0 * delta / (2.0 * 0.51 * 0.51);
      CHECK(eit_peak_transmission(20.0, 0.51, delta) ==
            doctest::Approx(std::exp(-4.0 * phi * phi / 20.0)).epsilon(1e-13));
    }
  }
}

TEST_CASE("normal mode transform") {
  SUBCASE("matrix application") {
    const auto [a, b] = normal_mode_transform(ProbePair{1.0, 0.0});
    CHECK(std::abs(a - Complex(1.0 / std::sqrt(2.0), 0.0)) < 1e-15);
    CHECK(std::abs(b - Complex(0.0, 1.0 / std::sqrt(2.0))) < 1e-15);
  }
  SUBCASE("unitarity and round trip") {
    std::mt19937 gen(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int t = 0; t < 25; ++t) {
      const ProbePair p{Complex(u(gen), u(gen)), Complex(u(gen), u(gen))};
      const auto [a, b] = normal_mode_transform(p);
      CHECK(std::norm(a) + std::norm(b) ==
            doctest::Approx(std::norm(p.epsA) + std::norm(p.epsB)).epsilon(1e-13));
      const auto back = normal_mode_inverse(a, b);
      CHECK(std::abs(back.epsA - p.epsA) < 1e-15);
      CHECK(std::abs(back.epsB - p.epsB) < 1e-15);
    }
  }
}

TEST_CASE("coupled_lambda_map structure") {
  const auto c = CouplingSet::from_phases({0.51, 0.51, 0.51, 0.51}, {0, 0, 0, kPi});
  SUBCASE("effective coupling is sqrt(2) Omega and detuning block is off-diagonal") {
    const auto sys = coupled_lambda_map(c, Detuning{0.01});
    CHECK(sys.effective_omega == doctest::Approx(std::sqrt(2.0) * 0.51).epsilon(1e-12));
    CHECK((sys.coupling - std::sqrt(2.0) * 0.51 * Mat2c::Identity()).norm() < 1e-12);
    Mat2c expected;
    expected << 0.0, Complex(0, 0.01), Complex(0, 0.01), 0.0;
    CHECK((sys.ground - expected).norm() < 1e-14);
    CHECK((sys.transform * sys.transform.adjoint() - Mat2c::Identity()).norm() < 1e-13);
  }
  SUBCASE("delta = 0 uncouples the two Lambda systems") {
    const auto sys = coupled_lambda_map(c, Detuning{0.0});
    CHECK(sys.ground.norm() == doctest::Approx(0.0));
  }
  SUBCASE("any theta = pi phase assignment is accepted") {
    const auto alt = CouplingSet::from_phases({0.3, 0.3, 0.3, 0.3},
                                              {kPi / 2, 0.0, 0.0, kPi / 2});
    const auto sys = coupled_lambda_map(alt, Detuning{0.02});
    CHECK((sys.transform * sys.transform.adjoint() - Mat2c::Identity()).norm() < 1e-13);
    // transformed detuning block keeps zero diagonal for this assignment class
    CHECK(std::abs(sys.ground.trace()) < 1e-14);
  }
  SUBCASE("rejects theta != pi and asymmetric magnitudes") {
    CHECK_THROWS_AS(coupled_lambda_map(CouplingSet::from_theta(0.51, 0.0), Detuning{0.01}),
                    NotApplicable);
    CHECK_THROWS_AS(coupled_lambda_map(
                        CouplingSet::from_phases({0.5, 0.5, 0.6, 0.5}, {0, 0, 0, kPi}),
                        Detuning{0.01}),
                    NotApplicable);
  }
}

TEST_CASE("degenerate_decomposition structure") {
  const auto c = CouplingSet::from_theta(0.51, 0.0);
  SUBCASE("both probes couple to the common coherence") {
    const auto sys = degenerate_decomposition(c, Detuning{0.02});
    CHECK(std::abs(sys.coupling(0, 1)) < 1e-12);
    CHECK(std::abs(sys.coupling(1, 1)) < 1e-12);
    CHECK(std::abs(sys.coupling(0, 0)) == doctest::Approx(std::sqrt(2.0) * 0.51));
    CHECK(std::abs(sys.coupling(1, 0)) == doctest::Approx(std::sqrt(2.0) * 0.51));
  }
  SUBCASE("rho2' is dark at delta = 0") {
    const auto sys = degenerate_decomposition(c, Detuning{0.0});
    CHECK(sys.ground.norm() == doctest::Approx(0.0));
  }
  SUBCASE("rejects theta != 0") {
    CHECK_THROWS_AS(degenerate_decomposition(CouplingSet::from_theta(0.51, kPi), Detuning{0.0}),
                    NotApplicable);
  }
}
