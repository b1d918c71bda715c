#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "reanalysis/elements.hpp"
#include "reanalysis/errors.hpp"

using namespace reanalysis;
using oracle::rel_diff;

namespace {

constexpr double kPi = 3.14159265358979323846;

FgSectionConstants from_moments(const oracle::Moments& m) { return {m.a, m.b, m.d}; }

}  // namespace

TEST_SUITE("elements") {
  TEST_CASE("truss parameter for the reference bar") {
    const auto dec = truss_decomposition(500.0, 0.0, 20000.0, 20.0);
    REQUIRE(dec.mode_count() == 1);
    CHECK(dec.parameters(0, 0) == doctest::Approx(1600.0).epsilon(1e-15));
    CHECK(rel_diff(dec.stiffness(), oracle::truss_stiffness(20000.0, 20.0, 500.0, 0.0)) < 1e-15);
  }

  TEST_CASE("beam parameters for the reference section") {
    const Eigen::Matrix3d k = beam_parameter_matrix(20000.0, 300.0, 22500.0, 500.0);
    CHECK(k(0, 0) == doctest::Approx(24000.0).epsilon(1e-15));
    CHECK(k(1, 1) == doctest::Approx(1.8e6).epsilon(1e-15));
    // 6 E I (L^2 + 4) / L^3
    CHECK(k(2, 2) == doctest::Approx(5400086.4).epsilon(1e-14));
    CHECK(k(0, 1) == 0.0);
    CHECK(k(1, 2) == 0.0);
  }

  TEST_CASE("beam mode rows are unit norm and mutually orthogonal") {
    oracle::Rng rng(7);
    for (int i = 0; i < 50; ++i) {
      const auto c = beam_mode_rows_local(rng.log_uniform(1.0, 2000.0));
      const Eigen::Matrix3d g = c * c.transpose();
      CHECK(rel_diff(g, Eigen::Matrix3d::Identity()) < 1e-14);
    }
  }

  TEST_CASE("truss reconstruction over random bars") {
    oracle::Rng rng(11);
    for (int i = 0; i < 400; ++i) {
      const double l = rng.log_uniform(1.0, 1e4);
      const double angle = rng.uniform(-kPi, kPi);
      const double e = rng.log_uniform(1e2, 1e6);
      const double a = rng.log_uniform(0.1, 1e3);
      const auto dec = truss_decomposition(l, angle, e, a);
      CHECK(rel_diff(dec.stiffness(), oracle::truss_stiffness(e, a, l, angle)) < 1e-12);
    }
  }

  TEST_CASE("homogeneous beam reconstruction over random elements") {
    oracle::Rng rng(13);
    for (int i = 0; i < 400; ++i) {
      const double l = rng.log_uniform(10.0, 2000.0);
      const double angle = rng.uniform(-kPi, kPi);
      const double e = rng.log_uniform(1e3, 1e5);
      const double a = rng.log_uniform(10.0, 1e3);
      const double inertia = rng.log_uniform(10.0, 1e6);
      const Eigen::MatrixXd c = beam_mode_rows(l, angle);
      const Eigen::MatrixXd k = c.transpose() * beam_parameter_matrix(e, a, inertia, l) * c;
      const Eigen::MatrixXd t = oracle::beam_rotation(angle);
      const Eigen::MatrixXd expected = t.transpose() * oracle::beam_local_stiffness(e, a, inertia, l) * t;
      CHECK(rel_diff(k, expected) < 1e-12);
    }
  }

  TEST_CASE("graded section constants, hand values") {
    const auto c = fg_section_constants(1.0, 1.0, 2.0, 1.0);
    CHECK(c.a_e == doctest::Approx(1.5).epsilon(1e-15));
    CHECK(c.b_e == doctest::Approx(1.0 / 12.0).epsilon(1e-15));
    // integral of (1.5 + y) y^2 over [-1/2, 1/2]
    CHECK(c.d_e == doctest::Approx(0.125).epsilon(1e-15));
  }

  TEST_CASE("graded section constants, limits") {
    const auto uniform = fg_section_constants(30.0, 0.0, 36000.0, 4000.0);
    CHECK(uniform.a_e == doctest::Approx(30.0 * 36000.0).epsilon(1e-14));
    CHECK(uniform.d_e == doctest::Approx(27000.0 / 12.0 * 36000.0).epsilon(1e-14));
    // the coupling term keeps its h^2 dE / 4 value at p = 0
    CHECK(uniform.b_e == doctest::Approx(900.0 * 32000.0 / 4.0).epsilon(1e-14));

    const auto same = fg_section_constants(30.0, 2.5, 20000.0, 20000.0);
    CHECK(same.a_e == doctest::Approx(30.0 * 20000.0).epsilon(1e-14));
    CHECK(std::abs(same.b_e) < 1e-12 * same.a_e);
    CHECK(same.d_e == doctest::Approx(27000.0 / 12.0 * 20000.0).epsilon(1e-14));
  }

  TEST_CASE("graded section constants against quadrature") {
    oracle::Rng rng(17);
    for (int i = 0; i < 200; ++i) {
      const double h = rng.log_uniform(0.5, 100.0);
      const double p = rng.uniform(0.0, 10.0);
      const double e_lower = rng.log_uniform(1e3, 1e5);
      const double e_upper = e_lower * rng.log_uniform(0.1, 10.0);
      const auto c = fg_section_constants(h, p, e_upper, e_lower);
      const auto m = oracle::integrate_moments(h, p, e_upper, e_lower);
      CHECK(rel_diff(c.a_e, m.a) < 1e-10);
      CHECK(rel_diff(c.d_e, m.d) < 1e-10);
      // the coupling moment differs from the integral by the factor p
      CHECK(rel_diff(c.b_e * p, m.b) < 1e-10);
      const auto closed = oracle::closed_form_moments(h, p, e_upper, e_lower);
      CHECK(rel_diff(c.b_e, closed.b) < 1e-13);
    }
  }

  TEST_CASE("graded local stiffness matches the coupled energy oracle") {
    oracle::Rng rng(19);
    for (int i = 0; i < 200; ++i) {
      const double b = rng.log_uniform(1.0, 50.0);
      const double h = rng.log_uniform(1.0, 100.0);
      const double l = rng.log_uniform(10.0, 1000.0);
      const double p = rng.uniform(0.0, 10.0);
      const double e_lower = rng.log_uniform(1e3, 1e5);
      const double e_upper = e_lower * rng.log_uniform(0.1, 10.0);
      const auto c = fg_section_constants(h, p, e_upper, e_lower);
      // the closed-form coupling term can exceed the integral, skip indefinite sections
      if (c.a_e * c.d_e - c.b_e * c.b_e <= 0.01 * c.a_e * c.d_e) continue;
      const Eigen::MatrixXd closed = fg_beam_local_stiffness(b, c, l);
      const Eigen::MatrixXd oracle_k = oracle::coupled_beam_local_stiffness(b, {c.a_e, c.b_e, c.d_e}, l);
      CHECK(rel_diff(closed, oracle_k) < 1e-12);

      const Eigen::MatrixXd rows = beam_mode_rows_local(l);
      const Eigen::MatrixXd spectral = rows.transpose() * fg_beam_parameter_matrix(b, c, l) * rows;
      CHECK(rel_diff(spectral, closed) < 1e-12);

      // at p = 1 the closed form is the exact integral
      const auto c1 = fg_section_constants(h, 1.0, e_upper, e_lower);
      const auto m1 = oracle::integrate_moments(h, 1.0, e_upper, e_lower);
      CHECK(rel_diff(oracle::coupled_beam_local_stiffness(b, m1, l), fg_beam_local_stiffness(b, c1, l)) < 1e-10);
    }
  }

  TEST_CASE("graded parameters reduce to the homogeneous beam") {
    oracle::Rng rng(23);
    for (int i = 0; i < 100; ++i) {
      const double b = rng.log_uniform(1.0, 50.0);
      const double h = rng.log_uniform(1.0, 100.0);
      const double l = rng.log_uniform(10.0, 1000.0);
      const double e = rng.log_uniform(1e3, 1e5);
      const double p = rng.uniform(0.0, 10.0);
      const Eigen::Matrix3d fg = fg_beam_parameter_matrix(b, fg_section_constants(h, p, e, e), l);
      const Eigen::Matrix3d homog = beam_parameter_matrix(e, b * h, b * h * h * h / 12.0, l);
      CHECK(rel_diff(fg, homog) < 1e-13);
    }
  }

  TEST_CASE("graded section sign follows the stiffer face") {
    const auto upper = fg_section_constants(30.0, 1.0, 36000.0, 20000.0);
    const auto lower = fg_section_constants(30.0, 1.0, 20000.0, 36000.0);
    CHECK(upper.b_e > 0.0);
    CHECK(lower.b_e < 0.0);
    CHECK(rel_diff(from_moments(oracle::integrate_moments(30.0, 1.0, 36000.0, 20000.0)).b_e, upper.b_e) < 1e-10);
  }

  TEST_CASE("bilinear law values") {
    const BilinearLaw law{2e5, 3e4, 25.0};
    const auto origin = bilinear_stress(0.0, law);
    CHECK(origin.stress == 0.0);
    CHECK(origin.tangent == 2e5);

    const auto at_yield = bilinear_stress(25.0 / 2e5, law);
    CHECK(at_yield.stress == doctest::Approx(25.0).epsilon(1e-15));
    CHECK(at_yield.tangent == 2e5);
    CHECK_FALSE(at_yield.yielded);

    const auto hardened = bilinear_stress(2e-4, law);
    CHECK(hardened.stress == doctest::Approx(27.25).epsilon(1e-14));
    CHECK(hardened.tangent == 3e4);
    CHECK(hardened.yielded);
  }

  TEST_CASE("bilinear law is odd, continuous, and its tangent is the derivative") {
    oracle::Rng rng(29);
    for (int i = 0; i < 200; ++i) {
      const BilinearLaw law{rng.log_uniform(1e4, 1e6), rng.log_uniform(1e2, 1e5), rng.log_uniform(1.0, 100.0)};
      const double ey = law.sigma_y / law.e0;
      const double step = 1e-8;
      double strain = rng.uniform(-5.0 * ey, 5.0 * ey);
      if (std::abs(std::abs(strain) - ey) < 4.0 * step) continue;
      const auto s = bilinear_stress(strain, law);
      CHECK(bilinear_stress(-strain, law).stress == doctest::Approx(-s.stress).epsilon(1e-15));
      const double fd = (bilinear_stress(strain + step, law).stress - bilinear_stress(strain - step, law).stress) /
                        (2.0 * step);
      CHECK(fd == doctest::Approx(s.tangent).epsilon(1e-5));
    }
    const BilinearLaw law{2e5, 3e4, 25.0};
    const double ey = 25.0 / 2e5;
    CHECK(bilinear_stress(ey * (1 + 1e-12), law).stress == doctest::Approx(25.0).epsilon(1e-10));
  }

  TEST_CASE("bilinear law rejects bad parameters") {
    CHECK_THROWS_AS(bilinear_stress(1e-3, BilinearLaw{0.0, 1.0, 1.0}), Error);
    CHECK_THROWS_AS(bilinear_stress(1e-3, BilinearLaw{1.0, 1.0, 0.0}), Error);
  }
}
