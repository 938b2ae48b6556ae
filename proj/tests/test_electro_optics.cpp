#include "catch_amalgamated.hpp"
#include "duoglass/duoglass.hpp"
#include "oracles.hpp"

using namespace duoglass;

TEST_CASE("steady state matches the defining curve everywhere") {
  oracles::Rng rng(0x57ead);
  for (int trial = 0; trial < 50; ++trial) {
    MaterialResponse m = oracles::random_material(rng, false);
    for (int i = 0; i <= 40; ++i) {
      double v = i * 0.5;
      CHECK(steady_intensity(m, v) ==
            Catch::Approx(oracles::steady(m.i_min_au, m.i_max_au, m.v_mid_v,
                                          m.v_width_v, v))
                .margin(1e-12));
    }
  }
}

TEST_CASE("steady state is exact at zero volts and saturates high") {
  MaterialResponse m = hcm009();
  // Bitwise identity, not approximate: the curve is rescaled so the 0 V
  // point is i_min by construction.
  CHECK(steady_intensity(m, 0.0) == m.i_min_au);
  CHECK(m.i_max_au - steady_intensity(m, saturation_voltage_clamp(m)) <
        1e-6);
  CHECK_THROWS_AS(steady_intensity(m, -0.1), validation_error);
}

TEST_CASE("steady state is monotone in voltage") {
  oracles::Rng rng(0x30203);
  for (int trial = 0; trial < 20; ++trial) {
    MaterialResponse m = oracles::random_material(rng, false);
    double prev = steady_intensity(m, 0.0);
    for (int i = 1; i <= 200; ++i) {
      double cur = steady_intensity(m, i * 0.1);
      CHECK(cur >= prev);
      prev = cur;
    }
  }
}

TEST_CASE("reference materials hit their datasheet pins") {
  const MaterialResponse& h = hcm009();
  CHECK(h.i_min_au == 0.22);
  CHECK(h.i_max_au == 5.28);
  CHECK(h.v_width_v == 1.5);
  CHECK(*h.tau_on_ms == 1.0);
  CHECK(*h.tau_off_ms == 2.0);
  // Midpoint solved from the saturation pin; value frozen from an
  // independent bisection of the defining curve.
  CHECK(h.v_mid_v == Catch::Approx(7.190422158118437).margin(1e-9));
  // At the pin the curve crosses the 90% swing level exactly.
  CHECK(steady_intensity(h, 10.5) ==
        Catch::Approx(0.22 + 0.9 * (5.28 - 0.22)).margin(1e-9));

  const MaterialResponse& r = rm257();
  CHECK(r.i_min_au == 0.26);
  CHECK(r.i_max_au == 4.10);
  CHECK_FALSE(r.tau_on_ms.has_value());
  CHECK(r.v_mid_v == Catch::Approx(8.475566763543519).margin(1e-9));
  CHECK(steady_intensity(r, 12.0) ==
        Catch::Approx(0.26 + 0.9 * (4.10 - 0.26)).margin(1e-9));

  CHECK(&material_preset("hcm-009") == &h);
  CHECK(&material_preset("RM257") == &r);
  CHECK_THROWS_AS(material_preset("5CB"), validation_error);
}

TEST_CASE("solve_v_mid rejects unreachable pins") {
  CHECK_THROWS_AS(solve_v_mid(0.2, 5.0, 1.5, -1.0), validation_error);
  CHECK_THROWS_AS(solve_v_mid(5.0, 0.2, 1.5, 10.0), validation_error);
}

TEST_CASE("step response decays exponentially with the right constant") {
  MaterialResponse m = hcm009();
  double start = 0.22, target = 5.28;
  // After exactly one rise constant the gap closes by 1 - 1/e.
  double expected = target + (start - target) * std::exp(-1.0);
  CHECK(step_response(m, start, target, *m.tau_on_ms) ==
        Catch::Approx(expected).margin(1e-12));
  // Falling edges use the slower off constant.
  double fall = step_response(m, target, start, 2.0);
  CHECK(fall == Catch::Approx(start + (target - start) * std::exp(-1.0))
                    .margin(1e-12));
  CHECK(step_response(m, 1.0, 1.0, 5.0) == 1.0);
  MaterialResponse no_tau = rm257();
  CHECK_THROWS_AS(step_response(no_tau, 0.0, 1.0, 1.0), validation_error);
}

TEST_CASE("grayscale voltage inverts the normalized curve") {
  oracles::Rng rng(0x9123);
  for (int trial = 0; trial < 30; ++trial) {
    MaterialResponse m = oracles::random_material(rng, false);
    CHECK(grayscale_voltage(m, 0.0) == 0.0);
    CHECK(grayscale_voltage(m, 1.0) == saturation_voltage_clamp(m));
    for (double level : {0.1, 0.25, 0.5, 0.8, 0.99}) {
      double v = grayscale_voltage(m, level);
      double swing = (steady_intensity(m, v) - m.i_min_au) /
                     (m.i_max_au - m.i_min_au);
      CHECK(swing == Catch::Approx(level).margin(1e-9));
    }
  }
  CHECK_THROWS_AS(grayscale_voltage(hcm009(), -0.1), validation_error);
  CHECK_THROWS_AS(grayscale_voltage(hcm009(), 1.1), validation_error);
}

TEST_CASE("curve metrics reproduce the anchor figures") {
  CurveMetrics cm = curve_metrics(sample_curve(hcm009()));
  // Frozen from the sampled reconstruction at 0.25 V spacing.
  CHECK(cm.i_min_au == 0.22);
  CHECK(cm.cr == Catch::Approx(23.995466094269933).margin(1e-9));
  CHECK(cm.v_sat_v == Catch::Approx(10.497236317069865).margin(1e-9));

  CurveMetrics rm = curve_metrics(sample_curve(rm257()));
  CHECK(rm.i_max_au == Catch::Approx(4.1).epsilon(0.02));
  CHECK(rm.cr == Catch::Approx(15.9).epsilon(0.05));
  CHECK(rm.v_sat_v == Catch::Approx(12.0).margin(0.5));
}

TEST_CASE("curve metrics refuse undefined figures") {
  CurveSamples flat{{0.0, 5.0, 10.0}, {1.0, 1.0, 1.0}};
  CHECK_THROWS_WITH(curve_metrics(flat),
                    Catch::Matchers::ContainsSubstring(
                        "saturation voltage undefined"));
  CurveSamples dark{{0.0, 5.0, 10.0}, {0.0, 2.0, 4.0}};
  CHECK_THROWS_WITH(curve_metrics(dark), Catch::Matchers::ContainsSubstring(
                                             "contrast ratio undefined"));
}

TEST_CASE("v_sat interpolates between bracketing samples") {
  // Swing 1..2, threshold 1.9 crossed halfway between 2 V and 3 V.
  CurveSamples c{{0.0, 1.0, 2.0, 3.0}, {1.0, 1.5, 1.8, 2.0}};
  CurveMetrics cm = curve_metrics(c);
  CHECK(cm.v_sat_v == Catch::Approx(2.5).margin(1e-12));
}

TEST_CASE("curve csv round-trips bitwise") {
  oracles::Rng rng(0xc54);
  for (int trial = 0; trial < 100; ++trial) {
    CurveSamples c;
    int n = rng.integer(2, 40);
    double v = rng.uniform(0.0, 1.0);
    for (int i = 0; i < n; ++i) {
      c.voltage_v.push_back(v);
      c.intensity_au.push_back(rng.uniform(0.0, 8.0));
      v += rng.uniform(0.1, 1.0);
    }
    CurveSamples back = parse_curve_csv(write_curve_csv(c));
    CHECK(back == c);
  }
}

TEST_CASE("curve csv rejects malformed input with positions") {
  CHECK_THROWS_AS(parse_curve_csv(""), parse_error);
  CHECK_THROWS_WITH(parse_curve_csv("volts,intensity\n0,1\n"),
                    Catch::Matchers::ContainsSubstring("voltage_v"));
  try {
    parse_curve_csv("voltage_v,intensity_au\n0,0.5\nx,0.6\n");
    FAIL("expected parse_error");
  } catch (const parse_error& e) {
    CHECK(e.line() == 3);
  }
}

TEST_CASE("fit recovers synthetic parameters") {
  oracles::Rng rng(0xf17);
  for (int trial = 0; trial < 10; ++trial) {
    MaterialResponse truth = oracles::random_material(rng, false);
    FitResult fr = fit_response(sample_curve(truth));
    CHECK(fr.converged);
    CHECK(fr.response.i_min_au == Catch::Approx(truth.i_min_au).epsilon(0.01));
    CHECK(fr.response.i_max_au == Catch::Approx(truth.i_max_au).epsilon(0.01));
    CHECK(fr.response.v_mid_v == Catch::Approx(truth.v_mid_v).epsilon(0.01));
    CHECK(fr.response.v_width_v ==
          Catch::Approx(truth.v_width_v).epsilon(0.01));
    CHECK(fr.residual < 1e-6);
    for (std::size_t i = 1; i < fr.residual_history.size(); ++i)
      CHECK(fr.residual_history[i] <= fr.residual_history[i - 1]);
  }
}

TEST_CASE("fit flags degenerate inputs instead of inventing answers") {
  CurveSamples flat;
  for (int i = 0; i < 20; ++i) {
    flat.voltage_v.push_back(i * 1.0);
    flat.intensity_au.push_back(2.0);
  }
  CHECK_THROWS_AS(fit_response(flat), fit_error);

  CurveSamples tiny{{0.0, 1.0, 2.0}, {0.1, 0.2, 0.3}};
  CHECK_THROWS_WITH(fit_response(tiny),
                    Catch::Matchers::ContainsSubstring("at least four"));
}

TEST_CASE("fit survives 2% noise within loose tolerances") {
  oracles::Rng rng(0x2b0);
  MaterialResponse truth = hcm009();
  CurveSamples c = sample_curve(truth);
  for (auto& y : c.intensity_au) y *= 1.0 + 0.02 * (2.0 * rng.unit() - 1.0);
  FitResult fr = fit_response(c);
  CHECK(fr.response.v_mid_v == Catch::Approx(truth.v_mid_v).epsilon(0.05));
  CHECK(fr.response.i_max_au == Catch::Approx(truth.i_max_au).epsilon(0.05));
}
