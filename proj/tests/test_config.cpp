#include "catch_amalgamated.hpp"
#include "duoglass/duoglass.hpp"
#include "oracles.hpp"

using namespace duoglass;

TEST_CASE("an empty config is a fully-default stage-3 run") {
  RunConfig cfg = parse_run_config("");
  CHECK(cfg.same_settings(RunConfig{}));
  CHECK(cfg.panel.stage == Stage::stage3);
  CHECK(cfg.material.name == "HCM-009");
  CHECK(cfg.output_dir == "out");
  // One defaults-used notice per absent section.
  CHECK(cfg.notices.size() == 8);
}

TEST_CASE("material name resolves presets with consistent parameters") {
  RunConfig cfg = parse_run_config("[material]\nname = HCM-009\n");
  CHECK(cfg.material == hcm009());
  // The preset satisfies its saturation pin.
  CHECK(steady_intensity(cfg.material, 10.5) ==
        Catch::Approx(0.22 + 0.9 * (5.28 - 0.22)).margin(1e-9));

  RunConfig other = parse_run_config("[material]\nname = custom-mix\n");
  CHECK(other.material.name == "custom-mix");
  CHECK(other.material.i_max_au == hcm009().i_max_au);  // defaults retained
}

TEST_CASE("sections override defaults field by field") {
  std::string text =
      "[panel]\n"
      "preset = stage2\n"
      "cell_gap_um = 2.5\n"
      "\n"
      "[timing]\n"
      "frame_rate_hz = 50\n"
      "\n"
      "[mask]\n"
      "blocking_efficiency = 0.9\n"
      "off_state_background = 0.82\n"
      "\n"
      "[simulation]\n"
      "dt_ms = 0.02\n"
      "calibration_cd_per_au = 17.5\n";
  RunConfig cfg = parse_run_config(text);
  CHECK(cfg.panel.stage == Stage::stage2);
  CHECK(cfg.panel.pixel_cols == 4);
  CHECK(cfg.panel.cell_gap_um == 2.5);
  CHECK(cfg.timing.frame_rate_hz == 50.0);
  CHECK(cfg.mask.blocking_efficiency == 0.9);
  CHECK(cfg.mask.off_state_background == 0.82);
  CHECK(cfg.dt_ms == 0.02);
  CHECK(cfg.calibration_cd_per_au == 17.5);
  CHECK(cfg.notices.size() == 4);  // material, led, stack, io still default
}

TEST_CASE("geometry keys without a preset make the panel custom") {
  RunConfig cfg = parse_run_config("[panel]\npixel_cols = 6\n");
  CHECK(cfg.panel.stage == Stage::custom);
  CHECK(cfg.panel.pixel_cols == 6);
  CHECK(cfg.panel.pixel_rows == 10);  // stage3 default retained
}

TEST_CASE("config errors carry the key and line") {
  SECTION("type mismatch") {
    try {
      parse_run_config("[timing]\nframe_rate_hz = sixty\n");
      FAIL("expected parse_error");
    } catch (const parse_error& e) {
      CHECK(std::string(e.what()).find("frame_rate_hz") != std::string::npos);
      CHECK(e.line() == 2);
    }
  }
  SECTION("unknown key") {
    CHECK_THROWS_WITH(parse_run_config("[panel]\ncolor = red\n"),
                      Catch::Matchers::ContainsSubstring("unknown key 'color'"));
  }
  SECTION("unknown section") {
    CHECK_THROWS_WITH(parse_run_config("[audio]\nvolume = 11\n"),
                      Catch::Matchers::ContainsSubstring("[audio]"));
  }
  SECTION("duplicate key") {
    CHECK_THROWS_WITH(parse_run_config("[timing]\ndt = 1\n"),
                      Catch::Matchers::ContainsSubstring("unknown key"));
    CHECK_THROWS_WITH(
        parse_run_config("[simulation]\ndt_ms = 1\ndt_ms = 2\n"),
        Catch::Matchers::ContainsSubstring("duplicate key"));
  }
  SECTION("duplicate section") {
    CHECK_THROWS_WITH(parse_run_config("[led]\n[led]\n"),
                      Catch::Matchers::ContainsSubstring("duplicate section"));
  }
  SECTION("key before any section") {
    CHECK_THROWS_AS(parse_run_config("dt_ms = 1\n"), parse_error);
  }
  SECTION("missing value") {
    CHECK_THROWS_AS(parse_run_config("[simulation]\ndt_ms =\n"), parse_error);
  }
  SECTION("unknown preset") {
    CHECK_THROWS_WITH(parse_run_config("[panel]\npreset = stage9\n"),
                      Catch::Matchers::ContainsSubstring("stage9"));
  }
  SECTION("invalid resolved config") {
    CHECK_THROWS_AS(parse_run_config("[mask]\nblocking_efficiency = 1.5\n"),
                    validation_error);
  }
}

TEST_CASE("comments and blank lines are ignored") {
  RunConfig cfg = parse_run_config(
      "# full-line comment\n"
      "\n"
      "[simulation]  ; trailing section comment\n"
      "dt_ms = 0.04  # inline comment\n");
  CHECK(cfg.dt_ms == 0.04);
}

TEST_CASE("special values parse both ways") {
  RunConfig cfg = parse_run_config(
      "[mask]\noff_state_background = material\n"
      "[simulation]\ncalibration_cd_per_au = auto\n"
      "[material]\nname = RM-257\ntau_on_ms = none\ntau_off_ms = none\n");
  CHECK_FALSE(cfg.mask.off_state_background.has_value());
  CHECK_FALSE(cfg.calibration_cd_per_au.has_value());
  CHECK_FALSE(cfg.material.tau_on_ms.has_value());

  CHECK_THROWS_WITH(
      parse_run_config("[mask]\noff_state_background = dark\n"),
      Catch::Matchers::ContainsSubstring("off_state_background"));
}

TEST_CASE("v_sat pin solves the midpoint like the presets do") {
  RunConfig cfg = parse_run_config(
      "[material]\nname = mix\ni_min_au = 0.22\ni_max_au = 5.28\n"
      "v_width_v = 1.5\nv_sat_pin_v = 10.5\n");
  CHECK(cfg.material.v_mid_v ==
        Catch::Approx(hcm009().v_mid_v).margin(1e-9));
  CHECK_THROWS_WITH(
      parse_run_config("[material]\nv_mid_v = 5\nv_sat_pin_v = 10\n"),
      Catch::Matchers::ContainsSubstring("one or the other"));
}

TEST_CASE("parse and serialize are mutually inverse") {
  oracles::Rng rng(0xcf6);
  for (int trial = 0; trial < 100; ++trial) {
    RunConfig cfg;
    switch (rng.integer(0, 2)) {
      case 0: cfg.panel = panel_preset("stage1"); break;
      case 1: cfg.panel = panel_preset("stage2"); break;
      default:
        // Custom grids keep the stage-3 per-pixel footprint so the unit-cell
        // geometry stays valid.
        cfg.panel = panel_preset("stage3");
        cfg.panel.stage = Stage::custom;
        cfg.panel.pixel_cols = rng.integer(1, 12);
        cfg.panel.pixel_rows = rng.integer(1, 12);
        cfg.panel.panel_width_in = 0.45 * cfg.panel.pixel_cols;
        cfg.panel.panel_height_in = 0.45 * cfg.panel.pixel_rows;
    }
    cfg.material = oracles::random_material(rng, rng.integer(0, 1) == 1);
    cfg.material.name = "mix-" + std::to_string(trial);
    cfg.timing.frame_rate_hz = rng.uniform(30.0, 120.0);
    cfg.timing.drive_frequency_hz = 4000.0;
    cfg.led.coupling_efficiency = rng.uniform(0.1, 1.0);
    cfg.led.flux_per_color = {rng.uniform(0.1, 2.0), rng.uniform(0.1, 2.0),
                              rng.uniform(0.1, 2.0)};
    if (rng.integer(0, 1)) cfg.mask.off_state_background = rng.uniform(0, 1);
    cfg.mask.blocking_efficiency = rng.uniform(0.5, 1.0);
    cfg.dt_ms = rng.uniform(0.01, 0.05);
    if (rng.integer(0, 1)) cfg.calibration_cd_per_au = rng.uniform(1.0, 30.0);
    cfg.front_image = "front.ppm";
    cfg.output_dir = "results";

    std::string text = serialize_run_config(cfg);
    RunConfig back = parse_run_config(text);
    CHECK(back.same_settings(cfg));
    // Idempotence: a second round adds nothing.
    CHECK(serialize_run_config(back) == text);
  }
}

TEST_CASE("preset-named materials with overridden fields round-trip") {
  RunConfig cfg;
  cfg.material = hcm009();
  cfg.material.tau_on_ms.reset();
  cfg.material.tau_off_ms.reset();
  RunConfig back = parse_run_config(serialize_run_config(cfg));
  CHECK(back.same_settings(cfg));
}
