#include "catch_amalgamated.hpp"
#include "duoglass/duoglass.hpp"
#include "oracles.hpp"

using namespace duoglass;

namespace {

DriveSchedule compile_random(oracles::Rng& rng, const PanelSpec& spec,
                             const TimingConfig& timing = {}) {
  Image front = oracles::random_image(rng, spec.pixel_cols, spec.pixel_rows);
  Image back = oracles::random_image(rng, spec.pixel_cols, spec.pixel_rows);
  return compile_schedule({front, back}, spec, hcm009(), timing);
}

}  // namespace

TEST_CASE("frame timing derives from the refresh rate") {
  TimingConfig t;
  CHECK(frame_period_ms(t) == Catch::Approx(1000.0 / 60.0).margin(1e-12));
  t.frame_rate_hz = 50.0;
  CHECK(frame_period_ms(t) == 20.0);
  t.drive_frequency_hz = 100.0;  // below 2 cycles per subframe
  CHECK_THROWS_AS(validate(t), validation_error);
}

TEST_CASE("feasibility splits exactly at the analytic boundary") {
  // Sub-frame slot must cover settle_margin * (tau_on + tau_off).
  TimingConfig t60;
  FeasibilityReport r60 = check_feasibility(t60, hcm009());
  CHECK_FALSE(r60.feasible);
  CHECK(r60.subframe_ms == Catch::Approx(1000.0 / 360.0).margin(1e-12));
  CHECK(r60.required_ms == 3.0);
  CHECK(r60.margin_ratio ==
        Catch::Approx((1000.0 / 360.0) / 3.0).margin(1e-12));

  TimingConfig t50;
  t50.frame_rate_hz = 50.0;
  FeasibilityReport r50 = check_feasibility(t50, hcm009());
  CHECK(r50.feasible);
  CHECK(r50.margin_ratio == Catch::Approx(10.0 / 9.0).margin(1e-12));

  TimingConfig loose = t60;
  loose.settle_margin = 0.0;
  CHECK(check_feasibility(loose, hcm009()).feasible);
}

TEST_CASE("compiled schedules follow the canonical subframe order") {
  PanelSpec spec = panel_preset("stage2");
  Image white = Image::filled(4, 4, 255, 255, 255);
  Image black = Image::filled(4, 4, 0, 0, 0);
  DriveSchedule s = compile_schedule({white, black}, spec, hcm009());

  REQUIRE(s.subframes.size() == 6);
  Color want_color[6] = {Color::r, Color::r, Color::g,
                         Color::g, Color::b, Color::b};
  Side want_side[6] = {Side::a, Side::b, Side::a, Side::b, Side::a, Side::b};
  double slot = frame_period_ms(s.timing) / 6.0;
  for (int i = 0; i < 6; ++i) {
    const SubFrame& sf = s.subframes[i];
    CHECK(sf.color == want_color[i]);
    CHECK(sf.side == want_side[i]);
    CHECK(sf.duration_ms == Catch::Approx(slot).margin(1e-12));
    // 1 kHz drive inside a 2.778 ms slot fits exactly two full AC cycles.
    CHECK(sf.polarity_cycles == 2.0);
    REQUIRE(sf.amplitudes.size() == 16);
  }
  // Front white drives the saturation clamp, back black drives 0 V.
  double v_white = grayscale_voltage(hcm009(), 1.0);
  for (const ElectrodeAmplitude& ea : s.subframes[0].amplitudes) {
    CHECK(ea.volts == v_white);
    CHECK(ea.electrode < 16);
  }
  for (const ElectrodeAmplitude& ea : s.subframes[1].amplitudes) {
    CHECK(ea.volts == 0.0);
    CHECK(ea.electrode >= 16);
  }
}

TEST_CASE("compiled schedules pass every drive invariant") {
  oracles::Rng rng(0x5ced);
  PanelSpec spec = panel_preset("stage2");
  for (int trial = 0; trial < 50; ++trial) {
    DriveSchedule s = compile_random(rng, spec);
    CHECK(validate_schedule(s).empty());
  }
}

TEST_CASE("compile rejects inconsistent inputs") {
  PanelSpec spec = panel_preset("stage2");
  Image ok = Image::filled(4, 4, 0, 0, 0);
  Image wrong = Image::filled(3, 4, 0, 0, 0);
  CHECK_THROWS_WITH(compile_schedule({wrong, ok}, spec, hcm009()),
                    Catch::Matchers::ContainsSubstring("3x4"));

  TimingConfig five;
  five.subframes_per_frame = 5;
  CHECK_THROWS_AS(compile_schedule({ok, ok}, spec, hcm009(), five),
                  unsupported_error);

  TimingConfig slow;  // drive too slow for one full AC cycle per slot
  slow.frame_rate_hz = 120.0;
  slow.drive_frequency_hz = 1440.0;
  CHECK_NOTHROW(compile_schedule({ok, ok}, spec, hcm009(), slow));
  slow.drive_frequency_hz = 1500.0;
  CHECK_NOTHROW(compile_schedule({ok, ok}, spec, hcm009(), slow));
}

TEST_CASE("validate_schedule reports violations as data") {
  PanelSpec spec = panel_preset("stage2");
  Image img = Image::filled(4, 4, 128, 128, 128);
  DriveSchedule base = compile_schedule({img, img}, spec, hcm009());

  SECTION("fractional polarity cycles break dc balance") {
    DriveSchedule s = base;
    s.subframes[2].polarity_cycles = 1.5;
    auto v = validate_schedule(s);
    REQUIRE_FALSE(v.empty());
    bool found = false;
    for (const Violation& x : v)
      if (x.code == "dc-balance" && x.subframe == 2) found = true;
    CHECK(found);
  }
  SECTION("active window must fit the slot") {
    DriveSchedule s = base;
    s.subframes[0].polarity_cycles = 50.0;
    auto v = validate_schedule(s);
    bool found = false;
    for (const Violation& x : v)
      if (x.code == "active-window") found = true;
    CHECK(found);
  }
  SECTION("electrodes must belong to the subframe side") {
    DriveSchedule s = base;
    s.subframes[0].amplitudes[0].electrode = 20;  // a B electrode in an A slot
    auto v = validate_schedule(s);
    bool found = false;
    for (const Violation& x : v)
      if (x.code == "side-mixing") found = true;
    CHECK(found);
  }
  SECTION("amplitudes must be finite and non-negative") {
    DriveSchedule s = base;
    s.subframes[0].amplitudes[0].volts = -2.0;
    CHECK_FALSE(validate_schedule(s).empty());
  }
  SECTION("subframe durations must sum to the frame period") {
    DriveSchedule s = base;
    s.subframes[5].duration_ms += 0.5;
    auto v = validate_schedule(s);
    bool found = false;
    for (const Violation& x : v)
      if (x.code == "frame-period") found = true;
    CHECK(found);
  }
  SECTION("format version is pinned") {
    DriveSchedule s = base;
    s.format_version = 2;
    CHECK_FALSE(validate_schedule(s).empty());
  }
}

TEST_CASE("schedule text round-trips exactly") {
  oracles::Rng rng(0x0cd);
  PanelSpec spec = panel_preset("stage2");
  for (int trial = 0; trial < 100; ++trial) {
    DriveSchedule s = compile_random(rng, spec);
    DriveSchedule back = parse_schedule(serialize_schedule(s));
    CHECK(back == s);
    // Serialization itself is byte-deterministic.
    CHECK(serialize_schedule(back) == serialize_schedule(s));
  }
}

TEST_CASE("schedule parser reports precise diagnostics") {
  CHECK_THROWS_WITH(parse_schedule(""),
                    Catch::Matchers::ContainsSubstring("empty"));
  CHECK_THROWS_WITH(parse_schedule("DUOGLASS-SCHEDULE v9\n"),
                    Catch::Matchers::ContainsSubstring("v9") ||
                        Catch::Matchers::ContainsSubstring("version"));

  PanelSpec spec = panel_preset("stage2");
  Image img = Image::filled(4, 4, 10, 20, 30);
  std::string text =
      serialize_schedule(compile_schedule({img, img}, spec, hcm009()));

  SECTION("junk after end") {
    CHECK_THROWS_AS(parse_schedule(text + "trailing\n"), parse_error);
  }
  SECTION("bad number carries line and column") {
    std::string broken = text;
    std::size_t pos = broken.find("amp 0 ");
    REQUIRE(pos != std::string::npos);
    broken.replace(pos, 6, "amp x ");
    try {
      parse_schedule(broken);
      FAIL("expected parse_error");
    } catch (const parse_error& e) {
      CHECK(e.line() > 0);
      CHECK(e.column() > 0);
    }
  }
}

TEST_CASE("hand-built schedules can omit electrodes safely") {
  // Missing amplitudes mean 0 V; parse accepts them and validation is clean
  // as long as the drive invariants hold.
  PanelSpec spec = panel_preset("stage2");
  Image img = Image::filled(4, 4, 0, 0, 0);
  DriveSchedule s = compile_schedule({img, img}, spec, hcm009());
  for (auto& sf : s.subframes) sf.amplitudes.clear();
  CHECK(validate_schedule(s).empty());
  DriveSchedule back = parse_schedule(serialize_schedule(s));
  CHECK(back == s);
}
