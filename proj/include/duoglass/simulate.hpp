#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "duoglass/electro_optics.hpp"
#include "duoglass/errors.hpp"
#include "duoglass/image.hpp"
#include "duoglass/panel.hpp"
#include "duoglass/parallel.hpp"
#include "duoglass/schedule.hpp"
#include "duoglass/text.hpp"

// Time-stepped photometric simulation.
//
// Every (pixel, side) sub-pixel group shares one electrode, so its scattering
// level follows a single trajectory: an exact exponential relaxation toward
// the steady-state intensity of the instantaneous amplitude, integrated in dt
// intervals (segment boundaries are quantized to the dt grid; the update
// itself is exact, not an Euler step). Emission is counted during the side's
// own sub-frames: level x LED flux x coupling x calibration, split by the
// mask between the facing side (blocking_efficiency) and the opposite side
// (the remainder). Each side is integrated over one frame period starting at
// its own first sub-frame; the periodic average does not depend on the phase
// origin, and the rotation makes the two sides' arithmetic identical, which
// keeps side symmetry and obversion checks exact.

namespace duoglass {

inline constexpr double kWhiteLuminanceTarget = 16.0;  // cd/m2, full white

struct LedConfig {
  enum class Edges { left, right, both };

  std::array<double, 3> flux_per_color{1.0, 1.0, 1.0};  // a.u., r g b
  double coupling_efficiency = 0.5;
  Edges edges = Edges::both;
  // Optional linear guided-flux depletion away from the feeding edge,
  // as fractional loss per millimetre; 0 keeps the flux uniform.
  double depletion_per_mm = 0.0;

  bool operator==(const LedConfig&) const = default;
};

inline void validate(const LedConfig& led) {
  for (double f : led.flux_per_color)
    if (!(f >= 0) || !std::isfinite(f))
      throw validation_error("LED flux must be finite and non-negative");
  if (!(led.coupling_efficiency >= 0) || led.coupling_efficiency > 1.0)
    throw validation_error("coupling_efficiency must lie in [0, 1]");
  if (!(led.depletion_per_mm >= 0))
    throw validation_error("depletion_per_mm must be non-negative");
}

struct MaskModel {
  // Fraction of a sub-pixel's emission that exits its facing side; the rest
  // leaks to the opposite viewer. 1.0 is a perfect mask.
  double blocking_efficiency = 1.0;
  // Lower bound on the achievable scattering level (stray light), in a.u.
  // Unset resolves to the material's i_min, which changes nothing.
  std::optional<double> off_state_background;

  bool operator==(const MaskModel&) const = default;
};

inline void validate(const MaskModel& mask) {
  if (!(mask.blocking_efficiency >= 0) || mask.blocking_efficiency > 1.0)
    throw validation_error("blocking_efficiency must lie in [0, 1]");
  if (mask.off_state_background && !(*mask.off_state_background >= 0))
    throw validation_error("off_state_background must be non-negative");
}

struct SideLuminance {
  std::array<std::vector<double>, 3> channel;  // r g b, cols*rows, cd/m2
};

struct SimulationMetrics {
  double brightness_white_cd_m2 =
      std::numeric_limits<double>::quiet_NaN();
  double panel_cr = std::numeric_limits<double>::quiet_NaN();
  double crosstalk = 0.0;
  double transparency = 0.0;
};

struct SimulationReport {
  PanelRef panel;
  TimingConfig timing;
  double dt_ms = 0.0;
  double calibration_cd_per_au = 1.0;
  SideLuminance front;
  SideLuminance back;
  SimulationMetrics metrics;
};

struct SimulateOptions {
  double dt_ms = 0.05;
  int warmup_frame_cap = 2;
  // Unset: derive via calibrate_luminance on the default stage-2 device.
  std::optional<double> calibration_cd_per_au;
  // Adds the full-white / full-black reference runs that fill in
  // brightness_white and panel_cr.
  bool reference_metrics = true;
  OpticalStack stack{};
};

namespace detail {

struct Segment {
  double len_ms = 0.0;
  double steady_au = 0.0;
  int channel = -1;  // accrual channel, -1 outside the side's own sub-frames
};

// Advances one dt interval with an exact exponential update, clamping the
// level at the background floor (the crossing instant is solved exactly so
// the integral stays closed-form). Returns the new level and accumulates
// the integral of the clamped level over the interval.
inline double advance_level(double level, double target, double tau_on_ms,
                            double tau_off_ms, double h_ms, double floor_au,
                            double& integral_au_ms) {
  if (level <= floor_au && target <= floor_au) {
    integral_au_ms += floor_au * h_ms;
    return floor_au;
  }
  double tau = target > level ? tau_on_ms : tau_off_ms;
  if (level > floor_au && target < floor_au) {
    double t_cross = tau * std::log((level - target) / (floor_au - target));
    if (t_cross < h_ms) {
      integral_au_ms += target * t_cross +
                        (level - target) * tau *
                            (1.0 - std::exp(-t_cross / tau)) +
                        (h_ms - t_cross) * floor_au;
      return floor_au;
    }
  }
  double decay = std::exp(-h_ms / tau);
  integral_au_ms += target * h_ms + (level - target) * tau * (1.0 - decay);
  double next = target + (level - target) * decay;
  return next < floor_au ? floor_au : next;
}

struct Trajectory {
  std::vector<Segment> segments;
  double total_ms = 0.0;
};

// One frame of the trajectory, marching on the dt grid (t = k * dt, so grid
// times never drift). An interval spanning a segment boundary is advanced
// piecewise with the boundary instant resolved exactly, which keeps every
// piece on the closed-form solution; dt then only sets the marching
// granularity. When accrue is non-null the clamped level integral lands in
// accrue[channel] for accruing segments.
inline double run_frame(const Trajectory& traj, double level, double dt_ms,
                        double floor_au, double tau_on_ms, double tau_off_ms,
                        std::array<double, 3>* accrue) {
  std::size_t seg = 0;
  double seg_end = traj.segments.empty() ? traj.total_ms
                                         : traj.segments[0].len_ms;
  long long k = 0;
  for (;;) {
    double t = static_cast<double>(k) * dt_ms;
    if (t >= traj.total_ms - 1e-12) break;
    double t_next = std::min(static_cast<double>(k + 1) * dt_ms,
                             traj.total_ms);
    double cursor = t;
    while (cursor < t_next - 1e-12) {
      while (seg + 1 < traj.segments.size() && cursor >= seg_end - 1e-12) {
        ++seg;
        seg_end += traj.segments[seg].len_ms;
      }
      double stop = seg + 1 < traj.segments.size() ? std::min(t_next, seg_end)
                                                   : t_next;
      const Segment& sg = traj.segments[seg];
      double integral = 0.0;
      level = advance_level(level, sg.steady_au, tau_on_ms, tau_off_ms,
                            stop - cursor, floor_au, integral);
      if (accrue && sg.channel >= 0) (*accrue)[sg.channel] += integral;
      cursor = stop;
    }
    ++k;
  }
  return level;
}

struct CoreResult {
  // Own emission per side and channel, per pixel: flux x coupling x
  // calibration x weight applied, mask split not yet applied. cd/m2.
  std::array<std::vector<double>, 3> own[2];  // [side][channel][pixel]
};

inline int channel_of(Color c) {
  return c == Color::r ? 0 : c == Color::g ? 1 : 2;
}

// Mean guided-flux weight of one pixel-side group under the depletion model.
inline double flux_weight(const PanelSpec& spec, const LedConfig& led,
                          int pixel_col, int pixel_row, Side side) {
  if (led.depletion_per_mm == 0.0) return 1.0;
  double width_um = spec.panel_width_in * kMicronsPerInch;
  int n = spec.subpixels_per_pixel_side;
  double sum = 0.0;
  for (int cr = 0; cr < n; ++cr)
    for (int cc = 0; cc < n; ++cc) {
      UnitCellRects rects =
          unit_cell_rects(spec, pixel_col, pixel_row, cc, cr);
      const Rect& r = side == Side::a ? rects.subpixel_a : rects.subpixel_b;
      double x_mm = (r.x0 + r.x1) / 2.0 / 1000.0;
      double from_left =
          std::max(0.0, 1.0 - led.depletion_per_mm * x_mm);
      double from_right = std::max(
          0.0, 1.0 - led.depletion_per_mm * (width_um / 1000.0 - x_mm));
      switch (led.edges) {
        case LedConfig::Edges::left: sum += from_left; break;
        case LedConfig::Edges::right: sum += from_right; break;
        case LedConfig::Edges::both:
          sum += (from_left + from_right) / 2.0;
          break;
      }
    }
  return sum / (static_cast<double>(n) * n);
}

inline CoreResult simulate_core(const DriveSchedule& s, const PanelSpec& spec,
                                const MaterialResponse& m,
                                const LedConfig& led, const MaskModel& mask,
                                const SimulateOptions& opt,
                                double calibration) {
  int n = spec.pixel_cols * spec.pixel_rows;
  double tau_on = require_tau_on(m);
  double tau_off = require_tau_off(m);
  double floor_au = mask.off_state_background.value_or(m.i_min_au);
  double steady_floor = std::max(m.i_min_au, floor_au);

  // Per sub-frame, the drive voltage of every pixel of that sub-frame's side.
  std::vector<std::vector<double>> volts(s.subframes.size(),
                                         std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < s.subframes.size(); ++i) {
    const SubFrame& sf = s.subframes[i];
    for (const ElectrodeAmplitude& ea : sf.amplitudes) {
      int pixel = sf.side == Side::a ? ea.electrode : ea.electrode - n;
      volts[i][pixel] = ea.volts;
    }
  }

  std::array<std::vector<double>, 2> weights;
  for (int side = 0; side < 2; ++side) {
    weights[side].resize(n);
    for (int row = 0; row < spec.pixel_rows; ++row)
      for (int col = 0; col < spec.pixel_cols; ++col)
        weights[side][row * spec.pixel_cols + col] = flux_weight(
            spec, led, col, row, side == 0 ? Side::a : Side::b);
  }

  double frame_ms = frame_period_ms(s.timing);
  double steady_off = steady_intensity(m, 0.0);
  double scale = led.coupling_efficiency * calibration / frame_ms;

  CoreResult result;
  for (int side = 0; side < 2; ++side)
    for (int ch = 0; ch < 3; ++ch) result.own[side][ch].assign(n, 0.0);

  parallel_for(static_cast<std::size_t>(2 * n), [&](std::size_t begin,
                                                    std::size_t end) {
    for (std::size_t idx = begin; idx < end; ++idx) {
      Side side = idx < static_cast<std::size_t>(n) ? Side::a : Side::b;
      int pixel = static_cast<int>(idx % static_cast<std::size_t>(n));

      // Rotate the sub-frame ring so this side's first slot starts at t = 0.
      std::size_t first_own = 0;
      while (first_own < s.subframes.size() &&
             s.subframes[first_own].side != side)
        ++first_own;
      if (first_own == s.subframes.size()) first_own = 0;

      Trajectory traj;
      traj.segments.reserve(s.subframes.size() * 2);
      for (std::size_t j = 0; j < s.subframes.size(); ++j) {
        std::size_t sfi = (first_own + j) % s.subframes.size();
        const SubFrame& sf = s.subframes[sfi];
        if (sf.side == side) {
          double act = std::min(active_ms(sf, s.timing), sf.duration_ms);
          int ch = channel_of(sf.color);
          traj.segments.push_back(Segment{
              act, steady_intensity(m, volts[sfi][pixel]), ch});
          if (sf.duration_ms - act > 0)
            traj.segments.push_back(
                Segment{sf.duration_ms - act, steady_off, ch});
        } else {
          traj.segments.push_back(Segment{sf.duration_ms, steady_off, -1});
        }
        traj.total_ms += sf.duration_ms;
      }

      double level = steady_floor;
      for (int warm = 0; warm < opt.warmup_frame_cap; ++warm) {
        double before = level;
        level = run_frame(traj, level, opt.dt_ms, floor_au, tau_on, tau_off,
                          nullptr);
        if (std::abs(level - before) < 1e-9) break;
      }
      std::array<double, 3> integral{0.0, 0.0, 0.0};
      run_frame(traj, level, opt.dt_ms, floor_au, tau_on, tau_off, &integral);

      double w = weights[side == Side::a ? 0 : 1][pixel];
      for (int ch = 0; ch < 3; ++ch)
        result.own[side == Side::a ? 0 : 1][ch][pixel] =
            integral[ch] * led.flux_per_color[ch] * scale * w;
    }
  });
  return result;
}

inline double mean_of(const std::array<std::vector<double>, 3>& channels) {
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& ch : channels) {
    for (double v : ch) sum += v;
    count += ch.size();
  }
  return count > 0 ? sum / static_cast<double>(count) : 0.0;
}

}  // namespace detail

inline void check_simulation_inputs(const DriveSchedule& s,
                                    const PanelSpec& spec,
                                    const MaterialResponse& m,
                                    const LedConfig& led,
                                    const MaskModel& mask, double dt_ms) {
  validate(spec);
  validate(m);
  validate(led);
  validate(mask);
  if (panel_ref(spec) != s.panel)
    throw validation_error("schedule was compiled for a different panel");
  auto violations = validate_schedule(s);
  if (!violations.empty())
    throw validation_error("schedule is invalid: " + violations.front().message +
                           " (" + text::fmt(violations.size()) +
                           " violation(s) total)");
  double tau_min = std::min(require_tau_on(m), require_tau_off(m));
  if (!(dt_ms > 0) || dt_ms > tau_min / 4.0)
    throw validation_error(
        "time step " + text::fmt(dt_ms) +
        " ms is unstable: it must be positive and at most a quarter of the "
        "fastest time constant (" +
        text::fmt(tau_min) + " ms)");
}

// Calibration constant c (cd/m2 per a.u.) such that a sustained full-white
// pair on the default stage-2 device reads kWhiteLuminanceTarget.
inline double calibrate_luminance(const MaterialResponse& m,
                                  const LedConfig& led,
                                  const TimingConfig& timing = {},
                                  double dt_ms = 0.05) {
  PanelSpec spec = panel_preset("stage2");
  Image white = Image::filled(spec.pixel_cols, spec.pixel_rows, 255, 255, 255);
  DriveSchedule s = compile_schedule({white, white}, spec, m, timing);
  MaskModel mask;
  check_simulation_inputs(s, spec, m, led, mask, dt_ms);
  SimulateOptions opt;
  opt.dt_ms = dt_ms;
  detail::CoreResult core =
      detail::simulate_core(s, spec, m, led, mask, opt, 1.0);
  // Full-white is side symmetric, so the front mean is the white brightness
  // regardless of the mask split.
  double per_pixel = 3.0 * detail::mean_of(core.own[0]);
  if (!(per_pixel > 0))
    throw validation_error(
        "calibration undefined: the device emits no light (check LED flux "
        "and coupling)");
  return kWhiteLuminanceTarget / per_pixel;
}

struct PanelContrast {
  double front = 0.0;
  double back = 0.0;
  bool front_infinite = false;
  bool back_infinite = false;
};

// Ratio of mean white to mean black luminance per side. A zero black mean is
// reported through the infinity flags (ideal device).
inline PanelContrast panel_contrast(const SimulationReport& on,
                                    const SimulationReport& off) {
  if (on.panel != off.panel || !(on.timing == off.timing) ||
      on.dt_ms != off.dt_ms ||
      on.calibration_cd_per_au != off.calibration_cd_per_au)
    throw validation_error(
        "contrast needs two reports from the same configuration, differing "
        "only in image content");
  PanelContrast pc;
  auto one = [](const SideLuminance& w, const SideLuminance& k, double& ratio,
                bool& infinite) {
    double wm = detail::mean_of(w.channel);
    double km = detail::mean_of(k.channel);
    if (km <= 0.0) {
      infinite = true;
      ratio = std::numeric_limits<double>::infinity();
    } else {
      ratio = wm / km;
    }
  };
  one(on.front, off.front, pc.front, pc.front_infinite);
  one(on.back, off.back, pc.back, pc.back_infinite);
  return pc;
}

inline SimulationReport simulate_frame(const DriveSchedule& s,
                                       const PanelSpec& spec,
                                       const MaterialResponse& m,
                                       const LedConfig& led,
                                       const MaskModel& mask,
                                       const SimulateOptions& opt = {}) {
  check_simulation_inputs(s, spec, m, led, mask, opt.dt_ms);
  validate(opt.stack);
  // The calibration constant is pinned to the default stage-2 device so the
  // same material and LEDs yield one constant no matter what is simulated.
  double c = opt.calibration_cd_per_au
                 ? *opt.calibration_cd_per_au
                 : calibrate_luminance(m, led, TimingConfig{}, opt.dt_ms);

  detail::CoreResult core =
      detail::simulate_core(s, spec, m, led, mask, opt, c);

  SimulationReport rep;
  rep.panel = s.panel;
  rep.timing = s.timing;
  rep.dt_ms = opt.dt_ms;
  rep.calibration_cd_per_au = c;

  double beta = mask.blocking_efficiency;
  int n = spec.pixel_cols * spec.pixel_rows;
  for (int ch = 0; ch < 3; ++ch) {
    rep.front.channel[ch].resize(n);
    rep.back.channel[ch].resize(n);
    for (int p = 0; p < n; ++p) {
      rep.front.channel[ch][p] =
          beta * core.own[0][ch][p] + (1.0 - beta) * core.own[1][ch][p];
      rep.back.channel[ch][p] =
          beta * core.own[1][ch][p] + (1.0 - beta) * core.own[0][ch][p];
    }
  }

  // Crosstalk: leaked light on a side relative to that side's own content.
  double own_a = detail::mean_of(core.own[0]);
  double own_b = detail::mean_of(core.own[1]);
  double leak = 1.0 - beta;
  if (leak == 0.0) {
    rep.metrics.crosstalk = 0.0;
  } else {
    auto ratio = [&](double leaked, double intended) {
      if (leaked <= 0.0) return 0.0;
      if (intended <= 0.0) return std::numeric_limits<double>::infinity();
      return leaked / intended;
    };
    rep.metrics.crosstalk = std::max(ratio(leak * own_b, beta * own_a),
                                     ratio(leak * own_a, beta * own_b));
  }
  rep.metrics.transparency = panel_transparency(spec, opt.stack);

  if (opt.reference_metrics) {
    Image white =
        Image::filled(spec.pixel_cols, spec.pixel_rows, 255, 255, 255);
    Image black = Image::filled(spec.pixel_cols, spec.pixel_rows, 0, 0, 0);
    SimulateOptions ref_opt = opt;
    ref_opt.reference_metrics = false;
    ref_opt.calibration_cd_per_au = c;
    DriveSchedule sw = compile_schedule({white, white}, spec, m, s.timing);
    DriveSchedule sk = compile_schedule({black, black}, spec, m, s.timing);
    SimulationReport on = simulate_frame(sw, spec, m, led, mask, ref_opt);
    SimulationReport off = simulate_frame(sk, spec, m, led, mask, ref_opt);
    rep.metrics.brightness_white_cd_m2 =
        3.0 * detail::mean_of(on.front.channel);
    PanelContrast pc = panel_contrast(on, off);
    if (pc.front_infinite || pc.back_infinite)
      rep.metrics.panel_cr = std::numeric_limits<double>::infinity();
    else
      rep.metrics.panel_cr = (pc.front + pc.back) / 2.0;
  }
  return rep;
}

inline SimulationReport simulate_frame(const DriveSchedule& s,
                                       const PanelSpec& spec,
                                       const MaterialResponse& m,
                                       const LedConfig& led,
                                       const MaskModel& mask, double dt_ms) {
  SimulateOptions opt;
  opt.dt_ms = dt_ms;
  return simulate_frame(s, spec, m, led, mask, opt);
}

// Gamma-free 8-bit rendering of one side, normalized to the side's brightest
// channel sample: byte = round(255 * L / L_max), all zeros when dark.
inline Image render_side(const SimulationReport& rep, Side side) {
  const SideLuminance& lum = side == Side::a ? rep.front : rep.back;
  double peak = 0.0;
  for (const auto& ch : lum.channel)
    for (double v : ch) {
      if (!std::isfinite(v) || v < 0)
        throw validation_error("luminance map holds a non-finite value");
      peak = std::max(peak, v);
    }
  Image img = Image::filled(rep.panel.pixel_cols, rep.panel.pixel_rows, 0, 0, 0);
  if (peak == 0.0) return img;
  for (int ch = 0; ch < 3; ++ch)
    for (int p = 0; p < rep.panel.pixel_cols * rep.panel.pixel_rows; ++p)
      img.data[static_cast<std::size_t>(p) * 3 + ch] = static_cast<std::uint8_t>(
          std::lround(255.0 * lum.channel[ch][p] / peak));
  return img;
}

struct ObversionReport {
  bool pass = false;
  bool degenerate = false;  // fewer than two trials proves nothing
  int trials = 0;
  // Largest relative change of the back map while the front content varies,
  // and of the front map while the back content varies.
  double max_deviation_back = 0.0;
  double max_deviation_front = 0.0;
};

// Checks that one side's luminance is independent of the other side's image
// content over `trials` random content pairs. Deterministic for a fixed seed.
inline ObversionReport obversion_check(const PanelSpec& spec,
                                       const MaterialResponse& m,
                                       const LedConfig& led,
                                       const MaskModel& mask,
                                       const TimingConfig& timing = {},
                                       int trials = 100,
                                       std::uint64_t seed = 0x5eed) {
  validate(spec);
  if (trials < 1) throw validation_error("trials must be at least 1");
  std::mt19937_64 rng(seed);
  auto random_image = [&]() {
    Image img = Image::filled(spec.pixel_cols, spec.pixel_rows, 0, 0, 0);
    for (auto& b : img.data)
      b = static_cast<std::uint8_t>(rng() >> 56);
    return img;
  };
  Image fixed = Image::filled(spec.pixel_cols, spec.pixel_rows, 0, 0, 0);
  for (int y = 0; y < fixed.height; ++y)
    for (int x = 0; x < fixed.width; ++x)
      for (int ch = 0; ch < 3; ++ch)
        fixed.at(x, y, ch) =
            static_cast<std::uint8_t>((x * 31 + y * 67 + ch * 101) % 256);

  SimulateOptions opt;
  opt.reference_metrics = false;
  opt.calibration_cd_per_au = 1.0;  // relative deviations are scale free

  auto deviation = [](const SideLuminance& a, const SideLuminance& b) {
    double worst = 0.0;
    for (int ch = 0; ch < 3; ++ch)
      for (std::size_t i = 0; i < a.channel[ch].size(); ++i) {
        double x = a.channel[ch][i], y = b.channel[ch][i];
        double scale = std::max({std::abs(x), std::abs(y), 1e-300});
        worst = std::max(worst, std::abs(x - y) / scale);
      }
    return worst;
  };

  ObversionReport rep;
  rep.trials = trials;
  rep.degenerate = trials < 2;

  SimulationReport ref;
  for (int t = 0; t < trials; ++t) {
    DriveSchedule s =
        compile_schedule({random_image(), fixed}, spec, m, timing);
    SimulationReport r = simulate_frame(s, spec, m, led, mask, opt);
    if (t == 0) ref = r;
    else
      rep.max_deviation_back =
          std::max(rep.max_deviation_back, deviation(ref.back, r.back));
  }
  for (int t = 0; t < trials; ++t) {
    DriveSchedule s =
        compile_schedule({fixed, random_image()}, spec, m, timing);
    SimulationReport r = simulate_frame(s, spec, m, led, mask, opt);
    if (t == 0) ref = r;
    else
      rep.max_deviation_front =
          std::max(rep.max_deviation_front, deviation(ref.front, r.front));
  }
  rep.pass = rep.max_deviation_back <= 1e-12 && rep.max_deviation_front <= 1e-12;
  return rep;
}

inline constexpr const char* kReportMagic = "DUOGLASS-REPORT";
inline constexpr int kReportVersion = 1;

inline std::string serialize_report(const SimulationReport& rep) {
  std::string out;
  out += kReportMagic;
  out += " v" + text::fmt(kReportVersion) + "\n";
  out += "panel " + rep.panel.stage + " " + text::fmt(rep.panel.pixel_cols) +
         " " + text::fmt(rep.panel.pixel_rows) + "\n";
  out += "timing " + text::fmt(rep.timing.frame_rate_hz) + " " +
         text::fmt(rep.timing.subframes_per_frame) + " " +
         text::fmt(rep.timing.drive_frequency_hz) + " " +
         text::fmt(rep.timing.settle_margin) + "\n";
  out += "sim " + text::fmt(rep.dt_ms) + " " +
         text::fmt(rep.calibration_cd_per_au) + "\n";
  out += "metric brightness_white_cd_m2 " +
         text::fmt(rep.metrics.brightness_white_cd_m2) + "\n";
  out += "metric panel_cr " + text::fmt(rep.metrics.panel_cr) + "\n";
  out += "metric crosstalk " + text::fmt(rep.metrics.crosstalk) + "\n";
  out += "metric transparency " + text::fmt(rep.metrics.transparency) + "\n";
  const char* side_name[2] = {"front", "back"};
  const char* ch_name[3] = {"R", "G", "B"};
  for (int side = 0; side < 2; ++side) {
    const SideLuminance& lum = side == 0 ? rep.front : rep.back;
    for (int ch = 0; ch < 3; ++ch) {
      out += "luminance ";
      out += side_name[side];
      out += ' ';
      out += ch_name[ch];
      for (double v : lum.channel[ch]) out += " " + text::fmt(v);
      out += "\n";
    }
  }
  out += "end\n";
  return out;
}

inline SimulationReport parse_report(std::string_view body) {
  detail::LineReader rd{body};
  std::vector<text::Token> t;
  if (!rd.next(t)) throw parse_error("empty stream: missing report header");
  if (t.size() != 2 || t[0].value != kReportMagic || t[1].value.size() < 2 ||
      t[1].value[0] != 'v')
    throw parse_error("malformed report header", rd.line_no);
  long long version = 0;
  if (!text::parse_int(t[1].value.substr(1), version) ||
      version != kReportVersion)
    throw parse_error("unsupported report version (this build reads version " +
                          text::fmt(kReportVersion) + ")",
                      rd.line_no);
  SimulationReport rep;
  if (!rd.next(t) || t[0].value != "panel" || t.size() != 4)
    throw parse_error("expected 'panel <stage> <cols> <rows>'", rd.line_no);
  rep.panel.stage = std::string(t[1].value);
  rep.panel.pixel_cols =
      static_cast<int>(detail::sched_int(t[2], rd.line_no, "pixel columns"));
  rep.panel.pixel_rows =
      static_cast<int>(detail::sched_int(t[3], rd.line_no, "pixel rows"));
  if (rep.panel.pixel_cols < 1 || rep.panel.pixel_rows < 1)
    throw parse_error("panel has no pixels", rd.line_no);
  if (!rd.next(t) || t[0].value != "timing" || t.size() != 5)
    throw parse_error("expected timing line", rd.line_no);
  rep.timing.frame_rate_hz = detail::sched_double(t[1], rd.line_no, "frame rate");
  rep.timing.subframes_per_frame =
      static_cast<int>(detail::sched_int(t[2], rd.line_no, "subframe count"));
  rep.timing.drive_frequency_hz =
      detail::sched_double(t[3], rd.line_no, "drive frequency");
  rep.timing.settle_margin =
      detail::sched_double(t[4], rd.line_no, "settle margin");
  if (!rd.next(t) || t[0].value != "sim" || t.size() != 3)
    throw parse_error("expected 'sim <dt_ms> <calibration>'", rd.line_no);
  rep.dt_ms = detail::sched_double(t[1], rd.line_no, "dt");
  rep.calibration_cd_per_au =
      detail::sched_double(t[2], rd.line_no, "calibration");

  std::size_t count = static_cast<std::size_t>(rep.panel.pixel_cols) *
                      rep.panel.pixel_rows;
  for (const char* name : {"brightness_white_cd_m2", "panel_cr", "crosstalk",
                           "transparency"}) {
    if (!rd.next(t) || t[0].value != "metric" || t.size() != 3 ||
        t[1].value != name)
      throw parse_error(std::string("expected 'metric ") + name + " <value>'",
                        rd.line_no);
    double v = detail::sched_double(t[2], rd.line_no, "metric value");
    if (t[1].value == "brightness_white_cd_m2")
      rep.metrics.brightness_white_cd_m2 = v;
    else if (t[1].value == "panel_cr") rep.metrics.panel_cr = v;
    else if (t[1].value == "crosstalk") rep.metrics.crosstalk = v;
    else rep.metrics.transparency = v;
  }
  for (int side = 0; side < 2; ++side) {
    SideLuminance& lum = side == 0 ? rep.front : rep.back;
    for (int ch = 0; ch < 3; ++ch) {
      const char* want_side = side == 0 ? "front" : "back";
      const char* want_ch = ch == 0 ? "R" : ch == 1 ? "G" : "B";
      if (!rd.next(t) || t[0].value != "luminance" || t.size() != 3 + count ||
          t[1].value != want_side || t[2].value != want_ch)
        throw parse_error(std::string("expected 'luminance ") + want_side +
                              " " + want_ch + "' with " + text::fmt(count) +
                              " values",
                          rd.line_no);
      lum.channel[ch].resize(count);
      for (std::size_t i = 0; i < count; ++i)
        lum.channel[ch][i] =
            detail::sched_double(t[3 + i], rd.line_no, "luminance value");
    }
  }
  if (!rd.next(t) || t[0].value != "end" || t.size() != 1)
    throw parse_error("missing 'end' line", rd.line_no);
  if (rd.next(t))
    throw parse_error("unexpected content after 'end'", rd.line_no);
  return rep;
}

}  // namespace duoglass
