#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "duoglass/electro_optics.hpp"
#include "duoglass/errors.hpp"
#include "duoglass/image.hpp"
#include "duoglass/panel.hpp"
#include "duoglass/text.hpp"

// Time-sequential drive compilation. A frame is divided into six sub-frame
// slots in the fixed order R_A, R_B, G_A, G_B, B_A, B_B. Within a slot the
// electrode set of one side carries an AC square wave whose RMS amplitude
// encodes the grayscale; the drive is truncated to a whole number of polarity
// cycles (DC balance) and the slot remainder idles at 0 V.

namespace duoglass {

enum class Color { r, g, b };

inline char color_letter(Color c) {
  switch (c) {
    case Color::r: return 'R';
    case Color::g: return 'G';
    default: return 'B';
  }
}

struct TimingConfig {
  double frame_rate_hz = 60.0;
  int subframes_per_frame = 6;
  double drive_frequency_hz = 1000.0;
  // Safety factor k in the settling bound d >= k * (tau_on + tau_off).
  double settle_margin = 1.0;

  bool operator==(const TimingConfig&) const = default;
};

inline void validate(const TimingConfig& t) {
  if (!(t.frame_rate_hz > 0))
    throw validation_error("frame_rate_hz must be positive");
  if (t.subframes_per_frame < 1)
    throw validation_error("subframes_per_frame must be at least 1");
  if (!(t.drive_frequency_hz > 0))
    throw validation_error("drive_frequency_hz must be positive");
  if (!(t.settle_margin >= 0))
    throw validation_error("settle_margin must be non-negative");
  if (t.drive_frequency_hz <
      2.0 * t.frame_rate_hz * t.subframes_per_frame)
    throw validation_error(
        "drive_frequency_hz must be at least twice frame_rate_hz times "
        "subframes_per_frame");
}

inline double frame_period_ms(const TimingConfig& t) {
  return 1000.0 / t.frame_rate_hz;
}

struct FramePair {
  Image front;
  Image back;

  bool operator==(const FramePair&) const = default;
};

inline void validate(const FramePair& f, const PanelSpec& spec) {
  if (f.front.width != spec.pixel_cols || f.front.height != spec.pixel_rows)
    throw validation_error(
        "front image is " + text::fmt(f.front.width) + "x" +
        text::fmt(f.front.height) + " but the panel has " +
        text::fmt(spec.pixel_cols) + "x" + text::fmt(spec.pixel_rows) +
        " pixels");
  if (f.back.width != spec.pixel_cols || f.back.height != spec.pixel_rows)
    throw validation_error(
        "back image is " + text::fmt(f.back.width) + "x" +
        text::fmt(f.back.height) + " but the panel has " +
        text::fmt(spec.pixel_cols) + "x" + text::fmt(spec.pixel_rows) +
        " pixels");
}

struct ElectrodeAmplitude {
  ElectrodeId electrode = 0;
  double volts = 0.0;

  bool operator==(const ElectrodeAmplitude&) const = default;
};

struct SubFrame {
  Color color = Color::r;
  Side side = Side::a;
  double duration_ms = 0.0;
  // Whole AC cycles in the active window; stored as a double so that invalid
  // hand-built schedules are representable and validate_schedule can report
  // them as data.
  double polarity_cycles = 0.0;
  std::vector<ElectrodeAmplitude> amplitudes;  // sorted by electrode id

  bool operator==(const SubFrame&) const = default;
};

inline double active_ms(const SubFrame& sf, const TimingConfig& t) {
  return sf.polarity_cycles * 1000.0 / t.drive_frequency_hz;
}

struct DriveSchedule {
  int format_version = 1;
  PanelRef panel;
  TimingConfig timing;
  std::vector<SubFrame> subframes;

  bool operator==(const DriveSchedule&) const = default;
};

// Settling feasibility of the sub-frame slot length against the material
// switching times: d = 1 / (frame_rate * subframes) >= k * (tau_on + tau_off).
struct FeasibilityReport {
  double subframe_ms = 0.0;
  double required_ms = 0.0;
  double margin_ratio = 0.0;
  bool feasible = false;
};

inline FeasibilityReport check_feasibility(const TimingConfig& t,
                                           const MaterialResponse& m) {
  validate(t);
  validate(m);
  FeasibilityReport r;
  r.subframe_ms = frame_period_ms(t) / t.subframes_per_frame;
  r.required_ms = t.settle_margin * (require_tau_on(m) + require_tau_off(m));
  r.margin_ratio = r.required_ms > 0
                       ? r.subframe_ms / r.required_ms
                       : std::numeric_limits<double>::infinity();
  r.feasible = r.subframe_ms >= r.required_ms;
  return r;
}

inline DriveSchedule compile_schedule(const FramePair& frames,
                                      const PanelSpec& spec,
                                      const MaterialResponse& m,
                                      const TimingConfig& timing = {}) {
  validate(spec);
  validate(m);
  validate(timing);
  validate(frames, spec);
  if (timing.subframes_per_frame != 6)
    throw unsupported_error(
        "only the six-sub-frame R_A,R_B,G_A,G_B,B_A,B_B sequence is "
        "implemented");
  ElectrodeMap emap = electrode_map(spec);

  double slot_ms = frame_period_ms(timing) / timing.subframes_per_frame;
  double cycles =
      std::floor(slot_ms * timing.drive_frequency_hz / 1000.0 + 1e-9);
  if (cycles < 1.0)
    throw validation_error(
        "sub-frame slot of " + text::fmt(slot_ms) +
        " ms is shorter than one full polarity cycle at " +
        text::fmt(timing.drive_frequency_hz) + " Hz");

  DriveSchedule s;
  s.panel = panel_ref(spec);
  s.timing = timing;
  for (Color color : {Color::r, Color::g, Color::b}) {
    for (Side side : {Side::a, Side::b}) {
      SubFrame sf;
      sf.color = color;
      sf.side = side;
      sf.duration_ms = slot_ms;
      sf.polarity_cycles = cycles;
      const Image& img = side == Side::a ? frames.front : frames.back;
      int channel = color == Color::r ? 0 : color == Color::g ? 1 : 2;
      sf.amplitudes.reserve(static_cast<std::size_t>(emap.pixel_count()));
      for (int row = 0; row < spec.pixel_rows; ++row)
        for (int col = 0; col < spec.pixel_cols; ++col)
          sf.amplitudes.push_back(ElectrodeAmplitude{
              emap.id(side, col, row),
              grayscale_voltage(m, img.level(col, row, channel))});
      s.subframes.push_back(std::move(sf));
    }
  }
  return s;
}

// A detected violation; validate_schedule reports problems as data instead of
// throwing so that callers can list every defect of a hand-built schedule.
struct Violation {
  std::string code;
  std::string message;
  int subframe = -1;  // -1 when the violation is schedule-wide
};

inline std::vector<Violation> validate_schedule(const DriveSchedule& s) {
  std::vector<Violation> out;
  if (s.format_version != 1)
    out.push_back({"format-version",
                   "format_version " + text::fmt(s.format_version) +
                       " is not 1",
                   -1});
  try {
    validate(s.timing);
  } catch (const validation_error& e) {
    out.push_back({"timing", e.what(), -1});
  }
  if (s.panel.pixel_cols < 1 || s.panel.pixel_rows < 1) {
    out.push_back({"panel", "panel reference has no pixels", -1});
    return out;
  }
  int n = s.panel.pixel_cols * s.panel.pixel_rows;

  double total_ms = 0.0;
  for (std::size_t i = 0; i < s.subframes.size(); ++i) {
    const SubFrame& sf = s.subframes[i];
    int idx = static_cast<int>(i);
    if (!(sf.duration_ms > 0))
      out.push_back({"duration", "sub-frame duration must be positive", idx});
    total_ms += sf.duration_ms;

    double rounded = std::round(sf.polarity_cycles);
    if (!(sf.polarity_cycles >= 1.0) ||
        std::abs(sf.polarity_cycles - rounded) > 1e-9)
      out.push_back({"dc-balance",
                     "polarity_cycles " + text::fmt(sf.polarity_cycles) +
                         " is not a positive whole number of AC cycles",
                     idx});
    if (s.timing.drive_frequency_hz > 0 &&
        active_ms(sf, s.timing) > sf.duration_ms + 1e-9)
      out.push_back({"active-window",
                     "active drive exceeds the sub-frame slot", idx});

    for (const ElectrodeAmplitude& ea : sf.amplitudes) {
      bool is_a = ea.electrode >= 0 && ea.electrode < n;
      bool is_b = ea.electrode >= n && ea.electrode < 2 * n;
      if (!is_a && !is_b) {
        out.push_back({"electrode-range",
                       "electrode id " + text::fmt(ea.electrode) +
                           " does not address a pixel",
                       idx});
      } else if ((sf.side == Side::a) != is_a) {
        out.push_back({"side-mixing",
                       "electrode id " + text::fmt(ea.electrode) +
                           " belongs to the other side",
                       idx});
      }
      if (!(ea.volts >= 0) || !std::isfinite(ea.volts))
        out.push_back({"amplitude",
                       "amplitude must be a finite non-negative RMS voltage",
                       idx});
    }
  }
  if (s.timing.frame_rate_hz > 0) {
    double frame_ms = frame_period_ms(s.timing);
    if (std::abs(total_ms - frame_ms) > 1e-6)
      out.push_back({"frame-period",
                     "sub-frame durations sum to " + text::fmt(total_ms) +
                         " ms, frame period is " + text::fmt(frame_ms) + " ms",
                     -1});
  }
  return out;
}

inline constexpr const char* kScheduleMagic = "DUOGLASS-SCHEDULE";
inline constexpr int kScheduleVersion = 1;

inline std::string serialize_schedule(const DriveSchedule& s) {
  std::string out;
  out += kScheduleMagic;
  out += " v" + text::fmt(s.format_version) + "\n";
  out += "panel " + s.panel.stage + " " + text::fmt(s.panel.pixel_cols) + " " +
         text::fmt(s.panel.pixel_rows) + "\n";
  out += "timing " + text::fmt(s.timing.frame_rate_hz) + " " +
         text::fmt(s.timing.subframes_per_frame) + " " +
         text::fmt(s.timing.drive_frequency_hz) + " " +
         text::fmt(s.timing.settle_margin) + "\n";
  for (const SubFrame& sf : s.subframes) {
    out += "subframe ";
    out += color_letter(sf.color);
    out += ' ';
    out += side_letter(sf.side);
    out += ' ';
    out += text::fmt(sf.duration_ms) + " " + text::fmt(sf.polarity_cycles) +
           " " + text::fmt(sf.amplitudes.size()) + "\n";
    for (const ElectrodeAmplitude& ea : sf.amplitudes)
      out += "amp " + text::fmt(ea.electrode) + " " + text::fmt(ea.volts) +
             "\n";
  }
  out += "end\n";
  return out;
}

namespace detail {

struct LineReader {
  std::string_view body;
  std::size_t pos = 0;
  std::size_t line_no = 0;

  // Returns false at end of input; skips blank lines.
  bool next(std::vector<text::Token>& tokens) {
    while (pos <= body.size()) {
      if (pos == body.size()) {
        ++pos;
        return false;
      }
      std::size_t eol = body.find('\n', pos);
      std::string_view line = body.substr(
          pos, eol == std::string_view::npos ? body.size() - pos : eol - pos);
      pos = eol == std::string_view::npos ? body.size() : eol + 1;
      ++line_no;
      tokens = text::tokenize(line);
      if (!tokens.empty()) return true;
    }
    return false;
  }
};

inline double sched_double(const text::Token& tok, std::size_t line,
                           const char* what) {
  double v = 0;
  if (!text::parse_double(tok.value, v))
    throw parse_error(std::string("bad ") + what + " '" +
                          std::string(tok.value) + "'",
                      line, tok.column);
  return v;
}

inline long long sched_int(const text::Token& tok, std::size_t line,
                           const char* what) {
  long long v = 0;
  if (!text::parse_int(tok.value, v))
    throw parse_error(std::string("bad ") + what + " '" +
                          std::string(tok.value) + "'",
                      line, tok.column);
  return v;
}

}  // namespace detail

inline DriveSchedule parse_schedule(std::string_view body) {
  detail::LineReader rd{body};
  std::vector<text::Token> t;
  if (!rd.next(t)) throw parse_error("empty stream: missing schedule header");
  if (t.size() != 2 || t[0].value != kScheduleMagic ||
      t[1].value.size() < 2 || t[1].value[0] != 'v')
    throw parse_error("malformed schedule header", rd.line_no,
                      t.empty() ? 1 : t[0].column);
  long long version = 0;
  if (!text::parse_int(t[1].value.substr(1), version))
    throw parse_error("malformed schedule version token", rd.line_no,
                      t[1].column);
  if (version != kScheduleVersion)
    throw parse_error("unsupported schedule format version " +
                          text::fmt(version) + " (this build reads version " +
                          text::fmt(kScheduleVersion) + ")",
                      rd.line_no, t[1].column);

  DriveSchedule s;
  s.format_version = static_cast<int>(version);

  if (!rd.next(t) || t[0].value != "panel" || t.size() != 4)
    throw parse_error("expected 'panel <stage> <cols> <rows>'", rd.line_no);
  s.panel.stage = std::string(t[1].value);
  s.panel.pixel_cols =
      static_cast<int>(detail::sched_int(t[2], rd.line_no, "pixel columns"));
  s.panel.pixel_rows =
      static_cast<int>(detail::sched_int(t[3], rd.line_no, "pixel rows"));

  if (!rd.next(t) || t[0].value != "timing" || t.size() != 5)
    throw parse_error(
        "expected 'timing <frame_rate> <subframes> <drive_freq> <margin>'",
        rd.line_no);
  s.timing.frame_rate_hz = detail::sched_double(t[1], rd.line_no, "frame rate");
  s.timing.subframes_per_frame =
      static_cast<int>(detail::sched_int(t[2], rd.line_no, "subframe count"));
  s.timing.drive_frequency_hz =
      detail::sched_double(t[3], rd.line_no, "drive frequency");
  s.timing.settle_margin =
      detail::sched_double(t[4], rd.line_no, "settle margin");

  bool saw_end = false;
  while (rd.next(t)) {
    if (t[0].value == "end") {
      if (t.size() != 1)
        throw parse_error("unexpected tokens after 'end'", rd.line_no,
                          t[1].column);
      saw_end = true;
      break;
    }
    if (t[0].value == "subframe") {
      if (t.size() != 6)
        throw parse_error(
            "expected 'subframe <color> <side> <duration_ms> <cycles> "
            "<amplitude count>'",
            rd.line_no);
      SubFrame sf;
      if (t[1].value == "R") sf.color = Color::r;
      else if (t[1].value == "G") sf.color = Color::g;
      else if (t[1].value == "B") sf.color = Color::b;
      else
        throw parse_error("bad color '" + std::string(t[1].value) + "'",
                          rd.line_no, t[1].column);
      if (t[2].value == "A") sf.side = Side::a;
      else if (t[2].value == "B") sf.side = Side::b;
      else
        throw parse_error("bad side '" + std::string(t[2].value) + "'",
                          rd.line_no, t[2].column);
      sf.duration_ms = detail::sched_double(t[3], rd.line_no, "duration");
      sf.polarity_cycles =
          detail::sched_double(t[4], rd.line_no, "polarity cycles");
      long long count = detail::sched_int(t[5], rd.line_no, "amplitude count");
      if (count < 0 || count > 10'000'000)
        throw parse_error("amplitude count out of range", rd.line_no,
                          t[5].column);
      sf.amplitudes.reserve(static_cast<std::size_t>(count));
      for (long long i = 0; i < count; ++i) {
        if (!rd.next(t) || t[0].value != "amp" || t.size() != 3)
          throw parse_error("expected 'amp <electrode> <volts>'", rd.line_no);
        ElectrodeAmplitude ea;
        ea.electrode = static_cast<ElectrodeId>(
            detail::sched_int(t[1], rd.line_no, "electrode id"));
        ea.volts = detail::sched_double(t[2], rd.line_no, "amplitude");
        sf.amplitudes.push_back(ea);
      }
      s.subframes.push_back(std::move(sf));
      continue;
    }
    throw parse_error("unexpected directive '" + std::string(t[0].value) + "'",
                      rd.line_no, t[0].column);
  }
  if (!saw_end) throw parse_error("missing 'end' line", rd.line_no);
  if (rd.next(t))
    throw parse_error("unexpected content after 'end'", rd.line_no,
                      t[0].column);
  return s;
}

}  // namespace duoglass
