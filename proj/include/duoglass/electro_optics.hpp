#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "duoglass/errors.hpp"
#include "duoglass/text.hpp"

// Electro-optic response of the polymer-stabilized scattering layer.
//
// The steady-state curve is a logistic in drive voltage, rescaled so that the
// 0 V value is exactly i_min and the asymptote is i_max, then clamped to that
// range. Switching dynamics are first order with separate on/off time
// constants. Intensities are in arbitrary units (a.u.), voltages in volts RMS.

namespace duoglass {

struct MaterialResponse {
  std::string name;
  double i_min_au = 0.0;
  double i_max_au = 1.0;
  double v_mid_v = 5.0;
  double v_width_v = 1.0;
  // Switching time constants. Optional because fitted responses and sparsely
  // reported materials carry no dynamics; operations that need them throw.
  std::optional<double> tau_on_ms;
  std::optional<double> tau_off_ms;

  bool operator==(const MaterialResponse&) const = default;
};

inline void validate(const MaterialResponse& m) {
  if (!(m.i_min_au >= 0))
    throw validation_error("i_min_au must be non-negative");
  if (!(m.i_max_au > m.i_min_au))
    throw validation_error("i_max_au must exceed i_min_au");
  if (!(m.v_mid_v > 0) || !(m.v_width_v > 0))
    throw validation_error("v_mid_v and v_width_v must be positive");
  if ((m.tau_on_ms && !(*m.tau_on_ms > 0)) ||
      (m.tau_off_ms && !(*m.tau_off_ms > 0)))
    throw validation_error("time constants must be positive when present");
}

inline double require_tau_on(const MaterialResponse& m) {
  if (!m.tau_on_ms)
    throw validation_error("material '" + m.name + "' has no tau_on_ms");
  return *m.tau_on_ms;
}

inline double require_tau_off(const MaterialResponse& m) {
  if (!m.tau_off_ms)
    throw validation_error("material '" + m.name + "' has no tau_off_ms");
  return *m.tau_off_ms;
}

namespace detail {
inline double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Normalized response in [0, 1]: 0 at 0 V exactly, 1 at the asymptote.
inline double normalized_steady(double v, double v_mid, double v_width) {
  double s0 = logistic(-v_mid / v_width);
  double u = (logistic((v - v_mid) / v_width) - s0) / (1.0 - s0);
  return std::clamp(u, 0.0, 1.0);
}
}  // namespace detail

// Voltage treated as full saturation by the grayscale inverse.
inline double saturation_voltage_clamp(const MaterialResponse& m) {
  return m.v_mid_v + 20.0 * m.v_width_v;
}

inline double steady_intensity(const MaterialResponse& m, double v) {
  validate(m);
  if (!(v >= 0)) throw validation_error("drive voltage must be non-negative");
  return m.i_min_au + (m.i_max_au - m.i_min_au) *
                          detail::normalized_steady(v, m.v_mid_v, m.v_width_v);
}

// First-order relaxation from start_au toward target_au after t_ms. The on
// time constant applies when the level rises, the off one when it falls.
inline double step_response(const MaterialResponse& m, double start_au,
                            double target_au, double t_ms) {
  validate(m);
  if (!(t_ms >= 0)) throw validation_error("time must be non-negative");
  double tau = target_au > start_au ? require_tau_on(m) : require_tau_off(m);
  return target_au + (start_au - target_au) * std::exp(-t_ms / tau);
}

// Drive voltage that lands steady state at i_min + level * (i_max - i_min).
// level 0 maps to 0 V exactly; level 1 maps to the saturation clamp.
inline double grayscale_voltage(const MaterialResponse& m, double level) {
  validate(m);
  if (!(level >= 0.0) || !(level <= 1.0))
    throw validation_error("grayscale level must lie in [0, 1]");
  if (level == 0.0) return 0.0;
  double clamp_v = saturation_voltage_clamp(m);
  double s0 = detail::logistic(-m.v_mid_v / m.v_width_v);
  double q = s0 + level * (1.0 - s0);
  if (!(q < 1.0)) return clamp_v;
  double v = m.v_mid_v + m.v_width_v * std::log(q / (1.0 - q));
  return std::clamp(v, 0.0, clamp_v);
}

// A measured (or reconstructed) voltage sweep. Voltages strictly increase.
struct CurveSamples {
  std::vector<double> voltage_v;
  std::vector<double> intensity_au;

  bool operator==(const CurveSamples&) const = default;
};

inline void validate(const CurveSamples& c) {
  if (c.voltage_v.size() != c.intensity_au.size())
    throw validation_error("voltage and intensity columns differ in length");
  if (c.voltage_v.size() < 2)
    throw validation_error("a curve needs at least two samples");
  for (std::size_t i = 0; i < c.voltage_v.size(); ++i) {
    if (!std::isfinite(c.voltage_v[i]) || !std::isfinite(c.intensity_au[i]))
      throw validation_error("curve samples must be finite");
    if (!(c.intensity_au[i] >= 0))
      throw validation_error("intensities must be non-negative");
    if (i > 0 && !(c.voltage_v[i] > c.voltage_v[i - 1]))
      throw validation_error("voltages must be strictly increasing");
  }
}

struct CurveMetrics {
  double i_min_au = 0.0;
  double i_max_au = 0.0;
  double cr = 0.0;
  double v_sat_v = 0.0;

  bool operator==(const CurveMetrics&) const = default;
};

// Figures of merit of a sampled curve. CR is the max/min intensity ratio and
// V_sat the voltage where the curve first reaches 90% of its swing above the
// minimum, linearly interpolated between the bracketing samples.
inline CurveMetrics curve_metrics(const CurveSamples& c) {
  validate(c);
  CurveMetrics out;
  out.i_min_au = *std::min_element(c.intensity_au.begin(), c.intensity_au.end());
  out.i_max_au = *std::max_element(c.intensity_au.begin(), c.intensity_au.end());
  if (out.i_max_au == out.i_min_au)
    throw validation_error(
        "saturation voltage undefined: curve is flat (no intensity swing)");
  if (out.i_min_au == 0.0)
    throw validation_error(
        "contrast ratio undefined: off-state intensity is zero");
  out.cr = out.i_max_au / out.i_min_au;
  double threshold = out.i_min_au + 0.9 * (out.i_max_au - out.i_min_au);
  for (std::size_t i = 0; i < c.intensity_au.size(); ++i) {
    if (c.intensity_au[i] >= threshold) {
      if (i == 0) {
        out.v_sat_v = c.voltage_v[0];
      } else {
        double y0 = c.intensity_au[i - 1], y1 = c.intensity_au[i];
        double x0 = c.voltage_v[i - 1], x1 = c.voltage_v[i];
        out.v_sat_v = x0 + (threshold - y0) * (x1 - x0) / (y1 - y0);
      }
      return out;
    }
  }
  // Unreachable: the maximum sample itself is at or above the threshold.
  throw validation_error("saturation voltage not found");
}

inline constexpr const char* kCurveCsvHeader = "voltage_v,intensity_au";

inline std::string write_curve_csv(const CurveSamples& c) {
  validate(c);
  std::string out = kCurveCsvHeader;
  out += '\n';
  for (std::size_t i = 0; i < c.voltage_v.size(); ++i) {
    out += text::fmt(c.voltage_v[i]);
    out += ',';
    out += text::fmt(c.intensity_au[i]);
    out += '\n';
  }
  return out;
}

inline CurveSamples parse_curve_csv(std::string_view body) {
  CurveSamples c;
  std::size_t pos = 0, line_no = 0;
  bool saw_header = false;
  while (pos <= body.size()) {
    std::size_t eol = body.find('\n', pos);
    std::string_view line = body.substr(
        pos, eol == std::string_view::npos ? body.size() - pos : eol - pos);
    pos = eol == std::string_view::npos ? body.size() + 1 : eol + 1;
    ++line_no;
    std::string_view trimmed = text::trim(line);
    if (trimmed.empty()) continue;
    if (!saw_header) {
      if (trimmed != kCurveCsvHeader)
        throw parse_error("expected header '" + std::string(kCurveCsvHeader) +
                              "', got '" + std::string(trimmed) + "'",
                          line_no);
      saw_header = true;
      continue;
    }
    std::size_t comma = trimmed.find(',');
    if (comma == std::string_view::npos)
      throw parse_error("expected 'voltage,intensity'", line_no);
    double v = 0, i = 0;
    if (!text::parse_double(text::trim(trimmed.substr(0, comma)), v))
      throw parse_error("bad voltage value", line_no, 1);
    if (!text::parse_double(text::trim(trimmed.substr(comma + 1)), i))
      throw parse_error("bad intensity value", line_no, comma + 2);
    c.voltage_v.push_back(v);
    c.intensity_au.push_back(i);
  }
  if (!saw_header) throw parse_error("empty curve file", 1);
  validate(c);
  return c;
}

// Synthesize a sweep of the steady-state curve on a regular voltage grid.
inline CurveSamples sample_curve(const MaterialResponse& m,
                                 double v_max_v = 20.0,
                                 double step_v = 0.25) {
  validate(m);
  if (!(step_v > 0) || !(v_max_v > 0))
    throw validation_error("sampling grid must be positive");
  CurveSamples c;
  int steps = static_cast<int>(std::floor(v_max_v / step_v + 1e-9));
  for (int k = 0; k <= steps; ++k) {
    double v = k * step_v;
    c.voltage_v.push_back(v);
    c.intensity_au.push_back(steady_intensity(m, v));
  }
  return c;
}

struct FitResult {
  MaterialResponse response;  // tau fields stay unset
  double residual = 0.0;      // root mean square over the samples
  std::size_t iterations = 0;
  bool converged = false;
  bool width_at_bound = false;
  // Cost after every accepted step, non-increasing by construction.
  std::vector<double> residual_history;
};

// Thrown when the iteration cap is hit; carries the best estimate so far.
class fit_error : public error {
 public:
  fit_error(const std::string& what_arg, FitResult best)
      : error(what_arg), best_(std::move(best)) {}
  const FitResult& best() const noexcept { return best_; }

 private:
  FitResult best_;
};

namespace detail {

inline double fit_model(const std::array<double, 4>& p, double v) {
  // p = { i_min, i_max, v_mid, v_width }
  return p[0] + (p[1] - p[0]) * normalized_steady(v, p[2], p[3]);
}

inline double fit_cost(const std::array<double, 4>& p,
                       const CurveSamples& c) {
  double sum = 0.0;
  for (std::size_t i = 0; i < c.voltage_v.size(); ++i) {
    double r = fit_model(p, c.voltage_v[i]) - c.intensity_au[i];
    sum += r * r;
  }
  return sum;
}

// Solves the 4x4 system a * x = b in place; returns false when singular.
inline bool solve4(std::array<std::array<double, 4>, 4>& a,
                   std::array<double, 4>& b, std::array<double, 4>& x) {
  for (int col = 0; col < 4; ++col) {
    int pivot = col;
    for (int r = col + 1; r < 4; ++r)
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    if (std::abs(a[pivot][col]) < 1e-300) return false;
    std::swap(a[col], a[pivot]);
    std::swap(b[col], b[pivot]);
    for (int r = col + 1; r < 4; ++r) {
      double f = a[r][col] / a[col][col];
      for (int k = col; k < 4; ++k) a[r][k] -= f * a[col][k];
      b[r] -= f * b[col];
    }
  }
  for (int r = 3; r >= 0; --r) {
    double s = b[r];
    for (int k = r + 1; k < 4; ++k) s -= a[r][k] * x[k];
    x[r] = s / a[r][r];
  }
  return true;
}

inline double interp_crossing(const CurveSamples& c, double target) {
  for (std::size_t i = 1; i < c.intensity_au.size(); ++i) {
    double y0 = c.intensity_au[i - 1], y1 = c.intensity_au[i];
    if ((y0 <= target && y1 >= target) && y1 > y0)
      return c.voltage_v[i - 1] +
             (target - y0) * (c.voltage_v[i] - c.voltage_v[i - 1]) / (y1 - y0);
  }
  return (c.voltage_v.front() + c.voltage_v.back()) / 2.0;
}

}  // namespace detail

inline constexpr double kFitWidthFloor = 1e-6;
inline constexpr std::size_t kFitIterationCap = 200;

// Levenberg-Marquardt fit of the four steady-state parameters. Throws
// validation_error below four samples and fit_error at the iteration cap.
inline FitResult fit_response(const CurveSamples& c,
                              std::size_t max_iterations = kFitIterationCap) {
  validate(c);
  if (c.voltage_v.size() < 4)
    throw validation_error(
        "fit underdetermined: four parameters need at least four samples");

  double y_lo = *std::min_element(c.intensity_au.begin(), c.intensity_au.end());
  double y_hi = *std::max_element(c.intensity_au.begin(), c.intensity_au.end());
  double swing = y_hi - y_lo;
  std::array<double, 4> p{
      y_lo,
      y_hi,
      detail::interp_crossing(c, y_lo + 0.5 * swing),
      std::max((detail::interp_crossing(c, y_lo + 0.75 * swing) -
                detail::interp_crossing(c, y_lo + 0.25 * swing)) /
                   2.197,
               (c.voltage_v.back() - c.voltage_v.front()) / 50.0)};
  if (!(p[2] > 0)) p[2] = (c.voltage_v.front() + c.voltage_v.back()) / 2.0;
  if (!(p[3] > 0)) p[3] = (c.voltage_v.back() - c.voltage_v.front()) / 10.0;

  const std::size_t n = c.voltage_v.size();
  double cost = detail::fit_cost(p, c);
  double lambda = 1e-3;
  FitResult result;
  result.residual_history.push_back(cost);

  std::size_t iter = 0;
  int stall = 0;
  for (; iter < max_iterations; ++iter) {
    // Numeric Jacobian by central differences.
    std::vector<std::array<double, 4>> jac(n);
    for (int k = 0; k < 4; ++k) {
      double h = std::max(1e-7, 1e-7 * std::abs(p[k]));
      auto pp = p, pm = p;
      pp[k] += h;
      pm[k] -= h;
      if (k == 3) pm[k] = std::max(pm[k], kFitWidthFloor);
      for (std::size_t i = 0; i < n; ++i)
        jac[i][k] = (detail::fit_model(pp, c.voltage_v[i]) -
                     detail::fit_model(pm, c.voltage_v[i])) /
                    (pp[k] - pm[k]);
    }
    std::array<double, 4> grad{};
    std::array<std::array<double, 4>, 4> jtj{};
    for (std::size_t i = 0; i < n; ++i) {
      double r = detail::fit_model(p, c.voltage_v[i]) - c.intensity_au[i];
      for (int a = 0; a < 4; ++a) {
        grad[a] += jac[i][a] * r;
        for (int b = 0; b < 4; ++b) jtj[a][b] += jac[i][a] * jac[i][b];
      }
    }

    bool accepted = false;
    for (int attempt = 0; attempt < 10 && !accepted; ++attempt) {
      auto a = jtj;
      for (int k = 0; k < 4; ++k)
        a[k][k] += lambda * std::max(jtj[k][k], 1e-12);
      std::array<double, 4> rhs{-grad[0], -grad[1], -grad[2], -grad[3]};
      std::array<double, 4> delta{};
      if (!detail::solve4(a, rhs, delta)) {
        lambda *= 10.0;
        continue;
      }
      std::array<double, 4> cand{p[0] + delta[0], p[1] + delta[1],
                                 p[2] + delta[2], p[3] + delta[3]};
      if (cand[3] < kFitWidthFloor) cand[3] = kFitWidthFloor;
      double cand_cost = detail::fit_cost(cand, c);
      if (cand_cost <= cost) {
        double improvement = cost - cand_cost;
        p = cand;
        cost = cand_cost;
        lambda = std::max(lambda * 0.4, 1e-12);
        accepted = true;
        result.residual_history.push_back(cost);
        if (improvement <= 1e-14 * std::max(1.0, cost)) ++stall;
        else stall = 0;
      } else {
        lambda *= 10.0;
      }
    }
    if (!accepted) ++stall;
    if (stall >= 3) {
      result.converged = true;
      ++iter;
      break;
    }
  }

  result.iterations = iter;
  result.width_at_bound = p[3] <= kFitWidthFloor * 2.0;
  result.residual = std::sqrt(cost / static_cast<double>(n));
  result.response.name = "fitted";
  result.response.i_min_au = p[0];
  result.response.i_max_au = p[1];
  result.response.v_mid_v = p[2];
  result.response.v_width_v = p[3];
  if (!result.converged)
    throw fit_error("fit did not converge within " +
                        text::fmt(max_iterations) + " iterations",
                    result);
  if (p[1] - p[0] <= 1e-12 * std::max(1.0, std::abs(p[1]))) {
    result.converged = false;
    throw fit_error("fit degenerate: samples carry no intensity swing", result);
  }
  return result;
}

}  // namespace duoglass
