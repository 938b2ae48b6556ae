#pragma once

#include <string>
#include <string_view>

#include "duoglass/electro_optics.hpp"
#include "duoglass/errors.hpp"
#include "duoglass/text.hpp"

// Reference materials. Datasheets quote i_min, i_max, the saturation voltage
// and the transition width; the logistic midpoint is not quoted directly, so
// it is solved here from the saturation pin and cached.

namespace duoglass {

// Midpoint v_mid such that the steady-state curve crosses the 90% swing
// level exactly at v_sat_target. The curve value at a fixed voltage falls
// monotonically as the midpoint moves right, so bisection converges.
inline double solve_v_mid(double i_min_au, double i_max_au, double v_width_v,
                          double v_sat_target_v) {
  if (!(v_sat_target_v > 0))
    throw validation_error("saturation voltage pin must be positive");
  if (!(i_max_au > i_min_au))
    throw validation_error("midpoint solve needs i_max above i_min");
  double level90 = i_min_au + 0.9 * (i_max_au - i_min_au);
  auto value_at_pin = [&](double v_mid) {
    MaterialResponse m;
    m.i_min_au = i_min_au;
    m.i_max_au = i_max_au;
    m.v_mid_v = v_mid;
    m.v_width_v = v_width_v;
    return steady_intensity(m, v_sat_target_v);
  };
  double lo = 1e-6, hi = v_sat_target_v;
  if (value_at_pin(hi) > level90)
    throw validation_error(
        "saturation pin unreachable: the curve stays above the 90% level "
        "for every midpoint up to the pin voltage");
  for (int i = 0; i < 200; ++i) {
    double mid = (lo + hi) / 2.0;
    if (value_at_pin(mid) > level90) lo = mid;
    else hi = mid;
  }
  return (lo + hi) / 2.0;
}

inline const MaterialResponse& hcm009() {
  static const MaterialResponse m = [] {
    MaterialResponse r;
    r.name = "HCM-009";
    r.i_min_au = 0.22;
    r.i_max_au = 5.28;
    r.v_width_v = 1.5;
    r.v_mid_v = solve_v_mid(r.i_min_au, r.i_max_au, r.v_width_v, 10.5);
    r.tau_on_ms = 1.0;
    r.tau_off_ms = 2.0;
    validate(r);
    return r;
  }();
  return m;
}

inline const MaterialResponse& rm257() {
  static const MaterialResponse m = [] {
    MaterialResponse r;
    r.name = "RM-257";
    r.i_min_au = 0.26;
    r.i_max_au = 4.10;
    r.v_width_v = 1.6;
    r.v_mid_v = solve_v_mid(r.i_min_au, r.i_max_au, r.v_width_v, 12.0);
    validate(r);
    return r;
  }();
  return m;
}

// Null when the name does not match a preset. Matching ignores case and an
// optional hyphen, so configs may write HCM-009 or hcm009.
inline const MaterialResponse* find_material_preset(std::string_view name) {
  if (text::iequals(name, "hcm-009") || text::iequals(name, "hcm009"))
    return &hcm009();
  if (text::iequals(name, "rm-257") || text::iequals(name, "rm257"))
    return &rm257();
  return nullptr;
}

inline const MaterialResponse& material_preset(std::string_view name) {
  if (const MaterialResponse* m = find_material_preset(name)) return *m;
  throw validation_error("unknown material preset '" + std::string(name) +
                         "' (known presets: HCM-009, RM-257)");
}

}  // namespace duoglass
