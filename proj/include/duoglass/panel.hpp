#pragma once

#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "duoglass/errors.hpp"
#include "duoglass/text.hpp"

// Panel geometry: pixel grid, unit-cell layout, black-mask area accounting,
// electrode addressing and the see-through budget.
//
// Coordinate convention: x grows to the right, y grows downward, origin at
// the top-left panel corner, lengths in micrometres. Side A faces the front
// viewer, side B the back viewer. Inside every unit cell the A sub-pixel sits
// in the left half and the B sub-pixel in the right half; the opaque mask that
// blocks a sub-pixel's stray emission sits on the opposite substrate, centered
// on that sub-pixel.

namespace duoglass {

inline constexpr double kMicronsPerInch = 25400.0;

enum class Stage { stage1, stage2, stage3, custom };
enum class Side { a, b };

inline const char* to_string(Stage s) {
  switch (s) {
    case Stage::stage1: return "stage1";
    case Stage::stage2: return "stage2";
    case Stage::stage3: return "stage3";
    default: return "custom";
  }
}

inline Stage stage_from_string(std::string_view name) {
  if (name == "stage1") return Stage::stage1;
  if (name == "stage2") return Stage::stage2;
  if (name == "stage3") return Stage::stage3;
  if (name == "custom") return Stage::custom;
  throw validation_error("unknown stage '" + std::string(name) +
                         "' (expected stage1, stage2, stage3 or custom)");
}

inline char side_letter(Side s) { return s == Side::a ? 'A' : 'B'; }

struct PanelSpec {
  Stage stage = Stage::custom;
  int pixel_cols = 1;
  int pixel_rows = 1;
  // Sub-pixels per pixel edge and per side; a pixel holds this value squared
  // unit cells, each carrying one A and one B sub-pixel.
  int subpixels_per_pixel_side = 31;
  double subpixel_pitch_um = 90.0;
  double panel_width_in = 2.0;
  double panel_height_in = 2.0;
  double cell_gap_um = 3.0;
  // Opaque mask area per unit cell as a fraction of the cell area, split
  // equally between the two mask pads. Authoritative for the loss budget.
  double mask_fraction = 0.18;
  // Stage-1 striped electrode geometry; ignored by the other stages.
  double stripe_active_um = 25.0;
  double stripe_inactive_um = 250.0;

  bool operator==(const PanelSpec&) const = default;
};

inline PanelSpec panel_preset(std::string_view name) {
  if (name == "stage1") {
    PanelSpec s;
    s.stage = Stage::stage1;
    s.pixel_cols = s.pixel_rows = 1;
    s.subpixels_per_pixel_side = 1;
    s.panel_width_in = s.panel_height_in = 1.0;
    s.cell_gap_um = 2.0;
    s.mask_fraction = 0.0;
    return s;
  }
  if (name == "stage2") {
    PanelSpec s;
    s.stage = Stage::stage2;
    s.pixel_cols = s.pixel_rows = 4;
    s.panel_width_in = s.panel_height_in = 2.0;
    return s;
  }
  if (name == "stage3") {
    PanelSpec s;
    s.stage = Stage::stage3;
    s.pixel_cols = s.pixel_rows = 10;
    s.panel_width_in = s.panel_height_in = 4.5;
    return s;
  }
  throw validation_error("unknown panel preset '" + std::string(name) +
                         "' (known: stage1, stage2, stage3)");
}

struct CellDims {
  double width_um;
  double height_um;
};

inline CellDims cell_dims(const PanelSpec& s) {
  double n = static_cast<double>(s.subpixels_per_pixel_side);
  return CellDims{
      s.panel_width_in * kMicronsPerInch / (s.pixel_cols * n),
      s.panel_height_in * kMicronsPerInch / (s.pixel_rows * n),
  };
}

inline void validate(const PanelSpec& s) {
  if (s.pixel_cols < 1 || s.pixel_rows < 1)
    throw validation_error("panel needs at least one pixel in each direction");
  if (s.subpixels_per_pixel_side < 1)
    throw validation_error("subpixels_per_pixel_side must be at least 1");
  if (!(s.panel_width_in > 0) || !(s.panel_height_in > 0))
    throw validation_error("panel dimensions must be positive");
  if (!(s.subpixel_pitch_um > 0))
    throw validation_error("subpixel_pitch_um must be positive");
  if (!(s.cell_gap_um > 0))
    throw validation_error("cell_gap_um must be positive");
  if (!(s.mask_fraction >= 0.0) || s.mask_fraction > 1.0)
    throw validation_error("mask_fraction must lie in [0, 1]");
  if (s.stage == Stage::stage1) {
    if (s.pixel_cols != 1 || s.pixel_rows != 1)
      throw validation_error("a stage1 panel has exactly one logical pixel");
    if (!(s.stripe_active_um > 0) || !(s.stripe_inactive_um >= 0))
      throw validation_error("stage1 stripe widths must be positive");
    if (s.mask_fraction != 0.0)
      throw validation_error("stage1 panels carry no masks");
    return;
  }
  CellDims cd = cell_dims(s);
  if (s.subpixel_pitch_um > cd.width_um / 2.0 ||
      s.subpixel_pitch_um > cd.height_um)
    throw validation_error(
        "sub-pixel square does not fit its unit-cell half (pitch " +
        text::fmt(s.subpixel_pitch_um) + " um, cell " + text::fmt(cd.width_um) +
        " x " + text::fmt(cd.height_um) + " um)");
  double pad = std::sqrt(s.mask_fraction / 2.0 * cd.width_um * cd.height_um);
  if (pad > cd.width_um / 2.0 || pad > cd.height_um)
    throw validation_error("mask pad does not fit its unit-cell half");
}

// Area partition of one unit cell. The first three fractions sum to one;
// frac_mask is the projected opaque area and overlays the sub-pixel regions.
struct UnitCellSpec {
  double frac_subpixel_a = 0.0;
  double frac_subpixel_b = 0.0;
  double frac_transparent = 1.0;
  double frac_mask = 0.0;

  bool operator==(const UnitCellSpec&) const = default;
};

inline void validate(const UnitCellSpec& u) {
  if (!(u.frac_subpixel_a >= 0) || !(u.frac_subpixel_b >= 0) ||
      !(u.frac_transparent >= 0) || !(u.frac_mask >= 0) || u.frac_mask > 1.0)
    throw validation_error("unit-cell fractions must be non-negative");
  double sum = u.frac_subpixel_a + u.frac_subpixel_b + u.frac_transparent;
  if (std::abs(sum - 1.0) > 1e-12)
    throw validation_error("unit-cell fractions must sum to 1 (got " +
                           text::fmt(sum) + ")");
}

inline UnitCellSpec unit_cell(const PanelSpec& s) {
  validate(s);
  UnitCellSpec u;
  if (s.stage == Stage::stage1) {
    // The active stripe scatters toward both faces; book half of its area to
    // each side so the A/B accounting stays symmetric.
    double period = s.stripe_active_um + s.stripe_inactive_um;
    u.frac_subpixel_a = u.frac_subpixel_b = s.stripe_active_um / (2.0 * period);
    u.frac_transparent = s.stripe_inactive_um / period;
    u.frac_mask = 0.0;
    return u;
  }
  CellDims cd = cell_dims(s);
  double cell_area = cd.width_um * cd.height_um;
  double sub_area = s.subpixel_pitch_um * s.subpixel_pitch_um;
  u.frac_subpixel_a = u.frac_subpixel_b = sub_area / cell_area;
  u.frac_transparent = 1.0 - u.frac_subpixel_a - u.frac_subpixel_b;
  u.frac_mask = s.mask_fraction;
  validate(u);
  return u;
}

struct Rect {
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;
  double area() const { return (x1 - x0) * (y1 - y0); }
};

struct UnitCellRects {
  Rect subpixel_a;
  Rect subpixel_b;
  std::vector<Rect> masks;
};

namespace detail {
inline Rect centered_square(double cx, double cy, double side) {
  return Rect{cx - side / 2.0, cy - side / 2.0, cx + side / 2.0,
              cy + side / 2.0};
}
}  // namespace detail

// Concrete rectangles of one unit cell, in panel coordinates. pixel_* index
// the pixel grid, cell_* the unit-cell grid inside the pixel.
inline UnitCellRects unit_cell_rects(const PanelSpec& s, int pixel_col,
                                     int pixel_row, int cell_col,
                                     int cell_row) {
  validate(s);
  if (pixel_col < 0 || pixel_col >= s.pixel_cols || pixel_row < 0 ||
      pixel_row >= s.pixel_rows)
    throw validation_error("pixel index out of range");
  int n = s.subpixels_per_pixel_side;
  if (cell_col < 0 || cell_col >= n || cell_row < 0 || cell_row >= n)
    throw validation_error("unit-cell index out of range");

  UnitCellRects out;
  if (s.stage == Stage::stage1) {
    double w = s.panel_width_in * kMicronsPerInch;
    double h = s.panel_height_in * kMicronsPerInch;
    double period = s.stripe_active_um + s.stripe_inactive_um;
    double active_w = w * s.stripe_active_um / period;
    out.subpixel_a = Rect{0, 0, active_w / 2.0, h};
    out.subpixel_b = Rect{active_w / 2.0, 0, active_w, h};
    return out;
  }

  CellDims cd = cell_dims(s);
  double x0 = (pixel_col * n + cell_col) * cd.width_um;
  double y0 = (pixel_row * n + cell_row) * cd.height_um;
  double acx = x0 + cd.width_um / 4.0;
  double bcx = x0 + 3.0 * cd.width_um / 4.0;
  double cy = y0 + cd.height_um / 2.0;
  out.subpixel_a = detail::centered_square(acx, cy, s.subpixel_pitch_um);
  out.subpixel_b = detail::centered_square(bcx, cy, s.subpixel_pitch_um);
  if (s.mask_fraction > 0.0) {
    double pad =
        std::sqrt(s.mask_fraction / 2.0 * cd.width_um * cd.height_um);
    out.masks.push_back(detail::centered_square(acx, cy, pad));
    out.masks.push_back(detail::centered_square(bcx, cy, pad));
  }
  return out;
}

// Opaque mask area over the whole aperture, by enumerating every unit cell.
inline double mask_loss_fraction(const PanelSpec& s) {
  validate(s);
  double masked = 0.0;
  int n = s.subpixels_per_pixel_side;
  for (int pr = 0; pr < s.pixel_rows; ++pr)
    for (int pc = 0; pc < s.pixel_cols; ++pc)
      for (int cr = 0; cr < n; ++cr)
        for (int cc = 0; cc < n; ++cc) {
          UnitCellRects rects = unit_cell_rects(s, pc, pr, cc, cr);
          for (const Rect& m : rects.masks) masked += m.area();
        }
  double panel_area = s.panel_width_in * kMicronsPerInch * s.panel_height_in *
                      kMicronsPerInch;
  return masked / panel_area;
}

// Clear-state transmission factors of the optical sandwich.
struct OpticalStack {
  double t_interfaces = 0.92;
  double t_ito = 0.862;

  bool operator==(const OpticalStack&) const = default;
};

inline void validate(const OpticalStack& st) {
  if (!(st.t_interfaces > 0) || st.t_interfaces > 1.0 || !(st.t_ito > 0) ||
      st.t_ito > 1.0)
    throw validation_error("stack transmissions must lie in (0, 1]");
}

inline double panel_transparency(const PanelSpec& s,
                                 const OpticalStack& st = {}) {
  validate(st);
  return st.t_interfaces * st.t_ito * (1.0 - mask_loss_fraction(s));
}

using ElectrodeId = int;

// Row-major electrode addressing: side A ids first, then side B, then the
// shared ground strips (one per pixel row).
struct ElectrodeMap {
  int pixel_cols = 0;
  int pixel_rows = 0;
  std::vector<ElectrodeId> side_a;
  std::vector<ElectrodeId> side_b;
  std::vector<ElectrodeId> ground;

  int pixel_count() const { return pixel_cols * pixel_rows; }

  ElectrodeId id(Side side, int col, int row) const {
    const auto& v = side == Side::a ? side_a : side_b;
    return v[static_cast<std::size_t>(row) * pixel_cols + col];
  }

  bool operator==(const ElectrodeMap&) const = default;
};

inline ElectrodeMap electrode_map(const PanelSpec& s) {
  validate(s);
  if (s.stage == Stage::stage1)
    throw unsupported_error(
        "stage1 uses striped electrodes; per-pixel addressing is undefined");
  ElectrodeMap m;
  m.pixel_cols = s.pixel_cols;
  m.pixel_rows = s.pixel_rows;
  int n = m.pixel_count();
  m.side_a.resize(n);
  m.side_b.resize(n);
  for (int i = 0; i < n; ++i) {
    m.side_a[i] = i;
    m.side_b[i] = n + i;
  }
  m.ground.resize(s.pixel_rows);
  for (int r = 0; r < s.pixel_rows; ++r) m.ground[r] = 2 * n + r;
  return m;
}

inline std::string to_text(const ElectrodeMap& m) {
  std::string out = "electrodes " + text::fmt(m.pixel_cols) + " " +
                    text::fmt(m.pixel_rows) + "\n";
  for (int r = 0; r < m.pixel_rows; ++r)
    for (int c = 0; c < m.pixel_cols; ++c)
      out += "A " + text::fmt(c) + " " + text::fmt(r) + " " +
             text::fmt(m.id(Side::a, c, r)) + "\n";
  for (int r = 0; r < m.pixel_rows; ++r)
    for (int c = 0; c < m.pixel_cols; ++c)
      out += "B " + text::fmt(c) + " " + text::fmt(r) + " " +
             text::fmt(m.id(Side::b, c, r)) + "\n";
  for (ElectrodeId g : m.ground) out += "G " + text::fmt(g) + "\n";
  return out;
}

struct SubpixelEntry {
  int pixel_col = 0;
  int pixel_row = 0;
  Side side = Side::a;
  double x_um = 0;
  double y_um = 0;
};

// Facing direction follows the side: A entries emit toward the front viewer.
inline std::vector<SubpixelEntry> subpixel_table(const PanelSpec& s) {
  validate(s);
  int n = s.subpixels_per_pixel_side;
  std::vector<SubpixelEntry> table;
  table.reserve(static_cast<std::size_t>(s.pixel_cols) * s.pixel_rows * n * n *
                2);
  for (int pr = 0; pr < s.pixel_rows; ++pr)
    for (int pc = 0; pc < s.pixel_cols; ++pc)
      for (int cr = 0; cr < n; ++cr)
        for (int cc = 0; cc < n; ++cc) {
          UnitCellRects rects = unit_cell_rects(s, pc, pr, cc, cr);
          auto center = [](const Rect& r) {
            return std::pair<double, double>{(r.x0 + r.x1) / 2.0,
                                             (r.y0 + r.y1) / 2.0};
          };
          auto [ax, ay] = center(rects.subpixel_a);
          auto [bx, by] = center(rects.subpixel_b);
          table.push_back(SubpixelEntry{pc, pr, Side::a, ax, ay});
          table.push_back(SubpixelEntry{pc, pr, Side::b, bx, by});
        }
  return table;
}

// Identity carried by schedules and reports so that consumers can resolve
// electrode ids without the full spec.
struct PanelRef {
  std::string stage = "custom";
  int pixel_cols = 1;
  int pixel_rows = 1;

  bool operator==(const PanelRef&) const = default;
};

inline PanelRef panel_ref(const PanelSpec& s) {
  return PanelRef{to_string(s.stage), s.pixel_cols, s.pixel_rows};
}

}  // namespace duoglass
