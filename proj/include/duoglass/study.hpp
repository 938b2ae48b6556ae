#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "duoglass/anchors.hpp"
#include "duoglass/electro_optics.hpp"
#include "duoglass/errors.hpp"
#include "duoglass/schedule.hpp"
#include "duoglass/text.hpp"

// Material study sweeps. The built-in datasets reconstruct the formulation
// studies around the reference materials from their reported scalars; sweep
// rows either carry a sampled curve (figures of merit are computed) or the
// reported scalars directly. Some entries are legitimately partial, for
// example materials whose off state was too dark to register a contrast
// ratio, and stay partial in the output rather than being filled in.

namespace duoglass {

enum class StudyVariable { monomer, concentration, uv_intensity, cell_gap };

inline const char* to_string(StudyVariable v) {
  switch (v) {
    case StudyVariable::monomer: return "monomer";
    case StudyVariable::concentration: return "concentration";
    case StudyVariable::uv_intensity: return "uv-intensity";
    case StudyVariable::cell_gap: return "cell-gap";
  }
  return "?";
}

inline StudyVariable study_variable_from_string(std::string_view s) {
  if (s == "monomer") return StudyVariable::monomer;
  if (s == "concentration") return StudyVariable::concentration;
  if (s == "uv-intensity") return StudyVariable::uv_intensity;
  if (s == "cell-gap") return StudyVariable::cell_gap;
  throw validation_error(
      "unknown study variable '" + std::string(s) +
      "' (expected monomer, concentration, uv-intensity or cell-gap)");
}

struct StudyEntry {
  std::string label;  // single token, e.g. "HCM-009" or "6"
  std::optional<CurveSamples> curve;
  std::optional<double> i_min_au;
  std::optional<double> i_max_au;
  std::optional<double> cr;
  std::optional<double> v_sat_v;
  bool chosen = false;
  std::string note;
};

struct StudyDataset {
  StudyVariable variable = StudyVariable::monomer;
  std::string units;
  std::string material;
  std::string provenance;
  std::vector<StudyEntry> entries;
};

inline void validate(const StudyDataset& d) {
  if (d.entries.empty()) throw validation_error("dataset has no entries");
  for (std::size_t i = 0; i < d.entries.size(); ++i) {
    const StudyEntry& e = d.entries[i];
    if (e.label.empty() ||
        e.label.find_first_of(" \t") != std::string::npos)
      throw validation_error("entry labels must be single non-empty tokens");
    for (std::size_t j = i + 1; j < d.entries.size(); ++j)
      if (d.entries[j].label == e.label)
        throw validation_error("duplicate entry label '" + e.label + "'");
    if (e.curve) validate(*e.curve);
    for (const auto& v : {e.i_min_au, e.i_max_au, e.cr, e.v_sat_v})
      if (v && !(*v >= 0))
        throw validation_error("entry '" + e.label +
                               "' has a negative scalar");
  }
}

inline std::vector<std::string> builtin_dataset_names() {
  return {"monomer", "concentration", "uv-intensity", "cell-gap"};
}

inline StudyDataset builtin_dataset(StudyVariable v) {
  StudyDataset d;
  d.variable = v;
  d.provenance = "reconstructed from reported study scalars";
  auto scalar_entry = [](std::string label, std::optional<double> i_min,
                         std::optional<double> i_max, std::optional<double> cr,
                         std::optional<double> v_sat) {
    StudyEntry e;
    e.label = std::move(label);
    e.i_min_au = i_min;
    e.i_max_au = i_max;
    e.cr = cr;
    e.v_sat_v = v_sat;
    return e;
  };
  switch (v) {
    case StudyVariable::monomer: {
      StudyEntry best;
      best.label = "HCM-009";
      best.curve = sample_curve(hcm009());
      best.chosen = true;
      d.entries.push_back(std::move(best));
      StudyEntry alt;
      alt.label = "RM-257";
      alt.curve = sample_curve(rm257());
      d.entries.push_back(std::move(alt));
      StudyEntry bab = scalar_entry("BAB-6", 0.0, 2.10, std::nullopt, 9.0);
      bab.note = "contrast not reported: off state below measurement floor";
      d.entries.push_back(std::move(bab));
      StudyEntry rm82 = scalar_entry("RM-82", 0.0, 1.60, std::nullopt, 9.0);
      rm82.note = "contrast not reported: off state below measurement floor";
      d.entries.push_back(std::move(rm82));
      break;
    }
    case StudyVariable::concentration:
      d.units = "%";
      d.material = "HCM-009";
      d.entries.push_back(scalar_entry("4", 0.3143, 4.40, 14.0, 9.8));
      d.entries.push_back(scalar_entry("5", 0.2722, 4.90, 18.0, 10.1));
      d.entries.push_back(scalar_entry("6", 0.22, 5.28, 24.0, 10.5));
      d.entries[2].chosen = true;
      d.entries.push_back(scalar_entry("7", 0.2632, 5.00, 19.0, 11.3));
      d.entries.push_back(scalar_entry("8", 0.3067, 4.60, 15.0, 10.9));
      break;
    case StudyVariable::uv_intensity:
      d.units = "mW/cm2";
      d.material = "HCM-009";
      d.entries.push_back(scalar_entry("2", 0.200, 3.90, 19.5, 10.40));
      d.entries.push_back(scalar_entry("4", 0.210, 4.60, 21.9, 10.15));
      d.entries.push_back(scalar_entry("6", 0.215, 5.00, 23.26, 9.90));
      d.entries.push_back(scalar_entry("8", 0.220, 5.28, 24.0, 10.10));
      d.entries[3].chosen = true;
      d.entries.push_back(scalar_entry("10", 0.218, 4.70, 21.56, 10.30));
      break;
    case StudyVariable::cell_gap: {
      d.units = "um";
      d.material = "HCM-009";
      StudyEntry two = scalar_entry("2", std::nullopt, std::nullopt,
                                    std::nullopt, std::nullopt);
      two.chosen = true;
      two.note = "selected operating gap";
      d.entries.push_back(std::move(two));
      d.entries.push_back(scalar_entry("3", std::nullopt, std::nullopt,
                                       std::nullopt, std::nullopt));
      d.entries.push_back(scalar_entry("4", std::nullopt, std::nullopt,
                                       std::nullopt, std::nullopt));
      break;
    }
  }
  validate(d);
  return d;
}

struct SweepRow {
  std::string value;
  std::optional<double> i_min_au;
  std::optional<double> i_max_au;
  std::optional<double> cr;
  std::optional<double> v_sat_v;
  bool chosen = false;
  std::string note;
};

struct SweepResult {
  StudyVariable variable = StudyVariable::monomer;
  std::string units;
  std::vector<SweepRow> rows;
};

namespace detail {

// Figures of merit that tolerate partial curves: a zero off state leaves CR
// unset and a flat curve leaves V_sat unset, with a note saying why.
inline void partial_metrics(const CurveSamples& c, SweepRow& row) {
  row.i_min_au =
      *std::min_element(c.intensity_au.begin(), c.intensity_au.end());
  row.i_max_au =
      *std::max_element(c.intensity_au.begin(), c.intensity_au.end());
  if (*row.i_max_au == *row.i_min_au) {
    row.note = "flat curve: saturation voltage undefined";
    if (*row.i_min_au > 0) row.cr = 1.0;
    return;
  }
  if (*row.i_min_au == 0.0)
    row.note = "contrast ratio undefined: off-state intensity is zero";
  else
    row.cr = *row.i_max_au / *row.i_min_au;
  double threshold = *row.i_min_au + 0.9 * (*row.i_max_au - *row.i_min_au);
  for (std::size_t i = 0; i < c.intensity_au.size(); ++i) {
    if (c.intensity_au[i] >= threshold) {
      if (i == 0) {
        row.v_sat_v = c.voltage_v[0];
      } else {
        double y0 = c.intensity_au[i - 1], y1 = c.intensity_au[i];
        double x0 = c.voltage_v[i - 1], x1 = c.voltage_v[i];
        row.v_sat_v = x0 + (threshold - y0) * (x1 - x0) / (y1 - y0);
      }
      return;
    }
  }
}

}  // namespace detail

inline SweepResult run_sweep(const StudyDataset& d) {
  validate(d);
  SweepResult out;
  out.variable = d.variable;
  out.units = d.units;
  out.rows.reserve(d.entries.size());
  for (const StudyEntry& e : d.entries) {
    SweepRow row;
    row.value = e.label;
    row.chosen = e.chosen;
    row.note = e.note;
    if (e.curve) {
      detail::partial_metrics(*e.curve, row);
    } else {
      row.i_min_au = e.i_min_au;
      row.i_max_au = e.i_max_au;
      row.cr = e.cr;
      row.v_sat_v = e.v_sat_v;
    }
    out.rows.push_back(std::move(row));
  }
  return out;
}

inline constexpr const char* kSweepCsvHeader =
    "variable,value,i_min_au,i_max_au,cr,v_sat_v";

inline std::string sweep_csv(const SweepResult& r) {
  std::string out = kSweepCsvHeader;
  out += '\n';
  auto cell = [](const std::optional<double>& v) {
    return v ? text::fmt(*v) : std::string();
  };
  for (const SweepRow& row : r.rows) {
    out += to_string(r.variable);
    out += ',';
    out += row.value;
    out += ',';
    out += cell(row.i_min_au);
    out += ',';
    out += cell(row.i_max_au);
    out += ',';
    out += cell(row.cr);
    out += ',';
    out += cell(row.v_sat_v);
    out += '\n';
  }
  return out;
}

inline constexpr const char* kDatasetMagic = "DUOGLASS-DATASET";
inline constexpr int kDatasetVersion = 1;

inline std::string serialize_dataset(const StudyDataset& d) {
  validate(d);
  std::string out;
  out += kDatasetMagic;
  out += " v" + text::fmt(kDatasetVersion) + "\n";
  out += "variable ";
  out += to_string(d.variable);
  out += '\n';
  if (!d.units.empty()) out += "units " + d.units + "\n";
  if (!d.material.empty()) out += "material " + d.material + "\n";
  if (!d.provenance.empty()) out += "provenance " + d.provenance + "\n";
  for (const StudyEntry& e : d.entries) {
    out += "entry " + e.label + (e.chosen ? " chosen\n" : "\n");
    if (!e.note.empty()) out += "note " + e.note + "\n";
    auto scalar = [&](const char* key, const std::optional<double>& v) {
      if (v) out += std::string("scalar ") + key + " " + text::fmt(*v) + "\n";
    };
    scalar("i_min_au", e.i_min_au);
    scalar("i_max_au", e.i_max_au);
    scalar("cr", e.cr);
    scalar("v_sat_v", e.v_sat_v);
    if (e.curve) {
      out += "curve " + text::fmt(e.curve->voltage_v.size()) + "\n";
      for (std::size_t i = 0; i < e.curve->voltage_v.size(); ++i)
        out += "point " + text::fmt(e.curve->voltage_v[i]) + " " +
               text::fmt(e.curve->intensity_au[i]) + "\n";
    }
  }
  out += "end\n";
  return out;
}

namespace detail {

// Joins the tokens after the directive keyword with single spaces; free-text
// directive values are single-space normalized by design.
inline std::string rest_of_line(const std::vector<text::Token>& t) {
  std::string out;
  for (std::size_t i = 1; i < t.size(); ++i) {
    if (i > 1) out += ' ';
    out += t[i].value;
  }
  return out;
}

}  // namespace detail

inline StudyDataset parse_dataset(std::string_view body) {
  detail::LineReader rd{body};
  std::vector<text::Token> t;
  if (!rd.next(t)) throw parse_error("empty stream: missing dataset header");
  if (t.size() != 2 || t[0].value != kDatasetMagic || t[1].value.size() < 2 ||
      t[1].value[0] != 'v')
    throw parse_error("malformed dataset header", rd.line_no);
  long long version = 0;
  if (!text::parse_int(t[1].value.substr(1), version) ||
      version != kDatasetVersion)
    throw parse_error(
        "unsupported dataset version (this build reads version " +
            text::fmt(kDatasetVersion) + ")",
        rd.line_no);
  if (!rd.next(t) || t[0].value != "variable" || t.size() != 2)
    throw parse_error("expected 'variable <name>'", rd.line_no);
  StudyDataset d;
  try {
    d.variable = study_variable_from_string(t[1].value);
  } catch (const validation_error& e) {
    throw parse_error(e.what(), rd.line_no, t[1].column);
  }

  StudyEntry* current = nullptr;
  bool saw_end = false;
  std::size_t pending_points = 0;
  while (rd.next(t)) {
    if (saw_end)
      throw parse_error("unexpected content after 'end'", rd.line_no);
    std::string_view key = t[0].value;
    if (pending_points > 0 && key != "point")
      throw parse_error("expected " + text::fmt(pending_points) +
                            " more 'point' line(s) for the open curve",
                        rd.line_no);
    if (key == "units" || key == "material" || key == "provenance") {
      if (current)
        throw parse_error(std::string(key) +
                              " must appear before the first entry",
                          rd.line_no);
      std::string value = detail::rest_of_line(t);
      if (key == "units") d.units = value;
      else if (key == "material") d.material = value;
      else d.provenance = value;
    } else if (key == "entry") {
      if (t.size() < 2 || t.size() > 3 ||
          (t.size() == 3 && t[2].value != "chosen"))
        throw parse_error("expected 'entry <label> [chosen]'", rd.line_no);
      StudyEntry e;
      e.label = std::string(t[1].value);
      e.chosen = t.size() == 3;
      d.entries.push_back(std::move(e));
      current = &d.entries.back();
    } else if (key == "note") {
      if (!current) throw parse_error("note before any entry", rd.line_no);
      current->note = detail::rest_of_line(t);
    } else if (key == "scalar") {
      if (!current) throw parse_error("scalar before any entry", rd.line_no);
      if (t.size() != 3)
        throw parse_error("expected 'scalar <key> <value>'", rd.line_no);
      double v = detail::sched_double(t[2], rd.line_no, "scalar value");
      std::optional<double>* slot = nullptr;
      if (t[1].value == "i_min_au") slot = &current->i_min_au;
      else if (t[1].value == "i_max_au") slot = &current->i_max_au;
      else if (t[1].value == "cr") slot = &current->cr;
      else if (t[1].value == "v_sat_v") slot = &current->v_sat_v;
      else
        throw parse_error("unknown scalar key '" + std::string(t[1].value) +
                              "'",
                          rd.line_no, t[1].column);
      if (*slot)
        throw parse_error("duplicate scalar '" + std::string(t[1].value) +
                              "' for entry '" + current->label + "'",
                          rd.line_no);
      *slot = v;
    } else if (key == "curve") {
      if (!current) throw parse_error("curve before any entry", rd.line_no);
      if (current->curve)
        throw parse_error("entry '" + current->label +
                              "' already has a curve",
                          rd.line_no);
      if (t.size() != 2)
        throw parse_error("expected 'curve <sample count>'", rd.line_no);
      long long n = detail::sched_int(t[1], rd.line_no, "sample count");
      if (n < 2)
        throw parse_error("a curve needs at least 2 samples", rd.line_no);
      current->curve = CurveSamples{};
      pending_points = static_cast<std::size_t>(n);
    } else if (key == "point") {
      if (!current || !current->curve || pending_points == 0)
        throw parse_error("'point' outside an open curve block", rd.line_no);
      if (t.size() != 3)
        throw parse_error("expected 'point <voltage> <intensity>'",
                          rd.line_no);
      current->curve->voltage_v.push_back(
          detail::sched_double(t[1], rd.line_no, "voltage"));
      current->curve->intensity_au.push_back(
          detail::sched_double(t[2], rd.line_no, "intensity"));
      --pending_points;
    } else if (key == "end") {
      if (t.size() != 1) throw parse_error("junk after 'end'", rd.line_no);
      saw_end = true;
    } else {
      throw parse_error("unknown directive '" + std::string(key) + "'",
                        rd.line_no, t[0].column);
    }
  }
  if (!saw_end) throw parse_error("missing 'end' line", rd.line_no + 1);
  try {
    validate(d);
  } catch (const validation_error& e) {
    throw parse_error(e.what(), rd.line_no);
  }
  return d;
}

struct AnchorCheck {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct AnchorReport {
  bool pass = true;
  std::vector<AnchorCheck> checks;
};

// Cross-checks the built-in datasets against the qualitative shape of the
// formulation studies and the reference material scalars. Meant as a fast
// self-test that reconstructed numbers have not drifted.
inline AnchorReport check_anchors() {
  AnchorReport rep;
  auto add = [&](std::string name, bool pass, std::string detail) {
    rep.pass = rep.pass && pass;
    rep.checks.push_back({std::move(name), pass, std::move(detail)});
  };
  auto row_of = [](const SweepResult& r, std::string_view label)
      -> const SweepRow& {
    for (const SweepRow& row : r.rows)
      if (row.value == label) return row;
    throw validation_error("missing sweep row '" + std::string(label) + "'");
  };
  auto argbest = [](const SweepResult& r, bool maximize,
                    auto field) -> std::string {
    std::string best;
    double best_v = 0.0;
    for (const SweepRow& row : r.rows) {
      const std::optional<double>& v = row.*field;
      if (!v) continue;
      if (best.empty() || (maximize ? *v > best_v : *v < best_v)) {
        best = row.value;
        best_v = *v;
      }
    }
    return best;
  };

  SweepResult conc = run_sweep(builtin_dataset(StudyVariable::concentration));
  add("concentration-cr-peak",
      argbest(conc, true, &SweepRow::cr) == "6",
      "contrast ratio must peak at 6% loading");
  add("concentration-vsat-peak",
      argbest(conc, true, &SweepRow::v_sat_v) == "7",
      "saturation voltage must peak at 7% loading");

  SweepResult uv = run_sweep(builtin_dataset(StudyVariable::uv_intensity));
  add("uv-cr-peak", argbest(uv, true, &SweepRow::cr) == "8",
      "contrast ratio must peak at 8 mW/cm2");
  add("uv-vsat-valley", argbest(uv, false, &SweepRow::v_sat_v) == "6",
      "saturation voltage must bottom out at 6 mW/cm2");

  SweepResult mono = run_sweep(builtin_dataset(StudyVariable::monomer));
  const SweepRow& hcm = row_of(mono, "HCM-009");
  add("monomer-hcm009-cr",
      hcm.cr && std::abs(*hcm.cr - 24.0) <= 0.5,
      "HCM-009 contrast ratio must sit at 24 (+/- 0.5), got " +
          (hcm.cr ? text::fmt(*hcm.cr) : std::string("none")));
  add("monomer-hcm009-vsat",
      hcm.v_sat_v && std::abs(*hcm.v_sat_v - 10.5) <= 0.05,
      "HCM-009 saturation voltage must sit at 10.5 V (+/- 0.05)");
  add("monomer-hcm009-imax",
      hcm.i_max_au && std::abs(*hcm.i_max_au - 5.28) <= 0.01,
      "HCM-009 peak intensity must sit at 5.28 a.u. (+/- 0.01)");
  const SweepRow& rm = row_of(mono, "RM-257");
  add("monomer-rm257-vsat",
      rm.v_sat_v && std::abs(*rm.v_sat_v - 12.0) <= 0.05,
      "RM-257 saturation voltage must sit at 12 V (+/- 0.05)");
  bool degenerate_ok = true;
  for (const char* label : {"BAB-6", "RM-82"}) {
    const SweepRow& row = row_of(mono, label);
    degenerate_ok = degenerate_ok && !row.cr && !row.note.empty();
  }
  add("monomer-partial-entries", degenerate_ok,
      "BAB-6 and RM-82 must stay without a contrast ratio and carry a note");
  add("monomer-chosen", hcm.chosen && !rm.chosen,
      "HCM-009 must be the chosen monomer");

  SweepResult gap = run_sweep(builtin_dataset(StudyVariable::cell_gap));
  int chosen_count = 0;
  bool gap_empty = true;
  std::string chosen_label;
  for (const SweepRow& row : gap.rows) {
    if (row.chosen) {
      ++chosen_count;
      chosen_label = row.value;
    }
    gap_empty = gap_empty && !row.i_min_au && !row.i_max_au && !row.cr &&
                !row.v_sat_v;
  }
  add("cellgap-chosen", chosen_count == 1 && chosen_label == "2",
      "exactly one gap may be chosen and it must be 2 um");
  add("cellgap-no-scalars", gap_empty,
      "the gap study reports no photometric scalars");

  bool consistent = true;
  std::string mismatch;
  for (const SweepResult* r : {&conc, &uv, &mono}) {
    for (const SweepRow& row : r->rows) {
      if (!row.i_min_au || !row.i_max_au || !row.cr || !(*row.i_min_au > 0))
        continue;
      double implied = *row.i_max_au / *row.i_min_au;
      if (std::abs(implied - *row.cr) > 0.01 * *row.cr) {
        consistent = false;
        mismatch = std::string(to_string(r->variable)) + "/" + row.value;
      }
    }
  }
  add("scalar-consistency", consistent,
      consistent ? "i_max/i_min agrees with CR within 1% on every row"
                 : "i_max/i_min disagrees with CR beyond 1% at " + mismatch);
  return rep;
}

}  // namespace duoglass
