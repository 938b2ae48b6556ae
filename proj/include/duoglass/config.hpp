#pragma once

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "duoglass/anchors.hpp"
#include "duoglass/electro_optics.hpp"
#include "duoglass/errors.hpp"
#include "duoglass/panel.hpp"
#include "duoglass/schedule.hpp"
#include "duoglass/simulate.hpp"
#include "duoglass/text.hpp"

// Run configuration files: INI-style sections of `key = value` lines with
// `#` or `;` comments. Every recognized key has a default, so an empty file
// is a valid stage-3 run; unknown sections, unknown keys, duplicates and
// type mismatches are hard errors with the offending line number. Parsing a
// serialized config restores the exact same configuration.

namespace duoglass {

struct ConfigDoc {
  struct KeyValue {
    std::string key;
    std::string value;
    std::size_t line = 0;
  };
  struct Section {
    std::string name;
    std::size_t line = 0;
    std::vector<KeyValue> entries;
  };
  std::vector<Section> sections;
};

inline ConfigDoc parse_config_doc(std::string_view body) {
  ConfigDoc doc;
  std::size_t pos = 0, line_no = 0;
  while (pos <= body.size()) {
    if (pos == body.size()) break;
    std::size_t eol = body.find('\n', pos);
    std::string_view line = body.substr(
        pos, eol == std::string_view::npos ? body.size() - pos : eol - pos);
    pos = eol == std::string_view::npos ? body.size() : eol + 1;
    ++line_no;
    std::size_t hash = line.find_first_of("#;");
    if (hash != std::string_view::npos) line = line.substr(0, hash);
    std::string_view trimmed = text::trim(line);
    if (trimmed.empty()) continue;
    if (trimmed.front() == '[') {
      if (trimmed.back() != ']' || trimmed.size() < 3)
        throw parse_error("malformed section header", line_no);
      std::string_view name = text::trim(trimmed.substr(1, trimmed.size() - 2));
      if (name.empty())
        throw parse_error("empty section name", line_no);
      doc.sections.push_back({std::string(name), line_no, {}});
      continue;
    }
    std::size_t eq = trimmed.find('=');
    if (eq == std::string_view::npos)
      throw parse_error("expected 'key = value' or a [section] header",
                        line_no);
    std::string_view key = text::trim(trimmed.substr(0, eq));
    std::string_view value = text::trim(trimmed.substr(eq + 1));
    if (key.empty()) throw parse_error("empty key", line_no);
    if (value.empty())
      throw parse_error("key '" + std::string(key) + "' has no value",
                        line_no);
    if (doc.sections.empty())
      throw parse_error("key '" + std::string(key) +
                            "' appears before any [section] header",
                        line_no);
    doc.sections.back().entries.push_back(
        {std::string(key), std::string(value), line_no});
  }
  return doc;
}

struct RunConfig {
  PanelSpec panel = panel_preset("stage3");
  MaterialResponse material = hcm009();
  TimingConfig timing;
  LedConfig led;
  MaskModel mask;
  OpticalStack stack;
  double dt_ms = 0.05;
  int warmup_frames = 2;
  std::optional<double> calibration_cd_per_au;  // unset: calibrate at run time
  std::string front_image;
  std::string back_image;
  std::string output_dir = "out";
  // Defaults that were filled in because a section was absent. Not part of
  // the configuration value.
  std::vector<std::string> notices;

  bool same_settings(const RunConfig& o) const {
    return panel == o.panel && material == o.material && timing == o.timing &&
           led == o.led && mask == o.mask && stack == o.stack &&
           dt_ms == o.dt_ms && warmup_frames == o.warmup_frames &&
           calibration_cd_per_au == o.calibration_cd_per_au &&
           front_image == o.front_image && back_image == o.back_image &&
           output_dir == o.output_dir;
  }
};

namespace detail {

struct SectionReader {
  const ConfigDoc::Section& section;
  std::set<std::string> seen;

  const ConfigDoc::KeyValue* find(const char* key) {
    const ConfigDoc::KeyValue* hit = nullptr;
    for (const auto& kv : section.entries)
      if (kv.key == key) {
        if (hit)
          throw parse_error("duplicate key '" + std::string(key) +
                                "' in [" + section.name + "]",
                            kv.line);
        hit = &kv;
      }
    if (hit) seen.insert(hit->key);
    return hit;
  }

  bool number(const char* key, double& out) {
    const auto* kv = find(key);
    if (!kv) return false;
    if (!text::parse_double(kv->value, out))
      throw parse_error("key '" + std::string(key) + "' expects a number, got '" +
                            kv->value + "'",
                        kv->line);
    return true;
  }

  bool integer(const char* key, int& out) {
    const auto* kv = find(key);
    if (!kv) return false;
    long long v = 0;
    if (!text::parse_int(kv->value, v))
      throw parse_error("key '" + std::string(key) +
                            "' expects an integer, got '" + kv->value + "'",
                        kv->line);
    out = static_cast<int>(v);
    return true;
  }

  bool string(const char* key, std::string& out) {
    const auto* kv = find(key);
    if (!kv) return false;
    out = kv->value;
    return true;
  }

  // Every key must have been consumed by one of the accessors above.
  void finish() const {
    for (const auto& kv : section.entries)
      if (!seen.count(kv.key))
        throw parse_error("unknown key '" + kv.key + "' in [" + section.name +
                              "]",
                          kv.line);
  }
};

}  // namespace detail

inline RunConfig parse_run_config(std::string_view body) {
  ConfigDoc doc = parse_config_doc(body);
  RunConfig cfg;
  std::set<std::string> seen_sections;
  bool saw[8] = {};  // panel material timing led mask stack simulation io

  for (const ConfigDoc::Section& section : doc.sections) {
    if (seen_sections.count(section.name))
      throw parse_error("duplicate section [" + section.name + "]",
                        section.line);
    seen_sections.insert(section.name);
    detail::SectionReader rd{section, {}};

    if (section.name == "panel") {
      saw[0] = true;
      const auto* preset = rd.find("preset");
      if (preset) {
        try {
          cfg.panel = panel_preset(preset->value);
        } catch (const validation_error& e) {
          throw parse_error(e.what(), preset->line);
        }
      }
      bool has_preset = preset != nullptr;
      bool overrode = false;
      overrode |= rd.integer("pixel_cols", cfg.panel.pixel_cols);
      overrode |= rd.integer("pixel_rows", cfg.panel.pixel_rows);
      overrode |= rd.integer("subpixels_per_pixel_side",
                             cfg.panel.subpixels_per_pixel_side);
      overrode |= rd.number("subpixel_pitch_um", cfg.panel.subpixel_pitch_um);
      overrode |= rd.number("panel_width_in", cfg.panel.panel_width_in);
      overrode |= rd.number("panel_height_in", cfg.panel.panel_height_in);
      overrode |= rd.number("cell_gap_um", cfg.panel.cell_gap_um);
      overrode |= rd.number("mask_fraction", cfg.panel.mask_fraction);
      overrode |= rd.number("stripe_active_um", cfg.panel.stripe_active_um);
      overrode |=
          rd.number("stripe_inactive_um", cfg.panel.stripe_inactive_um);
      if (overrode && !has_preset) cfg.panel.stage = Stage::custom;
    } else if (section.name == "material") {
      saw[1] = true;
      const auto* preset = rd.find("preset");
      if (preset) {
        try {
          cfg.material = material_preset(preset->value);
        } catch (const validation_error& e) {
          throw parse_error(e.what(), preset->line);
        }
      }
      if (const auto* nm = rd.find("name")) {
        // A name matching a known preset pulls in that preset's parameters;
        // explicit keys below still override them field by field.
        if (const MaterialResponse* known = find_material_preset(nm->value))
          cfg.material = *known;
        else
          cfg.material.name = nm->value;
      }
      rd.number("i_min_au", cfg.material.i_min_au);
      rd.number("i_max_au", cfg.material.i_max_au);
      double v = 0;
      bool has_mid = rd.number("v_mid_v", v);
      if (has_mid) cfg.material.v_mid_v = v;
      rd.number("v_width_v", cfg.material.v_width_v);
      auto tau = [&](const char* key, std::optional<double>& out) {
        const auto* kv = rd.find(key);
        if (!kv) return;
        if (kv->value == "none") {
          out.reset();
          return;
        }
        double t = 0;
        if (!text::parse_double(kv->value, t))
          throw parse_error("key '" + std::string(key) +
                                "' expects a number or the word 'none', got '" +
                                kv->value + "'",
                            kv->line);
        out = t;
      };
      tau("tau_on_ms", cfg.material.tau_on_ms);
      tau("tau_off_ms", cfg.material.tau_off_ms);
      double pin = 0;
      if (rd.number("v_sat_pin_v", pin)) {
        if (has_mid)
          throw parse_error(
              "v_mid_v and v_sat_pin_v both set: give one or the other",
              section.line);
        cfg.material.v_mid_v =
            solve_v_mid(cfg.material.i_min_au, cfg.material.i_max_au,
                        cfg.material.v_width_v, pin);
      }
    } else if (section.name == "timing") {
      saw[2] = true;
      rd.number("frame_rate_hz", cfg.timing.frame_rate_hz);
      rd.integer("subframes_per_frame", cfg.timing.subframes_per_frame);
      rd.number("drive_frequency_hz", cfg.timing.drive_frequency_hz);
      rd.number("settle_margin", cfg.timing.settle_margin);
    } else if (section.name == "led") {
      saw[3] = true;
      rd.number("flux_r", cfg.led.flux_per_color[0]);
      rd.number("flux_g", cfg.led.flux_per_color[1]);
      rd.number("flux_b", cfg.led.flux_per_color[2]);
      rd.number("coupling_efficiency", cfg.led.coupling_efficiency);
      rd.number("depletion_per_mm", cfg.led.depletion_per_mm);
      std::string edges;
      if (rd.string("edges", edges)) {
        if (edges == "left") cfg.led.edges = LedConfig::Edges::left;
        else if (edges == "right") cfg.led.edges = LedConfig::Edges::right;
        else if (edges == "both") cfg.led.edges = LedConfig::Edges::both;
        else
          throw parse_error("key 'edges' expects left, right or both, got '" +
                                edges + "'",
                            section.line);
      }
    } else if (section.name == "mask") {
      saw[4] = true;
      rd.number("blocking_efficiency", cfg.mask.blocking_efficiency);
      const auto* kv = rd.find("off_state_background");
      if (kv) {
        if (kv->value == "material") {
          cfg.mask.off_state_background.reset();
        } else {
          double v = 0;
          if (!text::parse_double(kv->value, v))
            throw parse_error(
                "key 'off_state_background' expects a number or the word "
                "'material', got '" +
                    kv->value + "'",
                kv->line);
          cfg.mask.off_state_background = v;
        }
      }
    } else if (section.name == "stack") {
      saw[5] = true;
      rd.number("t_interfaces", cfg.stack.t_interfaces);
      rd.number("t_ito", cfg.stack.t_ito);
    } else if (section.name == "simulation") {
      saw[6] = true;
      rd.number("dt_ms", cfg.dt_ms);
      rd.integer("warmup_frames", cfg.warmup_frames);
      const auto* kv = rd.find("calibration_cd_per_au");
      if (kv) {
        if (kv->value == "auto") {
          cfg.calibration_cd_per_au.reset();
        } else {
          double v = 0;
          if (!text::parse_double(kv->value, v))
            throw parse_error(
                "key 'calibration_cd_per_au' expects a number or the word "
                "'auto', got '" +
                    kv->value + "'",
                kv->line);
          cfg.calibration_cd_per_au = v;
        }
      }
    } else if (section.name == "io") {
      saw[7] = true;
      rd.string("front_image", cfg.front_image);
      rd.string("back_image", cfg.back_image);
      rd.string("output_dir", cfg.output_dir);
    } else {
      throw parse_error("unknown section [" + section.name + "]",
                        section.line);
    }
    rd.finish();
  }

  const char* names[8] = {"panel", "material", "timing", "led",
                          "mask",  "stack",    "simulation", "io"};
  const char* what[8] = {
      "stage3 preset",      "HCM-009 preset",   "default timing",
      "default LEDs",       "ideal mask",       "default optical stack",
      "default simulation", "default io paths"};
  for (int i = 0; i < 8; ++i)
    if (!saw[i])
      cfg.notices.push_back(std::string("no [") + names[i] + "] section: using " +
                            what[i]);

  validate(cfg.panel);
  validate(cfg.material);
  validate(cfg.timing);
  validate(cfg.led);
  validate(cfg.mask);
  validate(cfg.stack);
  if (!(cfg.dt_ms > 0)) throw validation_error("dt_ms must be positive");
  if (cfg.warmup_frames < 0)
    throw validation_error("warmup_frames must be non-negative");
  if (cfg.calibration_cd_per_au && !(*cfg.calibration_cd_per_au > 0))
    throw validation_error("calibration_cd_per_au must be positive");
  return cfg;
}

// Echoes every resolved setting. Parsing the result restores the exact
// configuration, so serialized configs double as reproducibility records.
inline std::string serialize_run_config(const RunConfig& cfg) {
  std::string out;
  auto kv = [&](const char* key, const std::string& value) {
    out += key;
    out += " = ";
    out += value;
    out += '\n';
  };
  out += "[panel]\n";
  if (cfg.panel.stage != Stage::custom) kv("preset", to_string(cfg.panel.stage));
  kv("pixel_cols", text::fmt(cfg.panel.pixel_cols));
  kv("pixel_rows", text::fmt(cfg.panel.pixel_rows));
  kv("subpixels_per_pixel_side",
     text::fmt(cfg.panel.subpixels_per_pixel_side));
  kv("subpixel_pitch_um", text::fmt(cfg.panel.subpixel_pitch_um));
  kv("panel_width_in", text::fmt(cfg.panel.panel_width_in));
  kv("panel_height_in", text::fmt(cfg.panel.panel_height_in));
  kv("cell_gap_um", text::fmt(cfg.panel.cell_gap_um));
  kv("mask_fraction", text::fmt(cfg.panel.mask_fraction));
  kv("stripe_active_um", text::fmt(cfg.panel.stripe_active_um));
  kv("stripe_inactive_um", text::fmt(cfg.panel.stripe_inactive_um));
  out += "\n[material]\n";
  kv("name", cfg.material.name);
  kv("i_min_au", text::fmt(cfg.material.i_min_au));
  kv("i_max_au", text::fmt(cfg.material.i_max_au));
  kv("v_mid_v", text::fmt(cfg.material.v_mid_v));
  kv("v_width_v", text::fmt(cfg.material.v_width_v));
  // Taus are always written so a preset-named material with different
  // dynamics survives the name-as-preset resolution on re-parse.
  kv("tau_on_ms", cfg.material.tau_on_ms ? text::fmt(*cfg.material.tau_on_ms)
                                         : "none");
  kv("tau_off_ms", cfg.material.tau_off_ms
                       ? text::fmt(*cfg.material.tau_off_ms)
                       : "none");
  out += "\n[timing]\n";
  kv("frame_rate_hz", text::fmt(cfg.timing.frame_rate_hz));
  kv("subframes_per_frame", text::fmt(cfg.timing.subframes_per_frame));
  kv("drive_frequency_hz", text::fmt(cfg.timing.drive_frequency_hz));
  kv("settle_margin", text::fmt(cfg.timing.settle_margin));
  out += "\n[led]\n";
  kv("flux_r", text::fmt(cfg.led.flux_per_color[0]));
  kv("flux_g", text::fmt(cfg.led.flux_per_color[1]));
  kv("flux_b", text::fmt(cfg.led.flux_per_color[2]));
  kv("coupling_efficiency", text::fmt(cfg.led.coupling_efficiency));
  kv("edges", cfg.led.edges == LedConfig::Edges::left    ? "left"
              : cfg.led.edges == LedConfig::Edges::right ? "right"
                                                         : "both");
  kv("depletion_per_mm", text::fmt(cfg.led.depletion_per_mm));
  out += "\n[mask]\n";
  kv("blocking_efficiency", text::fmt(cfg.mask.blocking_efficiency));
  kv("off_state_background", cfg.mask.off_state_background
                                 ? text::fmt(*cfg.mask.off_state_background)
                                 : "material");
  out += "\n[stack]\n";
  kv("t_interfaces", text::fmt(cfg.stack.t_interfaces));
  kv("t_ito", text::fmt(cfg.stack.t_ito));
  out += "\n[simulation]\n";
  kv("dt_ms", text::fmt(cfg.dt_ms));
  kv("warmup_frames", text::fmt(cfg.warmup_frames));
  kv("calibration_cd_per_au", cfg.calibration_cd_per_au
                                  ? text::fmt(*cfg.calibration_cd_per_au)
                                  : "auto");
  out += "\n[io]\n";
  if (!cfg.front_image.empty()) kv("front_image", cfg.front_image);
  if (!cfg.back_image.empty()) kv("back_image", cfg.back_image);
  kv("output_dir", cfg.output_dir);
  return out;
}

}  // namespace duoglass
