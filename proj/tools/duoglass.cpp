#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "duoglass/duoglass.hpp"

// Command-line front end. Data goes to stdout or to files named by flags;
// every diagnostic goes to stderr. Exit codes: 0 success, 1 validation or
// domain failure, 2 usage error.

namespace dg = duoglass;
namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

void emit(std::ostream& os, const char* key, const std::string& value) {
  os << key << ' ' << value << '\n';
}

void emit(std::ostream& os, const char* key, double value) {
  emit(os, key, dg::text::fmt(value));
}

// Writes through a data sink: stdout by default, a file when a path is set.
void sink(const std::string& path, const std::string& data) {
  if (path.empty()) {
    std::cout << data;
  } else {
    dg::write_file(path, data);
    std::cerr << "wrote " << path << '\n';
  }
}

dg::RunConfig load_config(const std::string& path) {
  dg::RunConfig cfg = dg::parse_run_config(dg::read_file(path));
  for (const std::string& n : cfg.notices) std::cerr << "notice: " << n << '\n';
  return cfg;
}

// `transparency` accepts either a panel preset name or a config file path.
dg::RunConfig config_or_preset(const std::string& arg) {
  if (arg == "stage1" || arg == "stage2" || arg == "stage3") {
    dg::RunConfig cfg;
    cfg.panel = dg::panel_preset(arg);
    return cfg;
  }
  return load_config(arg);
}

dg::Image image_for(const std::string& positional, const std::string& from_cfg,
                    const char* which) {
  if (!positional.empty()) return dg::read_image_file(positional);
  if (!from_cfg.empty()) return dg::read_image_file(from_cfg);
  throw dg::validation_error(std::string("no ") + which +
                             " image given (pass it as an argument or set it "
                             "in the [io] section)");
}

void warn_if_infeasible(const dg::TimingConfig& timing,
                        const dg::MaterialResponse& m) {
  if (!m.tau_on_ms || !m.tau_off_ms) return;
  dg::FeasibilityReport fr = dg::check_feasibility(timing, m);
  if (!fr.feasible)
    std::cerr << "warning: timing infeasible: sub-frame "
              << dg::text::fmt(fr.subframe_ms) << " ms is below the required "
              << dg::text::fmt(fr.required_ms)
              << " ms (margin ratio " << dg::text::fmt(fr.margin_ratio)
              << "); expect ghosting\n";
}

struct SimulateArgs {
  std::string config;
  std::string front;
  std::string back;
  std::string out_dir;
};

void run_simulate(const SimulateArgs& a) {
  dg::RunConfig cfg = load_config(a.config);
  dg::Image front = image_for(a.front, cfg.front_image, "front");
  dg::Image back = image_for(a.back, cfg.back_image, "back");
  warn_if_infeasible(cfg.timing, cfg.material);

  dg::DriveSchedule sched = dg::compile_schedule({front, back}, cfg.panel,
                                                 cfg.material, cfg.timing);
  dg::SimulateOptions opt;
  opt.dt_ms = cfg.dt_ms;
  opt.warmup_frame_cap = cfg.warmup_frames;
  opt.calibration_cd_per_au = cfg.calibration_cd_per_au;
  opt.stack = cfg.stack;
  dg::SimulationReport rep =
      dg::simulate_frame(sched, cfg.panel, cfg.material, cfg.led, cfg.mask, opt);

  std::string dir = a.out_dir.empty() ? cfg.output_dir : a.out_dir;
  fs::create_directories(dir);
  auto under = [&](const char* name) { return (fs::path(dir) / name).string(); };
  dg::write_file(under("report.txt"), dg::serialize_report(rep));
  dg::write_image_file(under("front.ppm"), dg::render_side(rep, dg::Side::a));
  dg::write_image_file(under("back.ppm"), dg::render_side(rep, dg::Side::b));
  dg::write_file(under("config.cfg"), dg::serialize_run_config(cfg));
  std::cerr << "wrote " << under("report.txt") << ", front.ppm, back.ppm, "
            << "config.cfg\n";

  emit(std::cout, "brightness_white_cd_m2", rep.metrics.brightness_white_cd_m2);
  emit(std::cout, "panel_cr", rep.metrics.panel_cr);
  emit(std::cout, "crosstalk", rep.metrics.crosstalk);
  emit(std::cout, "transparency", rep.metrics.transparency);
  emit(std::cout, "calibration_cd_per_au", rep.calibration_cd_per_au);
}

int dispatch(int argc, char** argv) {
  CLI::App app{"duoglass: simulation and drive toolkit for a dual-sided "
               "transparent waveguide display"};
  app.require_subcommand(1);
  int exit_code = kExitOk;

  // metrics <curve.csv>
  auto m_args = std::make_shared<std::string>();
  CLI::App* metrics = app.add_subcommand(
      "metrics", "Figures of merit of a sampled voltage-intensity curve");
  metrics->add_option("curve", *m_args, "curve CSV file")->required();
  metrics->callback([m_args] {
    dg::CurveMetrics cm =
        dg::curve_metrics(dg::parse_curve_csv(dg::read_file(*m_args)));
    emit(std::cout, "i_min_au", cm.i_min_au);
    emit(std::cout, "i_max_au", cm.i_max_au);
    emit(std::cout, "cr", cm.cr);
    emit(std::cout, "v_sat_v", cm.v_sat_v);
  });

  // fit <curve.csv>
  struct FitArgs {
    std::string curve;
    int max_iterations = dg::kFitIterationCap;
  };
  auto f_args = std::make_shared<FitArgs>();
  CLI::App* fit = app.add_subcommand(
      "fit", "Least-squares fit of the steady-state response model");
  fit->add_option("curve", f_args->curve, "curve CSV file")->required();
  fit->add_option("--max-iterations", f_args->max_iterations,
                  "iteration cap");
  fit->callback([f_args] {
    dg::FitResult fr = dg::fit_response(
        dg::parse_curve_csv(dg::read_file(f_args->curve)),
        f_args->max_iterations);
    emit(std::cout, "i_min_au", fr.response.i_min_au);
    emit(std::cout, "i_max_au", fr.response.i_max_au);
    emit(std::cout, "v_mid_v", fr.response.v_mid_v);
    emit(std::cout, "v_width_v", fr.response.v_width_v);
    emit(std::cout, "residual_rms", fr.residual);
    emit(std::cout, "iterations", dg::text::fmt(fr.iterations));
    emit(std::cout, "converged", fr.converged ? "true" : "false");
    emit(std::cout, "width_at_bound", fr.width_at_bound ? "true" : "false");
  });

  // transparency <config-or-preset>
  auto t_args = std::make_shared<std::string>();
  CLI::App* transparency = app.add_subcommand(
      "transparency", "See-through budget of a panel (preset name or config)");
  transparency->add_option("config", *t_args, "stage1|stage2|stage3 or a config file")
      ->required();
  transparency->callback([t_args] {
    dg::RunConfig cfg = config_or_preset(*t_args);
    emit(std::cout, "mask_loss_fraction", dg::mask_loss_fraction(cfg.panel));
    emit(std::cout, "t_interfaces", cfg.stack.t_interfaces);
    emit(std::cout, "t_ito", cfg.stack.t_ito);
    emit(std::cout, "transparency",
         dg::panel_transparency(cfg.panel, cfg.stack));
  });

  // schedule compile|validate
  CLI::App* schedule =
      app.add_subcommand("schedule", "Drive schedule compilation and checks");
  schedule->require_subcommand(1);
  struct CompileArgs {
    std::string config;
    std::string front;
    std::string back;
    std::string output;
  };
  auto c_args = std::make_shared<CompileArgs>();
  CLI::App* compile = schedule->add_subcommand(
      "compile", "Compile a frame pair into a drive schedule");
  compile->add_option("config", c_args->config, "config file")->required();
  compile->add_option("front", c_args->front, "front image (PPM)")->required();
  compile->add_option("back", c_args->back, "back image (PPM)")->required();
  compile->add_option("-o,--output", c_args->output,
                      "schedule file (default: stdout)");
  compile->callback([c_args] {
    dg::RunConfig cfg = load_config(c_args->config);
    dg::Image front = dg::read_image_file(c_args->front);
    dg::Image back = dg::read_image_file(c_args->back);
    warn_if_infeasible(cfg.timing, cfg.material);
    dg::DriveSchedule s = dg::compile_schedule({front, back}, cfg.panel,
                                               cfg.material, cfg.timing);
    sink(c_args->output, dg::serialize_schedule(s));
  });
  auto v_args = std::make_shared<std::string>();
  CLI::App* validate_cmd = schedule->add_subcommand(
      "validate", "Check a schedule file against all drive invariants");
  validate_cmd->add_option("schedule", *v_args, "schedule file")->required();
  validate_cmd->callback([v_args, &exit_code] {
    dg::DriveSchedule s = dg::parse_schedule(dg::read_file(*v_args));
    std::vector<dg::Violation> violations = dg::validate_schedule(s);
    if (violations.empty()) {
      emit(std::cout, "ok", "schedule passes all drive invariants");
      emit(std::cout, "subframes", dg::text::fmt(s.subframes.size()));
      emit(std::cout, "frame_period_ms", dg::frame_period_ms(s.timing));
    } else {
      for (const dg::Violation& v : violations) {
        std::cerr << "violation [" << v.code << "]";
        if (v.subframe >= 0) std::cerr << " subframe " << v.subframe;
        std::cerr << ": " << v.message << '\n';
      }
      exit_code = kExitFailure;
    }
  });

  // simulate <config> <front.ppm> <back.ppm>
  auto s_args = std::make_shared<SimulateArgs>();
  CLI::App* simulate = app.add_subcommand(
      "simulate", "Photometric simulation of one frame pair");
  simulate->add_option("config", s_args->config, "config file")->required();
  simulate->add_option("front", s_args->front, "front image (PPM)");
  simulate->add_option("back", s_args->back, "back image (PPM)");
  simulate->add_option("--out-dir", s_args->out_dir,
                       "output directory (default: [io] output_dir)");
  simulate->callback([s_args] { run_simulate(*s_args); });

  // sweep <dataset>
  struct SweepArgs {
    std::string dataset;
    std::string output;
    std::string chart;
  };
  auto w_args = std::make_shared<SweepArgs>();
  CLI::App* sweep = app.add_subcommand(
      "sweep", "Material study sweep (built-in dataset name or dataset file)");
  sweep->add_option("dataset", w_args->dataset,
                    "monomer|concentration|uv-intensity|cell-gap or a file")
      ->required();
  sweep->add_option("-o,--output", w_args->output,
                    "CSV file (default: stdout)");
  sweep->add_option("--chart", w_args->chart, "also write an SVG chart here");
  sweep->callback([w_args] {
    dg::StudyDataset ds;
    bool builtin = false;
    for (const std::string& name : dg::builtin_dataset_names())
      if (name == w_args->dataset) {
        ds = dg::builtin_dataset(dg::study_variable_from_string(name));
        builtin = true;
      }
    if (!builtin) ds = dg::parse_dataset(dg::read_file(w_args->dataset));
    dg::SweepResult result = dg::run_sweep(ds);
    for (const dg::SweepRow& row : result.rows)
      if (!row.note.empty())
        std::cerr << "note: " << row.value << ": " << row.note << '\n';
    sink(w_args->output, dg::sweep_csv(result));
    if (!w_args->chart.empty()) {
      dg::write_file(w_args->chart, dg::sweep_chart(result));
      std::cerr << "wrote " << w_args->chart << '\n';
    }
  });

  // render <report>
  struct RenderArgs {
    std::string report;
    std::string side = "both";
    std::string out_dir = ".";
  };
  auto r_args = std::make_shared<RenderArgs>();
  CLI::App* render = app.add_subcommand(
      "render", "Rasterize the luminance maps of a simulation report");
  render->add_option("report", r_args->report, "report file")->required();
  render->add_option("--side", r_args->side, "front|back|both")
      ->check(CLI::IsMember({"front", "back", "both"}));
  render->add_option("--out-dir", r_args->out_dir, "output directory");
  render->callback([r_args] {
    dg::SimulationReport rep =
        dg::parse_report(dg::read_file(r_args->report));
    fs::create_directories(r_args->out_dir);
    auto write_one = [&](dg::Side side, const char* name) {
      std::string path = (fs::path(r_args->out_dir) / name).string();
      dg::write_image_file(path, dg::render_side(rep, side));
      std::cerr << "wrote " << path << '\n';
    };
    if (r_args->side != "back") write_one(dg::Side::a, "front.ppm");
    if (r_args->side != "front") write_one(dg::Side::b, "back.ppm");
  });

  // check (built-in dataset anchors)
  CLI::App* check = app.add_subcommand(
      "check", "Self-test the built-in study datasets against their anchors");
  check->callback([&exit_code] {
    dg::AnchorReport rep = dg::check_anchors();
    for (const dg::AnchorCheck& c : rep.checks)
      std::cout << (c.pass ? "ok " : "FAIL ") << c.name
                << (c.pass ? "" : ": " + c.detail) << '\n';
    if (!rep.pass) exit_code = kExitFailure;
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "usage error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }
  return exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return dispatch(argc, argv);
  } catch (const duoglass::error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}
