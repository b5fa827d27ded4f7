#include <CLI11.hpp>

#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "dqcalib/commands.hpp"
#include "dqcalib/errors.hpp"
#include "dqcalib/io.hpp"

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "configuration file (key = value)");
  cmd->add_option("--seed", c.seed, "override the configured random seed");
}

dqcalib::PipelineConfig resolve(const Common& c) {
  dqcalib::PipelineConfig cfg = c.config.empty() ? dqcalib::PipelineConfig{} : dqcalib::load_config(c.config);
  if (c.seed) cfg.seed = *c.seed;
  return cfg;
}

// Report goes to --out when given, else stdout.
int with_output(const std::string& out_file, const std::function<int(std::ostream&)>& f) {
  if (out_file.empty()) return f(std::cout);
  std::ostringstream buf;
  const int rc = f(buf);
  dqcalib::write_text(out_file, buf.str());
  return rc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lidar-to-lidar extrinsic calibration from odometry using dual quaternions"};
  app.require_subcommand(1);

  Common sim_c;
  std::string sim_out;
  auto* sim = app.add_subcommand("simulate", "generate a synthetic two-lidar dataset");
  add_common(sim, sim_c);
  sim->add_option("--out", sim_out, "output directory")->required();

  Common cal_c;
  std::string cal_front, cal_rear, cal_out;
  auto* cal = app.add_subcommand("calibrate", "estimate the front-to-rear extrinsic");
  add_common(cal, cal_c);
  cal->add_option("front", cal_front, "front lidar odometry")->required();
  cal->add_option("rear", cal_rear, "rear lidar odometry")->required();
  cal->add_option("--out", cal_out, "write the JSON report here instead of stdout");

  Common ev_c;
  std::string ev_front, ev_rear, ev_ext, ev_out;
  bool ev_no_align = false;
  auto* ev = app.add_subcommand("evaluate", "APE and RPE of the rear trajectory mapped through an extrinsic");
  add_common(ev, ev_c);
  ev->add_option("front", ev_front, "front lidar odometry")->required();
  ev->add_option("rear", ev_rear, "rear lidar odometry")->required();
  ev->add_option("extrinsic", ev_ext, "calibration report or ground_truth.json")->required();
  ev->add_option("--out", ev_out, "directory for ape.csv and rpe.csv");
  ev->add_flag("--no-align", ev_no_align, "require both files to share timestamps");

  Common ver_c;
  std::string ver_feat, ver_base, ver_before, ver_after, ver_out;
  auto* ver = app.add_subcommand("verify", "compare two extrinsics by curb alignment");
  add_common(ver, ver_c);
  ver->add_option("features", ver_feat, "feature observations")->required();
  ver->add_option("base", ver_base, "base trajectory in the world frame")->required();
  ver->add_option("before", ver_before, "extrinsic JSON before calibration")->required();
  ver->add_option("after", ver_after, "extrinsic JSON after calibration")->required();
  ver->add_option("--out", ver_out, "write the JSON report here instead of stdout");

  Common def_c;
  auto* defs = app.add_subcommand("config", "print the effective configuration");
  add_common(defs, def_c);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // --help exits 0; every other usage error maps to the generic failure code
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (*sim) return dqcalib::cmd_simulate(resolve(sim_c), sim_out);
    if (*cal) {
      const auto cfg = resolve(cal_c);
      return with_output(cal_out, [&](std::ostream& o) { return dqcalib::cmd_calibrate(cal_front, cal_rear, cfg, o); });
    }
    if (*ev) {
      const auto cfg = resolve(ev_c);
      std::optional<std::filesystem::path> dir;
      if (!ev_out.empty()) dir = ev_out;
      return dqcalib::cmd_evaluate(ev_front, ev_rear, ev_ext, cfg, std::cout, dir, !ev_no_align);
    }
    if (*ver) {
      const auto cfg = resolve(ver_c);
      return with_output(ver_out, [&](std::ostream& o) {
        return dqcalib::cmd_verify(ver_feat, ver_base, ver_before, ver_after, cfg, o);
      });
    }
    if (*defs) {
      std::cout << dqcalib::config_to_text(resolve(def_c));
      return 0;
    }
  } catch (const dqcalib::Error& e) {
    std::cerr << e.what() << '\n';
    std::cout << dqcalib::error_report(std::string(dqcalib::to_string(e.code())), e.what()).dump(2) << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << e.what() << '\n';
    std::cout << dqcalib::error_report("InternalError", e.what()).dump(2) << '\n';
    return 1;
  }
  return 0;
}
