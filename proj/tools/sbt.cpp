// sbt: command-line front end for the slender-body toolkit.
//
// Exit codes: 0 success, 2 validation error, 3 tolerance failure, 1 other.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include <sbt/sbt.hpp>

namespace fs = std::filesystem;

namespace {

/// A path to a JSON file, or a built-in name.
std::vector<sbt::FourierMode> load_modes(const std::string& arg, bool is_force) {
  if (fs::exists(arg)) return sbt::resolve_modes(sbt::read_json_file(arg), is_force);
  return sbt::resolve_modes(sbt::json(arg), is_force);
}

sbt::Frame load_frame(const std::string& geom) {
  const auto curve = sbt::Centerline::build(load_modes(geom, false));
  return sbt::Frame::build(curve);
}

void emit(const std::string& out_path, const std::string& text) {
  if (out_path.empty() || out_path == "-") {
    std::cout << text;
  } else {
    sbt::write_text(out_path, text);
  }
}

int cmd_frame(const std::string& geom, int samples, const std::string& out) {
  const auto curve = sbt::Centerline::build(load_modes(geom, false));
  const auto frame = sbt::Frame::build(curve, samples);
  emit(out, sbt::frame_csv(frame));
  return 0;
}

int cmd_eval(const std::string& geom, const std::string& force, const std::string& points, double eps, double tol,
             const std::string& out) {
  const auto frame = load_frame(geom);
  const sbt::SlenderBody body(frame, sbt::ForceDensity::from_modes(load_modes(force, true)), eps,
                              sbt::QuadratureSpec::for_epsilon(eps, tol));
  std::ifstream in(points);
  if (!in) throw sbt::ConfigInvalid("cannot open " + points);
  const auto pts = sbt::parse_points_csv(in);
  std::vector<sbt::FieldSample> samples(pts.size());
  sbt::parallel_for(pts.size(), [&](std::size_t i) { samples[i] = body.field_sample(pts[i]); });
  std::ostringstream os;
  os << "x,y,z,ux,uy,uz,p\n";
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto& u = samples[i].velocity;
    os << sbt::format_double(pts[i][0]) << ',' << sbt::format_double(pts[i][1]) << ',' << sbt::format_double(pts[i][2])
       << ',' << sbt::format_double(u[0]) << ',' << sbt::format_double(u[1]) << ',' << sbt::format_double(u[2]) << ','
       << sbt::format_double(samples[i].pressure) << '\n';
  }
  emit(out, os.str());
  return 0;
}

int cmd_residuals(const std::string& geom, const std::string& force, double eps, int n_theta, int n_s,
                  const std::string& out_dir) {
  const auto frame = load_frame(geom);
  const sbt::SlenderBody body(frame, sbt::ForceDensity::from_modes(load_modes(force, true)), eps);
  const auto reports = sbt::cross_sections(body, n_s, n_theta);

  sbt::json arr = sbt::json::array();
  std::ostringstream csv;
  csv << "s,force_residual,ur_max,centerline_residual_max\n";
  for (const auto& r : reports) {
    sbt::json comps = sbt::json::object();
    const auto c = r.components.as_array();
    for (std::size_t i = 0; i < c.size(); ++i) comps[sbt::kComponentNames[i]] = sbt::vec3_to_json(c[i]);
    arr.push_back({{"s", r.s},
                   {"f_sb", sbt::vec3_to_json(r.f_sb)},
                   {"f_true", sbt::vec3_to_json(r.f_true)},
                   {"components", comps},
                   {"ur_max", r.ur_max},
                   {"n_theta", r.n_theta},
                   {"u_centerline", sbt::vec3_to_json(r.u_centerline)},
                   {"centerline_residual_max", r.centerline_residual_max}});
    csv << sbt::format_double(r.s) << ',' << sbt::format_double(r.force_residual()) << ','
        << sbt::format_double(r.ur_max) << ',' << sbt::format_double(r.centerline_residual_max) << '\n';
  }
  if (out_dir.empty()) {
    std::cout << csv.str();
  } else {
    fs::create_directories(out_dir);
    sbt::write_text(fs::path(out_dir) / "cross_sections.json", arr.dump(2) + "\n");
    sbt::write_text(fs::path(out_dir) / "residuals_summary.csv", csv.str());
    std::cout << "wrote " << (fs::path(out_dir) / "cross_sections.json").string() << " and "
              << (fs::path(out_dir) / "residuals_summary.csv").string() << '\n';
  }
  return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& out_override) {
  auto cfg = sbt::ExperimentConfig::from_json(sbt::read_json_file(config_path));
  if (!out_override.empty()) cfg.output_dir = out_override;
  const auto rep = sbt::run_sweep(cfg);
  sbt::write_report(rep, cfg.output_dir);
  std::printf("config %s\n", rep.config_hash.c_str());
  for (const auto& r : rep.records)
    std::printf("eps %-12.6g %-18s ur_max %.3e  |fsb-f| %.3e  centerline %.3e\n", r.eps, r.status.c_str(), r.ur_max,
                r.force_residual_max, r.centerline_residual_max);
  for (const auto& s : rep.slopes) {
    if (s.fit)
      std::printf("slope %-24s vs %-18s %8.4f  R^2 %.5f\n", s.quantity.c_str(), s.regressor.c_str(), s.fit->slope,
                  s.fit->r_squared);
    else
      std::printf("slope %-24s vs %-18s n/a (%s)\n", s.quantity.c_str(), s.regressor.c_str(), s.message.c_str());
  }
  std::printf("report written to %s (%.2f s)\n", cfg.output_dir.c_str(), rep.runtime_seconds);
  return 0;
}

int cmd_verify_lemmas() {
  const auto rep = sbt::verify_lemmas();
  for (const auto& c : rep.checks)
    std::printf("%-4s %-28s expected %.15f computed %.15f err %.2e\n", c.pass ? "PASS" : "FAIL", c.name.c_str(),
                c.expected, c.computed, c.abs_error);
  return rep.all_pass() ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Slender-body theory toolkit for closed fibers in Stokes flow"};
  app.require_subcommand(1);

  std::string geom, force, points, out, out_dir, config;
  double eps = 0.0, tol = 1e-10;
  int samples = 1024, n_theta = 64, n_s = 64;

  auto* frame_cmd = app.add_subcommand("frame", "Build the periodic frame and print it as CSV");
  frame_cmd->add_option("geometry", geom, "Geometry JSON file or built-in name")->required();
  frame_cmd->add_option("--samples", samples, "Frame samples (>= 128)");
  frame_cmd->add_option("-o,--out", out, "Output file (default stdout)");

  auto* eval_cmd = app.add_subcommand("eval", "Evaluate velocity and pressure at points");
  eval_cmd->add_option("geometry", geom, "Geometry JSON file or built-in name")->required();
  eval_cmd->add_option("force", force, "Force JSON file or built-in name")->required();
  eval_cmd->add_option("points", points, "CSV of x,y,z rows")->required();
  eval_cmd->add_option("--eps", eps, "Fiber radius")->required();
  eval_cmd->add_option("--tol", tol, "Quadrature target relative tolerance");
  eval_cmd->add_option("-o,--out", out, "Output file (default stdout)");

  auto* res_cmd = app.add_subcommand("residuals", "Cross-section residual diagnostics");
  res_cmd->add_option("geometry", geom, "Geometry JSON file or built-in name")->required();
  res_cmd->add_option("force", force, "Force JSON file or built-in name")->required();
  res_cmd->add_option("--eps", eps, "Fiber radius")->required();
  res_cmd->add_option("--ntheta", n_theta, "Theta nodes per cross section");
  res_cmd->add_option("--ns", n_s, "Number of cross sections");
  res_cmd->add_option("--out-dir", out_dir, "Directory for cross_sections.json and residuals_summary.csv");

  auto* sweep_cmd = app.add_subcommand("sweep", "Run an epsilon sweep and write report.json / sweep.csv");
  sweep_cmd->add_option("config", config, "Experiment config JSON")->required();
  sweep_cmd->add_option("--out-dir", out_dir, "Override the config's output_dir");

  auto* lemma_cmd = app.add_subcommand("verify-lemmas", "Check the d_mn reference integrals");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*frame_cmd) return cmd_frame(geom, samples, out);
    if (*eval_cmd) return cmd_eval(geom, force, points, eps, tol, out);
    if (*res_cmd) return cmd_residuals(geom, force, eps, n_theta, n_s, out_dir);
    if (*sweep_cmd) return cmd_sweep(config, out_dir);
    if (*lemma_cmd) return cmd_verify_lemmas();
  } catch (const sbt::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return e.exit_code();
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
