#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <openssl/evp.h>

#include <json.hpp>

#include "errors.hpp"
#include "geometry.hpp"
#include "parallel.hpp"
#include "quadrature.hpp"
#include "residuals.hpp"
#include "slender_body.hpp"

namespace sbt {

inline constexpr const char* kToolkitVersion = "0.1.0";

using json = nlohmann::json;

// ---------------------------------------------------------------- modes I/O

inline Vec3 vec3_from_json(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 3) throw ConfigInvalid(std::string(what) + " must be a 3-vector");
  Vec3 v;
  for (int i = 0; i < 3; ++i) {
    if (!j[i].is_number()) throw ConfigInvalid(std::string(what) + " must hold numbers");
    v[i] = j[i].get<double>();
  }
  return v;
}

inline json vec3_to_json(const Vec3& v) { return json::array({v[0], v[1], v[2]}); }

/// {"modes": [{"k": int, "cos": [x,y,z], "sin": [x,y,z]}, ...]}
inline std::vector<FourierMode> modes_from_json(const json& j) {
  if (!j.is_object() || !j.contains("modes") || !j["modes"].is_array())
    throw ConfigInvalid("expected an object with a \"modes\" array");
  std::vector<FourierMode> out;
  for (const auto& m : j["modes"]) {
    if (!m.is_object() || !m.contains("k") || !m["k"].is_number_integer())
      throw ConfigInvalid("every mode needs an integer \"k\"");
    FourierMode fm;
    fm.k = m["k"].get<int>();
    if (fm.k < 0) throw ConfigInvalid("mode wavenumber must be >= 0");
    if (m.contains("cos")) fm.cos = vec3_from_json(m["cos"], "mode cos");
    if (m.contains("sin")) fm.sin = vec3_from_json(m["sin"], "mode sin");
    out.push_back(fm);
  }
  if (out.empty()) throw ConfigInvalid("\"modes\" is empty");
  return out;
}

inline json modes_to_json(std::span<const FourierMode> modes) {
  json arr = json::array();
  for (const auto& m : modes) arr.push_back({{"k", m.k}, {"cos", vec3_to_json(m.cos)}, {"sin", vec3_to_json(m.sin)}});
  return {{"modes", arr}};
}

inline json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigInvalid("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigInvalid(path.string() + ": " + e.what());
  }
}

// ------------------------------------------------------ built-in test cases

/// Named centerlines: "circle" (planar), "wavy-ring" and "fourier-knot"
/// (trefoil), both nonplanar.
inline std::vector<FourierMode> named_geometry(const std::string& name) {
  if (name == "circle") return {{1, Vec3(1, 0, 0), Vec3(0, 1, 0)}};
  if (name == "wavy-ring")
    return {{1, Vec3(1, 0, 0), Vec3(0, 1, 0)}, {2, Vec3(0.1, 0, 0.25), Vec3(0, 0.1, 0.15)}};
  if (name == "fourier-knot")
    return {{1, Vec3(0, 1, 0), Vec3(1, 0, 0)}, {2, Vec3(0, -2, 0), Vec3(2, 0, 0)}, {3, Vec3::Zero(), Vec3(0, 0, -1)}};
  throw ConfigInvalid("unknown geometry name \"" + name + "\"");
}

/// Named forces: "constant" (0,0,1), "constant-inplane" (1,0,0), "harmonic".
inline std::vector<FourierMode> named_force(const std::string& name) {
  if (name == "constant") return {{0, Vec3(0, 0, 1), Vec3::Zero()}};
  if (name == "constant-inplane") return {{0, Vec3(1, 0, 0), Vec3::Zero()}};
  if (name == "harmonic")
    return {{0, Vec3(1, 0, 1), Vec3::Zero()}, {1, Vec3(0.5, 0, 0), Vec3(0, 0.3, 0)}, {2, Vec3(0, 0, 0.5), Vec3::Zero()}};
  if (name == "zero") return {{0, Vec3::Zero(), Vec3::Zero()}};
  throw ConfigInvalid("unknown force name \"" + name + "\"");
}

/// A geometry or force entry: a name string, {"name": ...} or {"modes": [...]}.
inline std::vector<FourierMode> resolve_modes(const json& j, bool is_force) {
  const auto by_name = [&](const std::string& n) { return is_force ? named_force(n) : named_geometry(n); };
  if (j.is_string()) return by_name(j.get<std::string>());
  if (j.is_object() && j.contains("name") && j["name"].is_string()) return by_name(j["name"].get<std::string>());
  return modes_from_json(j);
}

// ------------------------------------------------------------ configuration

struct ExperimentConfig {
  json geometry = "circle";
  json force = "constant";
  std::vector<double> eps_list;  // empty: default octave list
  std::optional<int> base_nodes;
  std::optional<double> near_window;
  int near_refinement_levels = 5;
  double target_rel_tol = 1e-10;
  int n_theta = 64;
  int n_s = 64;
  int centerline_samples = 256;
  int frame_samples = 1024;
  std::string output_dir = "sbt_out";
  std::uint64_t seed = 0;

  static ExperimentConfig from_json(const json& j) {
    if (!j.is_object()) throw ConfigInvalid("config must be a JSON object");
    ExperimentConfig c;
    try {
      if (j.contains("geometry")) c.geometry = j["geometry"];
      if (j.contains("force")) c.force = j["force"];
      if (j.contains("eps_list")) c.eps_list = j["eps_list"].get<std::vector<double>>();
      if (j.contains("quadrature")) {
        const json& q = j["quadrature"];
        if (q.contains("base_nodes")) c.base_nodes = q["base_nodes"].get<int>();
        if (q.contains("near_window")) c.near_window = q["near_window"].get<double>();
        if (q.contains("near_refinement_levels")) c.near_refinement_levels = q["near_refinement_levels"].get<int>();
        if (q.contains("target_rel_tol")) c.target_rel_tol = q["target_rel_tol"].get<double>();
      }
      if (j.contains("n_theta")) c.n_theta = j["n_theta"].get<int>();
      if (j.contains("n_s")) c.n_s = j["n_s"].get<int>();
      if (j.contains("centerline_samples")) c.centerline_samples = j["centerline_samples"].get<int>();
      if (j.contains("frame_samples")) c.frame_samples = j["frame_samples"].get<int>();
      if (j.contains("output_dir")) c.output_dir = j["output_dir"].get<std::string>();
      if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    } catch (const json::exception& e) {
      throw ConfigInvalid(std::string("config: ") + e.what());
    }
    c.validate();
    return c;
  }

  void validate() const {
    resolve_modes(geometry, false);
    resolve_modes(force, true);
    if (!eps_list.empty() && eps_list.size() < 3) throw ConfigInvalid("eps_list needs at least 3 entries for slope fits");
    for (double e : eps_list)
      if (!(e > 0.0)) throw ConfigInvalid("eps_list entries must be positive");
    if (n_theta < 32) throw ConfigInvalid("n_theta must be >= 32");
    if (n_s < 1) throw ConfigInvalid("n_s must be >= 1");
    if (centerline_samples < Centerline::kMinSamples) throw ConfigInvalid("centerline_samples must be >= 64");
    if (frame_samples < Frame::kMinSamples) throw ConfigInvalid("frame_samples must be >= 128");
    quadrature_for(eps_list.empty() ? 0.01 : eps_list.front()).validate();
  }

  QuadratureSpec quadrature_for(double eps) const {
    QuadratureSpec q = QuadratureSpec::for_epsilon(eps, target_rel_tol);
    if (base_nodes) q.base_nodes = *base_nodes;
    if (near_window) q.near_window = *near_window;
    q.near_refinement_levels = near_refinement_levels;
    return q;
  }

  /// Fully expanded form (names resolved, defaults filled) used for hashing.
  json to_json() const {
    json q = {{"near_refinement_levels", near_refinement_levels}, {"target_rel_tol", target_rel_tol}};
    q["base_nodes"] = base_nodes ? json(*base_nodes) : json("max(256, ceil(8/eps))");
    q["near_window"] = near_window ? json(*near_window) : json("min(1/8, 64 eps)");
    return {{"geometry", modes_to_json(resolve_modes(geometry, false))},
            {"geometry_spec", geometry},
            {"force", modes_to_json(resolve_modes(force, true))},
            {"force_spec", force},
            {"eps_list", eps_list},
            {"quadrature", q},
            {"n_theta", n_theta},
            {"n_s", n_s},
            {"centerline_samples", centerline_samples},
            {"frame_samples", frame_samples},
            {"output_dir", output_dir},
            {"seed", seed}};
  }
};

/// {2^-5, ..., 2^-10}, halved as a whole until every entry is below r_max/4.
inline std::vector<double> default_eps_list(const Frame& fr) {
  std::vector<double> eps;
  for (int k = 5; k <= 10; ++k) eps.push_back(std::ldexp(1.0, -k));
  while (eps.front() >= fr.max_admissible_epsilon())
    for (double& e : eps) e *= 0.5;
  return eps;
}

// ------------------------------------------------------------------ hashing

inline std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw Error("SHA-256 digest failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xF]);
  }
  return out;
}

/// SHA-256 of the compact dump; nlohmann objects keep keys sorted.
inline std::string config_hash(const json& canonical) { return sha256_hex(canonical.dump()); }

// -------------------------------------------------------------- slope fits

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

/// Ordinary least squares y = slope x + intercept.
inline LinearFit fit_slope(std::span<const std::pair<double, double>> points) {
  if (points.size() < 3) throw DegenerateFit("slope fit needs at least 3 points");
  const double n = static_cast<double>(points.size());
  double mx = 0.0, my = 0.0;
  for (const auto& [x, y] : points) {
    mx += x;
    my += y;
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& [x, y] : points) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
    syy += (y - my) * (y - my);
  }
  if (sxx / n < 1e-14) throw DegenerateFit("x variance below 1e-14");
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss_res = 0.0;
  for (const auto& [x, y] : points) {
    const double r = y - (f.slope * x + f.intercept);
    ss_res += r * r;
  }
  f.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  return f;
}

/// Regressors for rate fits.
inline double log_eps(double eps) { return std::log(eps); }
inline double log_eps_log(double eps) { return std::log(eps * std::abs(std::log(eps))); }

// ------------------------------------------------------------------- sweeps

struct EpsRecord {
  double eps = 0.0;
  std::string status = "ok";
  std::string message;
  int base_nodes = 0;
  double near_window = 0.0;
  double ur_max = 0.0;
  double ur_l2 = 0.0;
  double force_residual_max = 0.0;
  double force_residual_l2 = 0.0;
  double centerline_residual_max = 0.0;
  // max over s of |f_p - lim|, |f_1 - lim|, |f_2|, |f_3|, |f_4|
  std::array<double, 5> component_deviation{};
  double closure_max = 0.0;
  double closure_rel_max = 0.0;
  double runtime_seconds = 0.0;
};

inline constexpr std::array<const char*, 5> kComponentNames = {"pressure", "f1", "f2", "f3", "f4"};

struct SlopeRecord {
  std::string quantity;
  std::string regressor;  // "log(eps)" or "log(eps|log eps|)"
  int n_points = 0;
  std::optional<LinearFit> fit;
  std::string message;
};

struct FieldCheck {
  Vec3 point;
  double distance = 0.0;
  double trace_rel = 0.0;  // |tr grad u| / |grad u|
};

struct SweepReport {
  ExperimentConfig config;
  json config_json;
  std::string config_hash;
  double r_max = 0.0;
  double kappa3 = 0.0;
  double c_gamma = 0.0;
  double kappa_max = 0.0;
  std::vector<EpsRecord> records;
  std::vector<SlopeRecord> slopes;
  std::vector<FieldCheck> field_checks;
  double runtime_seconds = 0.0;
  int threads = 1;

  const SlopeRecord* slope(const std::string& quantity) const {
    for (const auto& s : slopes)
      if (s.quantity == quantity) return &s;
    return nullptr;
  }

  /// Everything except timings and thread count.
  json payload() const {
    json recs = json::array();
    for (const auto& r : records) {
      json comp = json::object();
      for (std::size_t i = 0; i < 5; ++i) comp[kComponentNames[i]] = r.component_deviation[i];
      recs.push_back({{"eps", r.eps},
                      {"status", r.status},
                      {"message", r.message},
                      {"base_nodes", r.base_nodes},
                      {"near_window", r.near_window},
                      {"ur_max", r.ur_max},
                      {"ur_l2", r.ur_l2},
                      {"force_residual_max", r.force_residual_max},
                      {"force_residual_l2", r.force_residual_l2},
                      {"centerline_residual_max", r.centerline_residual_max},
                      {"component_deviation_max", comp},
                      {"closure_max", r.closure_max},
                      {"closure_rel_max", r.closure_rel_max}});
    }
    json sl = json::array();
    for (const auto& s : slopes) {
      json e = {{"quantity", s.quantity}, {"regressor", s.regressor}, {"n_points", s.n_points}};
      if (s.fit) {
        e["slope"] = s.fit->slope;
        e["intercept"] = s.fit->intercept;
        e["r_squared"] = s.fit->r_squared;
      } else {
        e["slope"] = nullptr;
        e["message"] = s.message;
      }
      sl.push_back(e);
    }
    json fc = json::array();
    for (const auto& f : field_checks)
      fc.push_back({{"point", vec3_to_json(f.point)}, {"distance", f.distance}, {"trace_rel", f.trace_rel}});
    return {{"geometry", {{"r_max", r_max}, {"kappa3", kappa3}, {"c_gamma", c_gamma}, {"kappa_max", kappa_max}}},
            {"records", recs},
            {"slopes", sl},
            {"field_checks", fc}};
  }

  json to_json() const {
    json rt = json::array();
    for (const auto& r : records) rt.push_back({{"eps", r.eps}, {"seconds", r.runtime_seconds}});
    return {{"toolkit_version", kToolkitVersion},
            {"config_hash", config_hash},
            {"config", config_json},
            {"payload", payload()},
            {"runtime", {{"total_seconds", runtime_seconds}, {"threads", threads}, {"per_eps", rt}}}};
  }
};

namespace detail {

inline SlopeRecord fit_quantity(const std::vector<EpsRecord>& recs, const std::string& name, bool log_corrected,
                                double (*value)(const EpsRecord&)) {
  SlopeRecord s;
  s.quantity = name;
  s.regressor = log_corrected ? "log(eps|log eps|)" : "log(eps)";
  std::vector<std::pair<double, double>> pts;
  for (const auto& r : recs) {
    if (r.status != "ok") continue;
    const double v = value(r);
    if (!(v > 0.0)) continue;
    pts.emplace_back(log_corrected ? log_eps_log(r.eps) : log_eps(r.eps), std::log(v));
  }
  s.n_points = static_cast<int>(pts.size());
  try {
    s.fit = fit_slope(pts);
  } catch (const DegenerateFit& e) {
    s.message = e.what();
  }
  return s;
}

}  // namespace detail

/// Runs every cross section s_j = j / n_s for every eps, fits the rates and
/// assembles the report. (eps, s) tasks run in parallel; reduction is in
/// index order, so the payload does not depend on the thread count.
inline SweepReport run_sweep(const ExperimentConfig& cfg, int threads = thread_count()) {
  const auto t_start = std::chrono::steady_clock::now();
  cfg.validate();
  const auto geom_modes = resolve_modes(cfg.geometry, false);
  const auto force_modes = resolve_modes(cfg.force, true);
  const Centerline curve = Centerline::build(geom_modes, cfg.centerline_samples);
  const Frame frame = Frame::build(curve, cfg.frame_samples);
  const ForceDensity force = ForceDensity::from_modes(force_modes);

  SweepReport rep;
  rep.config = cfg;
  rep.config.eps_list = cfg.eps_list.empty() ? default_eps_list(frame) : cfg.eps_list;
  for (double e : rep.config.eps_list) frame.check_epsilon(e);
  rep.config_json = rep.config.to_json();
  rep.config_hash = config_hash(rep.config_json);
  rep.r_max = frame.r_max();
  rep.kappa3 = frame.kappa3();
  rep.c_gamma = curve.c_gamma();
  rep.kappa_max = curve.kappa_max();
  rep.threads = threads;

  const auto& eps_list = rep.config.eps_list;
  const std::size_t n_eps = eps_list.size();
  const auto n_s = static_cast<std::size_t>(cfg.n_s);
  std::vector<SlenderBody> bodies;
  bodies.reserve(n_eps);
  for (double e : eps_list) bodies.emplace_back(frame, force, e, cfg.quadrature_for(e));

  struct Slot {
    std::optional<CrossSectionReport> report;
    std::string error;
    double seconds = 0.0;
  };
  std::vector<Slot> slots(n_eps * n_s);
  parallel_for(
      slots.size(),
      [&](std::size_t idx) {
        const std::size_t ie = idx / n_s, js = idx % n_s;
        const auto t0 = std::chrono::steady_clock::now();
        try {
          slots[idx].report = cross_section(bodies[ie], static_cast<double>(js) / n_s, cfg.n_theta);
        } catch (const ToleranceNotMet& e) {
          slots[idx].error = e.what();
        }
        slots[idx].seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      },
      threads);

  for (std::size_t ie = 0; ie < n_eps; ++ie) {
    EpsRecord r;
    r.eps = eps_list[ie];
    r.base_nodes = bodies[ie].spec().base_nodes;
    r.near_window = bodies[ie].spec().near_window;
    double ur2 = 0.0, fr2 = 0.0;
    for (std::size_t js = 0; js < n_s; ++js) {
      const Slot& sl = slots[ie * n_s + js];
      r.runtime_seconds += sl.seconds;
      if (!sl.report) {
        if (r.status == "ok") {
          r.status = "tolerance_not_met";
          r.message = sl.error;
        }
        continue;
      }
      const CrossSectionReport& cs = *sl.report;
      const auto lim = component_limits(frame, cs.f_true, cs.s);
      r.ur_max = std::max(r.ur_max, cs.ur_max);
      ur2 += cs.ur_max * cs.ur_max;
      r.force_residual_max = std::max(r.force_residual_max, cs.force_residual());
      fr2 += cs.force_residual() * cs.force_residual();
      r.centerline_residual_max = std::max(r.centerline_residual_max, cs.centerline_residual_max);
      const std::array<double, 5> dev = {(cs.components.pressure - lim.pressure).norm(),
                                         (cs.components.f1 - lim.f1).norm(), cs.components.f2.norm(),
                                         cs.components.f3.norm(), cs.components.f4.norm()};
      for (std::size_t i = 0; i < 5; ++i) r.component_deviation[i] = std::max(r.component_deviation[i], dev[i]);
      r.closure_max = std::max(r.closure_max, cs.closure);
      const double fsn = cs.f_sb.norm();
      r.closure_rel_max = std::max(r.closure_rel_max, fsn > 0.0 ? cs.closure / fsn : cs.closure);
    }
    r.ur_l2 = std::sqrt(ur2 / static_cast<double>(n_s));
    r.force_residual_l2 = std::sqrt(fr2 / static_cast<double>(n_s));
    rep.records.push_back(r);
  }

  using detail::fit_quantity;
  rep.slopes.push_back(fit_quantity(rep.records, "ur_max", true, [](const EpsRecord& r) { return r.ur_max; }));
  rep.slopes.push_back(fit_quantity(rep.records, "force_residual_max", false,
                                    [](const EpsRecord& r) { return r.force_residual_max; }));
  rep.slopes.push_back(fit_quantity(rep.records, "centerline_residual_max", true,
                                    [](const EpsRecord& r) { return r.centerline_residual_max; }));
  rep.slopes.push_back(fit_quantity(rep.records, "component_pressure", false,
                                    [](const EpsRecord& r) { return r.component_deviation[0]; }));
  rep.slopes.push_back(fit_quantity(rep.records, "component_f1", false,
                                    [](const EpsRecord& r) { return r.component_deviation[1]; }));
  rep.slopes.push_back(fit_quantity(rep.records, "component_f2", false,
                                    [](const EpsRecord& r) { return r.component_deviation[2]; }));
  rep.slopes.push_back(fit_quantity(rep.records, "component_f3", false,
                                    [](const EpsRecord& r) { return r.component_deviation[3]; }));
  rep.slopes.push_back(fit_quantity(rep.records, "component_f4", false,
                                    [](const EpsRecord& r) { return r.component_deviation[4]; }));

  // Seeded incompressibility spot checks at the smallest radius.
  const SlenderBody& smallest = bodies[std::min_element(eps_list.begin(), eps_list.end()) - eps_list.begin()];
  std::mt19937_64 rng(cfg.seed);
  const double e = smallest.epsilon();
  for (int i = 0; i < 8; ++i) {
    const double s = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    const double th = kTwoPi * static_cast<double>(rng() >> 11) * 0x1.0p-53;
    const double rho = e * (1.0 + 3.0 * static_cast<double>(rng() >> 11) * 0x1.0p-53);
    const CurvePoint p = curve.point(s);
    const Triad tri = frame.triad_at(p, s);
    const Vec3 x = p.x + rho * (std::cos(th) * tri.n1 + std::sin(th) * tri.n2);
    try {
      const Mat3 g = smallest.velocity_gradient(x);
      rep.field_checks.push_back({x, rho, std::abs(g.trace()) / g.norm()});
    } catch (const ToleranceNotMet&) {
      rep.field_checks.push_back({x, rho, std::nan("")});
    }
  }

  rep.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return rep;
}

// ---------------------------------------------------------------- persistence

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw ConfigInvalid("cannot write " + path.string());
  out << text;
}

inline std::string sweep_csv(const SweepReport& rep) {
  std::ostringstream os;
  os << "eps,status,ur_max,ur_l2,force_residual_max,force_residual_l2,centerline_residual_max,"
        "dev_pressure,dev_f1,mag_f2,mag_f3,mag_f4,closure_max,runtime_s\n";
  for (const auto& r : rep.records) {
    os << format_double(r.eps) << ',' << r.status << ',' << format_double(r.ur_max) << ',' << format_double(r.ur_l2)
       << ',' << format_double(r.force_residual_max) << ',' << format_double(r.force_residual_l2) << ','
       << format_double(r.centerline_residual_max);
    for (double d : r.component_deviation) os << ',' << format_double(d);
    os << ',' << format_double(r.closure_max) << ',' << format_double(r.runtime_seconds) << '\n';
  }
  return os.str();
}

/// Writes report.json and sweep.csv into `dir` (created if missing).
inline void write_report(const SweepReport& rep, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_text(dir / "report.json", rep.to_json().dump(2) + "\n");
  write_text(dir / "sweep.csv", sweep_csv(rep));
}

// ------------------------------------------------------------------ lemmas

struct LemmaCheck {
  std::string name;
  double expected = 0.0;
  double computed = 0.0;
  double abs_error = 0.0;
  bool pass = false;
};

struct LemmaReport {
  std::vector<LemmaCheck> checks;
  double tolerance = 1e-8;
  bool all_pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const LemmaCheck& c) { return c.pass; });
  }
  json to_json() const {
    json arr = json::array();
    for (const auto& c : checks)
      arr.push_back({{"name", c.name}, {"expected", c.expected}, {"computed", c.computed}, {"abs_error", c.abs_error},
                     {"pass", c.pass}});
    return {{"tolerance", tolerance}, {"checks", arr}, {"all_pass", all_pass()}};
  }
};

/// n!! for n >= -1.
inline double double_factorial(int n) {
  double r = 1.0;
  for (int k = n; k > 1; k -= 2) r *= k;
  return r;
}

inline double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

/// d_mn from the d_0n values: tau^m = ((tau^2 + 1) - 1)^(m/2) gives
/// d_mn = sum_k (-1)^k C(m/2, k) d_{0, n - m + 2k}.
inline double dmn_by_expansion(int m, int n) {
  double acc = 0.0;
  for (int k = 0; k <= m / 2; ++k) acc += (k % 2 ? -1.0 : 1.0) * binomial(m / 2, k) * dmn_integral(0, n - m + 2 * k);
  return acc;
}

/// Tabulated d_mn values, the d_0n double-factorial formula and the
/// binomial expansion, each against the quadrature value.
inline LemmaReport verify_lemmas(double tol = 1e-8) {
  LemmaReport rep;
  rep.tolerance = tol;
  const auto add = [&](std::string name, double expected, double computed) {
    const double err = std::abs(expected - computed);
    rep.checks.push_back({std::move(name), expected, computed, err, err <= tol});
  };
  const std::array<std::tuple<int, int, double>, 5> table = {
      {{0, 3, 2.0}, {0, 5, 4.0 / 3.0}, {0, 7, 16.0 / 15.0}, {2, 5, 2.0 / 3.0}, {2, 7, 4.0 / 15.0}}};
  for (const auto& [m, n, v] : table)
    add("d_" + std::to_string(m) + std::to_string(n), v, dmn_integral(m, n));
  for (int n : {3, 5, 7, 9})
    add("d_0" + std::to_string(n) + " double factorial", 2.0 * double_factorial(n - 3) / double_factorial(n - 2),
        dmn_integral(0, n));
  for (const auto& [m, n] : {std::pair{2, 5}, {2, 7}, {4, 7}, {4, 9}})
    add("d_" + std::to_string(m) + std::to_string(n) + " binomial expansion", dmn_by_expansion(m, n),
        dmn_integral(m, n));
  return rep;
}

// -------------------------------------------------------------- tabular I/O

/// Frame samples as CSV with a "# kappa3=<value>" header line.
inline std::string frame_csv(const Frame& fr) {
  std::ostringstream os;
  os << "# kappa3=" << format_double(fr.kappa3()) << '\n';
  os << "s,etx,ety,etz,en1x,en1y,en1z,en2x,en2y,en2z,kappa1,kappa2\n";
  const auto samples = fr.samples();
  for (std::size_t j = 0; j < samples.size(); ++j) {
    const Triad& t = samples[j];
    os << format_double(static_cast<double>(j) / samples.size());
    for (const Vec3* v : {&t.t, &t.n1, &t.n2})
      for (int i = 0; i < 3; ++i) os << ',' << format_double((*v)[i]);
    os << ',' << format_double(fr.kappa1_samples()[j]) << ',' << format_double(fr.kappa2_samples()[j]) << '\n';
  }
  return os.str();
}

/// Points CSV: one "x,y,z" per line; blank lines, '#' comments and a header
/// row starting with a letter are skipped.
inline std::vector<Vec3> parse_points_csv(std::istream& in) {
  std::vector<Vec3> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#' || std::isalpha(static_cast<unsigned char>(line[first])))
      continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    Vec3 v;
    if (!(ls >> v[0] >> v[1] >> v[2])) throw ConfigInvalid("points CSV line " + std::to_string(lineno) + " is malformed");
    out.push_back(v);
  }
  return out;
}

}  // namespace sbt
