#include "uot/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <json.hpp>

#include "uot/errors.hpp"
#include "uot/linearized.hpp"

namespace uot {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double to_double(const std::string& v, const std::string& key) {
  try {
    std::size_t pos = 0;
    double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': bad number '" + v + "'");
  }
}

long to_long(const std::string& v, const std::string& key) {
  try {
    std::size_t pos = 0;
    long x = std::stol(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': bad integer '" + v + "'");
  }
}

bool to_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("config key '" + key + "': bad boolean '" + v + "'");
}

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  std::size_t b = s.find_last_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  return s.substr(a, b - a + 1);
}

ReconConfig make_recon_config(const ExperimentConfig& c) {
  ReconConfig rc;
  rc.max_iters = c.recon_max_iters;
  rc.rel_change_tol = c.recon_tol;
  rc.relaxation = c.recon_relaxation;
  rc.mu_min = c.recon_mu_min;
  rc.mu_max = c.recon_mu_max;
  rc.smooth_measurements = c.recon_smooth;
  rc.cg.tol = c.cg_tol;
  rc.cg.max_iter = c.cg_max_iter;
  return rc;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (!(mu_bar > 0.0) || !(mus_prime > 0.0) || !(gamma > 0.0) ||
      !(alpha > 0.0)) {
    throw ConfigError("config: physical constants must be positive");
  }
  if (noise_level < 0.0) {
    throw ConfigError("config: noise_level must be >= 0");
  }
  parse_phantom_case(phantom);
  parse_edge(source_edge);
  if (shape != "gaussian" && shape != "perfect") {
    throw ConfigError("config: shape must be 'gaussian' or 'perfect'");
  }
  if (shape == "gaussian" && (!(sigma1 > 0.0) || !(sigma2 > 0.0))) {
    throw ConfigError("config: sigmas must be positive");
  }
  if (measurement_path != "direct" && measurement_path != "adjoint" &&
      measurement_path != "both") {
    throw ConfigError(
        "config: measurement_path must be direct, adjoint or both");
  }
  if (nx_forward == nx_recon && ny_forward == ny_recon &&
      !allow_inverse_crime) {
    throw ConfigError(
        "config: forward and reconstruction grids coincide; set "
        "allow_inverse_crime=true to override the inverse-crime guard");
  }
  // constructor-level checks for grids and scan region
  RegularGrid fwd = build_grid(nx_forward, ny_forward, x0, y0, lx, ly);
  RegularGrid rec = build_grid(nx_recon, ny_recon, x0, y0, lx, ly);
  make_scan_grid(fwd.domain(), {scan_x0, scan_y0, scan_x1, scan_y1}, scan_n1,
                 scan_n2);
  (void)rec;
  make_recon_config(*this).validate();
  if (!(cg_tol > 0.0 && cg_tol < 1.0)) {
    throw ConfigError("config: cg_tol must be in (0, 1)");
  }
}

std::map<std::string, std::string> ExperimentConfig::as_key_values() const {
  std::map<std::string, std::string> kv;
  kv["nx_forward"] = std::to_string(nx_forward);
  kv["ny_forward"] = std::to_string(ny_forward);
  kv["nx_recon"] = std::to_string(nx_recon);
  kv["ny_recon"] = std::to_string(ny_recon);
  kv["x0"] = fmt_double(x0);
  kv["y0"] = fmt_double(y0);
  kv["lx"] = fmt_double(lx);
  kv["ly"] = fmt_double(ly);
  kv["phantom"] = phantom;
  kv["mu_bar"] = fmt_double(mu_bar);
  kv["mus_prime"] = fmt_double(mus_prime);
  kv["gamma"] = fmt_double(gamma);
  kv["alpha"] = fmt_double(alpha);
  kv["source_edge"] = source_edge;
  kv["source_magnitude"] = fmt_double(source_magnitude);
  kv["eta_x"] = fmt_double(eta_x);
  kv["eta_y"] = fmt_double(eta_y);
  kv["scan_x0"] = fmt_double(scan_x0);
  kv["scan_y0"] = fmt_double(scan_y0);
  kv["scan_x1"] = fmt_double(scan_x1);
  kv["scan_y1"] = fmt_double(scan_y1);
  kv["scan_n1"] = std::to_string(scan_n1);
  kv["scan_n2"] = std::to_string(scan_n2);
  kv["shape"] = shape;
  kv["sigma1"] = fmt_double(sigma1);
  kv["sigma2"] = fmt_double(sigma2);
  kv["measurement_path"] = measurement_path;
  kv["noise_level"] = fmt_double(noise_level);
  kv["noise_seed"] = std::to_string(noise_seed);
  kv["recon_max_iters"] = std::to_string(recon_max_iters);
  kv["recon_tol"] = fmt_double(recon_tol);
  kv["recon_relaxation"] = fmt_double(recon_relaxation);
  kv["recon_mu_min"] = fmt_double(recon_mu_min);
  kv["recon_mu_max"] = fmt_double(recon_mu_max);
  kv["recon_smooth"] = recon_smooth ? "true" : "false";
  kv["cg_tol"] = fmt_double(cg_tol);
  kv["cg_max_iter"] = std::to_string(cg_max_iter);
  kv["output_dir"] = output_dir;
  kv["save_iterates"] = save_iterates ? "true" : "false";
  kv["allow_inverse_crime"] = allow_inverse_crime ? "true" : "false";
  return kv;
}

void apply_config_key(ExperimentConfig& c, const std::string& key,
                      const std::string& value) {
  if (key == "nx_forward") c.nx_forward = static_cast<int>(to_long(value, key));
  else if (key == "ny_forward") c.ny_forward = static_cast<int>(to_long(value, key));
  else if (key == "nx_recon") c.nx_recon = static_cast<int>(to_long(value, key));
  else if (key == "ny_recon") c.ny_recon = static_cast<int>(to_long(value, key));
  else if (key == "x0") c.x0 = to_double(value, key);
  else if (key == "y0") c.y0 = to_double(value, key);
  else if (key == "lx") c.lx = to_double(value, key);
  else if (key == "ly") c.ly = to_double(value, key);
  else if (key == "phantom") c.phantom = value;
  else if (key == "mu_bar") c.mu_bar = to_double(value, key);
  else if (key == "mus_prime") c.mus_prime = to_double(value, key);
  else if (key == "gamma") c.gamma = to_double(value, key);
  else if (key == "alpha") c.alpha = to_double(value, key);
  else if (key == "source_edge") c.source_edge = value;
  else if (key == "source_magnitude") c.source_magnitude = to_double(value, key);
  else if (key == "eta_x") c.eta_x = to_double(value, key);
  else if (key == "eta_y") c.eta_y = to_double(value, key);
  else if (key == "scan_x0") c.scan_x0 = to_double(value, key);
  else if (key == "scan_y0") c.scan_y0 = to_double(value, key);
  else if (key == "scan_x1") c.scan_x1 = to_double(value, key);
  else if (key == "scan_y1") c.scan_y1 = to_double(value, key);
  else if (key == "scan_n1") c.scan_n1 = static_cast<int>(to_long(value, key));
  else if (key == "scan_n2") c.scan_n2 = static_cast<int>(to_long(value, key));
  else if (key == "shape") c.shape = value;
  else if (key == "sigma1") c.sigma1 = to_double(value, key);
  else if (key == "sigma2") c.sigma2 = to_double(value, key);
  else if (key == "measurement_path") c.measurement_path = value;
  else if (key == "noise_level") c.noise_level = to_double(value, key);
  else if (key == "noise_seed") c.noise_seed = static_cast<std::uint64_t>(to_long(value, key));
  else if (key == "recon_max_iters") c.recon_max_iters = static_cast<int>(to_long(value, key));
  else if (key == "recon_tol") c.recon_tol = to_double(value, key);
  else if (key == "recon_relaxation") c.recon_relaxation = to_double(value, key);
  else if (key == "recon_mu_min") c.recon_mu_min = to_double(value, key);
  else if (key == "recon_mu_max") c.recon_mu_max = to_double(value, key);
  else if (key == "recon_smooth") c.recon_smooth = to_bool(value, key);
  else if (key == "cg_tol") c.cg_tol = to_double(value, key);
  else if (key == "cg_max_iter") c.cg_max_iter = static_cast<int>(to_long(value, key));
  else if (key == "output_dir") c.output_dir = value;
  else if (key == "save_iterates") c.save_iterates = to_bool(value, key);
  else if (key == "allow_inverse_crime") c.allow_inverse_crime = to_bool(value, key);
  else throw ConfigError("unknown config key '" + key + "'");
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open config file '" + path + "'");
  ExperimentConfig c;
  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    std::size_t eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path + ":" + std::to_string(lineno) +
                        ": expected key=value");
    }
    apply_config_key(c, trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
  }
  return c;
}

ExperimentConfig preset_config(const std::string& name) {
  ExperimentConfig c;
  c.output_dir = "out_" + name;
  if (name == "disk_low") {
    c.phantom = "disk_low";
    c.recon_max_iters = 40;
  } else if (name == "disk_high") {
    c.phantom = "disk_high";
    c.recon_max_iters = 70;
  } else if (name == "multi") {
    c.phantom = "multi";
    c.recon_max_iters = 40;
  } else if (name == "elongated") {
    // sharp focus in x, elongated in y; reconstruction unchanged
    c.phantom = "disk_low";
    c.sigma1 = 0.1;
    c.sigma2 = 0.3;
    c.recon_max_iters = 40;
  } else {
    throw ConfigError("unknown preset '" + name + "'");
  }
  return c;
}

namespace {

struct Stage {
  RegularGrid forward_grid;
  RegularGrid recon_grid;
  NodalField truth;  // on the forward grid
  OpticalCoefficients coeffs;
  SourceSpec src;
  ScanGrid scan;
  UltrasoundShape us_shape;
  std::array<double, 2> eta{};
  ForwardOptions fopts;
};

Stage make_stage(const ExperimentConfig& c) {
  Stage s;
  s.forward_grid = build_grid(c.nx_forward, c.ny_forward, c.x0, c.y0, c.lx,
                              c.ly);
  s.recon_grid = build_grid(c.nx_recon, c.ny_recon, c.x0, c.y0, c.lx, c.ly);
  s.truth = make_phantom(parse_phantom_case(c.phantom), s.forward_grid,
                         c.mu_bar);
  s.coeffs = OpticalCoefficients{s.truth, c.mus_prime, c.gamma};
  s.src = SourceSpec{parse_edge(c.source_edge), c.source_magnitude};
  s.scan = make_scan_grid(s.forward_grid.domain(),
                          {c.scan_x0, c.scan_y0, c.scan_x1, c.scan_y1},
                          c.scan_n1, c.scan_n2);
  s.us_shape = c.shape == "perfect"
                   ? UltrasoundShape::perfect_focus()
                   : UltrasoundShape::gaussian(c.sigma1, c.sigma2);
  s.eta = {c.eta_x, c.eta_y};
  s.fopts.alpha = c.alpha;
  s.fopts.cg.tol = c.cg_tol;
  s.fopts.cg.max_iter = c.cg_max_iter;
  return s;
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir + "'");
}

}  // namespace

void run_phantom_stage(const ExperimentConfig& c) {
  c.validate();
  ensure_dir(c.output_dir);
  Stage s = make_stage(c);
  write_field_csv(s.truth, c.output_dir + "/phantom.csv");
  write_pgm(s.truth, c.output_dir + "/phantom.pgm");
}

MeasurementSet run_forward_stage(const ExperimentConfig& c) {
  c.validate();
  ensure_dir(c.output_dir);
  Stage s = make_stage(c);

  NodalField u = solve_incident(s.coeffs, s.src, s.forward_grid, s.fopts.cg);
  write_field_csv(u, c.output_dir + "/incident.csv");

  MeasurementSet meas;
  if (c.measurement_path == "direct") {
    meas = measure_direct(s.coeffs, s.src, s.scan, s.us_shape, s.eta,
                          s.forward_grid, s.fopts);
  } else {
    meas = measure_adjoint(s.coeffs, s.src, s.scan, s.us_shape, s.eta,
                           s.forward_grid, s.fopts);
  }
  if (c.noise_level > 0.0) {
    meas = add_noise(meas, c.noise_level, c.noise_seed);
  }
  write_measurements_csv(meas, c.output_dir + "/measurements.csv");
  return meas;
}

ExperimentResult run_experiment(const ExperimentConfig& c) {
  c.validate();
  ensure_dir(c.output_dir);
  Stage s = make_stage(c);
  json manifest;
  manifest["tool"] = "uot";
  manifest["version"] = kVersion;
  for (const auto& [k, v] : c.as_key_values()) manifest["config"][k] = v;
  if (s.coeffs.turbidity_warning()) {
    manifest["warnings"].push_back(
        "phantom is not clearly turbid: max(mu) > 0.1 * mus_prime");
  }

  ExperimentResult result;
  Clock::time_point t0 = Clock::now();

  // phantom
  write_field_csv(s.truth, c.output_dir + "/phantom.csv");
  write_pgm(s.truth, c.output_dir + "/phantom.pgm");
  manifest["timings"]["phantom_s"] = seconds_since(t0);

  // forward data
  t0 = Clock::now();
  NodalField u = solve_incident(s.coeffs, s.src, s.forward_grid, s.fopts.cg);
  write_field_csv(u, c.output_dir + "/incident.csv");
  MeasurementSet meas;
  if (c.measurement_path == "direct") {
    meas = measure_direct(s.coeffs, s.src, s.scan, s.us_shape, s.eta,
                          s.forward_grid, s.fopts);
  } else if (c.measurement_path == "adjoint") {
    meas = measure_adjoint(s.coeffs, s.src, s.scan, s.us_shape, s.eta,
                           s.forward_grid, s.fopts);
  } else {  // both: generate with the direct path, record the deviation
    MeasurementSet direct = measure_direct(s.coeffs, s.src, s.scan,
                                           s.us_shape, s.eta, s.forward_grid,
                                           s.fopts);
    MeasurementSet adjoint = measure_adjoint(s.coeffs, s.src, s.scan,
                                             s.us_shape, s.eta,
                                             s.forward_grid, s.fopts);
    double dev = 0.0;
    for (std::size_t k = 0; k < direct.values.size(); ++k) {
      dev = std::max(dev, std::abs(direct.values[k] - adjoint.values[k]) /
                              std::abs(direct.values[k]));
    }
    result.direct_adjoint_dev = dev;
    manifest["forward"]["direct_adjoint_max_rel_dev"] = dev;
    direct.pde_solves += adjoint.pde_solves;
    meas = std::move(direct);
  }
  if (c.noise_level > 0.0) {
    meas = add_noise(meas, c.noise_level, c.noise_seed);
  }
  write_measurements_csv(meas, c.output_dir + "/measurements.csv");
  manifest["forward"]["pde_solves"] = meas.pde_solves;
  manifest["forward"]["path"] = measurement_path_name(meas.path);
  manifest["timings"]["forward_s"] = seconds_since(t0);

  // reconstruction
  t0 = Clock::now();
  ReconConfig rc = make_recon_config(c);
  ReconConstants consts{c.mus_prime, c.gamma, c.mu_bar};
  std::function<void(int, const NodalField&)> on_iterate;
  if (c.save_iterates) {
    on_iterate = [&](int k, const NodalField& mu) {
      char name[64];
      std::snprintf(name, sizeof(name), "/recon_iter_%03d.csv", k);
      write_field_csv(mu, c.output_dir + name);
    };
  }
  result.recon = run_reconstruction(meas, consts, s.recon_grid, rc,
                                    on_iterate);
  write_field_csv(result.recon.mu, c.output_dir + "/recon.csv");
  write_pgm(result.recon.mu, c.output_dir + "/recon.pgm");
  {
    std::ofstream hist(c.output_dir + "/history.csv");
    hist << "iteration,rel_change\n";
    for (std::size_t k = 0; k < result.recon.rel_change_history.size(); ++k) {
      hist << (k + 1) << ',' << fmt_double(result.recon.rel_change_history[k])
           << '\n';
    }
  }
  manifest["timings"]["recon_s"] = seconds_since(t0);
  manifest["recon"]["iterations"] = result.recon.iterations;
  manifest["recon"]["converged"] = result.recon.converged;
  manifest["recon"]["w_floor_clamps"] = result.recon.w_floor_clamps;
  if (!result.recon.rel_change_history.empty()) {
    manifest["recon"]["final_rel_change"] =
        result.recon.rel_change_history.back();
  }

  // error metrics against the truth resampled on the reconstruction grid
  result.truth_on_recon_grid = make_phantom(parse_phantom_case(c.phantom),
                                            s.recon_grid, c.mu_bar);
  result.measurements = std::move(meas);
  {
    const RegularGrid& g = s.recon_grid;
    Rect u_rect{c.scan_x0, c.scan_y0, c.scan_x1, c.scan_y1};
    double area = g.hx() * g.hy();
    double acc = 0.0;
    for (int j = 0; j < g.ny; ++j) {
      for (int i = 0; i < g.nx; ++i) {
        if (!u_rect.contains(g.node_x(i), g.node_y(j))) continue;
        double d = result.recon.mu.at(i, j) -
                   result.truth_on_recon_grid.at(i, j);
        acc += area * d * d;
      }
    }
    result.interior_l2_error = std::sqrt(acc);
  }
  manifest["recon"]["interior_l2_error"] = result.interior_l2_error;

  std::ofstream mf(c.output_dir + "/manifest.json");
  if (!mf) throw IoError("cannot write manifest.json");
  mf << manifest.dump(2) << '\n';
  return result;
}

}  // namespace uot
