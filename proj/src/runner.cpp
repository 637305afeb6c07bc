#include "varint/runner.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "varint/galerkin.hpp"
#include "varint/liegroup.hpp"
#include "varint/models.hpp"
#include "varint/multiscale.hpp"
#include "varint/multisym.hpp"
#include "varint/pseudospectral.hpp"
#include "varint/sem.hpp"

namespace varint {

namespace {

using nlohmann::json;

const json& member(const json& obj, const std::string& prefix, const char* key) {
  if (!obj.is_object()) throw ConfigError(prefix, "expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) throw ConfigError(prefix + "." + key, "missing");
  return *it;
}

double get_num(const json& obj, const std::string& prefix, const char* key) {
  const json& v = member(obj, prefix, key);
  if (!v.is_number()) throw ConfigError(prefix + "." + key, "expected a number");
  return v.get<double>();
}

double get_num(const json& obj, const std::string& prefix, const char* key, double fallback) {
  if (!obj.is_object() || !obj.contains(key)) return fallback;
  return get_num(obj, prefix, key);
}

int get_int(const json& obj, const std::string& prefix, const char* key) {
  const json& v = member(obj, prefix, key);
  if (!v.is_number_integer()) throw ConfigError(prefix + "." + key, "expected an integer");
  return v.get<int>();
}

int get_int(const json& obj, const std::string& prefix, const char* key, int fallback) {
  if (!obj.is_object() || !obj.contains(key)) return fallback;
  return get_int(obj, prefix, key);
}

bool get_bool(const json& obj, const std::string& prefix, const char* key, bool fallback) {
  if (!obj.is_object() || !obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_boolean()) throw ConfigError(prefix + "." + key, "expected a boolean");
  return v.get<bool>();
}

std::string get_str(const json& obj, const std::string& prefix, const char* key) {
  const json& v = member(obj, prefix, key);
  if (!v.is_string()) throw ConfigError(prefix + "." + key, "expected a string");
  return v.get<std::string>();
}

Vec get_vec(const json& obj, const std::string& prefix, const char* key, int expected) {
  const json& v = member(obj, prefix, key);
  if (!v.is_array()) throw ConfigError(prefix + "." + key, "expected an array");
  if (expected >= 0 && static_cast<int>(v.size()) != expected) {
    throw ConfigError(prefix + "." + key,
                      "expected " + std::to_string(expected) + " entries, got " +
                          std::to_string(v.size()));
  }
  Vec out(v.size());
  for (size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) throw ConfigError(prefix + "." + key, "expected numeric entries");
    out[static_cast<int>(i)] = v[i].get<double>();
  }
  return out;
}

double positive(double value, const std::string& field) {
  if (!(value > 0.0)) throw ConfigError(field, "must be positive");
  return value;
}

int at_least(int value, int floor, const std::string& field) {
  if (value < floor) throw ConfigError(field, "must be at least " + std::to_string(floor));
  return value;
}

LagrangianSystem point_model(const json& model) {
  const std::string id = get_str(model, "model", "id");
  if (id == "free_particle") return models::free_particle(at_least(get_int(model, "model", "dim", 1), 1, "model.dim"));
  if (id == "harmonic_oscillator") return models::harmonic_oscillator(get_num(model, "model", "omega", 1.0));
  if (id == "pendulum") return models::pendulum();
  throw ConfigError("model.id", "unknown point-mechanics model '" + id + "'");
}

StiffPendulum stiff_model(const json& model) {
  if (get_str(model, "model", "id") != "stiff_pendulum") {
    throw ConfigError("model.id", "multiscale runs need model id 'stiff_pendulum'");
  }
  StiffPendulum sp;
  sp.m = positive(get_num(model, "model", "m", sp.m), "model.m");
  sp.g = positive(get_num(model, "model", "g", sp.g), "model.g");
  sp.k = positive(get_num(model, "model", "k", sp.k), "model.k");
  sp.l = positive(get_num(model, "model", "l", sp.l), "model.l");
  return sp;
}

/// V(x) = sum_j coefficients[j] cos(j x), sampled on the grid. An absent or
/// empty coefficient list means a free particle.
Vec potential_samples(const json& model, const SpectralGrid& grid) {
  Vec samples = Vec::Zero(grid.N);
  const std::string id = get_str(model, "model", "id");
  if (id == "free") return samples;
  if (id != "cosine_potential") {
    throw ConfigError("model.id", "spectral runs need model id 'free' or 'cosine_potential'");
  }
  const Vec coef = get_vec(model, "model", "coefficients", -1);
  for (int j = 0; j < grid.N; ++j) {
    double v = 0.0;
    for (int m = 0; m < coef.size(); ++m) v += coef[m] * std::cos(m * grid.x(j));
    samples[j] = v;
  }
  return samples;
}

RunResult run_galerkin(const json& model, const json& integ) {
  const LagrangianSystem sys = point_model(model);
  const int s = at_least(get_int(integ, "integrator", "s", 2), 1, "integrator.s");
  const double h = positive(get_num(integ, "integrator", "h"), "integrator.h");
  const int steps = at_least(get_int(integ, "integrator", "steps"), 1, "integrator.steps");
  const Vec q0 = get_vec(integ, "integrator", "q0", sys.dim);
  Vec q1;
  if (integ.contains("q1")) {
    q1 = get_vec(integ, "integrator", "q1", sys.dim);
  } else {
    q1 = q0 + h * get_vec(integ, "integrator", "v0", sys.dim);
  }
  const GalerkinScheme scheme = make_galerkin(sys, s);
  const Trajectory traj = integrate(scheme, q0, q1, h, steps);

  RunResult result;
  result.trajectory.columns.push_back("t");
  for (int c = 0; c < sys.dim; ++c) result.trajectory.columns.push_back("q" + std::to_string(c));
  result.trajectory.columns.push_back("energy");
  for (int c = 0; c < sys.dim; ++c) {
    result.trajectory.columns.push_back("momentum" + std::to_string(c));
  }
  for (size_t i = 0; i < traj.times.size(); ++i) {
    std::vector<double> row{traj.times[i]};
    for (int c = 0; c < sys.dim; ++c) row.push_back(traj.states[i][c]);
    row.push_back(traj.energies[i]);
    for (int c = 0; c < sys.dim; ++c) row.push_back(traj.momenta[i][c]);
    result.trajectory.rows.push_back(std::move(row));
  }
  return result;
}

RunResult run_sem(const json& model, const json& integ) {
  const LagrangianSystem sys = point_model(model);
  SemScheme scheme;
  scheme.system = sys;
  scheme.order2 = get_bool(integ, "integrator", "order2", true);
  scheme.s = at_least(get_int(integ, "integrator", "s", 2), 1, "integrator.s");
  const double h0 = positive(get_num(integ, "integrator", "h0"), "integrator.h0");
  const int steps = at_least(get_int(integ, "integrator", "steps"), 1, "integrator.steps");
  const Vec q0 = get_vec(integ, "integrator", "q0", sys.dim);
  Vec q1;
  if (integ.contains("q1")) {
    q1 = get_vec(integ, "integrator", "q1", sys.dim);
  } else {
    q1 = q0 + h0 * get_vec(integ, "integrator", "v0", sys.dim);
  }
  const auto records = sem_run(scheme, q0, q1, h0, steps);

  RunResult result;
  result.trajectory.columns.push_back("t");
  for (int c = 0; c < sys.dim; ++c) result.trajectory.columns.push_back("q" + std::to_string(c));
  result.trajectory.columns.push_back("energy");
  double t = 0.0;
  int fallbacks = 0;
  for (const auto& rec : records) {
    std::vector<double> row{t};
    for (int c = 0; c < sys.dim; ++c) row.push_back(rec.q[c]);
    row.push_back(rec.energy);
    result.trajectory.rows.push_back(std::move(row));
    t += rec.h;
    fallbacks += rec.fallback ? 1 : 0;
  }
  result.extra["fallback_steps"] = fallbacks;
  return result;
}

RunResult run_group(const json& model, const json& integ, bool reduced) {
  if (get_str(model, "model", "id") != "rigid_body") {
    throw ConfigError("model.id", "group runs need model id 'rigid_body'");
  }
  Vec inertia(3);
  inertia << 1.0, 2.0, 3.0;
  if (model.contains("inertia")) inertia = get_vec(model, "model", "inertia", 3);
  for (int i = 0; i < 3; ++i) positive(inertia[i], "model.inertia");

  MatrixGroupSpec group = so3();
  auto body_velocity = [group](const Mat& g, const Mat& gdot) {
    return Vec(group.vee(g.transpose() * gdot));
  };
  auto lag = [inertia, body_velocity](const Mat& g, const Mat& gdot) {
    const Vec om = body_velocity(g, gdot);
    return 0.5 * om.dot(inertia.asDiagonal() * om);
  };
  const int s = at_least(get_int(integ, "integrator", "s", 2), 1, "integrator.s");
  const double h = positive(get_num(integ, "integrator", "h"), "integrator.h");
  const int steps = at_least(get_int(integ, "integrator", "steps"), 1, "integrator.steps");
  const Vec omega0 = get_vec(integ, "integrator", "omega0", 3);

  SolverConfig solver;
  // Chart derivatives are finite differences; 1e-12 is not reachable.
  solver.tol = get_num(integ, "integrator", "tol", 1e-10);
  LieGalerkinScheme scheme = make_lie_galerkin(group, lag, s, solver);
  scheme.reduced_lag = [inertia](const Vec& om) {
    return 0.5 * om.dot(inertia.asDiagonal() * om);
  };

  std::vector<Mat> gs;
  gs.push_back(Mat::Identity(3, 3));
  gs.push_back(scheme.group.exp(scheme.group.hat(h * omega0)));
  if (reduced) {
    std::vector<Mat> fs;
    fs.push_back(gs[1]);
    for (int k = 0; k < steps; ++k) fs.push_back(dep_step(scheme, fs.back(), h));
    gs = reconstruct(gs[0], fs);
  } else {
    for (int k = 0; k < steps; ++k) {
      gs.push_back(lie_del_step(scheme, gs[gs.size() - 2], gs.back(), h));
    }
  }

  RunResult result;
  result.trajectory.columns.push_back("t");
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      result.trajectory.columns.push_back("r" + std::to_string(r) + std::to_string(c));
    }
  }
  result.trajectory.columns.push_back("energy");
  for (int c = 0; c < 3; ++c) result.trajectory.columns.push_back("momentum" + std::to_string(c));
  for (size_t k = 0; k + 1 < gs.size(); ++k) {
    const Mat& g = gs[k];
    const Vec om = group.vee(matrix_log(g.transpose() * gs[k + 1])) / h;
    const Vec body_mom = inertia.asDiagonal() * om;
    // The conserved spatial momentum is the discrete Legendre transform
    // pushed forward, not the finite-difference approximation.
    const Vec spatial = gs[k + 1] * lie_d2(scheme, g, gs[k + 1], h);
    std::vector<double> row{h * static_cast<double>(k)};
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) row.push_back(g(r, c));
    }
    row.push_back(0.5 * om.dot(body_mom));
    for (int c = 0; c < 3; ++c) row.push_back(spatial[c]);
    result.trajectory.rows.push_back(std::move(row));
  }
  return result;
}

RunResult run_multiscale(const json& model, const json& integ) {
  const StiffPendulum sp = stiff_model(model);
  const LagrangianSystem sys = pendulum_lagrangian(sp);
  const int degree = at_least(get_int(integ, "integrator", "poly_degree", 1), 1,
                              "integrator.poly_degree");
  const int qpts = at_least(get_int(integ, "integrator", "quad_points", 3), 2,
                            "integrator.quad_points");
  const int nseg = at_least(get_int(integ, "integrator", "segments"), 1, "integrator.segments");
  const Vec q0 = get_vec(integ, "integrator", "q0", 2);
  const Vec v0 = get_vec(integ, "integrator", "v0", 2);

  double omega = get_num(integ, "integrator", "omega", 0.0);
  if (omega <= 0.0) {
    const double fast_period = 2.0 * M_PI / sp.fast_frequency();
    Vec state0(4);
    const Vec p0 = sys.grad_v(q0, v0);
    state0 << q0[0], q0[1], p0[0], p0[1];
    omega = estimate_fast_frequency(sp, state0, 40.0 * fast_period, fast_period / 40.0);
  }
  double h = get_num(integ, "integrator", "h", 0.0);
  if (h <= 0.0) {
    const double periods = get_num(integ, "integrator", "fast_periods", 2.0);
    h = positive(periods, "integrator.fast_periods") * 2.0 * M_PI / omega;
  }

  MultiscaleScheme scheme = make_multiscale(sys, degree, qpts);
  // The fast frequency enters as data; solving for it jointly makes the
  // segment systems badly conditioned.
  scheme.solve_omega = get_bool(integ, "integrator", "solve_omega", false);
  scheme.solver.tol = get_num(integ, "integrator", "tol", 1e-9);

  const auto records = multiscale_run(scheme, q0, v0, omega, h, nseg);

  RunResult result;
  result.trajectory.columns = {"t", "q0", "q1", "v0", "v1", "energy"};
  for (const auto& rec : records) {
    result.trajectory.rows.push_back(
        {rec.t, rec.q[0], rec.q[1], rec.qdot[0], rec.qdot[1], rec.energy});
  }
  result.extra["omega"] = omega;
  result.extra["segment_length"] = h;
  return result;
}

RunResult run_multisym(const json& model, const json& integ) {
  if (get_str(model, "model", "id") != "wave") {
    throw ConfigError("model.id", "multisym runs need model id 'wave'");
  }
  const double speed = positive(get_num(model, "model", "speed", 1.0), "model.speed");
  SpaceTimeMesh mesh;
  mesh.M = at_least(get_int(integ, "integrator", "cells"), 2, "integrator.cells");
  mesh.dx = positive(get_num(integ, "integrator", "dx"), "integrator.dx");
  mesh.dt = positive(get_num(integ, "integrator", "dt"), "integrator.dt");
  const std::string boundary = get_str(integ, "integrator", "boundary");
  if (boundary == "periodic") {
    mesh.boundary = SpaceTimeMesh::Boundary::periodic;
  } else if (boundary == "fixed") {
    mesh.boundary = SpaceTimeMesh::Boundary::fixed;
  } else {
    throw ConfigError("integrator.boundary", "expected 'periodic' or 'fixed'");
  }
  const int steps = at_least(get_int(integ, "integrator", "steps"), 1, "integrator.steps");
  const Vec u0 = get_vec(integ, "integrator", "u0", mesh.M + 1);
  const Vec u1 = get_vec(integ, "integrator", "u1", mesh.M + 1);

  const DensityLagrangian wave = wave_density(speed);
  const QuadratureRule quad = unit_gauss(get_int(integ, "integrator", "quad_points", 2));
  FieldLattice lat;
  lat.q = Mat(2, mesh.M + 1);
  lat.q.row(0) = u0.transpose();
  lat.q.row(1) = u1.transpose();
  for (int k = 0; k < steps; ++k) time_march(wave, lat, mesh, quad);

  RunResult result;
  result.trajectory.columns.push_back("t");
  for (int i = 0; i <= mesh.M; ++i) result.trajectory.columns.push_back("u" + std::to_string(i));
  result.trajectory.columns.push_back("energy");
  result.trajectory.columns.push_back("momentum");
  const double c2 = speed * speed;
  for (int j = 0; j + 1 < lat.levels(); ++j) {
    std::vector<double> row{j * mesh.dt};
    for (int i = 0; i <= mesh.M; ++i) row.push_back(lat.q(j, i));
    double energy = 0.0;
    for (int i = 0; i < mesh.M; ++i) {
      const double ut = (lat.q(j + 1, i) - lat.q(j, i)) / mesh.dt;
      const double ux = (lat.q(j, i + 1) - lat.q(j, i)) / mesh.dx;
      energy += 0.5 * (ut * ut + c2 * ux * ux) * mesh.dx;
    }
    row.push_back(energy);
    row.push_back(field_momentum(wave, lat, j, mesh, quad));
    result.trajectory.rows.push_back(std::move(row));
  }
  return result;
}

SpectralState initial_state(const json& integ, const SpectralGrid& grid) {
  SpectralState state(grid.N);
  if (integ.contains("modes")) {
    const json& modes = integ.at("modes");
    if (!modes.is_array() || modes.empty()) {
      throw ConfigError("integrator.modes", "expected a nonempty array of [k, re, im]");
    }
    for (const auto& entry : modes) {
      if (!entry.is_array() || entry.size() != 3) {
        throw ConfigError("integrator.modes", "expected [k, re, im] triples");
      }
      const int k = entry[0].get<int>();
      if (k < -grid.N / 2 || k > grid.N / 2) {
        throw ConfigError("integrator.modes", "mode index out of range");
      }
      state.at(k) = Cplx(entry[1].get<double>(), entry[2].get<double>());
    }
  } else {
    const int k = get_int(integ, "integrator", "mode", 1);
    if (k < -grid.N / 2 || k > grid.N / 2) {
      throw ConfigError("integrator.mode", "mode index out of range");
    }
    state.at(k) = 1.0;
  }
  if (grid.N / 2 >= 1) {
    // Keep the identified endpoint modes consistent.
    state.at(-grid.N / 2) = state.at(grid.N / 2);
  }
  const double nrm = spectral_norm(state);
  if (nrm <= 0.0) throw ConfigError("integrator.modes", "initial state has zero norm");
  for (int i = 0; i < state.coef.size(); ++i) state.coef[i] /= std::sqrt(nrm);
  return state;
}

TdseScheme spectral_scheme(const json& model, const json& integ, const SpectralGrid& grid,
                           double dt) {
  TdseScheme scheme = make_tdse(grid, dt);
  scheme.hbar = positive(get_num(integ, "integrator", "hbar", 1.0), "integrator.hbar");
  scheme.mass = positive(get_num(integ, "integrator", "mass", 0.5), "integrator.mass");
  const std::string source = integ.is_object() && integ.contains("source")
                                 ? get_str(integ, "integrator", "source")
                                 : "rederived";
  if (source == "rederived") {
    scheme.source = CoefficientSource::rederived;
  } else if (source == "printed") {
    scheme.source = CoefficientSource::printed;
  } else {
    throw ConfigError("integrator.source", "expected 'rederived' or 'printed'");
  }
  scheme.potential = potential_spectrum(grid, potential_samples(model, grid));
  return scheme;
}

RunResult run_tdse(const json& model, const json& integ) {
  const int n = get_int(integ, "integrator", "N");
  if (n < 4 || n % 2 != 0) throw ConfigError("integrator.N", "expected an even N >= 4");
  const SpectralGrid grid{n};
  const double dt = positive(get_num(integ, "integrator", "dt"), "integrator.dt");
  const int steps = at_least(get_int(integ, "integrator", "steps"), 1, "integrator.steps");
  const TdseScheme scheme = spectral_scheme(model, integ, grid, dt);

  SpectralState prev = initial_state(integ, grid);
  SpectralState cur = tdse_start(scheme, prev);

  RunResult result;
  result.trajectory.columns.push_back("t");
  for (int k = -n / 2; k <= n / 2; ++k) {
    result.trajectory.columns.push_back("re_" + std::to_string(k));
    result.trajectory.columns.push_back("im_" + std::to_string(k));
  }
  result.trajectory.columns.push_back("norm");
  auto emit = [&](int level, const SpectralState& s) {
    std::vector<double> row{level * dt};
    for (int i = 0; i < s.coef.size(); ++i) {
      row.push_back(s.coef[i].real());
      row.push_back(s.coef[i].imag());
    }
    row.push_back(spectral_norm(s));
    result.trajectory.rows.push_back(std::move(row));
  };
  emit(0, prev);
  emit(1, cur);
  double lambda = 0.0;
  for (int k = 0; k < steps; ++k) {
    auto [next, lam] = tdse_step(scheme, prev, cur, lambda);
    lambda = lam;
    prev = cur;
    cur = next;
    emit(k + 2, cur);
  }
  result.extra["lambda_last"] = lambda;
  return result;
}

RunResult run_tise(const json& model, const json& integ) {
  const int n = get_int(integ, "integrator", "N");
  if (n < 4 || n % 2 != 0) throw ConfigError("integrator.N", "expected an even N >= 4");
  const SpectralGrid grid{n};
  const TdseScheme scheme = spectral_scheme(model, integ, grid, 1.0);
  const auto modes = tise_solve(scheme);

  RunResult result;
  result.trajectory.columns = {"index", "lambda"};
  result.extra["eigenvalues"] = json::array();
  for (size_t i = 0; i < modes.size(); ++i) {
    result.trajectory.rows.push_back({static_cast<double>(i), modes[i].lambda});
    result.extra["eigenvalues"].push_back(modes[i].lambda);
  }
  return result;
}

}  // namespace

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return from_json_text(buf.str());
}

RunConfig RunConfig::from_json_text(const std::string& text) {
  RunConfig config;
  try {
    config.doc = json::parse(text);
  } catch (const json::parse_error& err) {
    throw ConfigError("config", std::string("parse error: ") + err.what());
  }
  if (!config.doc.is_object()) throw ConfigError("config", "expected a JSON object");
  return config;
}

RunResult run_config(const RunConfig& config) {
  const json& model = member(config.doc, "config", "model");
  const json& integ = member(config.doc, "config", "integrator");
  const std::string id = get_str(integ, "integrator", "id");

  RunResult result;
  if (id == "galerkin") {
    result = run_galerkin(model, integ);
  } else if (id == "sem") {
    result = run_sem(model, integ);
  } else if (id == "liegroup") {
    result = run_group(model, integ, false);
  } else if (id == "dep") {
    result = run_group(model, integ, true);
  } else if (id == "multiscale") {
    result = run_multiscale(model, integ);
  } else if (id == "multisym") {
    result = run_multisym(model, integ);
  } else if (id == "tdse") {
    result = run_tdse(model, integ);
  } else if (id == "tise") {
    result = run_tise(model, integ);
  } else {
    throw ConfigError("integrator.id", "unknown integrator '" + id + "'");
  }
  result.summary = diagnose_table(result.trajectory);
  result.extra["seed"] = config.doc.value("seed", 0);
  return result;
}

void run_to_files(const RunConfig& config) {
  const RunResult result = run_config(config);
  if (!config.doc.contains("output")) return;
  const json& output = config.doc.at("output");
  if (!output.is_object()) throw ConfigError("output", "expected an object");
  if (output.contains("trajectory")) {
    const std::string path = get_str(output, "output", "trajectory");
    try {
      write_csv(path, result.trajectory);
    } catch (const std::runtime_error& err) {
      throw IoError(err.what());
    }
  }
  if (output.contains("summary")) {
    const std::string path = get_str(output, "output", "summary");
    json doc = json::parse(summary_to_json(result.summary));
    for (const auto& [key, value] : result.extra.items()) doc[key] = value;
    std::ofstream out(path);
    if (!out) throw IoError("cannot open summary file " + path);
    out << doc.dump(2) << '\n';
    if (!out.good()) throw IoError("write failed for " + path);
  }
}

std::string error_json(int code, const std::string& field, const std::string& message) {
  nlohmann::json doc;
  doc["error"] = {{"code", code}, {"field", field}, {"message", message}};
  return doc.dump();
}

}  // namespace varint
