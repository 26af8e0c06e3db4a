#include "slowfast/scenario.hpp"

#include "slowfast/bounds.hpp"
#include "slowfast/integrator.hpp"
#include "slowfast/lti.hpp"
#include "slowfast/ofo.hpp"
#include "slowfast/specnorm.hpp"
#include "slowfast/sysmodel.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

namespace slowfast::scenario {

namespace {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// JSON access with field-path diagnostics

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ValidationError("scenario field '" + path + "': " + what);
}

const Json& need(const Json& j, const std::string& key, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) fail(path + "." + key, "missing");
  return *it;
}

double need_num(const Json& j, const std::string& key, const std::string& path) {
  const Json& v = need(j, key, path);
  if (!v.is_number()) fail(path + "." + key, "expected a number");
  return v.get<double>();
}

double opt_num(const Json& j, const std::string& key, double fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  return j.at(key).get<double>();
}

int opt_int(const Json& j, const std::string& key, int fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  return j.at(key).get<int>();
}

std::string need_str(const Json& j, const std::string& key, const std::string& path) {
  const Json& v = need(j, key, path);
  if (!v.is_string()) fail(path + "." + key, "expected a string");
  return v.get<std::string>();
}

Vec parse_vector(const Json& v, const std::string& path) {
  if (!v.is_array() || v.empty()) fail(path, "expected a nonempty array of numbers");
  Vec out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) fail(path, "expected numbers");
    out(static_cast<Eigen::Index>(i)) = v[i].get<double>();
  }
  return out;
}

Mat parse_matrix(const Json& v, const std::string& path) {
  if (!v.is_array() || v.empty() || !v[0].is_array())
    fail(path, "expected an array of rows");
  const std::size_t cols = v[0].size();
  if (cols == 0) fail(path, "rows must be nonempty");
  Mat out(v.size(), cols);
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_array() || v[i].size() != cols) fail(path, "ragged rows");
    for (std::size_t j = 0; j < cols; ++j) {
      if (!v[i][j].is_number()) fail(path, "expected numbers");
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v[i][j].get<double>();
    }
  }
  return out;
}

NormKind parse_norm(const Json& j, const std::string& key, const std::string& path) {
  if (!j.is_object() || !j.contains(key)) return NormKind::l2();
  const Json& v = j.at(key);
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    if (s == "l1") return NormKind::l1();
    if (s == "l2") return NormKind::l2();
    if (s == "linf") return NormKind::linf();
    fail(path + "." + key, "unknown norm '" + s + "'");
  }
  if (v.is_object() && v.contains("weighted"))
    return NormKind::weighted_l2(parse_matrix(v.at("weighted"), path + "." + key + ".weighted"));
  fail(path + "." + key, "expected a norm name or {\"weighted\": R}");
}

DisturbanceSignal parse_signal(const Json& j, int dim, const std::string& path) {
  if (j.is_null()) return DisturbanceSignal::zero(dim);
  if (!j.is_array()) fail(path, "expected an array of signal terms");
  DisturbanceSignal sig = DisturbanceSignal::zero(dim);
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string p = path + "[" + std::to_string(i) + "]";
    const std::string type = need_str(j[i], "type", p);
    DisturbanceSignal term = DisturbanceSignal::zero(dim);
    if (type == "constant") {
      term = DisturbanceSignal::constant(parse_vector(need(j[i], "value", p), p + ".value"));
    } else if (type == "sinusoid") {
      term = DisturbanceSignal::sinusoid(
          parse_vector(need(j[i], "amplitude", p), p + ".amplitude"),
          need_num(j[i], "omega", p), opt_num(j[i], "phase", 0.0));
    } else if (type == "ramp") {
      term = DisturbanceSignal::ramp(parse_vector(need(j[i], "rate", p), p + ".rate"));
    } else if (type == "smooth-step") {
      term = DisturbanceSignal::smooth_step(
          parse_vector(need(j[i], "amplitude", p), p + ".amplitude"),
          need_num(j[i], "t0", p), need_num(j[i], "width", p));
    } else {
      fail(p + ".type", "unknown signal type '" + type + "'");
    }
    if (term.dimension() != dim) fail(p, "signal dimension mismatch");
    sig = DisturbanceSignal::sum(sig, term);
  }
  return sig;
}

std::vector<double> parse_epsilons(const Json& j, const std::string& path) {
  const Json& v = need(j, "epsilons", path);
  if (!v.is_array() || v.empty()) fail(path + ".epsilons", "expected a nonempty array");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number() || !(e.get<double>() > 0.0))
      fail(path + ".epsilons", "epsilon values must be positive numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

IntegrationConfig parse_integration(const Json& j, double default_t_end) {
  IntegrationConfig cfg;
  cfg.t_end = default_t_end;
  cfg.rel_tol = 1e-8;
  cfg.abs_tol = 1e-11;
  cfg.max_step = 0.25;
  if (j.is_object() && j.contains("integration")) {
    const Json& v = j.at("integration");
    cfg.t_end = opt_num(v, "t_end", cfg.t_end);
    cfg.rel_tol = opt_num(v, "rel_tol", cfg.rel_tol);
    cfg.abs_tol = opt_num(v, "abs_tol", cfg.abs_tol);
    cfg.max_step = opt_num(v, "max_step", cfg.max_step);
    cfg.fast_step_cap = opt_num(v, "fast_step_cap", cfg.fast_step_cap);
  }
  cfg.validate();
  return cfg;
}

// ---------------------------------------------------------------------------
// report helpers

Json num(double v, const char* unit) {
  Json j;
  if (std::isfinite(v))
    j["value"] = v;
  else if (std::isnan(v))
    j["value"] = "undefined";
  else
    j["value"] = v > 0 ? "unbounded" : "-unbounded";  // JSON has no infinities
  j["unit"] = unit;
  return j;
}

Json check_entry(const std::string& name, const BoundReport& rep, CaseTag tag) {
  Json c;
  c["name"] = name;
  c["pass"] = rep.pass;
  c["worst_margin"] = num(rep.worst_margin, "state-norm");
  c["worst_time"] = num(rep.worst_time, "time");
  c["worst_ratio"] = num(rep.worst_ratio, "dimensionless");
  c["case_tag"] = tag == CaseTag::equal ? "equal-rates" : "distinct-rates";
  return c;
}

// Pointwise verification stops once the envelope has decayed verify_floor
// below its peak; past that depth the comparison measures integrator noise,
// not the bound. Returns the check entry with the verified horizon attached.
Json envelope_check(const std::string& name, const std::vector<double>& times,
                    const std::vector<double>& measured, const BoundEnvelope& env, double slack,
                    double verify_floor) {
  std::vector<double> values(times.size());
  double peak = 0.0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    values[k] = env.eval(times[k]);
    peak = std::max(peak, values[k]);
  }
  std::size_t keep = times.size();
  const double floor = verify_floor * peak;
  while (keep > 1 && values[keep - 1] < floor) --keep;
  std::vector<double> t_cut(times.begin(), times.begin() + static_cast<long>(keep));
  std::vector<double> m_cut(measured.begin(), measured.begin() + static_cast<long>(keep));
  Json c = check_entry(name, verify_bound(t_cut, m_cut, env, slack), env.case_tag);
  c["verified_until"] = num(t_cut.back(), "time");
  return c;
}

Json scalar_check(const std::string& name, bool pass, double value, double limit,
                  const char* unit) {
  Json c;
  c["name"] = name;
  c["pass"] = pass;
  c["measured"] = num(value, unit);
  c["limit"] = num(limit, unit);
  return c;
}

Json stats_entry(const StepStats& st) {
  Json s;
  s["accepted_steps"] = num(static_cast<double>(st.accepted), "count");
  s["rejected_steps"] = num(static_cast<double>(st.rejected), "count");
  s["max_scaled_local_error"] = num(st.max_error_estimate, "dimensionless");
  return s;
}

Json constants_entry(const ConstantsTable& c) {
  Json out;
  for (int i = 0; i < ConstantsTable::field_count; ++i) {
    Json e;
    e["value"] = c.field(i);
    e["unit"] = (i <= 1) ? "1/time" : "dimensionless";
    e["provenance"] =
        c.provenance[static_cast<std::size_t>(i)] == Provenance::supplied ? "supplied"
                                                                          : "estimated";
    out[ConstantsTable::field_name(i)] = e;
  }
  return out;
}

// 17 significant digits, '.' separator, '\n' line endings.
class CsvWriter {
 public:
  CsvWriter(const fs::path& file, const std::vector<std::string>& columns) : out_(file) {
    if (!out_) throw NumericalError("cannot open output file " + file.string());
    for (std::size_t i = 0; i < columns.size(); ++i)
      out_ << (i ? "," : "") << columns[i];
    out_ << "\n";
  }
  void row(const std::vector<double>& values) {
    char buf[40];
    for (std::size_t i = 0; i < values.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", values[i]);
      out_ << (i ? "," : "") << buf;
    }
    out_ << "\n";
  }

 private:
  std::ofstream out_;
};

std::string eps_suffix(std::size_t idx) {
  return idx == 0 ? std::string() : "_eps" + std::to_string(idx);
}

struct TrajRow {
  double t;
  Vec x, z, x_r, z_star;
  double y_norm, x_err, z_err;
};

void write_trajectories(const fs::path& dir, std::size_t idx, const std::vector<TrajRow>& rows) {
  std::vector<std::string> cols{"t"};
  const auto& first = rows.front();
  for (Eigen::Index i = 0; i < first.x.size(); ++i) cols.push_back("x_" + std::to_string(i));
  for (Eigen::Index i = 0; i < first.z.size(); ++i) cols.push_back("z_" + std::to_string(i));
  for (Eigen::Index i = 0; i < first.x_r.size(); ++i) cols.push_back("x_r_" + std::to_string(i));
  for (Eigen::Index i = 0; i < first.z_star.size(); ++i)
    cols.push_back("z_star_" + std::to_string(i));
  cols.insert(cols.end(), {"y_norm", "x_err", "z_err"});
  CsvWriter csv(dir / ("trajectories" + eps_suffix(idx) + ".csv"), cols);
  std::vector<double> vals;
  for (const auto& r : rows) {
    vals.clear();
    vals.push_back(r.t);
    for (Eigen::Index i = 0; i < r.x.size(); ++i) vals.push_back(r.x(i));
    for (Eigen::Index i = 0; i < r.z.size(); ++i) vals.push_back(r.z(i));
    for (Eigen::Index i = 0; i < r.x_r.size(); ++i) vals.push_back(r.x_r(i));
    for (Eigen::Index i = 0; i < r.z_star.size(); ++i) vals.push_back(r.z_star(i));
    vals.insert(vals.end(), {r.y_norm, r.x_err, r.z_err});
    csv.row(vals);
  }
}

void write_envelopes(const fs::path& dir, std::size_t idx, const std::vector<double>& times,
                     const BoundEnvelope& ex, const BoundEnvelope& ez,
                     const std::vector<double>& mx, const std::vector<double>& mz, double slack) {
  CsvWriter csv(dir / ("envelopes" + eps_suffix(idx) + ".csv"),
                {"t", "envelope_x", "envelope_z", "margin_x", "margin_z"});
  for (std::size_t k = 0; k < times.size(); ++k) {
    const double vx = ex.eval(times[k]), vz = ez.eval(times[k]);
    csv.row({times[k], vx, vz, vx * (1.0 + slack) - mx[k], vz * (1.0 + slack) - mz[k]});
  }
}

void write_empty_tables(const fs::path& dir) {
  CsvWriter(dir / "trajectories.csv",
            {"t", "x_0", "z_0", "x_r_0", "z_star_0", "y_norm", "x_err", "z_err"});
  CsvWriter(dir / "envelopes.csv", {"t", "envelope_x", "envelope_z", "margin_x", "margin_z"});
}

// Runs one body per (scenario, epsilon) pair; workers own their output files
// and report slots, the merge stays single-threaded in the caller.
template <typename Fn>
std::vector<Json> parallel_eps_runs(std::size_t n, Fn&& body) {
  std::vector<Json> out(n);
  std::vector<std::string> validation_errors(n), numerical_errors(n);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) if (n > 1)
#endif
  for (long i = 0; i < static_cast<long>(n); ++i) {
    const auto k = static_cast<std::size_t>(i);
    try {
      out[k] = body(k);
    } catch (const ValidationError& e) {
      validation_errors[k] = e.what();
    } catch (const std::invalid_argument& e) {
      validation_errors[k] = e.what();
    } catch (const std::exception& e) {
      numerical_errors[k] = e.what();
    }
  }
  for (const auto& s : validation_errors)
    if (!s.empty()) throw ValidationError(s);
  for (const auto& s : numerical_errors)
    if (!s.empty()) throw NumericalError(s);
  return out;
}

bool all_checks_pass(const Json& report) {
  bool ok = true;
  if (report.contains("runs"))
    for (const auto& run : report.at("runs"))
      for (const auto& c : run.at("checks")) ok = ok && c.at("pass").get<bool>();
  if (report.contains("cross_run_checks"))
    for (const auto& c : report.at("cross_run_checks")) ok = ok && c.at("pass").get<bool>();
  return ok;
}

// ---------------------------------------------------------------------------
// nonlinear field presets

struct TanhFields {
  Mat p_diag, s, q_diag, t;  // f = -P x + S tanh(z) + ..., g = -Q z + T tanh(x) + ...
  Mat wx_gain, wz_gain;
  Vec d_f, d_g;     // epsilon sensitivities
  double bt = 0.0;  // amplitude of the sin(omega_t t) drive on f
  double omega_t = 0.0;
  Vec u_f;          // direction of the time drive
};

Vec tanh_vec(const Vec& v) { return v.array().tanh().matrix(); }

TwoTimeScaleSystem make_tanh_system(const TanhFields& fl, const DisturbanceSignal& wx,
                                    const DisturbanceSignal& wz, double eps) {
  TwoTimeScaleSystem sys;
  sys.n_x = static_cast<int>(fl.p_diag.rows());
  sys.n_z = static_cast<int>(fl.q_diag.rows());
  sys.w_x_sig = wx;
  sys.w_z_sig = wz;
  sys.epsilon = eps;
  TanhFields f = fl;
  sys.f = [f](double t, const Vec& x, const Vec& z, const Vec& w_x, double e) {
    Vec out = -f.p_diag * x + f.s * tanh_vec(z) + f.wx_gain * w_x + e * f.d_f;
    if (f.bt != 0.0) out += f.bt * std::sin(f.omega_t * t) * f.u_f;
    return out;
  };
  sys.g = [f](const Vec& x, const Vec& z, const Vec& w_z, double e) {
    return Vec(-f.q_diag * z + f.t * tanh_vec(x) + f.wz_gain * w_z + e * f.d_g);
  };
  return sys;
}

// Certified constants of the tanh preset (operator-norm bounds, l2).
ConstantsTable tanh_constants(const TanhFields& fl) {
  auto nrm = [](const Mat& m) { return induced_norm(m, NormKind::l2(), NormKind::l2()).value; };
  ConstantsTable c;
  const Mat qinv_t = fl.q_diag.inverse() * fl.t;
  c.c_g = fl.q_diag.diagonal().minCoeff();
  c.c_f = fl.p_diag.diagonal().minCoeff() - nrm(fl.s) * nrm(qinv_t);
  c.l_fx = fl.p_diag.diagonal().maxCoeff();
  c.l_fz = nrm(fl.s);
  c.l_ft = std::abs(fl.bt * fl.omega_t) * fl.u_f.norm();
  c.l_fw = nrm(fl.wx_gain);
  c.l_feps = fl.d_f.norm();
  c.l_gx = nrm(fl.t);
  c.l_gw = nrm(fl.wz_gain);
  c.l_geps = fl.d_g.norm();
  c.l_zstar_w = 0.0;  // dz*/dw_z = Q^{-1} Wz is constant in x for this preset
  c.l_f_wz = c.l_fz * c.l_gw / c.c_g;
  c.set_all_provenance(Provenance::supplied);
  return c;
}

TanhFields parse_tanh_fields(const Json& j, const std::string& path) {
  TanhFields f;
  Vec p = parse_vector(need(j, "P", path), path + ".P");
  Vec q = parse_vector(need(j, "Q", path), path + ".Q");
  f.p_diag = p.asDiagonal();
  f.q_diag = q.asDiagonal();
  f.s = parse_matrix(need(j, "S", path), path + ".S");
  f.t = parse_matrix(need(j, "T", path), path + ".T");
  const int nx = static_cast<int>(p.size()), nz = static_cast<int>(q.size());
  if (f.s.rows() != nx || f.s.cols() != nz) fail(path + ".S", "must be n_x by n_z");
  if (f.t.rows() != nz || f.t.cols() != nx) fail(path + ".T", "must be n_z by n_x");
  f.wx_gain = j.contains("Wx") ? parse_matrix(j.at("Wx"), path + ".Wx") : Mat::Zero(nx, 1);
  f.wz_gain = j.contains("Wz") ? parse_matrix(j.at("Wz"), path + ".Wz") : Mat::Zero(nz, 1);
  f.d_f = j.contains("d_f") ? parse_vector(j.at("d_f"), path + ".d_f") : Vec::Zero(nx);
  f.d_g = j.contains("d_g") ? parse_vector(j.at("d_g"), path + ".d_g") : Vec::Zero(nz);
  f.bt = opt_num(j, "bt", 0.0);
  f.omega_t = opt_num(j, "omega_t", 0.0);
  f.u_f = j.contains("u_f") ? parse_vector(j.at("u_f"), path + ".u_f") : Vec::Unit(nx, 0);
  if (f.d_f.size() != nx || f.d_g.size() != nz || f.u_f.size() != nx)
    fail(path, "d_f, d_g, u_f dimensions must match the states");
  return f;
}

// ---------------------------------------------------------------------------
// shared simulation helpers

struct SimData {
  std::vector<double> times;
  std::vector<TrajRow> rows;
  std::vector<double> x_err, z_err, y_norm;
  StepStats stats;
  InitNorms init;
};

SimData simulate_two_time_scale(const TwoTimeScaleSystem& sys, const ConstantsTable& c,
                                const Vec& x0, const Vec& z0, const IntegrationConfig& cfg,
                                int grid_points) {
  SimData sim;
  sim.times = uniform_grid(cfg.t_end, grid_points);

  IntegrationConfig full_cfg = cfg;
  full_cfg.c_g_estimate = std::max(c.c_g, 1e-12);
  OdeFunction full = full_ode(sys, full_cfg);
  Vec y0(full.dim);
  y0 << x0, z0;
  Trajectory traj = integrate(full, y0, full_cfg, sim.times);
  sim.stats = traj.stats;

  ReducedModel red = reduced_model(sys);
  Trajectory rtraj = integrate(reduced_ode(sys, red), x0, cfg, sim.times);

  Vec zs_full = z0, zs_red = z0;
  sim.rows.reserve(sim.times.size());
  for (std::size_t k = 0; k < sim.times.size(); ++k) {
    const double t = sim.times[k];
    TrajRow row;
    row.t = t;
    Vec state = traj.at(k);
    row.x = state.head(sys.n_x);
    row.z = state.tail(sys.n_z);
    row.x_r = rtraj.at(k);
    const Vec wz = sys.w_z_sig.value(t);
    zs_red = quasi_steady_state(sys, row.x_r, wz, 0.0, 1e-11, zs_red);
    zs_full = quasi_steady_state(sys, row.x, wz, 0.0, 1e-11, zs_full);
    row.z_star = zs_red;
    row.x_err = vector_norm(Vec(row.x - row.x_r), sys.x_norm);
    row.z_err = vector_norm(Vec(row.z - zs_red), sys.z_norm);
    row.y_norm = vector_norm(Vec(row.z - zs_full), sys.z_norm);
    sim.rows.push_back(row);
    sim.x_err.push_back(row.x_err);
    sim.z_err.push_back(row.z_err);
    sim.y_norm.push_back(row.y_norm);
  }

  sim.init.x_gap = 0.0;  // x_r(0) = x(0)
  sim.init.y0 = sim.y_norm.front();
  sim.init.fred0 = vector_norm(
      red.rhs(0.0, x0, sys.w_x_sig.value(0.0), sys.w_z_sig.value(0.0)), sys.x_norm);
  return sim;
}

// ---------------------------------------------------------------------------
// kind runners

Json run_general_kind(const Json& j, const fs::path& dir, double slack, double verify_floor,
                      bool autonomous, std::uint64_t seed) {
  const std::string path = "scenario";
  const Json& fields = need(j, "fields", path);
  const std::string preset = need_str(fields, "preset", path + ".fields");
  if (preset != "tanh-coupled")
    fail(path + ".fields.preset", "unknown field preset '" + preset + "'");
  TanhFields fl = parse_tanh_fields(fields, path + ".fields");
  const int nx = static_cast<int>(fl.p_diag.rows());
  const int nz = static_cast<int>(fl.q_diag.rows());

  DisturbanceSignal wx = DisturbanceSignal::zero(static_cast<int>(fl.wx_gain.cols()));
  DisturbanceSignal wz = DisturbanceSignal::zero(static_cast<int>(fl.wz_gain.cols()));
  if (!autonomous && j.contains("disturbance")) {
    const Json& d = j.at("disturbance");
    if (d.contains("w_x")) wx = parse_signal(d.at("w_x"), wx.dimension(), path + ".disturbance.w_x");
    if (d.contains("w_z")) wz = parse_signal(d.at("w_z"), wz.dimension(), path + ".disturbance.w_z");
  }

  const Json& init_j = need(j, "initial", path);
  const Vec x0 = parse_vector(need(init_j, "x", path + ".initial"), path + ".initial.x");
  const Vec z0 = parse_vector(need(init_j, "z", path + ".initial"), path + ".initial.z");
  if (x0.size() != nx || z0.size() != nz) fail(path + ".initial", "state dimension mismatch");

  const std::vector<double> epsilons = parse_epsilons(j, path);
  const IntegrationConfig cfg = parse_integration(j, 20.0);
  const int grid_points = opt_int(j, "grid_points", 400);

  TwoTimeScaleSystem probe = make_tanh_system(fl, wx, wz, epsilons.front());
  ConstantsTable c;
  std::vector<std::string> notes;
  const std::string cmode =
      j.contains("constants") && j.at("constants").is_string() ? j.at("constants").get<std::string>()
                                                               : "analytic";
  if (cmode == "analytic") {
    c = tanh_constants(fl);
  } else if (cmode == "estimate") {
    SamplingBox box;
    box.x_lo = Vec::Constant(nx, -2.0);
    box.x_hi = Vec::Constant(nx, 2.0);
    box.z_lo = Vec::Constant(nz, -2.0);
    box.z_hi = Vec::Constant(nz, 2.0);
    box.wx_lo = Vec::Constant(wx.dimension(), -1.0);
    box.wx_hi = Vec::Constant(wx.dimension(), 1.0);
    box.wz_lo = Vec::Constant(wz.dimension(), -1.0);
    box.wz_hi = Vec::Constant(wz.dimension(), 1.0);
    box.t_max = cfg.t_end;
    box.eps_max = *std::max_element(epsilons.begin(), epsilons.end());
    box.count = 400;
    box.seed = seed;
    c = estimate_constants(probe, box);
    notes.push_back("constants are sampled estimates: Lipschitz entries are lower bounds of the "
                    "true constants, c_f and c_g are optimistic");
  } else {
    fail(path + ".constants", "expected \"analytic\" or \"estimate\"");
  }
  c.require_contractive("scenario constants");
  notes.push_back("l_zstar_w is recorded but consumed by no bound evaluator");

  Json report;
  report["thresholds"]["epsilon_star_general"] = num(epsilon_star_general(c), "dimensionless");
  report["constants"] = constants_entry(c);

  const Wbars wbars{autonomous ? 0.0 : wx.derivative_bound(),
                    autonomous ? 0.0 : wz.derivative_bound()};

  std::vector<double> sup_xerr(epsilons.size(), 0.0);
  std::vector<Json> runs = parallel_eps_runs(epsilons.size(), [&](std::size_t ei) {
    const double eps = epsilons[ei];
    TwoTimeScaleSystem sys = make_tanh_system(fl, wx, wz, eps);
    SimData sim = simulate_two_time_scale(sys, c, x0, z0, cfg, grid_points);
    sup_xerr[ei] = *std::max_element(sim.x_err.begin(), sim.x_err.end());

    Json run;
    run["epsilon"] = num(eps, "dimensionless");
    Json checks = Json::array();

    BoundEnvelope env_x, env_z;
    if (autonomous) {
      auto pair = envelope_autonomous(c, eps, sim.init.y0, sim.init.fred0);
      env_x = pair.first;
      env_z = pair.second;
    } else {
      env_x = envelope_x_general(c, eps, sim.init, wbars);
      env_z = envelope_z_general(c, eps, sim.init, wbars);
    }
    checks.push_back(
        envelope_check("x_envelope", sim.times, sim.x_err, env_x, slack, verify_floor));
    checks.push_back(
        envelope_check("z_envelope", sim.times, sim.z_err, env_z, slack, verify_floor));

    BoundEnvelope env_y = envelope_y(c, eps, sim.init.y0, sim.init.fred0, wbars);
    checks.push_back(
        envelope_check("y_lemma", sim.times, sim.y_norm, env_y, slack, verify_floor));

    if (!autonomous && env_y.asymptote > 0.0) {
      double tail_max = 0.0;
      for (std::size_t k = 0; k < sim.times.size(); ++k)
        if (sim.times[k] >= 0.8 * cfg.t_end) tail_max = std::max(tail_max, sim.y_norm[k]);
      checks.push_back(scalar_check("y_limsup_tail", tail_max <= env_y.asymptote * 1.02, tail_max,
                                    env_y.asymptote * 1.02, "state-norm"));
    }

    run["checks"] = checks;
    run["integrator"] = stats_entry(sim.stats);

    write_trajectories(dir, ei, sim.rows);
    write_envelopes(dir, ei, sim.times, env_x, env_z, sim.x_err, sim.z_err, slack);
    return run;
  });
  report["runs"] = runs;

  Json cross = Json::array();
  if (autonomous && epsilons.size() >= 3) {
    // log-log slope of sup_t ||x - x_r|| against epsilon
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(epsilons.size());
    for (std::size_t i = 0; i < epsilons.size(); ++i) {
      const double lx = std::log(epsilons[i]), lyv = std::log(std::max(sup_xerr[i], 1e-300));
      sx += lx;
      sy += lyv;
      sxx += lx * lx;
      sxy += lx * lyv;
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    Json c2;
    c2["name"] = "epsilon_scaling_slope";
    c2["pass"] = slope >= 0.8 && slope <= 1.2;
    c2["measured"] = num(slope, "dimensionless");
    c2["limit"] = num(1.2, "dimensionless");
    cross.push_back(c2);
  }
  report["cross_run_checks"] = cross;
  for (const auto& n : notes) report["notes"].push_back(n);
  return report;
}

Json run_ofo_kind(const Json& j, const fs::path& dir, double slack, double verify_floor) {
  const std::string path = "scenario";
  const Json& plant = need(j, "plant", path);
  OfoProblem p;
  p.A = parse_matrix(need(plant, "A", path + ".plant"), path + ".plant.A");
  p.B = parse_matrix(need(plant, "B", path + ".plant"), path + ".plant.B");
  p.E = parse_matrix(need(plant, "E", path + ".plant"), path + ".plant.E");

  const Json& cost = need(j, "cost", path);
  const Json& phi_j = need(cost, "phi", path + ".cost");
  const Json& psi_j = need(cost, "psi", path + ".cost");
  QuadraticCost phi = make_quadratic_cost(
      parse_matrix(need(phi_j, "Q", path + ".cost.phi"), path + ".cost.phi.Q"),
      phi_j.contains("center") ? parse_vector(phi_j.at("center"), path + ".cost.phi.center")
                               : Vec(Vec::Zero(p.B.cols())));
  QuadraticCost psi = make_quadratic_cost(
      parse_matrix(need(psi_j, "Q", path + ".cost.psi"), path + ".cost.psi.Q"),
      psi_j.contains("center") ? parse_vector(psi_j.at("center"), path + ".cost.psi.center")
                               : Vec(Vec::Zero(p.A.rows())));
  p.grad_phi = phi.grad;
  p.nu = phi.strong_convexity;
  p.l_phi = phi.smoothness;
  p.grad_psi = psi.grad;
  p.l_psi = psi.smoothness;

  const Json& dist = need(j, "disturbance", path);
  p.w_z = parse_signal(need(dist, "w_z", path + ".disturbance"), static_cast<int>(p.E.cols()),
                       path + ".disturbance.w_z");

  const Json& init_j = need(j, "initial", path);
  const Vec u0 = parse_vector(need(init_j, "u", path + ".initial"), path + ".initial.u");
  const Vec z0 = parse_vector(need(init_j, "z", path + ".initial"), path + ".initial.z");
  if (u0.size() != p.n_u() || z0.size() != p.n_z()) fail(path + ".initial", "dimension mismatch");

  const std::vector<double> epsilons = parse_epsilons(j, path);
  const IntegrationConfig cfg = parse_integration(j, 60.0);
  const int grid_points = opt_int(j, "grid_points", 1200);

  p.epsilon = epsilons.front();
  p.validate();
  ConstantsTable c = ofo_constants(p);

  Json report;
  report["thresholds"]["epsilon_star_ofo"] = num(epsilon_star_ofo(p), "dimensionless");
  if (c.l_fz > 0.0 && c.l_gx > 0.0)
    report["thresholds"]["epsilon_star_general"] = num(epsilon_star_general(c), "dimensionless");
  report["constants"] = constants_entry(c);
  report["notes"].push_back(
      "transient envelopes for the tracking errors are derived envelopes (general-theorem "
      "machinery composed with the reduced-flow decay), not closed forms from the tracking "
      "theorem");

  std::vector<Json> runs = parallel_eps_runs(epsilons.size(), [&](std::size_t ei) {
    OfoProblem pe = p;
    pe.epsilon = epsilons[ei];
    TwoTimeScaleSystem sys = closed_loop(pe);
    SimData sim = simulate_two_time_scale(sys, c, u0, z0, cfg, grid_points);

    Json run;
    run["epsilon"] = num(pe.epsilon, "dimensionless");
    Json checks = Json::array();

    BoundEnvelope env_x = envelope_x_general(c, pe.epsilon, sim.init, Wbars{0.0, p.w_z.derivative_bound()});
    BoundEnvelope env_z = envelope_z_general(c, pe.epsilon, sim.init, Wbars{0.0, p.w_z.derivative_bound()});
    checks.push_back(
        envelope_check("u_envelope_general", sim.times, sim.x_err, env_x, slack, verify_floor));
    checks.push_back(
        envelope_check("z_envelope_general", sim.times, sim.z_err, env_z, slack, verify_floor));
    BoundEnvelope env_y =
        envelope_y(c, pe.epsilon, sim.init.y0, sim.init.fred0, Wbars{0.0, p.w_z.derivative_bound()});
    checks.push_back(
        envelope_check("y_lemma", sim.times, sim.y_norm, env_y, slack, verify_floor));

    // Tracking against the time-varying optimizer.
    const TrackingBounds tb = tracking_bounds(pe);
    const double burn_in =
        opt_num(j, "burn_in", 20.0 / std::min(pe.nu, c.c_g / pe.epsilon));
    double sup_u = 0.0, sup_z = 0.0;
    std::vector<double> track_u(sim.times.size()), track_z(sim.times.size());
    Vec u_star = Vec::Zero(p.n_u());
    for (std::size_t k = 0; k < sim.times.size(); ++k) {
      const Vec w = p.w_z.value(sim.times[k]);
      u_star = optimizer(pe, w, 1e-11);
      const Vec z_eq_star = steady_state(pe, u_star, w);
      track_u[k] = (sim.rows[k].x - u_star).norm();
      track_z[k] = (sim.rows[k].z - z_eq_star).norm();
      if (sim.times[k] >= burn_in) {
        sup_u = std::max(sup_u, track_u[k]);
        sup_z = std::max(sup_z, track_z[k]);
      }
    }
    checks.push_back(scalar_check("u_tracking_burnin", sup_u <= tb.u_bound * (1.0 + slack), sup_u,
                                  tb.u_bound * (1.0 + slack), "state-norm"));
    checks.push_back(scalar_check("z_tracking_burnin", sup_z <= tb.z_bound * (1.0 + slack), sup_z,
                                  tb.z_bound * (1.0 + slack), "state-norm"));

    DerivedTrackingEnvelopes denv = derived_tracking_envelopes(pe, u0, z0);
    checks.push_back(envelope_check("u_derived_envelope", sim.times, track_u, denv.u_envelope,
                                    slack, verify_floor));
    checks.push_back(envelope_check("z_derived_envelope", sim.times, track_z, denv.z_envelope,
                                    slack, verify_floor));

    run["checks"] = checks;
    run["tracking_bounds"]["u_bound_asymptotic"] = num(tb.u_bound, "state-norm");
    run["tracking_bounds"]["z_bound_asymptotic"] = num(tb.z_bound, "state-norm");
    run["burn_in"] = num(burn_in, "time");
    run["integrator"] = stats_entry(sim.stats);

    write_trajectories(dir, ei, sim.rows);
    write_envelopes(dir, ei, sim.times, env_x, env_z, sim.x_err, sim.z_err, slack);
    return run;
  });
  report["runs"] = runs;
  report["cross_run_checks"] = Json::array();
  return report;
}

Json run_lti_kind(const Json& j, const fs::path& dir, double slack, double verify_floor) {
  const std::string path = "scenario";
  LtiBlockSystem s;
  s.A = parse_matrix(need(j, "A", path), path + ".A");
  s.B = parse_matrix(need(j, "B", path), path + ".B");
  s.C = parse_matrix(need(j, "C", path), path + ".C");
  s.D = parse_matrix(need(j, "D", path), path + ".D");
  s.x_norm = parse_norm(j, "x_norm", path);
  s.z_norm = parse_norm(j, "z_norm", path);
  s.validate_dims();

  const Json& init_j = need(j, "initial", path);
  const Vec x0 = parse_vector(need(init_j, "x", path + ".initial"), path + ".initial.x");
  const Vec z0 = parse_vector(need(init_j, "z", path + ".initial"), path + ".initial.z");
  if (x0.size() != s.n_x() || z0.size() != s.n_z()) fail(path + ".initial", "dimension mismatch");

  const std::vector<double> epsilons = parse_epsilons(j, path);
  const double t_end = opt_num(j.contains("integration") ? j.at("integration") : Json::object(),
                               "t_end", 12.0);
  const int grid_points = opt_int(j, "grid_points", 800);

  Json report;
  report["thresholds"]["epsilon_star_0_lti"] = num(epsilon_star_0_lti(s), "dimensionless");
  report["thresholds"]["epsilon_star_lti"] = num(epsilon_star_lti(s), "dimensionless");
  report["notes"].push_back(
      "the contraction gain matrix is the scalar 2x2 majorant of the block display (log norms "
      "and induced cross-norms of the blocks)");

  const Mat a_red = reduced_lti(s);
  const Mat dinv_c = s.D.fullPivLu().solve(s.C);

  std::vector<Json> runs = parallel_eps_runs(epsilons.size(), [&](std::size_t ei) {
    const double eps = epsilons[ei];
    const auto grid = uniform_grid(t_end, grid_points);
    Vec st0(s.n_x() + s.n_z());
    st0 << x0, z0;
    Trajectory full = integrate_lti_exact(full_generator(s, eps), st0, grid);
    Trajectory red = integrate_lti_exact(a_red, x0, grid);

    std::vector<TrajRow> rows;
    std::vector<double> mx(grid.size()), mz(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) {
      TrajRow r;
      r.t = grid[k];
      Vec state = full.at(k);
      r.x = state.head(s.n_x());
      r.z = state.tail(s.n_z());
      r.x_r = red.at(k);
      r.z_star = -dinv_c * r.x_r;
      r.x_err = vector_norm(Vec(r.x - r.x_r), s.x_norm);
      r.z_err = vector_norm(Vec(r.z - r.z_star), s.z_norm);
      r.y_norm = vector_norm(Vec(r.z + dinv_c * r.x), s.z_norm);
      mx[k] = r.x_err;
      mz[k] = r.z_err;
      rows.push_back(r);
    }

    Json run;
    run["epsilon"] = num(eps, "dimensionless");
    Json checks = Json::array();

    auto envs = envelope_lti(s, eps, x0, z0, x0);
    checks.push_back(
        envelope_check("x_envelope_lti", grid, mx, envs.first, slack, verify_floor));
    checks.push_back(
        envelope_check("z_envelope_lti", grid, mz, envs.second, slack, verify_floor));

    // Spectrum of the shifted generator against the scaled-block spectrum.
    {
      Eigen::VectorXcd e1 = Eigen::EigenSolver<Mat>(shifted_lti(s, eps), false).eigenvalues();
      Eigen::VectorXcd e2 =
          Eigen::EigenSolver<Mat>(Mat(full_generator(s, eps)), false).eigenvalues();
      auto key = [](const std::complex<double>& a, const std::complex<double>& b) {
        return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
      };
      std::vector<std::complex<double>> v1(e1.data(), e1.data() + e1.size());
      std::vector<std::complex<double>> v2(e2.data(), e2.data() + e2.size());
      std::sort(v1.begin(), v1.end(), key);
      std::sort(v2.begin(), v2.end(), key);
      double dist = 0.0, scale = 1e-30;
      for (std::size_t i = 0; i < v1.size(); ++i) {
        dist = std::max(dist, std::abs(v1[i] - v2[i]));
        scale = std::max(scale, std::abs(v2[i]));
      }
      checks.push_back(scalar_check("shifted_spectrum_similarity", dist <= 1e-8 * scale,
                                    dist / scale, 1e-8, "dimensionless"));
    }

    if (eps < epsilon_star_lti(s)) {
      ContractionCertificate cert = contraction_certificate(s, eps);
      checks.push_back(scalar_check("certified_contraction_fit",
                                    cert.fitted_rate >= cert.rate * 0.95, cert.fitted_rate,
                                    cert.rate * 0.95, "1/time"));
      run["certificate"]["rate"] = num(cert.rate, "1/time");
      run["certificate"]["fitted_rate"] = num(cert.fitted_rate, "1/time");
      run["certificate"]["n1"] = num(cert.weights.n1, "dimensionless");
      run["certificate"]["n2"] = num(cert.weights.n2, "dimensionless");
      run["contraction_rate"] = num(cert.rate, "1/time");
    } else {
      run["certificate"]["skipped"] =
          "epsilon is not below epsilon_star_lti; no contractivity certificate applies";
    }

    run["checks"] = checks;
    run["integrator"] = stats_entry(full.stats);

    write_trajectories(dir, ei, rows);
    write_envelopes(dir, ei, grid, envs.first, envs.second, mx, mz, slack);
    return run;
  });
  report["runs"] = runs;
  report["cross_run_checks"] = Json::array();
  return report;
}

Json run_gain_lemma_kind(const Json& j, const fs::path& dir, std::uint64_t seed) {
  const int draws = opt_int(j, "draws", 10000);
  if (draws <= 0) fail("scenario.draws", "must be positive");
  std::mt19937_64 rng(j.contains("seed") ? j.at("seed").get<std::uint64_t>() : seed);
  std::uniform_real_distribution<double> pos(0.05, 5.0), nonneg(0.0, 3.0), frac(0.0, 1.0);

  int false_certs = 0;
  double worst_real = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < draws; ++i) {
    GainMatrixParams p;
    p.a11 = pos(rng);
    p.a12 = pos(rng);
    p.a21 = pos(rng);
    p.a22 = pos(rng);
    p.d22 = pos(rng);
    p.d11 = nonneg(rng);
    p.d21 = nonneg(rng);
    GainCheck pre = hurwitz_gain_check(p, 1.0);
    const double thr = pre.threshold;
    if (!std::isfinite(thr)) continue;
    const double eps = std::max(1e-9, frac(rng) * thr * (1.0 - 1e-9));
    GainCheck chk = hurwitz_gain_check(p, eps);
    if (chk.verdict != GainVerdict::below_threshold_hurwitz) continue;
    const double re = std::max(chk.eig_real[0], chk.eig_real[1]);
    worst_real = std::max(worst_real, re);
    if (re >= 0.0) ++false_certs;
  }

  write_empty_tables(dir);
  Json report;
  report["runs"] = Json::array();
  Json run;
  run["epsilon"] = num(0.0, "dimensionless");
  Json checks = Json::array();
  checks.push_back(scalar_check("gain_lemma_soundness", false_certs == 0,
                                static_cast<double>(false_certs), 0.0, "count"));
  run["checks"] = checks;
  run["draws"] = num(static_cast<double>(draws), "count");
  run["worst_certified_real_part"] = num(worst_real, "1/time");
  report["runs"].push_back(run);
  report["cross_run_checks"] = Json::array();
  report["thresholds"] = Json::object();
  return report;
}

Json run_diagram_kind(const Json& j, const fs::path& dir, std::uint64_t seed) {
  const int instances = opt_int(j, "instances", 200);
  if (instances <= 0) fail("scenario.instances", "must be positive");
  const int nx = opt_int(j, "n_x", 2), nz = opt_int(j, "n_z", 2);
  std::vector<double> eps_grid;
  if (j.contains("eps_grid"))
    for (const auto& e : j.at("eps_grid")) eps_grid.push_back(e.get<double>());
  else
    eps_grid = {1e-3, 1e-2, 1e-1, 1.0, 10.0};

  std::mt19937_64 rng(j.contains("seed") ? j.at("seed").get<std::uint64_t>() : seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  auto rand_mat = [&](int r, int c2, double scale) {
    Mat m(r, c2);
    for (int a = 0; a < r; ++a)
      for (int b = 0; b < c2; ++b) m(a, b) = scale * gauss(rng);
    return m;
  };

  int violations = 0, p11_count = 0, p21_count = 0, ordering_failures = 0;
  std::string first_violation;
  for (int i = 0; i < instances; ++i) {
    LtiBlockSystem s;
    s.A = rand_mat(nx, nx, 1.0);
    if (uni(rng) < 0.7) s.A -= (log_norm(s.A, NormKind::l2()) + 0.2 + uni(rng)) * Mat::Identity(nx, nx);
    s.D = rand_mat(nz, nz, 1.0);
    s.D -= (log_norm(s.D, NormKind::l2()) + 0.2 + uni(rng)) * Mat::Identity(nz, nz);
    s.B = rand_mat(nx, nz, 0.7);
    s.C = rand_mat(nz, nx, 0.7);
    DiagramReport rep = diagram_check(s, eps_grid);
    if (rep.p11) ++p11_count;
    if (rep.p21_log_norm) ++p21_count;
    if (!rep.consistent) {
      ++violations;
      if (first_violation.empty()) first_violation = rep.counterexample;
    }
    if (std::isfinite(rep.eps_star_1) && std::isfinite(rep.eps_star_2) &&
        rep.p21_log_norm && !(rep.eps_star_2 < rep.eps_star_1))
      ++ordering_failures;
  }

  write_empty_tables(dir);
  Json report;
  Json run;
  run["epsilon"] = num(0.0, "dimensionless");
  Json checks = Json::array();
  checks.push_back(scalar_check("diagram_implications", violations == 0,
                                static_cast<double>(violations), 0.0, "count"));
  checks.push_back(scalar_check("eps2_below_eps1_ordering", ordering_failures == 0,
                                static_cast<double>(ordering_failures), 0.0, "count"));
  run["checks"] = checks;
  run["instances"] = num(static_cast<double>(instances), "count");
  run["p11_instances"] = num(static_cast<double>(p11_count), "count");
  run["p21_instances"] = num(static_cast<double>(p21_count), "count");
  report["runs"] = Json::array({run});
  report["cross_run_checks"] = Json::array();
  report["thresholds"] = Json::object();
  if (!first_violation.empty()) report["notes"].push_back(first_violation);
  return report;
}

}  // namespace

std::string default_out_dir() {
  if (const char* env = std::getenv("SLOWFAST_OUT_DIR"); env && *env) return env;
  return "slowfast-out";
}

const std::map<std::string, std::string>& builtin_scenarios() {
  static const std::map<std::string, std::string> presets = {
      {"ofo-scalar-sine", R"JSON({
  "schema_version": 1,
  "name": "ofo-scalar-sine",
  "kind": "ofo",
  "plant": {"A": [[-1.0]], "B": [[1.0]], "E": [[1.0]]},
  "cost": {"phi": {"Q": [[1.0]]}, "psi": {"Q": [[1.0]]}},
  "disturbance": {"w_z": [{"type": "sinusoid", "amplitude": [1.0], "omega": 0.5}]},
  "initial": {"u": [0.0], "z": [0.0]},
  "epsilons": [0.2],
  "integration": {"t_end": 70.0, "rel_tol": 1e-9, "abs_tol": 1e-12, "max_step": 0.05},
  "grid_points": 1400,
  "slack": 0.05,
  "burn_in": 20.0
})JSON"},
      {"lti-unstable-A", R"JSON({
  "schema_version": 1,
  "name": "lti-unstable-A",
  "kind": "lti",
  "A": [[1.0]], "B": [[1.0]], "C": [[-3.0]], "D": [[-1.0]],
  "x_norm": "l2", "z_norm": "l2",
  "initial": {"x": [1.0], "z": [0.5]},
  "epsilons": [0.1],
  "integration": {"t_end": 12.0},
  "grid_points": 800,
  "slack": 0.01
})JSON"},
      {"general-tanh-desk", R"JSON({
  "schema_version": 1,
  "name": "general-tanh-desk",
  "kind": "general",
  "fields": {
    "preset": "tanh-coupled",
    "P": [4.0, 4.2], "Q": [1.2, 1.4],
    "S": [[0.5, 0.3], [-0.2, 0.4]],
    "T": [[1.1, -0.5], [0.4, 1.0]],
    "Wx": [[0.3], [0.1]], "Wz": [[0.2], [-0.3]],
    "d_f": [0.1, 0.05], "d_g": [0.08, 0.02],
    "bt": 0.2, "omega_t": 0.7
  },
  "disturbance": {
    "w_x": [{"type": "sinusoid", "amplitude": [0.3], "omega": 0.8}],
    "w_z": [{"type": "sinusoid", "amplitude": [0.4], "omega": 0.6}]
  },
  "initial": {"x": [0.8, -0.5], "z": [0.6, 0.2]},
  "epsilons": [0.4],
  "constants": "analytic",
  "integration": {"t_end": 40.0, "rel_tol": 1e-8, "abs_tol": 1e-11, "max_step": 0.1},
  "grid_points": 600,
  "slack": 0.01
})JSON"},
      {"autonomous-tanh-desk", R"JSON({
  "schema_version": 1,
  "name": "autonomous-tanh-desk",
  "kind": "autonomous",
  "fields": {
    "preset": "tanh-coupled",
    "P": [4.0], "Q": [1.0],
    "S": [[0.9]],
    "T": [[1.8]]
  },
  "initial": {"x": [1.0], "z": [-0.5]},
  "epsilons": [0.05, 0.02, 0.01, 0.005, 0.002],
  "constants": "analytic",
  "integration": {"t_end": 15.0, "rel_tol": 1e-9, "abs_tol": 1e-12, "max_step": 0.05},
  "grid_points": 400,
  "slack": 0.01
})JSON"},
      {"gain-lemma-sweep", R"JSON({
  "schema_version": 1,
  "name": "gain-lemma-sweep",
  "kind": "gain-lemma",
  "epsilons": [1.0],
  "draws": 10000,
  "seed": 7
})JSON"},
      {"diagram-sweep", R"JSON({
  "schema_version": 1,
  "name": "diagram-sweep",
  "kind": "diagram",
  "epsilons": [1.0],
  "instances": 200,
  "n_x": 2, "n_z": 2,
  "seed": 11
})JSON"}};
  return presets;
}

std::string list_presets() {
  std::ostringstream os;
  os << "scenario presets (usable as `run <name>`):\n";
  os << "  ofo-scalar-sine       scalar plant with quadratic costs tracking a sinusoidal "
        "disturbance\n";
  os << "  lti-unstable-A        scalar two-time scale LTI block system whose A block is "
        "unstable\n";
  os << "  general-tanh-desk     two-state tanh-coupled system with time drive and "
        "disturbances\n";
  os << "  autonomous-tanh-desk  autonomous tanh-coupled system swept over five epsilon "
        "values\n";
  os << "  gain-lemma-sweep      randomized soundness sweep of the 2x2 gain-matrix threshold\n";
  os << "  diagram-sweep         randomized check of the Hurwitz implication diagram\n";
  os << "field presets (for the `fields.preset` key of general/autonomous scenarios):\n";
  os << "  tanh-coupled          f = -P x + S tanh(z) + bt sin(wt t) u_f + Wx w_x + eps d_f;\n";
  os << "                        g = -Q z + T tanh(x) + Wz w_z + eps d_g (analytic constants)\n";
  return os.str();
}

Outcome run_json(const Json& j, const RunOptions& options) {
  if (!j.is_object()) throw ValidationError("scenario: expected a JSON object");
  const int schema = opt_int(j, "schema_version", -1);
  if (schema != 1) fail("scenario.schema_version", "expected 1");
  const std::string name = need_str(j, "name", "scenario");
  const std::string kind = need_str(j, "kind", "scenario");

  double slack = opt_num(j, "slack", 0.01);
  if (options.slack_override >= 0.0) slack = options.slack_override;
  if (!(slack > 0.0)) fail("scenario.slack", "must be positive");
  const double verify_floor = opt_num(j, "verify_floor", 1e-4);
  if (!(verify_floor >= 0.0) || verify_floor >= 1.0)
    fail("scenario.verify_floor", "must lie in [0, 1)");

  const fs::path dir = options.out_dir.empty() ? fs::path(default_out_dir())
                                               : fs::path(options.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw NumericalError("cannot create output directory " + dir.string());

  Json report;
  report["schema_version"] = 1;
  report["scenario"] = name;
  report["kind"] = kind;
  report["slack"] = num(slack, "dimensionless");
  report["notes"] = Json::array();

  Json body;
  int exit_code = 0;
  try {
    if (kind == "general" || kind == "autonomous")
      body = run_general_kind(j, dir, slack, verify_floor, kind == "autonomous", options.seed);
    else if (kind == "ofo")
      body = run_ofo_kind(j, dir, slack, verify_floor);
    else if (kind == "lti")
      body = run_lti_kind(j, dir, slack, verify_floor);
    else if (kind == "gain-lemma")
      body = run_gain_lemma_kind(j, dir, options.seed);
    else if (kind == "diagram")
      body = run_diagram_kind(j, dir, options.seed);
    else
      fail("scenario.kind", "unknown kind '" + kind + "'");
  } catch (const ValidationError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ValidationError(e.what());
  } catch (const NumericalError& e) {
    report["error"] = e.what();
    report["pass"] = false;
    std::ofstream(dir / "report.json") << report.dump(2) << "\n";
    return {3, report};
  }

  for (auto& [key, value] : body.items()) {
    if (key == "notes")
      for (const auto& n : value) report["notes"].push_back(n);
    else
      report[key] = value;
  }
  report["pass"] = all_checks_pass(report);
  if (!report["pass"].get<bool>()) exit_code = 1;

  std::ofstream(dir / "report.json") << report.dump(2) << "\n";
  return {exit_code, report};
}

Outcome run_file(const std::string& path_or_preset, const RunOptions& options) {
  Json j;
  if (fs::exists(path_or_preset)) {
    std::ifstream in(path_or_preset);
    try {
      j = Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      throw ValidationError(std::string("scenario file parse error: ") + e.what());
    }
  } else {
    const auto& presets = builtin_scenarios();
    auto it = presets.find(path_or_preset);
    if (it == presets.end())
      throw ValidationError("scenario '" + path_or_preset +
                            "' is neither a file nor a built-in preset");
    j = Json::parse(it->second);
  }
  return run_json(j, options);
}

void validate_report(const Json& report) {
  auto req = [&](const Json& j, const char* key, const char* type) {
    if (!j.contains(key)) throw ValidationError(std::string("report missing field ") + key);
    const Json& v = j.at(key);
    const std::string t = type;
    bool ok = (t == "object" && v.is_object()) || (t == "array" && v.is_array()) ||
              (t == "string" && v.is_string()) || (t == "bool" && v.is_boolean()) ||
              (t == "number" && v.is_number());
    if (!ok) throw ValidationError(std::string("report field ") + key + " must be " + type);
  };
  auto check_num = [&](const Json& v, const std::string& where) {
    const bool value_ok =
        v.is_object() && v.contains("value") &&
        (v.at("value").is_number() || v.at("value") == "unbounded" ||
         v.at("value") == "-unbounded" || v.at("value") == "undefined");
    if (!value_ok || !v.contains("unit") || !v.at("unit").is_string())
      throw ValidationError("report numeric field " + where + " must be {value, unit}");
  };
  req(report, "schema_version", "number");
  req(report, "scenario", "string");
  req(report, "kind", "string");
  req(report, "pass", "bool");
  req(report, "runs", "array");
  req(report, "notes", "array");
  if (report.contains("thresholds"))
    for (const auto& [k, v] : report.at("thresholds").items()) check_num(v, "thresholds." + k);
  for (const auto& run : report.at("runs")) {
    req(run, "checks", "array");
    for (const auto& c : run.at("checks")) {
      req(c, "name", "string");
      req(c, "pass", "bool");
    }
  }
}

}  // namespace slowfast::scenario
