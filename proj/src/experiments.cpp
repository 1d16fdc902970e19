#include "volpriv/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace volpriv {

namespace {

using nlohmann::json;

constexpr std::uint64_t kTrajectoryPurpose = 0;
constexpr std::uint64_t kMechanismPurpose = 1;

std::uint64_t stream_id(std::uint64_t purpose, int run_index) {
  return (purpose << 32) | static_cast<std::uint64_t>(run_index);
}

double nan_value() { return std::numeric_limits<double>::quiet_NaN(); }

}  // namespace

const char* to_string(Mechanism mechanism) {
  switch (mechanism) {
    case Mechanism::OptimalFilter: return "optimal";
    case Mechanism::Quantizer: return "quantizer";
    case Mechanism::TruncatedGaussian: return "gaussian";
  }
  return "?";
}

const char* to_string(Backend backend) {
  return backend == Backend::Interval ? "interval" : "ccg";
}

std::string format_g9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

std::vector<std::string> validate(const ExperimentConfig& cfg) {
  std::vector<std::string> errors;
  if (cfg.horizon < 1) errors.push_back("horizon: must be >= 1");
  if (cfg.runs < 1) errors.push_back("runs: must be >= 1");
  if (cfg.eps_x.empty()) errors.push_back("eps_x: at least one budget required");
  for (double e : cfg.eps_x)
    if (!(e > 0.0)) errors.push_back("eps_x: budgets must be positive");
  if (cfg.ccg_horizon_cap < 0) errors.push_back("ccg_horizon_cap: must be >= 0");
  if (cfg.system.empty()) errors.push_back("system: empty");
  if (cfg.output_dir.empty()) errors.push_back("output_dir: empty");
  return errors;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::runtime_error("config parse error in " + path + ": " + e.what());
  }

  static const std::set<std::string> allowed = {"system",    "horizon", "runs",
                                                "seed",      "mechanism", "eps_x",
                                                "backend",   "ccg_horizon_cap", "output_dir"};
  for (const auto& item : j.items())
    if (!allowed.count(item.key()))
      throw std::runtime_error("config: unknown key '" + item.key() + "'");

  ExperimentConfig cfg;
  if (j.contains("system")) cfg.system = j["system"].get<std::string>();
  if (j.contains("horizon")) cfg.horizon = j["horizon"].get<int>();
  if (j.contains("runs")) cfg.runs = j["runs"].get<int>();
  if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("mechanism")) {
    const std::string m = j["mechanism"].get<std::string>();
    if (m == "optimal") cfg.mechanism = Mechanism::OptimalFilter;
    else if (m == "quantizer") cfg.mechanism = Mechanism::Quantizer;
    else if (m == "gaussian") cfg.mechanism = Mechanism::TruncatedGaussian;
    else throw std::runtime_error("config: unknown mechanism '" + m + "'");
  }
  if (j.contains("eps_x")) {
    cfg.eps_x.clear();
    if (j["eps_x"].is_array())
      for (const auto& v : j["eps_x"]) cfg.eps_x.push_back(v.get<double>());
    else
      cfg.eps_x.push_back(j["eps_x"].get<double>());
  }
  if (j.contains("backend")) {
    const std::string b = j["backend"].get<std::string>();
    if (b == "interval") cfg.backend = Backend::Interval;
    else if (b == "ccg") cfg.backend = Backend::Ccg;
    else throw std::runtime_error("config: unknown backend '" + b + "'");
  }
  if (j.contains("ccg_horizon_cap")) cfg.ccg_horizon_cap = j["ccg_horizon_cap"].get<int>();
  if (j.contains("output_dir")) cfg.output_dir = j["output_dir"].get<std::string>();

  const auto errors = validate(cfg);
  if (!errors.empty()) {
    std::string msg = "config invalid:";
    for (const auto& e : errors) msg += "\n  " + e;
    throw std::runtime_error(msg);
  }
  return cfg;
}

namespace {

Eigen::MatrixXd matrix_from_json(const json& j, Eigen::Index rows, Eigen::Index cols,
                                 const std::string& name) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows * cols)
    throw std::runtime_error("system: " + name + " must be a row-major list of " +
                             std::to_string(rows * cols) + " numbers");
  Eigen::MatrixXd m(rows, cols);
  Eigen::Index idx = 0;
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = j[static_cast<size_t>(idx++)].get<double>();
  return m;
}

Intervald interval_from_json(const json& j, const std::string& name) {
  if (!j.is_object() || !j.contains("lower") || !j.contains("upper"))
    throw std::runtime_error("system: " + name + " must hold lower/upper lists");
  const auto read = [&](const json& arr) {
    Eigen::VectorXd v(arr.size());
    for (size_t i = 0; i < arr.size(); ++i) v[static_cast<Eigen::Index>(i)] = arr[i].get<double>();
    return v;
  };
  return Intervald(read(j["lower"]), read(j["upper"]));
}

json interval_to_json(const Intervald& iv) {
  json j;
  j["lower"] = std::vector<double>(iv.lower().data(), iv.lower().data() + iv.dim());
  j["upper"] = std::vector<double>(iv.upper().data(), iv.upper().data() + iv.dim());
  return j;
}

std::vector<double> matrix_to_list(const Eigen::MatrixXd& m) {
  std::vector<double> out;
  out.reserve(static_cast<size_t>(m.size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) out.push_back(m(r, c));
  return out;
}

}  // namespace

LinearSystem load_system_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open system file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::runtime_error("system parse error in " + path + ": " + e.what());
  }

  LinearSystem sys;
  sys.wx_bounds = interval_from_json(j.at("wx_bounds"), "wx_bounds");
  sys.wy_bounds = interval_from_json(j.at("wy_bounds"), "wy_bounds");
  sys.x0_bounds = interval_from_json(j.at("x0_bounds"), "x0_bounds");
  sys.y0_bounds = interval_from_json(j.at("y0_bounds"), "y0_bounds");
  const Eigen::Index n = sys.x0_bounds.dim();
  sys.a1 = matrix_from_json(j.at("a1"), n, n, "a1");
  sys.a2 = matrix_from_json(j.at("a2"), n, n, "a2");
  sys.a3 = matrix_from_json(j.at("a3"), n, n, "a3");
  sys.a4 = matrix_from_json(j.at("a4"), n, n, "a4");
  sys.b1 = matrix_from_json(j.at("b1"), n, sys.wx_bounds.dim(), "b1");
  sys.b2 = matrix_from_json(j.at("b2"), n, sys.wy_bounds.dim(), "b2");
  if (j.contains("disturbance")) {
    const std::string d = j["disturbance"].get<std::string>();
    if (d == "periodic") sys.disturbance = DisturbanceModel::PeriodicDemand;
    else if (d == "uniform") sys.disturbance = DisturbanceModel::UniformInBounds;
    else throw std::runtime_error("system: unknown disturbance model '" + d + "'");
  }

  const auto errors = volpriv::validate(sys);
  if (!errors.empty()) {
    std::string msg = "system invalid:";
    for (const auto& e : errors) msg += "\n  " + e;
    throw std::runtime_error(msg);
  }
  return sys;
}

void save_system_file(const LinearSystem& sys, const std::string& path) {
  json j;
  j["a1"] = matrix_to_list(sys.a1);
  j["a2"] = matrix_to_list(sys.a2);
  j["a3"] = matrix_to_list(sys.a3);
  j["a4"] = matrix_to_list(sys.a4);
  j["b1"] = matrix_to_list(sys.b1);
  j["b2"] = matrix_to_list(sys.b2);
  j["wx_bounds"] = interval_to_json(sys.wx_bounds);
  j["wy_bounds"] = interval_to_json(sys.wy_bounds);
  j["x0_bounds"] = interval_to_json(sys.x0_bounds);
  j["y0_bounds"] = interval_to_json(sys.y0_bounds);
  j["disturbance"] =
      sys.disturbance == DisturbanceModel::PeriodicDemand ? "periodic" : "uniform";
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write system file: " + path);
  out << j.dump(2) << "\n";
}

LinearSystem load_system(const ExperimentConfig& cfg) {
  if (cfg.system == "preset") return case_study_preset();
  return load_system_file(cfg.system);
}

MechanismRun run_mechanism(const LinearSystem& sys, Mechanism mechanism, double eps_x, int horizon,
                           std::uint64_t seed, int run_index, const QuantizerGrid* grid) {
  RngStream traj_rng(seed, stream_id(kTrajectoryPurpose, run_index));
  const Trajectory traj = simulate(sys, horizon, traj_rng);
  RngStream mech_rng(seed, stream_id(kMechanismPurpose, run_index));

  QuantizerGrid local_grid;
  if (mechanism == Mechanism::Quantizer && grid == nullptr) {
    local_grid = make_quantizer_grid(sys, eps_x, horizon);
    grid = &local_grid;
  }

  MechanismRun out;
  out.steps.reserve(static_cast<size_t>(horizon) + 1);

  std::optional<FilterState> fs;
  std::optional<AdversaryBelief> belief;

  for (int k = 0; k <= horizon; ++k) {
    const Eigen::VectorXd& x_true = traj.xs[static_cast<size_t>(k)];
    const Eigen::VectorXd& y_true = traj.ys[static_cast<size_t>(k)];
    MechanismStep step;
    step.k = k;
    step.x_true = x_true;
    step.y_true = y_true;

    try {
      if (mechanism == Mechanism::OptimalFilter) {
        if (k == 0) {
          fs.emplace(eps_x, mech_rng);
          FilterStepResult res = filter_step_k0(*fs, sys, x_true);
          step.released = res.release.m_star;
          step.seed = res.release.s_seed;
          step.eps_y_star = res.release.eps_y_star;
          step.report = res.report;
        } else {
          FilterStepResult res = filter_step(*fs, sys, x_true);
          step.released = res.release.m_star;
          step.seed = res.release.s_seed;
          step.eps_y_star = res.release.eps_y_star;
          step.report = res.report;
        }
        belief = fs->belief;
      } else {
        if (mechanism == Mechanism::Quantizer) {
          step.released = quantizer_release(x_true, *grid);
        } else {
          step.released = truncated_gaussian_release(x_true, eps_x, mech_rng);
        }
        if (k == 0) {
          belief = init_belief(sys, step.released);
          step.report.measures = measures(*belief);
          step.report.delta_x_width = Eigen::VectorXd::Zero(sys.state_dim());
          step.report.delta_y_width = Eigen::VectorXd::Zero(sys.state_dim());
        } else {
          auto [next, report] = attack_step(*belief, sys, step.released);
          belief = std::move(next);
          step.report = std::move(report);
        }
      }
    } catch (const InconsistentObservation&) {
      // A lying release (possible only for the additive-noise baseline)
      // contradicted the recursion; the run ends here.
      out.truncated_at = k;
      break;
    }
    step.belief = *belief;
    out.steps.push_back(std::move(step));
  }
  return out;
}

std::vector<CcgStepEval> evaluate_ccg(const LinearSystem& sys,
                                      const std::vector<Intervald>& released, int cap) {
  std::vector<CcgStepEval> out;
  if (released.empty()) return out;
  const int last = std::min<int>(cap, static_cast<int>(released.size()) - 1);
  try {
    CcgBelief belief = init_ccg_belief(sys, from_interval(released[0]), cap);
    out.push_back({0, interval_hull(belief.x_post), interval_hull(belief.y_post),
                   belief.counts.back()});
    for (int k = 1; k <= last; ++k) {
      belief = attack_step_ccg(belief, sys, from_interval(released[static_cast<size_t>(k)]));
      out.push_back({k, interval_hull(belief.x_post), interval_hull(belief.y_post),
                     belief.counts.back()});
    }
  } catch (const EmptySetError&) {
    // inconsistent stream: evaluated prefix is all there is
  }
  return out;
}

namespace {

struct RunningMean {
  double sum = 0.0;
  long n = 0;
  void add(double v) {
    sum += v;
    ++n;
  }
  double mean() const { return n ? sum / static_cast<double>(n) : nan_value(); }
};

struct RunStats {
  double privacy_vol = 0.0, privacy_surrogate = 0.0, utility = 0.0;
  long steps = 0;
};

std::optional<RunStats> interval_run_stats(const MechanismRun& run) {
  if (run.steps.empty()) return std::nullopt;
  RunningMean vol, surr, util;
  for (const auto& step : run.steps) {
    vol.add(step.report.measures.privacy_vol);
    surr.add(step.report.measures.privacy_surrogate);
    util.add(step.report.measures.utility);
  }
  return RunStats{vol.mean(), surr.mean(), util.mean(), vol.n};
}

std::optional<RunStats> ccg_run_stats(const LinearSystem& sys, const MechanismRun& run, int cap) {
  std::vector<Intervald> released;
  released.reserve(run.steps.size());
  for (const auto& step : run.steps) released.push_back(step.released);
  const auto evals = evaluate_ccg(sys, released, cap);
  if (evals.empty()) return std::nullopt;
  RunningMean vol, surr, util;
  for (const auto& e : evals) {
    vol.add(e.y_hull.volume());
    surr.add(e.y_hull.surrogate_volume());
    const double xv = e.x_hull.volume();
    util.add(xv == 0.0 ? std::numeric_limits<double>::infinity() : 1.0 / xv);
  }
  return RunStats{vol.mean(), surr.mean(), util.mean(), vol.n};
}

}  // namespace

TradeoffTable run_tradeoff(const ExperimentConfig& cfg, const LinearSystem& sys) {
  const std::vector<Mechanism> mechanisms = {Mechanism::OptimalFilter, Mechanism::Quantizer,
                                             Mechanism::TruncatedGaussian};
  const int horizon =
      cfg.backend == Backend::Ccg ? std::min(cfg.horizon, cfg.ccg_horizon_cap) : cfg.horizon;

  TradeoffTable table;
  for (Mechanism mech : mechanisms) {
    for (double eps : cfg.eps_x) {
      QuantizerGrid grid;
      if (mech == Mechanism::Quantizer) grid = make_quantizer_grid(sys, eps, cfg.horizon);

      std::vector<RunStats> stats;
      int truncated = 0;
      for (int run = 0; run < cfg.runs; ++run) {
        const MechanismRun r = run_mechanism(sys, mech, eps, horizon, cfg.seed, run,
                                             mech == Mechanism::Quantizer ? &grid : nullptr);
        if (r.truncated_at >= 0) ++truncated;
        const auto s = cfg.backend == Backend::Ccg ? ccg_run_stats(sys, r, cfg.ccg_horizon_cap)
                                                   : interval_run_stats(r);
        if (s) stats.push_back(*s);
      }

      TradeoffPoint point;
      point.mechanism = mech;
      point.eps_x = eps;
      point.runs = static_cast<int>(stats.size());
      point.truncated_runs = truncated;
      if (!stats.empty()) {
        RunningMean vol, surr, util;
        for (const auto& s : stats) {
          vol.add(s.privacy_vol);
          surr.add(s.privacy_surrogate);
          util.add(s.utility);
          point.steps += s.steps;
        }
        point.mean_privacy_vol = vol.mean();
        point.mean_privacy_surrogate = surr.mean();
        point.mean_utility = util.mean();
        if (stats.size() > 1) {
          double var_s = 0.0, var_u = 0.0;
          for (const auto& s : stats) {
            var_s += (s.privacy_surrogate - point.mean_privacy_surrogate) *
                     (s.privacy_surrogate - point.mean_privacy_surrogate);
            var_u += (s.utility - point.mean_utility) * (s.utility - point.mean_utility);
          }
          const double denom = static_cast<double>(stats.size() - 1) * stats.size();
          point.se_privacy_surrogate = std::sqrt(var_s / denom);
          point.se_utility = std::sqrt(var_u / denom);
        }
      } else {
        point.mean_privacy_vol = nan_value();
        point.mean_privacy_surrogate = nan_value();
        point.mean_utility = nan_value();
      }
      table.points.push_back(point);
    }
  }

  // min-max scaling anchored to the additive-noise baseline's sweep
  double pmin = std::numeric_limits<double>::infinity(), pmax = -pmin;
  double umin = pmin, umax = -pmin;
  for (const auto& pt : table.points) {
    if (pt.mechanism != Mechanism::TruncatedGaussian || pt.runs == 0) continue;
    pmin = std::min(pmin, pt.mean_privacy_surrogate);
    pmax = std::max(pmax, pt.mean_privacy_surrogate);
    umin = std::min(umin, pt.mean_utility);
    umax = std::max(umax, pt.mean_utility);
  }
  table.privacy_scale_min = pmin;
  table.privacy_scale_max = pmax;
  table.utility_scale_min = umin;
  table.utility_scale_max = umax;
  const double pspan = pmax - pmin, uspan = umax - umin;
  for (auto& pt : table.points) {
    pt.norm_privacy = pspan > 0.0 ? (pt.mean_privacy_surrogate - pmin) / pspan : nan_value();
    pt.norm_utility = uspan > 0.0 ? (pt.mean_utility - umin) / uspan : nan_value();
  }
  return table;
}

void accumulate_audit(AuditSummary& summary, const MechanismStep& step, bool sound_x, bool sound_y,
                      double tol) {
  ++summary.steps;
  const BoundChecks& c = step.report.checks;
  summary.max_route_residual = std::max(summary.max_route_residual, c.route_residual);
  summary.max_radius_residual = std::max(summary.max_radius_residual, c.radius_residual);
  summary.max_reduction_residual = std::max(
      summary.max_reduction_residual, std::max(c.reduction_lower_residual, c.reduction_upper_residual));
  summary.max_sandwich_residual = std::max(
      summary.max_sandwich_residual, std::max(c.sandwich_lower_residual, c.sandwich_upper_residual));
  if (c.route_residual > tol) ++summary.route_violations;
  if (c.radius_residual > tol) ++summary.radius_violations;
  if (c.reduction_lower_residual > tol || c.reduction_upper_residual > tol)
    ++summary.reduction_violations;
  if (c.sandwich_lower_residual > tol || c.sandwich_upper_residual > tol)
    ++summary.sandwich_violations;
  if (!sound_x || !sound_y) ++summary.soundness_violations;
}

namespace {

std::ofstream open_csv(const std::string& path) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

void dim_headers(std::ostream& os, const char* stem, Eigen::Index n) {
  for (Eigen::Index i = 0; i < n; ++i) os << "," << stem << "[" << i << "]";
}

void emit_vector(std::ostream& os, const Eigen::VectorXd& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) os << "," << format_g9(v[i]);
}

}  // namespace

void write_timeseries_csv(const ExperimentConfig& cfg, const LinearSystem& sys,
                          const std::string& path) {
  auto out = open_csv(path);
  const Eigen::Index n = sys.state_dim();
  out << "# volpriv timeseries schema=1 system=" << cfg.system
      << " mechanism=" << to_string(cfg.mechanism) << " horizon=" << cfg.horizon
      << " runs=" << cfg.runs << " seed=" << cfg.seed << "\n";
  out << "run,k,mechanism,eps_x";
  dim_headers(out, "x_true", n);
  dim_headers(out, "y_true", n);
  dim_headers(out, "release_lo", n);
  dim_headers(out, "release_up", n);
  dim_headers(out, "x_post_lo", n);
  dim_headers(out, "x_post_up", n);
  dim_headers(out, "y_post_lo", n);
  dim_headers(out, "y_post_up", n);
  dim_headers(out, "x_pred_lo", n);
  dim_headers(out, "x_pred_up", n);
  dim_headers(out, "y_pred_lo", n);
  dim_headers(out, "y_pred_up", n);
  dim_headers(out, "x_hat", n);
  dim_headers(out, "y_hat", n);
  out << ",privacy_vol,privacy_surrogate,utility,leak,leak_subtraction,center_shift,eps_y_star"
      << ",sound_x,sound_y,y_shrinks,radius_resid,reduction_lower_resid,reduction_upper_resid"
      << ",sandwich_lower_resid,sandwich_upper_resid,route_resid,run_truncated_at\n";

  for (double eps : cfg.eps_x) {
    QuantizerGrid grid;
    if (cfg.mechanism == Mechanism::Quantizer) grid = make_quantizer_grid(sys, eps, cfg.horizon);
    for (int run = 0; run < cfg.runs; ++run) {
      const MechanismRun r =
          run_mechanism(sys, cfg.mechanism, eps, cfg.horizon, cfg.seed, run,
                        cfg.mechanism == Mechanism::Quantizer ? &grid : nullptr);
      for (const auto& step : r.steps) {
        const auto& b = step.belief;
        out << run << "," << step.k << "," << to_string(cfg.mechanism) << "," << format_g9(eps);
        emit_vector(out, step.x_true);
        emit_vector(out, step.y_true);
        emit_vector(out, step.released.lower());
        emit_vector(out, step.released.upper());
        emit_vector(out, b.x_post.lower());
        emit_vector(out, b.x_post.upper());
        emit_vector(out, b.y_post.lower());
        emit_vector(out, b.y_post.upper());
        emit_vector(out, b.x_pred.lower());
        emit_vector(out, b.x_pred.upper());
        emit_vector(out, b.y_pred.lower());
        emit_vector(out, b.y_pred.upper());
        emit_vector(out, b.x_post.center());
        emit_vector(out, b.y_post.center());
        const auto& rep = step.report;
        out << "," << format_g9(rep.measures.privacy_vol) << ","
            << format_g9(rep.measures.privacy_surrogate) << "," << format_g9(rep.measures.utility)
            << "," << format_g9(rep.leak_surrogate) << "," << format_g9(rep.leak_subtraction)
            << "," << format_g9(rep.center_shift) << "," << format_g9(step.eps_y_star);
        const bool sound_x = b.x_post.contains(step.x_true, 1e-9);
        const bool sound_y = b.y_post.contains(step.y_true, 1e-9);
        const bool shrinks = b.y_post.subset_of(b.y_pred, 1e-9);
        out << "," << (sound_x ? 1 : 0) << "," << (sound_y ? 1 : 0) << "," << (shrinks ? 1 : 0);
        out << "," << format_g9(rep.checks.radius_residual) << ","
            << format_g9(rep.checks.reduction_lower_residual) << ","
            << format_g9(rep.checks.reduction_upper_residual) << ","
            << format_g9(rep.checks.sandwich_lower_residual) << ","
            << format_g9(rep.checks.sandwich_upper_residual) << ","
            << format_g9(rep.checks.route_residual) << "," << r.truncated_at << "\n";
      }
    }
  }
}

void write_tradeoff_csv(const ExperimentConfig& cfg, const TradeoffTable& table,
                        const std::string& path) {
  auto out = open_csv(path);
  out << "# volpriv tradeoff schema=1 system=" << cfg.system
      << " backend=" << to_string(cfg.backend) << " horizon=" << cfg.horizon
      << " runs=" << cfg.runs << " seed=" << cfg.seed << " ccg_horizon_cap=" << cfg.ccg_horizon_cap
      << " normalization=minmax_over_gaussian_sweep privacy_scale=["
      << format_g9(table.privacy_scale_min) << "," << format_g9(table.privacy_scale_max)
      << "] utility_scale=[" << format_g9(table.utility_scale_min) << ","
      << format_g9(table.utility_scale_max) << "]\n";
  out << "mechanism,eps_x,mean_privacy_vol,mean_privacy_surrogate,se_privacy_surrogate,"
      << "mean_utility,se_utility,norm_privacy,norm_utility,runs,truncated_runs,steps\n";
  for (const auto& pt : table.points) {
    out << to_string(pt.mechanism) << "," << format_g9(pt.eps_x) << ","
        << format_g9(pt.mean_privacy_vol) << "," << format_g9(pt.mean_privacy_surrogate) << ","
        << format_g9(pt.se_privacy_surrogate) << "," << format_g9(pt.mean_utility) << ","
        << format_g9(pt.se_utility) << "," << format_g9(pt.norm_privacy) << ","
        << format_g9(pt.norm_utility) << "," << pt.runs << "," << pt.truncated_runs << ","
        << pt.steps << "\n";
  }
}

AuditSummary write_audit_csv(const ExperimentConfig& cfg, const LinearSystem& sys,
                             const std::string& path) {
  auto out = open_csv(path);
  out << "# volpriv audit schema=1 system=" << cfg.system
      << " mechanism=" << to_string(cfg.mechanism) << " horizon=" << cfg.horizon
      << " runs=" << cfg.runs << " seed=" << cfg.seed << "\n";
  out << "run,k,eps_x,leak,route_resid,radius_ok,radius_resid,reduction_lower_ok,"
      << "reduction_lower_resid,reduction_upper_ok,reduction_upper_resid,sandwich_lower_ok,"
      << "sandwich_lower_resid,sandwich_upper_ok,sandwich_upper_resid,sound_x,sound_y\n";

  AuditSummary summary;
  for (double eps : cfg.eps_x) {
    QuantizerGrid grid;
    if (cfg.mechanism == Mechanism::Quantizer) grid = make_quantizer_grid(sys, eps, cfg.horizon);
    for (int run = 0; run < cfg.runs; ++run) {
      const MechanismRun r =
          run_mechanism(sys, cfg.mechanism, eps, cfg.horizon, cfg.seed, run,
                        cfg.mechanism == Mechanism::Quantizer ? &grid : nullptr);
      if (r.truncated_at >= 0) ++summary.truncated_runs;
      for (const auto& step : r.steps) {
        const auto& c = step.report.checks;
        const bool sound_x = step.belief.x_post.contains(step.x_true, 1e-9);
        const bool sound_y = step.belief.y_post.contains(step.y_true, 1e-9);
        accumulate_audit(summary, step, sound_x, sound_y);
        out << run << "," << step.k << "," << format_g9(eps) << ","
            << format_g9(step.report.leak_surrogate) << "," << format_g9(c.route_residual) << ","
            << (c.radius_ok ? 1 : 0) << "," << format_g9(c.radius_residual) << ","
            << (c.reduction_lower_ok ? 1 : 0) << "," << format_g9(c.reduction_lower_residual)
            << "," << (c.reduction_upper_ok ? 1 : 0) << ","
            << format_g9(c.reduction_upper_residual) << "," << (c.sandwich_lower_ok ? 1 : 0) << ","
            << format_g9(c.sandwich_lower_residual) << "," << (c.sandwich_upper_ok ? 1 : 0) << ","
            << format_g9(c.sandwich_upper_residual) << "," << (sound_x ? 1 : 0) << ","
            << (sound_y ? 1 : 0) << "\n";
      }
    }
  }
  return summary;
}

std::string dump_release_lp(const ExperimentConfig& cfg, const LinearSystem& sys, int step) {
  if (step < 1) throw std::invalid_argument("dump_release_lp: step must be >= 1");
  const double eps = cfg.eps_x.front();
  RngStream traj_rng(cfg.seed, stream_id(kTrajectoryPurpose, 0));
  const Trajectory traj = simulate(sys, step, traj_rng);
  FilterState fs(eps, RngStream(cfg.seed, stream_id(kMechanismPurpose, 0)));
  filter_step_k0(fs, sys, traj.xs[0]);
  for (int k = 1; k < step; ++k) filter_step(fs, sys, traj.xs[static_cast<size_t>(k)]);

  auto [x_pred, y_pred] = predict(*fs.belief, sys);
  (void)y_pred;
  const Eigen::VectorXd x_in = traj.xs[static_cast<size_t>(step)]
                                   .cwiseMax(x_pred.lower())
                                   .cwiseMin(x_pred.upper());
  const Intervald seed_box = make_seed_set(x_in, x_pred, eps, fs.rng);
  const LpProblem release_lp = build_release_lp(sys, fs.belief->x_post, fs.belief->y_post, x_pred, seed_box, eps);
  return dump_to_string(release_lp);
}

}  // namespace volpriv
