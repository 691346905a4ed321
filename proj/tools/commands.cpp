#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <ostream>
#include <random>
#include <set>

#include <nlohmann/json.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "ralmkit/certify.hpp"
#include "ralmkit/io.hpp"

namespace ralmkit::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kSchemaVersion = 1;

// Typed access with the dotted path in every message.
class Node {
 public:
  Node(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_or_root() + ": expected an object");
  }

  bool has(const char* key) const { return j_.contains(key); }

  Node child(const char* key) const {
    if (!has(key)) throw ConfigError(sub(key) + ": missing");
    return Node(j_.at(key), sub(key));
  }

  double num(const char* key, double fallback) const {
    if (!has(key)) return fallback;
    return num(key);
  }
  double num(const char* key) const {
    const json& v = need(key);
    if (!v.is_number()) throw ConfigError(sub(key) + ": expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError(sub(key) + ": must be finite");
    return d;
  }

  long long integer(const char* key, long long fallback) const {
    if (!has(key)) return fallback;
    return integer(key);
  }
  long long integer(const char* key) const {
    const json& v = need(key);
    if (!v.is_number_integer()) throw ConfigError(sub(key) + ": expected an integer");
    return v.get<long long>();
  }

  bool boolean(const char* key, bool fallback) const {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_boolean()) throw ConfigError(sub(key) + ": expected true/false");
    return v.get<bool>();
  }

  std::string str(const char* key) const {
    const json& v = need(key);
    if (!v.is_string()) throw ConfigError(sub(key) + ": expected a string");
    return v.get<std::string>();
  }

  void only(std::initializer_list<const char*> allowed) const {
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, value] : j_.items()) {
      if (!ok.count(key)) throw ConfigError(sub(key.c_str()) + ": unknown field");
    }
  }

  std::string sub(const char* key) const {
    return path_.empty() ? std::string(key) : path_ + "." + key;
  }

 private:
  const json& need(const char* key) const {
    if (!has(key)) throw ConfigError(sub(key) + ": missing");
    return j_.at(key);
  }
  std::string path_or_root() const { return path_.empty() ? "config" : path_; }

  const json& j_;
  std::string path_;
};

fs::path existing_path(const Node& n, const char* key, const fs::path& base) {
  fs::path p = n.str(key);
  if (p.is_relative()) p = base / p;
  if (!fs::exists(p)) throw ConfigError(n.sub(key) + ": file not found: " + p.string());
  return p;
}

fs::path output_path(const Node& n, const char* key, const fs::path& base) {
  fs::path p = n.str(key);
  return p.is_relative() ? base / p : p;
}

Eigen::Index positive_index(const Node& n, const char* key) {
  const long long v = n.integer(key);
  if (v <= 0) throw ConfigError(n.sub(key) + ": must be positive");
  return static_cast<Eigen::Index>(v);
}

CmBlock parse_cm(const Node& n) {
  n.only({"n", "r", "mu", "len"});
  CmBlock b;
  try {
    b.instance = make_cm_instance(positive_index(n, "n"), positive_index(n, "r"),
                                  n.num("mu"), n.num("len"));
  } catch (const DomainError& e) {
    throw ConfigError(n.sub("") + " " + e.what());
  }
  return b;
}

RmcBlock parse_rmc(const Node& n, const fs::path& base) {
  n.only({"observed", "format", "mask", "generator", "r", "mu"});
  const bool from_file = n.has("observed");
  if (from_file == n.has("generator")) {
    throw ConfigError(n.sub("observed") + ": give exactly one of observed / generator");
  }
  RmcBlock b;
  RmcInstance& inst = b.instance;
  const Eigen::Index r = positive_index(n, "r");
  if (from_file) {
    const fs::path data = existing_path(n, "observed", base);
    std::string format = n.has("format") ? n.str("format") : "csv";
    if (format == "csv") {
      inst.a = load_csv(data);
      if (n.has("mask")) {
        inst.omega = load_csv(existing_path(n, "mask", base));
        require_same_shape(inst.a, inst.omega, "rmc mask");
        for (Eigen::Index j = 0; j < inst.omega.cols(); ++j) {
          for (Eigen::Index i = 0; i < inst.omega.rows(); ++i) {
            const double w = inst.omega(i, j);
            if (w != 0.0 && w != 1.0) {
              throw ConfigError(n.sub("mask") + ": entries must be 0 or 1");
            }
          }
        }
      } else {
        inst.omega = Matrix::Ones(inst.a.rows(), inst.a.cols());
      }
    } else if (format == "matrix-market") {
      if (n.has("mask")) {
        throw ConfigError(n.sub("mask") + ": Matrix Market input carries its own pattern");
      }
      SparseObservations obs = load_matrix_market(data);
      inst.a = std::move(obs.values);
      inst.omega = std::move(obs.mask);
    } else {
      throw ConfigError(n.sub("format") + ": expected csv or matrix-market");
    }
    inst.m = inst.a.rows();
    inst.n = inst.a.cols();
    inst.r = r;
  } else {
    const Node g = n.child("generator");
    g.only({"m", "n", "observed_fraction", "outlier_density", "outlier_magnitude", "seed"});
    RmcGeneratorParams prm;
    prm.m = positive_index(g, "m");
    prm.n = positive_index(g, "n");
    prm.r = r;
    prm.observed_fraction = g.num("observed_fraction", prm.observed_fraction);
    prm.outlier_density = g.num("outlier_density", prm.outlier_density);
    prm.outlier_magnitude = g.num("outlier_magnitude", prm.outlier_magnitude);
    const long long seed = g.integer("seed", 1);
    if (seed < 0) throw ConfigError(g.sub("seed") + ": must be nonnegative");
    prm.seed = static_cast<std::uint64_t>(seed);
    inst = generate_rmc(prm);
  }
  inst.mu = n.num("mu", 1.0);
  if (!(inst.mu > 0.0)) throw ConfigError(n.sub("mu") + ": must be positive");
  if (r > std::min(inst.m, inst.n)) throw ConfigError(n.sub("r") + ": exceeds min(m, n)");
  return b;
}

TieBreak parse_tie(const Node& n, const char* key, TieBreak fallback) {
  if (!n.has(key)) return fallback;
  const std::string s = n.str(key);
  if (s == "zero") return TieBreak::kZero;
  if (s == "one") return TieBreak::kOne;
  throw ConfigError(n.sub(key) + ": expected zero or one");
}

NewtonConfig parse_newton(const Node& n) {
  n.only({"nu_bar", "eta_scale", "eta_power", "armijo", "backtrack", "beta0", "beta1",
          "power", "max_backtracks", "max_iter", "cg_max_iter", "grad_tol", "tie_break"});
  NewtonConfig c;
  c.nu_bar = n.num("nu_bar", c.nu_bar);
  c.eta_scale = n.num("eta_scale", c.eta_scale);
  c.eta_power = n.num("eta_power", c.eta_power);
  c.armijo = n.num("armijo", c.armijo);
  c.backtrack = n.num("backtrack", c.backtrack);
  c.beta0 = n.num("beta0", c.beta0);
  c.beta1 = n.num("beta1", c.beta1);
  c.power = n.num("power", c.power);
  c.max_backtracks = static_cast<int>(n.integer("max_backtracks", c.max_backtracks));
  c.max_iter = static_cast<int>(n.integer("max_iter", c.max_iter));
  c.cg_max_iter = static_cast<int>(n.integer("cg_max_iter", c.cg_max_iter));
  c.grad_tol = n.num("grad_tol", c.grad_tol);
  c.tie_break = parse_tie(n, "tie_break", c.tie_break);
  return c;
}

RalmConfig parse_solver(const Node& n) {
  n.only({"rho0", "rho_bar", "gamma", "rho_max", "residual_ratio", "eps0", "eps_decay",
          "criterion", "exact_c", "kkt_tol", "max_outer", "newton"});
  RalmConfig c;
  c.rho0 = n.num("rho0", c.rho0);
  c.rho_bar = n.num("rho_bar", c.rho_bar);
  c.gamma = n.num("gamma", c.gamma);
  c.rho_max = n.num("rho_max", c.rho_max);
  c.residual_ratio = n.num("residual_ratio", c.residual_ratio);
  c.eps0 = n.num("eps0", c.eps0);
  c.eps_decay = n.num("eps_decay", c.eps_decay);
  if (n.has("criterion")) {
    try {
      c.criterion = parse_inner_criterion(n.str("criterion"));
    } catch (const Error& e) {
      throw ConfigError(n.sub("criterion") + ": " + e.what());
    }
  }
  c.exact_c = n.num("exact_c", c.exact_c);
  c.kkt_tol = n.num("kkt_tol", c.kkt_tol);
  c.max_outer = static_cast<int>(n.integer("max_outer", c.max_outer));
  if (n.has("newton")) c.newton = parse_newton(n.child("newton"));
  try {
    c.validate();
  } catch (const Error& e) {
    throw ConfigError(n.sub("") + " " + e.what());
  }
  return c;
}

Point load_point(const Manifold& mf, const fs::path& path) {
  const Matrix x = load_csv(path);
  if (x.rows() != mf.rows() || x.cols() != mf.cols()) {
    throw ShapeError("point " + path.string() + ": expected " + std::to_string(mf.rows()) +
                     "x" + std::to_string(mf.cols()) + ", got " + std::to_string(x.rows()) +
                     "x" + std::to_string(x.cols()));
  }
  return mf.make_point(x);
}

Matrix load_multiplier(const Problem& p, const Point& x, const fs::path& path) {
  const Matrix y = load_csv(path);
  const Matrix gx = p.g(x);
  if (y.rows() != gx.rows() || y.cols() != gx.cols()) {
    throw ShapeError("multiplier " + path.string() + ": shape does not match g(x)");
  }
  return y;
}

Point initial_point(const RunConfig& cfg, const Problem& p) {
  Point x = cfg.init_point ? load_point(p.manifold, *cfg.init_point)
                           : p.manifold.random_point(cfg.seed);
  if (cfg.init_perturb != 0.0) {
    x = p.manifold.retract(x, cfg.init_perturb * p.manifold.random_tangent(x, cfg.seed));
  }
  return x;
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double rel_err(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1.0});
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text, const fs::path& base_dir) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  const Node root(j, "");
  root.only({"schema_version", "problem", "solver", "init", "certify", "output"});
  if (root.integer("schema_version", kSchemaVersion) != kSchemaVersion) {
    throw ConfigError("schema_version: unsupported (expected 1)");
  }

  RunConfig cfg;
  cfg.base_dir = base_dir;

  const Node problem = root.child("problem");
  problem.only({"cm", "rmc"});
  if (problem.has("cm") == problem.has("rmc")) {
    throw ConfigError("problem: exactly one of cm / rmc is required");
  }
  if (problem.has("cm")) {
    cfg.problem = parse_cm(problem.child("cm"));
  } else {
    cfg.problem = parse_rmc(problem.child("rmc"), base_dir);
  }

  if (root.has("solver")) cfg.solver = parse_solver(root.child("solver"));

  if (root.has("init")) {
    const Node init = root.child("init");
    init.only({"point", "multiplier", "perturb"});
    if (init.has("point")) cfg.init_point = existing_path(init, "point", base_dir);
    if (init.has("multiplier")) cfg.init_multiplier = existing_path(init, "multiplier", base_dir);
    cfg.init_perturb = init.num("perturb", 0.0);
    if (cfg.init_perturb < 0.0) throw ConfigError("init.perturb: must be nonnegative");
  }

  if (root.has("certify")) {
    const Node c = root.child("certify");
    c.only({"rho", "enumerate", "stationarity_tol"});
    cfg.certify_rho = c.num("rho", cfg.certify_rho);
    if (!(cfg.certify_rho > 0.0)) throw ConfigError("certify.rho: must be positive");
    cfg.certify_enumerate = c.boolean("enumerate", cfg.certify_enumerate);
    cfg.stationarity_tol = c.num("stationarity_tol", cfg.stationarity_tol);
  }

  if (root.has("output")) {
    const Node o = root.child("output");
    o.only({"log", "plot", "point", "multiplier", "seed"});
    if (o.has("log")) cfg.log_path = output_path(o, "log", base_dir);
    if (o.has("plot")) cfg.plot_path = output_path(o, "plot", base_dir);
    if (o.has("point")) cfg.point_out = output_path(o, "point", base_dir);
    if (o.has("multiplier")) cfg.multiplier_out = output_path(o, "multiplier", base_dir);
    const long long seed = o.integer("seed", 1);
    if (seed < 0) throw ConfigError("output.seed: must be nonnegative");
    cfg.seed = static_cast<std::uint64_t>(seed);
  }
  return cfg;
}

RunConfig load_run_config(const fs::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const Error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return parse_run_config(text, path.parent_path());
}

Problem build_problem(const RunConfig& cfg) {
  if (const auto* cm = std::get_if<CmBlock>(&cfg.problem)) return build_cm(cm->instance);
  return build_rmc(std::get<RmcBlock>(cfg.problem).instance);
}

double theta_weight(const RunConfig& cfg) {
  if (const auto* cm = std::get_if<CmBlock>(&cfg.problem)) return cm->instance.mu;
  return std::get<RmcBlock>(cfg.problem).instance.mu;
}

void init_logging() {
  auto logger = spdlog::get("ralmkit");
  if (!logger) logger = spdlog::stderr_logger_mt("ralmkit");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  const char* env = std::getenv("RALMKIT_LOG_LEVEL");
  const std::string level = env ? env : "info";
  if (level == "error") {
    spdlog::set_level(spdlog::level::err);
  } else if (level == "debug") {
    spdlog::set_level(spdlog::level::debug);
  } else {
    if (level != "info") spdlog::warn("RALMKIT_LOG_LEVEL={} not recognized, using info", level);
    spdlog::set_level(spdlog::level::info);
  }
}

int cmd_solve(const fs::path& config, std::optional<std::uint64_t> seed,
              std::ostream& out, std::ostream& err) {
  try {
    RunConfig cfg = load_run_config(config);
    if (seed) cfg.seed = *seed;
    const Problem p = build_problem(cfg);
    const Point x0 = initial_point(cfg, p);
    const Matrix y0 = cfg.init_multiplier ? load_multiplier(p, x0, *cfg.init_multiplier)
                                          : Matrix::Zero(p.g(x0).rows(), p.g(x0).cols());
    spdlog::info("solve: {} on {} ({}x{}), seed {}", p.name, to_string(p.manifold.kind()),
                 p.manifold.rows(), p.manifold.cols(), cfg.seed);

    const RalmResult res = ralm_solve(p, cfg.solver, x0, y0);
    for (const IterateRecord& r : res.records) {
      spdlog::debug("k={} rho={:.3g} inner={} R={:.3e}", r.k, r.rho, r.inner_iters,
                    r.kkt_residual);
    }
    for (const std::string& w : res.warnings) spdlog::warn("{}", w);

    if (cfg.log_path) save_log(*cfg.log_path, res.records);
    if (cfg.point_out) save_csv(*cfg.point_out, res.x.ambient());
    if (cfg.multiplier_out) save_csv(*cfg.multiplier_out, res.y);
    if (cfg.plot_path) {
      try {
        write_file_atomic(*cfg.plot_path, residual_svg(res.records));
      } catch (const std::exception& e) {
        spdlog::warn("plot not written: {}", e.what());
      }
    }

    const IterateRecord& last = res.records.back();
    const bool converged = res.status == RalmStatus::kConverged;
    json summary = {
        {"status", converged ? "converged" : "max_iterations"},
        {"outer_iterations", last.k},
        {"kkt_residual", last.kkt_residual},
        {"objective", p.f(res.x) + p.theta->value(p.g(res.x))},
        {"rho", last.rho},
    };
    out << summary.dump() << "\n";
    return converged ? 0 : 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

int cmd_certify(const fs::path& config, const fs::path& point, const fs::path& multiplier,
                std::ostream& out, std::ostream& err) {
  try {
    const RunConfig cfg = load_run_config(config);
    const Problem p = build_problem(cfg);
    const Point x = load_point(p.manifold, point);
    const Matrix y = load_multiplier(p, x, multiplier);

    const double residual = kkt_residual(p, x, y);
    json report;
    report["stationarity_residual"] = residual;
    report["cone_dim"] = nullptr;
    report["mssosc_min_eig"] = nullptr;
    json verdicts = {{"mssosc", nullptr}, {"genhess", nullptr}};

    if (residual <= cfg.stationarity_tol) {
      try {
        const SubspaceBasis basis = critical_cone_basis(p, x, y);
        const Certificate c = mssosc_from_basis(p, x, y, basis);
        report["cone_dim"] = basis.dimension();
        report["mssosc_min_eig"] = finite_or_null(c.min_eigenvalue);
        verdicts["mssosc"] = to_string(c.verdict);
      } catch (const InvariantError& e) {
        spdlog::warn("critical cone unavailable: {}", e.what());
      }
    } else {
      spdlog::warn("input is not stationary (residual {:.3e} > {:.1e}); cone fields omitted",
                   residual, cfg.stationarity_tol);
    }

    const Certificate g = genhess_min_eig(p, cfg.certify_rho, x, y, cfg.certify_enumerate);
    report["genhess_min_eig"] = g.min_eigenvalue;
    report["genhess_rho"] = cfg.certify_rho;
    report["genhess_elements"] = g.elements_enumerated;
    report["genhess_partial"] = g.partial;
    verdicts["genhess"] = to_string(g.verdict);
    report["verdicts"] = verdicts;
    out << report.dump(2) << "\n";
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

int cmd_rate(const fs::path& log, double tail_fraction, std::ostream& out,
             std::ostream& err) {
  try {
    const std::vector<IterateRecord> records = load_log(log);
    std::vector<double> residuals;
    residuals.reserve(records.size());
    for (const IterateRecord& r : records) residuals.push_back(r.kkt_residual);
    const RateFit fit = fit_linear_rate(residuals, tail_fraction);
    out << json({{"rate", fit.rate}, {"fit_quality", fit.fit_quality}, {"points", fit.points}})
               .dump()
        << "\n";
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

int cmd_gradcheck(const fs::path& config, int samples, std::optional<std::uint64_t> seed,
                  std::ostream& out, std::ostream& err) {
  try {
    if (samples <= 0) throw DomainError("--samples must be positive");
    RunConfig cfg = load_run_config(config);
    if (seed) cfg.seed = *seed;
    const Problem p = build_problem(cfg);
    const Manifold& mf = p.manifold;
    const double rho = cfg.certify_rho;
    const double mu = theta_weight(cfg);
    const double h_grad = 1e-6;
    const double h_hess = 1e-6;

    double grad_err = 0.0;
    double hess_err = 0.0;
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    for (int s = 0; s < samples; ++s) {
      const std::uint64_t sd = cfg.seed * 1000003ULL + static_cast<std::uint64_t>(s);
      const Point x = mf.random_point(sd);
      const Matrix xi = mf.random_tangent(x, sd + 17);
      Matrix y = p.g(x);
      for (Eigen::Index j = 0; j < y.cols(); ++j) {
        for (Eigen::Index i = 0; i < y.rows(); ++i) y(i, j) = mu * unif(rng);
      }

      const Matrix grad = auglag_rgrad(p, rho, x, y);
      const double fd = (auglag_value(p, rho, mf.retract(x, h_grad * xi), y) -
                         auglag_value(p, rho, mf.retract(x, -h_grad * xi), y)) /
                        (2.0 * h_grad);
      grad_err = std::max(grad_err, rel_err(mf.inner(grad, xi), fd));

      const Matrix hv = auglag_ghess_vec(p, rho, x, y, xi);
      const Matrix gp = mf.project(x, auglag_rgrad(p, rho, mf.retract(x, h_hess * xi), y));
      const Matrix gm = mf.project(x, auglag_rgrad(p, rho, mf.retract(x, -h_hess * xi), y));
      const Matrix fd_hv = (gp - gm) / (2.0 * h_hess);
      hess_err = std::max(hess_err, (hv - fd_hv).norm() / std::max(hv.norm(), 1.0));
    }
    const bool ok = grad_err <= 1e-5 && hess_err <= 1e-3;
    out << json({{"samples", samples},
                 {"grad_max_rel_err", grad_err},
                 {"hess_max_rel_err", hess_err},
                 {"pass", ok}})
               .dump()
        << "\n";
    return ok ? 0 : 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace ralmkit::cli
