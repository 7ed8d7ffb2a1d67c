#include "csbo/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "csbo/hyperclean.hpp"
#include "csbo/oracle.hpp"
#include "csbo/quadratic.hpp"
#include "csbo/traffic.hpp"
#include "json.hpp"

namespace csbo::harness {

namespace {

using json = nlohmann::ordered_json;
using problem::JointSample;

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (!std::isspace(static_cast<unsigned char>(c))) {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

bool parse_bool(const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw std::invalid_argument("config: expected boolean, got '" + v + "'");
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + fmt(v[i]);
  return s;
}
std::string join(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i)
    s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

}  // namespace

void ExperimentConfig::set_key(const std::string& key, const std::string& value) {
  if (key == "problem") problem = value;
  else if (key == "basis") basis = value;
  else if (key == "n_basis") n_basis = std::stoi(value);
  else if (key == "n_trials") n_trials = std::stoi(value);
  else if (key == "n_train") n_train = std::stoi(value);
  else if (key == "n_test") n_test = std::stoi(value);
  else if (key == "output_path") output_path = value;
  else if (key == "data_path") data_path = value;
  else if (key == "jobs") jobs = std::stoi(value);
  else if (key == "ma_window") ma_window = std::stoi(value);
  else if (key == "solver.alpha") solver.alpha = std::stod(value);
  else if (key == "solver.beta") solver.beta = std::stod(value);
  else if (key == "solver.t_inner") solver.t_inner = std::stoi(value);
  else if (key == "solver.k_neumann") solver.k_neumann = std::stoi(value);
  else if (key == "solver.s_neumann") solver.s_neumann = std::stod(value);
  else if (key == "solver.batch") solver.batch = std::stoi(value);
  else if (key == "solver.epochs") solver.epochs = std::stoi(value);
  else if (key == "solver.seed") solver.seed = std::stoull(value);
  else if (key == "solver.tail_fraction") solver.tail_fraction = std::stod(value);
  else if (key == "solver.timing") solver.timing = parse_bool(value);
  else if (key == "grid.trials") grid_trials = std::stoi(value);
  else if (key == "grid.alpha") {
    grid_alpha.clear();
    for (const auto& t : split_list(value)) grid_alpha.push_back(std::stod(t));
  } else if (key == "grid.beta") {
    grid_beta.clear();
    for (const auto& t : split_list(value)) grid_beta.push_back(std::stod(t));
  } else if (key == "grid.t_inner") {
    grid_t_inner.clear();
    for (const auto& t : split_list(value)) grid_t_inner.push_back(std::stoi(t));
  }
  else if (key == "quadratic.d_x") quad_dx = std::stoi(value);
  else if (key == "quadratic.d_y") quad_dy = std::stoi(value);
  else if (key == "hyperclean.n_train") hc_train = std::stoi(value);
  else if (key == "hyperclean.n_val") hc_val = std::stoi(value);
  else if (key == "hyperclean.n_features") hc_features = std::stoi(value);
  else if (key == "hyperclean.n_classes") hc_classes = std::stoi(value);
  else if (key == "hyperclean.p_corrupt") hc_p_corrupt = std::stod(value);
  else throw std::invalid_argument("config: unknown key '" + key + "'");
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();

  ExperimentConfig cfg;
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    // JSON config echo round-trip
    const json j = json::parse(text);
    for (const auto& [key, val] : j.items()) {
      std::string v;
      if (val.is_string()) v = val.get<std::string>();
      else if (val.is_boolean()) v = val.get<bool>() ? "true" : "false";
      else if (val.is_array()) {
        for (std::size_t i = 0; i < val.size(); ++i)
          v += (i ? "," : "") + val[i].dump();
      } else v = val.dump();
      cfg.set_key(key, v);
    }
    cfg.validate();
    return cfg;
  }

  std::istringstream lines(text);
  std::string line;
  int lineno = 0;
  while (std::getline(lines, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      if (line.find_first_not_of(" \t\r") != std::string::npos)
        throw std::runtime_error("config: bad line " + std::to_string(lineno));
      continue;
    }
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    cfg.set_key(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  cfg.validate();
  return cfg;
}

std::string ExperimentConfig::to_json() const {
  json j;
  j["problem"] = problem;
  j["basis"] = basis;
  j["n_basis"] = n_basis;
  j["n_trials"] = n_trials;
  j["n_train"] = n_train;
  j["n_test"] = n_test;
  j["output_path"] = output_path;
  j["data_path"] = data_path;
  j["jobs"] = jobs;
  j["ma_window"] = ma_window;
  j["solver.alpha"] = solver.alpha;
  j["solver.beta"] = solver.beta;
  j["solver.t_inner"] = solver.t_inner;
  j["solver.k_neumann"] = solver.k_neumann;
  j["solver.s_neumann"] = solver.s_neumann;
  j["solver.batch"] = solver.batch;
  j["solver.epochs"] = solver.epochs;
  j["solver.seed"] = solver.seed;
  j["solver.tail_fraction"] = solver.tail_fraction;
  j["solver.timing"] = solver.timing;
  j["grid.trials"] = grid_trials;
  if (!grid_alpha.empty()) j["grid.alpha"] = join(grid_alpha);
  if (!grid_beta.empty()) j["grid.beta"] = join(grid_beta);
  if (!grid_t_inner.empty()) j["grid.t_inner"] = join(grid_t_inner);
  j["quadratic.d_x"] = quad_dx;
  j["quadratic.d_y"] = quad_dy;
  j["hyperclean.n_train"] = hc_train;
  j["hyperclean.n_val"] = hc_val;
  j["hyperclean.n_features"] = hc_features;
  j["hyperclean.n_classes"] = hc_classes;
  j["hyperclean.p_corrupt"] = hc_p_corrupt;
  return j.dump(2) + "\n";
}

void ExperimentConfig::validate() const {
  if (problem != "quadratic" && problem != "traffic" && problem != "hyperclean")
    throw std::invalid_argument("config: unknown problem '" + problem + "'");
  basis::basis_kind_from_string(basis);  // throws on unknown
  if (n_basis < 1) throw std::invalid_argument("config: n_basis >= 1");
  if (n_trials < 1) throw std::invalid_argument("config: n_trials >= 1");
  if (n_train < 1 || n_test < 1)
    throw std::invalid_argument("config: n_train, n_test >= 1");
  if (grid_trials < 1) throw std::invalid_argument("config: grid.trials >= 1");
  if (jobs < 1) throw std::invalid_argument("config: jobs >= 1");
  solver.validate();
}

namespace {

struct TrialSetup {
  std::unique_ptr<problem::CsboProblem> prob;
  std::vector<JointSample> train;
  std::vector<JointSample> test;
  Eigen::VectorXd x0;
};

TrialSetup make_trial_setup(const ExperimentConfig& cfg, std::uint64_t trial_seed) {
  TrialSetup s;
  if (cfg.problem == "quadratic") {
    // instance fixed by the master seed; data drawn per trial
    auto p = std::make_unique<problem::QuadraticProblem>(cfg.quad_dx, cfg.quad_dy,
                                                         cfg.solver.seed);
    s.train = p->sample_joint(cfg.n_train, trial_seed * 2 + 1);
    s.test = p->sample_joint(cfg.n_test, trial_seed * 2 + 2);
    s.x0 = Eigen::VectorXd::Zero(p->dx());
    s.prob = std::move(p);
  } else if (cfg.problem == "traffic") {
    problem::TrafficProblem::Params tp;
    tp.n_train = cfg.n_train;
    tp.n_test = cfg.n_test;
    auto p = std::make_unique<problem::TrafficProblem>(trial_seed, tp);
    s.train = p->train();
    s.test = p->test();
    s.x0 = Eigen::VectorXd::Constant(2, 0.5);
    s.prob = std::move(p);
  } else {
    std::unique_ptr<problem::HypercleanProblem> p;
    if (!cfg.data_path.empty()) {
      p = std::make_unique<problem::HypercleanProblem>(
          problem::HypercleanProblem::from_file(cfg.data_path, cfg.hc_train,
                                                cfg.hc_p_corrupt, trial_seed));
    } else {
      p = std::make_unique<problem::HypercleanProblem>(
          cfg.hc_train, cfg.hc_val, cfg.hc_features, cfg.hc_classes,
          cfg.hc_p_corrupt, trial_seed);
    }
    s.train = p->sample_joint(cfg.n_train, trial_seed * 2 + 1);
    s.test = p->sample_joint(cfg.n_test, trial_seed * 2 + 2);
    s.x0 = Eigen::VectorXd::Zero(p->dx());
    s.prob = std::move(p);
  }
  return s;
}

basis::FeatureMap make_map(const ExperimentConfig& cfg,
                           const problem::CsboProblem& prob) {
  const auto kind = basis::basis_kind_from_string(cfg.basis);
  switch (kind) {
    case basis::BasisKind::chebyshev:
      return basis::build_chebyshev(prob.dxi(), cfg.n_basis, prob.domain());
    case basis::BasisKind::fourier:
      return basis::build_fourier(prob.dxi(), cfg.n_basis, prob.domain());
    case basis::BasisKind::monomial:
      return basis::build_monomial(prob.dxi(), cfg.n_basis, prob.domain());
    case basis::BasisKind::indicator:
      return basis::build_indicator(cfg.n_basis, prob.domain());
  }
  throw std::logic_error("make_map: unreachable");
}

Eigen::VectorXd exact_lower(const problem::CsboProblem& prob,
                            const Eigen::VectorXd& x, const Eigen::VectorXd& xi,
                            double tol) {
  if (auto* hc = dynamic_cast<const problem::HypercleanProblem*>(&prob))
    return hc->solve_lower_newton(x, xi, tol);
  return oracle::solve_lower_exact(prob, x, xi, tol);
}

TrialMetrics compute_metrics(const problem::CsboProblem& prob,
                             const basis::FeatureMap& map,
                             const std::vector<JointSample>& test,
                             const Eigen::VectorXd& x_bar,
                             const Eigen::MatrixXd& W_bar) {
  // 1e-7 keeps losses accurate to ~1e-14 while staying above the numerical
  // gradient floor of the cross-entropy Newton solve at small temperatures
  constexpr double tol = 1e-7;
  TrialMetrics m;
  const auto* hc = dynamic_cast<const problem::HypercleanProblem*>(&prob);
  const auto* tr = dynamic_cast<const problem::TrafficProblem*>(&prob);

  double loss = 0.0, dy = 0.0;
  for (const auto& s : test) {
    const Eigen::VectorXd ystar = exact_lower(prob, x_bar, s.xi, tol);
    dy += (ystar - W_bar * map.evaluate(s.xi)).squaredNorm();
    loss += hc ? hc->validation_loss(ystar, s.xi[0])
               : prob.f_value(x_bar, ystar, s.xi, s.eta);
  }
  m.test_loss = loss / static_cast<double>(test.size());
  m.delta_y = dy / static_cast<double>(test.size());

  if (tr) {
    const Eigen::VectorXd& xs = tr->x_star();
    m.delta_x = (x_bar - xs).squaredNorm();
    double ref = 0.0;
    for (const auto& s : test)
      ref += prob.f_value(xs, exact_lower(prob, xs, s.xi, tol), s.xi, s.eta);
    m.reference_loss = ref / static_cast<double>(test.size());
  }
  return m;
}

solver::ValMetric make_val_metric(const ExperimentConfig& cfg,
                                  const problem::CsboProblem& prob,
                                  const basis::FeatureMap& map) {
  if (cfg.problem != "hyperclean") return nullptr;
  const auto* hc = dynamic_cast<const problem::HypercleanProblem*>(&prob);
  auto contexts = prob.sample_joint(16, cfg.solver.seed + 999);
  return [hc, &map, contexts = std::move(contexts)](
             const Eigen::VectorXd&, const Eigen::MatrixXd& W) {
    double acc = 0.0;
    for (const auto& s : contexts)
      acc += hc->validation_loss(W * map.evaluate(s.xi), s.xi[0]);
    return acc / static_cast<double>(contexts.size());
  };
}

TrialRecord run_single_trial(const ExperimentConfig& cfg, int trial,
                             bool with_metrics) {
  TrialRecord rec;
  rec.trial = trial;
  rec.seed = cfg.solver.seed + static_cast<std::uint64_t>(trial);
  const auto t0 = std::chrono::steady_clock::now();
  try {
    TrialSetup setup = make_trial_setup(cfg, rec.seed);
    const basis::FeatureMap map = make_map(cfg, *setup.prob);
    const reduction::ReducedSbo reduced(*setup.prob, map);

    solver::SolverConfig sc = cfg.solver;
    sc.seed = rec.seed;
    const auto result = solver::run(reduced, setup.train, sc, setup.x0,
                                    Eigen::MatrixXd(),
                                    make_val_metric(cfg, *setup.prob, map));
    rec.epochs = result.epochs;
    rec.failed = result.failed;
    rec.failure = result.failure;
    rec.x_tail_avg = result.x_tail_avg;
    rec.W_tail_avg = result.W_tail_avg;
    if (!rec.failed && with_metrics)
      rec.metrics = compute_metrics(*setup.prob, map, setup.test,
                                    result.x_tail_avg, result.W_tail_avg);
  } catch (const std::exception& e) {
    rec.failed = true;
    rec.failure = e.what();
  }
  if (cfg.solver.timing) {
    const auto t1 = std::chrono::steady_clock::now();
    rec.metrics.wall_time = std::chrono::duration<double>(t1 - t0).count();
  }
  return rec;
}

std::vector<TrialRecord> run_trials(const ExperimentConfig& cfg, int n_trials,
                                    bool with_metrics) {
  std::vector<TrialRecord> recs(n_trials);
  std::atomic<int> next{0};
  auto worker = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= n_trials) break;
      recs[i] = run_single_trial(cfg, i, with_metrics);
    }
  };
  const int jobs = std::min(std::max(1, cfg.jobs), n_trials);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return recs;
}

MetricSummary summarize(const std::string& name, std::vector<double> values) {
  std::vector<double> v;
  for (double x : values)
    if (std::isfinite(x)) v.push_back(x);
  MetricSummary s;
  s.name = name;
  s.n = static_cast<int>(v.size());
  if (v.empty()) {
    s.mean = s.ci95_low = s.ci95_high = std::numeric_limits<double>::quiet_NaN();
    return s;
  }
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= s.n;
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  const double sd = s.n > 1 ? std::sqrt(var / (s.n - 1)) : 0.0;
  const double half = 1.96 * sd / std::sqrt(static_cast<double>(s.n));
  s.mean = mean;
  s.ci95_low = mean - half;
  s.ci95_high = mean + half;
  return s;
}

double grid_criterion(const ExperimentConfig& cfg,
                      const std::vector<solver::EpochRecord>& epochs) {
  // moving average of the per-epoch criterion curve, then tail average
  const int n = static_cast<int>(epochs.size());
  if (n == 0) return std::numeric_limits<double>::quiet_NaN();
  const bool use_val = std::isfinite(epochs.back().upper_loss_val);
  std::vector<double> curve(n);
  for (int i = 0; i < n; ++i)
    curve[i] = use_val ? epochs[i].upper_loss_val : epochs[i].upper_loss_train;
  const int w = cfg.ma_window > 0 ? cfg.ma_window
                                  : std::max(1, cfg.solver.epochs / 20);
  std::vector<double> ma(n);
  for (int i = 0; i < n; ++i) {
    const int lo = std::max(0, i - w + 1);
    double acc = 0.0;
    for (int k = lo; k <= i; ++k) acc += curve[k];
    ma[i] = acc / (i - lo + 1);
  }
  const int tail = std::max(1, static_cast<int>(
      std::ceil(cfg.solver.tail_fraction * n)));
  double acc = 0.0;
  for (int i = n - tail; i < n; ++i) acc += ma[i];
  return acc / tail;
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& config) {
  config.validate();
  ExperimentReport report;
  report.config = config;
  report.trials = run_trials(config, config.n_trials, true);

  std::vector<double> loss, dy, dx, ref, wt;
  for (const auto& t : report.trials) {
    if (t.failed) {
      report.partial = true;
      continue;
    }
    loss.push_back(t.metrics.test_loss);
    dy.push_back(t.metrics.delta_y);
    dx.push_back(t.metrics.delta_x);
    ref.push_back(t.metrics.reference_loss);
    wt.push_back(t.metrics.wall_time);
  }
  report.summary.push_back(summarize("test_loss", loss));
  report.summary.push_back(summarize("delta_y", dy));
  report.summary.push_back(summarize("delta_x", dx));
  report.summary.push_back(summarize("reference_loss", ref));
  report.summary.push_back(summarize("wall_time", wt));
  return report;
}

GridReport run_grid_search(const ExperimentConfig& config) {
  config.validate();
  auto alphas = config.grid_alpha.empty()
                    ? std::vector<double>{config.solver.alpha}
                    : config.grid_alpha;
  auto betas = config.grid_beta.empty() ? std::vector<double>{config.solver.beta}
                                        : config.grid_beta;
  auto ts = config.grid_t_inner.empty()
                ? std::vector<int>{config.solver.t_inner}
                : config.grid_t_inner;
  std::sort(alphas.begin(), alphas.end());
  std::sort(betas.begin(), betas.end());
  std::sort(ts.begin(), ts.end());

  GridReport report;
  report.config = config;
  bool have_best = false;
  double best_crit = std::numeric_limits<double>::infinity();

  for (double a : alphas) {
    for (double b : betas) {
      for (int t : ts) {
        ExperimentConfig cell_cfg = config;
        cell_cfg.solver.alpha = a;
        cell_cfg.solver.beta = b;
        cell_cfg.solver.t_inner = t;
        GridCell cell;
        cell.alpha = a;
        cell.beta = b;
        cell.t_inner = t;
        const auto recs = run_trials(cell_cfg, config.grid_trials, false);
        double acc = 0.0;
        int ok = 0;
        for (const auto& r : recs) {
          if (r.failed) {
            cell.diverged = true;
            cell.note = r.failure;
          } else {
            acc += grid_criterion(cell_cfg, r.epochs);
            ++ok;
          }
        }
        if (!cell.diverged && ok > 0) {
          cell.criterion = acc / ok;
          if (std::isfinite(cell.criterion) && cell.criterion < best_crit) {
            best_crit = cell.criterion;
            report.best = cell_cfg.solver;
            have_best = true;
          }
        }
        report.cells.push_back(cell);
      }
    }
  }
  if (!have_best) {
    std::string msg = "grid search: all cells diverged:";
    for (const auto& c : report.cells)
      msg += "\n  alpha=" + fmt(c.alpha) + " beta=" + fmt(c.beta) +
             " t_inner=" + std::to_string(c.t_inner) + ": " + c.note;
    throw std::runtime_error(msg);
  }
  return report;
}

void emit_results(const ExperimentReport& report, const std::string& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir + "/summary.csv");
    if (!out) throw std::runtime_error("emit_results: cannot write " + dir);
    out << "problem,basis,n_basis,metric,mean,ci95_low,ci95_high,n_trials\n";
    for (const auto& s : report.summary)
      out << report.config.problem << ',' << report.config.basis << ','
          << report.config.n_basis << ',' << s.name << ',' << fmt(s.mean) << ','
          << fmt(s.ci95_low) << ',' << fmt(s.ci95_high) << ',' << s.n << '\n';
  }
  {
    std::ofstream out(dir + "/epochs.csv");
    out << "trial,epoch,train_loss,val_loss,grad_norm,wall_time\n";
    for (const auto& t : report.trials)
      for (const auto& e : t.epochs)
        out << t.trial << ',' << e.epoch << ',' << fmt(e.upper_loss_train) << ','
            << fmt(e.upper_loss_val) << ',' << fmt(e.grad_norm_estimate) << ','
            << fmt(e.wall_time) << '\n';
  }
  {
    std::ofstream out(dir + "/config_echo.json");
    out << report.config.to_json();
  }
}

void emit_grid_results(const GridReport& report, const std::string& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir + "/grid.csv");
    out << "alpha,beta,t_inner,criterion,diverged\n";
    for (const auto& c : report.cells)
      out << fmt(c.alpha) << ',' << fmt(c.beta) << ',' << c.t_inner << ','
          << fmt(c.criterion) << ',' << (c.diverged ? 1 : 0) << '\n';
  }
  {
    ExperimentConfig best = report.config;
    best.solver = report.best;
    std::ofstream out(dir + "/config_echo.json");
    out << best.to_json();
  }
}

int run_verify(std::uint64_t seed) {
  int failures = 0;
  auto check = [&](const char* name, bool ok) {
    std::printf("[verify] %-40s %s\n", name, ok ? "PASS" : "FAIL");
    if (!ok) ++failures;
  };

  const problem::QuadraticProblem quad(3, 3, seed);
  const auto samples = quad.sample_joint(64, seed + 1);
  const Eigen::VectorXd x = Eigen::VectorXd::Constant(3, 0.3);
  const Eigen::VectorXd y = Eigen::VectorXd::Constant(3, -0.2);
  const auto& s0 = samples.front();

  {
    const auto fd = oracle::finite_diff_gradient(
        [&](const Eigen::VectorXd& yy) {
          return quad.g_value(x, yy, s0.xi, s0.eta);
        },
        y, 1e-5);
    const auto an = quad.grad_g_y(x, y, s0.xi, s0.eta);
    check("lower gradient vs finite differences", (fd - an).norm() < 1e-6);
  }
  {
    const basis::FeatureMap map =
        basis::build_chebyshev(1, 3, quad.domain());
    const reduction::ReducedSbo reduced(quad, map);
    const Eigen::MatrixXd W = Eigen::MatrixXd::Constant(3, 3, 0.1);
    const Eigen::MatrixXd V = Eigen::MatrixXd::Random(3, 3);
    const Eigen::MatrixXd dense = reduced.dense_hessian_WW(x, W, s0);
    const Eigen::Map<const Eigen::VectorXd> v_vec(V.data(), 9);
    const Eigen::VectorXd hv = dense * v_vec;
    const Eigen::Map<const Eigen::MatrixXd> hv_mat(hv.data(), 3, 3);
    const Eigen::MatrixXd mf = reduced.hess_gphi_WW_apply(x, W, s0, V);
    check("matrix-free Hessian vs dense Kronecker", (mf - hv_mat).norm() < 1e-10);
  }
  {
    const auto fd = oracle::finite_diff_gradient(
        [&](const Eigen::VectorXd& xx) {
          return oracle::empirical_upper_objective(quad, xx, samples, 1e-10);
        },
        x, 1e-5);
    const auto hg = oracle::exact_hypergradient(quad, x, samples, 1e-10);
    check("hypergradient vs finite differences",
          (fd - hg).norm() <= 1e-3 * std::max(1.0, hg.norm()));
  }
  {
    const basis::FeatureMap map = basis::build_chebyshev(1, 3, quad.domain());
    const reduction::ReducedSbo reduced(quad, map);
    solver::SolverConfig sc;
    sc.epochs = 2;
    sc.seed = seed;
    sc.timing = false;
    const auto r1 = solver::run(reduced, samples, sc);
    const auto r2 = solver::run(reduced, samples, sc);
    check("determinism of seeded runs",
          r1.x_final == r2.x_final && r1.W_final == r2.W_final);
  }
  return failures;
}

}  // namespace csbo::harness
