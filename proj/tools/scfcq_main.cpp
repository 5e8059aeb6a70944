// Command-line front end: simulate / estimate / bootstrap.

#include <CLI11.hpp>
#include <json.hpp>

#include <Eigen/Dense>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "scfcq/csv.hpp"
#include "scfcq/estimator.hpp"
#include "scfcq/first_stage.hpp"
#include "scfcq/inference.hpp"
#include "scfcq/simulation.hpp"
#include "scfcq/svg.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct DerivedColumn {
  std::string name;
  std::string from;
  double power = 2.0;
};

struct RunConfig {
  std::string input;
  std::string out = ".";
  std::string y_name;
  std::vector<std::string> x_names;
  std::string r_name;
  std::vector<std::string> z_names;
  std::vector<DerivedColumn> derived;

  std::string basis = "poly:3";
  std::string first_stage = "parametric";
  scfcq::ScfcqConfig scfcq;
  scfcq::FirstStageConfig fs;
  scfcq::BootstrapConfig boot;

  std::string dgp = "I";
  long n = 1000;
  long reps = 200;
  double rho = 0.5;
  double censor_target = 0.30;
  std::optional<double> beta0;

  std::uint64_t seed = 1;
};

scfcq::BasisSpec parse_basis(const std::string& s) {
  auto colon = s.find(':');
  if (colon == std::string::npos)
    throw scfcq::ConfigError("basis", "expected poly:<degree> or bspline:<knots>");
  std::string kind = s.substr(0, colon);
  int param = 0;
  try {
    param = std::stoi(s.substr(colon + 1));
  } catch (const std::exception&) {
    throw scfcq::ConfigError("basis", "bad order parameter in '" + s + "'");
  }
  if (param < 0) throw scfcq::ConfigError("basis", "order parameter must be >= 0");
  if (kind == "poly")
    return {scfcq::BasisKind::Polynomial, param, 0.0, 1.0};
  if (kind == "bspline")
    return {scfcq::BasisKind::CubicBspline, param, 0.0, 1.0};
  throw scfcq::ConfigError("basis", "unknown kind '" + kind + "'");
}

void load_json_config(const std::string& path, RunConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw scfcq::ConfigError("config", "cannot open '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw scfcq::ConfigError("config", e.what());
  }
  auto get = [&](const json& o, const char* key, auto& slot) {
    if (o.contains(key)) slot = o.at(key).get<std::decay_t<decltype(slot)>>();
  };
  get(j, "input", cfg.input);
  get(j, "out", cfg.out);
  get(j, "seed", cfg.seed);
  get(j, "basis", cfg.basis);
  get(j, "first_stage", cfg.first_stage);
  if (j.contains("columns")) {
    const json& c = j.at("columns");
    get(c, "y", cfg.y_name);
    get(c, "x", cfg.x_names);
    get(c, "r", cfg.r_name);
    get(c, "z", cfg.z_names);
  }
  if (j.contains("derived")) {
    for (const json& d : j.at("derived")) {
      DerivedColumn col;
      get(d, "name", col.name);
      get(d, "from", col.from);
      get(d, "power", col.power);
      if (col.name.empty() || col.from.empty())
        throw scfcq::ConfigError("derived", "need both 'name' and 'from'");
      cfg.derived.push_back(col);
    }
  }
  if (j.contains("scfcq")) {
    const json& s = j.at("scfcq");
    get(s, "tau0", cfg.scfcq.tau0);
    get(s, "tau_l", cfg.scfcq.tauL);
    get(s, "step", cfg.scfcq.step);
    get(s, "q0", cfg.scfcq.q0);
    get(s, "q1", cfg.scfcq.q1);
    get(s, "trim_fraction", cfg.scfcq.trim_fraction);
    get(s, "disable_selector", cfg.scfcq.disable_selector);
  }
  if (j.contains("first_stage_options")) {
    const json& f = j.at("first_stage_options");
    get(f, "v_center", cfg.fs.v_center);
    get(f, "v1", cfg.fs.v1);
    get(f, "v2", cfg.fs.v2);
    get(f, "z_degree", cfg.fs.z_degree);
    get(f, "bandwidth_rule", cfg.fs.bandwidth_rule);
    get(f, "clamp_sigma_floor", cfg.fs.clamp_sigma_floor);
  }
  if (j.contains("bootstrap")) {
    const json& b = j.at("bootstrap");
    get(b, "draws", cfg.boot.draws);
    get(b, "ci_level", cfg.boot.ci_level);
    get(b, "unit_weights", cfg.boot.unit_weights);
    get(b, "reuse_point_selectors", cfg.boot.reuse_point_selectors);
  }
  if (j.contains("dgp")) {
    const json& d = j.at("dgp");
    get(d, "variant", cfg.dgp);
    get(d, "n", cfg.n);
    get(d, "reps", cfg.reps);
    get(d, "rho", cfg.rho);
    get(d, "censor_target", cfg.censor_target);
    if (d.contains("beta0")) cfg.beta0 = d.at("beta0").get<double>();
  }
}

void finalize(RunConfig& cfg) {
  cfg.scfcq.m_basis = parse_basis(cfg.basis);
  if (cfg.first_stage == "parametric")
    cfg.fs.mode = scfcq::FirstStageMode::ParametricF;
  else if (cfg.first_stage == "local-linear")
    cfg.fs.mode = scfcq::FirstStageMode::LocalLinear;
  else
    throw scfcq::ConfigError("first_stage", "expected parametric or local-linear");
  if (!(cfg.fs.v1 > 0.0 && cfg.fs.v1 < cfg.fs.v2 && cfg.fs.v2 < 1.0))
    throw scfcq::ConfigError("first_stage_options.v1/v2", "need 0 < v1 < v2 < 1");
  if (!(cfg.fs.v_center > 0.0 && cfg.fs.v_center < 1.0))
    throw scfcq::ConfigError("first_stage_options.v_center", "must lie in (0,1)");
  cfg.scfcq.validate();
}

Eigen::VectorXd to_vec(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<long>(v.size()));
}

// CSV -> Dataset per the column bindings; an intercept column is prepended
// to X and X's bound columns are appended to Z.
scfcq::Dataset load_dataset(const RunConfig& cfg, scfcq::CsvTable& table) {
  for (const auto& d : cfg.derived) {
    if (table.column(d.from) < 0)
      throw scfcq::ConfigError("derived." + d.name, "source column '" + d.from +
                                                        "' not found");
    std::vector<double> src = table.col(d.from);
    table.header.push_back(d.name);
    for (size_t i = 0; i < table.rows.size(); ++i)
      table.rows[i].push_back(scfcq::format_double(std::pow(src[i], d.power)));
  }

  auto require = [&](const std::string& name, const char* field) {
    if (name.empty()) throw scfcq::ConfigError(field, "column binding missing");
    if (table.column(name) < 0)
      throw scfcq::ConfigError(field, "column '" + name + "' not found in input");
  };
  require(cfg.y_name, "columns.y");
  require(cfg.r_name, "columns.r");
  for (const auto& x : cfg.x_names) require(x, "columns.x");
  for (const auto& z : cfg.z_names) require(z, "columns.z");
  if (cfg.z_names.empty())
    throw scfcq::ConfigError("columns.z", "at least one instrument required");

  const long n = static_cast<long>(table.rows.size());
  scfcq::Dataset ds;
  ds.y = to_vec(table.col(cfg.y_name));
  ds.R = to_vec(table.col(cfg.r_name));
  ds.X.resize(n, 1 + static_cast<long>(cfg.x_names.size()));
  ds.X.col(0).setOnes();
  for (size_t k = 0; k < cfg.x_names.size(); ++k)
    ds.X.col(1 + static_cast<long>(k)) = to_vec(table.col(cfg.x_names[k]));
  ds.Z.resize(n, static_cast<long>(cfg.z_names.size() + cfg.x_names.size()));
  for (size_t k = 0; k < cfg.z_names.size(); ++k)
    ds.Z.col(static_cast<long>(k)) = to_vec(table.col(cfg.z_names[k]));
  for (size_t k = 0; k < cfg.x_names.size(); ++k)
    ds.Z.col(static_cast<long>(cfg.z_names.size() + k)) =
        to_vec(table.col(cfg.x_names[k]));
  ds.T = Eigen::VectorXi::Ones(n);
  return ds;
}

void write_file(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path().empty() ? "." : path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw scfcq::Error("cannot write '" + path.string() + "'");
  out << content;
}

std::vector<std::string> coef_names(const scfcq::Dataset& ds) {
  std::vector<std::string> names;
  for (long k = 0; k < ds.X.cols(); ++k) names.push_back("b" + std::to_string(k));
  names.push_back("alpha");
  return names;
}

std::string path_csv(const scfcq::CoefficientPath& path,
                     const std::vector<std::string>& names) {
  std::string out = "tau,coef,estimate\n";
  for (size_t l = 0; l < path.grid.size(); ++l) {
    const scfcq::Theta& th = path.theta[l];
    for (long k = 0; k < th.beta.size(); ++k)
      out += scfcq::format_double(path.grid[l]) + "," + names[static_cast<size_t>(k)] +
             "," + scfcq::format_double(th.beta(k)) + "\n";
    out += scfcq::format_double(path.grid[l]) + ",alpha," +
           scfcq::format_double(th.alpha) + "\n";
    for (long k = 0; k < th.delta.size(); ++k)
      out += scfcq::format_double(path.grid[l]) + ",d" + std::to_string(k) + "," +
             scfcq::format_double(th.delta(k)) + "\n";
  }
  return out;
}

std::string diagnostics_csv(const scfcq::CoefficientPath& path) {
  std::string out = "tau,threshold,subsample,status\n";
  for (size_t l = 0; l < path.grid.size(); ++l) {
    const auto& d = path.diag[l];
    out += scfcq::format_double(path.grid[l]) + "," +
           scfcq::format_double(d.eta) + "," + std::to_string(d.subsample) + "," +
           scfcq::to_string(d.status) + "\n";
  }
  return out;
}

std::string chart_svg(const scfcq::CoefficientPath& path,
                      const std::vector<std::string>& names,
                      const scfcq::BootstrapResult* boot = nullptr) {
  std::vector<scfcq::SvgSeries> series;
  const long kx = path.theta.empty() ? 0 : path.theta.front().beta.size();
  for (long k = 0; k <= kx; ++k) {
    scfcq::SvgSeries s;
    s.label = k < kx ? names[static_cast<size_t>(k)] : "alpha";
    for (size_t l = 0; l < path.grid.size(); ++l) {
      s.x.push_back(path.grid[l]);
      s.y.push_back(k < kx ? path.theta[l].beta(k) : path.theta[l].alpha);
      if (boot) {
        s.band_lo.push_back(boot->ci_lo[l][static_cast<size_t>(k)]);
        s.band_hi.push_back(boot->ci_hi[l][static_cast<size_t>(k)]);
      }
    }
    series.push_back(std::move(s));
  }
  return scfcq::render_line_chart(series, "coefficient path");
}

struct Pipeline {
  scfcq::Dataset dataset;
  scfcq::ControlVariables cv;
  scfcq::CoefficientPath path;
};

Pipeline run_pipeline(const RunConfig& cfg) {
  scfcq::CsvTable table = scfcq::read_csv(cfg.input);
  if (table.rows.empty()) throw scfcq::CsvError("input has no data rows");
  scfcq::Dataset raw = load_dataset(cfg, table);
  Pipeline p;
  p.cv = scfcq::fit_first_stage(raw.R, raw.Z, cfg.fs);
  p.dataset = scfcq::trim(std::move(raw), cfg.scfcq.trim_fraction);
  p.path = scfcq::estimate_path(p.dataset, p.cv.v_hat, cfg.scfcq);
  return p;
}

int cmd_estimate(const RunConfig& cfg) {
  Pipeline p = run_pipeline(cfg);
  auto names = coef_names(p.dataset);
  write_file(fs::path(cfg.out) / "path.csv", path_csv(p.path, names));
  write_file(fs::path(cfg.out) / "diagnostics.csv", diagnostics_csv(p.path));
  write_file(fs::path(cfg.out) / "chart.svg", chart_svg(p.path, names));
  std::cout << "estimated " << p.path.grid.size() << " grid points; wrote "
            << (fs::path(cfg.out) / "path.csv").string() << "\n";
  return 0;
}

int cmd_bootstrap(RunConfig cfg) {
  cfg.boot.seed = cfg.seed;
  Pipeline p = run_pipeline(cfg);
  scfcq::BootstrapResult boot =
      scfcq::bootstrap_path(p.dataset, p.cv.v_hat, cfg.scfcq, cfg.boot, p.path);
  auto rows = scfcq::summarize(boot, p.path);
  std::string out = "tau,coef,estimate,se,ci_lo,ci_hi\n";
  for (const auto& r : rows)
    out += scfcq::format_double(r.tau) + "," + r.coef + "," +
           scfcq::format_double(r.estimate) + "," + scfcq::format_double(r.se) +
           "," + scfcq::format_double(r.ci_lo) + "," +
           scfcq::format_double(r.ci_hi) + "\n";
  write_file(fs::path(cfg.out) / "bootstrap.csv", out);
  auto names = coef_names(p.dataset);
  write_file(fs::path(cfg.out) / "chart.svg", chart_svg(p.path, names, &boot));
  std::cout << "bootstrap: " << cfg.boot.draws << " draws, " << boot.failed
            << " failed; wrote " << (fs::path(cfg.out) / "bootstrap.csv").string()
            << "\n";
  return 0;
}

int cmd_simulate(const RunConfig& cfg) {
  scfcq::DgpSpec spec;
  if (cfg.dgp == "I")
    spec.variant = scfcq::DgpVariant::I;
  else if (cfg.dgp == "II")
    spec.variant = scfcq::DgpVariant::II;
  else
    throw scfcq::ConfigError("dgp", "expected I or II");
  spec.rho = cfg.rho;
  spec.censor_target = cfg.censor_target;
  spec.beta0 = cfg.beta0 ? *cfg.beta0 : scfcq::calibrate_beta0(spec, 0.002);

  scfcq::McReport rep = scfcq::run_mc(cfg.reps, cfg.n, spec, cfg.scfcq, cfg.fs,
                                      cfg.seed);
  std::string csv = scfcq::mc_report_csv(rep);
  write_file(fs::path(cfg.out) / "mc_report.csv", csv);
  std::cout << "beta0 = " << scfcq::format_double(spec.beta0) << "\n" << csv;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  RunConfig cfg;
  std::string command;
  try {
    // --config is applied first so flags override file values.
    for (int i = 1; i + 1 < argc; ++i)
      if (std::string(argv[i]) == "--config") load_json_config(argv[i + 1], cfg);

    CLI::App app{"sequential control-function censored quantile estimator"};
    app.require_subcommand(1);
    std::string config_path, x_csv, z_csv;

    auto add_common = [&](CLI::App* sub) {
      sub->add_option("--config", config_path, "JSON config file");
      sub->add_option("--seed", cfg.seed, "master RNG seed");
      sub->add_option("--out", cfg.out, "output directory");
      sub->add_option("--tau0", cfg.scfcq.tau0, "initial quantile");
      sub->add_option("--tau-l", cfg.scfcq.tauL, "lowest quantile");
      sub->add_option("--step", cfg.scfcq.step, "grid step");
      sub->add_option("--q0", cfg.scfcq.q0, "first-pass threshold quantile");
      sub->add_option("--q1", cfg.scfcq.q1, "second-pass threshold quantile");
      sub->add_option("--trim", cfg.scfcq.trim_fraction, "outlier share removed");
      sub->add_option("--basis", cfg.basis, "poly:<degree> or bspline:<knots>");
      sub->add_option("--first-stage", cfg.first_stage,
                      "parametric or local-linear");
      sub->add_flag("--no-selector", cfg.scfcq.disable_selector,
                    "naive series QR at every grid point");
    };
    auto add_data = [&](CLI::App* sub) {
      sub->add_option("--input", cfg.input, "input CSV");
      sub->add_option("--y", cfg.y_name, "outcome column");
      sub->add_option("--x", x_csv, "exogenous columns, comma separated");
      sub->add_option("--r", cfg.r_name, "endogenous regressor column");
      sub->add_option("--z", z_csv, "instrument columns, comma separated");
    };

    CLI::App* sim = app.add_subcommand("simulate", "Monte Carlo study");
    add_common(sim);
    sim->add_option("--dgp", cfg.dgp, "I or II");
    sim->add_option("--n", cfg.n, "sample size");
    sim->add_option("--reps", cfg.reps, "replications");
    sim->add_option("--rho", cfg.rho, "endogeneity correlation");

    CLI::App* est = app.add_subcommand("estimate", "fit a coefficient path");
    add_common(est);
    add_data(est);

    CLI::App* boot = app.add_subcommand("bootstrap", "weighted bootstrap");
    add_common(boot);
    add_data(boot);
    boot->add_option("--draws", cfg.boot.draws, "bootstrap draws");
    boot->add_option("--ci-level", cfg.boot.ci_level, "CI coverage");
    boot->add_flag("--unit-weights", cfg.boot.unit_weights,
                   "force all multipliers to 1 (test hook)");

    try {
      app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
      int code = app.exit(e);
      return code == 0 ? 0 : 2;
    }

    auto split = [](const std::string& s) {
      std::vector<std::string> out;
      size_t start = 0;
      while (start <= s.size() && !s.empty()) {
        size_t comma = s.find(',', start);
        out.push_back(s.substr(start, comma - start));
        if (comma == std::string::npos) break;
        start = comma + 1;
      }
      return out;
    };
    if (!x_csv.empty()) cfg.x_names = split(x_csv);
    if (!z_csv.empty()) cfg.z_names = split(z_csv);
    command = app.get_subcommands().front()->get_name();
    finalize(cfg);
  } catch (const scfcq::ConfigError& e) {
    std::cerr << "{\"error\":\"config\",\"detail\":\"" << e.what() << "\"}\n";
    return 2;
  }

  try {
    if (command == "simulate") return cmd_simulate(cfg);
    if (command == "estimate") return cmd_estimate(cfg);
    return cmd_bootstrap(cfg);
  } catch (const scfcq::ConfigError& e) {
    std::cerr << "{\"error\":\"config\",\"detail\":\"" << e.what() << "\"}\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "{\"error\":\"runtime\",\"detail\":\"" << e.what() << "\"}\n";
    return 3;
  }
}
