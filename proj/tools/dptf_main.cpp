// Command-line front end: simulate synthetic studies, fit the dynamic
// model, fit per-time baselines, score dependence recovery, forecast a
// held-out table, and print prior moment reports.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "dptf/baselines.hpp"
#include "dptf/data_io.hpp"
#include "dptf/experiments.hpp"
#include "dptf/prior_moments.hpp"
#include "dptf/sampler.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path);
  return json::parse(in);
}

dptf::PriorConfig parse_prior(const json& cfg) {
  dptf::PriorConfig prior;
  if (!cfg.contains("prior")) return prior;
  const auto& p = cfg["prior"];
  prior.dirichlet_a = p.value("dirichlet_a", prior.dirichlet_a);
  prior.mu0 = p.value("mu0", prior.mu0);
  prior.var_mu0 = p.value("var_mu0", prior.var_mu0);
  prior.shape_obs = p.value("shape_obs", prior.shape_obs);
  prior.scale_obs = p.value("scale_obs", prior.scale_obs);
  prior.shape_state = p.value("shape_state", prior.shape_state);
  prior.scale_state = p.value("scale_state", prior.scale_state);
  return prior;
}

dptf::ChainConfig parse_chain(const json& cfg) {
  dptf::ChainConfig chain;
  chain.prior = parse_prior(cfg);
  if (!cfg.contains("chain")) return chain;
  const auto& c = cfg["chain"];
  chain.iterations = c.value("iterations", chain.iterations);
  chain.burnin = c.value("burnin", chain.burnin);
  chain.thin = c.value("thin", chain.thin);
  chain.seed = c.value("seed", chain.seed);
  chain.init_components = c.value("init_components", chain.init_components);
  if (c.contains("link")) chain.link = dptf::Link::parse(c["link"].get<std::string>());
  chain.generic_link_update = c.value("generic_link_update", chain.generic_link_update);
  return chain;
}

dptf::SimulationSpec parse_simulation(const json& cfg) {
  dptf::SimulationSpec spec;
  if (!cfg.contains("simulate")) throw std::runtime_error("config lacks a 'simulate' section");
  const auto& s = cfg["simulate"];
  const std::string kind = s.value("case", "model-based");
  if (kind == "model-based") {
    spec.kind = dptf::SimulationSpec::Case::model_based;
  } else if (kind == "loglinear-rw") {
    spec.kind = dptf::SimulationSpec::Case::loglinear_rw;
  } else {
    throw std::runtime_error("unknown simulation case '" + kind + "'");
  }
  spec.horizon = s.value("horizon", spec.horizon);
  spec.num_vars = s.value("num_vars", spec.num_vars);
  spec.levels = s.value("levels", spec.levels);
  spec.holdout_waves = s.value("holdout_waves", spec.holdout_waves);
  if (s.contains("wave_sizes")) spec.wave_sizes = s["wave_sizes"].get<std::vector<int>>();
  spec.hyper.mu = s.value("mu", spec.hyper.mu);
  spec.hyper.phi = s.value("phi", spec.hyper.phi);
  const double sigma_eps = s.value("sigma_eps", std::sqrt(spec.hyper.var_obs));
  const double sigma_eta = s.value("sigma_eta", std::sqrt(spec.hyper.var_state));
  spec.hyper.var_obs = sigma_eps * sigma_eps;
  spec.hyper.var_state = sigma_eta * sigma_eta;
  spec.dirichlet_a = s.value("dirichlet_a", spec.dirichlet_a);
  spec.rw_var = s.value("rw_var", spec.rw_var);
  spec.seed = s.value("seed", spec.seed);
  return spec;
}

void write_truth_rho(const dptf::ParafacMixture& truth, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "t,j,jp,rho\n";
  const auto entries = dptf::dependence_table(dptf::ExecPolicy::parallel, truth);
  for (const auto& e : entries) {
    out << e.t + 1 << "," << e.j + 1 << "," << e.jp + 1 << "," << dptf::format_double(e.rho)
        << "\n";
  }
}

struct TruthRho {
  int horizon = 0;
  int num_vars = 0;
  // [(t, pair j<jp)] in pair-major order per time
  std::vector<std::vector<double>> by_time;
};

TruthRho read_truth_rho(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  std::getline(in, line);  // header
  struct Row {
    int t, j, jp;
    double rho;
  };
  std::vector<Row> rows;
  int max_t = 0, max_j = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    Row r;
    char comma;
    ss >> r.t >> comma >> r.j >> comma >> r.jp >> comma >> r.rho;
    if (!ss) throw std::runtime_error("bad truth row: " + line);
    rows.push_back(r);
    max_t = std::max(max_t, r.t);
    max_j = std::max(max_j, std::max(r.j, r.jp));
  }
  TruthRho truth;
  truth.horizon = max_t;
  truth.num_vars = max_j;
  const int pairs = max_j * (max_j - 1) / 2;
  truth.by_time.assign(max_t, std::vector<double>(pairs, 0.0));
  auto pair_index = [&](int j, int jp) {
    // pair-major order matching nested loops j < jp
    int idx = 0;
    for (int a = 1; a < j; ++a) idx += max_j - a;
    return idx + (jp - j - 1);
  };
  for (const auto& r : rows) truth.by_time[r.t - 1][pair_index(r.j, r.jp)] = r.rho;
  return truth;
}

std::vector<std::vector<double>> posterior_mean_rho(const dptf::PosteriorDraws& draws) {
  const int p = draws.schema.num_vars();
  const int pairs = p * (p - 1) / 2;
  std::vector<std::vector<double>> sums(draws.horizon, std::vector<double>(pairs, 0.0));
  for (const auto& draw : draws.draws) {
    const auto mixture = draws.mixture_of(draw);
    const auto entries = dptf::dependence_table(dptf::ExecPolicy::parallel, mixture);
    for (int pair = 0; pair < pairs; ++pair) {
      for (int t = 0; t < draws.horizon; ++t) {
        sums[t][pair] += entries[static_cast<std::size_t>(pair) * draws.horizon + t].rho;
      }
    }
  }
  for (auto& row : sums) {
    for (double& v : row) v /= static_cast<double>(draws.draws.size());
  }
  return sums;
}

double correlation_against_truth(const std::vector<double>& means,
                                 const std::vector<double>& truths) {
  return dptf::pearson_correlation(truths, means);
}

std::vector<int> parse_margin(const std::string& csv) {
  std::vector<int> vars;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    vars.push_back(std::stoi(tok) - 1);  // 1-based on the command line
  }
  return vars;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dynamic tensor factorization for sparse categorical time series"};
  app.require_subcommand(1);

  std::string config_path, out_dir = ".", data_path, codebook_path, draws_path;
  std::string truth_path, dx_dir, holdout_path, margin_csv = "1,2";
  std::uint64_t seed = 0;
  bool seed_set = false;
  int iters = 0, burnin = -1, thin = 0, chains = 1, horizon = 1, n_future = 0;
  bool serial = false;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON configuration file");
    cmd->add_option("--out", out_dir, "output directory");
    cmd->add_option_function<std::uint64_t>(
        "--seed", [&](std::uint64_t v) { seed = v; seed_set = true; }, "seed override");
  };

  auto* sim = app.add_subcommand("simulate", "generate a synthetic study with exact truth");
  add_common(sim);

  auto* fit = app.add_subcommand("fit", "fit the dynamic model by MCMC");
  add_common(fit);
  fit->add_option("--data", data_path, "input dataset csv")->required();
  fit->add_option("--codebook", codebook_path, "codebook json")->required();
  fit->add_option("--iters", iters, "sweeps");
  fit->add_option("--burnin", burnin, "burn-in sweeps");
  fit->add_option("--thin", thin, "thinning");
  fit->add_option("--chains", chains, "independent chains");
  fit->add_flag("--serial", serial, "serial reference kernels");

  auto* dx = app.add_subcommand("baseline-dx", "fit the static mixture separately per wave");
  add_common(dx);
  dx->add_option("--data", data_path)->required();
  dx->add_option("--codebook", codebook_path)->required();
  dx->add_option("--iters", iters);
  dx->add_option("--burnin", burnin);
  dx->add_option("--thin", thin);
  dx->add_flag("--serial", serial);

  auto* eval = app.add_subcommand("evaluate", "correlate posterior dependence with truth");
  add_common(eval);
  eval->add_option("--draws", draws_path)->required();
  eval->add_option("--truth", truth_path)->required();
  eval->add_option("--dx-dir", dx_dir, "directory of per-wave baseline draw files");

  auto* pred = app.add_subcommand("predict", "forecast a margin table past the fitted waves");
  add_common(pred);
  pred->add_option("--draws", draws_path)->required();
  pred->add_option("--horizon", horizon, "steps past the fitted horizon (0 = refit last wave)");
  pred->add_option("--n-future", n_future, "future subjects per replicate")->required();
  pred->add_option("--margin", margin_csv, "1-based margin variables, comma separated");
  pred->add_option("--data", data_path, "dataset csv for the independence baseline");
  pred->add_option("--codebook", codebook_path);
  pred->add_option("--holdout", holdout_path, "observed future wave for scoring");

  auto* mom = app.add_subcommand("moments", "print the analytic prior moment report");
  add_common(mom);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    const json cfg = load_config(config_path);
    fs::create_directories(out_dir);
    auto path_in_out = [&](const std::string& name) { return (fs::path(out_dir) / name).string(); };

    if (sim->parsed()) {
      dptf::SimulationSpec spec = parse_simulation(cfg);
      if (seed_set) spec.seed = seed;
      const auto output = dptf::generate(spec);
      const auto codebook = dptf::CodebookSpec::identity(output.data.schema());
      dptf::write_dataset(output.data, codebook, path_in_out("dataset.csv"));
      codebook.to_json_file(path_in_out("codebook.json"));
      write_truth_rho(output.truth, path_in_out("truth_rho.csv"));
      if (output.holdout) {
        dptf::write_dataset(*output.holdout, codebook, path_in_out("holdout.csv"));
      }
      json meta;
      meta["seed"] = spec.seed;
      meta["horizon"] = spec.horizon;
      meta["holdout_waves"] = spec.holdout_waves;
      meta["num_vars"] = spec.num_vars;
      meta["levels"] = spec.levels;
      std::ofstream(path_in_out("meta.json")) << meta.dump(2) << "\n";
      std::cout << "simulated " << spec.horizon << " waves (+" << spec.holdout_waves
                << " held out), " << spec.num_vars << " variables\n";
      return 0;
    }

    if (fit->parsed()) {
      const auto codebook = dptf::CodebookSpec::from_json_file(codebook_path);
      const auto data = dptf::load_dataset(data_path, codebook);
      dptf::ChainConfig chain = parse_chain(cfg);
      if (seed_set) chain.seed = seed;
      if (iters > 0) chain.iterations = iters;
      if (burnin >= 0) chain.burnin = burnin;
      if (thin > 0) chain.thin = thin;
      chain.exec = serial ? dptf::ExecPolicy::serial : dptf::ExecPolicy::parallel;
      const auto draws = dptf::run_chains(data, chain, chains);
      dptf::write_draws(draws, path_in_out("draws.txt"));
      dptf::write_rho_summary(draws, {}, path_in_out("rho_summary.csv"));
      std::ofstream diag(path_in_out("diagnostics.csv"));
      diag << "chain,sweeps,phi_acceptance,final_k_star,final_cover\n";
      for (std::size_t c = 0; c < draws.diagnostics.size(); ++c) {
        const auto& d = draws.diagnostics[c];
        diag << c << "," << d.k_star_trace.size() << ","
             << dptf::format_double(d.phi_acceptance()) << "," << d.k_star_trace.back() << ","
             << d.cover_trace.back() << "\n";
      }
      std::cout << "retained " << draws.draws.size() << " draws over " << chains << " chain(s)\n";
      return 0;
    }

    if (dx->parsed()) {
      const auto codebook = dptf::CodebookSpec::from_json_file(codebook_path);
      const auto data = dptf::load_dataset(data_path, codebook);
      dptf::StaticDXConfig dx_config;
      dx_config.prior = parse_prior(cfg);
      if (cfg.contains("dx")) dx_config.alpha = cfg["dx"].value("alpha", dx_config.alpha);
      const dptf::ChainConfig defaults = parse_chain(cfg);
      dx_config.iterations = iters > 0 ? iters : defaults.iterations;
      dx_config.burnin = burnin >= 0 ? burnin : defaults.burnin;
      dx_config.thin = thin > 0 ? thin : defaults.thin;
      dx_config.seed = seed_set ? seed : defaults.seed;
      dx_config.exec = serial ? dptf::ExecPolicy::serial : dptf::ExecPolicy::parallel;
      for (int t = 0; t < data.num_waves(); ++t) {
        dx_config.stream = static_cast<std::uint64_t>(t);
        const auto draws = dptf::fit_static_dx(data.single_wave(t), dx_config);
        dptf::write_draws(draws, path_in_out("draws_dx_t" + std::to_string(t + 1) + ".txt"));
      }
      std::cout << "fit " << data.num_waves() << " per-wave baselines\n";
      return 0;
    }

    if (eval->parsed()) {
      const auto truth = read_truth_rho(truth_path);
      const auto draws = dptf::read_draws(draws_path);
      const auto means = posterior_mean_rho(draws);
      std::ofstream out(path_in_out("rho_eval.csv"));
      out << "method,t,correlation\n";
      std::vector<double> pooled_means, pooled_truth;
      for (int t = 0; t < draws.horizon; ++t) {
        out << "dynamic," << t + 1 << ","
            << dptf::format_double(correlation_against_truth(means[t], truth.by_time[t])) << "\n";
        pooled_means.insert(pooled_means.end(), means[t].begin(), means[t].end());
        pooled_truth.insert(pooled_truth.end(), truth.by_time[t].begin(), truth.by_time[t].end());
      }
      out << "dynamic,pooled,"
          << dptf::format_double(dptf::pearson_correlation(pooled_truth, pooled_means)) << "\n";
      if (!dx_dir.empty()) {
        std::vector<double> dx_pooled_means, dx_pooled_truth;
        for (int t = 0; t < truth.horizon; ++t) {
          const auto file = fs::path(dx_dir) / ("draws_dx_t" + std::to_string(t + 1) + ".txt");
          if (!fs::exists(file)) continue;
          const auto dx_draws = dptf::read_draws(file.string());
          const auto dx_means = posterior_mean_rho(dx_draws);
          out << "dx," << t + 1 << ","
              << dptf::format_double(correlation_against_truth(dx_means[0], truth.by_time[t]))
              << "\n";
          dx_pooled_means.insert(dx_pooled_means.end(), dx_means[0].begin(), dx_means[0].end());
          dx_pooled_truth.insert(dx_pooled_truth.end(), truth.by_time[t].begin(),
                                 truth.by_time[t].end());
        }
        if (!dx_pooled_means.empty()) {
          out << "dx,pooled,"
              << dptf::format_double(dptf::pearson_correlation(dx_pooled_truth, dx_pooled_means))
              << "\n";
        }
      }
      std::cout << "wrote " << path_in_out("rho_eval.csv") << "\n";
      return 0;
    }

    if (pred->parsed()) {
      const auto draws = dptf::read_draws(draws_path);
      const auto margin = parse_margin(margin_csv);
      const std::uint64_t forecast_seed = seed_set ? seed : 1;
      const auto tables = dptf::forecast_table(
          draws, horizon, n_future, margin, forecast_seed);
      {
        std::ofstream out(path_in_out("forecast_counts.csv"));
        out << "replicate,cell,count\n";
        for (std::size_t r = 0; r < tables.tables.size(); ++r) {
          for (std::size_t c = 0; c < tables.tables[r].size(); ++c) {
            out << r << "," << c << "," << dptf::format_double(tables.tables[r][c]) << "\n";
          }
        }
      }
      if (!holdout_path.empty()) {
        if (codebook_path.empty() || data_path.empty()) {
          throw std::runtime_error("predict: scoring needs --data and --codebook");
        }
        const auto codebook = dptf::CodebookSpec::from_json_file(codebook_path);
        const auto observed_data = dptf::load_dataset(holdout_path, codebook);
        const auto fitted_data = dptf::load_dataset(data_path, codebook);
        const auto observed = dptf::observed_margin(observed_data, 0, margin);
        const auto crit = dptf::predictive_criteria(tables.tables, observed);

        const auto base_mixture =
            dptf::independence_baseline(fitted_data.single_wave(fitted_data.num_waves() - 1));
        const auto base_tables = dptf::forecast_from_mixture(
            base_mixture, 0, static_cast<int>(tables.tables.size()), n_future, margin,
            forecast_seed);
        const auto base_crit = dptf::predictive_criteria(base_tables.tables, observed);

        std::ofstream out(path_in_out("forecast_eval.csv"));
        out << "method,mean_ad,mean_mape\n";
        out << "dynamic," << dptf::format_double(crit.mean_ad) << ","
            << dptf::format_double(crit.mean_mape) << "\n";
        out << "independence," << dptf::format_double(base_crit.mean_ad) << ","
            << dptf::format_double(base_crit.mean_mape) << "\n";
      }
      std::cout << "wrote " << tables.tables.size() << " forecast replicates\n";
      return 0;
    }

    if (mom->parsed()) {
      if (!cfg.contains("moments")) throw std::runtime_error("config lacks a 'moments' section");
      const auto& m = cfg["moments"];
      const dptf::CategoricalSchema schema(m.at("levels").get<std::vector<int>>());
      const auto hyper = dptf::DirichletHyper::symmetric(schema, m.value("dirichlet_a", 1.0));
      dptf::StateHyper state;
      state.mu = m.value("mu", 0.0);
      state.phi = m.value("phi", 0.5);
      const double sigma_eps = m.value("sigma_eps", 0.3);
      const double sigma_eta = m.value("sigma_eta", 0.5);
      state.var_obs = sigma_eps * sigma_eps;
      state.var_state = sigma_eta * sigma_eta;
      const dptf::Link link = dptf::Link::parse(m.value("link", std::string("probit")));
      std::vector<int> cell = m.at("cell").get<std::vector<int>>();
      std::vector<int> other = m.at("other_cell").get<std::vector<int>>();
      for (auto& c : cell) --c;
      for (auto& c : other) --c;
      std::vector<int> lags = m.value("lags", std::vector<int>{0, 1, 2});
      std::cout << "lag,expectation,variance,covariance,link_mean,link_second,link_lag\n";
      for (int lag : lags) {
        const auto report = dptf::prior_moments(schema, hyper, link, state, cell, other, lag);
        std::cout << lag << "," << dptf::format_double(report.expectation) << ","
                  << dptf::format_double(report.variance) << ","
                  << dptf::format_double(report.covariance) << ","
                  << dptf::format_double(report.link.mean) << ","
                  << dptf::format_double(report.link.second_moment) << ","
                  << dptf::format_double(report.link.lag_moment) << "\n";
      }
      return 0;
    }
  } catch (const dptf::NumericAbort& e) {
    std::cerr << "numeric abort: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
