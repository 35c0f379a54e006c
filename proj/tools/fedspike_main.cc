/*
 * Copyright 2026 The fedspike Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// fedspike command line: simulate, realdata, rates, plot, sensitivity.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fedspike/dp_mechanism.h"
#include "fedspike/error.h"
#include "fedspike/experiments.h"
#include "fedspike/plot.h"
#include "fedspike/rates.h"
#include "fedspike/realdata.h"
#include "fedspike/server.h"
#include "fedspike/spiked_model.h"

namespace fs = std::filesystem;
using fedspike::InvalidArgument;

namespace {

std::string ReadFile(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<int> ParseIntList(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoi(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::logic_error&) {
      throw InvalidArgument("not an integer list: '" + text + "'");
    }
  }
  return out;
}

std::string G(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

struct SimulateArgs {
  std::string scenario = "privacy_utility";
  std::string out = "out";
  std::string config;
  std::string methods;
  std::string weights;
  int reps = 0;
  long long seed = -1;
  unsigned threads = 0;
  bool weights_as_printed = false;
  bool quiet = false;
};

int Simulate(const SimulateArgs& a) {
  fedspike::ExperimentSpec spec =
      a.config.empty() ? fedspike::DefaultSpec(fedspike::ParseScenario(a.scenario))
                       : fedspike::SpecFromJson(ReadFile(a.config));
  if (!a.config.empty() && a.scenario != "privacy_utility" &&
      fedspike::ParseScenario(a.scenario) != spec.scenario) {
    throw InvalidArgument("--scenario disagrees with the config file");
  }
  if (a.reps > 0) spec.replications = a.reps;
  if (a.seed >= 0) spec.base_seed = static_cast<fedspike::Seed>(a.seed);
  if (!a.methods.empty()) spec.methods = fedspike::ParseMethodList(a.methods);
  if (!a.weights.empty()) spec.main_scheme = fedspike::ParseWeightScheme(a.weights);
  if (a.weights_as_printed) {
    spec.main_scheme = fedspike::WeightScheme::kDataIndependentAsPrinted;
  }
  fedspike::ValidateSpec(spec);

  fs::create_directories(a.out);
  const fs::path dir(a.out);
  {
    std::ofstream cfg(dir / "spec.json");
    cfg << fedspike::SpecToJson(spec) << '\n';
  }
  fedspike::ProgressFn progress;
  if (!a.quiet) {
    progress = [](std::size_t done, std::size_t total) {
      std::fprintf(stderr, "\r%zu/%zu replications", done, total);
      if (done == total) std::fputc('\n', stderr);
    };
  }
  const auto records = fedspike::RunScenario(spec, a.threads, progress);
  {
    std::ofstream csv(dir / "results.csv");
    fedspike::WriteRunCsv(records, csv);
  }
  const auto series = fedspike::SummarizeRuns(records);
  fedspike::PlotOptions opts;
  opts.title = std::string(fedspike::ScenarioName(spec.scenario));
  switch (spec.scenario) {
    case fedspike::Scenario::kPrivacyUtility: opts.x_label = "epsilon"; break;
    case fedspike::Scenario::kVaryClients:
    case fedspike::Scenario::kFixedTotal: opts.x_label = "clients m"; break;
    case fedspike::Scenario::kHeterogeneous: opts.x_label = "N_sample"; break;
    case fedspike::Scenario::kRealdata: break;
  }
  {
    std::ofstream svg(dir / "plot.svg");
    svg << fedspike::RenderSvg(series, opts);
  }
  std::cout << "method,sweep_value,mean_projection_error\n";
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      std::cout << s.method << ',' << G(s.x[i]) << ',' << G(s.mean[i]) << '\n';
    }
  }
  return 0;
}

struct RealdataArgs {
  std::string input;
  bool header = false;
  bool standin = false;
  std::string clients = "130,51";
  std::string tail = "51,251";
  std::string methods;
  int rank = 5;
  int top_k = 3;
  double eps = 0.4;
  double delta = 0.1;
  long long seed = 20240917;
  bool no_sigma_subtract = false;
  bool weights_as_printed = false;
  bool allow_dropout = false;
  bool pooled_plugins = false;
};

int Realdata(const RealdataArgs& a) {
  fedspike::RealdataSpec spec;
  spec.client_sizes = ParseIntList(a.clients);
  const std::vector<int> tail = ParseIntList(a.tail);
  if (tail.size() != 2) throw InvalidArgument("--tail takes two integers");
  spec.tail = {tail[0], tail[1]};
  spec.rank = a.rank;
  spec.top_k = a.top_k;
  spec.epsilon = a.eps;
  spec.delta = a.delta;
  spec.seed = static_cast<fedspike::Seed>(a.seed);
  spec.subtract_noise = !a.no_sigma_subtract;
  spec.allow_dropout = a.allow_dropout;
  spec.pooled_plugins = a.pooled_plugins;
  if (a.weights_as_printed) {
    spec.main_scheme = fedspike::WeightScheme::kDataIndependentAsPrinted;
  }
  if (!a.methods.empty()) spec.methods = fedspike::ParseMethodList(a.methods);

  fedspike::Dataset data = [&] {
    if (a.standin) {
      long long total = 0;
      for (int n : spec.client_sizes) total += n;
      return fedspike::SyntheticStandIn(251, static_cast<int>(total), 5,
                                        spec.seed);
    }
    if (a.input.empty()) throw InvalidArgument("--input or --standin required");
    return fedspike::ReadDatasetCsv(a.input, a.header);
  }();

  const auto report = fedspike::RunRealdata(data, spec);
  std::cout << "# p=" << data.dim() << " N=" << data.size() << '\n';
  for (std::size_t j = 0; j < report.client_plugins.size(); ++j) {
    std::cout << "# client " << j + 1 << " n=" << spec.client_sizes[j]
              << " lambda_hat=" << G(report.client_plugins[j].lambda_hat)
              << " sigma2_hat=" << G(report.client_plugins[j].sigma2_hat)
              << '\n';
  }
  std::cout << "method,explained_variance\n";
  for (const auto& m : report.methods) {
    std::cout << m.method << ',' << G(m.explained_variance) << '\n';
  }
  std::cout << "pooled_nonprivate," << G(report.pooled_explained_variance)
            << '\n';
  return 0;
}

// Config: {"p", "r", "lambda", "sigma2", "clients": [{"id", "n", "epsilon",
// "delta"}], optional "weights" and "variant" ("log_factors" | "minimax")}.
int Rates(const std::string& config_path) {
  using Json = nlohmann::json;
  Json j;
  try {
    j = Json::parse(ReadFile(config_path));
  } catch (const Json::parse_error& e) {
    throw InvalidArgument(std::string("config is not valid JSON: ") + e.what());
  }
  try {
    const int p = j.at("p").get<int>();
    const int r = j.at("r").get<int>();
    const double lambda = j.at("lambda").get<double>();
    const double sigma2 = j.at("sigma2").get<double>();
    const auto scheme =
        fedspike::ParseWeightScheme(j.value("weights", std::string("optimal")));
    const std::string variant_name = j.value("variant", std::string("log_factors"));
    fedspike::RateVariant variant;
    if (variant_name == "log_factors") {
      variant = fedspike::RateVariant::kLogFactors;
    } else if (variant_name == "minimax") {
      variant = fedspike::RateVariant::kMinimax;
    } else {
      throw InvalidArgument("unknown rate variant '" + variant_name + "'");
    }
    std::vector<fedspike::ClientParams> params;
    std::vector<fedspike::RateInputs> inputs;
    for (const auto& c : j.at("clients")) {
      fedspike::ClientParams cp{c.at("id").get<std::string>(),
                                c.at("n").get<int>(),
                                fedspike::PrivacyBudget(c.at("epsilon").get<double>(),
                                                        c.at("delta").get<double>())};
      inputs.push_back({cp.n, cp.budget.epsilon(), cp.budget.delta(), p, r,
                        lambda, sigma2});
      params.push_back(std::move(cp));
    }
    if (params.empty()) throw InvalidArgument("config lists no clients");
    const auto w = fedspike::ComputeWeights(params, p, r, lambda, sigma2, scheme);
    const double pca = fedspike::PcaBound(inputs, variant);
    const double cov = fedspike::CovBound(inputs, lambda, variant);
    std::cout << "client,n,epsilon,delta,psi0_tilde,psi1_tilde,snr_admissible,"
                 "pca_weight,cov_weight,pca_bound,cov_bound\n";
    for (std::size_t k = 0; k < params.size(); ++k) {
      std::cout << params[k].client_id << ',' << params[k].n << ','
                << G(inputs[k].epsilon) << ',' << G(inputs[k].delta) << ','
                << G(fedspike::Psi0Tilde(inputs[k])) << ','
                << G(fedspike::Psi1Tilde(inputs[k])) << ','
                << (fedspike::SnrAdmissible(inputs[k]) ? "true" : "false") << ','
                << G(w.pca_weight(params[k].client_id)) << ','
                << G(w.cov_weight(params[k].client_id)) << ",,\n";
    }
    std::cout << "all,,,,,,,,," << G(pca) << ',' << G(cov) << '\n';
  } catch (const Json::exception& e) {
    throw InvalidArgument(std::string("bad rates config: ") + e.what());
  }
  return 0;
}

int Plot(const std::string& input, const std::string& output,
         const std::string& title) {
  std::ifstream in(input);
  if (!in) throw InvalidArgument("cannot open " + input);
  const auto records = fedspike::ReadRunCsv(in);
  fedspike::PlotOptions opts;
  opts.title = title.empty() && !records.empty() ? records.front().scenario
                                                 : title;
  std::ofstream out(output);
  out << fedspike::RenderSvg(fedspike::SummarizeRuns(records), opts);
  return 0;
}

struct SensitivityArgs {
  int p = 20;
  int r = 1;
  int n = 500;
  double lambda = 10.0;
  double sigma2 = 1.0;
  int trials = 100;
  double constant = 4.0;
  long long seed = 1;
};

int Sensitivity(const SensitivityArgs& a) {
  const auto model = fedspike::SpikedModel::WithRandomBasis(
      a.p, a.r, a.lambda, a.sigma2, static_cast<fedspike::Seed>(a.seed));
  const auto report = fedspike::EmpiricalProjectorSensitivity(
      model, a.n, a.r, a.trials, static_cast<fedspike::Seed>(a.seed),
      a.constant);
  std::cout << "empirical_max," << G(report.empirical_max) << '\n'
            << "analytic_bound," << G(report.analytic_bound) << '\n'
            << "constant," << G(report.constant) << '\n'
            << "sensitivity_margin," << G(report.sensitivity_margin) << '\n';
  return report.sensitivity_margin > 1.0 ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Federated differentially private spiked covariance estimation"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Run a simulation scenario");
  simulate->add_option("--scenario", sim.scenario,
                       "privacy_utility | vary_clients | fixed_total | heterogeneous");
  simulate->add_option("--out", sim.out, "Output directory")->required();
  simulate->add_option("--config", sim.config, "JSON spec file");
  simulate->add_option("--reps", sim.reps, "Replications per sweep point");
  simulate->add_option("--seed", sim.seed, "Base seed");
  simulate->add_option("--methods", sim.methods, "e.g. fedspike,equal,reference,oja");
  simulate->add_option("--weights", sim.weights,
                       "optimal | data_independent | as_printed | equal");
  simulate->add_flag("--weights-as-printed", sim.weights_as_printed);
  simulate->add_option("--threads", sim.threads, "Worker threads (0 = all cores)");
  simulate->add_flag("--quiet", sim.quiet);

  RealdataArgs real;
  auto* realdata = app.add_subcommand("realdata", "Two-client real-data workflow");
  realdata->add_option("--input", real.input, "p x N matrix, one observation per row");
  realdata->add_flag("--header", real.header, "Skip a header row");
  realdata->add_flag("--standin", real.standin, "Use a synthetic rank-5 stand-in");
  realdata->add_option("--clients", real.clients, "Split sizes, e.g. 130,51");
  realdata->add_option("--rank", real.rank);
  realdata->add_option("--eps", real.eps);
  realdata->add_option("--delta", real.delta);
  realdata->add_option("--seed", real.seed);
  realdata->add_option("--top-k", real.top_k);
  realdata->add_option("--tail", real.tail, "1-indexed inclusive range, e.g. 51,251");
  realdata->add_option("--methods", real.methods);
  realdata->add_flag("--no-sigma-subtract", real.no_sigma_subtract);
  realdata->add_flag("--weights-as-printed", real.weights_as_printed);
  realdata->add_flag("--allow-dropout", real.allow_dropout);
  realdata->add_flag("--pooled-plugins", real.pooled_plugins,
                     "Estimate one pair of plug-ins from the pooled data");

  std::string rates_config;
  auto* rates = app.add_subcommand("rates", "Per-client rates, weights and bounds");
  rates->add_option("--config", rates_config)->required();

  std::string plot_in, plot_out, plot_title;
  auto* plot = app.add_subcommand("plot", "Render results.csv as SVG");
  plot->add_option("--input", plot_in)->required();
  plot->add_option("--out", plot_out)->required();
  plot->add_option("--title", plot_title);

  SensitivityArgs sens;
  auto* sensitivity =
      app.add_subcommand("sensitivity", "Empirical projector sensitivity");
  sensitivity->add_option("--p", sens.p);
  sensitivity->add_option("--r", sens.r);
  sensitivity->add_option("--n", sens.n);
  sensitivity->add_option("--lambda", sens.lambda);
  sensitivity->add_option("--sigma2", sens.sigma2);
  sensitivity->add_option("--trials", sens.trials);
  sensitivity->add_option("--constant", sens.constant);
  sensitivity->add_option("--seed", sens.seed);

  CLI11_PARSE(app, argc, argv);
  try {
    if (*simulate) return Simulate(sim);
    if (*realdata) return Realdata(real);
    if (*rates) return Rates(rates_config);
    if (*plot) return Plot(plot_in, plot_out, plot_title);
    if (*sensitivity) return Sensitivity(sens);
  } catch (const fedspike::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
