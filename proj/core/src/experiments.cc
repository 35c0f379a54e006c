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

#include "fedspike/experiments.h"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>

#include <json.hpp>

#include "fedspike/client.h"
#include "fedspike/error.h"
#include "fedspike/spectral.h"

namespace fedspike {
namespace {

using Json = nlohmann::json;
using Clock = std::chrono::steady_clock;

double MillisSince(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start)
      .count();
}

std::string ClientId(std::size_t j) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "client-%04zu", j);
  return buf;
}

std::vector<double> Range(double first, double last, double step) {
  std::vector<double> out;
  for (int k = 0;; ++k) {
    const double v = first + k * step;
    if (v > last + 1e-9) break;
    out.push_back(std::round(v * 1e9) / 1e9);
  }
  return out;
}

int AsCount(double v, const char* what) {
  if (!(v >= 1.0) || v != std::floor(v)) {
    throw InvalidArgument(std::string(what) + " sweep values must be "
                          "positive integers");
  }
  return static_cast<int>(v);
}

}  // namespace

std::string_view ScenarioName(Scenario s) {
  switch (s) {
    case Scenario::kPrivacyUtility: return "privacy_utility";
    case Scenario::kVaryClients: return "vary_clients";
    case Scenario::kFixedTotal: return "fixed_total";
    case Scenario::kHeterogeneous: return "heterogeneous";
    case Scenario::kRealdata: return "realdata";
  }
  return "unknown";
}

Scenario ParseScenario(std::string_view name) {
  for (Scenario s : {Scenario::kPrivacyUtility, Scenario::kVaryClients,
                     Scenario::kFixedTotal, Scenario::kHeterogeneous,
                     Scenario::kRealdata}) {
    if (ScenarioName(s) == name) return s;
  }
  throw InvalidArgument("unknown scenario '" + std::string(name) + "'");
}

std::string_view MethodName(Method m) {
  switch (m) {
    case Method::kFedSpike: return "fedspike";
    case Method::kEqual: return "equal";
    case Method::kReference: return "reference";
    case Method::kOja: return "oja";
  }
  return "unknown";
}

Method ParseMethod(std::string_view name) {
  for (Method m : {Method::kFedSpike, Method::kEqual, Method::kReference,
                   Method::kOja}) {
    if (MethodName(m) == name) return m;
  }
  throw InvalidArgument("unknown method '" + std::string(name) + "'");
}

std::vector<Method> ParseMethodList(std::string_view list) {
  std::vector<Method> out;
  while (!list.empty()) {
    const std::size_t comma = list.find(',');
    std::string_view item = list.substr(0, comma);
    if (!item.empty()) {
      Method m = ParseMethod(item);
      if (std::find(out.begin(), out.end(), m) == out.end()) out.push_back(m);
    }
    if (comma == std::string_view::npos) break;
    list.remove_prefix(comma + 1);
  }
  if (out.empty()) throw InvalidArgument("method list is empty");
  return out;
}

ExperimentSpec DefaultSpec(Scenario scenario) {
  ExperimentSpec spec;
  spec.scenario = scenario;
  switch (scenario) {
    case Scenario::kPrivacyUtility:
      spec.sweep = Range(0.1, 1.0, 0.1);
      spec.clients = 10;
      spec.samples_per_client = 10000;
      spec.delta = 0.1;
      break;
    case Scenario::kVaryClients:
      spec.sweep = Range(10, 100, 10);
      spec.samples_per_client = 1000;
      spec.epsilon = 0.5;
      break;
    case Scenario::kFixedTotal:
      spec.sweep = {10, 20, 25, 50};
      spec.total_samples = 100000;
      spec.epsilon = 0.5;
      break;
    case Scenario::kHeterogeneous:
      spec.sweep = Range(100, 1000, 100);
      spec.clients = 10;
      break;
    case Scenario::kRealdata:
      spec.r = 5;
      break;
  }
  return spec;
}

void ValidateSpec(const ExperimentSpec& spec) {
  if (spec.scenario == Scenario::kRealdata) {
    throw InvalidArgument("the realdata scenario runs through RunRealdata");
  }
  if (spec.p < 1 || spec.r < 1 || spec.r > spec.p) {
    throw InvalidArgument("spec needs 1 <= r <= p");
  }
  if (!(spec.lambda > 0.0) || !(spec.sigma2 > 0.0)) {
    throw InvalidArgument("spec needs lambda > 0 and sigma2 > 0");
  }
  if (spec.replications < 1) throw InvalidArgument("replications must be >= 1");
  if (spec.sweep.empty()) throw InvalidArgument("sweep is empty");
  if (spec.methods.empty()) throw InvalidArgument("no methods selected");
  PrivacyBudget(spec.epsilon, spec.delta);
  PrivacyBudget(spec.epsilon_range.first, spec.delta_range.first);
  PrivacyBudget(spec.epsilon_range.second, spec.delta_range.second);
  if (spec.epsilon_range.first > spec.epsilon_range.second ||
      spec.delta_range.first > spec.delta_range.second) {
    throw InvalidArgument("budget ranges must be ordered (low, high)");
  }
  ValidateOjaConfig(spec.oja);
  // Every sweep point must yield clients with n_j >= max(r, 2).
  for (std::size_t s = 0; s < spec.sweep.size(); ++s) {
    ClientLayout layout = LayoutFor(spec, s, spec.base_seed);
    for (std::size_t j = 0; j < layout.sizes.size(); ++j) {
      if (layout.sizes[j] < std::max(spec.r, 2)) {
        throw InvalidArgument(
            "infeasible layout at sweep value " +
            std::to_string(spec.sweep[s]) + ": client " + layout.ids[j] +
            " gets n=" + std::to_string(layout.sizes[j]) + " < r");
      }
    }
  }
}

Seed ReplicationSeed(const ExperimentSpec& spec, std::size_t sweep_index,
                     int replication) {
  return DeriveSeed(DeriveSeed(spec.base_seed, "sweep", sweep_index),
                    "replication", static_cast<std::uint64_t>(replication));
}

ClientLayout LayoutFor(const ExperimentSpec& spec, std::size_t sweep_index,
                       Seed replication_seed) {
  if (sweep_index >= spec.sweep.size()) {
    throw InvalidArgument("sweep index out of range");
  }
  const double x = spec.sweep[sweep_index];
  ClientLayout layout;
  int m = spec.clients;
  switch (spec.scenario) {
    case Scenario::kPrivacyUtility: {
      m = spec.clients;
      const PrivacyBudget budget(x, spec.delta);
      layout.sizes.assign(m, spec.samples_per_client);
      layout.budgets.assign(m, budget);
      break;
    }
    case Scenario::kVaryClients: {
      m = AsCount(x, "vary_clients");
      layout.sizes.assign(m, spec.samples_per_client);
      layout.budgets.assign(m, PrivacyBudget(spec.epsilon, spec.delta));
      break;
    }
    case Scenario::kFixedTotal: {
      m = AsCount(x, "fixed_total");
      layout.sizes.assign(m, static_cast<int>(spec.total_samples / m));
      layout.budgets.assign(m, PrivacyBudget(spec.epsilon, spec.delta));
      break;
    }
    case Scenario::kHeterogeneous: {
      const int base = AsCount(x, "heterogeneous");
      Engine engine(DeriveSeed(replication_seed, "budgets"));
      std::uniform_real_distribution<double> eps(spec.epsilon_range.first,
                                                 spec.epsilon_range.second);
      std::uniform_real_distribution<double> del(spec.delta_range.first,
                                                 spec.delta_range.second);
      for (int j = 0; j < m; ++j) {
        layout.sizes.push_back(j < m / 2 ? spec.small_factor * base
                                         : spec.large_factor * base);
        const double e = eps(engine);
        const double d = del(engine);
        layout.budgets.emplace_back(e, d);
      }
      break;
    }
    case Scenario::kRealdata:
      throw InvalidArgument("realdata has no simulated layout");
  }
  if (m < 1) throw InvalidArgument("layout needs at least one client");
  for (int j = 0; j < m; ++j) layout.ids.push_back(ClientId(j));
  return layout;
}

std::vector<RunRecord> RunReplication(const ExperimentSpec& spec,
                                      std::size_t sweep_index,
                                      int replication) {
  const Seed seed = ReplicationSeed(spec, sweep_index, replication);
  const ClientLayout layout = LayoutFor(spec, sweep_index, seed);
  const SpikedModel truth = SpikedModel::WithRandomBasis(
      spec.p, spec.r, spec.lambda, spec.sigma2, DeriveSeed(seed, "truth"));
  const Eigen::MatrixXd sigma = CovarianceMatrix(truth);
  const std::size_t m = layout.sizes.size();

  auto wants = [&spec](Method method) {
    return std::find(spec.methods.begin(), spec.methods.end(), method) !=
           spec.methods.end();
  };
  const bool need_release = wants(Method::kFedSpike) ||
                            wants(Method::kEqual) || wants(Method::kReference);

  std::vector<ClientConfig> configs;
  std::vector<LocalSpectrum> spectra;
  std::vector<Eigen::MatrixXd> noisy;
  std::vector<ProjectorMessage> released;
  std::vector<Dataset> kept;
  std::vector<ClientParams> params;

  auto local_start = Clock::now();
  for (std::size_t j = 0; j < m; ++j) {
    ClientConfig cfg;
    cfg.client_id = layout.ids[j];
    cfg.budget = layout.budgets[j];
    cfg.rank = spec.r;
    cfg.lambda_plugin = truth.plugin_lambda();
    cfg.sigma2_plugin = truth.noise_var();
    cfg.seed = DeriveSeed(seed, "client", j);
    Dataset data = Sample(truth, layout.sizes[j], DeriveSeed(cfg.seed, kDataStream));
    params.push_back({cfg.client_id, layout.sizes[j], cfg.budget});
    if (need_release) {
      LocalSpectrum spectrum = ComputeLocalSpectrum(data, spec.r);
      noisy.push_back(NoisyLocalProjector(spectrum, cfg));
      ProjectorMessage msg;
      msg.client_id = cfg.client_id;
      msg.u_hat = TopSubspace(noisy.back(), spec.r);
      msg.n = spectrum.n;
      msg.epsilon = cfg.budget.epsilon();
      msg.delta = cfg.budget.delta();
      released.push_back(std::move(msg));
      spectra.push_back(std::move(spectrum));
    }
    if (wants(Method::kOja)) kept.push_back(std::move(data));
    configs.push_back(std::move(cfg));
  }
  const double local_ms = need_release ? MillisSince(local_start) : 0.0;

  std::vector<RunRecord> out;
  auto record = [&](Method method, double proj_err, std::optional<double> cov,
                    double ms) {
    RunRecord rec;
    rec.scenario = std::string(ScenarioName(spec.scenario));
    rec.method = std::string(MethodName(method));
    rec.sweep_value = spec.sweep[sweep_index];
    rec.replication = replication;
    rec.projection_error = proj_err;
    rec.cov_frobenius_error = cov;
    rec.wall_ms = ms;
    rec.seed = seed;
    out.push_back(std::move(rec));
  };

  auto run_weighted = [&](Method method, WeightScheme scheme) {
    auto start = Clock::now();
    AggregationWeights w = ComputeWeights(params, spec.p, spec.r,
                                          truth.plugin_lambda(),
                                          truth.noise_var(), scheme);
    Eigen::MatrixXd u_hat = AggregateProjectors(released, w);
    std::vector<EigenvalueMessage> blocks;
    blocks.reserve(m);
    for (std::size_t j = 0; j < m; ++j) {
      blocks.push_back(LocalPrivateEigenvalues(
          spectra[j].covariance, spectra[j].n, u_hat, configs[j]));
    }
    Eigen::MatrixXd sigma_hat =
        AssembleCovariance(u_hat, blocks, w, truth.noise_var());
    record(method, ProjectionDistance(u_hat, truth.basis()),
           (sigma_hat - sigma).norm(), local_ms + MillisSince(start));
  };

  for (Method method : spec.methods) {
    switch (method) {
      case Method::kFedSpike:
        run_weighted(method, spec.main_scheme);
        break;
      case Method::kEqual:
        run_weighted(method, WeightScheme::kEqual);
        break;
      case Method::kReference: {
        auto start = Clock::now();
        std::vector<double> w(m, 1.0 / static_cast<double>(m));
        Eigen::MatrixXd u_hat = AggregateReference(noisy, w, spec.r);
        record(method, ProjectionDistance(u_hat, truth.basis()), std::nullopt,
               local_ms + MillisSince(start));
        break;
      }
      case Method::kOja: {
        auto start = Clock::now();
        OjaConfig cfg = spec.oja;
        cfg.rank = spec.r;
        Eigen::MatrixXd u_hat =
            FedDpOja(kept, cfg, layout.budgets, truth.plugin_lambda(),
                     truth.noise_var(), DeriveSeed(seed, "oja"));
        record(method, ProjectionDistance(u_hat, truth.basis()), std::nullopt,
               MillisSince(start));
        break;
      }
    }
  }
  return out;
}

std::vector<RunRecord> RunScenario(const ExperimentSpec& spec,
                                   unsigned threads,
                                   const ProgressFn& progress) {
  ValidateSpec(spec);
  const std::size_t reps = static_cast<std::size_t>(spec.replications);
  const std::size_t total = spec.sweep.size() * reps;
  std::vector<std::vector<RunRecord>> slots(total);
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, total));

  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> done{0};
  std::mutex progress_mu;
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto work = [&] {
    while (true) {
      const std::size_t job = next.fetch_add(1);
      if (job >= total) return;
      try {
        slots[job] = RunReplication(spec, job / reps,
                                    static_cast<int>(job % reps));
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mu);
        if (!failure) failure = std::current_exception();
        next.store(total);
        return;
      }
      const std::size_t finished = done.fetch_add(1) + 1;
      if (progress) {
        std::lock_guard<std::mutex> lock(progress_mu);
        progress(finished, total);
      }
    }
  };
  if (threads <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work);
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<RunRecord> out;
  out.reserve(total * spec.methods.size());
  for (auto& slot : slots) {
    for (auto& rec : slot) out.push_back(std::move(rec));
  }
  return out;
}

void WriteRunCsv(std::span<const RunRecord> records, std::ostream& out) {
  out << kRunCsvHeader << '\n';
  char buf[64];
  auto num = [&buf](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  for (const RunRecord& r : records) {
    out << r.scenario << ',' << r.method << ',' << num(r.sweep_value) << ','
        << r.replication << ',' << num(r.projection_error) << ','
        << (r.cov_frobenius_error ? num(*r.cov_frobenius_error) : "") << ','
        << num(r.wall_ms) << ',' << r.seed << '\n';
  }
}

std::vector<RunRecord> ReadRunCsv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw InvalidArgument("run CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kRunCsvHeader) {
    throw InvalidArgument("run CSV header mismatch: '" + line + "'");
  }
  std::vector<RunRecord> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    if (cells.size() != 8) {
      throw InvalidArgument("run CSV line " + std::to_string(line_no) +
                            ": expected 8 fields");
    }
    try {
      RunRecord r;
      r.scenario = cells[0];
      r.method = cells[1];
      r.sweep_value = std::stod(cells[2]);
      r.replication = std::stoi(cells[3]);
      r.projection_error = std::stod(cells[4]);
      if (!cells[5].empty()) r.cov_frobenius_error = std::stod(cells[5]);
      r.wall_ms = std::stod(cells[6]);
      r.seed = std::stoull(cells[7]);
      out.push_back(std::move(r));
    } catch (const std::logic_error&) {
      throw InvalidArgument("run CSV line " + std::to_string(line_no) +
                            ": malformed number");
    }
  }
  return out;
}

std::vector<SeriesSummary> SummarizeRuns(std::span<const RunRecord> records) {
  // method -> x -> (sum, count); methods keep first-seen order.
  std::vector<std::string> order;
  std::map<std::string, std::map<double, std::pair<double, int>>> acc;
  for (const RunRecord& r : records) {
    if (!acc.count(r.method)) order.push_back(r.method);
    auto& cell = acc[r.method][r.sweep_value];
    cell.first += r.projection_error;
    cell.second += 1;
  }
  std::vector<SeriesSummary> out;
  for (const std::string& method : order) {
    SeriesSummary s;
    s.method = method;
    for (const auto& [x, sum_count] : acc[method]) {
      s.x.push_back(x);
      s.mean.push_back(sum_count.first / sum_count.second);
    }
    out.push_back(std::move(s));
  }
  return out;
}

PluginEstimate EstimatePlugins(const Dataset& data, int top_k,
                               std::pair<int, int> tail, bool subtract_noise) {
  const int p = data.dim();
  if (top_k < 1 || top_k > p) {
    throw InvalidArgument("top_k must lie in [1, p]");
  }
  if (tail.first < 1 || tail.second > p || tail.first > tail.second) {
    throw InvalidArgument("tail range (" + std::to_string(tail.first) + ", " +
                          std::to_string(tail.second) +
                          ") must lie within [1, " + std::to_string(p) + "]");
  }
  const Eigen::VectorXd values = SymEig(SampleCovariance(data)).values;
  const int tail_count = tail.second - tail.first + 1;
  const double tail_mean =
      values.segment(tail.first - 1, tail_count).sum() / tail_count;
  if (!(tail_mean > 0.0)) {
    throw InvalidArgument("tail eigenvalues are all zero; cannot estimate "
                          "the noise level");
  }
  PluginEstimate out;
  out.sigma2_hat = tail_mean;
  out.lambda_hat = values.head(top_k).mean();
  if (subtract_noise) out.lambda_hat -= out.sigma2_hat;
  return out;
}

// --- JSON config -----------------------------------------------------------

ExperimentSpec SpecFromJson(std::string_view text) {
  Json j;
  try {
    j = Json::parse(text.begin(), text.end());
  } catch (const Json::parse_error& e) {
    throw InvalidArgument(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw InvalidArgument("config must be a JSON object");
  try {
    ExperimentSpec spec = DefaultSpec(
        ParseScenario(j.value("scenario", std::string("privacy_utility"))));
    spec.p = j.value("p", spec.p);
    spec.r = j.value("r", spec.r);
    spec.lambda = j.value("lambda", spec.lambda);
    spec.sigma2 = j.value("sigma2", spec.sigma2);
    if (j.contains("sweep")) spec.sweep = j.at("sweep").get<std::vector<double>>();
    spec.clients = j.value("clients", spec.clients);
    spec.samples_per_client =
        j.value("samples_per_client", spec.samples_per_client);
    spec.total_samples = j.value("total_samples", spec.total_samples);
    spec.epsilon = j.value("epsilon", spec.epsilon);
    spec.delta = j.value("delta", spec.delta);
    if (j.contains("epsilon_range")) {
      auto v = j.at("epsilon_range").get<std::vector<double>>();
      if (v.size() != 2) throw InvalidArgument("epsilon_range needs 2 values");
      spec.epsilon_range = {v[0], v[1]};
    }
    if (j.contains("delta_range")) {
      auto v = j.at("delta_range").get<std::vector<double>>();
      if (v.size() != 2) throw InvalidArgument("delta_range needs 2 values");
      spec.delta_range = {v[0], v[1]};
    }
    spec.small_factor = j.value("small_factor", spec.small_factor);
    spec.large_factor = j.value("large_factor", spec.large_factor);
    spec.replications = j.value("replications", spec.replications);
    spec.base_seed = j.value("base_seed", spec.base_seed);
    if (j.contains("methods")) {
      spec.methods.clear();
      for (const auto& m : j.at("methods")) {
        spec.methods.push_back(ParseMethod(m.get<std::string>()));
      }
    }
    if (j.contains("weights")) {
      spec.main_scheme = ParseWeightScheme(j.at("weights").get<std::string>());
    }
    if (j.contains("oja")) {
      const Json& o = j.at("oja");
      spec.oja.initial_step = o.value("initial_step", spec.oja.initial_step);
      spec.oja.decay = o.value("decay", spec.oja.decay);
      spec.oja.passes = o.value("passes", spec.oja.passes);
      if (o.contains("noise_per_step")) {
        spec.oja.noise_per_step = o.at("noise_per_step").get<double>();
      }
      if (o.contains("clip_norm")) {
        spec.oja.clip_norm = o.at("clip_norm").get<double>();
      }
    }
    return spec;
  } catch (const Json::exception& e) {
    throw InvalidArgument(std::string("bad config field: ") + e.what());
  }
}

std::string SpecToJson(const ExperimentSpec& spec) {
  Json j;
  j["scenario"] = std::string(ScenarioName(spec.scenario));
  j["p"] = spec.p;
  j["r"] = spec.r;
  j["lambda"] = spec.lambda;
  j["sigma2"] = spec.sigma2;
  j["sweep"] = spec.sweep;
  j["clients"] = spec.clients;
  j["samples_per_client"] = spec.samples_per_client;
  j["total_samples"] = spec.total_samples;
  j["epsilon"] = spec.epsilon;
  j["delta"] = spec.delta;
  j["epsilon_range"] = {spec.epsilon_range.first, spec.epsilon_range.second};
  j["delta_range"] = {spec.delta_range.first, spec.delta_range.second};
  j["small_factor"] = spec.small_factor;
  j["large_factor"] = spec.large_factor;
  j["replications"] = spec.replications;
  j["base_seed"] = spec.base_seed;
  Json methods = Json::array();
  for (Method m : spec.methods) methods.push_back(std::string(MethodName(m)));
  j["methods"] = methods;
  j["weights"] = std::string(WeightSchemeName(spec.main_scheme));
  Json oja;
  oja["initial_step"] = spec.oja.initial_step;
  oja["decay"] = spec.oja.decay;
  oja["passes"] = spec.oja.passes;
  if (spec.oja.noise_per_step) oja["noise_per_step"] = *spec.oja.noise_per_step;
  if (spec.oja.clip_norm) oja["clip_norm"] = *spec.oja.clip_norm;
  j["oja"] = oja;
  return j.dump(2);
}

}  // namespace fedspike
