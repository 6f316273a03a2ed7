// bmconc: command-line front end for the metric measure space toolkit.
//
// Exit codes: 0 success / no violation, 1 violation found, 2 invalid input.

#include <chrono>
#include <cmath>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bmconc/bm_verifier.hpp"
#include "bmconc/cli_io.hpp"
#include "bmconc/concentration.hpp"
#include "bmconc/discretize.hpp"
#include "bmconc/geometry.hpp"

namespace {

using namespace bmconc;

constexpr int kExitOk = 0;
constexpr int kExitViolation = 1;
constexpr int kExitInvalid = 2;

struct Options {
  std::string space_path;
  std::optional<double> eps;
  double n = 2.0;
  std::vector<double> t_values;
  std::size_t t_grid = 0;
  std::vector<double> r_values;
  std::string r_grid;
  std::string strategy = "auto";
  std::string bm_strategy = "auto";
  std::size_t pairs = 10000;
  std::string sampler = "balls";
  std::uint64_t samples = 1000000;
  std::uint64_t seed = 1;
  std::string format = "json";
  std::string out;
  std::optional<double> tol;
  unsigned workers = 0;
  std::string a0;
  std::string a1;
  int m = 2;
  std::size_t centers = 300;
  std::size_t cloud = 100000;
  std::string report_path;
};

std::vector<std::size_t> parse_indices(const std::string& text, const char* flag) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t pos = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(item, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != item.size() || item.front() == '-')
      throw Error(ErrorCode::InvalidArgument, std::string(flag) + " expects comma-separated indices");
    out.push_back(static_cast<std::size_t>(v));
  }
  if (out.empty()) throw Error(ErrorCode::EmptySubset, std::string(flag) + " is empty");
  return out;
}

// "lo:hi:steps", inclusive linear grid.
std::vector<double> parse_r_grid(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(item);
  if (parts.size() != 3) throw Error(ErrorCode::InvalidArgument, "--r-grid expects lo:hi:steps");
  double lo, hi;
  long steps;
  try {
    lo = std::stod(parts[0]);
    hi = std::stod(parts[1]);
    steps = std::stol(parts[2]);
  } catch (const std::exception&) {
    throw Error(ErrorCode::InvalidArgument, "--r-grid expects lo:hi:steps");
  }
  if (steps < 1 || (steps > 1 && !(hi > lo)))
    throw Error(ErrorCode::InvalidArgument, "--r-grid needs steps >= 1 and hi > lo");
  std::vector<double> out;
  for (long k = 0; k < steps; ++k)
    out.push_back(steps == 1 ? lo : lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(steps - 1));
  return out;
}

std::vector<double> r_values(const Options& o, const std::string& fallback) {
  if (!o.r_values.empty()) return o.r_values;
  return parse_r_grid(o.r_grid.empty() ? fallback : o.r_grid);
}

std::vector<double> t_values(const Options& o) {
  if (o.t_grid > 0) return uniform_t_grid(o.t_grid);
  if (!o.t_values.empty()) return o.t_values;
  return {0.5};
}

double metadata_number(const SpaceFile& file, std::string_view key) {
  const std::string* v = file.find(key);
  return v ? std::stod(*v) : std::nan("");
}

// Monte Carlo spaces carry their weight standard-error budget; the reporting
// tolerance is three of those.
double tolerance(const Options& o, const SpaceFile& file, Json& params) {
  if (o.tol) {
    params["tol_report"] = *o.tol;
    params["tol_source"] = "flag";
    return *o.tol;
  }
  double budget = metadata_number(file, "weight_stderr_budget");
  double tol = std::isnan(budget) ? 0.0 : 3.0 * budget;
  params["tol_report"] = tol;
  params["tol_source"] = std::isnan(budget) ? "exact weights" : "3 * weight_stderr_budget";
  return tol;
}

double bm_eps(const Options& o, const SpaceFile& file, Json& params) {
  if (o.eps) {
    params["eps"] = *o.eps;
    params["eps_source"] = "flag";
    return *o.eps;
  }
  double cover = metadata_number(file, "covering_radius");
  double eps = std::isnan(cover) ? 0.0 : 4.0 * cover;
  params["eps"] = eps;
  params["eps_source"] = std::isnan(cover) ? "default" : "4 * covering_radius";
  return eps;
}

SpaceFile load(const Options& o) {
  if (o.space_path.empty()) throw Error(ErrorCode::InvalidArgument, "--space is required");
  return parse_space_file(read_file(o.space_path));
}

Subset subset_arg(const MetricMeasureSpace& space, const std::string& text, const char* flag) {
  auto idx = parse_indices(text, flag);
  return Subset::of(space.size(), idx);
}

void emit(const Options& o, const std::string& text) {
  if (o.out.empty())
    std::cout << text;
  else
    write_file_atomic(o.out, text);
}

class Timer {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

BMVerifyReport run_verify(const MetricMeasureSpace& space, const VerifyConfig& config, const Options& o,
                          const std::string& strategy, Json& params) {
  bool exhaustive = strategy == "exhaustive" || (strategy == "auto" && space.size() <= kExhaustiveMaxPoints);
  if (strategy != "exhaustive" && strategy != "sampled" && strategy != "auto")
    throw Error(ErrorCode::InvalidArgument, "BM strategy must be exhaustive, sampled or auto");
  params["bm_strategy"] = exhaustive ? "exhaustive" : "sampled";
  if (exhaustive) return bm_verify_exhaustive(space, config);
  auto sampler = SubsetSampler::parse(o.sampler);
  params["sampler"] = sampler.name();
  params["pairs"] = o.pairs;
  params["seed"] = o.seed;
  return bm_verify_sampled(space, config, o.pairs, sampler, o.seed);
}

int cmd_validate(const Options& o) {
  Timer timer;
  RunReport report{"validate"};
  report.parameters["space"] = o.space_path;
  Json results;
  int code = kExitOk;
  try {
    SpaceFile file = load(o);
    results["valid"] = true;
    results["size"] = file.space.size();
    results["diameter"] = diameter(file.space);
    Json meta = Json::object();
    for (const auto& [k, v] : file.metadata) meta[k] = v;
    results["metadata"] = meta;
  } catch (const ValidationError& e) {
    results["valid"] = false;
    Json list = Json::array();
    for (const auto& v : e.violations()) list.push_back(v.describe());
    results["violations"] = list;
    code = kExitInvalid;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::SyntaxError && e.code() != ErrorCode::DimensionMismatch) throw;
    results["valid"] = false;
    results["violations"] = Json::array({e.what()});
    code = kExitInvalid;
  }
  report.payload = results;
  report.wall_time_s = timer.seconds();
  emit(o, emit_report(report, ReportFormat::Json));
  return code;
}

int cmd_diameter(const Options& o) {
  Timer timer;
  SpaceFile file = load(o);
  RunReport report{"diameter"};
  report.parameters["space"] = o.space_path;
  auto [i, j] = diameter_pair(file.space);
  double d = diameter(file.space);
  report.payload = Json{{"diameter", d},
                        {"pair", Json::array({i, j})},
                        {"exceeds_pi", d > std::numbers::pi}};
  report.wall_time_s = timer.seconds();
  emit(o, emit_report(report, ReportFormat::Json));
  return d > std::numbers::pi ? kExitViolation : kExitOk;
}

int cmd_intermediate(const Options& o) {
  Timer timer;
  SpaceFile file = load(o);
  const auto& space = file.space;
  Subset a0 = subset_arg(space, o.a0, "--a0");
  Subset a1 = subset_arg(space, o.a1, "--a1");
  double t = t_values(o).front();
  double eps = o.eps.value_or(0.0);
  Subset set = intermediate_set(space, a0, a1, t, eps);
  RunReport report{"intermediate"};
  report.parameters = Json{{"space", o.space_path}, {"a0", to_json(a0)}, {"a1", to_json(a1)}, {"t", t}, {"eps", eps}};
  report.payload = Json{{"intermediate", to_json(set)}, {"measure", measure(space, set)}};
  report.wall_time_s = timer.seconds();
  emit(o, emit_report(report, ReportFormat::Json));
  return kExitOk;
}

int cmd_bm_check(const Options& o) {
  Timer timer;
  SpaceFile file = load(o);
  const auto& space = file.space;
  RunReport report{"bm-check"};
  report.parameters["space"] = o.space_path;
  BMParams params{bm_eps(o, file, report.parameters), o.n, t_values(o).front()};
  report.parameters["n"] = params.n;
  report.parameters["t"] = params.t;
  double tol = tolerance(o, file, report.parameters);
  Subset a0 = subset_arg(space, o.a0, "--a0");
  Subset a1 = subset_arg(space, o.a1, "--a1");
  BMCheckResult r = bm_check_pair(space, a0, a1, params, tol);
  report.payload = to_json(r);
  report.wall_time_s = timer.seconds();
  emit(o, emit_report(report, ReportFormat::Json));
  return r.satisfied ? kExitOk : kExitViolation;
}

int cmd_bm_verify(const Options& o) {
  Timer timer;
  SpaceFile file = load(o);
  RunReport report{"bm-verify"};
  report.parameters["space"] = o.space_path;
  VerifyConfig config;
  config.eps = bm_eps(o, file, report.parameters);
  config.n = o.n;
  config.t_values = t_values(o);
  config.tol_report = tolerance(o, file, report.parameters);
  config.workers = o.workers;
  report.parameters["n"] = config.n;
  report.parameters["t_values"] = config.t_values;
  BMVerifyReport r = run_verify(file.space, config, o, o.strategy, report.parameters);
  report.payload = r;
  report.wall_time_s = timer.seconds();
  emit(o, emit_report(report, ReportFormat::Json));
  return r.refuted() ? kExitViolation : kExitOk;
}

int cmd_concentration(const Options& o) {
  Timer timer;
  SpaceFile file = load(o);
  auto format = parse_report_format(o.format);
  auto strategy = parse_alpha_strategy(o.strategy);
  auto rs = r_values(o, "0.25:3.0:12");
  RunReport report{"concentration"};
  report.parameters = Json{{"space", o.space_path}, {"n", o.n}, {"strategy", to_string(strategy)}, {"r_values", rs}};
  report.payload = concentration_profile(file.space, rs, o.n, strategy, o.workers);
  report.wall_time_s = timer.seconds();
  emit(o, emit_report(report, format));
  return kExitOk;
}

int cmd_bounds(const Options& o) {
  Timer timer;
  auto rs = r_values(o, "0.25:3.0:12");
  RunReport report{"bounds"};
  report.parameters = Json{{"n", o.n}, {"r_values", rs}};
  Json rows = Json::array();
  bool chain_ok = true;
  for (double r : rs) {
    Json row;
    row["r"] = r;
    row["gaussian_bound"] = gaussian_bound(o.n, r);
    if (r > 0.0 && r < std::numbers::pi) {
      row["improved_bound"] = improved_bound(o.n, r);
      ChainValues c = theorem_chain_check(o.n, r);
      row["chain"] = Json{{"cosine", c.cosine}, {"polynomial", c.polynomial}, {"gaussian", c.gaussian},
                          {"holds", c.holds()}};
      chain_ok = chain_ok && c.holds();
    } else {
      row["improved_bound"] = nullptr;
      row["chain"] = nullptr;
    }
    rows.push_back(row);
  }
  report.payload = Json{{"rows", rows}, {"chain_holds", chain_ok}};
  report.wall_time_s = timer.seconds();
  emit(o, emit_report(report, ReportFormat::Json));
  return chain_ok ? kExitOk : kExitViolation;
}

int cmd_theorem_report(const Options& o) {
  Timer timer;
  SpaceFile file = load(o);
  const auto& space = file.space;
  RunReport report{"theorem-report"};
  report.parameters["space"] = o.space_path;
  VerifyConfig config;
  config.eps = bm_eps(o, file, report.parameters);
  config.n = o.n;
  config.t_values = t_values(o);
  config.tol_report = tolerance(o, file, report.parameters);
  config.workers = o.workers;
  report.parameters["n"] = config.n;
  report.parameters["t_values"] = config.t_values;
  auto strategy = parse_alpha_strategy(o.strategy);
  auto rs = r_values(o, "0.2:3.0:15");
  report.parameters["alpha_strategy"] = to_string(strategy);
  report.parameters["r_values"] = rs;

  auto [i, j] = diameter_pair(space);
  double diam = diameter(space);
  Json lemma{{"diameter", diam}, {"pair", Json::array({i, j})}, {"within_pi", diam <= std::numbers::pi}};

  BMVerifyReport bm = run_verify(space, config, o, o.bm_strategy, report.parameters);
  ConcentrationProfile profile = concentration_profile(space, rs, o.n, strategy, o.workers);
  auto exceed = profile.bound_exceedances();

  Json results;
  results["lemma"] = lemma;
  results["bm"] = to_json(bm);
  results["concentration"] = to_json(profile);
  results["conclusion"] = Json{{"bm_refuted", bm.refuted()},
                               {"gaussian_bound_exceeded", !exceed.empty()},
                               {"consistent_with_theorem", bm.refuted() || exceed.empty()}};
  report.payload = results;
  report.wall_time_s = timer.seconds();
  emit(o, emit_report(report, ReportFormat::Json));
  return (bm.refuted() || !exceed.empty()) ? kExitViolation : kExitOk;
}

int cmd_discretize(const Options& o) {
  Timer timer;
  DiscretizeOptions opts;
  opts.cloud_size = o.cloud;
  opts.workers = o.workers;
  DiscretizationResult d = discretize_sphere(o.m, o.centers, o.samples, o.seed, opts);
  emit(o, emit_space(d.space, discretization_metadata(d)));
  if (!o.report_path.empty()) {
    RunReport report{"discretize-sphere"};
    report.parameters = Json{{"m", o.m}, {"centers", o.centers}, {"samples", o.samples}, {"seed", o.seed},
                             {"cloud", o.cloud}};
    report.payload = d;
    report.wall_time_s = timer.seconds();
    write_file_atomic(o.report_path, emit_report(report, ReportFormat::Json));
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Concentration of measure and approximated Brunn-Minkowski checks on finite metric measure spaces"};
  app.require_subcommand(1);
  Options o;

  auto add_space = [&](CLI::App* sub) { sub->add_option("--space", o.space_path, "mms-1 space file")->required(); };
  auto add_out = [&](CLI::App* sub) { sub->add_option("--out", o.out, "write output here instead of stdout"); };
  auto add_workers = [&](CLI::App* sub) {
    sub->add_option("--workers", o.workers, "worker threads (0 = all cores); results do not depend on it");
  };
  auto add_bm = [&](CLI::App* sub) {
    sub->add_option("--eps", o.eps, "approximation slack (default: 4 * covering radius for discretized spaces, else 0)");
    sub->add_option("--n", o.n, "dimension parameter n > 1");
    sub->add_option("--t", o.t_values, "interpolation parameter in (0,1); repeatable (default 0.5)");
    sub->add_option("--t-grid", o.t_grid, "use t = k/(m+1), k = 1..m");
    sub->add_option("--tol", o.tol, "violation tolerance on the 1/n-root scale");
  };
  auto add_sampling = [&](CLI::App* sub) {
    sub->add_option("--pairs", o.pairs, "number of sampled (A0, A1) pairs");
    sub->add_option("--sampler", o.sampler, "singletons | balls | random | random:<k>");
    sub->add_option("--seed", o.seed, "random seed");
  };
  auto add_r = [&](CLI::App* sub) {
    sub->add_option("--r", o.r_values, "radius; repeatable");
    sub->add_option("--r-grid", o.r_grid, "lo:hi:steps inclusive grid");
  };

  auto* validate = app.add_subcommand("validate", "check a space file");
  add_space(validate);
  add_out(validate);

  auto* diam = app.add_subcommand("diameter", "diameter and the pair attaining it");
  add_space(diam);
  add_out(diam);

  auto* inter = app.add_subcommand("intermediate", "eps-approximated t-intermediate set of A0, A1");
  add_space(inter);
  add_out(inter);
  inter->add_option("--a0", o.a0, "comma-separated indices")->required();
  inter->add_option("--a1", o.a1, "comma-separated indices")->required();
  inter->add_option("--t", o.t_values, "interpolation parameter in (0,1)");
  inter->add_option("--eps", o.eps, "approximation slack");

  auto* check = app.add_subcommand("bm-check", "evaluate one instance of the approximated BM inequality");
  add_space(check);
  add_out(check);
  add_bm(check);
  check->add_option("--a0", o.a0, "comma-separated indices")->required();
  check->add_option("--a1", o.a1, "comma-separated indices")->required();

  auto* verify = app.add_subcommand("bm-verify", "search for violations of the approximated BM inequality");
  add_space(verify);
  add_out(verify);
  add_bm(verify);
  add_sampling(verify);
  add_workers(verify);
  verify->add_option("--strategy", o.strategy, "exhaustive | sampled | auto");

  auto* conc = app.add_subcommand("concentration", "concentration function profile");
  add_space(conc);
  add_out(conc);
  add_r(conc);
  add_workers(conc);
  conc->add_option("--n", o.n, "dimension parameter for the bound columns");
  conc->add_option("--strategy", o.strategy, "exact | greedy | auto");
  conc->add_option("--format", o.format, "json | csv");

  auto* bounds = app.add_subcommand("bounds", "Gaussian concentration bounds and the majorization chain");
  add_out(bounds);
  add_r(bounds);
  bounds->add_option("--n", o.n, "dimension parameter n > 1");

  auto* theorem = app.add_subcommand("theorem-report", "diameter, BM verification, concentration profile and bounds");
  add_space(theorem);
  add_out(theorem);
  add_bm(theorem);
  add_sampling(theorem);
  add_r(theorem);
  add_workers(theorem);
  theorem->add_option("--strategy", o.strategy, "concentration strategy: exact | greedy | auto");
  theorem->add_option("--bm-strategy", o.bm_strategy, "BM strategy: exhaustive | sampled | auto");

  auto* disc = app.add_subcommand("discretize-sphere", "eps-net discretization of the round sphere S^m");
  add_out(disc);
  add_workers(disc);
  disc->add_option("--m", o.m, "sphere dimension");
  disc->add_option("--centers", o.centers, "number of net points");
  disc->add_option("--samples", o.samples, "Monte Carlo samples for the cell measures");
  disc->add_option("--seed", o.seed, "random seed");
  disc->add_option("--cloud", o.cloud, "dense cloud size used for the net and covering radius");
  disc->add_option("--report", o.report_path, "also write a JSON run report here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInvalid;
  }

  try {
    if (*validate) return cmd_validate(o);
    if (*diam) return cmd_diameter(o);
    if (*inter) return cmd_intermediate(o);
    if (*check) return cmd_bm_check(o);
    if (*verify) return cmd_bm_verify(o);
    if (*conc) return cmd_concentration(o);
    if (*bounds) return cmd_bounds(o);
    if (*theorem) return cmd_theorem_report(o);
    if (*disc) return cmd_discretize(o);
  } catch (const ValidationError& e) {
    std::cerr << "invalid space: " << e.what() << "\n";
    for (const auto& v : e.violations()) std::cerr << "  " << v.describe() << "\n";
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  }
  return kExitInvalid;
}
