// Acceptance suite. One result line per criterion; run with a criterion
// number to evaluate only that one. Exit status is nonzero if any selected
// criterion fails.
#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "bmconc/bm_verifier.hpp"
#include "bmconc/cli_io.hpp"
#include "bmconc/concentration.hpp"
#include "bmconc/discretize.hpp"
#include "bmconc/geometry.hpp"
#include "test_support.hpp"

using namespace bmconc;
using namespace bmconc::testing;

namespace {

constexpr double kPi = std::numbers::pi;

// Reference values from 40-digit mpmath evaluation.
constexpr double kTwoPointRhs = 0.7548158475166473087373717;
constexpr double kImproved50 = 0.09449813532375175068743471;
constexpr double kGaussian50 = 0.5780832907437064592288676;
constexpr double kRatioAt02[3] = {-2.457039750282691746914, -0.3974969434603170981287, 0.2984495690985207132087};

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << "  failed: " << what << "\n";
    }
  }
  void note(const std::string& text) { detail << "  " << text << "\n"; }
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::vector<double> open_grid(double lo, double hi, std::size_t count) {
  std::vector<double> g(count);
  for (std::size_t k = 0; k < count; ++k) g[k] = lo + (hi - lo) * static_cast<double>(k) / (count - 1);
  return g;
}

const std::vector<double> kNs{1.5, 2.0, 5.0, 50.0};

void criterion_1(Outcome& o) {
  double worst_abs = 0.0, worst_rel = 0.0;
  for (double n : kNs) {
    for (double d : open_grid(0.001, kPi - 0.001, 1000)) {
      double got = distortion_coefficient(d, 0.5, n).value();
      double want = std::pow(1.0 / std::cos(d / 2.0), (n - 1.0) / n);
      double err = std::abs(got - want);
      worst_abs = std::max(worst_abs, err);
      worst_rel = std::max(worst_rel, err / want);
      o.require(err <= 1e-12, "n=" + fmt(n) + " d=" + fmt(d) + " error " + fmt(err));
    }
  }
  o.note("max abs error " + fmt(worst_abs) + ", max rel error " + fmt(worst_rel));
}

void criterion_2(Outcome& o) {
  double worst_margin = -1e300;
  for (double n : kNs) {
    for (double r : open_grid(0.001, kPi - 0.001, 1000)) {
      auto c = theorem_chain_check(n, r);
      worst_margin = std::max({worst_margin, c.cosine - c.polynomial, c.polynomial - c.gaussian});
      o.require(c.holds(1e-12), "n=" + fmt(n) + " r=" + fmt(r));
    }
  }
  o.note("largest term minus its successor " + fmt(worst_margin));
}

void criterion_3(Outcome& o) {
  VerifyConfig cfg;
  cfg.eps = 0.0;
  cfg.n = 2.0;
  cfg.t_values = {0.5};
  auto r = bm_verify_exhaustive(two_point(1.0), cfg);
  o.require(r.violation_count >= 1, "no violation found");
  o.require(r.worst.has_value(), "no worst instance");
  if (!r.worst) return;
  const auto& w = *r.worst;
  o.require(w.a0.count() == 1 && w.a1.count() == 1 && w.a0.indices() != w.a1.indices(),
            "worst instance is not a pair of distinct singletons");
  o.require(w.lhs == 0.0, "lhs " + fmt(w.lhs));
  o.require(!w.rhs.is_infinite() && std::abs(w.rhs.value() - kTwoPointRhs) <= 1e-9, "rhs " + fmt(w.rhs.value()));
  o.require(!w.satisfied, "reported satisfied");
  o.note("violations " + std::to_string(r.violation_count) + " of " + std::to_string(r.checked_count) +
         "; worst lhs " + fmt(w.lhs) + " rhs " + fmt(w.rhs.value()) + " (reference " + fmt(kTwoPointRhs) + ")");
}

// Points on a line at the given positions.
MetricMeasureSpace line_space(const std::vector<double>& pos) {
  std::size_t n = pos.size();
  std::vector<double> dist(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) dist[i * n + j] = std::abs(pos[i] - pos[j]);
  return make_space(dist, std::vector<double>(n, 1.0 / n));
}

void criterion_4(Outcome& o) {
  auto small = line_space({0.0, 0.5, 1.2, 2.0, 2.9, 3.5});
  VerifyConfig cfg;
  auto ex = bm_verify_exhaustive(small, cfg);
  o.require(ex.lemma_shortcircuit.has_value(), "exhaustive: no lemma witness");
  if (ex.lemma_shortcircuit) {
    const auto& w = *ex.lemma_shortcircuit;
    o.require(w.i == 0 && w.j == 5 && w.distance == 3.5, "exhaustive: wrong witness");
  }
  o.require(ex.refuted(), "exhaustive: not refuted");
  o.require(ex.checked_count <= 1, "exhaustive: enumerated " + std::to_string(ex.checked_count) + " instances");

  std::vector<double> pos(200);
  for (std::size_t k = 0; k < pos.size(); ++k) pos[k] = 3.5 * k / 199.0;
  auto big = line_space(pos);
  auto sm = bm_verify_sampled(big, cfg, 100000, SubsetSampler::parse("balls"), 1);
  o.require(sm.lemma_shortcircuit && sm.lemma_shortcircuit->distance == 3.5, "sampled: no 3.5 witness");
  o.require(sm.checked_count <= 1, "sampled: enumerated " + std::to_string(sm.checked_count) + " instances");
  o.note("witness (0, 5) at distance 3.5; instances checked " + std::to_string(ex.checked_count));
}

void criterion_5(Outcome& o) {
  std::size_t comparisons = 0;
  double max_gap = 0.0;
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    Rng rng(mix_seed(seed, 5));
    std::size_t n = 2 + rng.below(11);  // 2..12
    auto s = random_metric_space(seed, n);
    double diam = diameter(s);
    for (int k = 0; k < 10; ++k) {
      double r = rng.uniform(0.0, 1.1 * diam);
      if (r <= 0.0) r = 0.01;
      double exact = alpha_exact(s, r);
      double greedy = alpha_lower_greedy(s, r);
      o.require(greedy <= exact, "seed " + std::to_string(seed) + " r=" + fmt(r) + ": greedy " + fmt(greedy) +
                                     " > exact " + fmt(exact));
      o.require(exact == alpha_brute(s, r), "seed " + std::to_string(seed) + ": pruned and full enumeration differ");
      max_gap = std::max(max_gap, exact - greedy);
      ++comparisons;
    }
  }
  for (double r : {1e-6, 0.25, 0.5, 0.999, 1.0}) {
    o.require(alpha_exact(two_point(1.0), r) == 0.5, "two-point r=" + fmt(r));
    o.require(alpha_exact(path3(), r) == 0.5, "path r=" + fmt(r));
  }
  for (double r : {1.0000001, 1.5, 2.5}) {
    o.require(alpha_exact(two_point(1.0), r) == 0.0, "two-point r=" + fmt(r));
    o.require(alpha_exact(path3(), r) == 0.0, "path r=" + fmt(r));
  }
  o.note(std::to_string(comparisons) + " comparisons; largest exact minus greedy " + fmt(max_gap));
}

void criterion_6(Outcome& o) {
  auto d = discretize_sphere(2, 300, 1000000, 7, DiscretizeOptions{});
  double eps = d.covering_radius;
  double diam = diameter(d.space);
  o.note("covering radius " + fmt(eps) + " (Monte Carlo sample maximum " + fmt(d.mc_covering_radius) + ")");
  o.note("diameter " + fmt(diam) + ", must lie in [" + fmt(kPi - 2 * eps) + ", " + fmt(kPi) + "]");
  o.require(diam >= kPi - 2 * eps && diam <= kPi, "(a) diameter outside [pi - 2 eps, pi]");

  VerifyConfig cfg;
  cfg.eps = 4 * eps;
  cfg.n = 2.0;
  cfg.t_values = {0.5};
  cfg.tol_report = 3.0 * d.stderr_budget();
  cfg.workers = 0;
  auto bm = bm_verify_sampled(d.space, cfg, 10000, SubsetSampler::parse("balls"), 7);
  o.note("(b) " + std::to_string(bm.checked_count) + " ball pairs, tolerance " + fmt(cfg.tol_report) + ", violations " +
         std::to_string(bm.violation_count) + ", worst gap " + fmt(bm.worst ? bm.worst->gap : 0.0));
  o.require(!bm.lemma_shortcircuit, "(b) diameter exceeds pi");
  o.require(bm.violation_count == 0, "(b) violations beyond tolerance");

  std::vector<double> rs;
  for (int k = 1; k <= 15; ++k) rs.push_back(0.2 * k);
  auto prof = concentration_profile(d.space, rs, 2.0, AlphaStrategy::Greedy, 0);
  double tightest = 1e300;
  for (const auto& e : prof.entries) {
    o.require(e.alpha <= gaussian_bound(2.0, e.r), "(c) alpha " + fmt(e.alpha) + " above bound at r=" + fmt(e.r));
    tightest = std::min(tightest, gaussian_bound(2.0, e.r) - e.alpha);
  }
  o.note("(c) smallest margin below 2exp(-r^2/pi^2) on the grid " + fmt(tightest));
}

void criterion_7(Outcome& o) {
  double imp = improved_bound(50.0, 0.5), gau = gaussian_bound(50.0, 0.5);
  o.note("(a) improved " + fmt(imp) + " vs gaussian " + fmt(gau) + " at n=50, r=0.5");
  o.require(imp < gau, "(a) improved bound not below the gaussian bound");
  o.require(std::abs(imp - kImproved50) <= 1e-12 * kImproved50 && std::abs(gau - kGaussian50) <= 1e-12 * kGaussian50,
            "(a) disagreement with the high-precision values");

  const double r = 0.2;
  const double ns[3] = {20.0, 50.0, 100.0};
  for (int k = 0; k < 3; ++k) {
    double ratio = -std::log(improved_bound(ns[k], r)) / (ns[k] * r * r / 4.0);
    o.note("(b) n=" + fmt(ns[k]) + " ratio " + fmt(ratio) + " (high precision " + fmt(kRatioAt02[k]) + ")");
    o.require(std::abs(ratio - kRatioAt02[k]) <= 1e-9, "(b) ratio disagrees with the high-precision value");
    o.require(ratio > 0.8 && ratio < 1.2, "(b) ratio outside (0.8, 1.2) at n=" + fmt(ns[k]));
  }
}

// Runs the CLI and returns its exit status; stdout goes to `out_path`.
int run_cli(const std::string& args, const std::filesystem::path& out_path) {
  std::string cmd = std::string(BMCONC_CLI_PATH) + " " + args + " >" + out_path.string() + " 2>/dev/null";
  int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// Report text with the wall clock field dropped; everything else must match.
std::string stable_report(const std::string& path) {
  auto j = Json::parse(read_file(path));
  j.erase("wall_time_s");
  return j.dump(2);
}

void criterion_8(Outcome& o) {
  auto dir = std::filesystem::temp_directory_path() / "bmconc_acceptance";
  std::filesystem::create_directories(dir);
  auto small = (dir / "small.mms").string();
  write_file_atomic(small, emit_space(random_metric_space(8, 12, 0.2, 1.0)));
  auto exact_space = (dir / "exact.mms").string();
  write_file_atomic(exact_space, emit_space(random_metric_space(9, 16)));

  struct Case {
    std::string name;
    std::string args;  // {W} is replaced by the worker count, {D} by the per-run directory
    std::vector<std::string> files;  // extra outputs compared byte for byte
  };
  std::string sphere = "{D}/sphere.mms";
  std::vector<Case> cases{
      {"discretize-sphere",
       "discretize-sphere --m 2 --centers 80 --samples 200000 --cloud 20000 --seed 11 --workers {W} --out " + sphere +
           " --report {D}/disc.json",
       {"sphere.mms", "disc.json"}},
      {"bm-verify sampled", "bm-verify --space " + sphere + " --strategy sampled --pairs 3000 --sampler balls --seed 5 "
                            "--n 2 --workers {W}", {}},
      {"bm-verify random", "bm-verify --space " + sphere + " --strategy sampled --pairs 1000 --sampler random:10 "
                           "--seed 6 --n 2 --t-grid 3 --workers {W}", {}},
      {"bm-verify exhaustive", "bm-verify --space " + small + " --strategy exhaustive --n 3 --eps 0.05 --workers {W}", {}},
      {"concentration greedy", "concentration --space " + sphere + " --strategy greedy --r-grid 0.2:3:15 --workers {W}", {}},
      {"concentration exact", "concentration --space " + exact_space + " --strategy exact --r-grid 0.1:2:12 --workers {W}", {}},
      {"theorem-report", "theorem-report --space " + sphere + " --n 2 --pairs 2000 --seed 3 --workers {W}", {}},
  };

  auto expand = [](std::string s, const std::string& w, const std::string& d) {
    for (auto [key, val] : {std::pair<std::string, std::string>{"{W}", w}, {"{D}", d}}) {
      for (auto p = s.find(key); p != std::string::npos; p = s.find(key)) s.replace(p, key.size(), val);
    }
    return s;
  };

  // Run 0 and 1 use one worker, run 2 uses four; all must agree.
  const std::vector<std::string> workers{"1", "1", "4"};
  std::vector<std::vector<std::string>> outputs(cases.size());
  for (std::size_t run = 0; run < workers.size(); ++run) {
    auto rd = dir / ("run" + std::to_string(run));
    std::filesystem::create_directories(rd);
    for (std::size_t c = 0; c < cases.size(); ++c) {
      auto stdout_path = rd / ("case" + std::to_string(c) + ".out");
      int code = run_cli(expand(cases[c].args, workers[run], rd.string()), stdout_path);
      o.require(code == 0 || code == 1, cases[c].name + ": exit status " + std::to_string(code));
      std::string blob;
      if (std::filesystem::file_size(stdout_path) > 0) blob += stable_report(stdout_path.string());
      for (const auto& f : cases[c].files) {
        auto p = (rd / f).string();
        blob += "\n--" + f + "--\n" + (f.ends_with(".json") ? stable_report(p) : read_file(p));
      }
      // the space path echoed in "parameters" names the run directory
      for (auto p = blob.find(rd.string()); p != std::string::npos; p = blob.find(rd.string()))
        blob.replace(p, rd.string().size(), "{D}");
      outputs[c].push_back(blob);
    }
  }
  for (std::size_t c = 0; c < cases.size(); ++c) {
    o.require(!outputs[c][0].empty(), cases[c].name + ": empty output");
    o.require(outputs[c][0] == outputs[c][1], cases[c].name + ": two runs differ");
    o.require(outputs[c][0] == outputs[c][2], cases[c].name + ": workers 1 and 4 differ");
  }
  o.note(std::to_string(cases.size()) + " seeded commands compared across 3 runs (wall_time_s excluded)");
  std::filesystem::remove_all(dir);
}

struct Criterion {
  int id;
  const char* title;
  double budget_s;
  std::function<void(Outcome&)> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all{
      {1, "coefficient identity at t = 1/2", 1.0, criterion_1},
      {2, "gaussian majorization chain", 1.0, criterion_2},
      {3, "violation sensitivity on the two-point space", 1.0, criterion_3},
      {4, "diameter short-circuit", 1.0, criterion_4},
      {5, "concentration oracle equivalence", 120.0, criterion_5},
      {6, "discretized sphere end to end", 120.0, criterion_6},
      {7, "improved bound", 1.0, criterion_7},
      {8, "determinism across runs and worker counts", 600.0, criterion_8},
  };
  std::vector<int> selected;
  for (int a = 1; a < argc; ++a) selected.push_back(std::atoi(argv[a]));

  bool all_pass = true;
  for (const auto& c : all) {
    if (!selected.empty() && std::find(selected.begin(), selected.end(), c.id) == selected.end()) continue;
    Outcome o;
    auto start = std::chrono::steady_clock::now();
    try {
      c.run(o);
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    o.require(secs < c.budget_s, "runtime " + fmt(secs) + " s over the " + fmt(c.budget_s) + " s budget");
    std::cout << "criterion " << c.id << " " << (o.pass ? "PASS" : "FAIL") << "  " << c.title << "  (" << fmt(secs)
              << " s)\n"
              << o.detail.str() << std::flush;
    all_pass = all_pass && o.pass;
  }
  return all_pass ? 0 : 1;
}
