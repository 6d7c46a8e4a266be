// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "cxstat/affinity.hpp"
#include "cxstat/divergence.hpp"
#include "cxstat/experiments.hpp"
#include "cxstat/format.hpp"
#include "cxstat/gradcheck.hpp"
#include "cxstat/gradients.hpp"
#include "cxstat/io.hpp"
#include "cxstat/optimize.hpp"
#include "support/synthetic.hpp"

using namespace cxstat;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v) { return format_number(v); }

// 1. Analytic gradients agree with central differences on 100 instances per loss.
Outcome gradient_correctness() {
  const auto start = Clock::now();
  bool ok = true;
  std::string detail;
  for (auto id : {LossId::contextual, LossId::contextual_image, LossId::chamfer,
                  LossId::lowfreq_l2, LossId::l1}) {
    const double tol = id == LossId::contextual_image ? 1e-3 : 1e-4;
    double worst = 0.0;
    std::size_t failures = 0, ties = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      const auto report = gradcheck(random_problem(id, seed), {.tolerance = tol});
      worst = std::max(worst, report.max_rel_err);
      failures += report.failures.size();
      ties += report.ties.size();
    }
    ok = ok && failures == 0;
    detail += std::string(to_string(id)) + " max_rel_err=" + fmt(worst) + " (tol " + fmt(tol) +
              ", ties " + std::to_string(ties) + ", failures " + std::to_string(failures) + "); ";
  }
  const double elapsed = seconds_since(start);
  ok = ok && elapsed <= 120.0;
  return {ok, detail + "runtime " + fmt(elapsed) + " s (limit 120 s)"};
}

// 2. Every loss sits at a zero-gradient minimum when x == y.
Outcome identity_minima() {
  const std::size_t dims[] = {2, 3, 5, 25, 75};
  const DistanceKind kinds[] = {DistanceKind::l2, DistanceKind::squared_l2};
  double worst_loss = 0.0, worst_grad = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const std::size_t n = 8 + (seed * 7) % 57;
    const std::size_t d = dims[seed % 5];
    const DistanceKind kind = kinds[seed % 2];
    const auto x = synth::gaussian_cloud(n, d, seed);
    const auto cx = contextual_loss_gradient(x, x, {kind});
    worst_loss = std::max(worst_loss, cx.loss);
    worst_grad = std::max(worst_grad, cx.gradient.norm());
    worst_grad = std::max(worst_grad, grad_chamfer(x, x, kind).norm());

    const std::size_t ch = seed % 2 ? 3 : 1;
    const auto img = synth::stripe_texture(16 + seed % 3 * 4, seed, ch);
    worst_grad = std::max(worst_grad,
                          grad_contextual_image(img, img, {5, 2}, {DistanceKind::cosine}).gradient.norm());
    worst_grad = std::max(worst_grad,
                          grad_lowfreq_l2(img, img, BlurKernel::gaussian(21, 3.0)).gradient.norm());
    worst_grad = std::max(worst_grad, grad_l1(img, img).gradient.norm());
  }
  return {worst_loss <= 1e-3 && worst_grad <= 1e-5,
          "max cx(X,X)=" + fmt(worst_loss) + " (limit 1e-3), max gradient norm=" + fmt(worst_grad) +
              " (limit 1e-5) over 20 instances"};
}

// 3. The small-bandwidth loss approaches the hard-coverage limit.
Outcome delta_limit() {
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const std::size_t d = 2 + seed % 4;
    const auto x = synth::gaussian_cloud(32, d, 1000 + seed);
    const auto y = synth::gaussian_cloud(32, d, 2000 + seed);
    const double gap = std::fabs(contextual_loss(x, y, {DistanceKind::l2, 1e-4}) -
                                 delta_limit_coverage(x, y, DistanceKind::l2));
    worst = std::max(worst, gap);
  }
  return {worst <= 1e-2, "max |cx(h=1e-4) - delta| = " + fmt(worst) + " (limit 1e-2)"};
}

// 4. Minimizing the contextual loss of 2D points also minimizes KDE-KL.
Outcome kl_surrogate() {
  const auto start = Clock::now();
  const auto x0 = synth::cluster_2d(64, 1);
  const auto y = synth::ring_2d(64, 2);
  OptimizerConfig opt;
  opt.step = 0.05;
  opt.iterations = 500;
  opt.trace_every = 10;
  const auto run = optimize_points(x0, y, PointLoss::cx, {DistanceKind::l2}, opt);
  const double elapsed = seconds_since(start);
  const double kl0 = run.trace.rows.front().kl, kl1 = run.trace.rows.back().kl;
  double r = NAN;
  for (const auto& c : trace_correlations(run.trace)) {
    if (c.measure == "kl" && c.value) r = *c.value;
  }
  const bool ok = run.status == RunStatus::completed && kl1 <= 0.1 * kl0 && r >= 0.9 &&
                  elapsed <= 60.0;
  return {ok, "KL " + fmt(kl0) + " -> " + fmt(kl1) + " (ratio " + fmt(kl1 / kl0) +
                  ", limit 0.1), pearson(cx, kl)=" + fmt(r) + " (limit 0.9), runtime " +
                  fmt(elapsed) + " s (limit 60 s)"};
}

// 5. Contextual matching reaches more distinct sources than nearest neighbors.
Outcome match_diversity() {
  int wins = 0;
  std::string counts;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto demo = run_match_demo(32, seed);
    if (demo.cx.distinct_sources >= demo.nearest.distinct_sources) ++wins;
    counts += std::to_string(demo.cx.distinct_sources) + "/" +
              std::to_string(demo.nearest.distinct_sources) + " ";
  }
  return {wins >= 8, std::to_string(wins) + "/10 seeds with distinct_cx >= distinct_cd (need 8); "
                         "cx/cd per seed: " + counts};
}

// 6. The super-resolution objective matches patch statistics and low frequencies.
Outcome image_statistics() {
  const auto start = Clock::now();
  const auto y = synth::stripe_texture(64, 1);
  const auto x0 = synth::degraded(y, 2);
  const auto cfg = ObjectiveConfig::super_resolution();
  OptimizerConfig opt;
  opt.step = 0.01;
  opt.iterations = 1000;
  opt.trace_every = 1000;
  const auto run = optimize_image(x0, y, cfg, opt);
  const ReportOptions report{.projections = 100};
  const double kl0 = divergence_report(x0, y, cfg.patch, report).kl;
  const double kl1 = divergence_report(run.image, y, cfg.patch, report).kl;
  const auto k = BlurKernel::gaussian(21, 3.0);
  const double lf0 = lowfreq_l2(x0, y, k), lf1 = lowfreq_l2(run.image, y, k);
  const double elapsed = seconds_since(start);
  const bool ok = kl1 <= 0.3 * kl0 && lf1 <= 0.1 * lf0 && elapsed <= 300.0;
  return {ok, "patch KL " + fmt(kl0) + " -> " + fmt(kl1) + " (ratio " + fmt(kl1 / kl0) +
                  ", limit 0.3), LF-L2 " + fmt(lf0) + " -> " + fmt(lf1) + " (ratio " +
                  fmt(lf1 / lf0) + ", limit 0.1), runtime " + fmt(elapsed) + " s (limit 300 s)"};
}

// 7. Adding the L1 term lowers per-pixel L1 while leaving CX within 20%.
Outcome normal_ablation() {
  const auto y = synth::normal_map(32, 3);
  const auto x0 = synth::degraded(y, 4);
  OptimizerConfig opt;
  opt.step = 0.01;
  opt.iterations = 500;
  opt.trace_every = 500;
  const auto with = optimize_image(x0, y, ObjectiveConfig::normals(1.0), opt);
  const auto without = optimize_image(x0, y, ObjectiveConfig::normals(0.0), opt);
  const double pixels = static_cast<double>(y.size());
  const double l1_with = l1_distance(with.image, y) / pixels;
  const double l1_without = l1_distance(without.image, y) / pixels;
  const auto params = ObjectiveConfig::normals().contextual;
  const double cx_with = grad_contextual_image(with.image, y, {5, 2}, params).loss;
  const double cx_without = grad_contextual_image(without.image, y, {5, 2}, params).loss;
  const double spread = std::fabs(cx_with - cx_without) / std::max(cx_with, cx_without);
  const bool ok = l1_with < l1_without && spread <= 0.2;
  return {ok, "per-pixel L1 " + fmt(l1_with) + " (lambda_l1=1) vs " + fmt(l1_without) +
                  " (lambda_l1=0); final CX " + fmt(cx_with) + " vs " + fmt(cx_without) +
                  ", relative difference " + fmt(spread) + " (limit 0.2)"};
}

// 8. Every estimator grows with the shift of a translated Gaussian cloud.
Outcome estimator_sanity() {
  const auto base = synth::gaussian_cloud(2000, 2, 0);
  const double shifts[] = {0.0, 0.5, 1.0, 2.0};
  std::vector<double> kl, chi2, emd, cx;
  bool emd_close = true;
  for (double s : shifts) {
    const auto x = synth::shifted(base, s);
    const auto r = kde_divergences(x, base);
    kl.push_back(r.kl);
    chi2.push_back(r.chi2);
    emd.push_back(sliced_emd(x, base, 64, 0));
    cx.push_back(contextual_loss(x, base, {DistanceKind::l2}));
    emd_close = emd_close && std::fabs(emd.back() - s) <= 0.1 * s;
  }
  auto monotone = [](const std::vector<double>& v) { return std::is_sorted(v.begin(), v.end()); };
  auto series = [](const std::vector<double>& v) {
    std::string s;
    for (double e : v) s += (s.empty() ? "" : ",") + format_number(e);
    return s;
  };
  const bool ok = monotone(kl) && monotone(chi2) && monotone(emd) && monotone(cx) && emd_close;
  return {ok, "shifts 0,0.5,1,2: kl=[" + series(kl) + "] chi2=[" + series(chi2) + "] emd=[" +
                  series(emd) + "] cx=[" + series(cx) + "]; emd within 10% of shift: " +
                  (emd_close ? "yes" : "no")};
}

int run_cli(const std::string& args, const fs::path& out) {
  const std::string cmd = std::string(CXSTAT_CLI_PATH) + " " + args + " >" + out.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// 9. Exact file round trips and seed-deterministic CLI runs.
Outcome serialization() {
  bool fts_ok = true;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto s = synth::gaussian_cloud(50, 7, seed, 5.0);
    std::vector<double> v(s.values().begin(), s.values().end());
    for (double& e : v) e = static_cast<float>(e);
    const FeatureSet set(std::move(v), 7);
    const auto back = io::decode_fts1(io::encode_fts1(set));
    fts_ok = fts_ok && back.size() == set.size() &&
             std::memcmp(back.values().data(), set.values().data(),
                         set.values().size() * sizeof(double)) == 0;
  }

  bool pnm_ok = true;
  for (std::size_t ch : {1u, 3u}) {
    const auto src = synth::uniform_image(9, 13, ch, ch);
    const auto quantized = io::decode_pnm(io::encode_pnm(src));
    pnm_ok = pnm_ok && io::decode_pnm(io::encode_pnm(quantized)) == quantized;
    for (std::size_t k = 0; k < src.size(); ++k) {
      pnm_ok = pnm_ok && std::fabs(src.values()[k] - quantized.values()[k]) <= 0.5 / 255.0 + 1e-12;
    }
  }

  const fs::path dir = fs::temp_directory_path() / "cxstat_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const auto p = [&](const std::string& name) { return (dir / name).string(); };
  io::save_feature_set(p("x.fts"), synth::cluster_2d(24, 1));
  io::save_feature_set(p("y.fts"), synth::ring_2d(24, 2));
  const auto texture = synth::stripe_texture(24, 1);
  io::save_image(p("y.pgm"), texture);
  io::save_image(p("x.pgm"), synth::degraded(texture, 2));

  const std::vector<std::pair<std::string, std::vector<std::string>>> runs = {
      {"match-demo " + p("demo") + " --seed 3", {"demo_x.csv", "demo_y.csv", "demo_matches_cx.csv", "demo_matches_cd.csv"}},
      {"optimize-points " + p("x.fts") + " " + p("y.fts") + " --iterations 40 --step 0.05 --seed 5 --out " +
           p("pts.fts") + " --trace " + p("pts.csv"),
       {"pts.fts", "pts.csv"}},
      {"optimize-image " + p("x.pgm") + " " + p("y.pgm") + " --iterations 10 --trace-every 5 --seed 2 --out " +
           p("img.pgm") + " --trace " + p("img.csv"),
       {"img.pgm", "img.csv"}},
      {"divergence " + p("x.pgm") + " " + p("y.pgm") + " --seed 4 --out " + p("div.csv"), {"div.csv"}},
      {"cx " + p("x.fts") + " " + p("y.fts"), {}},
      {"gradcheck --loss cx-image --seed 7", {}},
  };
  bool cli_ok = true;
  std::string cli_detail;
  for (const auto& [args, files] : runs) {
    std::vector<std::string> first, second;
    for (int rep = 0; rep < 2; ++rep) {
      auto& sink = rep == 0 ? first : second;
      const int code = run_cli(args, dir / "log.txt");
      sink.push_back(std::to_string(code));
      sink.push_back(io::read_file(dir / "log.txt"));
      for (const auto& f : files) sink.push_back(io::read_file(dir / f));
      cli_ok = cli_ok && code == 0;
    }
    if (first != second) {
      cli_ok = false;
      cli_detail += " differs: " + args.substr(0, args.find(' '));
    }
  }
  fs::remove_all(dir);
  return {fts_ok && pnm_ok && cli_ok,
          std::string("FTS1 bit-exact: ") + (fts_ok ? "yes" : "no") + ", PGM/PPM exact after 8-bit quantization: " +
              (pnm_ok ? "yes" : "no") + ", " + std::to_string(runs.size()) +
              " CLI commands identical across repeated runs: " + (cli_ok ? "yes" : "no") + cli_detail};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"gradient correctness", gradient_correctness},
      {"identity minima", identity_minima},
      {"delta-kernel limit", delta_limit},
      {"KL-minimization surrogate", kl_surrogate},
      {"match diversity", match_diversity},
      {"image statistics matching", image_statistics},
      {"normal-objective ablation", normal_ablation},
      {"divergence estimator sanity", estimator_sanity},
      {"serialization and determinism", serialization},
  };
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s criterion %zu (%s): %s\n", o.pass ? "PASS" : "FAIL", k + 1, criteria[k].first,
                o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed == 0 ? 0 : 1;
}
