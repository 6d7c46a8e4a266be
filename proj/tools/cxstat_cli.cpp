// cxstat: command-line front end. Every run echoes its fully resolved
// configuration to stderr, once as key=value pairs and once as a flag list
// that reproduces the run.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "cxstat/affinity.hpp"
#include "cxstat/divergence.hpp"
#include "cxstat/error.hpp"
#include "cxstat/experiments.hpp"
#include "cxstat/format.hpp"
#include "cxstat/gradcheck.hpp"
#include "cxstat/io.hpp"
#include "cxstat/optimize.hpp"
#include "cxstat/optimizer.hpp"

namespace fs = std::filesystem;
using namespace cxstat;

namespace {

enum ExitCode { kOk = 0, kFailure = 1, kFormat = 2, kShape = 3, kUnsupported = 4 };

// Collects the resolved settings of one run for the stderr echo.
class Echo {
 public:
  explicit Echo(std::string command) : command_(std::move(command)) {}

  void positional(const std::string& value) { positionals_.push_back(value); }

  void add(const std::string& key, const std::string& value) {
    pairs_.emplace_back(key, value);
    flags_.push_back("--" + key + " " + value);
  }
  void add(const std::string& key, double value) { add(key, format_decimal(value)); }
  // Reported in the config line only; there is no flag for it.
  void note(const std::string& key, const std::string& value) { pairs_.emplace_back(key, value); }
  void add_count(const std::string& key, std::uint64_t value) { add(key, std::to_string(value)); }
  void add_switch(const std::string& key, bool on) {
    pairs_.emplace_back(key, on ? "true" : "false");
    if (on) flags_.push_back("--" + key);
  }

  void print() const {
    std::ostringstream config, rerun;
    config << "config: command=" << command_;
    for (const auto& [k, v] : pairs_) config << ' ' << k << '=' << v;
    rerun << "flags: cxstat " << command_;
    for (const auto& p : positionals_) rerun << ' ' << p;
    for (const auto& f : flags_) rerun << ' ' << f;
    std::cerr << config.str() << '\n' << rerun.str() << '\n';
  }

 private:
  std::string command_;
  std::vector<std::string> positionals_;
  std::vector<std::pair<std::string, std::string>> pairs_;
  std::vector<std::string> flags_;
};

using Input = std::variant<FeatureSet, ImageGrid>;

io::FileKind parse_format(const std::string& name) {
  if (name == "fts1") return io::FileKind::fts_binary;
  if (name == "fts-csv") return io::FileKind::fts_text;
  if (name == "pgm") return io::FileKind::pgm;
  if (name == "ppm") return io::FileKind::ppm;
  throw FormatError("unknown --format '" + name + "'", 0);
}

Input load_input(const std::string& path, const std::string& format) {
  const std::string bytes = io::read_file(path);
  const io::FileKind kind = format == "auto" ? io::sniff(bytes) : parse_format(format);
  switch (kind) {
    case io::FileKind::fts_binary: return io::decode_fts1(bytes);
    case io::FileKind::fts_text: return io::decode_fts_csv(bytes);
    default: return io::decode_pnm(bytes);
  }
}

FeatureSet load_points(const std::string& path, const std::string& format) {
  auto in = load_input(path, format);
  if (auto* f = std::get_if<FeatureSet>(&in)) return std::move(*f);
  throw FormatError(path + " is an image; expected a feature set", 0);
}

ImageGrid load_picture(const std::string& path, const std::string& format) {
  auto in = load_input(path, format);
  if (auto* img = std::get_if<ImageGrid>(&in)) return std::move(*img);
  throw FormatError(path + " is a feature set; expected an image", 0);
}

void save_points(const std::string& path, const FeatureSet& set) {
  const bool text = fs::path(path).extension() == ".csv";
  io::save_feature_set(path, set, text ? io::FileKind::fts_text : io::FileKind::fts_binary);
}

// Flags shared by the pairwise loss commands.
struct PairOptions {
  std::string x_path, y_path;
  std::string format = "auto";
  std::string distance;  // empty: l2 for point sets, cosine for images
  double h = kDefaultBandwidth;
  double epsilon = kDefaultEpsilon;
  bool center = false;
  std::size_t patch = 5;
  std::size_t stride = 2;
  bool equalize = false;
  std::uint64_t seed = 0;
};

void add_pair_options(CLI::App* cmd, PairOptions& o, bool with_kernel) {
  cmd->add_option("x", o.x_path, "generated set X (FTS1, fts-csv, PGM or PPM)")->required();
  cmd->add_option("y", o.y_path, "target set Y")->required();
  cmd->add_option("--format", o.format, "auto | fts1 | fts-csv | pgm | ppm");
  cmd->add_option("--distance", o.distance, "cosine | l2 | squared_l2");
  if (with_kernel) {
    cmd->add_option("--h", o.h, "affinity bandwidth");
    cmd->add_option("--epsilon", o.epsilon, "normalization guard");
  }
  cmd->add_flag("--center", o.center, "subtract the target mean before cosine distance");
  cmd->add_option("--patch", o.patch, "patch size for image inputs");
  cmd->add_option("--stride", o.stride, "patch stride for image inputs");
  cmd->add_flag("--equalize", o.equalize, "subsample the larger set to the smaller size");
  cmd->add_option("--seed", o.seed, "seed for --equalize");
}

struct ResolvedPair {
  FeatureSet x, y;
  DistanceKind kind;
};

ResolvedPair resolve_pair(const PairOptions& o, Echo& echo, bool with_kernel) {
  Input xi = load_input(o.x_path, o.format);
  Input yi = load_input(o.y_path, o.format);
  const bool images = std::holds_alternative<ImageGrid>(xi);
  if (images != std::holds_alternative<ImageGrid>(yi)) {
    throw FormatError("cannot compare an image with a feature set", 0);
  }
  const DistanceKind kind = o.distance.empty()
                                ? (images ? DistanceKind::cosine : DistanceKind::l2)
                                : parse_distance_kind(o.distance);
  echo.positional(o.x_path);
  echo.positional(o.y_path);
  echo.add("format", o.format);
  echo.add("distance", std::string(to_string(kind)));
  if (with_kernel) {
    echo.add("h", o.h);
    echo.add("epsilon", o.epsilon);
  }
  echo.add_switch("center", o.center);
  echo.add_count("patch", o.patch);
  echo.add_count("stride", o.stride);
  echo.add_switch("equalize", o.equalize);
  echo.add_count("seed", o.seed);
  echo.print();

  const PatchSpec spec{o.patch, o.stride};
  FeatureSet x = images ? extract_patches(std::get<ImageGrid>(xi), spec) : std::get<FeatureSet>(xi);
  FeatureSet y = images ? extract_patches(std::get<ImageGrid>(yi), spec) : std::get<FeatureSet>(yi);
  if (x.dim() != y.dim()) {
    throw ShapeError("dimension mismatch: " + std::to_string(x.dim()) + " vs " +
                     std::to_string(y.dim()));
  }
  if (o.equalize) std::tie(x, y) = equalize(x, y, o.seed);
  return {std::move(x), std::move(y), kind};
}

void add_optimizer_options(CLI::App* cmd, OptimizerConfig& c, std::string& algorithm) {
  cmd->add_option("--algorithm", algorithm, "adam | gd");
  cmd->add_option("--step", c.step, "step size");
  cmd->add_option("--iterations", c.iterations, "number of steps");
  cmd->add_option("--trace-every", c.trace_every, "trace interval");
}

void echo_optimizer(Echo& echo, const OptimizerConfig& c) {
  echo.add("algorithm", std::string(to_string(c.algorithm)));
  echo.add("step", c.step);
  echo.note("beta1", format_decimal(c.beta1));
  echo.note("beta2", format_decimal(c.beta2));
  echo.note("adam-eps", format_decimal(c.eps));
  echo.add_count("iterations", c.iterations);
  echo.add_count("trace-every", c.trace_every);
}

void add_trace_options(CLI::App* cmd, TraceOptions& t) {
  cmd->add_option("--projections", t.projections, "random projections for trace KL");
  cmd->add_option("--seed", t.seed, "projection seed");
  cmd->add_option("--grid", t.grid_size, "KDE grid size");
}

void echo_trace(Echo& echo, const TraceOptions& t) {
  echo.add_count("projections", t.projections);
  echo.add_count("seed", t.seed);
  echo.add_count("grid", t.grid_size);
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
  } else {
    io::write_file(path, text);
  }
}

std::string matches_csv(const MatchResult& m) {
  std::string out = "target,source\n";
  for (std::size_t j = 0; j < m.source_for_target.size(); ++j) {
    out += std::to_string(j) + ',' + std::to_string(m.source_for_target[j]) + '\n';
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Contextual loss, reference divergences and direct optimization"};
  app.require_subcommand(1);
  app.set_help_flag("--help", "print usage");

  PairOptions cx_opts, cd_opts, delta_opts;
  auto* cx_cmd = app.add_subcommand("cx", "contextual loss between two sets");
  add_pair_options(cx_cmd, cx_opts, true);
  auto* cd_cmd = app.add_subcommand("chamfer", "Chamfer distance from X to Y");
  add_pair_options(cd_cmd, cd_opts, false);
  auto* delta_cmd = app.add_subcommand("delta", "h -> 0 limit of the contextual loss");
  add_pair_options(delta_cmd, delta_opts, false);

  struct {
    std::string x_path, y_path, out, format = "auto";
    std::size_t patch = 5, stride = 2;
    ReportOptions report;
  } div;
  auto* div_cmd = app.add_subcommand("divergence", "divergence report between two images");
  div_cmd->add_option("x", div.x_path, "generated image")->required();
  div_cmd->add_option("y", div.y_path, "target image")->required();
  div_cmd->add_option("--out", div.out, "report CSV path (default stdout)");
  div_cmd->add_option("--format", div.format, "auto | pgm | ppm");
  div_cmd->add_option("--patch", div.patch, "patch size");
  div_cmd->add_option("--stride", div.stride, "patch stride");
  div_cmd->add_option("--projections", div.report.projections, "random 2D projections");
  div_cmd->add_option("--seed", div.report.seed, "projection seed");
  div_cmd->add_option("--grid", div.report.grid_size, "KDE grid size");
  div_cmd->add_option("--h", div.report.contextual.h, "affinity bandwidth");
  div_cmd->add_option("--epsilon", div.report.contextual.epsilon, "normalization guard");

  struct {
    std::string prefix;
    std::size_t n = 32;
    std::uint64_t seed = 0;
    double h = kDefaultBandwidth, epsilon = kDefaultEpsilon;
  } demo;
  auto* demo_cmd = app.add_subcommand("match-demo", "clustered-vs-spread matching comparison");
  demo_cmd->add_option("prefix", demo.prefix, "output path prefix")->required();
  demo_cmd->add_option("--n", demo.n, "points per set")->check(CLI::PositiveNumber);
  demo_cmd->add_option("--seed", demo.seed, "configuration seed");
  demo_cmd->add_option("--h", demo.h, "affinity bandwidth");
  demo_cmd->add_option("--epsilon", demo.epsilon, "normalization guard");

  struct {
    std::string x_path, y_path, out, trace, format = "auto", loss = "cx", distance = "l2",
        algorithm = "adam";
    double h = kDefaultBandwidth, epsilon = kDefaultEpsilon;
    OptimizerConfig opt;
    TraceOptions trace_opts;
  } pts;
  auto* pts_cmd = app.add_subcommand("optimize-points", "move X to match Y");
  pts_cmd->add_option("x0", pts.x_path, "initial points")->required();
  pts_cmd->add_option("y", pts.y_path, "target points")->required();
  pts_cmd->add_option("--out", pts.out, "final points (.csv for fts-csv, else FTS1)");
  pts_cmd->add_option("--trace", pts.trace, "trace CSV path (default stdout)");
  pts_cmd->add_option("--format", pts.format, "auto | fts1 | fts-csv");
  pts_cmd->add_option("--loss", pts.loss, "cx | cd");
  pts_cmd->add_option("--distance", pts.distance, "cosine | l2 | squared_l2");
  pts_cmd->add_option("--h", pts.h, "affinity bandwidth");
  pts_cmd->add_option("--epsilon", pts.epsilon, "normalization guard");
  add_optimizer_options(pts_cmd, pts.opt, pts.algorithm);
  add_trace_options(pts_cmd, pts.trace_opts);

  struct {
    std::string x_path, y_path, out, trace, format = "auto", preset = "sr", distance = "cosine",
        algorithm = "adam";
    std::optional<double> lambda_cx, lambda_l2, lambda_l1;
    double lambda_gan = 0.0;
    double h = kDefaultBandwidth, epsilon = kDefaultEpsilon;
    std::size_t patch = 5, stride = 2, blur_size = 21;
    double blur_sigma = 3.0;
    OptimizerConfig opt;
    TraceOptions trace_opts;
  } img;
  auto* img_cmd = app.add_subcommand("optimize-image", "optimize an image under a composite objective");
  img_cmd->add_option("x0", img.x_path, "initial image")->required();
  img_cmd->add_option("y", img.y_path, "target image")->required();
  img_cmd->add_option("--out", img.out, "final image (PGM/PPM)");
  img_cmd->add_option("--trace", img.trace, "trace CSV path (default stdout)");
  img_cmd->add_option("--format", img.format, "auto | pgm | ppm");
  img_cmd->add_option("--preset", img.preset, "sr | normals");
  img_cmd->add_option("--lambda-cx", img.lambda_cx, "contextual weight");
  img_cmd->add_option("--lambda-l2", img.lambda_l2, "low-frequency L2 weight");
  img_cmd->add_option("--lambda-l1", img.lambda_l1, "L1 weight");
  img_cmd->add_option("--lambda-gan", img.lambda_gan, "adversarial weight (must be 0)");
  img_cmd->add_option("--distance", img.distance, "cosine | l2 | squared_l2");
  img_cmd->add_option("--h", img.h, "affinity bandwidth");
  img_cmd->add_option("--epsilon", img.epsilon, "normalization guard");
  img_cmd->add_option("--patch", img.patch, "patch size");
  img_cmd->add_option("--stride", img.stride, "patch stride");
  img_cmd->add_option("--blur-size", img.blur_size, "low-pass kernel width");
  img_cmd->add_option("--blur-sigma", img.blur_sigma, "low-pass kernel sigma");
  add_optimizer_options(img_cmd, img.opt, img.algorithm);
  add_trace_options(img_cmd, img.trace_opts);
  img.opt.iterations = 1000;

  struct {
    std::string loss = "cx";
    std::uint64_t seed = 0;
    GradcheckOptions options;
  } gc;
  auto* gc_cmd = app.add_subcommand("gradcheck", "finite-difference check of a loss gradient");
  gc_cmd->add_option("--loss", gc.loss, "cx | cx-image | chamfer | lf-l2 | l1");
  gc_cmd->add_option("--seed", gc.seed, "instance seed");
  gc_cmd->add_option("--step", gc.options.step, "central-difference step");
  gc_cmd->add_option("--tolerance", gc.options.tolerance, "max relative error");

  std::string trace_path;
  auto* corr_cmd = app.add_subcommand("trace-corr", "Pearson correlation of trace measures with cx");
  corr_cmd->add_option("trace", trace_path, "trace CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kFailure;
  }

  try {
    if (cx_cmd->parsed() || cd_cmd->parsed() || delta_cmd->parsed()) {
      const bool is_cx = cx_cmd->parsed();
      const PairOptions& o = is_cx ? cx_opts : (cd_cmd->parsed() ? cd_opts : delta_opts);
      Echo echo(is_cx ? "cx" : (cd_cmd->parsed() ? "chamfer" : "delta"));
      const auto p = resolve_pair(o, echo, is_cx);
      double value = 0.0;
      if (is_cx) {
        value = contextual_loss(p.x, p.y, {p.kind, o.h, o.epsilon, o.center});
      } else if (cd_cmd->parsed()) {
        value = chamfer_distance(p.x, p.y, p.kind, o.center);
      } else {
        value = delta_limit_coverage(p.x, p.y, p.kind, o.center);
      }
      std::cout << format_number(value) << '\n';
    } else if (div_cmd->parsed()) {
      Echo echo("divergence");
      echo.positional(div.x_path);
      echo.positional(div.y_path);
      if (!div.out.empty()) echo.add("out", div.out);
      echo.add("format", div.format);
      echo.add_count("patch", div.patch);
      echo.add_count("stride", div.stride);
      echo.add_count("projections", div.report.projections);
      echo.add_count("seed", div.report.seed);
      echo.add_count("grid", div.report.grid_size);
      echo.add("h", div.report.contextual.h);
      echo.add("epsilon", div.report.contextual.epsilon);
      echo.print();
      const auto x = load_picture(div.x_path, div.format);
      const auto y = load_picture(div.y_path, div.format);
      emit(div.out, report_csv(divergence_report(x, y, {div.patch, div.stride}, div.report)));
    } else if (demo_cmd->parsed()) {
      Echo echo("match-demo");
      echo.positional(demo.prefix);
      echo.add_count("n", demo.n);
      echo.add_count("seed", demo.seed);
      echo.note("distance", "l2");
      echo.add("h", demo.h);
      echo.add("epsilon", demo.epsilon);
      echo.print();
      const auto r = run_match_demo(demo.n, demo.seed, {DistanceKind::l2, demo.h, demo.epsilon});
      io::save_feature_set(demo.prefix + "_x.csv", r.x, io::FileKind::fts_text);
      io::save_feature_set(demo.prefix + "_y.csv", r.y, io::FileKind::fts_text);
      io::write_file(demo.prefix + "_matches_cx.csv", matches_csv(r.cx));
      io::write_file(demo.prefix + "_matches_cd.csv", matches_csv(r.nearest));
      std::cout << "distinct_cx=" << r.cx.distinct_sources
                << " distinct_cd=" << r.nearest.distinct_sources << '\n';
    } else if (pts_cmd->parsed()) {
      pts.opt.algorithm = parse_algorithm(pts.algorithm);
      const PointLoss loss = parse_point_loss(pts.loss);
      const ContextualParams params{parse_distance_kind(pts.distance), pts.h, pts.epsilon};
      Echo echo("optimize-points");
      echo.positional(pts.x_path);
      echo.positional(pts.y_path);
      if (!pts.out.empty()) echo.add("out", pts.out);
      if (!pts.trace.empty()) echo.add("trace", pts.trace);
      echo.add("format", pts.format);
      echo.add("loss", pts.loss);
      echo.add("distance", std::string(to_string(params.kind)));
      echo.add("h", params.h);
      echo.add("epsilon", params.epsilon);
      echo_optimizer(echo, pts.opt);
      echo_trace(echo, pts.trace_opts);
      echo.print();
      pts.opt.validate();
      const auto x0 = load_points(pts.x_path, pts.format);
      const auto y = load_points(pts.y_path, pts.format);
      const auto run = optimize_points(x0, y, loss, params, pts.opt, pts.trace_opts);
      if (!pts.out.empty()) save_points(pts.out, run.points);
      emit(pts.trace, trace_csv(run.trace));
      if (run.status == RunStatus::diverged) {
        std::cerr << "warning: objective diverged after " << run.iterations_run
                  << " iterations; kept the last finite state\n";
      }
    } else if (img_cmd->parsed()) {
      ObjectiveConfig cfg;
      if (img.preset == "sr") {
        cfg = ObjectiveConfig::super_resolution();
      } else if (img.preset == "normals") {
        cfg = ObjectiveConfig::normals(1.0);
      } else {
        throw UnsupportedError("unknown preset '" + img.preset + "'");
      }
      if (img.lambda_cx) cfg.lambda_cx = *img.lambda_cx;
      if (img.lambda_l2) cfg.lambda_l2_lf = *img.lambda_l2;
      if (img.lambda_l1) cfg.lambda_l1 = *img.lambda_l1;
      cfg.lambda_gan = img.lambda_gan;
      cfg.contextual = {parse_distance_kind(img.distance), img.h, img.epsilon};
      cfg.patch = {img.patch, img.stride};
      cfg.blur_size = img.blur_size;
      cfg.blur_sigma = img.blur_sigma;
      img.opt.algorithm = parse_algorithm(img.algorithm);

      Echo echo("optimize-image");
      echo.positional(img.x_path);
      echo.positional(img.y_path);
      if (!img.out.empty()) echo.add("out", img.out);
      if (!img.trace.empty()) echo.add("trace", img.trace);
      echo.add("format", img.format);
      echo.add("preset", img.preset);
      echo.add("lambda-cx", cfg.lambda_cx);
      echo.add("lambda-l2", cfg.lambda_l2_lf);
      echo.add("lambda-l1", cfg.lambda_l1);
      echo.add("lambda-gan", cfg.lambda_gan);
      echo.add("distance", img.distance);
      echo.add("h", img.h);
      echo.add("epsilon", img.epsilon);
      echo.add_count("patch", img.patch);
      echo.add_count("stride", img.stride);
      echo.add_count("blur-size", img.blur_size);
      echo.add("blur-sigma", img.blur_sigma);
      echo_optimizer(echo, img.opt);
      echo_trace(echo, img.trace_opts);
      echo.print();
      cfg.validate();
      img.opt.validate();
      const auto x0 = load_picture(img.x_path, img.format);
      const auto y = load_picture(img.y_path, img.format);
      const auto run = optimize_image(x0, y, cfg, img.opt, img.trace_opts);
      if (!img.out.empty()) io::save_image(img.out, run.image);
      emit(img.trace, trace_csv(run.trace));
      if (run.status == RunStatus::diverged) {
        std::cerr << "warning: objective diverged after " << run.iterations_run
                  << " iterations; kept the last finite state\n";
      }
    } else if (gc_cmd->parsed()) {
      const LossId id = parse_loss_id(gc.loss);
      Echo echo("gradcheck");
      echo.add("loss", gc.loss);
      echo.add_count("seed", gc.seed);
      echo.add("step", gc.options.step);
      echo.add("tolerance", gc.options.tolerance);
      echo.print();
      const auto report = gradcheck(random_problem(id, gc.seed), gc.options);
      std::cout << format_gradcheck(report);
      return report.passed() ? kOk : kFailure;
    } else if (corr_cmd->parsed()) {
      Echo echo("trace-corr");
      echo.positional(trace_path);
      echo.print();
      const auto trace = parse_trace_csv(io::read_file(trace_path));
      std::cout << "measure,pearson_cx\n";
      for (const auto& c : trace_correlations(trace)) {
        std::cout << c.measure << ',' << (c.value ? format_number(*c.value) : "undefined") << '\n';
      }
    }
  } catch (const FormatError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFormat;
  } catch (const ShapeError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kShape;
  } catch (const UnsupportedError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUnsupported;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kOk;
}
