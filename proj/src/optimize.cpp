#include "cxstat/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cxstat/divergence.hpp"
#include "cxstat/error.hpp"
#include "cxstat/format.hpp"
#include "cxstat/gradients.hpp"

namespace cxstat {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool all_finite(double value, const std::vector<double>& grad) {
  if (!std::isfinite(value)) return false;
  return std::all_of(grad.begin(), grad.end(), [](double g) { return std::isfinite(g); });
}

bool should_record(std::size_t it, const OptimizerConfig& opt) {
  return it % opt.trace_every == 0 || it == opt.iterations;
}

TraceRow point_row(std::size_t it, double objective, const FeatureSet& x, const FeatureSet& y,
                   const ContextualParams& contextual, const TraceOptions& options) {
  TraceRow row;
  row.iteration = it;
  row.objective = objective;
  row.cx = contextual_loss(x, y, contextual);
  row.cd = chamfer_distance(x, y, contextual.kind, contextual.center_by_target_mean);
  if (x.dim() >= 2) {
    const auto kde = projected_divergences(x, y, options.projections, options.seed,
                                           options.grid_size);
    row.kl = kde.kl;
    row.chi2 = kde.chi2;
  } else {
    row.kl = row.chi2 = kNaN;
  }
  row.emd = sliced_emd(x, y, options.projections, options.seed);
  row.l2_lf = kNaN;
  row.l1 = kNaN;
  return row;
}

const std::vector<std::string>& measure_names() {
  static const std::vector<std::string> names{"iter", "objective", "cx",    "cd", "kl",
                                              "chi2", "emd",       "l2_lf", "l1"};
  return names;
}

double column(const TraceRow& r, std::size_t c) {
  switch (c) {
    case 1: return r.objective;
    case 2: return r.cx;
    case 3: return r.cd;
    case 4: return r.kl;
    case 5: return r.chi2;
    case 6: return r.emd;
    case 7: return r.l2_lf;
    case 8: return r.l1;
    default: return static_cast<double>(r.iteration);
  }
}

}  // namespace

std::string_view to_string(PointLoss loss) noexcept { return loss == PointLoss::cx ? "cx" : "cd"; }

PointLoss parse_point_loss(std::string_view name) {
  if (name == "cx") return PointLoss::cx;
  if (name == "cd") return PointLoss::cd;
  throw DomainError("unknown point loss '" + std::string(name) + "'");
}

ObjectiveConfig ObjectiveConfig::super_resolution() {
  ObjectiveConfig c;
  c.lambda_cx = 0.1;
  c.lambda_l2_lf = 10.0;
  c.lambda_l1 = 0.0;
  return c;
}

ObjectiveConfig ObjectiveConfig::normals(double lambda_l1) {
  ObjectiveConfig c;
  c.lambda_cx = 1.0;
  c.lambda_l2_lf = 0.1;
  c.lambda_l1 = lambda_l1;
  return c;
}

void ObjectiveConfig::validate() const {
  if (lambda_gan != 0.0) throw UnsupportedError("adversarial term unsupported");
  for (double w : {lambda_cx, lambda_l2_lf, lambda_l1}) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw DomainError("objective weights must be >= 0");
  }
  if (lambda_cx == 0.0 && lambda_l2_lf == 0.0 && lambda_l1 == 0.0) {
    throw DomainError("at least one objective weight must be positive");
  }
  if (!(contextual.h > 0.0)) throw DomainError("bandwidth h must be positive");
}

PointRun optimize_points(const FeatureSet& x0, const FeatureSet& y, PointLoss loss,
                         const ContextualParams& contextual, const OptimizerConfig& opt,
                         const TraceOptions& options) {
  opt.validate();
  if (x0.dim() != y.dim()) throw ShapeError("dimension mismatch");
  if (x0.size() != y.size()) throw ShapeError("point sets must have equal sizes; equalize first");

  auto evaluate = [&](const FeatureSet& x) {
    return loss == PointLoss::cx
               ? contextual_loss_gradient(x, y, contextual)
               : chamfer_loss_gradient(x, y, contextual.kind,
                                       contextual.center_by_target_mean);
  };

  PointRun run{x0, {}, RunStatus::completed, 0};
  auto current = evaluate(x0);
  if (!all_finite(current.loss, current.gradient.values)) {
    run.status = RunStatus::diverged;
    return run;
  }
  run.trace.rows.push_back(point_row(0, current.loss, x0, y, contextual, options));

  FirstOrderOptimizer optimizer(opt, x0.values().size());
  std::vector<double> params(x0.values().begin(), x0.values().end());
  for (std::size_t it = 1; it <= opt.iterations; ++it) {
    optimizer.step(params, current.gradient.values);
    if (!std::all_of(params.begin(), params.end(), [](double v) { return std::isfinite(v); })) {
      run.status = RunStatus::diverged;
      break;
    }
    FeatureSet next(params, x0.dim());
    auto next_eval = evaluate(next);
    if (!all_finite(next_eval.loss, next_eval.gradient.values)) {
      run.status = RunStatus::diverged;
      break;
    }
    run.points = std::move(next);
    current = std::move(next_eval);
    run.iterations_run = it;
    if (should_record(it, opt)) {
      run.trace.rows.push_back(point_row(it, current.loss, run.points, y, contextual, options));
    }
  }
  return run;
}

ObjectiveTerms evaluate_objective(const ImageGrid& x, const ImageGrid& y,
                                  const ObjectiveConfig& cfg) {
  cfg.validate();
  if (!x.same_shape(y)) throw ShapeError("image size mismatch");
  ObjectiveTerms t;
  t.gradient.assign(x.size(), 0.0);
  auto accumulate = [&](double weight, const LossGradient& term) {
    for (std::size_t e = 0; e < t.gradient.size(); ++e) {
      t.gradient[e] += weight * term.gradient.values[e];
    }
  };

  const auto cx = grad_contextual_image(x, y, cfg.patch, cfg.contextual);
  t.cx = cx.loss;
  if (cfg.lambda_cx > 0.0) accumulate(cfg.lambda_cx, cx);

  const auto lf = grad_lowfreq_l2(x, y, BlurKernel::gaussian(cfg.blur_size, cfg.blur_sigma));
  t.l2_lf = lf.loss;
  if (cfg.lambda_l2_lf > 0.0) accumulate(cfg.lambda_l2_lf, lf);

  const auto l1 = grad_l1(x, y);
  t.l1 = l1.loss;
  if (cfg.lambda_l1 > 0.0) accumulate(cfg.lambda_l1, l1);

  t.total = cfg.lambda_cx * t.cx + cfg.lambda_l2_lf * t.l2_lf + cfg.lambda_l1 * t.l1;
  return t;
}

ImageRun optimize_image(const ImageGrid& x0, const ImageGrid& y, const ObjectiveConfig& cfg,
                        const OptimizerConfig& opt, const TraceOptions& options) {
  cfg.validate();
  opt.validate();
  if (!x0.same_shape(y)) throw ShapeError("image size mismatch");

  ReportOptions report_options;
  report_options.projections = options.projections;
  report_options.seed = options.seed;
  report_options.grid_size = options.grid_size;
  report_options.contextual = cfg.contextual;

  auto record = [&](std::size_t it, const ImageGrid& img, const ObjectiveTerms& t) {
    const auto r = divergence_report(img, y, cfg.patch, report_options);
    return TraceRow{it, t.total, t.cx, r.cd, r.kl, r.chi2, r.emd, t.l2_lf, t.l1};
  };

  ImageRun run{x0, {}, RunStatus::completed, 0};
  auto current = evaluate_objective(x0, y, cfg);
  if (!all_finite(current.total, current.gradient)) {
    run.status = RunStatus::diverged;
    return run;
  }
  run.trace.rows.push_back(record(0, x0, current));

  FirstOrderOptimizer optimizer(opt, x0.size());
  std::vector<double> params(x0.values().begin(), x0.values().end());
  for (std::size_t it = 1; it <= opt.iterations; ++it) {
    optimizer.step(params, current.gradient);
    for (double& v : params) v = std::clamp(v, 0.0, 1.0);  // NaN survives clamp; caught below
    if (!std::all_of(params.begin(), params.end(), [](double v) { return std::isfinite(v); })) {
      run.status = RunStatus::diverged;
      break;
    }
    ImageGrid next(x0.height(), x0.width(), x0.channels(), params);
    auto next_eval = evaluate_objective(next, y, cfg);
    if (!all_finite(next_eval.total, next_eval.gradient)) {
      run.status = RunStatus::diverged;
      break;
    }
    run.image = std::move(next);
    current = std::move(next_eval);
    run.iterations_run = it;
    if (should_record(it, opt)) run.trace.rows.push_back(record(it, run.image, current));
  }
  return run;
}

std::string trace_csv(const Trace& trace) {
  std::string out = kTraceHeader;
  out += '\n';
  for (const auto& r : trace.rows) {
    out += std::to_string(r.iteration);
    for (std::size_t c = 1; c < measure_names().size(); ++c) {
      out += ',';
      out += format_number(column(r, c));
    }
    out += '\n';
  }
  return out;
}

Trace parse_trace_csv(std::string_view text) {
  const std::string_view header = kTraceHeader;
  if (!text.starts_with(header) ||
      (text.size() > header.size() && text[header.size()] != '\n' &&
       text[header.size()] != '\r')) {
    throw FormatError("bad trace header", 0);
  }
  Trace trace;
  std::size_t pos = text.find('\n');
  pos = pos == std::string_view::npos ? text.size() : pos + 1;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty()) {
      double fields[9];
      std::size_t count = 0, start = 0;
      while (true) {
        const std::size_t comma = line.find(',', start);
        const std::size_t end = comma == std::string_view::npos ? line.size() : comma;
        if (count >= 9 || !parse_number(line.substr(start, end - start), fields[count])) {
          throw FormatError("bad trace field", pos + start);
        }
        ++count;
        if (comma == std::string_view::npos) break;
        start = comma + 1;
      }
      if (count != 9) throw FormatError("trace row needs 9 fields", pos);
      if (!(fields[0] >= 0.0) || fields[0] != std::floor(fields[0])) {
        throw FormatError("bad trace iteration", pos);
      }
      TraceRow r{static_cast<std::size_t>(fields[0]), fields[1], fields[2], fields[3],
                 fields[4], fields[5], fields[6], fields[7], fields[8]};
      if (!trace.rows.empty() && r.iteration <= trace.rows.back().iteration) {
        throw FormatError("trace iterations must strictly increase", pos);
      }
      trace.rows.push_back(r);
    }
    pos = eol + 1;
  }
  return trace;
}

std::optional<double> pearson(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 2) return std::nullopt;
  const auto n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (!std::isfinite(a[k]) || !std::isfinite(b[k])) return std::nullopt;
    ma += a[k];
    mb += b[k];
  }
  ma /= n;
  mb /= n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    sab += (a[k] - ma) * (b[k] - mb);
    saa += (a[k] - ma) * (a[k] - ma);
    sbb += (b[k] - mb) * (b[k] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return std::nullopt;
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

std::vector<MeasureCorrelation> trace_correlations(const Trace& trace) {
  if (trace.rows.size() < 3) throw DomainError("correlations need at least 3 trace rows");
  std::vector<double> cx;
  for (const auto& r : trace.rows) cx.push_back(r.cx);
  std::vector<MeasureCorrelation> out;
  for (std::size_t c = 1; c < measure_names().size(); ++c) {
    if (c == 2) continue;
    std::vector<double> series;
    for (const auto& r : trace.rows) series.push_back(column(r, c));
    out.push_back({measure_names()[c], pearson(series, cx)});
  }
  return out;
}

}  // namespace cxstat
