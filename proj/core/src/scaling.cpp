#include "capcurate/scaling.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "capcurate/error.hpp"

namespace capcurate {

Json ScorePoint::to_json() const { return Json{{"data_size", data_size}, {"score", score}, {"label", label}}; }

ScorePoint ScorePoint::from_json(const Json& obj, std::size_t line) {
  ScorePoint p;
  p.data_size = field::required_number(obj, "data_size", line);
  p.score = field::required_number(obj, "score", line);
  p.label = field::optional_string(obj, "label", line).value_or("");
  if (!(p.data_size > 0.0)) throw ParseError(line, "data_size", "must be > 0");
  return p;
}

std::vector<ScorePoint> read_score_points(const std::filesystem::path& path) {
  std::vector<ScorePoint> out;
  JsonlReader reader(path);
  while (auto obj = reader.next()) out.push_back(ScorePoint::from_json(*obj, reader.line_number()));
  return out;
}

Json ScalingFit::to_json() const { return Json{{"a", a}, {"b", b}, {"r2", r2}, {"n", n}, {"log", "natural"}}; }

namespace {

void check_pair(std::span<const double> xs, std::span<const double> ys, const char* what) {
  if (xs.size() != ys.size()) throw Error(ErrorCode::invalid_argument, std::string(what) + ": length mismatch");
  if (xs.size() < 2) throw Error(ErrorCode::invalid_argument, std::string(what) + ": needs at least 2 points");
}

double mean(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

// Centered sums of squares and cross products.
struct Moments {
  double sxx = 0, syy = 0, sxy = 0, mx = 0, my = 0;
};

Moments moments(std::span<const double> xs, std::span<const double> ys) {
  Moments m;
  m.mx = mean(xs);
  m.my = mean(ys);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - m.mx;
    const double dy = ys[i] - m.my;
    m.sxx += dx * dx;
    m.syy += dy * dy;
    m.sxy += dx * dy;
  }
  return m;
}

}  // namespace

double pearson(std::span<const double> xs, std::span<const double> ys) {
  check_pair(xs, ys, "pearson");
  const auto m = moments(xs, ys);
  if (m.sxx == 0.0 || m.syy == 0.0) throw Error(ErrorCode::invalid_argument, "pearson: zero variance");
  const double r = m.sxy / std::sqrt(m.sxx * m.syy);
  return std::clamp(r, -1.0, 1.0);
}

double r_squared(std::span<const double> predicted, std::span<const double> actual) {
  check_pair(predicted, actual, "r_squared");
  const double my = mean(actual);
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    ss_res += (actual[i] - predicted[i]) * (actual[i] - predicted[i]);
    ss_tot += (actual[i] - my) * (actual[i] - my);
  }
  if (ss_tot == 0.0) throw Error(ErrorCode::invalid_argument, "r_squared: actual values have zero variance");
  return 1.0 - ss_res / ss_tot;
}

ScalingFit fit_log(std::span<const ScorePoint> points) {
  if (points.size() < 2) throw Error(ErrorCode::invalid_argument, "fit_log needs at least 2 points");
  std::vector<double> xs, ys;
  for (const auto& p : points) {
    if (!(p.data_size > 0.0) || !std::isfinite(p.data_size)) {
      throw Error(ErrorCode::invalid_argument, "data sizes must be positive");
    }
    xs.push_back(std::log(p.data_size));
    ys.push_back(p.score);
  }
  const auto m = moments(xs, ys);
  if (m.sxx == 0.0) throw Error(ErrorCode::invalid_argument, "degenerate fit: all data sizes are equal");
  ScalingFit fit;
  fit.n = points.size();
  fit.a = m.sxy / m.sxx;
  fit.b = m.my - fit.a * m.mx;
  if (m.syy == 0.0) {
    fit.r2 = 1.0;
  } else {
    std::vector<double> pred;
    for (double x : xs) pred.push_back(fit.a * x + fit.b);
    fit.r2 = r_squared(pred, ys);
  }
  return fit;
}

double project(const ScalingFit& fit, double size) {
  if (!(size > 0.0)) throw Error(ErrorCode::invalid_argument, "projection size must be > 0");
  return fit.a * std::log(size) + fit.b;
}

Json CorrelationReport::to_json() const {
  return Json{{"rho", rho}, {"r2", r2}, {"slope", slope}, {"intercept", intercept}};
}

CorrelationReport correlate(std::span<const double> xs, std::span<const double> ys) {
  CorrelationReport r;
  r.rho = pearson(xs, ys);
  const auto m = moments(xs, ys);
  r.slope = m.sxy / m.sxx;
  r.intercept = m.my - r.slope * m.mx;
  std::vector<double> pred;
  for (double x : xs) pred.push_back(r.slope * x + r.intercept);
  r.r2 = r_squared(pred, ys);
  return r;
}

std::string fit_csv(std::span<const ScorePoint> points, const ScalingFit& fit) {
  std::string out = "data_size,score,fitted\n";
  char buf[128];
  for (const auto& p : points) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", p.data_size, p.score, project(fit, p.data_size));
    out += buf;
  }
  return out;
}

}  // namespace capcurate
