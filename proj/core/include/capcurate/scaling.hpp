#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "capcurate/jsonl.hpp"

namespace capcurate {

struct ScorePoint {
  double data_size = 0.0;
  double score = 0.0;
  std::string label;

  Json to_json() const;
  static ScorePoint from_json(const Json& obj, std::size_t line = 0);
};

std::vector<ScorePoint> read_score_points(const std::filesystem::path& path);

// score = a * ln(size) + b
struct ScalingFit {
  double a = 0.0;
  double b = 0.0;
  double r2 = 0.0;
  std::size_t n = 0;

  Json to_json() const;
};

// Least squares in ln(size). Throws when all sizes are equal or any size is
// not positive. r2 is 1 when every score is equal (the fit is exact).
ScalingFit fit_log(std::span<const ScorePoint> points);

double pearson(std::span<const double> xs, std::span<const double> ys);
double r_squared(std::span<const double> predicted, std::span<const double> actual);
double project(const ScalingFit& fit, double size);

struct CorrelationReport {
  double rho = 0.0;
  double r2 = 0.0;
  double slope = 0.0;
  double intercept = 0.0;

  Json to_json() const;
};

// Pearson rho plus R^2 of the simple linear fit ys ~ xs.
CorrelationReport correlate(std::span<const double> xs, std::span<const double> ys);

// "data_size,score,fitted" rows, points in input order.
std::string fit_csv(std::span<const ScorePoint> points, const ScalingFit& fit);

}  // namespace capcurate
