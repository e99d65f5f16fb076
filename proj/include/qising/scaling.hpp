#pragma once

// Finite-size scaling of the coherence decay. Short times follow
// C ~ N^lambda exp(-k t / N); late times follow C ~ N^alpha exp(-k1 t / N^alpha).
// Both are fit from per-size log-linear curve fits plus a cross-size
// regression, and judged by a data-collapse score.

#include <map>
#include <optional>
#include <vector>

#include "qising/observables.hpp"

namespace qising {

enum class Regime { Short, Long };

struct Window {
  double t_min = 0.0, t_max = 0.0;
};

struct SizedSeries {
  int n_sites = 0;
  TimeSeries series;
};

struct CurveSummary {
  int n_sites = 0;
  double intercept = 0.0, slope = 0.0;
  double intercept_se = 0.0, slope_se = 0.0;
  int n_points = 0, n_excluded = 0;
};

struct ScalingFit {
  Regime regime = Regime::Short;
  double exponent = 0.0, exponent_se = 0.0;  // lambda (short) or alpha (long)
  double rate = 0.0, rate_se = 0.0;          // k (short) or k1 (long)
  std::map<int, Window> windows;
  double collapse_score = 0.0;
  std::vector<CurveSummary> curves;
  int iterations = 0;
};

// Least squares on log C vs t per size, then exponent/rate extraction:
// short:   exponent from regressing intercepts on log N,
//          rate as the mean of -slope * N;
// long:    exponent and rate refined by alternation until stable.
// Fewer than 3 distinct sizes refuses; non-positive values are excluded.
ScalingFit fit_regime(const std::vector<SizedSeries>& data, Regime regime,
                      const std::map<int, Window>& windows);

// Mean squared mismatch between curves overlaid in scaled coordinates
// (t / N^power, log C - exponent log N); lower is better.
double collapse_score(const std::vector<SizedSeries>& data,
                      const std::map<int, Window>& windows, double exponent,
                      double power);

struct CrossoverResult {
  double n_sites = 0.0;
  double t_c = 0.0;             // (lambda-alpha) N log N / (k - k1 N^{1-alpha})
  double t_c_asymptotic = 0.0;  // (lambda-alpha) (N/k) log N
};

std::optional<double> crossover_time_exact(double lambda, double alpha, double k,
                                           double k1, double n_sites);
double crossover_time_asymptotic(double lambda, double alpha, double k,
                                 double n_sites);
std::optional<CrossoverResult> crossover_time(const ScalingFit& short_fit,
                                              const ScalingFit& long_fit,
                                              double n_sites);

struct PowerLawFit {
  double exponent = 0.0;  // 1/z for domain-wall decay t^{-1/z}
  double std_error = 0.0;
  int n_points = 0;
};

// Slope of log<D_W> vs log t over the window (sign-flipped); needs at least
// four usable points.
PowerLawFit fit_power_law(const TimeSeries& series, Window window);

}  // namespace qising
