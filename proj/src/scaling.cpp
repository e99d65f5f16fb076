#include "qising/scaling.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <set>

namespace qising {

namespace {

struct Ols {
  double intercept = 0.0, slope = 0.0;
  double intercept_se = 0.0, slope_se = 0.0;
  int n = 0;
};

Ols simple_ols(const std::vector<double>& x, const std::vector<double>& y) {
  Ols fit;
  fit.n = static_cast<int>(x.size());
  const double n = static_cast<double>(fit.n);
  double sx = 0.0, sy = 0.0;
  for (int i = 0; i < fit.n; ++i) {
    sx += x[static_cast<std::size_t>(i)];
    sy += y[static_cast<std::size_t>(i)];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0.0, sxy = 0.0;
  for (int i = 0; i < fit.n; ++i) {
    const double dx = x[static_cast<std::size_t>(i)] - mx;
    sxx += dx * dx;
    sxy += dx * (y[static_cast<std::size_t>(i)] - my);
  }
  if (sxx == 0.0) throw UsageError("regression abscissa is degenerate");
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (fit.n > 2) {
    double sse = 0.0;
    for (int i = 0; i < fit.n; ++i) {
      const double r = y[static_cast<std::size_t>(i)] - fit.intercept -
                       fit.slope * x[static_cast<std::size_t>(i)];
      sse += r * r;
    }
    const double sigma2 = sse / (n - 2.0);
    fit.slope_se = std::sqrt(sigma2 / sxx);
    fit.intercept_se = std::sqrt(sigma2 * (1.0 / n + mx * mx / sxx));
  }
  return fit;
}

struct LogCurve {
  int n_sites = 0;
  std::vector<double> t, logc;
  CurveSummary summary;
};

std::vector<LogCurve> window_log_curves(const std::vector<SizedSeries>& data,
                                        const std::map<int, Window>& windows) {
  std::vector<LogCurve> curves;
  for (const SizedSeries& s : data) {
    auto it = windows.find(s.n_sites);
    if (it == windows.end())
      throw UsageError("no fit window given for N=" + std::to_string(s.n_sites));
    const Window w = it->second;
    if (w.t_max <= w.t_min) throw UsageError("empty fit window");
    LogCurve c;
    c.n_sites = s.n_sites;
    for (std::size_t i = 0; i < s.series.times.size(); ++i) {
      const double t = s.series.times[i];
      if (t < w.t_min || t > w.t_max) continue;
      const double v = s.series.values[i];
      if (v <= 0.0) {
        c.summary.n_excluded += 1;
        continue;
      }
      c.t.push_back(t);
      c.logc.push_back(std::log(v));
    }
    if (c.summary.n_excluded > 0)
      std::cerr << "[qising] warning: excluded " << c.summary.n_excluded
                << " non-positive coherence values from the N=" << c.n_sites
                << " fit window\n";
    if (c.t.size() < 2)
      throw UsageError("fit window for N=" + std::to_string(s.n_sites) +
                       " holds fewer than 2 usable points");
    const Ols ols = simple_ols(c.t, c.logc);
    c.summary.n_sites = c.n_sites;
    c.summary.intercept = ols.intercept;
    c.summary.slope = ols.slope;
    c.summary.intercept_se = ols.intercept_se;
    c.summary.slope_se = ols.slope_se;
    c.summary.n_points = ols.n;
    curves.push_back(std::move(c));
  }
  std::set<int> sizes;
  for (const LogCurve& c : curves) sizes.insert(c.n_sites);
  if (sizes.size() < 3)
    throw UsageError("scaling fit needs at least 3 distinct chain lengths");
  return curves;
}

}  // namespace

double collapse_score(const std::vector<SizedSeries>& data,
                      const std::map<int, Window>& windows, double exponent,
                      double power) {
  // Overlay in (t/N^power, log C - exponent log N) and measure each curve
  // against linear interpolation of every other curve where they overlap.
  struct Scaled {
    std::vector<double> x, y;
  };
  std::vector<Scaled> curves;
  for (const SizedSeries& s : data) {
    auto it = windows.find(s.n_sites);
    if (it == windows.end()) continue;
    Scaled sc;
    const double nd = static_cast<double>(s.n_sites);
    for (std::size_t i = 0; i < s.series.times.size(); ++i) {
      const double t = s.series.times[i];
      const double v = s.series.values[i];
      if (t < it->second.t_min || t > it->second.t_max || v <= 0.0) continue;
      sc.x.push_back(t / std::pow(nd, power));
      sc.y.push_back(std::log(v) - exponent * std::log(nd));
    }
    if (sc.x.size() >= 2) curves.push_back(std::move(sc));
  }
  double sse = 0.0;
  std::size_t count = 0;
  for (std::size_t p = 0; p < curves.size(); ++p) {
    for (std::size_t q = 0; q < curves.size(); ++q) {
      if (p == q) continue;
      const Scaled& a = curves[p];
      const Scaled& b = curves[q];
      for (std::size_t i = 0; i < a.x.size(); ++i) {
        const double x = a.x[i];
        if (x < b.x.front() || x > b.x.back()) continue;
        auto hi = std::lower_bound(b.x.begin(), b.x.end(), x);
        double yb;
        if (hi == b.x.begin()) {
          yb = b.y.front();
        } else {
          const std::size_t j = static_cast<std::size_t>(hi - b.x.begin());
          if (j == b.x.size()) {
            yb = b.y.back();
          } else {
            const double x0 = b.x[j - 1], x1 = b.x[j];
            const double w = (x1 == x0) ? 0.0 : (x - x0) / (x1 - x0);
            yb = b.y[j - 1] * (1.0 - w) + b.y[j] * w;
          }
        }
        const double d = a.y[i] - yb;
        sse += d * d;
        ++count;
      }
    }
  }
  return count ? sse / static_cast<double>(count) : 0.0;
}

ScalingFit fit_regime(const std::vector<SizedSeries>& data, Regime regime,
                      const std::map<int, Window>& windows) {
  const std::vector<LogCurve> curves = window_log_curves(data, windows);

  std::vector<double> logN, a_N, s_N;
  for (const LogCurve& c : curves) {
    logN.push_back(std::log(static_cast<double>(c.n_sites)));
    a_N.push_back(c.summary.intercept);
    s_N.push_back(c.summary.slope);
  }
  const std::size_t m = curves.size();

  ScalingFit fit;
  fit.regime = regime;
  fit.windows = windows;
  for (const LogCurve& c : curves) fit.curves.push_back(c.summary);

  if (regime == Regime::Short) {
    const Ols exp_fit = simple_ols(logN, a_N);
    fit.exponent = exp_fit.slope;
    fit.exponent_se = exp_fit.slope_se;
    double sum = 0.0;
    std::vector<double> rates;
    for (std::size_t i = 0; i < m; ++i) {
      rates.push_back(-s_N[i] * static_cast<double>(curves[i].n_sites));
      sum += rates.back();
    }
    fit.rate = sum / static_cast<double>(m);
    if (m > 1) {
      double ss = 0.0;
      for (double r : rates) ss += (r - fit.rate) * (r - fit.rate);
      fit.rate_se = std::sqrt(ss / static_cast<double>(m - 1) /
                              static_cast<double>(m));
    }
    fit.collapse_score = collapse_score(data, windows, fit.exponent, 1.0);
    return fit;
  }

  // Long regime: both the intercepts (alpha log N + const) and the rates
  // (-slope = k1 / N^alpha) constrain alpha; alternate the two updates.
  double alpha = simple_ols(logN, a_N).slope;
  double c0 = 0.0, k1 = 0.0;
  auto objective = [&](double al, double c, double rate) {
    double j = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double ri = a_N[i] - c - al * logN[i];
      const double nd = static_cast<double>(curves[i].n_sites);
      const double qi = -s_N[i] * std::pow(nd, al) - rate;
      j += ri * ri + qi * qi;
    }
    return j;
  };
  int iter = 0;
  for (; iter < 100; ++iter) {
    const double alpha_prev = alpha;
    // closed-form updates for the linear parameters
    double sc = 0.0, sk = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      sc += a_N[i] - alpha * logN[i];
      sk += -s_N[i] * std::pow(static_cast<double>(curves[i].n_sites), alpha);
    }
    c0 = sc / static_cast<double>(m);
    k1 = sk / static_cast<double>(m);
    // golden-section refinement of alpha
    double lo = alpha - 0.5, hi = alpha + 0.5;
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
    double f1 = objective(x1, c0, k1), f2 = objective(x2, c0, k1);
    for (int it2 = 0; it2 < 200 && (hi - lo) > 1e-13; ++it2) {
      if (f1 < f2) {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - gr * (hi - lo);
        f1 = objective(x1, c0, k1);
      } else {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + gr * (hi - lo);
        f2 = objective(x2, c0, k1);
      }
    }
    alpha = 0.5 * (lo + hi);
    if (std::abs(alpha - alpha_prev) < 1e-10) break;
  }
  fit.iterations = iter + 1;
  fit.exponent = alpha;
  fit.exponent_se = simple_ols(logN, a_N).slope_se;
  fit.rate = k1;
  if (m > 1) {
    double ss = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double r =
          -s_N[i] * std::pow(static_cast<double>(curves[i].n_sites), alpha) - k1;
      ss += r * r;
    }
    fit.rate_se =
        std::sqrt(ss / static_cast<double>(m - 1) / static_cast<double>(m));
  }
  fit.collapse_score = collapse_score(data, windows, alpha, alpha);
  return fit;
}

std::optional<double> crossover_time_exact(double lambda, double alpha, double k,
                                           double k1, double n_sites) {
  const double denom = k - k1 / std::pow(n_sites, alpha - 1.0);
  if (denom <= 0.0) return std::nullopt;
  return (lambda - alpha) * n_sites * std::log(n_sites) / denom;
}

double crossover_time_asymptotic(double lambda, double alpha, double k,
                                 double n_sites) {
  return (lambda - alpha) * (n_sites / k) * std::log(n_sites);
}

std::optional<CrossoverResult> crossover_time(const ScalingFit& short_fit,
                                              const ScalingFit& long_fit,
                                              double n_sites) {
  if (short_fit.regime != Regime::Short || long_fit.regime != Regime::Long)
    throw UsageError("crossover_time needs one short-regime and one long-regime fit");
  const auto tc = crossover_time_exact(short_fit.exponent, long_fit.exponent,
                                       short_fit.rate, long_fit.rate, n_sites);
  if (!tc) return std::nullopt;
  CrossoverResult r;
  r.n_sites = n_sites;
  r.t_c = *tc;
  r.t_c_asymptotic =
      crossover_time_asymptotic(short_fit.exponent, long_fit.exponent,
                                short_fit.rate, n_sites);
  return r;
}

PowerLawFit fit_power_law(const TimeSeries& series, Window window) {
  std::vector<double> lt, lv;
  for (std::size_t i = 0; i < series.times.size(); ++i) {
    const double t = series.times[i], v = series.values[i];
    if (t <= 0.0 || t < window.t_min || t > window.t_max || v <= 0.0) continue;
    lt.push_back(std::log(t));
    lv.push_back(std::log(v));
  }
  if (lt.size() < 4)
    throw UsageError("power-law fit window holds fewer than 4 usable points");
  const Ols ols = simple_ols(lt, lv);
  PowerLawFit fit;
  fit.exponent = -ols.slope;
  fit.std_error = ols.slope_se;
  fit.n_points = ols.n;
  return fit;
}

}  // namespace qising
