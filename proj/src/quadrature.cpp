#include "abcmc/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/minima.hpp>

#include "abcmc/core.hpp"

namespace abcmc {

namespace {

double clamp_to(double x, double lo, double hi) { return std::min(std::max(x, lo), hi); }

// Safe evaluation: NaN (e.g. log 0 * 0 at a boundary) counts as -inf.
double eval(const std::function<double(double)>& f, double x) {
  const double v = f(x);
  return std::isnan(v) ? -std::numeric_limits<double>::infinity() : v;
}

// Interior point where log_f is finite, starting from the kinks and a few probes.
double finite_start(const std::function<double(double)>& f, double lo, double hi, const std::vector<double>& kinks) {
  std::vector<double> probes = kinks;
  if (std::isfinite(lo) && std::isfinite(hi)) {
    probes.push_back(0.5 * (lo + hi));
  } else if (std::isfinite(lo)) {
    for (double s = 1e-3; s < 1e6; s *= 10) probes.push_back(lo + s);
  } else if (std::isfinite(hi)) {
    for (double s = 1e-3; s < 1e6; s *= 10) probes.push_back(hi - s);
  } else {
    probes.push_back(0.0);
    for (double s = 1e-3; s < 1e6; s *= 10) {
      probes.push_back(s);
      probes.push_back(-s);
    }
  }
  double best = std::numeric_limits<double>::quiet_NaN();
  double best_val = -std::numeric_limits<double>::infinity();
  for (double p : probes) {
    if (!(p > lo && p < hi)) continue;
    const double v = eval(f, p);
    if (v > best_val) {
      best_val = v;
      best = p;
    }
  }
  if (!std::isfinite(best_val)) throw InvalidArgument("log_integrate: integrand is -inf at every probe point");
  return best;
}

// Bracket and locate the maximum of a unimodal log_f.
double locate_mode(const std::function<double(double)>& f, double lo, double hi, double start) {
  const double step0 = 1e-3 * std::max(1.0, std::abs(start));
  const double f0 = eval(f, start);
  const double fr = eval(f, clamp_to(start + step0, lo, hi));
  const double fl = eval(f, clamp_to(start - step0, lo, hi));
  if (f0 >= fr && f0 >= fl) {
    const double x0 = clamp_to(start - step0, lo, hi);
    const double x1 = clamp_to(start + step0, lo, hi);
    auto neg = [&](double x) { return -eval(f, x); };
    return boost::math::tools::brent_find_minima(neg, x0, x1, 52).first;
  }
  const double dir = fr >= fl ? 1.0 : -1.0;
  const double edge = dir > 0 ? hi : lo;
  double step = step0;
  double prev = start;
  double cur = start;
  double f_cur = f0;
  double next = start;
  for (int it = 0; it < 400; ++it) {
    next = cur + dir * step;
    if ((dir > 0 && next >= hi) || (dir < 0 && next <= lo)) next = cur + 0.5 * (edge - cur);
    if (next == cur) break;
    const double f_next = eval(f, next);
    if (f_next < f_cur) break;
    prev = cur;
    cur = next;
    f_cur = f_next;
    step *= 2.0;
  }
  const double x0 = std::min(prev, next);
  const double x1 = std::max(prev, next);
  if (x0 == x1) return cur;
  auto neg = [&](double x) { return -eval(f, x); };
  return boost::math::tools::brent_find_minima(neg, x0, x1, 52).first;
}

// Walk outward from the mode until the integrand falls below the floor.
double truncation_bound(const std::function<double(double)>& f, double mode, double peak, double limit, double log_floor) {
  const double dir = limit > mode ? 1.0 : -1.0;
  double step = 1e-3 * std::max(1.0, std::abs(mode));
  double x = mode;
  for (int it = 0; it < 2000; ++it) {
    double next = x + dir * step;
    if ((dir > 0 && next >= limit) || (dir < 0 && next <= limit)) {
      if (std::isfinite(limit)) return limit;
      next = x + dir * step;
    }
    x = next;
    if (eval(f, x) - peak < log_floor) return x;
    step *= 1.5;
  }
  throw NonConvergence("log_integrate: integrand does not decay within the search range");
}

}  // namespace

LogIntegral log_integrate(const std::function<double(double)>& log_f, double lo, double hi, std::vector<double> kinks,
                          const QuadratureOptions& options) {
  if (!(lo < hi)) throw InvalidArgument("log_integrate: empty interval");
  const double start = finite_start(log_f, lo, hi, kinks);
  double mode = locate_mode(log_f, lo, hi, start);
  double peak = eval(log_f, mode);
  for (double k : kinks) {
    if (k > lo && k < hi) {
      const double v = eval(log_f, k);
      if (v > peak) {
        peak = v;
        mode = k;
      }
    }
  }
  if (!std::isfinite(peak)) throw InvalidArgument("log_integrate: integrand has no finite peak");

  const double a = truncation_bound(log_f, mode, peak, lo, options.log_floor);
  const double b = truncation_bound(log_f, mode, peak, hi, options.log_floor);

  std::vector<double> cuts{a, mode, b};
  for (double k : kinks)
    if (k > a && k < b) cuts.push_back(k);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  auto integrand = [&](double x) {
    const double v = eval(log_f, x) - peak;
    return std::exp(v);
  };

  double total = 0.0;
  double total_err = 0.0;
  using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    double err = 0.0;
    total += GK::integrate(integrand, cuts[i], cuts[i + 1], options.max_depth, options.rel_tol, &err);
    total_err += err;
  }
  if (!(total > 0.0)) throw NonConvergence("log_integrate: integral underflowed to zero");
  const double rel = total_err / total;
  if (rel > options.max_rel_error) {
    std::ostringstream msg;
    msg << "log_integrate: achieved relative error " << rel << " exceeds " << options.max_rel_error;
    throw NonConvergence(msg.str());
  }
  return LogIntegral{peak + std::log(total), rel, a, b};
}

}  // namespace abcmc
