#include "layover/black_scholes.hpp"

#include <cmath>

#include <boost/math/distributions/normal.hpp>

namespace layover::bs {
namespace {

const boost::math::normal_distribution<double> kStd;

double norm_cdf(double z) { return boost::math::cdf(kStd, z); }
double norm_pdf(double z) { return boost::math::pdf(kStd, z); }

double d1(const Inputs& in) {
  const double sv = in.vol * std::sqrt(in.tau);
  return (std::log(in.spot / in.strike) + (in.rate + 0.5 * in.vol * in.vol) * in.tau) / sv;
}

}  // namespace

double price(OptionKind kind, const Inputs& in) {
  const double disc = std::exp(-in.rate * in.tau);
  if (in.vol <= 0.0 || in.tau <= 0.0) {
    const double fwd_intrinsic = kind == OptionKind::Call ? in.spot - in.strike * disc : in.strike * disc - in.spot;
    return std::max(0.0, fwd_intrinsic);
  }
  const double a = d1(in);
  const double b = a - in.vol * std::sqrt(in.tau);
  if (kind == OptionKind::Call) return in.spot * norm_cdf(a) - in.strike * disc * norm_cdf(b);
  return in.strike * disc * norm_cdf(-b) - in.spot * norm_cdf(-a);
}

double delta(OptionKind kind, const Inputs& in) {
  const double a = d1(in);
  return kind == OptionKind::Call ? norm_cdf(a) : norm_cdf(a) - 1.0;
}

double vega(const Inputs& in) { return in.spot * norm_pdf(d1(in)) * std::sqrt(in.tau); }

double implied_vol(OptionKind kind, double target, Inputs in, double tolerance) {
  double lo = 1e-6, hi = 5.0;
  in.vol = lo;
  const double plo = price(kind, in);
  in.vol = hi;
  const double phi = price(kind, in);
  if (!(target >= plo && target <= phi)) return -1.0;
  // Price is increasing in volatility; bisect until the bracket is below tolerance.
  while (hi - lo > tolerance) {
    const double mid = 0.5 * (lo + hi);
    in.vol = mid;
    if (price(kind, in) < target) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace layover::bs
