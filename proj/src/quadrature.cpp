#include "pdmp/quadrature.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "pdmp/error.hpp"

namespace pdmp {
namespace {

struct SimpsonPanel {
  double a, m, b;
  double fa, fm, fb;
  double whole;
};

double simpson(double a, double b, double fa, double fm, double fb) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double refine(const std::function<double(double)>& f, const SimpsonPanel& p,
              double tol, int depth) {
  const double lm = 0.5 * (p.a + p.m);
  const double rm = 0.5 * (p.m + p.b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = simpson(p.a, p.m, p.fa, flm, p.fm);
  const double right = simpson(p.m, p.b, p.fm, frm, p.fb);
  const double delta = left + right - p.whole;
  if (std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  if (depth <= 0) {
    std::ostringstream msg;
    msg << "adaptive Simpson did not converge on [" << p.a << ", " << p.b
        << "], local error " << std::abs(delta) / 15.0;
    throw NumericalError(msg.str());
  }
  return refine(f, {p.a, lm, p.m, p.fa, flm, p.fm, left}, 0.5 * tol,
                depth - 1) +
         refine(f, {p.m, rm, p.b, p.fm, frm, p.fb, right}, 0.5 * tol,
                depth - 1);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, const QuadratureOptions& options) {
  if (a == b) return 0.0;
  // Split into a few panels up front so that narrow features are not missed
  // by the first coarse estimate.
  constexpr int kPanels = 8;
  const double width = (b - a) / kPanels;
  double total = 0.0;
  for (int k = 0; k < kPanels; ++k) {
    const double lo = a + k * width;
    const double hi = (k + 1 == kPanels) ? b : lo + width;
    const double mid = 0.5 * (lo + hi);
    const double flo = f(lo), fmid = f(mid), fhi = f(hi);
    const double value = (std::isfinite(flo) && std::isfinite(fmid) &&
                          std::isfinite(fhi))
                             ? simpson(lo, hi, flo, fmid, fhi)
                             : std::numeric_limits<double>::quiet_NaN();
    if (!std::isfinite(value)) throw NumericalError("non-finite integrand");
    total += refine(f, {lo, mid, hi, flo, fmid, fhi, value},
                    options.abs_tol / kPanels, options.max_depth);
  }
  return total;
}

QuadratureRule gauss_laguerre(std::size_t n) {
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  double z = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (i == 0) {
      z = 3.0 / (1.0 + 2.4 * static_cast<double>(n));
    } else if (i == 1) {
      z += 15.0 / (1.0 + 2.5 * static_cast<double>(n));
    } else {
      const double ai = static_cast<double>(i - 1);
      z += ((1.0 + 2.55 * ai) / (1.9 * ai)) * (z - rule.nodes[i - 2]);
    }
    double p1 = 1.0, p2 = 0.0, pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      p1 = 1.0;
      p2 = 0.0;
      for (std::size_t j = 1; j <= n; ++j) {
        const double p3 = p2;
        p2 = p1;
        const double dj = static_cast<double>(j);
        p1 = ((2.0 * dj - 1.0 - z) * p2 - (dj - 1.0) * p3) / dj;
      }
      pp = static_cast<double>(n) * (p1 - p2) / z;
      const double z1 = z;
      z = z1 - p1 / pp;
      if (std::abs(z - z1) <= 1e-15 * std::max(1.0, std::abs(z))) break;
    }
    rule.nodes[i] = z;
    rule.weights[i] = -1.0 / (pp * static_cast<double>(n) * p2);
  }
  return rule;
}

QuadratureRule composite_simpson(double a, double b, std::size_t intervals) {
  if (intervals < 2) intervals = 2;
  if (intervals % 2 == 1) ++intervals;
  QuadratureRule rule;
  rule.nodes.resize(intervals + 1);
  rule.weights.resize(intervals + 1);
  const double h = (b - a) / static_cast<double>(intervals);
  for (std::size_t k = 0; k <= intervals; ++k) {
    rule.nodes[k] = a + h * static_cast<double>(k);
    const double c = (k == 0 || k == intervals) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
    rule.weights[k] = c * h / 3.0;
  }
  return rule;
}

}  // namespace pdmp
