#include "qcrsim/junction.hpp"

#include <complex>
#include <stdexcept>
#include <string>

#include "qcrsim/constants.hpp"

namespace qcrsim {

namespace {

// Occupation as a function of x = eps/delta with kt = k_B T / delta.
// Branch split keeps exp() arguments negative: no overflow, exact saturation.
double fermi_scaled(double x, double kt) {
  const double r = x / kt;
  if (r >= 0.0) {
    const double ex = std::exp(-r);
    return ex / (1.0 + ex);
  }
  return 1.0 / (1.0 + std::exp(r));
}

// f(a) - f(b) for logistic occupations f(t) = 1/(1+e^t), full precision for
// every argument pair: expm1 handles nearly equal arguments, tail-safe
// exponential forms handle the deep tails where both occupations round to
// the same value.
double fermi_diff(double a, double b) {
  const double d = b - a;
  if (std::fabs(d) < 1.0) {
    if (a >= 0.0 || b >= 0.0) {  // exponents bounded by e^1
      const double ea = std::exp(-a), eb = std::exp(-b);
      return eb * std::expm1(d) / ((1.0 + ea) * (1.0 + eb));
    }
    const double ea = std::exp(a), eb = std::exp(b);
    return ea * std::expm1(d) / ((1.0 + ea) * (1.0 + eb));
  }
  if (a >= 0.0 && b >= 0.0) {
    const double ea = std::exp(-a), eb = std::exp(-b);
    return (ea - eb) / ((1.0 + ea) * (1.0 + eb));
  }
  if (a <= 0.0 && b <= 0.0) {
    const double ea = std::exp(a), eb = std::exp(b);
    return (eb - ea) / ((1.0 + ea) * (1.0 + eb));
  }
  const double fa = a >= 0.0 ? std::exp(-a) / (1.0 + std::exp(-a))
                             : 1.0 / (1.0 + std::exp(a));
  const double fb = b >= 0.0 ? std::exp(-b) / (1.0 + std::exp(-b))
                             : 1.0 / (1.0 + std::exp(b));
  return fa - fb;
}

// f(b - d) - f(b) with the shift d applied analytically: for sub-ulp shifts
// the difference b - d would quantize d away entirely.
double fermi_diff_shift(double b, double d) {
  if (std::fabs(d) < 1.0) {
    if (b >= 0.0) {
      const double eb = std::exp(-b);
      const double ea = eb * std::exp(d);  // e^{-(b-d)}
      return eb * std::expm1(d) / ((1.0 + ea) * (1.0 + eb));
    }
    const double eb = std::exp(b);
    const double ea = eb * std::exp(-d);  // e^{b-d}
    return -eb * std::expm1(-d) / ((1.0 + ea) * (1.0 + eb));
  }
  return fermi_diff(b - d, b);
}

// -d f/d x at scaled energy x (dimensionless, in gap units).
double fermi_slope_scaled(double x, double kt) {
  const double r = std::fabs(x) / kt;
  if (r > 745.0) return 0.0;
  const double ex = std::exp(-r);
  const double denom = 1.0 + ex;
  return ex / (kt * denom * denom);
}

// Dynes density of states at x = eps/delta (x taken >= 0 by the caller).
double dos_scaled(double x, double gamma) {
  if (x > 1e8) return 1.0;  // asymptote, avoids overflow in x^2
  const std::complex<double> z(x, gamma);
  const std::complex<double> w = z / std::sqrt(z * z - 1.0);
  return std::fabs(w.real());
}

}  // namespace

namespace detail {
double energy_cutoff(double e_scaled, double kt_scaled) {
  return std::max(30.0, std::fabs(e_scaled) + 30.0 * kt_scaled);
}
}  // namespace detail

double JunctionParams::delta_ev() const { return constants::joule_to_ev(delta); }

void JunctionParams::validate() const {
  if (!(r_t_nis > 0.0) || !std::isfinite(r_t_nis))
    throw std::invalid_argument("JunctionParams: r_t_nis must be > 0");
  if (!(delta > 0.0) || !std::isfinite(delta))
    throw std::invalid_argument("JunctionParams: delta must be > 0");
  if (!(gamma_dynes > 0.0 && gamma_dynes < 1.0))
    throw std::invalid_argument("JunctionParams: gamma_dynes must be in (0, 1)");
  if (!(t_n > 0.0) || !std::isfinite(t_n))
    throw std::invalid_argument("JunctionParams: t_n must be > 0");
  if (!std::isnan(t_s) && !(t_s > 0.0))
    throw std::invalid_argument("JunctionParams: t_s must be > 0 when set");
}

JunctionParams JunctionParams::from_ev(double r_t_nis_ohm, double delta_ev,
                                       double gamma_dynes, double t_n_k,
                                       double t_s_k) {
  JunctionParams jp;
  jp.r_t_nis = r_t_nis_ohm;
  jp.delta = constants::ev_to_joule(delta_ev);
  jp.gamma_dynes = gamma_dynes;
  jp.t_n = t_n_k;
  jp.t_s = t_s_k;
  jp.validate();
  return jp;
}

double dynes_dos(double eps, const JunctionParams& jp) {
  return dos_scaled(std::fabs(eps) / jp.delta, jp.gamma_dynes);
}

double fermi(double eps, double t) {
  return fermi_scaled(eps / constants::k_b, t);  // kt in kelvin-units of eps/k_B
}

double nis_current(double v, const JunctionParams& jp, double rel_tol) {
  if (v == 0.0) return 0.0;
  const double sign = v > 0.0 ? 1.0 : -1.0;
  const double ev = constants::e * std::fabs(v) / jp.delta;  // bias in gap units
  const double kt_n = constants::k_b * jp.t_n / jp.delta;
  const double kt_s = constants::k_b * jp.t_s_eff() / jp.delta;
  const double gamma = jp.gamma_dynes;
  const double cut = detail::energy_cutoff(ev, kt_n);
  const bool same_t = kt_s == kt_n;
  const double shift = ev / kt_n;

  auto integrand = [=](double x) {
    const double ns = dos_scaled(std::fabs(x), gamma);
    if (same_t) return ns * fermi_diff_shift(x / kt_n, shift);
    return ns * fermi_diff((x - ev) / kt_n, x / kt_s);
  };

  std::vector<double> pts = {-cut, -1.0, 0.0, 1.0};
  if (ev > 1.0 && ev < cut) pts.push_back(ev);
  pts.push_back(cut);

  const double integral = quad::integrate_or_throw(integrand, pts, rel_tol);
  return sign * integral * jp.delta / (constants::e * jp.r_t_nis);
}

double nis_conductance(double v, const JunctionParams& jp, double rel_tol) {
  const double ev = constants::e * std::fabs(v) / jp.delta;
  const double kt_n = constants::k_b * jp.t_n / jp.delta;
  const double gamma = jp.gamma_dynes;
  const double cut = detail::energy_cutoff(ev, kt_n);

  auto integrand = [=](double x) {
    return dos_scaled(std::fabs(x), gamma) * fermi_slope_scaled(x - ev, kt_n);
  };

  // The Fermi-derivative peak at x = ev must sit on a segment boundary or the
  // adaptive rule can step right over it at low temperatures.
  std::vector<double> pts = {-cut, -1.0, 0.0};
  if (ev > 0.0 && ev < 1.0) pts.push_back(ev);
  pts.push_back(1.0);
  if (ev > 1.0 && ev < cut) pts.push_back(ev);
  pts.push_back(cut);

  const double integral = quad::integrate_or_throw(integrand, pts, rel_tol);
  return integral / jp.r_t_nis;
}

double rate_f(double e_total, const JunctionParams& jp, double rel_tol) {
  const double es = e_total / jp.delta;
  const double kt_n = constants::k_b * jp.t_n / jp.delta;
  const double kt_s = constants::k_b * jp.t_s_eff() / jp.delta;
  const double gamma = jp.gamma_dynes;
  const double cut = detail::energy_cutoff(es, kt_n);

  auto integrand = [=](double x) {
    // 1 - f(x) evaluated as f(-x): no cancellation in the tail.
    return dos_scaled(std::fabs(x), gamma) * fermi_scaled(x - es, kt_n) *
           fermi_scaled(-x, kt_s);
  };

  std::vector<double> pts = {-cut, -1.0, 0.0, 1.0, cut};
  if (es > -cut && es < cut) pts.push_back(es);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

  const double integral = quad::integrate_or_throw(integrand, pts, rel_tol);
  return integral * jp.delta / (constants::e * constants::e * jp.r_t_nis);
}

}  // namespace qcrsim
