#include "ncentre/levi_civita.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "ncentre/errors.hpp"
#include "ncentre/functionals.hpp"

namespace ncentre {

namespace {

Complex to_complex(const Vec3& q, const Vec3& c) { return {q.x() - c.x(), q.y() - c.y()}; }

// Integrals over each cell of a uniformly sampled function, fourth order
// (cubic through four neighbouring samples, one-sided at the ends).
std::vector<double> cell_integrals(const std::vector<double>& f, double dx) {
  const std::size_t n = f.size() - 1;
  std::vector<double> out(n);
  if (n < 3) {
    for (std::size_t i = 0; i < n; ++i) out[i] = 0.5 * dx * (f[i] + f[i + 1]);
    return out;
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (i == 0) out[i] = dx / 24.0 * (9.0 * f[0] + 19.0 * f[1] - 5.0 * f[2] + f[3]);
    else if (i == n - 1) out[i] = dx / 24.0 * (f[n - 3] - 5.0 * f[n - 2] + 19.0 * f[n - 1] + 9.0 * f[n]);
    else out[i] = dx / 24.0 * (-f[i - 1] + 13.0 * f[i] + 13.0 * f[i + 1] - f[i + 2]);
  }
  return out;
}

// Exact integral of 1 / |a + s e| over s in [0, 1]. The log form is
// rearranged on the side where |x| + x.e_hat would cancel.
double straight_segment_integral(Complex a, Complex b) {
  const Complex e = b - a;
  const double len = std::abs(e);
  if (len == 0.0) return 1.0 / std::abs(a);
  const Complex eh = e / len;
  const double perp = std::abs(a.real() * eh.imag() - a.imag() * eh.real());
  auto term = [&](Complex x) {
    const double along = x.real() * eh.real() + x.imag() * eh.imag();
    const double r = std::abs(x);
    if (along >= 0.0) return std::log(r + along);
    if (perp == 0.0) throw Error(ErrorCode::distance_zero, "segment passes through the centre");
    return 2.0 * std::log(perp) - std::log(r - along);
  };
  // Both ends on the same ray but on opposite sides: the segment crosses.
  if (perp == 0.0 && (a.real() * eh.real() + a.imag() * eh.imag()) < 0.0 &&
      (b.real() * eh.real() + b.imag() * eh.imag()) > 0.0)
    throw Error(ErrorCode::distance_zero, "segment passes through the centre");
  return (term(b) - term(a)) / len;
}

double segment_distance(Complex a, Complex b) {
  const Complex e = b - a;
  const double len2 = std::norm(e);
  if (len2 == 0.0) return std::abs(a);
  const double s = std::clamp(-(a.real() * e.real() + a.imag() * e.imag()) / len2, 0.0, 1.0);
  return std::abs(a + s * e);
}

template <class T>
T lagrange4(const std::array<double, 4>& x, const std::array<T, 4>& y, double at) {
  T out = T(0.0);
  for (int i = 0; i < 4; ++i) {
    double l = 1.0;
    for (int j = 0; j < 4; ++j)
      if (j != i) l *= (at - x[j]) / (x[i] - x[j]);
    out += l * y[i];
  }
  return out;
}

// Cubic interpolation of samples (xs ascending) at `at`, four-point stencil
// around the containing cell.
template <class T>
T interpolate(const std::vector<double>& xs, const std::vector<T>& ys, double at) {
  const std::size_t n = xs.size();
  if (n < 4) {
    auto it = std::upper_bound(xs.begin(), xs.end(), at);
    std::size_t k = it == xs.begin() ? 0 : std::min<std::size_t>(static_cast<std::size_t>(it - xs.begin()) - 1, n - 2);
    const double f = (at - xs[k]) / (xs[k + 1] - xs[k]);
    return (1.0 - f) * ys[k] + f * ys[k + 1];
  }
  auto it = std::upper_bound(xs.begin(), xs.end(), at);
  std::size_t k = it == xs.begin() ? 0 : static_cast<std::size_t>(it - xs.begin()) - 1;
  k = std::min(k, n - 2);
  const std::size_t first = std::clamp<std::size_t>(k == 0 ? 0 : k - 1, 0, n - 4);
  std::array<double, 4> x{};
  std::array<T, 4> y{};
  for (int i = 0; i < 4; ++i) {
    x[i] = xs[first + i];
    y[i] = ys[first + i];
  }
  return lagrange4(x, y, at);
}

// Not-a-knot cubic spline through (xs, ys), xs strictly ascending. C^2, so
// second differences of the resampled values see no interpolation kinks.
class Spline {
 public:
  Spline(const std::vector<double>& xs, const std::vector<Complex>& ys) : x_(xs), y_(ys), m_(xs.size()) {
    const std::size_t n = xs.size();
    if (n < 4) return;
    // Tridiagonal system for the interior second derivatives; the end
    // conditions M0 = M1 + (M1 - M2) h0/h1 (and mirrored) are folded into
    // the first and last rows.
    const std::size_t last = n - 2;
    std::vector<double> lower(n, 0.0), diag(n, 0.0), upper(n, 0.0);
    std::vector<Complex> rhs(n, 0.0);
    for (std::size_t i = 1; i <= last; ++i) {
      const double h0 = xs[i] - xs[i - 1], h1 = xs[i + 1] - xs[i];
      lower[i] = h0 / 6.0;
      diag[i] = (h0 + h1) / 3.0;
      upper[i] = h1 / 6.0;
      rhs[i] = (ys[i + 1] - ys[i]) / h1 - (ys[i] - ys[i - 1]) / h0;
    }
    const double r0 = (xs[1] - xs[0]) / (xs[2] - xs[1]);
    diag[1] += lower[1] * (1.0 + r0);
    upper[1] -= lower[1] * r0;
    lower[1] = 0.0;
    const double r1 = (xs[n - 1] - xs[n - 2]) / (xs[n - 2] - xs[n - 3]);
    diag[last] += upper[last] * (1.0 + r1);
    lower[last] -= upper[last] * r1;
    upper[last] = 0.0;
    for (std::size_t i = 2; i <= last; ++i) {
      const double f = lower[i] / diag[i - 1];
      diag[i] -= f * upper[i - 1];
      rhs[i] -= f * rhs[i - 1];
    }
    m_[last] = rhs[last] / diag[last];
    for (std::size_t i = last - 1; i >= 1; --i) m_[i] = (rhs[i] - upper[i] * m_[i + 1]) / diag[i];
    m_[0] = m_[1] + (m_[1] - m_[2]) * r0;
    m_[n - 1] = m_[last] + (m_[last] - m_[last - 1]) * r1;
  }

  Complex operator()(double at) const {
    const std::size_t n = x_.size();
    auto it = std::upper_bound(x_.begin(), x_.end(), at);
    std::size_t k = it == x_.begin() ? 0 : static_cast<std::size_t>(it - x_.begin()) - 1;
    k = std::min(k, n - 2);
    const double h = x_[k + 1] - x_[k];
    const double a = (x_[k + 1] - at) / h, b = (at - x_[k]) / h;
    return a * y_[k] + b * y_[k + 1] + ((a * a * a - a) * m_[k] + (b * b * b - b) * m_[k + 1]) * (h * h / 6.0);
  }

 private:
  std::vector<double> x_;
  std::vector<Complex> y_;
  std::vector<Complex> m_;
};

void check_centre(const PotentialSpec& spec, int centre) {
  if (centre < 0 || static_cast<std::size_t>(centre) >= spec.size())
    throw Error(ErrorCode::invalid_argument, "centre index out of range");
  if (spec.centre(static_cast<std::size_t>(centre)).exponent != 1.0)
    throw Error(ErrorCode::alpha_mismatch, "the Levi-Civita transform needs exponent 1 at the centre");
  if (spec.mode() != Mode::planar) throw Error(ErrorCode::invalid_argument, "the Levi-Civita transform is planar");
}

// grad_w of (V0(w^2 + c) + h) |w|^2, with grad_w V0(w^2) = 2 conj(w) grad_u V0.
Complex composite_gradient(const PotentialSpec& rest, const Vec3& c, Complex w, double h) {
  const Complex u = w * w;
  const Vec3 q(c.x() + u.real(), c.y() + u.imag(), 0.0);
  const double v = evaluate(rest, q);
  const Vec3 g = gradient(rest, q);
  return 2.0 * std::conj(w) * Complex(g.x(), g.y()) * std::norm(w) + 2.0 * (v + h) * w;
}

}  // namespace

LCPath to_lc(const DiscretePath& path, const PotentialSpec& spec, int centre, int branch) {
  check_centre(spec, centre);
  if (path.mode() != Mode::planar) throw Error(ErrorCode::invalid_argument, "the Levi-Civita transform is planar");
  if (branch != 1 && branch != -1) throw Error(ErrorCode::invalid_argument, "branch must be +1 or -1");
  const Vec3& c = spec.centre(static_cast<std::size_t>(centre)).position;
  const int n = path.segments();
  const double dt = 1.0 / n;

  std::vector<Complex> z(n + 1);
  std::vector<double> rho(n + 1);
  for (int i = 0; i <= n; ++i) {
    z[i] = to_complex(path.node(i), c);
    rho[i] = std::abs(z[i]);
  }
  if (rho.front() == 0.0 || rho.back() == 0.0) throw Error(ErrorCode::distance_zero, "path endpoint at the centre");

  // dt / rho, cell by cell.
  std::vector<double> inv(n + 1);
  for (int i = 0; i <= n; ++i) inv[i] = rho[i] > 0.0 ? 1.0 / rho[i] : 0.0;
  const std::vector<double> smooth = cell_integrals(inv, dt);
  std::vector<double> cell(n);
  for (int i = 0; i < n; ++i) {
    if (rho[i] == 0.0 && rho[i + 1] == 0.0) throw Error(ErrorCode::distance_zero, "consecutive nodes at the centre");
    if (rho[i] == 0.0 || rho[i + 1] == 0.0) {
      // rho ~ rho_other * (s / dt)^(2/3) next to a collision.
      cell[i] = 3.0 * dt / std::max(rho[i], rho[i + 1]);
      continue;
    }
    const int lo = std::max(0, std::min(i - 1, n - 3)), hi = std::min(n, lo + 3);
    double rmin = rho[i], rmax = rho[i];
    bool regular = n >= 3;
    for (int k = lo; k <= hi; ++k) {
      if (rho[k] == 0.0) regular = false;
      rmin = std::min(rmin, rho[k]);
      rmax = std::max(rmax, rho[k]);
    }
    regular = regular && rmax <= 2.0 * rmin && segment_distance(z[i], z[i + 1]) >= 0.5 * std::min(rho[i], rho[i + 1]);
    cell[i] = regular ? smooth[i] : dt * straight_segment_integral(z[i], z[i + 1]);
  }
  std::vector<double> sigma(n + 1, 0.0);
  for (int i = 0; i < n; ++i) sigma[i + 1] = sigma[i] + cell[i];

  LCPath lc;
  lc.S = sigma[n];
  lc.branch = branch;
  lc.centre = c;
  lc.source_tau.resize(n + 1);
  for (int i = 0; i <= n; ++i) lc.source_tau[i] = sigma[i] / lc.S;
  lc.source_tau.back() = 1.0;

  // Square roots on the source nodes.
  std::vector<Complex> w(n + 1);
  w[0] = double(branch) * std::sqrt(z[0]);
  for (int i = 1; i <= n; ++i) {
    if (rho[i] == 0.0) {
      w[i] = 0.0;
      continue;
    }
    const Complex r = std::sqrt(z[i]);
    const bool near = rho[i - 1] == 0.0 || segment_distance(z[i - 1], z[i]) < 0.5 * std::max(rho[i - 1], rho[i]);
    if (near && i >= 2) {
      const double ratio =
          (lc.source_tau[i] - lc.source_tau[i - 1]) / (lc.source_tau[i - 1] - lc.source_tau[i - 2]);
      const Complex predicted = w[i - 1] + (w[i - 1] - w[i - 2]) * ratio;
      w[i] = std::abs(r - predicted) <= std::abs(-r - predicted) ? r : -r;
      continue;
    }
    w[i] = std::abs(r - w[i - 1]) <= std::abs(-r - w[i - 1]) ? r : -r;
    if (!near && std::abs(std::arg(w[i] / w[i - 1])) > 0.5 * std::numbers::pi)
      throw Error(ErrorCode::branch_discontinuity, "square-root branch turns by more than pi/2 between nodes");
  }

  lc.w.resize(n + 1);
  if (n >= 3) {
    const Spline spline(lc.source_tau, w);
    for (int j = 0; j <= n; ++j) lc.w[j] = spline(double(j) / n);
  } else {
    for (int j = 0; j <= n; ++j) lc.w[j] = interpolate(lc.source_tau, w, double(j) / n);
  }
  lc.w.front() = w.front();
  lc.w.back() = w.back();
  return lc;
}

namespace {

std::vector<double> cumulative_time(const LCPath& lc) {
  const int n = lc.segments();
  std::vector<double> g(n + 1);
  for (int j = 0; j <= n; ++j) g[j] = lc.S * std::norm(lc.w[j]);
  const auto cells = cell_integrals(g, 1.0 / n);
  std::vector<double> t(n + 1, 0.0);
  for (int j = 0; j < n; ++j) t[j + 1] = t[j] + cells[j];
  return t;
}

}  // namespace

double lc_total_time(const LCPath& lc) {
  if (lc.segments() < 1) throw Error(ErrorCode::invalid_argument, "LC path needs at least one segment");
  return cumulative_time(lc).back();
}

double lc_tau_at(const LCPath& lc, double t) {
  const int n = static_cast<int>(lc.source_tau.size()) - 1;
  if (n < 1) throw Error(ErrorCode::invalid_argument, "LC path carries no source grid");
  const double x = std::clamp(t, 0.0, 1.0) * n;
  const int k = std::min(static_cast<int>(std::floor(x)), n - 1);
  const double f = x - k;
  return (1.0 - f) * lc.source_tau[k] + f * lc.source_tau[k + 1];
}

DiscretePath from_lc(const LCPath& lc) {
  const int n = lc.segments();
  if (n < 1) throw Error(ErrorCode::invalid_argument, "LC path needs at least one segment");
  const std::vector<double> t = cumulative_time(lc);
  const double total = t.back();
  std::vector<double> tau(n + 1);
  for (int j = 0; j <= n; ++j) tau[j] = double(j) / n;

  std::vector<Vec3> nodes(n + 1);
  auto place = [&](Complex w) {
    const Complex u = w * w;
    return Vec3(lc.centre.x() + u.real(), lc.centre.y() + u.imag(), 0.0);
  };
  nodes.front() = place(lc.w.front());
  nodes.back() = place(lc.w.back());
  std::size_t k = 0;
  for (int i = 1; i < n; ++i) {
    const double target = total * i / n;
    while (k + 1 < t.size() && t[k + 1] < target) ++k;
    // Bisection on the cubic interpolant of t(tau) within the bracketing cell.
    double lo = tau[k], hi = tau[std::min<std::size_t>(k + 1, n)];
    for (int it = 0; it < 200 && hi - lo > 1e-16; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (interpolate(tau, t, mid) < target) lo = mid;
      else hi = mid;
    }
    nodes[i] = place(interpolate(tau, lc.w, 0.5 * (lo + hi)));
  }
  return DiscretePath(Mode::planar, std::move(nodes));
}

LCFunctional regularized_maupertuis(const LCPath& lc, const PotentialSpec& spec, double h, int centre) {
  check_centre(spec, centre);
  const int n = lc.segments();
  if (n < 1) throw Error(ErrorCode::invalid_argument, "LC path needs at least one segment");
  const PotentialSpec rest = spec.without_centre(static_cast<std::size_t>(centre));
  const double m = spec.centre(static_cast<std::size_t>(centre)).mass;
  const double dtau = 1.0 / n;
  auto integrand = [&](Complex w) {
    const Complex u = w * w;
    const Vec3 q(lc.centre.x() + u.real(), lc.centre.y() + u.imag(), 0.0);
    return m + (evaluate(rest, q) + h) * std::norm(w);
  };
  LCFunctional f;
  if (n < 4) {
    // Too short for the five-point stencils: forward differences, midpoints.
    for (int j = 0; j < n; ++j) {
      f.kinetic += std::norm(lc.w[j + 1] - lc.w[j]) * n;
      f.potential += integrand(0.5 * (lc.w[j] + lc.w[j + 1])) * dtau;
    }
  } else {
    // Fourth order throughout: five-point derivatives, cubic cell rule.
    std::vector<double> speed2(n + 1), pot(n + 1);
    const auto& w = lc.w;
    for (int j = 0; j <= n; ++j) {
      Complex d;
      if (j == 0) d = -25.0 * w[0] + 48.0 * w[1] - 36.0 * w[2] + 16.0 * w[3] - 3.0 * w[4];
      else if (j == 1) d = -3.0 * w[0] - 10.0 * w[1] + 18.0 * w[2] - 6.0 * w[3] + w[4];
      else if (j == n - 1) d = 3.0 * w[n] + 10.0 * w[n - 1] - 18.0 * w[n - 2] + 6.0 * w[n - 3] - w[n - 4];
      else if (j == n) d = 25.0 * w[n] - 48.0 * w[n - 1] + 36.0 * w[n - 2] - 16.0 * w[n - 3] + 3.0 * w[n - 4];
      else d = w[j - 2] - 8.0 * w[j - 1] + 8.0 * w[j + 1] - w[j + 2];
      speed2[j] = std::norm(d / (12.0 * dtau));
      pot[j] = integrand(w[j]);
    }
    for (double c : cell_integrals(speed2, dtau)) f.kinetic += c;
    for (double c : cell_integrals(pot, dtau)) f.potential += c;
  }
  f.value = 4.0 * f.kinetic * f.potential;
  f.omega_sq = f.kinetic > 0.0 ? f.potential / (0.5 * f.kinetic) : 0.0;
  return f;
}

namespace {

template <class Fn>
void for_each_residual(const LCPath& lc, double omega_sq, const PotentialSpec& spec, double h, int centre,
                       LCForm form, Fn&& fn) {
  check_centre(spec, centre);
  const int n = lc.segments();
  const PotentialSpec rest = spec.without_centre(static_cast<std::size_t>(centre));
  const double n2 = double(n) * n;
  for (int j = 1; j < n; ++j) {
    const Complex lhs = omega_sq * (lc.w[j + 1] - 2.0 * lc.w[j] + lc.w[j - 1]) * n2;
    Complex rhs = composite_gradient(rest, lc.centre, lc.w[j], h);
    if (form == LCForm::displayed) rhs -= 2.0 * lc.w[j];
    fn(lhs, rhs);
  }
}

}  // namespace

std::vector<double> lc_ode_residual(const LCPath& lc, double omega_tilde_sq, const PotentialSpec& spec, double h,
                                    int centre, LCForm form) {
  std::vector<double> out;
  for_each_residual(lc, omega_tilde_sq, spec, h, centre, form,
                    [&](Complex lhs, Complex rhs) { out.push_back(std::abs(lhs - rhs)); });
  return out;
}

double lc_ode_scale(const LCPath& lc, double omega_tilde_sq, const PotentialSpec& spec, double h, int centre,
                    LCForm form) {
  double s = 0.0;
  for_each_residual(lc, omega_tilde_sq, spec, h, centre, form,
                    [&](Complex lhs, Complex rhs) { s = std::max({s, std::abs(lhs), std::abs(rhs)}); });
  return s;
}

double lc_symmetry_defect(const LCPath& lc, double tau1) {
  const int n = lc.segments();
  if (n < 1) throw Error(ErrorCode::invalid_argument, "LC path needs at least one segment");
  if (!(tau1 >= 0.0 && tau1 <= 1.0)) throw Error(ErrorCode::invalid_argument, "tau1 must lie in [0, 1]");
  double wmax = 0.0;
  for (const auto& w : lc.w) wmax = std::max(wmax, std::abs(w));
  if (wmax == 0.0) return 0.0;
  auto sample = [&](double tau) {
    const double x = tau * n;
    const int k = std::clamp(static_cast<int>(std::floor(x)), 0, n - 1);
    const double f = x - k;
    return (1.0 - f) * lc.w[k] + f * lc.w[k + 1];
  };
  double worst = 0.0;
  for (int j = 0; j <= n; ++j) {
    const double tau = double(j) / n;
    if (tau < tau1) continue;
    const double mirror = 2.0 * tau1 - tau;
    if (mirror < 0.0) break;
    worst = std::max(worst, std::abs(lc.w[j] + sample(mirror)));
  }
  return worst / wmax;
}

bool lc_symmetry_check(const LCPath& lc, double tau1, double tol) { return lc_symmetry_defect(lc, tau1) <= tol; }

LCDiagnostics lc_diagnostics(const DiscretePath& path, const PotentialSpec& spec, double h, int centre) {
  const LCPath lc = to_lc(path, spec, centre);
  const DiscretePath back = from_lc(lc);
  LCDiagnostics d;
  d.S = lc.S;
  for (int i = 0; i <= path.segments(); ++i)
    d.max_roundtrip_error = std::max(d.max_roundtrip_error, (back.node(i) - path.node(i)).norm());
  d.Mh = maupertuis(path, spec, h, 0.0).value;
  d.Mtilde = regularized_maupertuis(lc, spec, h, centre).value;
  d.ratio = d.Mh != 0.0 ? d.Mtilde / d.Mh : 0.0;
  d.total_time = lc_total_time(lc);
  return d;
}

nlohmann::json to_json(const LCDiagnostics& d) {
  return {{"S", d.S},
          {"max_roundtrip_error", d.max_roundtrip_error},
          {"Mh", d.Mh},
          {"Mtilde", d.Mtilde},
          {"ratio", d.ratio},
          {"total_time", d.total_time}};
}

}  // namespace ncentre
