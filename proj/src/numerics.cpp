#include "nlspde/numerics.hpp"

#include "nlspde/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>
#include <sstream>
#include <vector>

namespace nlspde {

namespace {

// Kronrod 15-point nodes/weights and the embedded 7-point Gauss weights (QUADPACK qk15).
constexpr std::array<double, 8> kXgk{0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                                     0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                                     0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                                     0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWgk{0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                                     0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                                     0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                                     0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg{0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                                    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double a;
  double b;
  double value;
  double error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

template <typename F>
Segment kronrod(F&& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(c);
  double kron = fc * kWgk[7];
  double gauss = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    const double s = f(c - dx) + f(c + dx);
    kron += kWgk[j] * s;
    if (j % 2 == 1) gauss += kWg[j / 2] * s;
  }
  return {a, b, kron * half, std::abs((kron - gauss) * half)};
}

}  // namespace

IntegralResult improper_integral(const ScalarFunction& g, double b, double tol) {
  IntegralResult result;
  auto inverse = [&](double s) {
    const double v = g(s);
    ++result.evaluations;
    if (std::isnan(v)) throw ModelError("integrand denominator is NaN");
    if (!(v > 0.0)) {
      std::ostringstream msg;
      msg << "integrand denominator must be positive on [b, inf); g(" << s << ") = " << v;
      throw ModelError(msg.str());
    }
    return 1.0 / v;  // g = +inf gives 0
  };

  // Tail test on s/g(s) at s - b = 2^k, k = 0..100.
  std::vector<double> tail;
  for (int k = 0; k <= 100; ++k) {
    const double r = std::ldexp(1.0, k);
    tail.push_back(r * inverse(b + r));
  }
  const double last = tail.back();
  const double earlier = tail[tail.size() - 11];
  if (last > 0.0 && last >= 0.7 * earlier) {
    result.divergent = true;
    result.value = std::numeric_limits<double>::infinity();
    return result;
  }

  // s = b + beta (e^x - 1), x = r / (1 - r): algebraic tails become exponential in x,
  // so the mapped integrand vanishes smoothly at r = 1.
  const double beta = std::max(std::abs(b), 1.0);
  auto mapped = [&](double r) {
    if (r >= 1.0) return 0.0;
    const double one_minus = 1.0 - r;
    const double x = r / one_minus;
    const double jac = beta * std::exp(x) / (one_minus * one_minus);
    if (!std::isfinite(jac)) return 0.0;
    const double v = inverse(b + beta * std::expm1(x)) * jac;
    return std::isfinite(v) ? v : 0.0;
  };

  std::priority_queue<Segment> work;
  double total = 0.0;
  double error = 0.0;
  // Initial split concentrates resolution near r = 1 where the map stretches.
  const std::array<double, 6> breaks{0.0, 0.5, 0.75, 0.9, 0.99, 1.0};
  for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
    Segment s = kronrod(mapped, breaks[k], breaks[k + 1]);
    total += s.value;
    error += s.error;
    work.push(s);
  }
  int iterations = 0;
  constexpr int max_iterations = 5000;
  while (error > std::max(tol * std::abs(total), 1e-300) && iterations < max_iterations) {
    Segment worst = work.top();
    work.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      work.push(worst);
      break;
    }
    Segment left = kronrod(mapped, worst.a, mid);
    Segment right = kronrod(mapped, mid, worst.b);
    total += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    work.push(left);
    work.push(right);
    ++iterations;
  }
  // Recompute sums to shed accumulated cancellation error.
  total = 0.0;
  error = 0.0;
  while (!work.empty()) {
    total += work.top().value;
    error += work.top().error;
    work.pop();
  }
  result.value = total;
  result.error = error;
  if (error > std::max(tol * std::abs(total), 1e-300) * 10.0 || !std::isfinite(total)) {
    result.divergent = true;
    result.value = std::numeric_limits<double>::infinity();
  }
  return result;
}

std::optional<double> largest_root(const ScalarFunction& h, double search_hi, double rel_tol) {
  if (!(search_hi > 0.0)) throw SolverError("largest_root needs search_hi > 0");
  auto eval = [&](double s) {
    const double v = h(s);
    if (!std::isfinite(v)) {
      std::ostringstream msg;
      msg << "function is not finite at s = " << s;
      throw SolverError(msg.str());
    }
    return v;
  };
  double upper = search_hi;
  double h_upper = eval(upper);
  if (!(h_upper > 0.0)) {
    std::ostringstream msg;
    msg << "function is not positive at search_hi = " << search_hi << "; enlarge the search range";
    throw SolverError(msg.str());
  }

  std::vector<double> grid;
  constexpr int uniform = 4096;
  for (int k = uniform - 1; k >= 1; --k) grid.push_back(search_hi * k / uniform);
  for (int k = 13; k <= 80; ++k) grid.push_back(std::ldexp(search_hi, -k));
  std::sort(grid.begin(), grid.end(), std::greater<>());

  for (double s : grid) {
    const double v = eval(s);
    if (v <= 0.0) {
      if (v == 0.0) return s;
      double lo = s;
      double hi = upper;
      while (hi - lo > rel_tol * hi) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const double hm = eval(mid);
        if (hm == 0.0) return mid;
        (hm > 0.0 ? hi : lo) = mid;
      }
      return 0.5 * (lo + hi);
    }
    upper = s;
  }
  return std::nullopt;
}

double positive_upper_bound(const ScalarFunction& h, double start) {
  double s = std::max(start, 1e-12);
  for (int k = 0; k < 2000; ++k) {
    const double v = h(s);
    if (std::isfinite(v) && v > 0.0) return s;
    s *= 2.0;
    if (!std::isfinite(s)) break;
  }
  throw SolverError("function never becomes positive under doubling");
}

Supremum supremum_above(const ScalarFunction& obj, double lo) {
  Supremum out;
  double span = std::max(1.0, std::abs(lo));
  double prev = obj(lo + span);
  int decreasing = 0;
  int doublings = 0;
  while (decreasing < 3) {
    span *= 2.0;
    const double v = obj(lo + span);
    decreasing = (v < prev) ? decreasing + 1 : 0;
    prev = v;
    if (++doublings > 1000 || !std::isfinite(span)) {
      out.bounded = false;
      out.value = std::numeric_limits<double>::infinity();
      out.search_hi = lo + span;
      return out;
    }
  }
  const double hi = lo + span;
  out.search_hi = hi;

  // Coarse scan (uniform plus geometric towards lo), then golden-section on the best bracket.
  std::vector<double> pts;
  constexpr int uniform = 2048;
  for (int k = 0; k <= uniform; ++k) pts.push_back(lo + span * k / uniform);
  for (int k = 12; k <= 60; ++k) pts.push_back(lo + std::ldexp(span, -k));
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  std::size_t best = 0;
  double best_v = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < pts.size(); ++k) {
    const double v = obj(pts[k]);
    if (v > best_v) {
      best_v = v;
      best = k;
    }
  }
  double a = pts[best > 0 ? best - 1 : 0];
  double b = pts[std::min(best + 1, pts.size() - 1)];
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = obj(c);
  double fd = obj(d);
  for (int it = 0; it < 200 && (b - a) > 1e-14 * std::max(1.0, std::abs(b)); ++it) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = obj(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = obj(d);
    }
  }
  const double x = 0.5 * (a + b);
  const double fx = obj(x);
  out.argmax = fx >= best_v ? x : pts[best];
  out.value = std::max(fx, best_v);
  return out;
}

}  // namespace nlspde
