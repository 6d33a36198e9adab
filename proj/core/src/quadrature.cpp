#include "thurston/quadrature.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <queue>
#include <vector>

#include "thurston/error.hpp"

namespace thurston::quad {

namespace {

// Kronrod 15-point nodes on [-1, 1] (non-negative half); odd indices are the Gauss 7-point nodes.
constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                                       0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Rule {
  std::array<double, 15> x;
  std::array<double, 15> wk;
  std::array<double, 15> wg;  // zero at Kronrod-only nodes
};

Rule make_rule() {
  Rule r{};
  for (int i = 0; i < 7; ++i) {
    r.x[i] = -kXgk[i];
    r.x[14 - i] = kXgk[i];
    r.wk[i] = r.wk[14 - i] = kWgk[i];
    const double g = (i % 2 == 1) ? kWg[i / 2] : 0.0;
    r.wg[i] = r.wg[14 - i] = g;
  }
  r.x[7] = 0.0;
  r.wk[7] = kWgk[7];
  r.wg[7] = kWg[3];
  return r;
}

const Rule& rule() {
  static const Rule r = make_rule();
  return r;
}

struct Cell2 {
  Rect r;
  Complex k;
  double abs_k;
  double err;
};

Cell2 eval_cell(const Integrand2D& f, const Rect& c) {
  const Rule& q = rule();
  const double hx = 0.5 * (c.x1 - c.x0), mx = 0.5 * (c.x1 + c.x0);
  const double hy = 0.5 * (c.y1 - c.y0), my = 0.5 * (c.y1 + c.y0);
  Complex k{0.0}, g{0.0};
  double abs_k = 0.0;
  for (int i = 0; i < 15; ++i) {
    const double x = mx + hx * q.x[i];
    for (int j = 0; j < 15; ++j) {
      const Complex v = f(x, my + hy * q.x[j]);
      const double wk = q.wk[i] * q.wk[j];
      k += wk * v;
      abs_k += wk * std::abs(v);
      g += q.wg[i] * q.wg[j] * v;
    }
  }
  const double area = hx * hy;
  Cell2 out{c, k * area, abs_k * area, std::abs(k - g) * area};
  if (!std::isfinite(out.err) || !std::isfinite(out.abs_k)) {
    throw Error(ErrorCode::EvaluationFailure, "integrand is not finite on a quadrature cell");
  }
  return out;
}

struct Interval {
  double a, b;
  Complex k;
  double abs_k;
  double err;
};

Interval eval_interval(const Integrand1D& f, double a, double b) {
  const Rule& q = rule();
  const double h = 0.5 * (b - a), m = 0.5 * (a + b);
  Complex k{0.0}, g{0.0};
  double abs_k = 0.0;
  for (int i = 0; i < 15; ++i) {
    const Complex v = f(m + h * q.x[i]);
    k += q.wk[i] * v;
    abs_k += q.wk[i] * std::abs(v);
    g += q.wg[i] * v;
  }
  Interval out{a, b, k * h, abs_k * std::abs(h), std::abs(k - g) * std::abs(h)};
  if (!std::isfinite(out.err)) throw Error(ErrorCode::EvaluationFailure, "integrand is not finite on an interval");
  return out;
}

// Generic global-adaptive driver over cells of type C. `split` returns the children of a cell.
template <class C, class Split>
Result drive(std::vector<C> cells, Split split, const Budget& budget) {
  auto cmp = [&cells](std::size_t lhs, std::size_t rhs) {
    if (cells[lhs].err != cells[rhs].err) return cells[lhs].err < cells[rhs].err;
    return lhs > rhs;  // deterministic tie-break: older cells first
  };
  std::priority_queue<std::size_t, std::vector<std::size_t>, decltype(cmp)> heap(cmp);
  std::vector<bool> alive(cells.size(), true);
  double err = 0.0, abs_total = 0.0;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    heap.push(i);
    err += cells[i].err;
    abs_total += cells[i].abs_k;
  }
  int live = static_cast<int>(cells.size());
  while (err > std::max(budget.abs_tol, budget.rel_tol * abs_total)) {
    if (live >= budget.max_cells) {
      throw Error(ErrorCode::QuadratureBudgetExceeded,
                  "estimated error " + std::to_string(err) + " after " + std::to_string(live) + " cells");
    }
    const std::size_t top = heap.top();
    heap.pop();
    alive[top] = false;
    err -= cells[top].err;
    abs_total -= cells[top].abs_k;
    --live;
    for (auto& child : split(cells[top])) {
      err += child.err;
      abs_total += child.abs_k;
      cells.push_back(std::move(child));
      alive.push_back(true);
      heap.push(cells.size() - 1);
      ++live;
    }
    // Periodically resum to keep cancellation from drifting the running totals.
    if (cells.size() % 4096 == 0) {
      err = abs_total = 0.0;
      for (std::size_t i = 0; i < cells.size(); ++i)
        if (alive[i]) {
          err += cells[i].err;
          abs_total += cells[i].abs_k;
        }
    }
  }
  Result r;
  for (std::size_t i = 0; i < cells.size(); ++i)
    if (alive[i]) {
      r.value += cells[i].k;
      r.error += cells[i].err;
    }
  r.cells = live;
  return r;
}

}  // namespace

Result adaptive_2d(const Integrand2D& f, const std::vector<Rect>& domain, const Budget& budget) {
  std::vector<Cell2> cells;
  cells.reserve(domain.size());
  for (const auto& r : domain)
    if (r.x1 > r.x0 && r.y1 > r.y0) cells.push_back(eval_cell(f, r));
  if (cells.empty()) return {};
  auto split = [&f](const Cell2& c) {
    const double mx = 0.5 * (c.r.x0 + c.r.x1), my = 0.5 * (c.r.y0 + c.r.y1);
    return std::array<Cell2, 4>{eval_cell(f, {c.r.x0, mx, c.r.y0, my}), eval_cell(f, {mx, c.r.x1, c.r.y0, my}),
                                eval_cell(f, {c.r.x0, mx, my, c.r.y1}), eval_cell(f, {mx, c.r.x1, my, c.r.y1})};
  };
  return drive(std::move(cells), split, budget);
}

Result adaptive_1d(const Integrand1D& f, double a, double b, const Budget& budget) {
  if (a == b) return {};
  std::vector<Interval> cells;
  const int n0 = 4;
  for (int i = 0; i < n0; ++i) cells.push_back(eval_interval(f, a + (b - a) * i / n0, a + (b - a) * (i + 1) / n0));
  auto split = [&f](const Interval& c) {
    const double m = 0.5 * (c.a + c.b);
    return std::array<Interval, 2>{eval_interval(f, c.a, m), eval_interval(f, m, c.b)};
  };
  return drive(std::move(cells), split, budget);
}

Complex contour_residue(const std::function<Complex(Complex)>& f, Complex center, double radius, double tol,
                        int n0, int n_max) {
  auto trapezoid = [&](int n) {
    Complex s{0.0};
    for (int k = 0; k < n; ++k) {
      const Complex e = std::polar(1.0, 2.0 * std::numbers::pi * k / n);
      s += f(center + radius * e) * e;
    }
    return s * (radius / static_cast<double>(n));
  };
  Complex prev = trapezoid(n0);
  for (int n = 2 * n0; n <= n_max; n *= 2) {
    const Complex cur = trapezoid(n);
    if (!std::isfinite(cur.real()) || !std::isfinite(cur.imag())) break;
    if (std::abs(cur - prev) <= tol) return cur;
    prev = cur;
  }
  throw Error(ErrorCode::ContourQuadratureNonConvergent,
              "trapezoid rule did not settle on a circle of radius " + std::to_string(radius));
}

}  // namespace thurston::quad
