#include "thurston/curves.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "thurston/error.hpp"
#include "thurston/json_io.hpp"

namespace thurston {

using json_io::json;

std::vector<std::string> validate_curve_system(const CurveSystem& cs, std::optional<int> cover_degree) {
  std::vector<std::string> problems;
  std::set<std::string> names(cs.curves.begin(), cs.curves.end());
  if (names.size() != cs.curves.size()) problems.push_back("curve labels are not distinct");
  if (cs.components.size() != cs.curves.size()) problems.push_back("component table size differs from curve count");
  for (std::size_t j = 0; j < cs.components.size(); ++j) {
    long total = 0;
    for (const auto& c : cs.components[j]) {
      if (c.degree < 1) problems.push_back("component of preimage of '" + cs.curves[j] + "' has degree < 1");
      if (c.kind == TargetKind::Curve && c.curve >= cs.curves.size()) {
        problems.push_back("component of preimage of '" + cs.curves[j] + "' targets an unknown curve");
      }
      total += c.degree;
    }
    if (cover_degree && total > *cover_degree) {
      problems.push_back("preimage degrees of '" + cs.curves[j] + "' exceed the cover degree");
    }
  }
  return problems;
}

TransitionMatrix::TransitionMatrix(std::initializer_list<std::initializer_list<Rational>> rows)
    : n_(rows.size()), a_() {
  a_.reserve(n_ * n_);
  for (const auto& r : rows) {
    if (r.size() != n_) throw Error(ErrorCode::InvalidArgument, "transition matrix must be square");
    a_.insert(a_.end(), r.begin(), r.end());
  }
}

TransitionMatrix TransitionMatrix::operator*(const TransitionMatrix& o) const {
  TransitionMatrix r(n_);
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t k = 0; k < n_; ++k) {
      const Rational& aik = (*this)(i, k);
      if (aik == 0) continue;
      for (std::size_t j = 0; j < n_; ++j) r(i, j) += aik * o(k, j);
    }
  return r;
}

Rational TransitionMatrix::max_column_sum() const {
  Rational best(0);
  for (std::size_t j = 0; j < n_; ++j) {
    Rational s(0);
    for (std::size_t i = 0; i < n_; ++i) s += (*this)(i, j);
    if (s > best) best = s;
  }
  return best;
}

std::string TransitionMatrix::to_string() const {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < n_; ++i) {
    os << (i ? ", [" : "[");
    for (std::size_t j = 0; j < n_; ++j) os << (j ? ", " : "") << (*this)(i, j).get_str();
    os << "]";
  }
  os << "]";
  return os.str();
}

TransitionMatrix transition_matrix(const CurveSystem& cs) {
  TransitionMatrix a(cs.size());
  for (std::size_t j = 0; j < cs.components.size(); ++j)
    for (const auto& c : cs.components[j])
      if (c.kind == TargetKind::Curve) a(c.curve, j) += Rational(1, c.degree);
  return a;
}

bool stability_check(const CurveSystem& cs) {
  for (const auto& list : cs.components)
    for (const auto& c : list)
      if (c.kind == TargetKind::Outside) return false;
  return true;
}

namespace {

using LongVec = std::vector<long double>;

Rational exact(long double x) {
  const double hi = static_cast<double>(x);
  const double lo = static_cast<double>(x - static_cast<long double>(hi));
  return Rational(hi) + Rational(lo);
}

std::vector<Rational> apply(const TransitionMatrix& a, const std::vector<Rational>& x) {
  const std::size_t n = a.size();
  std::vector<Rational> y(n, Rational(0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (a(i, j) != 0 && x[j] != 0) y[i] += a(i, j) * x[j];
  return y;
}

// Lower Collatz-Wielandt bound on the support of a nonnegative vector.
std::optional<Rational> lower_bound(const TransitionMatrix& a, const std::vector<Rational>& x) {
  const auto y = apply(a, x);
  std::optional<Rational> best;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] <= 0) continue;
    Rational r = y[i] / x[i];
    if (!best || r < *best) best = r;
  }
  return best;
}

// Upper Collatz-Wielandt bound; requires a strictly positive vector.
Rational upper_bound(const TransitionMatrix& a, const std::vector<Rational>& x) {
  const auto y = apply(a, x);
  Rational best(0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    Rational r = y[i] / x[i];
    if (r > best) best = r;
  }
  return best;
}

LongVec eigen_perron_vector(const TransitionMatrix& a, double& rho_estimate) {
  const auto n = static_cast<Eigen::Index>(a.size());
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = a(static_cast<std::size_t>(i), static_cast<std::size_t>(j)).get_d();
  Eigen::EigenSolver<Eigen::MatrixXd> es(m, true);
  Eigen::Index best = 0;
  for (Eigen::Index k = 1; k < n; ++k)
    if (es.eigenvalues()[k].real() > es.eigenvalues()[best].real()) best = k;
  rho_estimate = std::max(0.0, es.eigenvalues()[best].real());
  Eigen::VectorXcd v = es.eigenvectors().col(best);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) sum += v[i].real();
  LongVec out(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    const double x = (sum < 0 ? -1.0 : 1.0) * v[i].real();
    out[static_cast<std::size_t>(i)] = std::isfinite(x) ? std::max(0.0, x) : 0.0;
  }
  return out;
}

LongVec refine_by_power_iteration(const TransitionMatrix& a, LongVec v, long double shift, int steps) {
  const std::size_t n = a.size();
  std::vector<long double> dense(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) dense[i * n + j] = static_cast<long double>(a(i, j).get_d());
  for (int s = 0; s < steps; ++s) {
    LongVec w(n, 0.0L);
    long double norm = 0.0L;
    for (std::size_t i = 0; i < n; ++i) {
      long double acc = shift * v[i];
      for (std::size_t j = 0; j < n; ++j) acc += dense[i * n + j] * v[j];
      w[i] = acc;
      norm = std::max(norm, std::fabs(acc));
    }
    if (norm == 0.0L) break;
    for (auto& x : w) x /= norm;
    v = std::move(w);
  }
  return v;
}

}  // namespace

PerronEnclosure leading_eigenvalue(const TransitionMatrix& a, const Rational& tol) {
  if (tol <= 0) throw Error(ErrorCode::InvalidArgument, "tolerance must be positive");
  const std::size_t n = a.size();
  if (n == 0) return {Rational(0), Rational(0)};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (a(i, j) < 0) throw Error(ErrorCode::InvalidArgument, "matrix has a negative entry");

  double rho = 0.0;
  const LongVec v0 = eigen_perron_vector(a, rho);
  // The shift eps*I only accelerates the iteration; it cancels in every ratio below.
  const long double shift = rho > 0.0 ? static_cast<long double>(rho) : 1.0L;
  std::vector<LongVec> candidates{v0, refine_by_power_iteration(a, v0, shift, 60)};

  std::optional<Rational> lo;
  std::optional<Rational> hi;
  for (const auto& v : candidates) {
    long double vmax = 0.0L;
    for (const auto x : v) vmax = std::max(vmax, x);
    if (vmax <= 0.0L) continue;
    for (const long double tau : {0.0L, 1e-15L, 1e-12L, 1e-9L, 1e-6L}) {
      std::vector<Rational> x(n, Rational(0));
      bool any = false;
      for (std::size_t i = 0; i < n; ++i)
        if (v[i] > tau * vmax) {
          x[i] = exact(v[i] / vmax);
          any = any || x[i] > 0;
        }
      if (!any) continue;
      if (auto l = lower_bound(a, x); l && (!lo || *l > *lo)) lo = l;
    }
    for (const long double delta : {1e-18L, 1e-15L, 1e-12L, 1e-9L, 1e-6L, 1e-3L}) {
      std::vector<Rational> x(n);
      for (std::size_t i = 0; i < n; ++i) x[i] = exact(std::max(v[i] / vmax, delta));
      Rational u = upper_bound(a, x);
      if (!hi || u < *hi) hi = u;
    }
  }
  if (!lo) lo = Rational(0);
  if (!hi) {
    std::vector<Rational> ones(n, Rational(1));
    hi = upper_bound(a, ones);
  }
  if (*lo < 0) lo = Rational(0);
  return {*lo, *hi};
}

std::vector<Rational> characteristic_polynomial(const TransitionMatrix& a) {
  // Faddeev-LeVerrier: M_k = A M_{k-1} + c_{n-k+1} I, c_{n-k} = -tr(A M_k) / k.
  const std::size_t n = a.size();
  std::vector<Rational> c(n + 1, Rational(0));
  c[n] = 1;
  TransitionMatrix m(n);
  for (std::size_t k = 1; k <= n; ++k) {
    TransitionMatrix next = a * m;
    for (std::size_t i = 0; i < n; ++i) next(i, i) += c[n - k + 1];
    m = std::move(next);
    const TransitionMatrix am = a * m;
    Rational tr(0);
    for (std::size_t i = 0; i < n; ++i) tr += am(i, i);
    c[n - k] = -tr / Rational(static_cast<long>(k));
  }
  return c;
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Obstructed: return "Obstructed";
    case Verdict::Unobstructed: return "Unobstructed";
    case Verdict::Undecided: return "Undecided";
  }
  return "Undecided";
}

ObstructionResult classify_matrix(const TransitionMatrix& a, const Rational& tol) {
  ObstructionResult r;
  r.matrix = a;
  r.enclosure = leading_eigenvalue(a, tol);
  if (r.enclosure.lo >= 1) {
    r.verdict = Verdict::Obstructed;
  } else if (r.enclosure.hi < 1) {
    r.verdict = Verdict::Unobstructed;
  } else if (a.size() <= 6) {
    const auto c = characteristic_polynomial(a);
    Rational at_one(0);
    for (const auto& ck : c) at_one += ck;
    if (at_one == 0) {
      r.verdict = Verdict::Obstructed;
      r.exact_boundary = true;
    }
  }
  return r;
}

ObstructionResult is_obstruction(const CurveSystem& cs, const Rational& tol) {
  if (!stability_check(cs)) throw Error(ErrorCode::NotStable, "a preimage component is homotopic to a curve outside the system");
  return classify_matrix(transition_matrix(cs), tol);
}

std::optional<int> universal_k(const TransitionMatrix& a, int kmax) {
  if (a.size() == 0) return 1;
  const Rational half(1, 2);
  TransitionMatrix p = a;
  for (int k = 1; k <= kmax; ++k) {
    if (p.max_column_sum() < half) return k;
    p = p * a;
  }
  return std::nullopt;
}

CurveSystem curve_system_from_json(const json& j) {
  json_io::require_only_keys(j, {"curves", "components"}, "curve system");
  CurveSystem cs;
  try {
    std::map<std::string, std::size_t> index;
    for (const auto& name : json_io::require_key(j, "curves", "curve system")) {
      const auto s = name.get<std::string>();
      if (s == "peripheral" || s == "inessential" || s == "outside") {
        throw Error(ErrorCode::ParseError, "curve name '" + s + "' is reserved");
      }
      if (!index.emplace(s, cs.curves.size()).second) throw Error(ErrorCode::ParseError, "duplicate curve '" + s + "'");
      cs.curves.push_back(s);
    }
    cs.components.assign(cs.curves.size(), {});
    if (j.contains("components")) {
      for (const auto& [name, list] : j.at("components").items()) {
        const auto it = index.find(name);
        if (it == index.end()) throw Error(ErrorCode::ParseError, "components given for unknown curve '" + name + "'");
        for (const auto& rec : list) {
          json_io::require_only_keys(rec, {"target", "degree"}, "component");
          ComponentRecord c;
          const auto target = json_io::require_key(rec, "target", "component").get<std::string>();
          c.degree = json_io::require_key(rec, "degree", "component").get<int>();
          if (target == "peripheral") c.kind = TargetKind::Peripheral;
          else if (target == "inessential") c.kind = TargetKind::Inessential;
          else if (target == "outside") c.kind = TargetKind::Outside;
          else {
            const auto t = index.find(target);
            if (t == index.end()) throw Error(ErrorCode::ParseError, "component targets unknown curve '" + target + "'");
            c.kind = TargetKind::Curve;
            c.curve = t->second;
          }
          if (c.degree < 1) throw Error(ErrorCode::ParseError, "component degree must be >= 1");
          cs.components[it->second].push_back(c);
        }
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("curve system: ") + e.what());
  }
  return cs;
}

json curve_system_to_json(const CurveSystem& cs) {
  json comps = json::object();
  for (std::size_t j = 0; j < cs.curves.size(); ++j) {
    json list = json::array();
    for (const auto& c : cs.components[j]) {
      std::string target;
      switch (c.kind) {
        case TargetKind::Curve: target = cs.curves[c.curve]; break;
        case TargetKind::Peripheral: target = "peripheral"; break;
        case TargetKind::Inessential: target = "inessential"; break;
        case TargetKind::Outside: target = "outside"; break;
      }
      list.push_back({{"target", target}, {"degree", c.degree}});
    }
    comps[cs.curves[j]] = list;
  }
  return json{{"curves", cs.curves}, {"components", comps}};
}

json rational_to_json(const Rational& q) { return json{{"exact", q.get_str()}, {"approx", q.get_d()}}; }

}  // namespace thurston
