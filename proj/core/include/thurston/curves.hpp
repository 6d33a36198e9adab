#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <gmpxx.h>
#include <json.hpp>

namespace thurston {

using Rational = mpq_class;

enum class TargetKind { Curve, Peripheral, Inessential, Outside };

/// One component of the preimage of a curve: its homotopy class and mapping degree.
struct ComponentRecord {
  TargetKind kind = TargetKind::Curve;
  std::size_t curve = 0;  // index into CurveSystem::curves when kind == Curve
  int degree = 1;
};

/// A multicurve together with the decomposition of the preimage of each of its curves.
struct CurveSystem {
  std::vector<std::string> curves;
  std::vector<std::vector<ComponentRecord>> components;  // components[j]: pieces of f^{-1}(curve j)

  std::size_t size() const { return curves.size(); }
};

/// Structural problems (empty when valid). With a cover degree, also checks the per-curve degree sum.
std::vector<std::string> validate_curve_system(const CurveSystem& cs, std::optional<int> cover_degree = {});

/// Square matrix of exact nonnegative rationals, row-major.
class TransitionMatrix {
 public:
  TransitionMatrix() = default;
  explicit TransitionMatrix(std::size_t n) : n_(n), a_(n * n, Rational(0)) {}
  TransitionMatrix(std::initializer_list<std::initializer_list<Rational>> rows);

  std::size_t size() const { return n_; }
  Rational& operator()(std::size_t i, std::size_t j) { return a_[i * n_ + j]; }
  const Rational& operator()(std::size_t i, std::size_t j) const { return a_[i * n_ + j]; }

  TransitionMatrix operator*(const TransitionMatrix& o) const;
  bool operator==(const TransitionMatrix& o) const { return n_ == o.n_ && a_ == o.a_; }
  Rational max_column_sum() const;
  std::string to_string() const;

 private:
  std::size_t n_ = 0;
  std::vector<Rational> a_;
};

/// a_ij = sum over components of f^{-1}(curve j) homotopic to curve i of 1/degree.
TransitionMatrix transition_matrix(const CurveSystem& cs);

/// True iff no preimage component is homotopic to a curve outside the system.
bool stability_check(const CurveSystem& cs);

struct PerronEnclosure {
  Rational lo;
  Rational hi;
  Rational width() const { return hi - lo; }
  bool contains(const Rational& x) const { return lo <= x && x <= hi; }
};

/// Certified enclosure of the Perron root by Collatz-Wielandt bounds at a floating Perron vector.
/// The returned width is at most `tol` whenever double precision suffices to resolve the vector.
PerronEnclosure leading_eigenvalue(const TransitionMatrix& a, const Rational& tol);

/// Coefficients c_0..c_n of det(t I - A), exact.
std::vector<Rational> characteristic_polynomial(const TransitionMatrix& a);

enum class Verdict { Obstructed, Unobstructed, Undecided };
std::string to_string(Verdict v);

struct ObstructionResult {
  Verdict verdict = Verdict::Undecided;
  TransitionMatrix matrix;
  PerronEnclosure enclosure;
  bool exact_boundary = false;  // decided by the characteristic polynomial at 1
};

/// Thurston obstruction test: lambda >= 1 is obstructed. Throws NotStable for unstable systems.
ObstructionResult is_obstruction(const CurveSystem& cs, const Rational& tol);
/// Same test on a matrix that is already known to come from a stable system.
ObstructionResult classify_matrix(const TransitionMatrix& a, const Rational& tol);

/// Smallest k <= kmax with max column sum of A^k strictly below 1/2.
std::optional<int> universal_k(const TransitionMatrix& a, int kmax);

CurveSystem curve_system_from_json(const nlohmann::json& j);
nlohmann::json curve_system_to_json(const CurveSystem& cs);

/// Rational as a JSON string "p/q" plus a double approximation.
nlohmann::json rational_to_json(const Rational& q);

}  // namespace thurston
