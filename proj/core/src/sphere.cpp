#include "thurston/sphere.hpp"

#include <cmath>
#include <stdexcept>

#include "thurston/error.hpp"

namespace thurston {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::UnsupportedPortrait: return "UnsupportedPortrait";
    case ErrorCode::UntaggedInfiniteTail: return "UntaggedInfiniteTail";
    case ErrorCode::InconsistentTag: return "InconsistentTag";
    case ErrorCode::NotStable: return "NotStable";
    case ErrorCode::NewtonDivergence: return "NewtonDivergence";
    case ErrorCode::DegenerateConfiguration: return "DegenerateConfiguration";
    case ErrorCode::BranchCollision: return "BranchCollision";
    case ErrorCode::RootFindingFailure: return "RootFindingFailure";
    case ErrorCode::LabelMismatch: return "LabelMismatch";
    case ErrorCode::EvaluationFailure: return "EvaluationFailure";
    case ErrorCode::PoleSeparationTooSmall: return "PoleSeparationTooSmall";
    case ErrorCode::ContourQuadratureNonConvergent: return "ContourQuadratureNonConvergent";
    case ErrorCode::QuadratureBudgetExceeded: return "QuadratureBudgetExceeded";
    case ErrorCode::PoleInsideAnnulus: return "PoleInsideAnnulus";
    case ErrorCode::NoAnnulusFound: return "NoAnnulusFound";
    case ErrorCode::MultiplierMismatch: return "MultiplierMismatch";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::NoAdmissibleRadius: return "NoAdmissibleRadius";
    case ErrorCode::AuditPreconditionFailed: return "AuditPreconditionFailed";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

bool SpherePoint::operator==(const SpherePoint& other) const {
  if (at_infinity || other.at_infinity) return at_infinity == other.at_infinity;
  return z == other.z;
}

std::ostream& operator<<(std::ostream& os, const SpherePoint& p) {
  if (p.at_infinity) return os << "inf";
  return os << p.z;
}

double chordal_distance(const SpherePoint& a, const SpherePoint& b) {
  if (a.at_infinity && b.at_infinity) return 0.0;
  if (a.at_infinity) return 2.0 / std::sqrt(1.0 + std::norm(b.z));
  if (b.at_infinity) return 2.0 / std::sqrt(1.0 + std::norm(a.z));
  return 2.0 * std::abs(a.z - b.z) / std::sqrt((1.0 + std::norm(a.z)) * (1.0 + std::norm(b.z)));
}

Mobius::Mobius(Complex a, Complex b, Complex c, Complex d) : a_(a), b_(b), c_(c), d_(d) {
  if (a * d - b * c == Complex(0.0)) {
    throw Error(ErrorCode::InvalidArgument, "singular Möbius matrix");
  }
}

Mobius Mobius::normalizing(const SpherePoint& p0, const SpherePoint& p1, const SpherePoint& pinf) {
  if (p0 == p1 || p0 == pinf || p1 == pinf) {
    throw Error(ErrorCode::DegenerateConfiguration, "normalizing points are not distinct");
  }
  if (pinf.at_infinity) {
    return Mobius(1.0, -p0.z, 0.0, p1.z - p0.z);
  }
  if (p0.at_infinity) {
    return Mobius(0.0, p1.z - pinf.z, 1.0, -pinf.z);
  }
  if (p1.at_infinity) {
    return Mobius(1.0, -p0.z, 1.0, -pinf.z);
  }
  const Complex s = p1.z - pinf.z;
  const Complex t = p1.z - p0.z;
  return Mobius(s, -p0.z * s, t, -pinf.z * t);
}

SpherePoint Mobius::apply(const SpherePoint& p) const {
  Complex num, den;
  if (p.at_infinity) {
    num = a_;
    den = c_;
  } else {
    num = a_ * p.z + b_;
    den = c_ * p.z + d_;
  }
  if (den == Complex(0.0)) return SpherePoint::infinity();
  return SpherePoint(num / den);
}

Mobius Mobius::inverse() const { return Mobius(d_, -b_, -c_, a_); }

Mobius Mobius::compose(const Mobius& o) const {
  return Mobius(a_ * o.a_ + b_ * o.c_, a_ * o.b_ + b_ * o.d_, c_ * o.a_ + d_ * o.c_,
                c_ * o.b_ + d_ * o.d_);
}

Complex Mobius::derivative(Complex z) const {
  const Complex den = c_ * z + d_;
  return (a_ * d_ - b_ * c_) / (den * den);
}

}  // namespace thurston
