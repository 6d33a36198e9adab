#pragma once

#include <array>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "thurston/sphere.hpp"

namespace thurston {

using Label = std::string;

enum class CycleKind { Untagged, Attracting, Superattracting };

struct CycleTag {
  std::vector<Label> cycle;  // in dynamical order: cycle[i] -> cycle[i+1]
  CycleKind kind = CycleKind::Untagged;
  Complex lambda{0.0};  // multiplier of the first return map; attracting cycles only
};

/// Finite combinatorial model of a geometrically finite branched cover.
///
/// Every critical point is marked, `map` is the action on marked points, and cycles carrying
/// analytic data (attracting multiplier or superattracting) are tagged explicitly. Anchors are
/// the labels placed at 0, 1 and infinity by normalization.
struct Portrait {
  int degree = 2;
  std::set<Label> marked;
  std::map<Label, Label> map;
  std::map<Label, int> local_degree;  // labels absent here have local degree 1
  std::vector<CycleTag> cycle_tags;
  std::array<Label, 3> anchors;

  int local_degree_of(const Label& l) const;
  const Label& image(const Label& l) const;
  std::vector<Label> critical_labels() const;
  /// Tag of the cycle containing `l`, if any.
  const CycleTag* tag_of(const Label& l) const;
  bool in_attracting_cycle(const Label& l) const;
};

struct Violation {
  std::string invariant;
  std::vector<Label> labels;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool passed() const { return violations.empty(); }
  bool has(std::string_view invariant) const;
};

/// Checks every structural invariant; never throws.
ValidationReport validate(const Portrait& p);

struct PostcriticalPartition {
  std::set<Label> p1;
  std::vector<std::vector<Label>> cycles;  // tagged cycles, the model of the accumulation set
};

/// Splits the post-critical marked points into tagged cycles and the finite remainder P1.
PostcriticalPartition partition_postcritical(const Portrait& p);

struct CycleClass {
  CycleKind kind = CycleKind::Untagged;
  Complex lambda{0.0};
};

/// Tag of a periodic cycle, cross-checked against the product of local degrees along it.
CycleClass classify_cycle(const Portrait& p, std::span<const Label> cycle);

Portrait portrait_from_json(const nlohmann::json& j);
nlohmann::json portrait_to_json(const Portrait& p);

}  // namespace thurston
