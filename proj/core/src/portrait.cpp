#include "thurston/portrait.hpp"

#include <algorithm>

#include "thurston/error.hpp"
#include "thurston/json_io.hpp"

namespace thurston {

using json_io::json;

int Portrait::local_degree_of(const Label& l) const {
  const auto it = local_degree.find(l);
  return it == local_degree.end() ? 1 : it->second;
}

const Label& Portrait::image(const Label& l) const {
  const auto it = map.find(l);
  if (it == map.end()) throw Error(ErrorCode::InvalidArgument, "label '" + l + "' has no image");
  return it->second;
}

std::vector<Label> Portrait::critical_labels() const {
  std::vector<Label> out;
  for (const auto& l : marked)
    if (local_degree_of(l) > 1) out.push_back(l);
  return out;
}

const CycleTag* Portrait::tag_of(const Label& l) const {
  for (const auto& t : cycle_tags)
    if (std::find(t.cycle.begin(), t.cycle.end(), l) != t.cycle.end()) return &t;
  return nullptr;
}

bool Portrait::in_attracting_cycle(const Label& l) const {
  const CycleTag* t = tag_of(l);
  return t != nullptr && t->kind == CycleKind::Attracting;
}

bool ValidationReport::has(std::string_view invariant) const {
  return std::any_of(violations.begin(), violations.end(),
                     [&](const Violation& v) { return v.invariant == invariant; });
}

namespace {

// Returns true when `cycle` is exactly one periodic orbit listed in dynamical order.
bool is_ordered_cycle(const Portrait& p, std::span<const Label> cycle) {
  if (cycle.empty()) return false;
  for (std::size_t i = 0; i < cycle.size(); ++i) {
    const auto it = p.map.find(cycle[i]);
    if (it == p.map.end() || it->second != cycle[(i + 1) % cycle.size()]) return false;
  }
  std::set<Label> distinct(cycle.begin(), cycle.end());
  return distinct.size() == cycle.size();
}

int degree_product(const Portrait& p, std::span<const Label> cycle) {
  int prod = 1;
  for (const auto& l : cycle) prod *= p.local_degree_of(l);
  return prod;
}

}  // namespace

ValidationReport validate(const Portrait& p) {
  ValidationReport report;
  auto add = [&](std::string inv, std::vector<Label> labels) {
    report.violations.push_back({std::move(inv), std::move(labels)});
  };

  if (p.degree < 2) add("degree must be at least 2", {});

  for (const auto& [l, d] : p.local_degree) {
    if (!p.marked.count(l)) add("local degree given for unmarked label", {l});
    if (d < 1 || d > p.degree) add("local degree out of range", {l});
  }

  int rh = 0;
  for (const auto& l : p.marked) rh += p.local_degree_of(l) - 1;
  if (rh != 2 * p.degree - 2) add("Riemann-Hurwitz violated", {});

  std::vector<Label> not_invariant;
  for (const auto& l : p.marked) {
    const auto it = p.map.find(l);
    if (it == p.map.end() || !p.marked.count(it->second)) not_invariant.push_back(l);
  }
  for (const auto& [l, img] : p.map)
    if (!p.marked.count(l)) not_invariant.push_back(l);
  if (!not_invariant.empty()) add("not forward invariant", not_invariant);

  std::map<Label, int> fibre;
  for (const auto& [l, img] : p.map) fibre[img] += p.local_degree_of(l);
  // An attracting-cycle label stands for a disk; a critical point captured by that disk shares
  // its preimage component, so the pointwise count does not apply there.
  for (const auto& [img, total] : fibre)
    if (total > p.degree && !p.in_attracting_cycle(img)) add("fibre exceeds degree", {img});

  std::set<Label> tagged;
  for (const auto& t : p.cycle_tags) {
    if (!is_ordered_cycle(p, t.cycle)) {
      add("tagged labels are not a periodic cycle", t.cycle);
      continue;
    }
    for (const auto& l : t.cycle) {
      if (!tagged.insert(l).second) add("label tagged twice", {l});
    }
    const int prod = degree_product(p, t.cycle);
    if (t.kind == CycleKind::Attracting) {
      const double m = std::abs(t.lambda);
      if (!(m > 0.0 && m < 1.0)) add("attracting multiplier must satisfy 0 < |lambda| < 1", t.cycle);
      if (prod != 1) add("InconsistentTag", t.cycle);
    } else if (t.kind == CycleKind::Superattracting) {
      if (prod < 2) add("InconsistentTag", t.cycle);
    }
  }

  std::set<Label> anchors(p.anchors.begin(), p.anchors.end());
  if (anchors.size() != 3) add("anchors must be distinct", {p.anchors.begin(), p.anchors.end()});
  for (const auto& a : p.anchors) {
    if (!p.marked.count(a)) add("anchor is not marked", {a});
    else if (p.in_attracting_cycle(a)) add("anchor lies on an attracting cycle", {a});
  }
  return report;
}

PostcriticalPartition partition_postcritical(const Portrait& p) {
  PostcriticalPartition out;
  std::set<Label> in_cycles;
  for (const auto& t : p.cycle_tags) {
    if (t.kind == CycleKind::Untagged) continue;
    out.cycles.push_back(t.cycle);
    in_cycles.insert(t.cycle.begin(), t.cycle.end());
  }
  for (const auto& c : p.critical_labels()) {
    std::set<Label> seen;
    const auto first = p.map.find(c);
    if (first == p.map.end()) {
      throw Error(ErrorCode::UntaggedInfiniteTail, "critical orbit of '" + c + "' leaves the marked set");
    }
    Label cur = first->second;
    while (seen.insert(cur).second) {
      if (!in_cycles.count(cur)) out.p1.insert(cur);
      const auto it = p.map.find(cur);
      if (it == p.map.end() || !p.marked.count(it->second)) {
        throw Error(ErrorCode::UntaggedInfiniteTail, "critical orbit of '" + c + "' leaves the marked set");
      }
      cur = it->second;
    }
  }
  return out;
}

CycleClass classify_cycle(const Portrait& p, std::span<const Label> cycle) {
  if (cycle.empty()) throw Error(ErrorCode::InvalidArgument, "empty cycle");
  std::vector<Label> ordered{cycle[0]};
  for (std::size_t i = 1; i < cycle.size(); ++i) ordered.push_back(p.image(ordered.back()));
  std::set<Label> given(cycle.begin(), cycle.end());
  std::set<Label> walked(ordered.begin(), ordered.end());
  if (given != walked || p.image(ordered.back()) != ordered.front() || given.size() != cycle.size()) {
    throw Error(ErrorCode::InvalidArgument, "labels do not form a periodic cycle");
  }
  const CycleTag* tag = p.tag_of(ordered.front());
  if (tag == nullptr || tag->kind == CycleKind::Untagged) return {};
  const int prod = degree_product(p, ordered);
  if (tag->kind == CycleKind::Attracting && prod != 1) {
    throw Error(ErrorCode::InconsistentTag, "attracting tag on a cycle with degree product " + std::to_string(prod));
  }
  if (tag->kind == CycleKind::Superattracting && prod < 2) {
    throw Error(ErrorCode::InconsistentTag, "superattracting tag on an unbranched cycle");
  }
  return {tag->kind, tag->lambda};
}

Portrait portrait_from_json(const json& j) {
  constexpr std::string_view ctx = "portrait";
  json_io::require_only_keys(j, {"degree", "marked", "map", "local_degree", "cycle_tags", "anchors"}, ctx);
  Portrait p;
  try {
    p.degree = json_io::require_key(j, "degree", ctx).get<int>();
    for (const auto& l : json_io::require_key(j, "marked", ctx)) p.marked.insert(l.get<std::string>());
    for (const auto& [k, v] : json_io::require_key(j, "map", ctx).items()) p.map[k] = v.get<std::string>();
    if (j.contains("local_degree")) {
      for (const auto& [k, v] : j.at("local_degree").items()) p.local_degree[k] = v.get<int>();
    }
    if (j.contains("cycle_tags")) {
      for (const auto& t : j.at("cycle_tags")) {
        json_io::require_only_keys(t, {"cycle", "tag", "lambda"}, "cycle_tags entry");
        CycleTag tag;
        for (const auto& l : json_io::require_key(t, "cycle", "cycle_tags entry")) tag.cycle.push_back(l.get<std::string>());
        const auto kind = json_io::require_key(t, "tag", "cycle_tags entry").get<std::string>();
        if (kind == "attracting") {
          tag.kind = CycleKind::Attracting;
          tag.lambda = json_io::complex_from_json(json_io::require_key(t, "lambda", "attracting tag"));
        } else if (kind == "superattracting") {
          tag.kind = CycleKind::Superattracting;
          if (t.contains("lambda")) throw Error(ErrorCode::ParseError, "superattracting tag carries no multiplier");
        } else {
          throw Error(ErrorCode::ParseError, "unknown cycle tag '" + kind + "'");
        }
        p.cycle_tags.push_back(std::move(tag));
      }
    }
    const auto& anchors = json_io::require_key(j, "anchors", ctx);
    if (!anchors.is_array() || anchors.size() != 3) throw Error(ErrorCode::ParseError, "anchors must list three labels");
    for (std::size_t i = 0; i < 3; ++i) p.anchors[i] = anchors[i].get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("portrait: ") + e.what());
  }
  return p;
}

json portrait_to_json(const Portrait& p) {
  json tags = json::array();
  for (const auto& t : p.cycle_tags) {
    json e{{"cycle", t.cycle}};
    if (t.kind == CycleKind::Attracting) {
      e["tag"] = "attracting";
      e["lambda"] = json_io::complex_to_json(t.lambda);
    } else if (t.kind == CycleKind::Superattracting) {
      e["tag"] = "superattracting";
    } else {
      continue;
    }
    tags.push_back(std::move(e));
  }
  return json{{"degree", p.degree},
              {"marked", p.marked},
              {"map", p.map},
              {"local_degree", p.local_degree},
              {"cycle_tags", tags},
              {"anchors", p.anchors}};
}

}  // namespace thurston
