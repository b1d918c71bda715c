#include "reanalysis/model.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "reanalysis/errors.hpp"

namespace reanalysis {

std::string_view to_string(ElementKind kind) {
  switch (kind) {
    case ElementKind::TrussBar: return "truss_bar";
    case ElementKind::HomogeneousBeam: return "homogeneous_beam";
    case ElementKind::FgBeam: return "fg_beam";
  }
  return "unknown";
}

std::string_view to_string(MemberKind kind) {
  switch (kind) {
    case MemberKind::Chord: return "chord";
    case MemberKind::Vertical: return "vertical";
    case MemberKind::Diagonal: return "diagonal";
    case MemberKind::Column: return "column";
    case MemberKind::BeamSegment: return "beam_segment";
  }
  return "unknown";
}

std::string_view to_string(StructureKind kind) {
  return kind == StructureKind::Truss ? "truss" : "frame";
}

ElementKind element_kind_from_string(std::string_view s) {
  if (s == "truss_bar") return ElementKind::TrussBar;
  if (s == "homogeneous_beam") return ElementKind::HomogeneousBeam;
  if (s == "fg_beam") return ElementKind::FgBeam;
  throw Error(ErrorKind::InvalidParameter, "unknown element kind '" + std::string(s) + "'");
}

MemberKind member_kind_from_string(std::string_view s) {
  if (s == "chord") return MemberKind::Chord;
  if (s == "vertical") return MemberKind::Vertical;
  if (s == "diagonal") return MemberKind::Diagonal;
  if (s == "column") return MemberKind::Column;
  if (s == "beam_segment") return MemberKind::BeamSegment;
  throw Error(ErrorKind::InvalidParameter, "unknown member kind '" + std::string(s) + "'");
}

StructureKind structure_kind_from_string(std::string_view s) {
  if (s == "truss") return StructureKind::Truss;
  if (s == "frame") return StructureKind::Frame;
  throw Error(ErrorKind::InvalidParameter, "unknown structure kind '" + std::string(s) + "'");
}

GradingTarget grading_target_from_string(std::string_view s) {
  if (s == "E") return GradingTarget::Youngs;
  if (s == "E_US") return GradingTarget::UpperSurface;
  throw Error(ErrorKind::InvalidParameter, "unknown grading target '" + std::string(s) + "'");
}

StructuralModel::StructuralModel(int dofs_per_node, std::vector<Node> nodes,
                                 std::vector<ElementRecord> elements,
                                 std::map<int, std::set<int>> supports,
                                 std::vector<NodalLoad> loads, std::optional<GridLayout> layout)
    : dofs_per_node_(dofs_per_node),
      nodes_(std::move(nodes)),
      elements_(std::move(elements)),
      supports_(std::move(supports)),
      loads_(std::move(loads)),
      layout_(layout) {
  if (dofs_per_node_ != 2 && dofs_per_node_ != 3) {
    throw Error(ErrorKind::InvalidParameter, "dofs per node must be 2 or 3");
  }
  dof_map_.assign(nodes_.size() * static_cast<std::size_t>(dofs_per_node_), kConstrained);
  for (const auto& [node, dofs] : supports_) {
    if (node < 0 || static_cast<std::size_t>(node) >= nodes_.size()) {
      throw Error(ErrorKind::InvalidParameter, "support references unknown node " + std::to_string(node));
    }
    for (int d : dofs) {
      if (d < 0 || d >= dofs_per_node_) {
        throw Error(ErrorKind::InvalidParameter, "support references invalid dof");
      }
    }
  }
  int next = 0;
  for (std::size_t node = 0; node < nodes_.size(); ++node) {
    auto it = supports_.find(static_cast<int>(node));
    for (int d = 0; d < dofs_per_node_; ++d) {
      if (it != supports_.end() && it->second.count(d)) continue;
      dof_map_[node * static_cast<std::size_t>(dofs_per_node_) + static_cast<std::size_t>(d)] = next++;
    }
  }
  n_free_ = next;
  validate();
}

void StructuralModel::validate() const {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].id != static_cast<int>(i)) {
      throw Error(ErrorKind::InvalidParameter, "node ids must be dense and ordered");
    }
    if (!std::isfinite(nodes_[i].x) || !std::isfinite(nodes_[i].y)) {
      throw Error(ErrorKind::InvalidParameter, "node coordinates must be finite");
    }
  }
  const auto n_nodes = static_cast<int>(nodes_.size());
  // Union-find over element connectivity.
  std::vector<int> parent(nodes_.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int v) {
    while (parent[static_cast<std::size_t>(v)] != v) {
      parent[static_cast<std::size_t>(v)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(v)])];
      v = parent[static_cast<std::size_t>(v)];
    }
    return v;
  };
  for (std::size_t i = 0; i < elements_.size(); ++i) {
    const auto& e = elements_[i];
    if (e.id != static_cast<int>(i)) {
      throw Error(ErrorKind::InvalidParameter, "element ids must be dense and ordered");
    }
    if (e.node_i < 0 || e.node_i >= n_nodes || e.node_j < 0 || e.node_j >= n_nodes) {
      throw Error(ErrorKind::InvalidParameter, "element " + std::to_string(e.id) + " references unknown node");
    }
    if (e.node_i == e.node_j) {
      throw Error(ErrorKind::DegenerateElement, "element " + std::to_string(e.id) + " has coincident end nodes");
    }
    if (!(length(e) > 0.0)) {
      throw Error(ErrorKind::DegenerateElement, "element " + std::to_string(e.id) + " has zero length");
    }
    const bool beam = e.kind != ElementKind::TrussBar;
    if (beam != (dofs_per_node_ == 3)) {
      throw Error(ErrorKind::UnsupportedModel, "element kind does not match the model's dofs per node");
    }
    parent[static_cast<std::size_t>(find(e.node_i))] = find(e.node_j);
  }
  for (int v = 1; v < n_nodes; ++v) {
    if (find(v) != find(0)) {
      throw Error(ErrorKind::InvalidParameter, "model is not connected");
    }
  }
  for (const auto& load : loads_) {
    if (load.node < 0 || load.node >= n_nodes || load.dof < 0 || load.dof >= dofs_per_node_) {
      throw Error(ErrorKind::InvalidParameter, "load references unknown node or dof");
    }
    if (dof(load.node, load.dof) == kConstrained) {
      throw Error(ErrorKind::InvalidParameter, "load applied to a constrained dof");
    }
  }
}

std::vector<int> StructuralModel::element_dofs(const ElementRecord& e) const {
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(2 * dofs_per_node_));
  for (int node : {e.node_i, e.node_j}) {
    for (int d = 0; d < dofs_per_node_; ++d) out.push_back(dof(node, d));
  }
  return out;
}

double StructuralModel::length(const ElementRecord& e) const {
  const auto& a = nodes_[static_cast<std::size_t>(e.node_i)];
  const auto& b = nodes_[static_cast<std::size_t>(e.node_j)];
  return std::hypot(b.x - a.x, b.y - a.y);
}

double StructuralModel::angle(const ElementRecord& e) const {
  const auto& a = nodes_[static_cast<std::size_t>(e.node_i)];
  const auto& b = nodes_[static_cast<std::size_t>(e.node_j)];
  return std::atan2(b.y - a.y, b.x - a.x);
}

Eigen::VectorXd StructuralModel::load_vector() const {
  Eigen::VectorXd r = Eigen::VectorXd::Zero(n_free_);
  for (const auto& load : loads_) r[dof(load.node, load.dof)] += load.value;
  return r;
}

int StructuralModel::node_a() const {
  if (!layout_) throw Error(ErrorKind::UnsupportedModel, "node A is defined for generated grids only");
  // Junction nodes of the top level are numbered left to right in both generators.
  const int cols = layout_->n_span + 1;
  const int top = layout_->n_floor;
  if (layout_->structure == StructureKind::Truss) return top * cols;
  // Frame: base junctions, then one block per floor that starts with its junctions.
  const int per_floor = cols + (layout_->n_sb - 1) * layout_->n_span + (layout_->n_sc - 1) * cols;
  return cols + (top - 1) * per_floor;
}

int StructuralModel::node_b() const {
  return node_a() + layout_->n_span;
}

StructuralModel StructuralModel::with_elements(std::vector<ElementRecord> elements) const {
  return StructuralModel(dofs_per_node_, nodes_, std::move(elements), supports_, loads_, layout_);
}

StructuralModel StructuralModel::with_loads(std::vector<NodalLoad> loads) const {
  return StructuralModel(dofs_per_node_, nodes_, elements_, supports_, std::move(loads), layout_);
}

int spans_from_level(int a) {
  if (a < 1 || a > 30) throw Error(ErrorKind::InvalidParameter, "level a must be in [1, 30]");
  return (1 << a) - 1;
}

StructuralModel build_truss_grid(const TrussParameters& p) {
  if (p.n_span < 1 || p.n_floor < 1) {
    throw Error(ErrorKind::InvalidParameter, "truss needs at least one span and one floor");
  }
  if (!(p.span > 0 && p.height > 0 && p.area > 0 && p.youngs > 0 && p.load > 0)) {
    throw Error(ErrorKind::InvalidParameter, "truss dimensions, area, modulus and load must be positive");
  }
  const int cols = p.n_span + 1;
  auto id = [cols](int col, int row) { return row * cols + col; };

  std::vector<Node> nodes;
  nodes.reserve(static_cast<std::size_t>(cols * (p.n_floor + 1)));
  for (int row = 0; row <= p.n_floor; ++row) {
    for (int col = 0; col < cols; ++col) {
      nodes.push_back({id(col, row), col * p.span, row * p.height});
    }
  }

  SectionSpec section{};
  section.area = p.area;
  MaterialSpec material{};
  material.youngs = p.youngs;

  std::vector<ElementRecord> elements;
  elements.reserve(static_cast<std::size_t>(p.n_floor * (3 * p.n_span + 1)));
  auto add = [&](int ni, int nj, MemberKind kind, int floor, int span) {
    ElementRecord e;
    e.id = static_cast<int>(elements.size());
    e.kind = ElementKind::TrussBar;
    e.node_i = ni;
    e.node_j = nj;
    e.section = section;
    e.material = material;
    e.tag = {kind, floor, span, 1};
    elements.push_back(e);
  };
  for (int f = 1; f <= p.n_floor; ++f) {
    for (int col = 0; col < cols; ++col) add(id(col, f - 1), id(col, f), MemberKind::Vertical, f, col + 1);
    for (int s = 1; s <= p.n_span; ++s) add(id(s - 1, f), id(s, f), MemberKind::Chord, f, s);
    // One diagonal per panel, lower-left to upper-right.
    for (int s = 1; s <= p.n_span; ++s) add(id(s - 1, f - 1), id(s, f), MemberKind::Diagonal, f, s);
  }

  std::map<int, std::set<int>> supports;
  for (int col = 0; col < cols; ++col) supports[id(col, 0)] = {0, 1};

  std::vector<NodalLoad> loads;
  for (int f = 1; f <= p.n_floor; ++f) loads.push_back({id(0, f), 0, p.load});

  GridLayout layout{StructureKind::Truss, p.n_span, p.n_floor, 1, 1, p.span, p.height};
  return StructuralModel(2, std::move(nodes), std::move(elements), std::move(supports), std::move(loads),
                         layout);
}

StructuralModel build_frame_grid(const FrameParameters& p) {
  if (p.n_span < 1 || p.n_floor < 1 || p.n_sb < 1 || p.n_sc < 1) {
    throw Error(ErrorKind::InvalidParameter, "frame counts must be at least 1");
  }
  if (!(p.span > 0 && p.height > 0 && p.width > 0 && p.depth > 0 && p.load > 0)) {
    throw Error(ErrorKind::InvalidParameter, "frame dimensions and load must be positive");
  }
  if (p.kind == ElementKind::TrussBar) {
    throw Error(ErrorKind::InvalidParameter, "frame elements must be beams");
  }
  const int cols = p.n_span + 1;

  std::vector<Node> nodes;
  auto add_node = [&](double x, double y) {
    nodes.push_back({static_cast<int>(nodes.size()), x, y});
    return nodes.back().id;
  };

  // junction[level][col]
  std::vector<std::vector<int>> junction(static_cast<std::size_t>(p.n_floor + 1), std::vector<int>(static_cast<std::size_t>(cols)));
  for (int col = 0; col < cols; ++col) junction[0][static_cast<std::size_t>(col)] = add_node(col * p.span, 0.0);

  SectionSpec section{};
  section.width = p.width;
  section.height = p.depth;
  section.area = p.width * p.depth;
  section.inertia = p.width * p.depth * p.depth * p.depth / 12.0;

  std::vector<ElementRecord> elements;
  auto add_element = [&](int ni, int nj, MemberKind kind, int floor, int span, int segment) {
    ElementRecord e;
    e.id = static_cast<int>(elements.size());
    e.kind = p.kind;
    e.node_i = ni;
    e.node_j = nj;
    e.section = section;
    e.material = p.material;
    e.tag = {kind, floor, span, segment};
    elements.push_back(e);
  };

  for (int f = 1; f <= p.n_floor; ++f) {
    const double y0 = (f - 1) * p.height;
    const double y1 = f * p.height;
    for (int col = 0; col < cols; ++col) junction[static_cast<std::size_t>(f)][static_cast<std::size_t>(col)] = add_node(col * p.span, y1);

    for (int col = 0; col < cols; ++col) {
      int prev = junction[static_cast<std::size_t>(f - 1)][static_cast<std::size_t>(col)];
      for (int s = 1; s <= p.n_sc; ++s) {
        const int next = s == p.n_sc ? junction[static_cast<std::size_t>(f)][static_cast<std::size_t>(col)]
                                     : add_node(col * p.span, y0 + s * (y1 - y0) / p.n_sc);
        add_element(prev, next, MemberKind::Column, f, col + 1, s);
        prev = next;
      }
    }
    for (int sp = 1; sp <= p.n_span; ++sp) {
      const double x0 = (sp - 1) * p.span;
      int prev = junction[static_cast<std::size_t>(f)][static_cast<std::size_t>(sp - 1)];
      for (int s = 1; s <= p.n_sb; ++s) {
        const int next = s == p.n_sb ? junction[static_cast<std::size_t>(f)][static_cast<std::size_t>(sp)]
                                     : add_node(x0 + s * p.span / p.n_sb, y1);
        add_element(prev, next, MemberKind::BeamSegment, f, sp, s);
        prev = next;
      }
    }
  }

  std::map<int, std::set<int>> supports;
  for (int col = 0; col < cols; ++col) supports[junction[0][static_cast<std::size_t>(col)]] = {0, 1, 2};

  std::vector<NodalLoad> loads;
  for (int f = 1; f <= p.n_floor; ++f) loads.push_back({junction[static_cast<std::size_t>(f)][0], 0, p.load});

  GridLayout layout{StructureKind::Frame, p.n_span, p.n_floor, p.n_sb, p.n_sc, p.span, p.height};
  return StructuralModel(3, std::move(nodes), std::move(elements), std::move(supports), std::move(loads),
                         layout);
}

double floor_modulus(int floor, int n_floor, double e_lower_bound, double e_upper_bound) {
  if (n_floor <= 1) return e_upper_bound;
  return e_upper_bound - (floor - 1) * (e_upper_bound - e_lower_bound) / (n_floor - 1);
}

StructuralModel apply_floor_grading(const StructuralModel& model, double e_lower_bound,
                                    double e_upper_bound, GradingTarget target) {
  if (!model.layout()) throw Error(ErrorKind::UnsupportedModel, "floor grading needs a generated grid");
  if (!(e_lower_bound > 0 && e_lower_bound <= e_upper_bound)) {
    throw Error(ErrorKind::InvalidParameter, "grading needs 0 < E_l <= E_u");
  }
  const int n_floor = model.layout()->n_floor;
  auto elements = model.elements();
  for (auto& e : elements) {
    const double value = floor_modulus(e.tag.floor, n_floor, e_lower_bound, e_upper_bound);
    switch (target) {
      case GradingTarget::Youngs:
        if (e.kind == ElementKind::FgBeam) {
          throw Error(ErrorKind::InvalidParameter, "target E does not apply to FG beams");
        }
        e.material.youngs = value;
        break;
      case GradingTarget::UpperSurface:
        if (e.kind != ElementKind::FgBeam) {
          throw Error(ErrorKind::InvalidParameter, "target E_US applies to FG beams only");
        }
        e.material.graded.e_upper = value;
        break;
    }
  }
  return model.with_elements(std::move(elements));
}

StructuralModel set_fg_exponent(const StructuralModel& model, double exponent) {
  if (!(exponent >= 0.0)) throw Error(ErrorKind::InvalidParameter, "power-law exponent must be >= 0");
  auto elements = model.elements();
  for (auto& e : elements) {
    if (e.kind != ElementKind::FgBeam) {
      throw Error(ErrorKind::InvalidParameter, "power-law exponent applies to FG beams only");
    }
    e.material.graded.exponent = exponent;
  }
  return model.with_elements(std::move(elements));
}

StructuralModel with_bilinear_material(const StructuralModel& model, const BilinearLaw& law) {
  if (!(law.e0 > 0 && law.et > 0 && law.sigma_y > 0)) {
    throw Error(ErrorKind::InvalidParameter, "bilinear law needs E0 > 0, Et > 0, sigma_y > 0");
  }
  auto elements = model.elements();
  for (auto& e : elements) {
    if (e.kind != ElementKind::TrussBar) {
      throw Error(ErrorKind::UnsupportedModel, "bilinear material is supported for truss bars only");
    }
    e.material.youngs = law.e0;
    e.material.bilinear = law;
  }
  return model.with_elements(std::move(elements));
}

PartitionSpec default_additional_set(const StructuralModel& model) {
  if (!model.layout()) {
    throw Error(ErrorKind::UnsupportedModel, "default partition needs a generator-built model");
  }
  PartitionSpec spec;
  for (const auto& e : model.elements()) {
    if (model.layout()->structure == StructureKind::Truss) {
      if (e.tag.member == MemberKind::Diagonal && e.tag.span >= 2) spec.additional_ids.insert(e.id);
    } else {
      if (e.tag.member == MemberKind::BeamSegment && e.tag.segment == 1) spec.additional_ids.insert(e.id);
    }
  }
  return spec;
}

}  // namespace reanalysis
