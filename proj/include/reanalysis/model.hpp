#pragma once

// Structural data model for plane trusses and frames, plus the parametric
// generators used by the benchmark campaigns.
//
// Units: lengths in cm, forces in kN, moduli in kN/cm^2.

#include <array>
#include <map>
#include <optional>
#include <set>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace reanalysis {

enum class ElementKind { TrussBar, HomogeneousBeam, FgBeam };
enum class MemberKind { Chord, Vertical, Diagonal, Column, BeamSegment };
enum class StructureKind { Truss, Frame };

std::string_view to_string(ElementKind kind);
std::string_view to_string(MemberKind kind);
std::string_view to_string(StructureKind kind);
ElementKind element_kind_from_string(std::string_view s);
MemberKind member_kind_from_string(std::string_view s);
StructureKind structure_kind_from_string(std::string_view s);

struct Node {
  int id = 0;
  double x = 0.0;
  double y = 0.0;
};

struct SectionSpec {
  double area = 0.0;     // cm^2
  double inertia = 0.0;  // cm^4
  double width = 0.0;    // b, cm
  double height = 0.0;   // h, cm
};

// Power-law through-depth grading. e_upper sits at local +y (h/2).
struct FgProfile {
  double e_upper = 0.0;
  double e_lower = 0.0;
  double exponent = 0.0;
};

struct BilinearLaw {
  double e0 = 0.0;
  double et = 0.0;
  double sigma_y = 0.0;
};

struct MaterialSpec {
  double youngs = 0.0;  // homogeneous modulus
  FgProfile graded{};   // used by FgBeam only
  std::optional<BilinearLaw> bilinear;
};

// floor, span and segment are 1-based; 0 means "not applicable".
struct MemberTag {
  MemberKind member = MemberKind::Chord;
  int floor = 0;
  int span = 0;
  int segment = 0;
};

struct ElementRecord {
  int id = 0;
  ElementKind kind = ElementKind::TrussBar;
  int node_i = 0;
  int node_j = 0;
  SectionSpec section{};
  MaterialSpec material{};
  MemberTag tag{};
};

struct NodalLoad {
  int node = 0;
  int dof = 0;  // local dof: 0 = x, 1 = y, 2 = rotation
  double value = 0.0;
};

// Generator parameters kept with the model so that partitions, grading and
// reporting nodes can be derived from the grid.
struct GridLayout {
  StructureKind structure = StructureKind::Truss;
  int n_span = 0;
  int n_floor = 0;
  int n_sb = 1;
  int n_sc = 1;
  double span = 500.0;
  double height = 500.0;
};

struct PartitionSpec {
  std::set<int> additional_ids;
};

inline constexpr int kConstrained = -1;

class StructuralModel {
public:
  // supports: node id -> constrained local dofs.
  StructuralModel(int dofs_per_node, std::vector<Node> nodes, std::vector<ElementRecord> elements,
                  std::map<int, std::set<int>> supports, std::vector<NodalLoad> loads,
                  std::optional<GridLayout> layout = std::nullopt);

  int dofs_per_node() const { return dofs_per_node_; }
  int free_dof_count() const { return n_free_; }
  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<ElementRecord>& elements() const { return elements_; }
  const std::map<int, std::set<int>>& supports() const { return supports_; }
  const std::vector<NodalLoad>& loads() const { return loads_; }
  const std::optional<GridLayout>& layout() const { return layout_; }

  // Global equation number of (node, local dof), or kConstrained.
  int dof(int node, int local) const { return dof_map_[static_cast<std::size_t>(node * dofs_per_node_ + local)]; }
  const std::vector<int>& dof_map() const { return dof_map_; }

  // Equation numbers of an element's end dofs, node_i first.
  std::vector<int> element_dofs(const ElementRecord& e) const;
  double length(const ElementRecord& e) const;
  double angle(const ElementRecord& e) const;

  Eigen::VectorXd load_vector() const;

  // Top-left (A) and top-right (B) free corner nodes of a generated grid.
  int node_a() const;
  int node_b() const;

  StructuralModel with_elements(std::vector<ElementRecord> elements) const;
  StructuralModel with_loads(std::vector<NodalLoad> loads) const;

private:
  void validate() const;

  int dofs_per_node_;
  std::vector<Node> nodes_;
  std::vector<ElementRecord> elements_;
  std::map<int, std::set<int>> supports_;
  std::vector<NodalLoad> loads_;
  std::optional<GridLayout> layout_;
  std::vector<int> dof_map_;
  int n_free_ = 0;
};

int spans_from_level(int a);

struct TrussParameters {
  int n_span = 1;
  int n_floor = 1;
  double span = 500.0;
  double height = 500.0;
  double area = 20.0;
  double youngs = 20000.0;
  double load = 20.0;
};

StructuralModel build_truss_grid(const TrussParameters& params);

struct FrameParameters {
  int n_span = 1;
  int n_floor = 1;
  int n_sb = 1;
  int n_sc = 1;
  double span = 500.0;
  double height = 500.0;
  double width = 10.0;
  double depth = 30.0;
  ElementKind kind = ElementKind::HomogeneousBeam;
  MaterialSpec material{};
  double load = 20.0;
};

StructuralModel build_frame_grid(const FrameParameters& params);

enum class GradingTarget { Youngs, UpperSurface };

GradingTarget grading_target_from_string(std::string_view s);

// Linear floor grading: floor 1 gets e_upper_bound, the top floor e_lower_bound.
double floor_modulus(int floor, int n_floor, double e_lower_bound, double e_upper_bound);

StructuralModel apply_floor_grading(const StructuralModel& model, double e_lower_bound,
                                    double e_upper_bound, GradingTarget target);

// Sets the power-law exponent of every FG element.
StructuralModel set_fg_exponent(const StructuralModel& model, double exponent);

// Replaces every element's material with a bilinear law (trusses only).
StructuralModel with_bilinear_material(const StructuralModel& model, const BilinearLaw& law);

PartitionSpec default_additional_set(const StructuralModel& model);

}  // namespace reanalysis
