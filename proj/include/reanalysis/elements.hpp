#pragma once

// Element stiffness in spectral form: K_e = C^T K_L C, with C made of
// unit-norm deformation-mode rows and K_L the element stiffness parameters.

#include <Eigen/Dense>

#include "reanalysis/model.hpp"

namespace reanalysis {

struct ElementDecomposition {
  Eigen::MatrixXd parameters;    // K_L, m x m
  Eigen::MatrixXd modes_local;   // m x (2 * dofs per node)
  Eigen::MatrixXd modes_global;  // modes_local * T

  int mode_count() const { return static_cast<int>(parameters.rows()); }
  Eigen::MatrixXd stiffness() const { return modes_global.transpose() * parameters * modes_global; }
};

struct FgSectionConstants {
  double a_e = 0.0;  // kN/cm per unit width
  double b_e = 0.0;  // kN
  double d_e = 0.0;  // kN cm
};

struct MaterialState {
  double strain = 0.0;
  double stress = 0.0;
  double tangent = 0.0;
  bool yielded = false;
};

ElementDecomposition truss_decomposition(double length, double angle, double youngs, double area);

// diag(2EA/L, 2EI/L, 6EI(L^2 + 4)/L^3)
Eigen::Matrix3d beam_parameter_matrix(double youngs, double area, double inertia, double length);

// Unit-norm deformation modes in local axes, dof order (u1, v1, t1, u2, v2, t2):
// axial stretch, relative rotation, antisymmetric bending.
Eigen::Matrix<double, 3, 6> beam_mode_rows_local(double length);

// Local rows post-multiplied by the element rotation.
Eigen::Matrix<double, 3, 6> beam_mode_rows(double length, double angle);

// Local-from-global rotation for one element (2x2 blocks for bars, 3x3 for beams).
Eigen::MatrixXd element_rotation(int dofs_per_node, double angle);

FgSectionConstants fg_section_constants(double height, double exponent, double e_upper, double e_lower);

Eigen::Matrix3d fg_beam_parameter_matrix(double width, const FgSectionConstants& c, double length);

// Local 6x6 stiffness of the graded Euler-Bernoulli element, in closed form.
Eigen::Matrix<double, 6, 6> fg_beam_local_stiffness(double width, const FgSectionConstants& c,
                                                    double length);

MaterialState bilinear_stress(double strain, const BilinearLaw& law);

// Decomposition of a model element. modulus_override replaces the element's
// homogeneous modulus (used for tangent moduli in nonlinear runs).
ElementDecomposition decompose(const StructuralModel& model, const ElementRecord& element,
                               double modulus_override = 0.0);

// Stiffness parameter block only; cheaper than decompose when C is reused.
Eigen::MatrixXd element_parameters(const StructuralModel& model, const ElementRecord& element,
                                   double modulus_override = 0.0);

}  // namespace reanalysis
