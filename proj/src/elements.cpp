#include "reanalysis/elements.hpp"

#include <cmath>
#include <string>

#include "reanalysis/errors.hpp"

namespace reanalysis {

namespace {

void require_length(double length) {
  if (!(length > 0.0) || !std::isfinite(length)) {
    throw Error(ErrorKind::DegenerateElement, "element length must be positive");
  }
}

}  // namespace

Eigen::MatrixXd element_rotation(int dofs_per_node, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  const int size = 2 * dofs_per_node;
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(size, size);
  for (int node = 0; node < 2; ++node) {
    const int o = node * dofs_per_node;
    t(o, o) = c;
    t(o, o + 1) = s;
    t(o + 1, o) = -s;
    t(o + 1, o + 1) = c;
    if (dofs_per_node == 3) t(o + 2, o + 2) = 1.0;
  }
  return t;
}

ElementDecomposition truss_decomposition(double length, double angle, double youngs, double area) {
  require_length(length);
  if (!(youngs > 0.0 && area > 0.0)) {
    throw Error(ErrorKind::InvalidMaterial, "truss bar needs E > 0 and A > 0");
  }
  ElementDecomposition d;
  d.parameters = Eigen::MatrixXd::Constant(1, 1, 2.0 * youngs * area / length);
  d.modes_local.resize(1, 4);
  d.modes_local << -1.0, 0.0, 1.0, 0.0;
  d.modes_local /= std::sqrt(2.0);
  d.modes_global = d.modes_local * element_rotation(2, angle);
  return d;
}

Eigen::Matrix3d beam_parameter_matrix(double youngs, double area, double inertia, double length) {
  require_length(length);
  if (!(youngs > 0.0 && area > 0.0 && inertia > 0.0)) {
    throw Error(ErrorKind::InvalidMaterial, "beam needs E, A, I > 0");
  }
  const double l2 = length * length;
  const double l3 = l2 * length;
  Eigen::Matrix3d k = Eigen::Matrix3d::Zero();
  k(0, 0) = 2.0 * youngs * area * l2 / l3;
  k(1, 1) = 2.0 * youngs * inertia * l2 / l3;
  k(2, 2) = 6.0 * youngs * inertia * (l2 + 4.0) / l3;
  return k;
}

Eigen::Matrix<double, 3, 6> beam_mode_rows_local(double length) {
  require_length(length);
  Eigen::Matrix<double, 3, 6> c;
  const double r2 = std::sqrt(2.0);
  const double rb = std::sqrt(2.0 * (length * length + 4.0));
  c << -1.0 / r2, 0.0, 0.0, 1.0 / r2, 0.0, 0.0,
       0.0, 0.0, -1.0 / r2, 0.0, 0.0, 1.0 / r2,
       0.0, 2.0 / rb, length / rb, 0.0, -2.0 / rb, length / rb;
  return c;
}

Eigen::Matrix<double, 3, 6> beam_mode_rows(double length, double angle) {
  return beam_mode_rows_local(length) * element_rotation(3, angle);
}

FgSectionConstants fg_section_constants(double h, double p, double e_upper, double e_lower) {
  if (!(h > 0.0) || !(p >= 0.0) || !(e_upper > 0.0) || !(e_lower > 0.0)) {
    throw Error(ErrorKind::InvalidMaterial, "FG section needs h > 0, p >= 0 and positive moduli");
  }
  FgSectionConstants c;
  c.a_e = h / (p + 1.0) * e_upper + h * p / (p + 1.0) * e_lower;
  const double bk = h * h / (2.0 * (p + 1.0) * (p + 2.0));
  c.b_e = bk * e_upper - bk * e_lower;
  const double h3 = h * h * h;
  const double dk = h3 * (p * p + p + 2.0) / (4.0 * (p + 1.0) * (p + 2.0) * (p + 3.0));
  c.d_e = dk * e_upper + (h3 / 12.0 - dk) * e_lower;
  return c;
}

Eigen::Matrix3d fg_beam_parameter_matrix(double width, const FgSectionConstants& c, double length) {
  require_length(length);
  if (!(width > 0.0)) throw Error(ErrorKind::InvalidMaterial, "FG beam width must be positive");
  const double l = length;
  Eigen::Matrix3d k = Eigen::Matrix3d::Zero();
  k(0, 0) = 2.0 * c.a_e * width / l;
  k(0, 1) = -2.0 * c.b_e * width / l;
  k(1, 0) = k(0, 1);
  k(1, 1) = 2.0 * c.d_e * width / l;
  k(2, 2) = 6.0 * (l * l + 4.0) * c.d_e * width / (l * l * l);
  if (!(k(0, 0) > 0.0 && k(2, 2) > 0.0 && k(0, 0) * k(1, 1) - k(0, 1) * k(0, 1) > 0.0)) {
    throw Error(ErrorKind::InvalidMaterial, "FG stiffness parameters are not positive definite");
  }
  return k;
}

Eigen::Matrix<double, 6, 6> fg_beam_local_stiffness(double width, const FgSectionConstants& c,
                                                    double length) {
  require_length(length);
  const double l = length;
  const double a = c.a_e * width * l * l;
  const double b = c.b_e * width * l * l;
  const double d12 = 12.0 * c.d_e * width;
  const double d6 = 6.0 * c.d_e * width * l;
  const double d4 = 4.0 * c.d_e * width * l * l;
  const double d2 = 2.0 * c.d_e * width * l * l;
  Eigen::Matrix<double, 6, 6> k;
  k <<  a,    0.0, -b,   -a,    0.0,  b,
        0.0,  d12,  d6,   0.0, -d12,  d6,
       -b,    d6,   d4,   b,   -d6,   d2,
       -a,    0.0,  b,    a,    0.0, -b,
        0.0, -d12, -d6,   0.0,  d12, -d6,
        b,    d6,   d2,  -b,   -d6,   d4;
  return k / (l * l * l);
}

MaterialState bilinear_stress(double strain, const BilinearLaw& law) {
  if (!(law.e0 > 0.0 && law.sigma_y > 0.0)) {
    throw Error(ErrorKind::InvalidMaterial, "bilinear law needs E0 > 0 and sigma_y > 0");
  }
  const double yield_strain = law.sigma_y / law.e0;
  const double magnitude = std::abs(strain);
  if (magnitude <= yield_strain) return {strain, law.e0 * strain, law.e0, false};
  const double stress = std::copysign(law.sigma_y + law.et * (magnitude - yield_strain), strain);
  return {strain, stress, law.et, true};
}

Eigen::MatrixXd element_parameters(const StructuralModel& model, const ElementRecord& e,
                                   double modulus_override) {
  const double length = model.length(e);
  const double youngs = modulus_override > 0.0 ? modulus_override : e.material.youngs;
  switch (e.kind) {
    case ElementKind::TrussBar:
      if (!(youngs > 0.0 && e.section.area > 0.0)) {
        throw Error(ErrorKind::InvalidMaterial, "element " + std::to_string(e.id) + " needs E > 0 and A > 0");
      }
      return Eigen::MatrixXd::Constant(1, 1, 2.0 * youngs * e.section.area / length);
    case ElementKind::HomogeneousBeam:
      return beam_parameter_matrix(youngs, e.section.area, e.section.inertia, length);
    case ElementKind::FgBeam: {
      const auto& g = e.material.graded;
      return fg_beam_parameter_matrix(e.section.width,
                                      fg_section_constants(e.section.height, g.exponent, g.e_upper, g.e_lower),
                                      length);
    }
  }
  throw Error(ErrorKind::InternalError, "unhandled element kind");
}

ElementDecomposition decompose(const StructuralModel& model, const ElementRecord& e,
                               double modulus_override) {
  const double length = model.length(e);
  const double angle = model.angle(e);
  if (e.kind == ElementKind::TrussBar) {
    const double youngs = modulus_override > 0.0 ? modulus_override : e.material.youngs;
    return truss_decomposition(length, angle, youngs, e.section.area);
  }
  ElementDecomposition d;
  d.parameters = element_parameters(model, e, modulus_override);
  d.modes_local = beam_mode_rows_local(length);
  d.modes_global = d.modes_local * element_rotation(3, angle);
  return d;
}

}  // namespace reanalysis
