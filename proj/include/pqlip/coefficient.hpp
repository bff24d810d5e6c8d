#pragma once

#include "pqlip/exponents.hpp"
#include "pqlip/grid.hpp"

#include <memory>
#include <span>
#include <string>
#include <vector>

namespace pqlip {

/// A nonnegative spatial weight on [-1,1]^dim.
///
/// s_exponent() and r_exponent() are the critical local integrability
/// exponents at the coefficient's special points: a^{-1} is in L^s near a
/// degenerate point iff s < s_exponent, and |Da| is in L^r near a singular
/// point of the derivative iff r < r_exponent. Both are +inf when there is
/// no such point in the closed domain.
class Coefficient {
public:
  enum class Kind { constant, power_weight, tabulated };

  static Coefficient constant(double value, int dim = 1);
  /// |x - center|^alpha, alpha > 0; dim = center.size().
  static Coefficient power_weight(double alpha, std::vector<double> center);
  /// Multilinear interpolation of node samples on `grid`.
  static Coefficient tabulated(Grid grid, std::vector<double> node_values);

  Kind kind() const { return m_kind; }
  int dim() const { return m_dim; }
  double alpha() const { return m_alpha; }
  const std::vector<double>& center() const { return m_center; }
  double constant_value() const { return m_value; }

  bool is_constant() const { return m_kind == Kind::constant; }
  bool vanishes_identically() const { return m_kind == Kind::constant && m_value == 0.0; }

  /// Throws DomainError outside [-1,1]^dim.
  double value(std::span<const double> x) const;
  /// Spatial gradient; throws SingularPointError where it does not exist.
  std::vector<double> gradient(std::span<const double> x) const;
  double gradient_norm(std::span<const double> x) const;

  const std::vector<std::vector<double>>& degenerate_points() const { return m_degenerate; }
  /// Points in the closed domain where the gradient is unbounded.
  const std::vector<std::vector<double>>& singular_points() const { return m_singular; }

  ExtendedReal s_exponent() const { return m_s_exp; }
  ExtendedReal r_exponent() const { return m_r_exp; }

  double sup() const;
  double inf() const;

  std::string describe() const;

private:
  Coefficient() = default;

  Kind m_kind = Kind::constant;
  int m_dim = 1;
  double m_value = 0.0;
  double m_alpha = 0.0;
  std::vector<double> m_center;
  std::shared_ptr<const Grid> m_table_grid;
  std::shared_ptr<const std::vector<double>> m_table;
  std::vector<std::vector<double>> m_degenerate;
  std::vector<std::vector<double>> m_singular;
  ExtendedReal m_s_exp = ExtendedReal::infinity();
  ExtendedReal m_r_exp = ExtendedReal::infinity();
};

bool point_in_region(std::span<const double> x, const Region& region);

} // namespace pqlip
