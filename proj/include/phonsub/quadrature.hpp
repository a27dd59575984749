#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <sstream>
#include <utility>
#include <vector>

#include "phonsub/constants.hpp"
#include "phonsub/errors.hpp"

namespace phonsub {

/// Dense bivariate polynomial sum_{p,q} coeff(p,q) x^p y^q, small degrees.
class BivariatePoly {
 public:
  BivariatePoly() : BivariatePoly(0, 0) {}
  BivariatePoly(int max_p, int max_q)
      : rows_(max_p + 1), cols_(max_q + 1), coeff_(rows_ * cols_, 0.0) {}

  static BivariatePoly constant(double value) {
    BivariatePoly poly(0, 0);
    poly.at(0, 0) = value;
    return poly;
  }

  double& at(int p, int q) { return coeff_[p * cols_ + q]; }
  double at(int p, int q) const {
    if (p >= rows_ || q >= cols_) return 0.0;
    return coeff_[p * cols_ + q];
  }
  int degree_x() const { return rows_ - 1; }
  int degree_y() const { return cols_ - 1; }

  double eval(double x, double y) const {
    // Horner in x, inner Horner in y.
    double acc = 0.0;
    for (int p = rows_ - 1; p >= 0; --p) {
      double row = 0.0;
      for (int q = cols_ - 1; q >= 0; --q) {
        row = row * y + coeff_[p * cols_ + q];
      }
      acc = acc * x + row;
    }
    return acc;
  }

  BivariatePoly operator+(const BivariatePoly& other) const {
    BivariatePoly out(std::max(degree_x(), other.degree_x()),
                      std::max(degree_y(), other.degree_y()));
    for (int p = 0; p <= out.degree_x(); ++p) {
      for (int q = 0; q <= out.degree_y(); ++q) {
        out.at(p, q) = at(p, q) + other.at(p, q);
      }
    }
    return out;
  }

  BivariatePoly operator*(const BivariatePoly& other) const {
    BivariatePoly out(degree_x() + other.degree_x(),
                      degree_y() + other.degree_y());
    for (int p = 0; p < rows_; ++p) {
      for (int q = 0; q < cols_; ++q) {
        const double c = coeff_[p * cols_ + q];
        if (c == 0.0) continue;
        for (int r = 0; r <= other.degree_x(); ++r) {
          for (int s = 0; s <= other.degree_y(); ++s) {
            out.at(p + r, q + s) += c * other.at(r, s);
          }
        }
      }
    }
    return out;
  }

  BivariatePoly scaled(double factor) const {
    BivariatePoly out = *this;
    for (double& c : out.coeff_) c *= factor;
    return out;
  }

 private:
  int rows_, cols_;
  std::vector<double> coeff_;
};

/// Gauss-Hermite nodes and weights for the weight exp(-x^2) on the real
/// line, by Golub-Welsch on the symmetric Jacobi matrix.
inline std::pair<std::vector<double>, std::vector<double>>
gauss_hermite_rule(int order) {
  if (order < 1) throw ParameterError("gauss_hermite_rule: order must be >= 1");
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(order, order);
  for (int i = 1; i < order; ++i) {
    const double b = std::sqrt(0.5 * i);
    jacobi(i, i - 1) = b;
    jacobi(i - 1, i) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
  if (solver.info() != Eigen::Success) {
    throw NumericalIntegrityError("gauss_hermite_rule: eigensolver failed");
  }
  std::vector<double> nodes(order), weights(order);
  const double total_mass = std::sqrt(constants::pi);
  for (int i = 0; i < order; ++i) {
    nodes[i] = solver.eigenvalues()(i);
    const double v0 = solver.eigenvectors()(0, i);
    weights[i] = total_mass * v0 * v0;
  }
  return {std::move(nodes), std::move(weights)};
}

/// Centered 2D Gaussian moments E[x^p y^q] for covariance S, computed by
/// the Stein recursion E[x f] = Sxx E[df/dx] + Sxy E[df/dy]. Exact for all
/// orders up to the table size.
class GaussianMomentTable {
 public:
  GaussianMomentTable(const Eigen::Matrix2d& covariance, int max_degree)
      : cols_(max_degree + 1), table_((max_degree + 1) * (max_degree + 1), 0.0) {
    const double sxx = covariance(0, 0);
    const double sxy = 0.5 * (covariance(0, 1) + covariance(1, 0));
    const double syy = covariance(1, 1);
    at(0, 0) = 1.0;
    for (int q = 2; q <= max_degree; q += 2) {
      at(0, q) = (q - 1) * syy * at(0, q - 2);
    }
    for (int p = 1; p <= max_degree; ++p) {
      for (int q = 0; q <= max_degree; ++q) {
        double value = 0.0;
        if (p >= 2) value += (p - 1) * sxx * at(p - 2, q);
        if (q >= 1) value += q * sxy * at(p - 1, q - 1);
        at(p, q) = value;
      }
    }
  }

  double moment(int p, int q) const { return table_[p * cols_ + q]; }

 private:
  double& at(int p, int q) { return table_[p * cols_ + q]; }
  int cols_;
  std::vector<double> table_;
};

/// A function of the plane written as poly(x, y) * exp(-1/2 d^T A d) with A
/// symmetric positive definite. Products of such forms stay in the family,
/// which is what makes the overlap integrals closed-form.
struct GaussianPolyForm {
  Eigen::Matrix2d a = Eigen::Matrix2d::Identity();  // exponent matrix
  BivariatePoly poly;

  double eval(double x, double y) const {
    const double quad = a(0, 0) * x * x + (a(0, 1) + a(1, 0)) * x * y +
                        a(1, 1) * y * y;
    return poly.eval(x, y) * std::exp(-0.5 * quad);
  }

  GaussianPolyForm operator*(const GaussianPolyForm& other) const {
    return {a + other.a, poly * other.poly};
  }
};

/// Exact integral of a GaussianPolyForm over the plane via the moment
/// table: integral = 2 pi / sqrt(det A) * E_{S = A^{-1}}[poly].
inline double integrate_moments(const GaussianPolyForm& form) {
  const double det = form.a.determinant();
  if (!(det > 0.0) || !(form.a(0, 0) > 0.0)) {
    throw NumericalIntegrityError(
        "integrate_moments: exponent matrix is not positive definite");
  }
  const Eigen::Matrix2d s = form.a.inverse();
  const int max_degree = std::max(form.poly.degree_x(), form.poly.degree_y());
  const GaussianMomentTable moments(s, max_degree);
  double acc = 0.0;
  for (int p = 0; p <= form.poly.degree_x(); ++p) {
    for (int q = 0; q <= form.poly.degree_y(); ++q) {
      const double c = form.poly.at(p, q);
      if (c != 0.0) acc += c * moments.moment(p, q);
    }
  }
  return acc * 2.0 * constants::pi / std::sqrt(det);
}

/// Tensor Gauss-Hermite quadrature aligned to the Gaussian exponent of the
/// integrand: integrates f(x, y) exp(-1/2 d^T A d) by substituting
/// d = sqrt(2) A^{-1/2} u so the weight becomes exp(-|u|^2).
template <class F>
double integrate_aligned_quadrature(const Eigen::Matrix2d& a, F&& f,
                                    int order) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> solver(a);
  if (solver.info() != Eigen::Success || solver.eigenvalues().minCoeff() <= 0.0) {
    throw NumericalIntegrityError(
        "integrate_aligned_quadrature: exponent matrix is not positive "
        "definite");
  }
  const Eigen::Vector2d inv_sqrt =
      (2.0 / solver.eigenvalues().array()).sqrt().matrix();
  const Eigen::Matrix2d transform =
      solver.eigenvectors() * inv_sqrt.asDiagonal();
  const double jacobian = std::abs(transform.determinant());
  const auto [nodes, weights] = gauss_hermite_rule(order);
  double acc = 0.0;
  for (int i = 0; i < order; ++i) {
    for (int j = 0; j < order; ++j) {
      const double x = transform(0, 0) * nodes[i] + transform(0, 1) * nodes[j];
      const double y = transform(1, 0) * nodes[i] + transform(1, 1) * nodes[j];
      acc += weights[i] * weights[j] * f(x, y);
    }
  }
  return acc * jacobian;
}

/// Quadrature route for a GaussianPolyForm-presented integrand where f is
/// the raw integrand (Gaussian included): the Gaussian factor is divided
/// back out before quadrature re-applies it through the weight. Starts at
/// the given order and doubles until two successive estimates agree.
template <class F>
double integrate_raw_quadrature(const Eigen::Matrix2d& a, F&& raw,
                                int order = 40, double converge_tol = 1e-10,
                                int max_order = 320) {
  auto deweighted = [&](double x, double y) {
    const double quad =
        a(0, 0) * x * x + (a(0, 1) + a(1, 0)) * x * y + a(1, 1) * y * y;
    return raw(x, y) * std::exp(0.5 * quad);
  };
  double previous = integrate_aligned_quadrature(a, deweighted, order);
  for (int n = 2 * order; n <= max_order; n *= 2) {
    const double current = integrate_aligned_quadrature(a, deweighted, n);
    if (std::abs(current - previous) < converge_tol * std::max(1.0, std::abs(current))) {
      return current;
    }
    previous = current;
  }
  std::ostringstream os;
  os << "integrate_raw_quadrature: no convergence up to order " << max_order;
  throw NumericalIntegrityError(os.str());
}

}  // namespace phonsub
