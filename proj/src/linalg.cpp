#include "rotdiv/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "rotdiv/error.hpp"

namespace rotdiv {

bool all_finite(const ComplexMatrix& m) {
  for (Eigen::Index c = 0; c < m.cols(); ++c)
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      const Complex v = m(r, c);
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
    }
  return true;
}

void require_finite(const ComplexMatrix& m, std::string_view what) {
  if (!all_finite(m)) throw Error(ErrorKind::input, std::string(what) + " has non-finite entries");
}

double default_rank_tolerance(std::size_t rows, std::size_t cols, double sigma_max,
                              double rel_scale) {
  return static_cast<double>(std::max(rows, cols)) * sigma_max * rel_scale;
}

namespace {

Eigen::VectorXd singular_values_of(const ComplexMatrix& m) {
  if (m.rows() == 0 || m.cols() == 0) return {};
  Eigen::JacobiSVD<ComplexMatrix> svd(m);
  return svd.singularValues();
}

}  // namespace

RankResult numerical_rank(const ComplexMatrix& m, std::optional<double> tol, double rel_scale) {
  require(m.rows() >= 1 && m.cols() >= 1, ErrorKind::input, "numerical_rank: empty matrix");
  require_finite(m, "numerical_rank input");
  if (tol) require(*tol >= 0.0 && std::isfinite(*tol), ErrorKind::input,
                   "numerical_rank: tolerance must be a nonnegative finite number");

  const Eigen::VectorXd sv = singular_values_of(m);
  RankResult out;
  out.singular_values.assign(sv.data(), sv.data() + sv.size());
  const double sigma_max = out.singular_values.empty() ? 0.0 : out.singular_values.front();
  out.tolerance = tol ? *tol
                      : default_rank_tolerance(static_cast<std::size_t>(m.rows()),
                                               static_cast<std::size_t>(m.cols()), sigma_max,
                                               rel_scale);
  out.rank = static_cast<std::size_t>(std::count_if(
      out.singular_values.begin(), out.singular_values.end(),
      [&](double s) { return s > out.tolerance; }));
  return out;
}

std::size_t rank_of(const ComplexMatrix& m, double rel_scale) {
  const Eigen::VectorXd sv = singular_values_of(m);
  if (sv.size() == 0) return 0;
  const double cutoff = default_rank_tolerance(static_cast<std::size_t>(m.rows()),
                                               static_cast<std::size_t>(m.cols()), sv(0),
                                               rel_scale);
  std::size_t r = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > cutoff) ++r;
  return r;
}

std::vector<Complex> det_poly_coeffs(const ComplexMatrix& a, const ComplexMatrix& b) {
  require(a.rows() == a.cols() && a.rows() >= 1, ErrorKind::input,
          "det_poly_coeffs: a must be square and non-empty");
  require(b.rows() == a.rows() && b.cols() == a.cols(), ErrorKind::input,
          "det_poly_coeffs: a and b must have the same size");
  require_finite(a, "det_poly_coeffs a");
  require_finite(b, "det_poly_coeffs b");

  const auto m = static_cast<std::size_t>(a.rows());
  const std::size_t n_nodes = m + 1;

  // Nodes c_k = exp(j 2 pi k / (m+1)). The Vandermonde matrix V(k, i) = c_k^i
  // on these nodes satisfies V^H V = (m+1) I, so the solve is V^H / (m+1).
  ComplexMatrix vander(n_nodes, n_nodes);
  ComplexVector values(n_nodes);
  for (std::size_t k = 0; k < n_nodes; ++k) {
    const Complex node = std::polar(1.0, kTwoPi * static_cast<double>(k) / static_cast<double>(n_nodes));
    Complex power = 1.0;
    for (std::size_t i = 0; i < n_nodes; ++i) {
      vander(k, i) = power;
      power *= node;
    }
    values(k) = ComplexMatrix(a + node * b).partialPivLu().determinant();
  }
  const ComplexVector coeffs = vander.adjoint() * values / static_cast<double>(n_nodes);
  return {coeffs.data(), coeffs.data() + coeffs.size()};
}

std::vector<Complex> polynomial_roots(std::span<const Complex> coeffs) {
  double scale = 0.0;
  for (const Complex& c : coeffs) scale = std::max(scale, std::abs(c));
  if (scale == 0.0) throw Error(ErrorKind::input, "polynomial_roots: zero polynomial");

  std::size_t degree = coeffs.size() - 1;
  while (degree > 0 && std::abs(coeffs[degree]) <= 1e-12 * scale) --degree;
  if (degree == 0) return {};

  const auto n = static_cast<Eigen::Index>(degree);
  ComplexMatrix companion = ComplexMatrix::Zero(n, n);
  for (Eigen::Index i = 1; i < n; ++i) companion(i, i - 1) = 1.0;
  for (Eigen::Index i = 0; i < n; ++i) companion(i, n - 1) = -coeffs[static_cast<std::size_t>(i)] / coeffs[degree];

  Eigen::ComplexEigenSolver<ComplexMatrix> solver(companion, false);
  const auto& ev = solver.eigenvalues();
  return {ev.data(), ev.data() + ev.size()};
}

std::vector<Complex> distinct_roots(std::span<const Complex> roots, double rel_tol) {
  std::vector<Complex> out;
  for (const Complex& r : roots) {
    const bool seen = std::any_of(out.begin(), out.end(), [&](const Complex& o) {
      return std::abs(o - r) <= rel_tol * std::max(1.0, std::abs(r));
    });
    if (!seen) out.push_back(r);
  }
  return out;
}

ComplexMatrix dft_matrix(std::size_t m) {
  require(m >= 1, ErrorKind::input, "dft_matrix: size must be positive");
  const auto n = static_cast<Eigen::Index>(m);
  ComplexMatrix f(n, n);
  const double norm = 1.0 / std::sqrt(static_cast<double>(m));
  for (std::size_t k = 0; k < m; ++k)
    for (std::size_t t = 0; t < m; ++t) {
      // Reduce the exponent modulo m so large sizes keep full phase accuracy.
      const std::size_t e = (k * t) % m;
      f(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(t)) =
          std::polar(norm, -kTwoPi * static_cast<double>(e) / static_cast<double>(m));
    }
  return f;
}

bool is_unitary(const ComplexMatrix& m, double tol) {
  if (m.rows() != m.cols()) return false;
  const ComplexMatrix gram = m * m.adjoint();
  return (gram - ComplexMatrix::Identity(m.rows(), m.cols())).cwiseAbs().maxCoeff() <= tol;
}

}  // namespace rotdiv
