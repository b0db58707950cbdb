#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "rotdiv/random.hpp"

namespace rotdiv {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

/// Relative rank cutoff: singular values at or below
/// max(rows, cols) * sigma_max * scale are treated as zero.
inline constexpr double kDefaultRankScale = 0x1p-45;

struct RankResult {
  std::size_t rank = 0;
  std::vector<double> singular_values;  // descending
  double tolerance = 0.0;               // absolute cutoff actually applied
};

/// Numerical rank by SVD. `tol` is an absolute cutoff; when absent the
/// relative default max(rows, cols) * sigma_max * rel_scale is used.
RankResult numerical_rank(const ComplexMatrix& m, std::optional<double> tol = std::nullopt,
                          double rel_scale = kDefaultRankScale);

/// Same as numerical_rank(...).rank without materializing singular values.
std::size_t rank_of(const ComplexMatrix& m, double rel_scale = kDefaultRankScale);

double default_rank_tolerance(std::size_t rows, std::size_t cols, double sigma_max,
                              double rel_scale = kDefaultRankScale);

/// Coefficients a_0..a_m of det(a + c*b) as a polynomial in c. Evaluated on
/// the (m+1)-th roots of unity and recovered by the Vandermonde solve.
std::vector<Complex> det_poly_coeffs(const ComplexMatrix& a, const ComplexMatrix& b);

/// Roots of sum_k coeffs[k] c^k via companion-matrix eigenvalues. Leading
/// coefficients below 1e-12 of the largest magnitude are dropped first.
std::vector<Complex> polynomial_roots(std::span<const Complex> coeffs);

/// Groups roots closer than `rel_tol * max(1, |r|)` and returns one
/// representative per cluster.
std::vector<Complex> distinct_roots(std::span<const Complex> roots, double rel_tol = 1e-6);

void require_finite(const ComplexMatrix& m, std::string_view what);
bool all_finite(const ComplexMatrix& m);

/// Normalized M-point DFT matrix, F(k, n) = exp(-j 2 pi k n / M) / sqrt(M).
ComplexMatrix dft_matrix(std::size_t m);

bool is_unitary(const ComplexMatrix& m, double tol = 1e-10);

/// Haar-distributed unitary matrix (QR of a complex Gaussian matrix with
/// phase-corrected R diagonal).
template <class Gen>
ComplexMatrix random_unitary(std::size_t n, Gen& rng) {
  const auto size = static_cast<Eigen::Index>(n);
  ComplexMatrix g(size, size);
  for (Eigen::Index c = 0; c < size; ++c)
    for (Eigen::Index r = 0; r < size; ++r) g(r, c) = complex_gaussian(rng, 1.0);
  Eigen::HouseholderQR<ComplexMatrix> qr(g);
  ComplexMatrix q = qr.householderQ() * ComplexMatrix::Identity(size, size);
  const ComplexMatrix& packed = qr.matrixQR();
  for (Eigen::Index c = 0; c < size; ++c) {
    const Complex d = packed(c, c);
    const double mag = std::abs(d);
    if (mag > 0.0) q.col(c) *= d / mag;
  }
  return q;
}

}  // namespace rotdiv
