#include <doctest.h>

#include <algorithm>

#include "rotdiv/linalg.hpp"
#include "rotdiv/random.hpp"

using namespace rotdiv;

namespace {

// Cofactor expansion along the first row.
Complex laplace_det(const ComplexMatrix& a) {
  const Eigen::Index n = a.rows();
  if (n == 1) return a(0, 0);
  Complex det = 0.0;
  for (Eigen::Index c = 0; c < n; ++c) {
    ComplexMatrix minor(n - 1, n - 1);
    for (Eigen::Index r = 1; r < n; ++r)
      for (Eigen::Index k = 0, mc = 0; k < n; ++k)
        if (k != c) minor(r - 1, mc++) = a(r, k);
    det += (c % 2 == 0 ? 1.0 : -1.0) * a(0, c) * laplace_det(minor);
  }
  return det;
}

Complex horner(const std::vector<Complex>& coeffs, Complex x) {
  Complex acc = 0.0;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * x + *it;
  return acc;
}

// Durand-Kerner iteration on the monic polynomial.
std::vector<Complex> durand_kerner(std::vector<Complex> coeffs) {
  const Complex lead = coeffs.back();
  for (auto& c : coeffs) c /= lead;
  const std::size_t n = coeffs.size() - 1;
  std::vector<Complex> z(n);
  for (std::size_t i = 0; i < n; ++i) z[i] = std::pow(Complex(0.4, 0.9), static_cast<double>(i));
  for (int iter = 0; iter < 2000; ++iter) {
    for (std::size_t i = 0; i < n; ++i) {
      Complex denom = 1.0;
      for (std::size_t j = 0; j < n; ++j)
        if (j != i) denom *= z[i] - z[j];
      z[i] -= horner(coeffs, z[i]) / denom;
    }
  }
  return z;
}

ComplexMatrix gaussian_matrix(Eigen::Index r, Eigen::Index c, Rng& rng) {
  ComplexMatrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = complex_gaussian(rng, 1.0);
  return m;
}

bool same_root_sets(std::vector<Complex> a, std::vector<Complex> b, double tol) {
  if (a.size() != b.size()) return false;
  for (const Complex& r : a) {
    auto it = std::min_element(b.begin(), b.end(),
                               [&](Complex x, Complex y) { return std::abs(x - r) < std::abs(y - r); });
    if (std::abs(*it - r) > tol) return false;
    b.erase(it);
  }
  return true;
}

}  // namespace

TEST_CASE("numerical rank with relative and absolute cutoffs") {
  ComplexMatrix d = ComplexMatrix::Zero(3, 3);
  d(0, 0) = 1.0;
  d(1, 1) = 1e-3;
  CHECK(numerical_rank(d).rank == 2);
  CHECK(numerical_rank(d, 1e-2).rank == 1);
  CHECK(rank_of(ComplexMatrix::Zero(4, 2)) == 0);

  Rng rng(3);
  const ComplexVector u = gaussian_matrix(5, 1, rng);
  const ComplexVector v = gaussian_matrix(3, 1, rng);
  CHECK(rank_of(u * v.adjoint()) == 1);
  CHECK(rank_of(gaussian_matrix(5, 3, rng)) == 3);

  const auto r = numerical_rank(d);
  CHECK(r.singular_values.size() == 3);
  CHECK(r.tolerance == doctest::Approx(default_rank_tolerance(3, 3, 1.0)));
}

TEST_CASE("det_poly_coeffs matches the closed 2x2 form") {
  ComplexMatrix a(2, 2), b(2, 2);
  a << Complex(1, 2), Complex(0, -1), Complex(3, 0), Complex(-2, 1);
  b << Complex(0.5, 0), Complex(1, 1), Complex(-1, 0), Complex(0, 2);
  const auto c = det_poly_coeffs(a, b);
  REQUIRE(c.size() == 3);
  const Complex c0 = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
  const Complex c1 = a(0, 0) * b(1, 1) + b(0, 0) * a(1, 1) - a(0, 1) * b(1, 0) - b(0, 1) * a(1, 0);
  const Complex c2 = b(0, 0) * b(1, 1) - b(0, 1) * b(1, 0);
  CHECK(std::abs(c[0] - c0) < 1e-12);
  CHECK(std::abs(c[1] - c1) < 1e-12);
  CHECK(std::abs(c[2] - c2) < 1e-12);
}

TEST_CASE("det_poly_coeffs agrees with cofactor expansion off the sample nodes") {
  Rng rng(11);
  for (Eigen::Index n = 1; n <= 5; ++n) {
    const ComplexMatrix a = gaussian_matrix(n, n, rng);
    const ComplexMatrix b = gaussian_matrix(n, n, rng);
    const auto coeffs = det_poly_coeffs(a, b);
    REQUIRE(coeffs.size() == static_cast<std::size_t>(n + 1));
    for (const Complex x : {Complex(0.3, -0.7), Complex(-1.9, 0.2), Complex(2.5, 1.5)}) {
      const Complex expect = laplace_det(a + x * b);
      CHECK(std::abs(horner(coeffs, x) - expect) < 1e-9 * std::max(1.0, std::abs(expect)));
    }
  }
}

TEST_CASE("polynomial roots: known roots and a Durand-Kerner oracle") {
  const std::vector<Complex> known{1.0, -2.0, Complex(0.5, 1.0)};
  std::vector<Complex> coeffs{1.0};
  for (const Complex& r : known) {
    std::vector<Complex> next(coeffs.size() + 1, 0.0);
    for (std::size_t k = 0; k < coeffs.size(); ++k) {
      next[k] -= r * coeffs[k];
      next[k + 1] += coeffs[k];
    }
    coeffs = next;
  }
  CHECK(same_root_sets(polynomial_roots(coeffs), known, 1e-9));

  Rng rng(5);
  std::vector<Complex> random_coeffs(6);
  for (auto& c : random_coeffs) c = complex_gaussian(rng, 1.0);
  CHECK(same_root_sets(polynomial_roots(random_coeffs), durand_kerner(random_coeffs), 1e-7));

  // Trailing (leading-order) zeros are trimmed.
  CHECK(polynomial_roots(std::vector<Complex>{2.0, 1.0, 0.0, 0.0}).size() == 1);
}

TEST_CASE("distinct_roots merges clusters") {
  const std::vector<Complex> r{1.0, 1.0 + 1e-9, 2.0};
  CHECK(distinct_roots(r).size() == 2);
}

TEST_CASE("dft and random unitary matrices") {
  const ComplexMatrix f = dft_matrix(6);
  CHECK(is_unitary(f));
  CHECK(std::abs(f(1, 1) - std::polar(1.0 / std::sqrt(6.0), -kTwoPi / 6.0)) < 1e-15);

  Rng a(42), b(42);
  const ComplexMatrix u = random_unitary(5, a);
  CHECK(is_unitary(u));
  CHECK((u - random_unitary(5, b)).norm() == 0.0);
  CHECK_FALSE(is_unitary(2.0 * u));
}

TEST_CASE("require_finite rejects NaN") {
  ComplexMatrix m = ComplexMatrix::Identity(2, 2);
  CHECK(all_finite(m));
  m(1, 0) = Complex(std::nan(""), 0.0);
  CHECK_FALSE(all_finite(m));
  CHECK_THROWS(require_finite(m, "m"));
}

TEST_CASE("stream derivation is deterministic and domain separated") {
  CHECK(derive_stream(1, 2, 3) == derive_stream(1, 2, 3));
  CHECK(derive_stream(1, 2, 3) != derive_stream(1, 3, 3));
  CHECK(derive_stream(1, 2, 3) != derive_stream(1, 2, 4));
  CHECK(derive_stream(1, 2, 3) != derive_stream(2, 2, 3));

  Rng g(9);
  double sum = 0.0, sq = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const Complex z = complex_gaussian(g, 2.0);
    sum += z.real();
    sq += std::norm(z);
  }
  CHECK(std::abs(sum / n) < 0.02);
  CHECK(sq / n == doctest::Approx(2.0).epsilon(0.02));
}
