#include <doctest.h>

#include "rotdiv/diversity.hpp"
#include "rotdiv/error.hpp"
#include "rotdiv/modulation.hpp"
#include "rotdiv/random.hpp"

using namespace rotdiv;

TEST_CASE("built-in schemes: shapes, prefix and unit data columns") {
  for (auto kind : {SchemeKind::plain_ofdm, SchemeKind::dft_s_ofdm}) {
    const auto s = build_scheme(kind, 4, 2);
    CHECK(s.m() == 4);
    CHECK(s.mp() == 2);
    CHECK(s.psi().rows() == 6);
    CHECK(s.has_cyclic_prefix());
    CHECK(is_unitary(s.data_part()));
    CHECK(is_unitary(s.g()));
    CHECK(s.at(-1, 0) == s.at(3, 0));
    CHECK(s.at(-3, 0) == Complex(0.0));
  }
  const auto dft = build_scheme(SchemeKind::dft_s_ofdm, 4, 2);
  // CP rows copy the data tail, so full columns are not unit norm.
  CHECK(dft.psi().col(3).norm() == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("dft_s_ofdm equals precoded_cp_ofdm with a DFT precoder") {
  SchemeParams p;
  p.precoder = make_precoder(dft_matrix(8), "dft");
  const auto pre = build_scheme(SchemeKind::precoded_cp_ofdm, 8, 3, p);
  const auto dft = build_scheme(SchemeKind::dft_s_ofdm, 8, 3);
  CHECK((pre.psi() - dft.psi()).cwiseAbs().maxCoeff() < 1e-13);
  CHECK(pre.precoder()->label == "dft");
}

TEST_CASE("plain OFDM columns are single tones") {
  const auto s = build_scheme(SchemeKind::plain_ofdm, 8, 2);
  for (std::size_t q = 0; q < 8; ++q)
    for (std::ptrdiff_t p = 0; p < 8; ++p)
      CHECK(std::abs(s.at(p, q) - std::polar(1.0 / std::sqrt(8.0), kTwoPi * static_cast<double>(p * static_cast<std::ptrdiff_t>(q)) / 8.0)) < 1e-14);
}

TEST_CASE("dd_grid layout and demodulation") {
  SchemeParams p;
  p.n_doppler = 4;
  p.m_delay = 2;
  const auto s = build_scheme(SchemeKind::dd_grid, 8, 2, p);
  CHECK(is_unitary(s.data_part()));
  CHECK((s.g() * s.data_part() - ComplexMatrix::Identity(8, 8)).norm() < 1e-12);
  // symbol q = k * m_delay + d lives on samples d, d + m_delay, ...
  const std::size_t q = 1 * 2 + 1;
  for (std::ptrdiff_t n = 0; n < 8; ++n) {
    if (n % 2 == 1) CHECK(std::abs(s.at(n, q)) == doctest::Approx(0.5));
    else CHECK(std::abs(s.at(n, q)) == 0.0);
  }
  p.m_delay = 3;
  CHECK_THROWS_AS(build_scheme(SchemeKind::dd_grid, 8, 2, p), Error);
}

TEST_CASE("custom schemes are validated") {
  SchemeParams p;
  ComplexMatrix psi = ComplexMatrix::Zero(5, 3);
  psi.bottomRows(3) = ComplexMatrix::Identity(3, 3);
  psi(0, 1) = 1.0;
  p.psi = psi;
  p.g = ComplexMatrix::Identity(3, 3);
  const auto s = build_scheme(SchemeKind::custom, 3, 2, p);
  CHECK(s.kind() == SchemeKind::custom);
  CHECK_FALSE(s.has_cyclic_prefix());

  // zero columns are allowed for custom schemes
  p.psi->col(2).setZero();
  CHECK_NOTHROW(build_scheme(SchemeKind::custom, 3, 2, p));

  p.g = 2.0 * ComplexMatrix::Identity(3, 3);
  CHECK_THROWS_AS(build_scheme(SchemeKind::custom, 3, 2, p), Error);
  p.g = ComplexMatrix::Identity(3, 3);
  (*p.psi)(4, 0) = Complex(std::nan(""), 0.0);
  CHECK_THROWS_AS(build_scheme(SchemeKind::custom, 3, 2, p), Error);

  SchemeParams none;
  CHECK_THROWS_AS(build_scheme(SchemeKind::precoded_cp_ofdm, 4, 1, none), Error);
  CHECK_THROWS_AS(make_precoder(2.0 * ComplexMatrix::Identity(2, 2), "x"), Error);
  CHECK_NOTHROW(make_precoder(2.0 * ComplexMatrix::Identity(2, 2), "x", false));
  CHECK_THROWS_AS(add_cyclic_prefix(ComplexMatrix::Identity(2, 2), 3), Error);
}

TEST_CASE("scheme JSON round trip") {
  const auto s = build_scheme(SchemeKind::dft_s_ofdm, 4, 2);
  const auto back = scheme_from_json(scheme_to_json(s));
  CHECK(back.kind() == SchemeKind::custom);
  CHECK((back.psi() - s.psi()).norm() == 0.0);
  CHECK((back.g() - s.g()).norm() == 0.0);

  auto j = scheme_to_json(s);
  j["psi"][3] = "oops";
  try {
    scheme_from_json(j);
    FAIL("expected a schema error");
  } catch (const SchemaError& e) {
    CHECK(e.field() == "psi[3]");
  }
}

TEST_CASE("transmit is Psi Phi d") {
  const auto s = build_scheme(SchemeKind::plain_ofdm, 4, 1);
  const auto phi = random_rotation(4, 5);
  ComplexVector d(4);
  d << 1.0, -1.0, 1.0, 1.0;
  const ComplexVector x = transmit(s, phi, d);
  CHECK(x.size() == 5);
  CHECK((x - s.psi() * phi.phases().asDiagonal() * d).norm() < 1e-14);
  CHECK(x(0) == x(4));
}

TEST_CASE("prefix adjustment makes the first two judgment columns independent") {
  Rng rng(17);
  for (int trial = 0; trial < 5; ++trial) {
    SchemeParams p;
    ComplexMatrix u = random_unitary(5, rng);
    // Force a column whose data part starts with zero to exercise that branch.
    if (trial == 0) {
      u.col(2).setZero();
      u(1, 2) = 1.0;
    }
    ComplexMatrix psi(7, 5);
    psi.topRows(2) = u.bottomRows(2);
    psi.bottomRows(5) = u;
    p.psi = psi;
    p.g = ComplexMatrix::Identity(5, 5);
    const auto s = build_scheme(SchemeKind::custom, 5, 2, p);
    const auto adj = adjust_prefix_for_diversity2(s);
    CHECK(adj.kind() == SchemeKind::custom);
    for (std::size_t q = 0; q < 5; ++q) {
      const ComplexMatrix j = judgment_matrix(adj, q, 2, 0).matrix;
      // Gram determinant oracle: |c0|^2 |c1|^2 - |<c0, c1>|^2 > 0.
      const Complex inner = j.col(0).dot(j.col(1));
      const double gram = j.col(0).squaredNorm() * j.col(1).squaredNorm() - std::norm(inner);
      CHECK(gram > 1e-6);
      if (std::abs(adj.at(0, q)) > 1e-12) CHECK(std::abs(inner) < 1e-12);
    }
  }
  CHECK_THROWS_AS(adjust_prefix_for_diversity2(build_scheme(SchemeKind::plain_ofdm, 4, 0)), Error);
}

TEST_CASE("scheme kind names round trip") {
  for (auto k : {SchemeKind::plain_ofdm, SchemeKind::precoded_cp_ofdm, SchemeKind::dft_s_ofdm,
                 SchemeKind::dd_grid, SchemeKind::custom})
    CHECK(parse_scheme_kind(to_string(k)) == k);
  CHECK_THROWS_AS(parse_scheme_kind("ofdm2"), Error);
}
