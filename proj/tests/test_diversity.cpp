#include <doctest.h>

#include <Eigen/LU>

#include "rotdiv/diversity.hpp"
#include "rotdiv/error.hpp"
#include "rotdiv/random.hpp"

using namespace rotdiv;

namespace {

const DifferenceSet kBpskB = difference_set(make_alphabet(AlphabetKind::bpsk));

// Minimum rank over every nonzero z (no deduplication), with the event
// matrix assembled from the undemodulated channel matrices and ranked by
// full-pivot LU.
std::size_t brute_force_order(const ModulationScheme& s, const RotationPattern& phi,
                              const DifferenceSet& b, std::size_t l, std::size_t k) {
  const auto h = equivalent_channels_undemodulated(s, phi, l, k);
  const std::size_t m = s.m();
  std::uint64_t total = 1;
  for (std::size_t i = 0; i < m; ++i) total *= b.size();
  std::size_t best = h.size();
  for (std::uint64_t idx = 1; idx < total; ++idx) {
    ComplexVector z(static_cast<Eigen::Index>(m));
    std::uint64_t rest = idx;
    for (std::size_t q = 0; q < m; ++q) {
      z(static_cast<Eigen::Index>(q)) = b.values[rest % b.size()];
      rest /= b.size();
    }
    ComplexMatrix event(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(h.size()));
    for (std::size_t i = 0; i < h.size(); ++i) event.col(static_cast<Eigen::Index>(i)) = h[i] * z;
    Eigen::FullPivLU<ComplexMatrix> lu(event);
    lu.setThreshold(1e-9);
    best = std::min<std::size_t>(best, static_cast<std::size_t>(lu.rank()));
  }
  return best;
}

ModulationScheme unitary_custom(std::size_t m, std::size_t mp, const ComplexMatrix& data) {
  SchemeParams p;
  ComplexMatrix psi(static_cast<Eigen::Index>(m + mp), static_cast<Eigen::Index>(m));
  psi.topRows(static_cast<Eigen::Index>(mp)) = data.bottomRows(static_cast<Eigen::Index>(mp));
  psi.bottomRows(static_cast<Eigen::Index>(m)) = data;
  p.psi = psi;
  p.g = dft_matrix(m);
  return build_scheme(SchemeKind::custom, m, mp, p);
}

}  // namespace

TEST_CASE("judgment matrices: OFDM tones collapse to rank 1, DFT-s-OFDM is full rank") {
  const auto ofdm = build_scheme(SchemeKind::plain_ofdm, 8, 4);
  const auto dft = build_scheme(SchemeKind::dft_s_ofdm, 8, 4);
  for (std::size_t q = 0; q < 8; ++q) {
    const auto j = judgment_matrix(ofdm, q, 4, 0);
    CHECK(j.matrix.rows() == 8);
    CHECK(j.matrix.cols() == 4);
    CHECK(rank_of(j.matrix) == 1);
    CHECK(rank_of(judgment_matrix(dft, q, 4, 0).matrix) == 4);
  }
  const auto c_ofdm = check_full_diversity_condition(ofdm, 4, 0);
  CHECK_FALSE(c_ofdm.pass);
  CHECK(c_ofdm.lower_bound == 1);
  const auto c_dft = check_full_diversity_condition(dft, 4, 0);
  CHECK(c_dft.pass);
  CHECK(c_dft.full_order == 4);
  CHECK(c_dft.per_q_ranks == std::vector<std::size_t>(8, 4));
  CHECK_THROWS_AS(check_full_diversity_condition(dft, 6, 0), Error);
}

TEST_CASE("doubly dispersive judgment matrix columns") {
  SchemeParams p;
  p.n_doppler = 4;
  p.m_delay = 2;
  const auto s = build_scheme(SchemeKind::dd_grid, 8, 2, p);
  const auto j = judgment_matrix(s, 3, 2, 1);
  CHECK(j.doubly);
  REQUIRE(j.matrix.cols() == 6);
  // column (k + K) L + l holds exp(j 2 pi k p / M) Psi(p - l, q)
  for (std::ptrdiff_t k = -1; k <= 1; ++k)
    for (std::size_t l = 0; l < 2; ++l)
      for (std::ptrdiff_t row = 0; row < 8; ++row) {
        const Complex expect = std::exp(Complex(0.0, kTwoPi * static_cast<double>(k * row) / 8.0)) *
                               s.at(row - static_cast<std::ptrdiff_t>(l), 3);
        CHECK(std::abs(j.matrix(row, (k + 1) * 2 + static_cast<Eigen::Index>(l)) - expect) < 1e-12);
      }
}

TEST_CASE("exhaustive diversity agrees with the brute-force oracle") {
  SchemeParams p;
  p.n_doppler = 3;
  p.m_delay = 2;
  Rng rng(21);
  const std::vector<std::pair<ModulationScheme, std::size_t>> cases{
      {build_scheme(SchemeKind::plain_ofdm, 4, 2), 0},
      {build_scheme(SchemeKind::dft_s_ofdm, 4, 2), 0},
      {build_scheme(SchemeKind::dft_s_ofdm, 5, 2), 0},
      {unitary_custom(5, 2, dft_matrix(5).adjoint() * random_unitary(5, rng)), 0},
      {build_scheme(SchemeKind::dd_grid, 6, 1, p), 1},
  };
  for (const auto& [scheme, k] : cases) {
    const std::size_t l = k == 0 ? 2 : 1;
    for (std::uint64_t seed : {0ULL, 1ULL, 2ULL}) {
      const auto phi = seed == 0 ? RotationPattern::identity(scheme.m()) : random_rotation(scheme.m(), seed);
      const auto rep = exhaustive_diversity(scheme, phi, kBpskB, l, k);
      CHECK(rep.order == brute_force_order(scheme, phi, kBpskB, l, k));
      CHECK(rep.full_order == l * (2 * k + 1));
      CHECK(rep.n_vectors_checked < rep.n_vectors_total);
      CHECK(rank_of(error_event_matrix(scheme, phi, rep.witness, l, k)) == rep.order);
    }
  }
}

TEST_CASE("QPSK deduplication keeps the minimum") {
  const DifferenceSet b = difference_set(make_alphabet(AlphabetKind::qpsk));
  const auto s = build_scheme(SchemeKind::dft_s_ofdm, 3, 1);
  for (std::uint64_t seed : {0ULL, 4ULL}) {
    const auto phi = seed == 0 ? RotationPattern::identity(3) : random_rotation(3, seed);
    const auto rep = exhaustive_diversity(s, phi, b, 2, 0);
    CHECK(rep.order == brute_force_order(s, phi, b, 2, 0));
    CHECK(rep.dedup_factor > 1.5);
  }
}

TEST_CASE("exhaustive diversity is independent of the worker count") {
  const auto s = build_scheme(SchemeKind::dft_s_ofdm, 8, 4);
  const auto phi = RotationPattern::identity(8);
  EnumerationOptions one, four;
  four.workers = 4;
  const auto a = exhaustive_diversity(s, phi, kBpskB, 4, 0, one);
  const auto b = exhaustive_diversity(s, phi, kBpskB, 4, 0, four);
  CHECK(a.order == b.order);
  CHECK(a.witness_index == b.witness_index);
  CHECK(a.n_vectors_checked == b.n_vectors_checked);
  CHECK(to_json(a) == to_json(b));
}

TEST_CASE("demodulation leaves the order unchanged") {
  const auto s = build_scheme(SchemeKind::dft_s_ofdm, 4, 2);
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
    const auto phi = random_rotation(4, seed);
    const ComplexMatrix g = s.g();
    CHECK(exhaustive_diversity(s, phi, kBpskB, 2, 0, {}, &g).order ==
          exhaustive_diversity(s, phi, kBpskB, 2, 0).order);
  }
}

TEST_CASE("rotation does not help plain OFDM") {
  const auto s = build_scheme(SchemeKind::plain_ofdm, 4, 2);
  for (std::uint64_t seed = 1; seed <= 5; ++seed)
    CHECK(exhaustive_diversity(s, random_rotation(4, seed), kBpskB, 2, 0).order == 1);
}

TEST_CASE("condition pass implies full order for random rotations, failure is witnessed") {
  Rng rng(77);
  int n_pass = 0, n_fail = 0;
  for (int trial = 0; trial < 8; ++trial) {
    const std::size_t m = 4;
    ComplexMatrix tilde = random_unitary(m, rng);
    if (trial % 2 == 1) {
      // Block structure: symbol 0 sits on a single subcarrier.
      tilde.setZero();
      tilde(0, 0) = 1.0;
      tilde.bottomRightCorner(3, 3) = random_unitary(3, rng);
    }
    const auto s = unitary_custom(m, 1, dft_matrix(m).adjoint() * tilde);
    const auto cond = check_full_diversity_condition(s, 2, 0);
    if (cond.pass) {
      ++n_pass;
      for (std::uint64_t seed = 1; seed <= 3; ++seed)
        CHECK(exhaustive_diversity(s, random_rotation(m, seed), kBpskB, 2, 0).order == 2);
    } else {
      ++n_fail;
      for (std::size_t q = 0; q < m; ++q) {
        if (cond.per_q_ranks[q] == 2) continue;
        ComplexVector z = ComplexVector::Zero(m);
        z(static_cast<Eigen::Index>(q)) = 2.0;
        CHECK(rank_of(error_event_matrix(s, random_rotation(m, 9), z, 2, 0)) < 2);
      }
    }
  }
  CHECK(n_pass > 0);
  CHECK(n_fail > 0);
}

TEST_CASE("nonzero spread check") {
  const Precoder f{dft_matrix(4), "dft"};
  const auto bad = nonzero_spread_check(f, RotationPattern::identity(4), kBpskB);
  CHECK_FALSE(bad.pass);
  REQUIRE(bad.witness_z.has_value());
  const ComplexVector x = f.matrix * *bad.witness_z;
  CHECK(std::abs(x(static_cast<Eigen::Index>(*bad.witness_entry))) < 1e-9 * x.norm());
  CHECK(nonzero_spread_check(f, random_rotation(4, 3), kBpskB).pass);
}

TEST_CASE("sequential construction for DFT precoders") {
  for (std::size_t m = 2; m <= 6; ++m) {
    const Precoder f{dft_matrix(m), "dft"};
    const auto res = construct_rotation_precoded(f, kBpskB, 10 + m);
    CHECK(nonzero_spread_check(f, res.phi, kBpskB).pass);
    const auto& cert = res.certificate;
    REQUIRE(cert.forbidden_sizes.size() == m);
    std::uint64_t pow = 1;
    for (std::size_t q = 1; q < m; ++q) {
      pow *= 3;
      CHECK(cert.inequality_counts[q] == m * pow * 2);
      CHECK(cert.forbidden_sizes[q] <= cert.inequality_counts[q]);
    }
    CHECK(cert.total_inequalities == total_inequality_count(m, 3));
    CHECK(cert.min_clearance >= cert.exclusion_radius);
    // Same seed, same pattern.
    CHECK(construct_rotation_precoded(f, kBpskB, 10 + m).phi.angles == res.phi.angles);
  }
  CHECK(total_inequality_count(8, 3) == 52464);

  const Precoder id{ComplexMatrix::Identity(4, 4), "identity"};
  CHECK_THROWS_AS(construct_rotation_precoded(id, kBpskB, 1), Error);
}

TEST_CASE("general construction") {
  SchemeParams p;
  p.n_doppler = 4;
  p.m_delay = 2;
  const auto dd = build_scheme(SchemeKind::dd_grid, 8, 2, p);
  const auto res = construct_rotation_general(dd, kBpskB, 2, 1, 3, 20);
  CHECK(res.certificate.verified_order == 6);
  CHECK(exhaustive_diversity(dd, res.phi, kBpskB, 2, 1).order == 6);

  try {
    construct_rotation_general(build_scheme(SchemeKind::plain_ofdm, 4, 2), kBpskB, 2, 0, 1, 5);
    FAIL("expected hypothesis error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::hypothesis);
  }
}

TEST_CASE("continuous delays on the sample grid match the discrete order") {
  const auto s = build_scheme(SchemeKind::dft_s_ofdm, 4, 2);
  const Precoder f{dft_matrix(4), "dft"};
  const ContinuousDelayProfile grid{{0.0, 0.25}, {}};
  for (std::uint64_t seed : {0ULL, 5ULL, 6ULL}) {
    const auto phi = seed == 0 ? RotationPattern::identity(4) : random_rotation(4, seed);
    CHECK(diversity_continuous_delays(f, phi, kBpskB, grid) ==
          exhaustive_diversity(s, phi, kBpskB, 2, 0).order);
  }
  const ContinuousDelayProfile frac{{0.0, 0.13, 0.4}, {}};
  CHECK(diversity_continuous_delays(f, random_rotation(4, 3), kBpskB, frac) == 3);
}

TEST_CASE("enumeration cap") {
  const auto s = build_scheme(SchemeKind::dft_s_ofdm, 11, 1);
  try {
    exhaustive_diversity(s, RotationPattern::identity(11), kBpskB, 2, 0);
    FAIL("expected cap error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::cap_exceeded);
  }
  EnumerationOptions big;
  big.cap = 200000;
  CHECK_NOTHROW(exhaustive_diversity(s, random_rotation(11, 1), kBpskB, 2, 0, big));
}

TEST_CASE("PEP bound") {
  ComplexMatrix x = ComplexMatrix::Zero(2, 4);
  x(0, 0) = 3.0;
  x(1, 1) = 4.0;
  const auto b = pep_upper_bound(x, 0.1, 2.0);
  CHECK(b.rank_used == 2);
  CHECK(b.bound == doctest::Approx(1.0 / ((1.0 + 16.0 / 0.8) * (1.0 + 9.0 / 0.8))));
  CHECK(pep_upper_bound(x, 0.01, 2.0).bound < b.bound);

  const auto s = build_scheme(SchemeKind::dft_s_ofdm, 4, 2);
  const auto h = equivalent_channels(s, random_rotation(4, 1), 2, 0);
  ComplexVector d1(4), d2(4);
  d1 << 1, 1, -1, 1;
  d2 << 1, -1, -1, 1;
  const ComplexMatrix diff = pep_difference_matrix(h, d1, d2);
  CHECK(diff.rows() == 2);
  CHECK((diff.row(1).transpose() - h[1] * (d1 - d2)).norm() < 1e-14);
  CHECK_THROWS_AS(pep_upper_bound(x, 0.0, 1.0), Error);
}

TEST_CASE("determinant pencil root counts") {
  ComplexMatrix a = ComplexMatrix::Identity(2, 2);
  ComplexMatrix b = ComplexMatrix::Zero(2, 2);
  b(0, 0) = 1.0;
  b(1, 1) = 2.0;
  const auto r = lemma1_root_count(a, b);
  CHECK(r.n_roots == 2);
  CHECK(r.constant_coeff_nonzero);
  CHECK(r.within_bound);

  Rng rng(4);
  for (auto [rows, cols] : std::vector<std::pair<int, int>>{{3, 1}, {1, 4}, {6, 4}, {2, 5}}) {
    ComplexMatrix x(rows, cols), y(rows, cols);
    for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = complex_gaussian(rng, 1.0);
    for (Eigen::Index i = 0; i < y.size(); ++i) y(i) = complex_gaussian(rng, 1.0);
    const auto res = lemma1_root_count(x, y);
    CHECK(res.bound == static_cast<std::size_t>(std::max(rows, cols)));
    CHECK(res.within_bound);
    CHECK(res.constant_coeff_nonzero);
  }
  CHECK_THROWS_AS(lemma1_root_count(ComplexMatrix::Zero(2, 2), ComplexMatrix::Identity(2, 2)), Error);
}
