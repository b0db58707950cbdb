#include <doctest.h>

#include "rotdiv/channel.hpp"
#include "rotdiv/error.hpp"

using namespace rotdiv;

namespace {

ComplexVector random_vector(std::size_t n, Rng& rng) {
  ComplexVector v(static_cast<Eigen::Index>(n));
  for (auto& x : v) x = complex_gaussian(rng, 1.0);
  return v;
}

}  // namespace

TEST_CASE("shift matrix selects the delayed window") {
  const ComplexMatrix a = build_shift_matrix(4, 2, 1);
  CHECK(a.rows() == 4);
  CHECK(a.cols() == 6);
  // row p picks sample p - 1, stored at column p - 1 + Mp
  for (Eigen::Index p = 0; p < 4; ++p) CHECK(a(p, p + 1) == Complex(1.0));
  CHECK(a.cwiseAbs().sum() == doctest::Approx(4.0));
  CHECK_THROWS_AS(build_shift_matrix(4, 2, 3), Error);
}

TEST_CASE("time-dispersive channel: convolution equals sum of h_l A_l s") {
  Rng rng(1);
  const std::size_t m = 6, mp = 2, l = 3;
  const auto ch = draw_channel(ChannelKind::time, l, 0, m, 99);
  const auto& tc = std::get<TimeChannel>(ch);
  CHECK(tc.taps.size() == l);
  CHECK(tc.power_norm == 3.0);
  const ComplexVector s = random_vector(m + mp, rng);
  ComplexVector oracle = ComplexVector::Zero(m);
  for (std::size_t i = 0; i < l; ++i) oracle += tc.taps[i] * build_shift_matrix(m, mp, i) * s;
  CHECK((apply_channel(ch, s, mp, 0.0, 0) - oracle).norm() < 1e-13);
}

TEST_CASE("doubly dispersive channel: matrix oracle") {
  Rng rng(2);
  const std::size_t m = 8, mp = 2, l = 2, k = 1;
  const auto ch = draw_channel(ChannelKind::doubly, l, k, m, 5);
  const auto& dc = std::get<DoublyDispersiveChannel>(ch);
  CHECK(dc.taps.size() == l * (2 * k + 1));
  const ComplexVector s = random_vector(m + mp, rng);
  ComplexVector oracle = ComplexVector::Zero(m);
  for (std::ptrdiff_t kk = -1; kk <= 1; ++kk) {
    ComplexMatrix delta = ComplexMatrix::Zero(m, m);
    for (std::size_t p = 0; p < m; ++p)
      delta(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p)) =
          std::exp(Complex(0.0, kTwoPi * static_cast<double>(kk) * static_cast<double>(p) / m));
    for (std::size_t li = 0; li < l; ++li) oracle += dc.tap(kk, li) * delta * build_shift_matrix(m, mp, li) * s;
  }
  CHECK((apply_channel(ch, s, mp, 0.0, 0) - oracle).norm() < 1e-12);
  CHECK_THROWS_AS(draw_channel(ChannelKind::doubly, 3, 1, 8, 1), Error);
}

TEST_CASE("equivalent channels reproduce the demodulated link") {
  for (std::size_t k : {0U, 1U}) {
    SchemeParams p;
    p.n_doppler = 4;
    p.m_delay = 2;
    const auto scheme = k == 0 ? build_scheme(SchemeKind::dft_s_ofdm, 8, 2)
                               : build_scheme(SchemeKind::dd_grid, 8, 2, p);
    const auto phi = random_rotation(8, 3);
    const auto ch = draw_channel(k == 0 ? ChannelKind::time : ChannelKind::doubly, 2, k, 8, 4);
    Rng rng(6);
    const ComplexVector d = random_vector(8, rng);
    const ComplexVector r = apply_channel(ch, transmit(scheme, phi, d), 2, 0.0, 0);

    const auto h = equivalent_channels(scheme, phi, 2, k);
    const auto& taps = k == 0 ? std::get<TimeChannel>(ch).taps : std::get<DoublyDispersiveChannel>(ch).taps;
    REQUIRE(h.size() == taps.size());
    ComplexVector y = ComplexVector::Zero(8);
    for (std::size_t i = 0; i < h.size(); ++i) y += taps[i] * h[i] * d;
    CHECK((scheme.g() * r - y).norm() < 1e-12);

    const auto hu = equivalent_channels_undemodulated(scheme, phi, 2, k);
    ComplexVector yu = ComplexVector::Zero(8);
    for (std::size_t i = 0; i < hu.size(); ++i) yu += taps[i] * hu[i] * d;
    CHECK((r - yu).norm() < 1e-12);
  }
}

TEST_CASE("channel noise is seeded and has the requested variance") {
  const std::size_t m = 4000;
  const TimeChannel ch{{Complex(0.0)}, 1.0};
  const ComplexVector s = ComplexVector::Zero(m);
  const ComplexVector a = apply_channel(ch, s, 0, 0.5, 7);
  CHECK((a - apply_channel(ch, s, 0, 0.5, 7)).norm() == 0.0);
  CHECK((a - apply_channel(ch, s, 0, 0.5, 8)).norm() > 0.0);
  CHECK(a.squaredNorm() / m == doctest::Approx(0.5).epsilon(0.06));
  CHECK_THROWS_AS(apply_channel(ch, s, 0, -1.0, 7), Error);
}

TEST_CASE("tap draws are CN(0, 1/P)") {
  Rng rng(8);
  double power = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const auto ch = draw_time_channel(4, rng);
    for (const auto& h : ch.taps) power += std::norm(h);
  }
  CHECK(power / n == doctest::Approx(1.0).epsilon(0.03));
}

TEST_CASE("continuous delay profile validation") {
  CHECK_NOTHROW(validate(ContinuousDelayProfile{{0.0, 0.3}, {}}));
  CHECK_THROWS_AS(validate(ContinuousDelayProfile{{0.0, 1.0}, {}}), Error);
  CHECK_THROWS_AS(validate(ContinuousDelayProfile{{0.2, 0.2}, {}}), Error);
  CHECK_THROWS_AS(validate(ContinuousDelayProfile{{}, {}}), Error);
}
