#include "rotdiv/channel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rotdiv/error.hpp"

namespace rotdiv {

namespace {

constexpr std::uint64_t kChannelDomain = 0x4348414eULL;  // "CHAN"
constexpr std::uint64_t kNoiseDomain = 0x4e4f4953ULL;    // "NOIS"

void check_memory(std::size_t l_max, std::size_t mp) {
  require(l_max >= 1, ErrorKind::input, "channel needs at least one delay tap");
  require(l_max - 1 <= mp, ErrorKind::input,
          "prefix too short: Mp = " + std::to_string(mp) + " < L - 1 = " +
              std::to_string(l_max - 1));
}

}  // namespace

void validate(const ContinuousDelayProfile& profile) {
  require(!profile.delays.empty(), ErrorKind::input, "delay profile needs at least one path");
  for (double t : profile.delays)
    require(std::isfinite(t) && t >= 0.0 && t < 1.0, ErrorKind::input,
            "normalized delays tau * delta_f must lie in [0, 1)");
  for (std::size_t i = 0; i < profile.delays.size(); ++i)
    for (std::size_t j = i + 1; j < profile.delays.size(); ++j)
      require(profile.delays[i] != profile.delays[j], ErrorKind::input,
              "path delays must be pairwise distinct");
  require(profile.gains.empty() || profile.gains.size() == profile.delays.size(), ErrorKind::input,
          "gains must be empty or match the number of delays");
}

ComplexMatrix build_shift_matrix(std::size_t m, std::size_t mp, std::size_t l) {
  require(m >= 1, ErrorKind::input, "shift matrix needs m >= 1");
  require(l <= mp, ErrorKind::input,
          "tap delay " + std::to_string(l) + " exceeds prefix length " + std::to_string(mp));
  const auto rows = static_cast<Eigen::Index>(m);
  ComplexMatrix a = ComplexMatrix::Zero(rows, static_cast<Eigen::Index>(m + mp));
  a.middleCols(static_cast<Eigen::Index>(mp - l), rows).setIdentity();
  return a;
}

ComplexVector doppler_ramp(std::size_t m, std::ptrdiff_t k) {
  ComplexVector out(static_cast<Eigen::Index>(m));
  const auto mm = static_cast<std::ptrdiff_t>(m);
  for (std::ptrdiff_t p = 0; p < mm; ++p) {
    // Reduce p*k mod M before forming the angle.
    const std::ptrdiff_t e = ((p * k) % mm + mm) % mm;
    out(p) = std::polar(1.0, kTwoPi * static_cast<double>(e) / static_cast<double>(m));
  }
  return out;
}

ChannelRealization draw_channel(ChannelKind kind, std::size_t l, std::size_t k, std::size_t m,
                                std::uint64_t seed) {
  require(l >= 1, ErrorKind::input, "channel needs at least one delay tap");
  Rng rng(derive_stream(seed, kChannelDomain, 0));
  if (kind == ChannelKind::time) return draw_time_channel(l, rng);
  require((2 * k + 1) * l < m, ErrorKind::input,
          "doubly dispersive channel requires (2K+1) L < M");
  return draw_doubly_channel(l, k, m, rng);
}

ComplexVector apply_channel(const ChannelRealization& ch, const ComplexVector& s, std::size_t mp,
                            double n0, std::uint64_t seed) {
  require(n0 >= 0.0 && std::isfinite(n0), ErrorKind::input, "noise variance must be >= 0");
  require(static_cast<std::size_t>(s.size()) > mp, ErrorKind::input,
          "transmit vector shorter than its prefix");
  require_finite(s, "transmit vector");
  const std::size_t m = static_cast<std::size_t>(s.size()) - mp;
  const auto offset = static_cast<std::ptrdiff_t>(mp);

  ComplexVector r = ComplexVector::Zero(static_cast<Eigen::Index>(m));
  if (const auto* tc = std::get_if<TimeChannel>(&ch)) {
    check_memory(tc->l_max(), mp);
    for (std::size_t p = 0; p < m; ++p)
      for (std::size_t l = 0; l < tc->l_max(); ++l)
        r(static_cast<Eigen::Index>(p)) +=
            tc->taps[l] * s(static_cast<std::ptrdiff_t>(p) - static_cast<std::ptrdiff_t>(l) + offset);
  } else {
    const auto& dc = std::get<DoublyDispersiveChannel>(ch);
    check_memory(dc.l_max, mp);
    require(dc.frame_len == m, ErrorKind::input, "channel frame length does not match the signal");
    const auto kk = static_cast<std::ptrdiff_t>(dc.k_max);
    for (std::ptrdiff_t k = -kk; k <= kk; ++k) {
      const ComplexVector ramp = doppler_ramp(m, k);
      for (std::size_t l = 0; l < dc.l_max; ++l) {
        const Complex h = dc.tap(k, l);
        for (std::size_t p = 0; p < m; ++p)
          r(static_cast<Eigen::Index>(p)) +=
              h * ramp(static_cast<Eigen::Index>(p)) *
              s(static_cast<std::ptrdiff_t>(p) - static_cast<std::ptrdiff_t>(l) + offset);
      }
    }
  }

  if (n0 > 0.0) {
    Rng rng(derive_stream(seed, kNoiseDomain, 0));
    for (Eigen::Index p = 0; p < r.size(); ++p) r(p) += complex_gaussian(rng, n0);
  }
  return r;
}

std::vector<ComplexMatrix> equivalent_channels_undemodulated(const ModulationScheme& scheme,
                                                             const RotationPattern& phi,
                                                             std::size_t l_max, std::size_t k_max) {
  require(phi.size() == scheme.m(), ErrorKind::input, "rotation length must equal M");
  check_memory(l_max, scheme.mp());
  const std::size_t m = scheme.m();
  const ComplexMatrix rotated = scheme.psi() * phi.phases().asDiagonal();
  const auto kk = static_cast<std::ptrdiff_t>(k_max);

  std::vector<ComplexMatrix> out;
  out.reserve(l_max * (2 * k_max + 1));
  for (std::ptrdiff_t k = -kk; k <= kk; ++k) {
    const ComplexVector ramp = doppler_ramp(m, k);
    for (std::size_t l = 0; l < l_max; ++l) {
      // A_l selects rows Mp-l .. Mp-l+M-1 of the stored Psi.
      ComplexMatrix h = rotated.middleRows(static_cast<Eigen::Index>(scheme.mp() - l),
                                           static_cast<Eigen::Index>(m));
      if (k != 0) h = ramp.asDiagonal() * h;
      out.push_back(std::move(h));
    }
  }
  return out;
}

std::vector<ComplexMatrix> equivalent_channels(const ModulationScheme& scheme,
                                               const RotationPattern& phi, std::size_t l_max,
                                               std::size_t k_max) {
  auto out = equivalent_channels_undemodulated(scheme, phi, l_max, k_max);
  for (auto& h : out) h = scheme.g() * h;
  return out;
}

}  // namespace rotdiv
