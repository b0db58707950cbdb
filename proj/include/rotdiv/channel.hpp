#pragma once

#include <cstddef>
#include <cstdint>
#include <variant>
#include <vector>

#include "rotdiv/alphabet.hpp"
#include "rotdiv/linalg.hpp"
#include "rotdiv/modulation.hpp"
#include "rotdiv/random.hpp"

namespace rotdiv {

/// Time-dispersive channel: L i.i.d. CN(0, 1/P) taps with P = L.
struct TimeChannel {
  std::vector<Complex> taps;
  double power_norm = 1.0;

  std::size_t l_max() const noexcept { return taps.size(); }
};

/// Doubly dispersive channel with (2K+1) Doppler taps per delay tap. taps
/// is indexed (k + K) * L + l, the same order as the columns of V_q.
struct DoublyDispersiveChannel {
  std::size_t l_max = 0;
  std::size_t k_max = 0;
  std::size_t frame_len = 0;
  std::vector<Complex> taps;
  double power_norm = 1.0;

  Complex tap(std::ptrdiff_t k, std::size_t l) const {
    return taps[static_cast<std::size_t>(k + static_cast<std::ptrdiff_t>(k_max)) * l_max + l];
  }
};

using ChannelRealization = std::variant<TimeChannel, DoublyDispersiveChannel>;

/// Continuous path delays expressed as tau_i * delta_f in [0, 1).
struct ContinuousDelayProfile {
  std::vector<double> delays;
  std::vector<Complex> gains;  // optional; unused by the rank analysis
};

void validate(const ContinuousDelayProfile& profile);

/// A_l = [0_{M x (Mp-l)}, I_M, 0_{M x l}].
ComplexMatrix build_shift_matrix(std::size_t m, std::size_t mp, std::size_t l);

/// diag(exp(j 2 pi p k / M)), p = 0..M-1.
ComplexVector doppler_ramp(std::size_t m, std::ptrdiff_t k);

template <class G>
TimeChannel draw_time_channel(std::size_t l, G& rng) {
  TimeChannel ch;
  ch.power_norm = static_cast<double>(l);
  ch.taps.resize(l);
  for (auto& h : ch.taps) h = complex_gaussian(rng, 1.0 / ch.power_norm);
  return ch;
}

template <class G>
DoublyDispersiveChannel draw_doubly_channel(std::size_t l, std::size_t k, std::size_t m, G& rng) {
  DoublyDispersiveChannel ch;
  ch.l_max = l;
  ch.k_max = k;
  ch.frame_len = m;
  ch.power_norm = static_cast<double>(l * (2 * k + 1));
  ch.taps.resize(l * (2 * k + 1));
  for (auto& h : ch.taps) h = complex_gaussian(rng, 1.0 / ch.power_norm);
  return ch;
}

enum class ChannelKind { time, doubly };

/// Seeded draw. For `doubly`, `m` is the frame length and must satisfy
/// (2K+1) L < M.
ChannelRealization draw_channel(ChannelKind kind, std::size_t l, std::size_t k, std::size_t m,
                                std::uint64_t seed);

/// r[p] = sum_l sum_k h_l^k exp(j 2 pi p k / M) s[p - l] + w[p], p = 0..M-1,
/// with s indexed from -Mp. w is CN(0, n0); n0 == 0 gives the noiseless map.
ComplexVector apply_channel(const ChannelRealization& ch, const ComplexVector& s, std::size_t mp,
                            double n0, std::uint64_t seed);

/// H_l = G A_l Psi Phi (k_max == 0) or H_{l,k} = G Delta_k A_l Psi Phi,
/// ordered (k + K) * L + l.
std::vector<ComplexMatrix> equivalent_channels(const ModulationScheme& scheme,
                                               const RotationPattern& phi, std::size_t l_max,
                                               std::size_t k_max);

/// Same as equivalent_channels with the demodulation matrix omitted
/// (H~_l = A_l Psi Phi), which leaves every diversity rank unchanged.
std::vector<ComplexMatrix> equivalent_channels_undemodulated(const ModulationScheme& scheme,
                                                             const RotationPattern& phi,
                                                             std::size_t l_max, std::size_t k_max);

}  // namespace rotdiv
