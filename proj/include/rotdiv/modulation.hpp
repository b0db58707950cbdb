#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "rotdiv/alphabet.hpp"
#include "rotdiv/linalg.hpp"

namespace rotdiv {

enum class SchemeKind { plain_ofdm, precoded_cp_ofdm, dft_s_ofdm, dd_grid, custom };

SchemeKind parse_scheme_kind(std::string_view name);
const char* to_string(SchemeKind kind) noexcept;

/// Frequency-domain precoder of a CP-OFDM scheme. Unitary unless built with
/// require_unitary = false, in which case only nonsingularity is checked.
struct Precoder {
  ComplexMatrix matrix;
  std::string label;

  std::size_t size() const noexcept { return static_cast<std::size_t>(matrix.rows()); }
};

Precoder make_precoder(ComplexMatrix matrix, std::string label, bool require_unitary = true);

struct SchemeParams {
  std::optional<Precoder> precoder;  // precoded_cp_ofdm
  std::size_t n_doppler = 0;         // dd_grid
  std::size_t m_delay = 0;           // dd_grid
  std::optional<ComplexMatrix> psi;  // custom, (M+Mp) x M, prefix rows first
  std::optional<ComplexMatrix> g;    // custom, M x M unitary
};

/// Modulation matrix Psi with its prefix rows and the unitary demodulation
/// matrix G. Row p of Psi (p = -Mp .. M-1) is stored at row p + Mp.
///
/// Built-in kinds have unit-norm columns over the data part (the last M
/// rows); prefix rows are copies and carry no extra normalization.
class ModulationScheme {
 public:
  ModulationScheme(SchemeKind kind, std::size_t mp, ComplexMatrix psi, ComplexMatrix g,
                   std::optional<Precoder> precoder = std::nullopt, std::string label = {});

  SchemeKind kind() const noexcept { return kind_; }
  std::size_t m() const noexcept { return m_; }
  std::size_t mp() const noexcept { return mp_; }
  const ComplexMatrix& psi() const noexcept { return psi_; }
  const ComplexMatrix& g() const noexcept { return g_; }
  const std::optional<Precoder>& precoder() const noexcept { return precoder_; }
  const std::string& label() const noexcept { return label_; }

  /// Psi(p, q) with p in [-Mp, M); zero outside the stored rows.
  Complex at(std::ptrdiff_t p, std::size_t q) const noexcept {
    const std::ptrdiff_t row = p + static_cast<std::ptrdiff_t>(mp_);
    if (row < 0 || row >= psi_.rows()) return {0.0, 0.0};
    return psi_(row, static_cast<Eigen::Index>(q));
  }

  /// Last M rows of Psi.
  ComplexMatrix data_part() const { return psi_.bottomRows(static_cast<Eigen::Index>(m_)); }

  bool has_cyclic_prefix() const noexcept;

 private:
  SchemeKind kind_;
  std::size_t m_;
  std::size_t mp_;
  ComplexMatrix psi_;
  ComplexMatrix g_;
  std::optional<Precoder> precoder_;
  std::string label_;
};

/// Prepends the last `mp` rows of an M x N block as a cyclic prefix.
ComplexMatrix add_cyclic_prefix(const ComplexMatrix& block, std::size_t mp);

/// Builds Psi and G for a scheme kind.
///
///   plain_ofdm        Psi = A_CP F^H,            G = F
///   precoded_cp_ofdm  Psi = A_CP F^H P,          G = F
///   dft_s_ofdm        Psi = A_CP I (= A_CP F^H F), G = F
///   dd_grid           symbol q = k * m_delay + d (delay bin d, Doppler bin k)
///                     occupies samples d + k' m_delay, k' = 0..N-1, with
///                     weight exp(+j 2 pi k k' / N) / sqrt(N); G = data part^H
///   custom            wraps params.psi / params.g after validation
///
/// dft_s_ofdm uses the exact identity so that its one-hot columns are free
/// of rounding; it equals precoded_cp_ofdm with P = F to ~1e-15.
ModulationScheme build_scheme(SchemeKind kind, std::size_t m, std::size_t mp,
                              const SchemeParams& params = {});

/// Replaces prefix row p = -1 so the first two columns of every judgment
/// matrix become orthogonal (hence independent). The result is returned as a
/// custom scheme since the prefix is no longer cyclic.
ModulationScheme adjust_prefix_for_diversity2(const ModulationScheme& scheme);

/// s = Psi * Phi * d, length M + Mp with prefix samples first.
ComplexVector transmit(const ModulationScheme& scheme, const RotationPattern& phi,
                       const ComplexVector& d);

/// Custom-scheme file format:
///   {"m": M, "mp": Mp, "psi": [[re, im], ...], "g": [[re, im], ...]}
/// Both matrices are flattened row-major; psi lists prefix rows first.
ModulationScheme scheme_from_json(const nlohmann::json& j);
nlohmann::json scheme_to_json(const ModulationScheme& scheme);

ComplexMatrix matrix_from_pairs(const nlohmann::json& pairs, std::size_t rows, std::size_t cols,
                                std::string_view field);
nlohmann::json matrix_to_pairs(const ComplexMatrix& m);

}  // namespace rotdiv
