#pragma once

// Detectors and Monte Carlo engines: BER-vs-SNR sweeps under ML or linear
// zero-forcing detection, and PAPR CCDF estimation.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/QR>
#include <nlohmann/json.hpp>

#include "rotdiv/alphabet.hpp"
#include "rotdiv/channel.hpp"
#include "rotdiv/linalg.hpp"
#include "rotdiv/modulation.hpp"

namespace rotdiv {

enum class DetectorKind { ml, lzf };

DetectorKind parse_detector_kind(std::string_view name);
const char* to_string(DetectorKind kind) noexcept;

/// Default ML search cap: M * bits_per_symbol <= 16.
inline constexpr std::size_t kDefaultMlCapBits = 16;

/// Exact ML over A^M for y = H d + w by depth-first search on the QR
/// factorization of H, pruning branches whose partial metric already
/// exceeds the best complete one. Candidate index sum_q s_q |A|^(M-1-q)
/// breaks exact ties (lowest wins).
class MlDetector {
 public:
  MlDetector(const MappingAlphabet& alphabet, std::size_t m, std::size_t cap_bits = kDefaultMlCapBits);

  /// Writes the per-symbol alphabet indices of the decision into `symbols`.
  void detect(const ComplexVector& y, const ComplexMatrix& h, std::vector<std::size_t>& symbols);

 private:
  void search(std::size_t level, double partial);

  const MappingAlphabet* alphabet_;
  std::size_t m_;
  std::size_t n_points_;
  Eigen::HouseholderQR<ComplexMatrix> qr_;
  ComplexMatrix r_;
  ComplexVector y_rot_;
  std::vector<std::pair<double, std::size_t>> order_;  // per level scratch, n_points each
  std::vector<std::size_t> current_;
  std::vector<std::size_t> best_;
  std::uint64_t best_index_ = 0;
  double best_metric_ = 0.0;
};

/// argmin_d || y - sum_i taps_i h_mats_i d ||^2 over d in A^M.
ComplexVector ml_detect(const ComplexVector& y, const std::vector<ComplexMatrix>& h_mats,
                        const std::vector<Complex>& taps, const MappingAlphabet& alphabet,
                        std::size_t cap_bits = kDefaultMlCapBits);

/// || y - H d ||^2.
double ml_metric(const ComplexVector& y, const ComplexMatrix& h, const ComplexVector& d);

/// Nearest alphabet index for each entry of `v`.
void hard_decision(const ComplexVector& v, const MappingAlphabet& alphabet,
                   std::vector<std::size_t>& symbols);

/// Reciprocal condition estimate below which LZF treats the frame as an
/// erasure (condition number above 1e12).
inline constexpr double kLzfMinRcond = 1e-12;

/// Zero-forcing: hard decision on h_total^{-1} y, where h_total already
/// includes the rotation. Returns nullopt when h_total is numerically
/// singular.
std::optional<std::vector<std::size_t>> lzf_detect_indices(const ComplexVector& y,
                                                           const ComplexMatrix& h_total,
                                                           const MappingAlphabet& alphabet);
std::optional<ComplexVector> lzf_detect(const ComplexVector& y, const ComplexMatrix& h_total,
                                        const MappingAlphabet& alphabet);

struct SimConfig {
  ModulationScheme scheme;
  RotationPattern rotation;
  MappingAlphabet alphabet;
  std::size_t l_max = 1;
  std::size_t k_max = 0;          // > 0 selects the doubly dispersive channel
  std::vector<double> snr_db;     // SNR = 1 / N0
  std::uint64_t max_frames = 100000;
  std::uint64_t target_errors = 200;  // 0 disables early stopping
  std::uint64_t master_seed = 1;
  DetectorKind detector = DetectorKind::ml;
  unsigned workers = 1;
  std::size_t batch_frames = 2000;
  std::size_t ml_cap_bits = kDefaultMlCapBits;
  std::string label;
};

void validate(const SimConfig& cfg);

struct BerCurve {
  std::string label;
  std::vector<double> snr_db;
  std::vector<double> ber;
  std::vector<std::uint64_t> bit_errors;
  std::vector<std::uint64_t> bits_simulated;
  std::vector<std::uint64_t> frames;
  std::vector<std::uint64_t> erasures;
  nlohmann::json metadata;
};

/// Per-frame randomness (channel, data, noise) comes from stream
/// derive_stream(master_seed, frame domain, frame index) and is shared by
/// every SNR point and every scheme run with the same seed. Frames run in
/// fixed batches; early stopping is decided after each batch in batch order,
/// so the output is identical for any worker count.
BerCurve ber_sweep(const SimConfig& cfg);

/// Same as ber_sweep but also returns the per-frame error indicators for the
/// first `record_frames` frames of each SNR point (used for paired tests).
struct FrameTrace {
  std::vector<std::vector<std::uint32_t>> bit_errors;  // [snr][frame]
};
BerCurve ber_sweep_traced(const SimConfig& cfg, FrameTrace* trace, std::uint64_t record_frames);

/// Least-squares slope of log10(BER) against snr_db / 10 over points inside
/// [lo_db, hi_db] with at least `min_errors` bit errors, negated so a
/// diversity-d curve gives ~d.
double slope_estimate(const BerCurve& curve, std::pair<double, double> snr_window,
                      std::uint64_t min_errors = 20);

enum class PaprWaveform { ofdm, dft_s_ofdm, precoded };

PaprWaveform parse_papr_waveform(std::string_view name);
const char* to_string(PaprWaveform w) noexcept;

struct PaprConfig {
  PaprWaveform waveform = PaprWaveform::ofdm;
  std::optional<Precoder> precoder;         // waveform == precoded
  std::optional<RotationPattern> rotation;  // none = identity
  MappingAlphabet alphabet;
  std::size_t m = 64;
  std::size_t oversample = 8;
  std::uint64_t frames = 1000;
  std::uint64_t seed = 1;
  unsigned workers = 1;
  double grid_step_db = 0.1;
  std::string label;
};

struct PaprCcdf {
  std::string label;
  std::vector<double> papr_db;  // grid
  std::vector<double> ccdf;     // P(PAPR > grid value)
  std::size_t oversample = 1;
  std::uint64_t frames = 0;
  std::vector<double> samples_db;  // per-frame PAPR, in frame order

  /// Smallest PAPR x (from the samples) with P(PAPR > x) <= level.
  double papr_at_ccdf(double level) const;
};

/// PAPR of one block: frequency-domain symbols are zero-padded at the
/// spectrum center to oversample * M bins and inverse transformed; the
/// prefix is excluded.
double papr_db(const ComplexVector& freq_symbols, std::size_t oversample);

/// Per-frame frequency-domain symbols x = P Phi d for the configured
/// waveform (P = I for OFDM, normalized DFT for DFT-s-OFDM).
PaprCcdf papr_ccdf(const PaprConfig& cfg);

nlohmann::json to_json(const BerCurve& curve);

}  // namespace rotdiv
