#pragma once

// Diversity-order analysis for linear modulation with constellation
// rotation: judgment-matrix conditions, exhaustive rank enumeration over
// error patterns, rotation construction, and the PEP product bound.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "rotdiv/alphabet.hpp"
#include "rotdiv/channel.hpp"
#include "rotdiv/linalg.hpp"
#include "rotdiv/modulation.hpp"

namespace rotdiv {

/// Default cap on the number of error vectors, |B|^M, an exhaustive
/// routine may enumerate (3^10).
inline constexpr std::uint64_t kDefaultEnumerationCap = 59049;

struct EnumerationOptions {
  std::uint64_t cap = kDefaultEnumerationCap;
  unsigned workers = 1;
  double rank_scale = kDefaultRankScale;
};

/// Column q of Psi shifted by each delay tap (and Doppler-modulated for
/// k_max > 0). Column (k + K) * L + l holds exp(j 2 pi k p / M) Psi(p - l, q).
struct JudgmentMatrix {
  std::size_t q = 0;
  ComplexMatrix matrix;
  bool doubly = false;
};

JudgmentMatrix judgment_matrix(const ModulationScheme& scheme, std::size_t q, std::size_t l_max,
                               std::size_t k_max);

struct ConditionResult {
  bool pass = false;
  std::vector<std::size_t> per_q_ranks;
  /// Largest l such that the first l judgment-matrix columns are independent
  /// for every q: the order a random rotation is guaranteed to reach.
  std::size_t lower_bound = 0;
  std::size_t full_order = 0;
};

ConditionResult check_full_diversity_condition(const ModulationScheme& scheme, std::size_t l_max,
                                               std::size_t k_max,
                                               double rank_scale = kDefaultRankScale);

struct DiversityReport {
  std::size_t order = 0;
  std::size_t full_order = 0;
  ComplexVector witness;               // error vector attaining the minimum rank
  std::uint64_t witness_index = 0;     // enumeration index of the witness
  std::uint64_t n_vectors_checked = 0; // after scalar deduplication
  std::uint64_t n_vectors_total = 0;   // |B|^M - 1
  double dedup_factor = 1.0;           // n_vectors_total / n_vectors_checked
  double rank_scale = kDefaultRankScale;
};

/// Error-event matrix [H~_0 z, ..., H~_{L-1} z] (Doppler-extended for
/// k_max > 0) with H~ = A_l Psi Phi, optionally left-multiplied by a
/// demodulation matrix.
ComplexMatrix error_event_matrix(const ModulationScheme& scheme, const RotationPattern& phi,
                                 const ComplexVector& z, std::size_t l_max, std::size_t k_max,
                                 const ComplexMatrix* demodulation = nullptr);

/// Minimum rank of the error-event matrix over all z in B^M \ {0}, up to
/// scalar equivalence (z ~ c z whenever both lie in B^M).
///
/// Enumeration index i encodes z(q) = B[digit_q(i)] with z(0) as the least
/// significant base-|B| digit. The witness is the lowest-index minimizer,
/// which makes the result independent of the worker count.
DiversityReport exhaustive_diversity(const ModulationScheme& scheme, const RotationPattern& phi,
                                     const DifferenceSet& b, std::size_t l_max, std::size_t k_max,
                                     const EnumerationOptions& opts = {},
                                     const ComplexMatrix* demodulation = nullptr);

struct SpreadCheckResult {
  bool pass = false;
  std::optional<ComplexVector> witness_z;
  std::optional<std::size_t> witness_entry;
  /// min over z, m of |x_e(m)| / ||x_e||.
  double min_relative_magnitude = 0.0;
  /// Passed, but with a margin under 1e-6: numerically fragile.
  bool near_threshold = false;
};

/// Relative zero threshold for entries of x_e = P Phi z.
inline constexpr double kSpreadZeroTol = 1e-9;

/// Nonzero-spread condition: x_e = P Phi z has no zero entry for any
/// nonzero error pattern z.
SpreadCheckResult nonzero_spread_check(const Precoder& precoder, const RotationPattern& phi,
                                       const DifferenceSet& b, const EnumerationOptions& opts = {});

enum class ConstructionMode { precoded_exact, general_randomized };

struct RotationCertificate {
  ConstructionMode mode = ConstructionMode::precoded_exact;
  /// precoded_exact: number of distinct forbidden unit-circle points per
  /// step q (entry 0 is always 0), the inequality count per step
  /// M |B|^q (|B| - 1), and their total M (|B|^M - |B|).
  std::vector<std::size_t> forbidden_sizes;
  std::vector<std::uint64_t> inequality_counts;
  std::uint64_t total_inequalities = 0;
  /// Smallest angular distance between a chosen angle and its forbidden set.
  double min_clearance = 0.0;
  std::size_t tries = 0;
  std::size_t verified_order = 0;
  std::size_t full_order = 0;
  std::uint64_t seed = 0;
  double exclusion_radius = 0.0;
};

struct ConstructionResult {
  RotationPattern phi;
  RotationCertificate certificate;
};

struct PrecodedConstructionOptions {
  double exclusion_radius = 1e-6;  // radians
  /// Tolerance on |v| == 1 when deciding whether a candidate lies on the
  /// unit circle.
  double unit_circle_tol = 1e-6;
  std::optional<double> first_angle;
  std::size_t max_draws_per_step = 1000;
  std::uint64_t cap = kDefaultEnumerationCap;
};

/// Sequential construction for a precoder with no zero entries: each angle
/// is drawn uniformly outside the finite set of unit-circle points that would
/// zero an entry of P Phi z for some z supported on symbols 0..q.
ConstructionResult construct_rotation_precoded(const Precoder& precoder, const DifferenceSet& b,
                                               std::uint64_t seed,
                                               const PrecodedConstructionOptions& opts = {});

/// Random draw verified by exhaustive_diversity; retries up to max_tries.
/// Requires check_full_diversity_condition to pass.
ConstructionResult construct_rotation_general(const ModulationScheme& scheme,
                                              const DifferenceSet& b, std::size_t l_max,
                                              std::size_t k_max, std::uint64_t seed,
                                              std::size_t max_tries,
                                              const EnumerationOptions& opts = {});

/// M (|B|^M - |B|).
std::uint64_t total_inequality_count(std::size_t m, std::size_t b_size);

/// min over z of rank([D_1 x_e, ..., D_I x_e]) with x_e = P Phi z and
/// D_i = diag(exp(-j 2 pi m tau_i delta_f)).
std::size_t diversity_continuous_delays(const Precoder& precoder, const RotationPattern& phi,
                                        const DifferenceSet& b,
                                        const ContinuousDelayProfile& profile,
                                        const EnumerationOptions& opts = {});

struct PepBound {
  std::vector<double> singular_values;
  std::size_t rank_used = 0;
  double n0 = 0.0;
  double p_norm = 0.0;
  double bound = 1.0;
};

/// prod_{l < R} 1 / (1 + lambda_l^2 / (4 P N0)) over the nonzero singular
/// values of X_1 - X_2.
PepBound pep_upper_bound(const ComplexMatrix& x1_minus_x2, double n0, double p_norm);

/// X_1 - X_2 for the pair (d1, d2): row i is (H_i (d1 - d2))^T.
ComplexMatrix pep_difference_matrix(const std::vector<ComplexMatrix>& h_mats,
                                    const ComplexVector& d1, const ComplexVector& d2);

struct Lemma1Result {
  std::size_t n_roots = 0;  // distinct roots of det(A~ + c B~)
  bool constant_coeff_nonzero = false;
  std::size_t bound = 0;    // max(m, n)
  std::vector<Complex> coeffs;
  std::vector<Complex> roots;
  bool within_bound = false;
};

/// Completes full-rank A, B (same m x n shape) to nonsingular square
/// matrices by appending an orthonormal basis of the complement of their
/// column space (rows, when m < n), then counts the distinct roots of
/// det(A~ + c B~).
Lemma1Result lemma1_root_count(const ComplexMatrix& a, const ComplexMatrix& b);

nlohmann::json to_json(const DiversityReport& report);
nlohmann::json to_json(const ConditionResult& result);
nlohmann::json to_json(const RotationCertificate& cert);
nlohmann::json complex_vector_to_json(const ComplexVector& v);

}  // namespace rotdiv
