#include "rotdiv/diversity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "rotdiv/error.hpp"
#include "rotdiv/parallel.hpp"
#include "rotdiv/random.hpp"

namespace rotdiv {

namespace {

constexpr std::uint64_t kConstructDomain = 0x414c4731ULL;  // "ALG1"
constexpr std::uint64_t kGeneralDomain = 0x47454e52ULL;    // "GENR"

std::size_t full_order_of(std::size_t l_max, std::size_t k_max) { return l_max * (2 * k_max + 1); }

/// Error patterns z in B^M, indexed in base |B| with z(0) least significant.
class ErrorPatternSpace {
 public:
  ErrorPatternSpace(const DifferenceSet& b, std::size_t m, std::uint64_t cap, const char* op)
      : values_(b.values), m_(m) {
    require(!values_.empty() && values_.front() == Complex(0.0), ErrorKind::input,
            std::string(op) + ": difference set must start with 0");
    require(values_.size() >= 2, ErrorKind::input,
            std::string(op) + ": difference set has no nonzero element");
    require(m >= 1, ErrorKind::input, std::string(op) + ": M must be at least 1");
    const double base = static_cast<double>(values_.size());
    const double total = std::pow(base, static_cast<double>(m));
    if (total > static_cast<double>(cap))
      throw Error(ErrorKind::cap_exceeded,
                  std::string(op) + ": |B|^M = " + std::to_string(static_cast<long double>(total)) +
                      " exceeds the enumeration cap " + std::to_string(cap) +
                      "; use check_full_diversity_condition (judgment-matrix ranks, M checks) "
                      "instead, or raise the cap explicitly");
    total_ = 1;
    for (std::size_t i = 0; i < m; ++i) total_ *= values_.size();
    build_scale_map();
  }

  std::uint64_t total() const noexcept { return total_; }
  std::size_t base() const noexcept { return values_.size(); }
  std::size_t m() const noexcept { return m_; }
  const Complex& value(std::size_t digit) const noexcept { return values_[digit]; }

  void decode(std::uint64_t index, std::vector<std::size_t>& digits) const {
    digits.resize(m_);
    for (std::size_t q = 0; q < m_; ++q) {
      digits[q] = static_cast<std::size_t>(index % values_.size());
      index /= values_.size();
    }
  }

  /// Advances digits to index + 1 (little-endian counter).
  void increment(std::vector<std::size_t>& digits) const {
    for (std::size_t q = 0; q < m_; ++q) {
      if (++digits[q] < values_.size()) return;
      digits[q] = 0;
    }
  }

  ComplexVector vector_of(const std::vector<std::size_t>& digits) const {
    ComplexVector z(static_cast<Eigen::Index>(m_));
    for (std::size_t q = 0; q < m_; ++q) z(static_cast<Eigen::Index>(q)) = values_[digits[q]];
    return z;
  }

  /// True when no scalar multiple c z (c != 1) lies in B^M with a smaller
  /// index. The all-zero pattern is never canonical.
  bool canonical(const std::vector<std::size_t>& digits, std::uint64_t index) const {
    std::size_t first = m_;
    for (std::size_t q = 0; q < m_; ++q)
      if (digits[q] != 0) {
        first = q;
        break;
      }
    if (first == m_) return false;
    const std::size_t lead = digits[first];
    const std::size_t n = values_.size();
    for (std::size_t target = 1; target < n; ++target) {
      if (target == lead) continue;
      const int* map = &scale_map_[(lead * n + target) * n];
      std::uint64_t other = 0;
      std::uint64_t weight = 1;
      bool inside = true;
      for (std::size_t q = 0; q < m_; ++q) {
        const int mapped = map[digits[q]];
        if (mapped < 0) {
          inside = false;
          break;
        }
        other += static_cast<std::uint64_t>(mapped) * weight;
        weight *= n;
      }
      if (inside && other < index) return false;
    }
    return true;
  }

 private:
  // scale_map_[(lead * n + target) * n + t] = digit of (B[target] / B[lead]) * B[t]
  // when that product lies in B, else -1.
  void build_scale_map() {
    const std::size_t n = values_.size();
    double scale = 0.0;
    for (const Complex& v : values_) scale = std::max(scale, std::abs(v));
    const double tol = 1e-9 * scale;
    scale_map_.assign(n * n * n, -1);
    for (std::size_t lead = 1; lead < n; ++lead)
      for (std::size_t target = 1; target < n; ++target) {
        const Complex c = values_[target] / values_[lead];
        for (std::size_t t = 0; t < n; ++t) {
          const Complex v = c * values_[t];
          for (std::size_t u = 0; u < n; ++u)
            if (std::abs(values_[u] - v) <= tol) {
              scale_map_[(lead * n + target) * n + t] = static_cast<int>(u);
              break;
            }
        }
      }
  }

  std::vector<Complex> values_;
  std::size_t m_;
  std::uint64_t total_ = 0;
  std::vector<int> scale_map_;
};

/// Splits [1, total) into contiguous chunks processed by parallel_for.
template <class ChunkFn>
void for_each_chunk(std::uint64_t total, unsigned workers, ChunkFn&& fn,
                    std::size_t& n_chunks_out) {
  const std::uint64_t work = total - 1;
  const std::uint64_t n_chunks = std::max<std::uint64_t>(1, std::min<std::uint64_t>(work, 256));
  n_chunks_out = static_cast<std::size_t>(n_chunks);
  parallel_for(static_cast<std::size_t>(n_chunks), workers, [&](std::size_t c) {
    const std::uint64_t begin = 1 + work * c / n_chunks;
    const std::uint64_t end = 1 + work * (c + 1) / n_chunks;
    fn(c, begin, end);
  });
}

/// Fills `out` (M x L(2K+1)) with exp(j 2 pi k p / M) x(p - l), where x is a
/// length M + Mp signal indexed from -Mp.
void fill_event_matrix(const ComplexVector& x, std::size_t m, std::size_t mp, std::size_t l_max,
                       const std::vector<ComplexVector>& ramps, ComplexMatrix& out) {
  const std::size_t n_k = ramps.size();
  out.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n_k * l_max));
  for (std::size_t kb = 0; kb < n_k; ++kb)
    for (std::size_t l = 0; l < l_max; ++l) {
      const auto col = static_cast<Eigen::Index>(kb * l_max + l);
      const auto start = static_cast<Eigen::Index>(mp - l);
      out.col(col) = x.segment(start, static_cast<Eigen::Index>(m));
      if (ramps[kb].size() > 0) out.col(col).array() *= ramps[kb].array();
    }
}

/// Doppler ramps for k = -K..K; the k = 0 entry is left empty (identity).
std::vector<ComplexVector> make_ramps(std::size_t m, std::size_t k_max) {
  std::vector<ComplexVector> ramps;
  const auto kk = static_cast<std::ptrdiff_t>(k_max);
  for (std::ptrdiff_t k = -kk; k <= kk; ++k)
    ramps.push_back(k == 0 ? ComplexVector() : doppler_ramp(m, k));
  return ramps;
}

void check_taps(const ModulationScheme& scheme, std::size_t l_max, std::size_t k_max) {
  require(l_max >= 1, ErrorKind::input, "l_max must be at least 1");
  require(l_max <= scheme.mp() + 1, ErrorKind::input,
          "l_max = " + std::to_string(l_max) + " exceeds Mp + 1 = " +
              std::to_string(scheme.mp() + 1));
  if (k_max > 0)
    require(full_order_of(l_max, k_max) < scheme.m(), ErrorKind::input,
            "doubly dispersive analysis requires (2K+1) L < M");
}

double circular_distance(double a, double b) {
  double d = std::fmod(std::abs(a - b), kTwoPi);
  return std::min(d, kTwoPi - d);
}

}  // namespace

JudgmentMatrix judgment_matrix(const ModulationScheme& scheme, std::size_t q, std::size_t l_max,
                               std::size_t k_max) {
  require(q < scheme.m(), ErrorKind::input, "judgment_matrix: q out of range");
  check_taps(scheme, l_max, k_max);
  JudgmentMatrix j;
  j.q = q;
  j.doubly = k_max > 0;
  const ComplexVector column = scheme.psi().col(static_cast<Eigen::Index>(q));
  fill_event_matrix(column, scheme.m(), scheme.mp(), l_max, make_ramps(scheme.m(), k_max), j.matrix);
  return j;
}

ConditionResult check_full_diversity_condition(const ModulationScheme& scheme, std::size_t l_max,
                                               std::size_t k_max, double rank_scale) {
  check_taps(scheme, l_max, k_max);
  ConditionResult out;
  out.full_order = full_order_of(l_max, k_max);
  out.lower_bound = out.full_order;
  out.pass = true;
  for (std::size_t q = 0; q < scheme.m(); ++q) {
    const ComplexMatrix& jq = judgment_matrix(scheme, q, l_max, k_max).matrix;
    const std::size_t r = rank_of(jq, rank_scale);
    out.per_q_ranks.push_back(r);
    if (r < out.full_order) out.pass = false;

    std::size_t prefix = 0;
    while (prefix < out.full_order &&
           rank_of(jq.leftCols(static_cast<Eigen::Index>(prefix + 1)), rank_scale) == prefix + 1)
      ++prefix;
    out.lower_bound = std::min(out.lower_bound, prefix);
  }
  return out;
}

ComplexMatrix error_event_matrix(const ModulationScheme& scheme, const RotationPattern& phi,
                                 const ComplexVector& z, std::size_t l_max, std::size_t k_max,
                                 const ComplexMatrix* demodulation) {
  check_taps(scheme, l_max, k_max);
  require(phi.size() == scheme.m() && static_cast<std::size_t>(z.size()) == scheme.m(),
          ErrorKind::input, "rotation and error vector must have length M");
  const ComplexVector x = scheme.psi() * phi.phases().cwiseProduct(z);
  ComplexMatrix out;
  fill_event_matrix(x, scheme.m(), scheme.mp(), l_max, make_ramps(scheme.m(), k_max), out);
  if (demodulation) out = (*demodulation) * out;
  return out;
}

DiversityReport exhaustive_diversity(const ModulationScheme& scheme, const RotationPattern& phi,
                                     const DifferenceSet& b, std::size_t l_max, std::size_t k_max,
                                     const EnumerationOptions& opts,
                                     const ComplexMatrix* demodulation) {
  check_taps(scheme, l_max, k_max);
  require(phi.size() == scheme.m(), ErrorKind::input, "rotation length must equal M");
  if (demodulation)
    require(demodulation->rows() == static_cast<Eigen::Index>(scheme.m()) &&
                demodulation->cols() == static_cast<Eigen::Index>(scheme.m()),
            ErrorKind::input, "demodulation matrix must be M x M");
  const ErrorPatternSpace space(b, scheme.m(), opts.cap, "exhaustive_diversity");

  const std::size_t m = scheme.m();
  const ComplexMatrix rotated = scheme.psi() * phi.phases().asDiagonal();
  const auto ramps = make_ramps(m, k_max);

  struct Best {
    std::size_t rank = std::numeric_limits<std::size_t>::max();
    std::uint64_t index = 0;
    std::uint64_t checked = 0;
  };
  std::vector<Best> results(256);
  std::size_t n_chunks = 0;

  for_each_chunk(
      space.total(), opts.workers,
      [&](std::size_t c, std::uint64_t begin, std::uint64_t end) {
        Best best;
        std::vector<std::size_t> digits;
        space.decode(begin, digits);
        ComplexVector x(rotated.rows());
        ComplexMatrix event;
        for (std::uint64_t i = begin; i < end; ++i, space.increment(digits)) {
          if (!space.canonical(digits, i)) continue;
          ++best.checked;
          x.setZero();
          for (std::size_t q = 0; q < m; ++q)
            if (digits[q] != 0) x += space.value(digits[q]) * rotated.col(static_cast<Eigen::Index>(q));
          fill_event_matrix(x, m, scheme.mp(), l_max, ramps, event);
          const std::size_t r = demodulation ? rank_of((*demodulation) * event, opts.rank_scale)
                                             : rank_of(event, opts.rank_scale);
          if (r < best.rank) {
            best.rank = r;
            best.index = i;
          }
        }
        results[c] = best;
      },
      n_chunks);

  Best overall;
  for (std::size_t c = 0; c < n_chunks; ++c) {
    overall.checked += results[c].checked;
    if (results[c].rank < overall.rank ||
        (results[c].rank == overall.rank && results[c].index < overall.index)) {
      overall.rank = results[c].rank;
      overall.index = results[c].index;
    }
  }

  DiversityReport report;
  report.order = overall.rank;
  report.full_order = full_order_of(l_max, k_max);
  report.witness_index = overall.index;
  std::vector<std::size_t> digits;
  space.decode(overall.index, digits);
  report.witness = space.vector_of(digits);
  report.n_vectors_checked = overall.checked;
  report.n_vectors_total = space.total() - 1;
  report.dedup_factor = overall.checked == 0 ? 1.0
                                             : static_cast<double>(report.n_vectors_total) /
                                                   static_cast<double>(overall.checked);
  report.rank_scale = opts.rank_scale;
  return report;
}

SpreadCheckResult nonzero_spread_check(const Precoder& precoder, const RotationPattern& phi,
                                       const DifferenceSet& b, const EnumerationOptions& opts) {
  const std::size_t m = precoder.size();
  require(phi.size() == m, ErrorKind::input, "rotation length must equal the precoder size");
  const ErrorPatternSpace space(b, m, opts.cap, "nonzero_spread_check");
  const ComplexMatrix rotated = precoder.matrix * phi.phases().asDiagonal();

  struct Partial {
    double min_rel = std::numeric_limits<double>::infinity();
    std::uint64_t fail_index = std::numeric_limits<std::uint64_t>::max();
    std::size_t fail_entry = 0;
  };
  std::vector<Partial> results(256);
  std::size_t n_chunks = 0;

  for_each_chunk(
      space.total(), opts.workers,
      [&](std::size_t c, std::uint64_t begin, std::uint64_t end) {
        Partial part;
        std::vector<std::size_t> digits;
        space.decode(begin, digits);
        ComplexVector x(static_cast<Eigen::Index>(m));
        for (std::uint64_t i = begin; i < end; ++i, space.increment(digits)) {
          if (!space.canonical(digits, i)) continue;
          x.setZero();
          for (std::size_t q = 0; q < m; ++q)
            if (digits[q] != 0) x += space.value(digits[q]) * rotated.col(static_cast<Eigen::Index>(q));
          const double norm = x.norm();
          for (std::size_t e = 0; e < m; ++e) {
            const double rel = norm > 0.0 ? std::abs(x(static_cast<Eigen::Index>(e))) / norm : 0.0;
            part.min_rel = std::min(part.min_rel, rel);
            if (rel <= kSpreadZeroTol && i < part.fail_index) {
              part.fail_index = i;
              part.fail_entry = e;
            }
          }
        }
        results[c] = part;
      },
      n_chunks);

  Partial overall;
  for (std::size_t c = 0; c < n_chunks; ++c) {
    overall.min_rel = std::min(overall.min_rel, results[c].min_rel);
    if (results[c].fail_index < overall.fail_index) {
      overall.fail_index = results[c].fail_index;
      overall.fail_entry = results[c].fail_entry;
    }
  }

  SpreadCheckResult out;
  out.min_relative_magnitude = overall.min_rel;
  out.pass = overall.fail_index == std::numeric_limits<std::uint64_t>::max();
  if (!out.pass) {
    std::vector<std::size_t> digits;
    space.decode(overall.fail_index, digits);
    out.witness_z = space.vector_of(digits);
    out.witness_entry = overall.fail_entry;
  } else {
    out.near_threshold = overall.min_rel < 1e-6;
  }
  return out;
}

std::uint64_t total_inequality_count(std::size_t m, std::size_t b_size) {
  std::uint64_t power = 1;
  for (std::size_t i = 0; i < m; ++i) power *= b_size;
  return static_cast<std::uint64_t>(m) * (power - b_size);
}

ConstructionResult construct_rotation_precoded(const Precoder& precoder, const DifferenceSet& b,
                                               std::uint64_t seed,
                                               const PrecodedConstructionOptions& opts) {
  const std::size_t m = precoder.size();
  const ErrorPatternSpace space(b, m, opts.cap, "construct_rotation (precoded_exact)");
  const double scale = precoder.matrix.cwiseAbs().maxCoeff();
  for (Eigen::Index r = 0; r < precoder.matrix.rows(); ++r)
    for (Eigen::Index c = 0; c < precoder.matrix.cols(); ++c)
      require(std::abs(precoder.matrix(r, c)) > 1e-12 * scale, ErrorKind::hypothesis,
              "precoded_exact requires a precoder with no zero entries (entry (" +
                  std::to_string(r) + ", " + std::to_string(c) + ") is zero)");
  require(opts.exclusion_radius > 0.0 && opts.exclusion_radius < kPi, ErrorKind::input,
          "exclusion radius must lie in (0, pi)");

  ConstructionResult out;
  auto& cert = out.certificate;
  cert.mode = ConstructionMode::precoded_exact;
  cert.seed = seed;
  cert.exclusion_radius = opts.exclusion_radius;
  cert.full_order = 0;
  cert.total_inequalities = total_inequality_count(m, space.base());
  cert.min_clearance = kPi;

  std::vector<double> angles(m, 0.0);
  {
    Rng rng(derive_stream(seed, kConstructDomain, 0));
    angles[0] = opts.first_angle ? *opts.first_angle : uniform_angle(rng);
    require(std::isfinite(angles[0]) && angles[0] >= 0.0 && angles[0] < kTwoPi, ErrorKind::input,
            "first angle must lie in [0, 2pi)");
  }
  cert.forbidden_sizes.push_back(0);
  cert.inequality_counts.push_back(0);

  const std::size_t nb = space.base();
  std::vector<Complex> partial;  // partial[prefix * m + row]
  for (std::size_t q = 1; q < m; ++q) {
    // All prefixes z(0..q-1) in B^q, including the zero prefix.
    std::uint64_t n_prefix = 1;
    for (std::size_t i = 0; i < q; ++i) n_prefix *= nb;
    partial.assign(n_prefix * m, Complex(0.0));
    std::vector<Complex> rot(q);
    for (std::size_t p = 0; p < q; ++p) rot[p] = std::polar(1.0, angles[p]);
    for (std::uint64_t prefix = 0; prefix < n_prefix; ++prefix) {
      std::uint64_t rest = prefix;
      for (std::size_t p = 0; p < q; ++p) {
        const std::size_t digit = static_cast<std::size_t>(rest % nb);
        rest /= nb;
        if (digit == 0) continue;
        const Complex coeff = rot[p] * space.value(digit);
        for (std::size_t row = 0; row < m; ++row)
          partial[prefix * m + row] += precoder.matrix(static_cast<Eigen::Index>(row),
                                                       static_cast<Eigen::Index>(p)) * coeff;
      }
    }

    std::vector<double> forbidden;
    std::uint64_t inequalities = 0;
    for (std::uint64_t prefix = 0; prefix < n_prefix; ++prefix)
      for (std::size_t row = 0; row < m; ++row)
        for (std::size_t dq = 1; dq < nb; ++dq) {
          ++inequalities;
          const Complex denom = precoder.matrix(static_cast<Eigen::Index>(row),
                                                static_cast<Eigen::Index>(q)) * space.value(dq);
          const Complex v = -partial[prefix * m + row] / denom;
          if (std::abs(std::abs(v) - 1.0) <= opts.unit_circle_tol) {
            double a = std::arg(v);
            if (a < 0.0) a += kTwoPi;
            if (a >= kTwoPi) a = 0.0;
            forbidden.push_back(a);
          }
        }
    std::sort(forbidden.begin(), forbidden.end());
    std::vector<double> distinct;
    for (double a : forbidden)
      if (distinct.empty() || a - distinct.back() > 1e-9) distinct.push_back(a);
    if (distinct.size() > 1 && kTwoPi - distinct.back() + distinct.front() <= 1e-9) distinct.pop_back();

    Rng rng(derive_stream(seed, kConstructDomain, q));
    bool placed = false;
    for (std::size_t draw = 0; draw < opts.max_draws_per_step; ++draw) {
      const double candidate = uniform_angle(rng);
      double clearance = kPi;
      for (double a : distinct) clearance = std::min(clearance, circular_distance(candidate, a));
      if (clearance >= opts.exclusion_radius) {
        angles[q] = candidate;
        cert.min_clearance = std::min(cert.min_clearance, clearance);
        placed = true;
        break;
      }
    }
    if (!placed)
      throw Error(ErrorKind::retries_exhausted,
                  "construct_rotation: no admissible angle found for symbol " + std::to_string(q));
    cert.forbidden_sizes.push_back(distinct.size());
    cert.inequality_counts.push_back(inequalities);
  }
  cert.tries = 1;
  out.phi = RotationPattern{std::move(angles), std::nullopt};
  return out;
}

ConstructionResult construct_rotation_general(const ModulationScheme& scheme,
                                              const DifferenceSet& b, std::size_t l_max,
                                              std::size_t k_max, std::uint64_t seed,
                                              std::size_t max_tries,
                                              const EnumerationOptions& opts) {
  require(max_tries >= 1, ErrorKind::input, "max_tries must be at least 1");
  const ConditionResult condition = check_full_diversity_condition(scheme, l_max, k_max, opts.rank_scale);
  if (!condition.pass) {
    std::string ranks;
    for (std::size_t r : condition.per_q_ranks) ranks += (ranks.empty() ? "" : ",") + std::to_string(r);
    throw Error(ErrorKind::hypothesis,
                "general_randomized requires every judgment matrix to have full column rank " +
                    std::to_string(condition.full_order) + "; per-q ranks: [" + ranks + "]");
  }

  ConstructionResult out;
  auto& cert = out.certificate;
  cert.mode = ConstructionMode::general_randomized;
  cert.seed = seed;
  cert.full_order = condition.full_order;
  for (std::size_t t = 0; t < max_tries; ++t) {
    RotationPattern phi = random_rotation(scheme.m(), derive_stream(seed, kGeneralDomain, t));
    const DiversityReport report = exhaustive_diversity(scheme, phi, b, l_max, k_max, opts);
    cert.tries = t + 1;
    cert.verified_order = report.order;
    if (report.order == condition.full_order) {
      out.phi = std::move(phi);
      return out;
    }
  }
  throw Error(ErrorKind::retries_exhausted,
              "construct_rotation: " + std::to_string(max_tries) +
                  " random draws all failed exhaustive verification; the rank tolerance may be "
                  "too strict for this scheme");
}

std::size_t diversity_continuous_delays(const Precoder& precoder, const RotationPattern& phi,
                                        const DifferenceSet& b,
                                        const ContinuousDelayProfile& profile,
                                        const EnumerationOptions& opts) {
  validate(profile);
  const std::size_t m = precoder.size();
  require(phi.size() == m, ErrorKind::input, "rotation length must equal the precoder size");
  const ErrorPatternSpace space(b, m, opts.cap, "diversity_continuous_delays");
  const ComplexMatrix rotated = precoder.matrix * phi.phases().asDiagonal();

  const std::size_t n_paths = profile.delays.size();
  ComplexMatrix phase(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n_paths));
  for (std::size_t i = 0; i < n_paths; ++i)
    for (std::size_t row = 0; row < m; ++row)
      phase(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(i)) =
          std::polar(1.0, -kTwoPi * static_cast<double>(row) * profile.delays[i]);

  std::vector<std::size_t> results(256, std::numeric_limits<std::size_t>::max());
  std::size_t n_chunks = 0;
  for_each_chunk(
      space.total(), opts.workers,
      [&](std::size_t c, std::uint64_t begin, std::uint64_t end) {
        std::size_t best = std::numeric_limits<std::size_t>::max();
        std::vector<std::size_t> digits;
        space.decode(begin, digits);
        ComplexVector x(static_cast<Eigen::Index>(m));
        for (std::uint64_t i = begin; i < end; ++i, space.increment(digits)) {
          if (!space.canonical(digits, i)) continue;
          x.setZero();
          for (std::size_t q = 0; q < m; ++q)
            if (digits[q] != 0) x += space.value(digits[q]) * rotated.col(static_cast<Eigen::Index>(q));
          const ComplexMatrix event = x.asDiagonal() * phase;
          best = std::min(best, rank_of(event, opts.rank_scale));
        }
        results[c] = best;
      },
      n_chunks);
  return *std::min_element(results.begin(), results.begin() + static_cast<std::ptrdiff_t>(n_chunks));
}

PepBound pep_upper_bound(const ComplexMatrix& x1_minus_x2, double n0, double p_norm) {
  require(n0 > 0.0 && std::isfinite(n0), ErrorKind::input, "pep_upper_bound: n0 must be positive");
  require(p_norm > 0.0 && std::isfinite(p_norm), ErrorKind::input,
          "pep_upper_bound: p_norm must be positive");
  const RankResult rank = numerical_rank(x1_minus_x2);
  PepBound out;
  out.singular_values = rank.singular_values;
  out.rank_used = rank.rank;
  out.n0 = n0;
  out.p_norm = p_norm;
  out.bound = 1.0;
  for (std::size_t l = 0; l < rank.rank; ++l) {
    const double lambda = rank.singular_values[l];
    out.bound /= 1.0 + lambda * lambda / (4.0 * p_norm * n0);
  }
  return out;
}

ComplexMatrix pep_difference_matrix(const std::vector<ComplexMatrix>& h_mats,
                                    const ComplexVector& d1, const ComplexVector& d2) {
  require(!h_mats.empty(), ErrorKind::input, "pep_difference_matrix: no channel matrices");
  require(d1.size() == d2.size() && d1.size() == h_mats.front().cols(), ErrorKind::input,
          "pep_difference_matrix: data length mismatch");
  const ComplexVector z = d1 - d2;
  ComplexMatrix out(static_cast<Eigen::Index>(h_mats.size()), h_mats.front().rows());
  for (std::size_t i = 0; i < h_mats.size(); ++i)
    out.row(static_cast<Eigen::Index>(i)) = (h_mats[i] * z).transpose();
  return out;
}

Lemma1Result lemma1_root_count(const ComplexMatrix& a, const ComplexMatrix& b) {
  require(a.rows() >= 1 && a.cols() >= 1, ErrorKind::input, "lemma1: empty matrix");
  require(a.rows() == b.rows() && a.cols() == b.cols(), ErrorKind::input,
          "lemma1: a and b must have the same shape");
  const auto full = static_cast<std::size_t>(std::min(a.rows(), a.cols()));
  require(numerical_rank(a).rank == full && numerical_rank(b).rank == full, ErrorKind::input,
          "lemma1: inputs must have full rank");

  // Work with m >= n; the transposed problem has the same root set.
  const bool tall = a.rows() >= a.cols();
  const ComplexMatrix at = tall ? a : ComplexMatrix(a.transpose());
  const ComplexMatrix bt = tall ? b : ComplexMatrix(b.transpose());
  const Eigen::Index m = at.rows();
  const Eigen::Index n = at.cols();

  auto complete = [&](const ComplexMatrix& x) {
    ComplexMatrix sq(m, m);
    sq.leftCols(n) = x;
    if (m > n) {
      Eigen::HouseholderQR<ComplexMatrix> qr(x);
      const ComplexMatrix q = qr.householderQ() * ComplexMatrix::Identity(m, m);
      sq.rightCols(m - n) = q.rightCols(m - n);
    }
    return sq;
  };
  const ComplexMatrix a_sq = complete(at);
  const ComplexMatrix b_sq = complete(bt);

  Lemma1Result out;
  out.bound = static_cast<std::size_t>(std::max(a.rows(), a.cols()));
  out.coeffs = det_poly_coeffs(a_sq, b_sq);

  double hadamard = 1.0;
  for (Eigen::Index c = 0; c < m; ++c) hadamard *= a_sq.col(c).norm();
  out.constant_coeff_nonzero = std::abs(out.coeffs.front()) > 1e-10 * hadamard;

  const auto roots = polynomial_roots(out.coeffs);
  out.roots = distinct_roots(roots);
  out.n_roots = out.roots.size();
  out.within_bound = out.n_roots <= out.bound;
  return out;
}

nlohmann::json complex_vector_to_json(const ComplexVector& v) {
  nlohmann::json out = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back({v(i).real(), v(i).imag()});
  return out;
}

nlohmann::json to_json(const DiversityReport& report) {
  return {{"order", report.order},
          {"full_order", report.full_order},
          {"witness", complex_vector_to_json(report.witness)},
          {"witness_index", report.witness_index},
          {"n_vectors_checked", report.n_vectors_checked},
          {"n_vectors_total", report.n_vectors_total},
          {"dedup_factor", report.dedup_factor},
          {"rank_scale", report.rank_scale}};
}

nlohmann::json to_json(const ConditionResult& result) {
  return {{"pass", result.pass},
          {"per_q_ranks", result.per_q_ranks},
          {"lower_bound", result.lower_bound},
          {"full_order", result.full_order}};
}

nlohmann::json to_json(const RotationCertificate& cert) {
  nlohmann::json j = {
      {"mode", cert.mode == ConstructionMode::precoded_exact ? "precoded_exact" : "general_randomized"},
      {"seed", cert.seed},
      {"tries", cert.tries}};
  if (cert.mode == ConstructionMode::precoded_exact) {
    j["forbidden_sizes"] = cert.forbidden_sizes;
    j["inequality_counts"] = cert.inequality_counts;
    j["total_inequalities"] = cert.total_inequalities;
    j["min_clearance"] = cert.min_clearance;
    j["exclusion_radius"] = cert.exclusion_radius;
  } else {
    j["verified_order"] = cert.verified_order;
    j["full_order"] = cert.full_order;
  }
  return j;
}

}  // namespace rotdiv
