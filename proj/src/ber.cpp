#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "rotdiv/error.hpp"
#include "rotdiv/parallel.hpp"
#include "rotdiv/random.hpp"
#include "rotdiv/simulate.hpp"

namespace rotdiv {

namespace {

constexpr std::uint64_t kFrameDomain = 0x4652414dULL;  // "FRAM"

struct BatchResult {
  std::uint64_t bit_errors = 0;
  std::uint64_t erasures = 0;
  std::uint64_t frames = 0;
  std::vector<std::uint32_t> per_frame;
};

class FrameSimulator {
 public:
  FrameSimulator(const SimConfig& cfg, const std::vector<ComplexMatrix>& h_mats)
      : cfg_(cfg),
        h_mats_(h_mats),
        m_(cfg.scheme.m()),
        n_points_(cfg.alphabet.size()),
        h_(static_cast<Eigen::Index>(m_), static_cast<Eigen::Index>(m_)),
        d_(static_cast<Eigen::Index>(m_)),
        y_(static_cast<Eigen::Index>(m_)),
        sent_(m_) {
    if (cfg.detector == DetectorKind::ml) ml_.emplace(cfg.alphabet, m_, cfg.ml_cap_bits);
  }

  /// Returns bit errors for one frame; `erased` is set for singular LZF frames.
  std::uint32_t run(std::uint64_t frame, double n0, bool& erased) {
    Rng rng(derive_stream(cfg_.master_seed, kFrameDomain, frame));
    h_.setZero();
    for (const auto& hm : h_mats_) h_ += complex_gaussian(rng, 1.0 / static_cast<double>(h_mats_.size())) * hm;
    for (std::size_t q = 0; q < m_; ++q) {
      sent_[q] = static_cast<std::size_t>(rng() % n_points_);
      d_(static_cast<Eigen::Index>(q)) = cfg_.alphabet.points[sent_[q]];
    }
    y_.noalias() = h_ * d_;
    const double sigma = std::sqrt(n0);
    for (std::size_t q = 0; q < m_; ++q)
      y_(static_cast<Eigen::Index>(q)) += sigma * complex_gaussian(rng, 1.0);

    erased = false;
    if (ml_) {
      ml_->detect(y_, h_, decided_);
    } else {
      auto symbols = lzf_detect_indices(y_, h_, cfg_.alphabet);
      if (!symbols) {
        erased = true;
        return static_cast<std::uint32_t>(m_ * cfg_.alphabet.bits_per_symbol);
      }
      decided_ = std::move(*symbols);
    }
    std::uint32_t errors = 0;
    for (std::size_t q = 0; q < m_; ++q)
      errors += static_cast<std::uint32_t>(std::popcount(sent_[q] ^ decided_[q]));
    return errors;
  }

 private:
  const SimConfig& cfg_;
  const std::vector<ComplexMatrix>& h_mats_;
  std::size_t m_;
  std::size_t n_points_;
  ComplexMatrix h_;
  ComplexVector d_;
  ComplexVector y_;
  std::vector<std::size_t> sent_;
  std::vector<std::size_t> decided_;
  std::optional<MlDetector> ml_;
};

}  // namespace

void validate(const SimConfig& cfg) {
  require(!cfg.snr_db.empty(), ErrorKind::input, "snr_db grid must not be empty");
  for (std::size_t i = 0; i < cfg.snr_db.size(); ++i) {
    require(std::isfinite(cfg.snr_db[i]), ErrorKind::input, "snr_db entries must be finite");
    if (i > 0)
      require(cfg.snr_db[i] > cfg.snr_db[i - 1], ErrorKind::input,
              "snr_db grid must be strictly ascending");
  }
  require(cfg.max_frames >= 1, ErrorKind::input, "frames per point must be at least 1");
  require(cfg.batch_frames >= 1, ErrorKind::input, "batch_frames must be at least 1");
  require(cfg.rotation.size() == cfg.scheme.m(), ErrorKind::input,
          "rotation length must equal the scheme's M");
  require(cfg.l_max >= 1 && cfg.l_max <= cfg.scheme.mp() + 1, ErrorKind::input,
          "channel memory L - 1 must not exceed the prefix length");
  if (cfg.k_max > 0)
    require((2 * cfg.k_max + 1) * cfg.l_max < cfg.scheme.m(), ErrorKind::input,
            "doubly dispersive channel requires (2K+1) L < M");
  require(cfg.alphabet.size() >= 2, ErrorKind::input, "alphabet must have at least two points");
}

BerCurve ber_sweep(const SimConfig& cfg) { return ber_sweep_traced(cfg, nullptr, 0); }

BerCurve ber_sweep_traced(const SimConfig& cfg, FrameTrace* trace, std::uint64_t record_frames) {
  validate(cfg);
  const auto h_mats = equivalent_channels(cfg.scheme, cfg.rotation, cfg.l_max, cfg.k_max);
  const unsigned workers = cfg.workers == 0 ? default_workers() : cfg.workers;
  const std::uint64_t bits_per_frame = cfg.scheme.m() * cfg.alphabet.bits_per_symbol;

  BerCurve curve;
  curve.label = cfg.label.empty() ? cfg.scheme.label() : cfg.label;
  if (trace) trace->bit_errors.assign(cfg.snr_db.size(), {});

  for (std::size_t s = 0; s < cfg.snr_db.size(); ++s) {
    const double n0 = std::pow(10.0, -cfg.snr_db[s] / 10.0);
    std::uint64_t frames_done = 0;
    std::uint64_t errors = 0;
    std::uint64_t erasures = 0;
    bool stop = false;

    while (!stop && frames_done < cfg.max_frames) {
      const std::uint64_t remaining = cfg.max_frames - frames_done;
      const std::uint64_t per_batch = cfg.batch_frames;
      const std::size_t n_batches = static_cast<std::size_t>(
          std::min<std::uint64_t>(workers, (remaining + per_batch - 1) / per_batch));
      std::vector<BatchResult> batches(n_batches);
      parallel_for(n_batches, workers, [&](std::size_t b) {
        FrameSimulator sim(cfg, h_mats);
        const std::uint64_t first = frames_done + b * per_batch;
        const std::uint64_t last = std::min(cfg.max_frames, first + per_batch);
        BatchResult& out = batches[b];
        const bool keep = trace && first < record_frames;
        for (std::uint64_t f = first; f < last; ++f) {
          bool erased = false;
          const std::uint32_t e = sim.run(f, n0, erased);
          out.bit_errors += e;
          out.erasures += erased ? 1 : 0;
          ++out.frames;
          if (keep && f < record_frames) out.per_frame.push_back(e);
        }
      });
      for (const BatchResult& b : batches) {
        frames_done += b.frames;
        errors += b.bit_errors;
        erasures += b.erasures;
        if (trace) {
          auto& dst = trace->bit_errors[s];
          dst.insert(dst.end(), b.per_frame.begin(), b.per_frame.end());
        }
        if (cfg.target_errors > 0 && errors >= cfg.target_errors) {
          stop = true;
          break;
        }
      }
    }

    const std::uint64_t bits = frames_done * bits_per_frame;
    curve.snr_db.push_back(cfg.snr_db[s]);
    curve.bit_errors.push_back(errors);
    curve.bits_simulated.push_back(bits);
    curve.frames.push_back(frames_done);
    curve.erasures.push_back(erasures);
    curve.ber.push_back(bits == 0 ? 0.0 : static_cast<double>(errors) / static_cast<double>(bits));
  }

  curve.metadata = {
      {"scheme", cfg.scheme.label()},
      {"m", cfg.scheme.m()},
      {"mp", cfg.scheme.mp()},
      {"alphabet", cfg.alphabet.label},
      {"l_max", cfg.l_max},
      {"k_max", cfg.k_max},
      {"detector", to_string(cfg.detector)},
      {"master_seed", cfg.master_seed},
      {"rotation", rotation_to_json(cfg.rotation)},
      {"max_frames", cfg.max_frames},
      {"target_errors", cfg.target_errors},
      {"batch_frames", cfg.batch_frames},
      {"assumptions",
       {{"tap_variance", "1/P with P = L (time) or L(2K+1) (doubly): unit mean channel energy"},
        {"snr_definition", "SNR = 1/N0 with unit-energy symbols and channel"},
        {"power_delay_profile", "uniform"},
        {"lzf_erasure", "frames with reciprocal condition < 1e-12 count as all-bits-in-error"}}}};
  return curve;
}

double slope_estimate(const BerCurve& curve, std::pair<double, double> snr_window,
                      std::uint64_t min_errors) {
  std::vector<double> xs;
  std::vector<double> ys;
  for (std::size_t i = 0; i < curve.snr_db.size(); ++i) {
    const double snr = curve.snr_db[i];
    if (snr < snr_window.first || snr > snr_window.second) continue;
    if (curve.bit_errors[i] < min_errors || curve.ber[i] <= 0.0) continue;
    xs.push_back(snr / 10.0);
    ys.push_back(std::log10(curve.ber[i]));
  }
  if (xs.size() < 2)
    throw Error(ErrorKind::estimation,
                "slope_estimate: need at least 2 points in [" + std::to_string(snr_window.first) +
                    ", " + std::to_string(snr_window.second) + "] dB with >= " +
                    std::to_string(min_errors) + " bit errors, found " + std::to_string(xs.size()));
  const double n = static_cast<double>(xs.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  return -sxy / sxx;
}

nlohmann::json to_json(const BerCurve& curve) {
  return {{"label", curve.label},
          {"snr_db", curve.snr_db},
          {"ber", curve.ber},
          {"bit_errors", curve.bit_errors},
          {"bits_simulated", curve.bits_simulated},
          {"frames", curve.frames},
          {"erasures", curve.erasures},
          {"metadata", curve.metadata}};
}

}  // namespace rotdiv
