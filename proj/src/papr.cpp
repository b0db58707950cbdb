#include <algorithm>
#include <cmath>
#include <mutex>
#include <string>

#include <fftw3.h>

#include "rotdiv/error.hpp"
#include "rotdiv/parallel.hpp"
#include "rotdiv/random.hpp"
#include "rotdiv/simulate.hpp"

namespace rotdiv {

namespace {

constexpr std::uint64_t kPaprDomain = 0x50415052ULL;  // "PAPR"
constexpr std::size_t kFramesPerChunk = 512;

// Only fftw_execute* is thread safe; plan creation and destruction are not.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

class Fft {
 public:
  Fft(std::size_t n, int sign) : n_(n) {
    std::lock_guard lock(planner_mutex());
    in_ = fftw_alloc_complex(n);
    out_ = fftw_alloc_complex(n);
    plan_ = fftw_plan_dft_1d(static_cast<int>(n), in_, out_, sign, FFTW_ESTIMATE);
  }
  ~Fft() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan_);
    fftw_free(in_);
    fftw_free(out_);
  }
  Fft(const Fft&) = delete;
  Fft& operator=(const Fft&) = delete;

  Complex* in() { return reinterpret_cast<Complex*>(in_); }
  const Complex* out() const { return reinterpret_cast<const Complex*>(out_); }
  std::size_t size() const { return n_; }
  void run() { fftw_execute(plan_); }

 private:
  std::size_t n_;
  fftw_complex* in_ = nullptr;
  fftw_complex* out_ = nullptr;
  fftw_plan plan_ = nullptr;
};

double papr_with(Fft& ifft, const ComplexVector& x) {
  const std::size_t m = static_cast<std::size_t>(x.size());
  const std::size_t n = ifft.size();
  const std::size_t low = (m + 1) / 2;  // bins 0 .. low-1 stay at the bottom
  Complex* buf = ifft.in();
  std::fill(buf, buf + n, Complex{0.0, 0.0});
  for (std::size_t k = 0; k < low; ++k) buf[k] = x(static_cast<Eigen::Index>(k));
  for (std::size_t k = low; k < m; ++k) buf[n - m + k] = x(static_cast<Eigen::Index>(k));
  ifft.run();
  double peak = 0.0;
  double total = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    const double p = std::norm(ifft.out()[t]);
    peak = std::max(peak, p);
    total += p;
  }
  require(total > 0.0, ErrorKind::input, "papr: all-zero block");
  return 10.0 * std::log10(peak / (total / static_cast<double>(n)));
}

}  // namespace

PaprWaveform parse_papr_waveform(std::string_view name) {
  if (name == "ofdm" || name == "plain_ofdm") return PaprWaveform::ofdm;
  if (name == "dft_s_ofdm") return PaprWaveform::dft_s_ofdm;
  if (name == "precoded" || name == "precoded_cp_ofdm") return PaprWaveform::precoded;
  throw Error(ErrorKind::input, "unsupported PAPR waveform '" + std::string(name) + "'");
}

const char* to_string(PaprWaveform w) noexcept {
  switch (w) {
    case PaprWaveform::ofdm: return "ofdm";
    case PaprWaveform::dft_s_ofdm: return "dft_s_ofdm";
    case PaprWaveform::precoded: return "precoded";
  }
  return "?";
}

double papr_db(const ComplexVector& freq_symbols, std::size_t oversample) {
  require(oversample >= 1, ErrorKind::input, "papr: oversample must be >= 1");
  require(freq_symbols.size() >= 1, ErrorKind::input, "papr: empty block");
  Fft ifft(static_cast<std::size_t>(freq_symbols.size()) * oversample, FFTW_BACKWARD);
  return papr_with(ifft, freq_symbols);
}

double PaprCcdf::papr_at_ccdf(double level) const {
  require(!samples_db.empty(), ErrorKind::estimation, "papr_at_ccdf: no samples");
  require(level > 0.0 && level < 1.0, ErrorKind::input, "papr_at_ccdf: level must be in (0, 1)");
  std::vector<double> s = samples_db;
  std::sort(s.begin(), s.end());
  const std::size_t n = s.size();
  const auto allowed = static_cast<std::size_t>(std::floor(level * static_cast<double>(n)));
  require(allowed >= 1, ErrorKind::estimation,
          "papr_at_ccdf: " + std::to_string(n) + " frames cannot resolve level " +
              std::to_string(level));
  return s[n - 1 - allowed];
}

PaprCcdf papr_ccdf(const PaprConfig& cfg) {
  require(cfg.m >= 1, ErrorKind::input, "papr: m must be >= 1");
  require(cfg.oversample >= 1, ErrorKind::input, "papr: oversample must be >= 1");
  require(cfg.frames >= 1, ErrorKind::input, "papr: frames must be >= 1");
  require(cfg.grid_step_db > 0.0, ErrorKind::input, "papr: grid step must be positive");
  require(cfg.alphabet.size() >= 2, ErrorKind::input, "papr: alphabet must have >= 2 points");
  if (cfg.waveform == PaprWaveform::precoded)
    require(cfg.precoder && cfg.precoder->size() == cfg.m, ErrorKind::input,
            "papr: precoded waveform needs an M x M precoder");
  if (cfg.rotation)
    require(cfg.rotation->size() == cfg.m, ErrorKind::input, "papr: rotation length must equal M");

  const ComplexVector phases =
      cfg.rotation ? cfg.rotation->phases() : ComplexVector::Ones(static_cast<Eigen::Index>(cfg.m));
  const std::size_t n_chunks = static_cast<std::size_t>((cfg.frames + kFramesPerChunk - 1) / kFramesPerChunk);
  std::vector<double> samples(cfg.frames);
  const double dft_scale = 1.0 / std::sqrt(static_cast<double>(cfg.m));

  parallel_for(n_chunks, cfg.workers, [&](std::size_t c) {
    Fft ifft(cfg.m * cfg.oversample, FFTW_BACKWARD);
    std::optional<Fft> fft;
    if (cfg.waveform == PaprWaveform::dft_s_ofdm) fft.emplace(cfg.m, FFTW_FORWARD);
    ComplexVector d(static_cast<Eigen::Index>(cfg.m));
    ComplexVector x(static_cast<Eigen::Index>(cfg.m));
    const std::uint64_t first = c * kFramesPerChunk;
    const std::uint64_t last = std::min<std::uint64_t>(cfg.frames, first + kFramesPerChunk);
    for (std::uint64_t f = first; f < last; ++f) {
      Rng rng(derive_stream(cfg.seed, kPaprDomain, f));
      for (std::size_t q = 0; q < cfg.m; ++q) {
        const auto idx = static_cast<std::size_t>(rng() % cfg.alphabet.size());
        d(static_cast<Eigen::Index>(q)) = cfg.alphabet.points[idx] * phases(static_cast<Eigen::Index>(q));
      }
      switch (cfg.waveform) {
        case PaprWaveform::ofdm:
          x = d;
          break;
        case PaprWaveform::dft_s_ofdm:
          std::copy(d.data(), d.data() + d.size(), fft->in());
          fft->run();
          for (std::size_t k = 0; k < cfg.m; ++k) x(static_cast<Eigen::Index>(k)) = fft->out()[k] * dft_scale;
          break;
        case PaprWaveform::precoded:
          x.noalias() = cfg.precoder->matrix * d;
          break;
      }
      samples[f] = papr_with(ifft, x);
    }
  });

  PaprCcdf out;
  out.label = cfg.label.empty() ? std::string(to_string(cfg.waveform)) : cfg.label;
  out.oversample = cfg.oversample;
  out.frames = cfg.frames;
  out.samples_db = samples;

  std::vector<double> sorted = samples;
  std::sort(sorted.begin(), sorted.end());
  const double step = cfg.grid_step_db;
  const auto n_grid = static_cast<std::size_t>(std::ceil(sorted.back() / step - 1e-12)) + 1;
  out.papr_db.reserve(n_grid);
  out.ccdf.reserve(n_grid);
  for (std::size_t i = 0; i < n_grid; ++i) {
    const double x = static_cast<double>(i) * step;
    const auto above = static_cast<std::size_t>(
        sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), x));
    out.papr_db.push_back(x);
    out.ccdf.push_back(static_cast<double>(above) / static_cast<double>(sorted.size()));
  }
  return out;
}

}  // namespace rotdiv
