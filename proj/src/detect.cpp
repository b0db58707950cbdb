#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/LU>

#include "rotdiv/error.hpp"
#include "rotdiv/simulate.hpp"

namespace rotdiv {

DetectorKind parse_detector_kind(std::string_view name) {
  if (name == "ml") return DetectorKind::ml;
  if (name == "lzf") return DetectorKind::lzf;
  throw Error(ErrorKind::input, "unsupported detector '" + std::string(name) + "'");
}

const char* to_string(DetectorKind kind) noexcept {
  return kind == DetectorKind::ml ? "ml" : "lzf";
}

MlDetector::MlDetector(const MappingAlphabet& alphabet, std::size_t m, std::size_t cap_bits)
    : alphabet_(&alphabet), m_(m), n_points_(alphabet.size()) {
  require(m >= 1 && n_points_ >= 2, ErrorKind::input, "ML detector needs M >= 1 and |A| >= 2");
  require(m * alphabet.bits_per_symbol <= cap_bits, ErrorKind::cap_exceeded,
          "ML search over " + std::to_string(m * alphabet.bits_per_symbol) +
              " bits exceeds the cap of " + std::to_string(cap_bits) +
              " bits; use the lzf detector or raise ml_cap_bits");
  order_.resize(m_ * n_points_);
  current_.resize(m_);
  best_.resize(m_);
}

void MlDetector::detect(const ComplexVector& y, const ComplexMatrix& h,
                        std::vector<std::size_t>& symbols) {
  require(static_cast<std::size_t>(y.size()) == m_ && static_cast<std::size_t>(h.rows()) == m_ &&
              static_cast<std::size_t>(h.cols()) == m_,
          ErrorKind::input, "ML detector: dimension mismatch");
  qr_.compute(h);
  r_ = qr_.matrixQR().triangularView<Eigen::Upper>();
  y_rot_ = qr_.householderQ().adjoint() * y;
  best_metric_ = std::numeric_limits<double>::infinity();
  best_index_ = std::numeric_limits<std::uint64_t>::max();
  search(m_ - 1, 0.0);
  symbols = best_;
}

void MlDetector::search(std::size_t level, double partial) {
  const auto lv = static_cast<Eigen::Index>(level);
  Complex base = y_rot_(lv);
  for (std::size_t c = level + 1; c < m_; ++c)
    base -= r_(lv, static_cast<Eigen::Index>(c)) * alphabet_->points[current_[c]];
  const Complex diag = r_(lv, lv);

  // Visit children nearest first so the first leaf is already a good bound.
  auto* order = &order_[level * n_points_];
  for (std::size_t a = 0; a < n_points_; ++a)
    order[a] = {std::norm(base - diag * alphabet_->points[a]), a};
  std::sort(order, order + n_points_);

  for (std::size_t i = 0; i < n_points_; ++i) {
    const double metric = partial + order[i].first;
    if (metric > best_metric_) break;
    current_[level] = order[i].second;
    if (level > 0) {
      search(level - 1, metric);
      continue;
    }
    std::uint64_t index = 0;
    for (std::size_t q = 0; q < m_; ++q) index = index * n_points_ + current_[q];
    if (metric < best_metric_ || index < best_index_) {
      best_metric_ = metric;
      best_index_ = index;
      best_ = current_;
    }
  }
}

ComplexVector ml_detect(const ComplexVector& y, const std::vector<ComplexMatrix>& h_mats,
                        const std::vector<Complex>& taps, const MappingAlphabet& alphabet,
                        std::size_t cap_bits) {
  require(!h_mats.empty() && h_mats.size() == taps.size(), ErrorKind::input,
          "ml_detect: need one tap per channel matrix");
  ComplexMatrix h = ComplexMatrix::Zero(h_mats.front().rows(), h_mats.front().cols());
  for (std::size_t i = 0; i < h_mats.size(); ++i) h += taps[i] * h_mats[i];
  MlDetector detector(alphabet, static_cast<std::size_t>(h.cols()), cap_bits);
  std::vector<std::size_t> symbols;
  detector.detect(y, h, symbols);
  ComplexVector d(static_cast<Eigen::Index>(symbols.size()));
  for (std::size_t q = 0; q < symbols.size(); ++q)
    d(static_cast<Eigen::Index>(q)) = alphabet.points[symbols[q]];
  return d;
}

double ml_metric(const ComplexVector& y, const ComplexMatrix& h, const ComplexVector& d) {
  return (y - h * d).squaredNorm();
}

void hard_decision(const ComplexVector& v, const MappingAlphabet& alphabet,
                   std::vector<std::size_t>& symbols) {
  symbols.resize(static_cast<std::size_t>(v.size()));
  for (Eigen::Index q = 0; q < v.size(); ++q) {
    std::size_t best = 0;
    double best_dist = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < alphabet.size(); ++a) {
      const double dist = std::norm(v(q) - alphabet.points[a]);
      if (dist < best_dist) {
        best_dist = dist;
        best = a;
      }
    }
    symbols[static_cast<std::size_t>(q)] = best;
  }
}

std::optional<std::vector<std::size_t>> lzf_detect_indices(const ComplexVector& y,
                                                           const ComplexMatrix& h_total,
                                                           const MappingAlphabet& alphabet) {
  require(h_total.rows() == h_total.cols() && h_total.rows() == y.size(), ErrorKind::input,
          "lzf_detect: h_total must be square and match y");
  const Eigen::PartialPivLU<ComplexMatrix> lu(h_total);
  if (!(lu.rcond() >= kLzfMinRcond)) return std::nullopt;
  std::vector<std::size_t> symbols;
  hard_decision(lu.solve(y), alphabet, symbols);
  return symbols;
}

std::optional<ComplexVector> lzf_detect(const ComplexVector& y, const ComplexMatrix& h_total,
                                        const MappingAlphabet& alphabet) {
  const auto symbols = lzf_detect_indices(y, h_total, alphabet);
  if (!symbols) return std::nullopt;
  ComplexVector d(static_cast<Eigen::Index>(symbols->size()));
  for (std::size_t q = 0; q < symbols->size(); ++q)
    d(static_cast<Eigen::Index>(q)) = alphabet.points[(*symbols)[q]];
  return d;
}

}  // namespace rotdiv
