#include "rotdiv/modulation.hpp"

#include <cmath>

#include "rotdiv/error.hpp"

namespace rotdiv {

namespace {

constexpr double kUnitaryTol = 1e-10;
constexpr double kNormTol = 1e-10;

bool columns_unit_norm(const ComplexMatrix& block) {
  for (Eigen::Index c = 0; c < block.cols(); ++c)
    if (std::abs(block.col(c).norm() - 1.0) > kNormTol) return false;
  return true;
}

}  // namespace

SchemeKind parse_scheme_kind(std::string_view name) {
  if (name == "plain_ofdm") return SchemeKind::plain_ofdm;
  if (name == "precoded_cp_ofdm") return SchemeKind::precoded_cp_ofdm;
  if (name == "dft_s_ofdm") return SchemeKind::dft_s_ofdm;
  if (name == "dd_grid") return SchemeKind::dd_grid;
  if (name == "custom") return SchemeKind::custom;
  throw Error(ErrorKind::input, "unsupported scheme kind '" + std::string(name) + "'");
}

const char* to_string(SchemeKind kind) noexcept {
  switch (kind) {
    case SchemeKind::plain_ofdm: return "plain_ofdm";
    case SchemeKind::precoded_cp_ofdm: return "precoded_cp_ofdm";
    case SchemeKind::dft_s_ofdm: return "dft_s_ofdm";
    case SchemeKind::dd_grid: return "dd_grid";
    case SchemeKind::custom: return "custom";
  }
  return "unknown";
}

Precoder make_precoder(ComplexMatrix matrix, std::string label, bool require_unitary) {
  require(matrix.rows() >= 1 && matrix.rows() == matrix.cols(), ErrorKind::input,
          "precoder must be a non-empty square matrix");
  require_finite(matrix, "precoder");
  if (require_unitary) {
    require(is_unitary(matrix, kUnitaryTol), ErrorKind::input, "precoder is not unitary");
  } else {
    require(rank_of(matrix) == static_cast<std::size_t>(matrix.rows()), ErrorKind::input,
            "precoder is singular");
  }
  return Precoder{std::move(matrix), std::move(label)};
}

ModulationScheme::ModulationScheme(SchemeKind kind, std::size_t mp, ComplexMatrix psi,
                                   ComplexMatrix g, std::optional<Precoder> precoder,
                                   std::string label)
    : kind_(kind),
      m_(static_cast<std::size_t>(psi.cols())),
      mp_(mp),
      psi_(std::move(psi)),
      g_(std::move(g)),
      precoder_(std::move(precoder)),
      label_(std::move(label)) {
  require(m_ >= 1, ErrorKind::input, "scheme needs at least one data symbol");
  require(static_cast<std::size_t>(psi_.rows()) == m_ + mp_, ErrorKind::input,
          "psi must have M + Mp rows");
  require(static_cast<std::size_t>(g_.rows()) == m_ && static_cast<std::size_t>(g_.cols()) == m_,
          ErrorKind::input, "g must be M x M");
  require_finite(psi_, "psi");
  require_finite(g_, "g");
  require(is_unitary(g_, kUnitaryTol), ErrorKind::input, "demodulation matrix g is not unitary");
  if (kind_ != SchemeKind::custom)
    require(columns_unit_norm(data_part()), ErrorKind::input,
            "data part of psi must have unit-norm columns");
  if (precoder_)
    require(precoder_->size() == m_, ErrorKind::input, "precoder size must equal M");
  if (label_.empty()) label_ = to_string(kind_);
}

bool ModulationScheme::has_cyclic_prefix() const noexcept {
  const auto mp = static_cast<Eigen::Index>(mp_);
  const auto m = static_cast<Eigen::Index>(m_);
  if (mp == 0) return true;
  return psi_.topRows(mp) == psi_.middleRows(m, mp);
}

ComplexMatrix add_cyclic_prefix(const ComplexMatrix& block, std::size_t mp) {
  const auto m = block.rows();
  const auto p = static_cast<Eigen::Index>(mp);
  require(p <= m, ErrorKind::input, "prefix longer than the block is not supported");
  ComplexMatrix out(m + p, block.cols());
  out.topRows(p) = block.bottomRows(p);
  out.bottomRows(m) = block;
  return out;
}

ModulationScheme build_scheme(SchemeKind kind, std::size_t m, std::size_t mp,
                              const SchemeParams& params) {
  require(m >= 1, ErrorKind::input, "m must be at least 1");
  const auto n = static_cast<Eigen::Index>(m);

  switch (kind) {
    case SchemeKind::plain_ofdm: {
      const ComplexMatrix f = dft_matrix(m);
      return ModulationScheme(kind, mp, add_cyclic_prefix(f.adjoint(), mp), f,
                              Precoder{ComplexMatrix::Identity(n, n), "identity"});
    }
    case SchemeKind::precoded_cp_ofdm: {
      require(params.precoder.has_value(), ErrorKind::input,
              "precoded_cp_ofdm requires a precoder");
      require(params.precoder->size() == m, ErrorKind::input, "precoder size must equal m");
      const ComplexMatrix f = dft_matrix(m);
      const ComplexMatrix body = f.adjoint() * params.precoder->matrix;
      return ModulationScheme(kind, mp, add_cyclic_prefix(body, mp), f, params.precoder);
    }
    case SchemeKind::dft_s_ofdm: {
      return ModulationScheme(kind, mp, add_cyclic_prefix(ComplexMatrix::Identity(n, n), mp),
                              dft_matrix(m), Precoder{dft_matrix(m), "dft"});
    }
    case SchemeKind::dd_grid: {
      const std::size_t nd = params.n_doppler;
      const std::size_t md = params.m_delay;
      require(nd >= 1 && md >= 1 && nd * md == m, ErrorKind::input,
              "dd_grid requires n_doppler * m_delay == m");
      ComplexMatrix body = ComplexMatrix::Zero(n, n);
      const double norm = 1.0 / std::sqrt(static_cast<double>(nd));
      for (std::size_t k = 0; k < nd; ++k)
        for (std::size_t d = 0; d < md; ++d) {
          const auto q = static_cast<Eigen::Index>(k * md + d);
          for (std::size_t kp = 0; kp < nd; ++kp) {
            const auto p = static_cast<Eigen::Index>(d + kp * md);
            const std::size_t e = (k * kp) % nd;
            body(p, q) = std::polar(norm, kTwoPi * static_cast<double>(e) / static_cast<double>(nd));
          }
        }
      ComplexMatrix g = body.adjoint();
      return ModulationScheme(kind, mp, add_cyclic_prefix(body, mp), std::move(g), std::nullopt,
                              "dd_grid(" + std::to_string(nd) + "x" + std::to_string(md) + ")");
    }
    case SchemeKind::custom: {
      require(params.psi.has_value() && params.g.has_value(), ErrorKind::input,
              "custom scheme requires psi and g");
      require(static_cast<std::size_t>(params.psi->cols()) == m, ErrorKind::input,
              "custom psi must have m columns");
      return ModulationScheme(kind, mp, *params.psi, *params.g);
    }
  }
  throw Error(ErrorKind::input, "unknown scheme kind");
}

ModulationScheme adjust_prefix_for_diversity2(const ModulationScheme& scheme) {
  require(scheme.mp() >= 1, ErrorKind::input,
          "adjust_prefix_for_diversity2 needs at least one prefix row");
  const std::size_t m = scheme.m();
  ComplexMatrix psi = scheme.psi();
  const auto row_minus1 = static_cast<Eigen::Index>(scheme.mp() - 1);

  for (std::size_t q = 0; q < m; ++q) {
    const Complex head = scheme.at(0, q);
    Complex value;
    if (std::abs(head) <= 1e-12) {
      value = 1.0;
    } else {
      // Inner product of the data column without its first entry with the
      // data column without its last entry: rows p = 1..M-1 of J_q.
      Complex cross = 0.0;
      for (std::size_t p = 1; p < m; ++p)
        cross += std::conj(scheme.at(static_cast<std::ptrdiff_t>(p), q)) *
                 scheme.at(static_cast<std::ptrdiff_t>(p) - 1, q);
      value = -cross / std::conj(head);
    }
    psi(row_minus1, static_cast<Eigen::Index>(q)) = value;
  }
  return ModulationScheme(SchemeKind::custom, scheme.mp(), std::move(psi), scheme.g(),
                          std::nullopt, scheme.label() + "+prefix-adjusted");
}

ComplexVector transmit(const ModulationScheme& scheme, const RotationPattern& phi,
                       const ComplexVector& d) {
  require(phi.size() == scheme.m(), ErrorKind::input, "rotation length must equal M");
  require(static_cast<std::size_t>(d.size()) == scheme.m(), ErrorKind::input,
          "data length must equal M");
  require_finite(d, "data vector");
  return scheme.psi() * phi.phases().cwiseProduct(d);
}

ComplexMatrix matrix_from_pairs(const nlohmann::json& pairs, std::size_t rows, std::size_t cols,
                                std::string_view field) {
  const std::string name(field);
  if (!pairs.is_array()) throw SchemaError(name, "must be an array of [re, im] pairs");
  if (pairs.size() != rows * cols)
    throw SchemaError(name, "must hold " + std::to_string(rows * cols) + " entries, got " +
                                std::to_string(pairs.size()));
  ComplexMatrix out(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows * cols; ++i) {
    const auto& e = pairs[i];
    if (!(e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number()))
      throw SchemaError(name + "[" + std::to_string(i) + "]", "must be [re, im]");
    out(static_cast<Eigen::Index>(i / cols), static_cast<Eigen::Index>(i % cols)) =
        Complex(e[0].get<double>(), e[1].get<double>());
  }
  return out;
}

nlohmann::json matrix_to_pairs(const ComplexMatrix& m) {
  nlohmann::json out = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) out.push_back({m(r, c).real(), m(r, c).imag()});
  return out;
}

ModulationScheme scheme_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw SchemaError("scheme", "custom scheme JSON must be an object");
  for (const char* key : {"m", "mp", "psi", "g"})
    if (!j.contains(key)) throw SchemaError(key, "missing required field");
  for (const char* key : {"m", "mp"})
    if (!j[key].is_number_integer() || j[key].get<std::int64_t>() < 0)
      throw SchemaError(key, "must be a nonnegative integer");
  const auto m = j["m"].get<std::size_t>();
  const auto mp = j["mp"].get<std::size_t>();
  SchemeParams params;
  params.psi = matrix_from_pairs(j["psi"], m + mp, m, "psi");
  params.g = matrix_from_pairs(j["g"], m, m, "g");
  return build_scheme(SchemeKind::custom, m, mp, params);
}

nlohmann::json scheme_to_json(const ModulationScheme& scheme) {
  return {{"m", scheme.m()},
          {"mp", scheme.mp()},
          {"kind", to_string(scheme.kind())},
          {"label", scheme.label()},
          {"psi", matrix_to_pairs(scheme.psi())},
          {"g", matrix_to_pairs(scheme.g())}};
}

}  // namespace rotdiv
