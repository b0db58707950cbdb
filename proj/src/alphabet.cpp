#include "rotdiv/alphabet.hpp"

#include <algorithm>
#include <cmath>

#include "rotdiv/error.hpp"
#include "rotdiv/random.hpp"

namespace rotdiv {

namespace {

constexpr std::uint64_t kRotationDomain = 0x524f54ULL;  // "ROT"

// Gray 4-PAM level for a 2-bit label.
double pam4_level(unsigned bits) {
  switch (bits & 3U) {
    case 0b00: return -3.0;
    case 0b01: return -1.0;
    case 0b11: return 1.0;
    default: return 3.0;  // 0b10
  }
}

}  // namespace

AlphabetKind parse_alphabet_kind(std::string_view name) {
  if (name == "bpsk") return AlphabetKind::bpsk;
  if (name == "qpsk") return AlphabetKind::qpsk;
  if (name == "qam16") return AlphabetKind::qam16;
  throw Error(ErrorKind::input, "unsupported alphabet '" + std::string(name) + "'");
}

const char* to_string(AlphabetKind kind) noexcept {
  switch (kind) {
    case AlphabetKind::bpsk: return "bpsk";
    case AlphabetKind::qpsk: return "qpsk";
    case AlphabetKind::qam16: return "qam16";
  }
  return "unknown";
}

MappingAlphabet make_alphabet(AlphabetKind kind, bool normalize) {
  MappingAlphabet a;
  a.label = to_string(kind);
  switch (kind) {
    case AlphabetKind::bpsk:
      a.bits_per_symbol = 1;
      a.points = {Complex(1.0, 0.0), Complex(-1.0, 0.0)};
      break;
    case AlphabetKind::qpsk: {
      a.bits_per_symbol = 2;
      const double s = normalize ? 1.0 / std::sqrt(2.0) : 1.0;
      for (unsigned i = 0; i < 4; ++i) {
        const double re = (i & 2U) ? -s : s;
        const double im = (i & 1U) ? -s : s;
        a.points.emplace_back(re, im);
      }
      break;
    }
    case AlphabetKind::qam16: {
      a.bits_per_symbol = 4;
      const double s = normalize ? 1.0 / std::sqrt(10.0) : 1.0;
      for (unsigned i = 0; i < 16; ++i)
        a.points.emplace_back(s * pam4_level(i >> 2), s * pam4_level(i));
      break;
    }
  }
  return a;
}

DifferenceSet difference_set(const MappingAlphabet& a) {
  // Differences of grid constellations are exact in binary floating point up
  // to the final scaling, so a tight absolute tolerance suffices for dedup.
  constexpr double tol = 1e-12;
  std::vector<Complex> values;
  for (const Complex& x : a.points)
    for (const Complex& y : a.points) {
      const Complex d = x - y;
      const bool seen = std::any_of(values.begin(), values.end(),
                                    [&](const Complex& v) { return std::abs(v - d) <= tol; });
      if (!seen) values.push_back(d);
    }
  for (Complex& v : values)
    if (std::abs(v) <= tol) v = 0.0;
  std::sort(values.begin(), values.end(), [](const Complex& l, const Complex& r) {
    const bool lz = l == Complex(0.0);
    const bool rz = r == Complex(0.0);
    if (lz != rz) return lz;
    if (l.real() != r.real()) return l.real() < r.real();
    return l.imag() < r.imag();
  });
  return {std::move(values), a.label};
}

ComplexVector RotationPattern::phases() const {
  ComplexVector out(static_cast<Eigen::Index>(angles.size()));
  for (std::size_t q = 0; q < angles.size(); ++q)
    out(static_cast<Eigen::Index>(q)) = std::polar(1.0, angles[q]);
  return out;
}

RotationPattern RotationPattern::identity(std::size_t m) {
  return RotationPattern{std::vector<double>(m, 0.0), std::nullopt};
}

RotationPattern random_rotation(std::size_t m, std::uint64_t seed) {
  require(m >= 1, ErrorKind::input, "random_rotation: m must be at least 1");
  Rng rng(derive_stream(seed, kRotationDomain, 0));
  RotationPattern phi;
  phi.seed = seed;
  phi.angles.resize(m);
  for (double& a : phi.angles) a = uniform_angle(rng);
  return phi;
}

RotationPattern rotation_from_angles(std::vector<double> angles) {
  require(!angles.empty(), ErrorKind::input, "rotation pattern must contain at least one angle");
  for (double a : angles)
    require(std::isfinite(a) && a >= 0.0 && a < kTwoPi, ErrorKind::input,
            "rotation angles must lie in [0, 2pi)");
  return RotationPattern{std::move(angles), std::nullopt};
}

nlohmann::json rotation_to_json(const RotationPattern& phi) {
  nlohmann::json j;
  j["angles"] = phi.angles;
  if (phi.seed)
    j["seed"] = *phi.seed;
  else
    j["seed"] = "constructed";
  return j;
}

RotationPattern rotation_from_json(const nlohmann::json& j) {
  if (j.is_array()) return rotation_from_angles(j.get<std::vector<double>>());
  require(j.is_object() && j.contains("angles") && j["angles"].is_array(), ErrorKind::input,
          "rotation JSON must be an array of radians or an object with 'angles'");
  RotationPattern phi = rotation_from_angles(j["angles"].get<std::vector<double>>());
  if (j.contains("seed") && j["seed"].is_number_unsigned()) phi.seed = j["seed"].get<std::uint64_t>();
  return phi;
}

}  // namespace rotdiv
