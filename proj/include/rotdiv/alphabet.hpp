#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "rotdiv/linalg.hpp"

namespace rotdiv {

enum class AlphabetKind { bpsk, qpsk, qam16 };

AlphabetKind parse_alphabet_kind(std::string_view name);
const char* to_string(AlphabetKind kind) noexcept;

/// Finite constellation. points[i] carries the bit label i (MSB first), so
/// bit errors between indices are popcount(i ^ j).
///
/// Gray labels:
///   bpsk   0 -> +1, 1 -> -1
///   qpsk   b1 b0: b1 selects the sign of I, b0 the sign of Q (0 -> +)
///   qam16  b3 b2 -> I level, b1 b0 -> Q level, each 4-PAM Gray
///          00 -> -3, 01 -> -1, 11 -> +1, 10 -> +3, scaled by 1/sqrt(10)
struct MappingAlphabet {
  std::vector<Complex> points;
  unsigned bits_per_symbol = 0;
  std::string label;

  std::size_t size() const noexcept { return points.size(); }
};

MappingAlphabet make_alphabet(AlphabetKind kind, bool normalize = true);

/// B = A - A. Zero comes first, the rest in ascending (real, imag) order, so
/// enumeration digit 0 always means "no error" on that symbol.
struct DifferenceSet {
  std::vector<Complex> values;
  std::string source_label;

  std::size_t size() const noexcept { return values.size(); }
};

DifferenceSet difference_set(const MappingAlphabet& a);

/// Per-symbol rotation angles in [0, 2 pi). A pattern is a fixed scheme
/// parameter: simulations never redraw it per frame.
struct RotationPattern {
  std::vector<double> angles;
  std::optional<std::uint64_t> seed;  // empty for constructed or explicit patterns

  std::size_t size() const noexcept { return angles.size(); }
  ComplexVector phases() const;

  static RotationPattern identity(std::size_t m);
};

RotationPattern random_rotation(std::size_t m, std::uint64_t seed);

/// Validates range and wraps an explicit angle list.
RotationPattern rotation_from_angles(std::vector<double> angles);

nlohmann::json rotation_to_json(const RotationPattern& phi);
/// Accepts either a bare array of radians or {"angles": [...], "seed": n}.
RotationPattern rotation_from_json(const nlohmann::json& j);

}  // namespace rotdiv
