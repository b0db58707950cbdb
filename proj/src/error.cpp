#include "rotdiv/error.hpp"

namespace rotdiv {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::input: return "input";
    case ErrorKind::cap_exceeded: return "cap_exceeded";
    case ErrorKind::hypothesis: return "hypothesis";
    case ErrorKind::retries_exhausted: return "retries_exhausted";
    case ErrorKind::estimation: return "estimation";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

}  // namespace rotdiv
