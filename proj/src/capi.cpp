#include "rotdiv/rotdiv.h"

#include <cstdlib>
#include <cstring>
#include <string>

#include "rotdiv/diversity.hpp"
#include "rotdiv/error.hpp"
#include "rotdiv/experiment.hpp"
#include "rotdiv/modulation.hpp"

struct rotdiv_scheme {
  rotdiv::ModulationScheme scheme;
};

struct rotdiv_rotation {
  rotdiv::RotationPattern phi;
};

namespace {

thread_local std::string last_error;
thread_local std::string last_error_json;

rotdiv_status status_of(rotdiv::ErrorKind kind) {
  switch (kind) {
    case rotdiv::ErrorKind::input: return ROTDIV_E_INPUT;
    case rotdiv::ErrorKind::cap_exceeded: return ROTDIV_E_CAP_EXCEEDED;
    case rotdiv::ErrorKind::hypothesis: return ROTDIV_E_HYPOTHESIS;
    case rotdiv::ErrorKind::retries_exhausted: return ROTDIV_E_RETRIES_EXHAUSTED;
    case rotdiv::ErrorKind::estimation: return ROTDIV_E_ESTIMATION;
    case rotdiv::ErrorKind::io: return ROTDIV_E_IO;
  }
  return ROTDIV_E_INTERNAL;
}

template <class Fn>
rotdiv_status guarded(Fn&& fn) {
  try {
    fn();
    last_error.clear();
    last_error_json.clear();
    return ROTDIV_OK;
  } catch (const rotdiv::Error& e) {
    last_error = e.what();
    last_error_json = rotdiv::error_to_json(e).dump();
    return status_of(e.kind());
  } catch (const nlohmann::json::exception& e) {
    last_error = e.what();
    last_error_json = rotdiv::error_to_json(e).dump();
    return ROTDIV_E_INPUT;
  } catch (const std::exception& e) {
    last_error = e.what();
    last_error_json = rotdiv::error_to_json(e).dump();
    return ROTDIV_E_INTERNAL;
  } catch (...) {
    last_error = "unknown error";
    last_error_json = R"({"error":{"kind":"internal","message":"unknown error"}})";
    return ROTDIV_E_INTERNAL;
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void require_ptr(const void* p, const char* name) {
  rotdiv::require(p != nullptr, rotdiv::ErrorKind::input, std::string(name) + " must not be NULL");
}

}  // namespace

extern "C" {

const char* rotdiv_version(void) { return "0.1.0"; }
const char* rotdiv_last_error(void) { return last_error.c_str(); }
const char* rotdiv_last_error_json(void) { return last_error_json.c_str(); }
void rotdiv_string_free(char* s) { std::free(s); }

rotdiv_status rotdiv_scheme_create(const char* kind, size_t m, size_t mp, const char* params_json,
                                   rotdiv_scheme** out) {
  return guarded([&] {
    require_ptr(kind, "kind");
    require_ptr(out, "out");
    *out = nullptr;
    nlohmann::json spec = params_json ? nlohmann::json::parse(params_json) : nlohmann::json::object();
    rotdiv::require(spec.is_object(), rotdiv::ErrorKind::input, "params_json must be an object");
    spec["kind"] = kind;
    spec["m"] = m;
    spec["mp"] = mp;
    rotdiv::SchemeParams params;
    const auto k = rotdiv::parse_scheme_kind(kind);
    if (spec.contains("precoder")) {
      const auto& p = spec["precoder"];
      if (p.is_string() && p == "dft")
        params.precoder = rotdiv::Precoder{rotdiv::dft_matrix(m), "dft"};
      else if (p.is_string() && p == "identity")
        params.precoder = rotdiv::Precoder{rotdiv::ComplexMatrix::Identity(m, m), "identity"};
      else
        params.precoder = rotdiv::make_precoder(
            rotdiv::matrix_from_pairs(p.is_object() ? p.at("pairs") : p, m, m, "precoder"), "custom");
    }
    if (spec.contains("n_doppler")) params.n_doppler = spec["n_doppler"].get<std::size_t>();
    if (spec.contains("m_delay")) params.m_delay = spec["m_delay"].get<std::size_t>();
    if (spec.contains("psi")) params.psi = rotdiv::matrix_from_pairs(spec["psi"], m + mp, m, "psi");
    if (spec.contains("g")) params.g = rotdiv::matrix_from_pairs(spec["g"], m, m, "g");
    rotdiv::ModulationScheme scheme = rotdiv::build_scheme(k, m, mp, params);
    if (spec.value("adjust_prefix", false)) scheme = rotdiv::adjust_prefix_for_diversity2(scheme);
    *out = new rotdiv_scheme{std::move(scheme)};
  });
}

void rotdiv_scheme_free(rotdiv_scheme* scheme) { delete scheme; }
size_t rotdiv_scheme_m(const rotdiv_scheme* scheme) { return scheme ? scheme->scheme.m() : 0; }
size_t rotdiv_scheme_mp(const rotdiv_scheme* scheme) { return scheme ? scheme->scheme.mp() : 0; }

rotdiv_status rotdiv_rotation_identity(size_t m, rotdiv_rotation** out) {
  return guarded([&] {
    require_ptr(out, "out");
    *out = new rotdiv_rotation{rotdiv::RotationPattern::identity(m)};
  });
}

rotdiv_status rotdiv_rotation_random(size_t m, uint64_t seed, rotdiv_rotation** out) {
  return guarded([&] {
    require_ptr(out, "out");
    *out = new rotdiv_rotation{rotdiv::random_rotation(m, seed)};
  });
}

rotdiv_status rotdiv_rotation_from_angles(const double* angles, size_t m, rotdiv_rotation** out) {
  return guarded([&] {
    require_ptr(out, "out");
    require_ptr(angles, "angles");
    *out = new rotdiv_rotation{rotdiv::rotation_from_angles(std::vector<double>(angles, angles + m))};
  });
}

rotdiv_status rotdiv_rotation_angles(const rotdiv_rotation* phi, double* angles, size_t capacity,
                                     size_t* m) {
  return guarded([&] {
    require_ptr(phi, "phi");
    const auto& a = phi->phi.angles;
    if (angles)
      for (size_t i = 0; i < a.size() && i < capacity; ++i) angles[i] = a[i];
    if (m) *m = a.size();
  });
}

void rotdiv_rotation_free(rotdiv_rotation* phi) { delete phi; }

rotdiv_status rotdiv_check_full_diversity(const rotdiv_scheme* scheme, size_t l_max, size_t k_max,
                                          int* pass, size_t* per_q_ranks) {
  return guarded([&] {
    require_ptr(scheme, "scheme");
    const auto res = rotdiv::check_full_diversity_condition(scheme->scheme, l_max, k_max);
    if (pass) *pass = res.pass ? 1 : 0;
    if (per_q_ranks)
      for (size_t q = 0; q < res.per_q_ranks.size(); ++q) per_q_ranks[q] = res.per_q_ranks[q];
  });
}

rotdiv_status rotdiv_exhaustive_diversity(const rotdiv_scheme* scheme, const rotdiv_rotation* phi,
                                          const char* alphabet, size_t l_max, size_t k_max,
                                          unsigned workers, size_t* order) {
  return guarded([&] {
    require_ptr(scheme, "scheme");
    require_ptr(phi, "phi");
    require_ptr(alphabet, "alphabet");
    require_ptr(order, "order");
    const auto b = rotdiv::difference_set(rotdiv::make_alphabet(rotdiv::parse_alphabet_kind(alphabet)));
    rotdiv::EnumerationOptions opts;
    opts.workers = workers;
    *order = rotdiv::exhaustive_diversity(scheme->scheme, phi->phi, b, l_max, k_max, opts).order;
  });
}

rotdiv_status rotdiv_construct_rotation(const rotdiv_scheme* scheme, const char* alphabet,
                                        size_t l_max, size_t k_max, uint64_t seed,
                                        rotdiv_rotation** out) {
  return guarded([&] {
    require_ptr(scheme, "scheme");
    require_ptr(alphabet, "alphabet");
    require_ptr(out, "out");
    const auto b = rotdiv::difference_set(rotdiv::make_alphabet(rotdiv::parse_alphabet_kind(alphabet)));
    const auto& s = scheme->scheme;
    const bool precoded = (s.kind() == rotdiv::SchemeKind::precoded_cp_ofdm ||
                           s.kind() == rotdiv::SchemeKind::dft_s_ofdm) &&
                          s.precoder() && k_max == 0;
    auto res = precoded ? rotdiv::construct_rotation_precoded(*s.precoder(), b, seed)
                        : rotdiv::construct_rotation_general(s, b, l_max, k_max, seed, 100);
    *out = new rotdiv_rotation{std::move(res.phi)};
  });
}

rotdiv_status rotdiv_run_experiment(const char* spec_json, const char* out_dir,
                                    const rotdiv_run_options* options, char** report_json) {
  return guarded([&] {
    require_ptr(spec_json, "spec_json");
    require_ptr(out_dir, "out_dir");
    if (report_json) *report_json = nullptr;
    nlohmann::json spec;
    try {
      spec = nlohmann::json::parse(spec_json);
    } catch (const nlohmann::json::parse_error& e) {
      throw rotdiv::SchemaError("$", std::string("malformed JSON: ") + e.what());
    }
    rotdiv::RunOptions opts;
    opts.out_dir = out_dir;
    if (options) {
      if (options->has_seed) opts.seed = options->seed;
      if (options->has_workers) opts.workers = options->workers;
      if (options->has_tolerance) opts.tolerance = options->tolerance;
    }
    const auto result = rotdiv::run_experiment(spec, opts);
    if (report_json) *report_json = dup_string(result.report.dump(2));
  });
}

rotdiv_status rotdiv_list_presets(char** names_json) {
  return guarded([&] {
    require_ptr(names_json, "names_json");
    *names_json = dup_string(nlohmann::json(rotdiv::list_presets()).dump());
  });
}

rotdiv_status rotdiv_preset_spec(const char* name, char** spec_json) {
  return guarded([&] {
    require_ptr(name, "name");
    require_ptr(spec_json, "spec_json");
    *spec_json = dup_string(rotdiv::preset_spec(name).dump(2));
  });
}

}  // extern "C"
