#include "rotdiv/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "rotdiv/alphabet.hpp"
#include "rotdiv/diversity.hpp"
#include "rotdiv/error.hpp"
#include "rotdiv/modulation.hpp"
#include "rotdiv/parallel.hpp"
#include "rotdiv/plot.hpp"
#include "rotdiv/random.hpp"
#include "rotdiv/simulate.hpp"

namespace rotdiv {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::uint64_t kRotationSetDomain = 0x52534554ULL;  // "RSET"
constexpr std::uint64_t kCurveRotationDomain = 0x43524f54ULL; // "CROT"
constexpr std::uint64_t kLemmaDomain = 0x4c454d4dULL;         // "LEMM"
constexpr std::uint64_t kPrecoderDomain = 0x50524543ULL;      // "PREC"

// Read-only view of a spec node that remembers its JSON path for errors.
class Field {
 public:
  Field(const json& j, std::string path) : j_(&j), path_(std::move(path)) {}

  const json& raw() const { return *j_; }
  const std::string& path() const { return path_; }

  bool has(const std::string& key) const { return j_->is_object() && j_->contains(key); }

  Field operator[](const std::string& key) const {
    if (!j_->is_object()) throw SchemaError(path_, "must be an object");
    if (!j_->contains(key)) throw SchemaError(child(key), "missing required field");
    return Field((*j_)[key], child(key));
  }

  std::optional<Field> opt(const std::string& key) const {
    if (!has(key) || (*j_)[key].is_null()) return std::nullopt;
    return Field((*j_)[key], child(key));
  }

  std::size_t size() const {
    if (!j_->is_array()) throw SchemaError(path_, "must be an array");
    return j_->size();
  }

  Field at(std::size_t i) const {
    return Field((*j_)[i], path_ + "[" + std::to_string(i) + "]");
  }

  std::uint64_t u64() const {
    // Parsed text yields unsigned numbers; JSON built in code may hold signed ones.
    const bool ok = j_->is_number_unsigned() || (j_->is_number_integer() && j_->get<std::int64_t>() >= 0);
    if (!ok) throw SchemaError(path_, "must be a nonnegative integer");
    return j_->get<std::uint64_t>();
  }

  std::size_t count(std::size_t lo = 0) const {
    const std::uint64_t v = u64();
    if (v < lo) throw SchemaError(path_, "must be at least " + std::to_string(lo));
    return static_cast<std::size_t>(v);
  }

  double real() const {
    if (!j_->is_number()) throw SchemaError(path_, "must be a number");
    const double v = j_->get<double>();
    if (!std::isfinite(v)) throw SchemaError(path_, "must be finite");
    return v;
  }

  std::string str() const {
    if (!j_->is_string()) throw SchemaError(path_, "must be a string");
    return j_->get<std::string>();
  }

  bool boolean() const {
    if (!j_->is_boolean()) throw SchemaError(path_, "must be true or false");
    return j_->get<bool>();
  }

  std::vector<double> reals() const {
    std::vector<double> out;
    for (std::size_t i = 0; i < size(); ++i) out.push_back(at(i).real());
    return out;
  }

  void allow(std::initializer_list<const char*> keys) const {
    if (!j_->is_object()) throw SchemaError(path_, "must be an object");
    for (const auto& [key, _] : j_->items()) {
      if (std::none_of(keys.begin(), keys.end(), [&](const char* k) { return key == k; }))
        throw SchemaError(child(key), "unknown field");
    }
  }

 private:
  std::string child(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  const json* j_;
  std::string path_;
};

// Re-labels value errors raised by the library with the spec field that fed them.
template <class Fn>
auto at_field(const Field& f, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const SchemaError& e) {
    throw SchemaError(f.path() + "." + e.field(), e.what());
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::input) throw;
    throw SchemaError(f.path(), e.what());
  }
}

struct Context {
  std::uint64_t seed = 1;
  unsigned workers = 1;
  double rank_scale = kDefaultRankScale;
  fs::path out_dir;
};

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_text(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

void write_file(const fs::path& path, const std::string& content, std::vector<fs::path>& artifacts) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::io, "cannot write " + path.string());
  out << content;
  out.close();
  if (!out) throw Error(ErrorKind::io, "failed writing " + path.string());
  artifacts.push_back(path);
}

json assumptions(const Context& ctx) {
  return {{"tap_power", "taps i.i.d. CN(0, 1/P), P = L (time) or L(2K+1) (doubly)"},
          {"power_delay_profile", "uniform"},
          {"rank_tolerance", "max(rows, cols) * sigma_max * rank_scale"},
          {"rank_scale", ctx.rank_scale},
          {"spread_zero_tol", kSpreadZeroTol},
          {"lzf_min_rcond", kLzfMinRcond},
          {"master_seed", ctx.seed},
          {"workers_affect_results", false}};
}

MappingAlphabet parse_alphabet(const Field& spec) {
  if (auto f = spec.opt("alphabet"))
    return at_field(*f, [&] { return make_alphabet(parse_alphabet_kind(f->str())); });
  return make_alphabet(AlphabetKind::bpsk);
}

struct ChannelSpec {
  std::size_t l = 1;
  std::size_t k = 0;
};

ChannelSpec parse_channel(const Field& spec) {
  const Field f = spec["channel"];
  f.allow({"l", "k"});
  ChannelSpec ch;
  ch.l = f["l"].count(1);
  if (auto k = f.opt("k")) ch.k = k->count();
  return ch;
}

std::optional<Precoder> parse_precoder(const Field& f, std::size_t m, const Context& ctx) {
  if (f.raw().is_string()) {
    const std::string name = f.str();
    if (name == "dft") return Precoder{dft_matrix(m), "dft"};
    if (name == "identity")
      return Precoder{ComplexMatrix::Identity(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m)),
                      "identity"};
    if (name == "random_unitary") {
      Rng rng(derive_stream(ctx.seed, kPrecoderDomain, 0));
      return Precoder{random_unitary(m, rng), "random_unitary"};
    }
    throw SchemaError(f.path(), "expected \"dft\", \"identity\", \"random_unitary\" or an object");
  }
  f.allow({"pairs", "random_unitary_seed", "label"});
  const std::string label = f.opt("label") ? (*f.opt("label")).str() : "custom";
  if (auto s = f.opt("random_unitary_seed")) {
    Rng rng(s->u64());
    return Precoder{random_unitary(m, rng), label};
  }
  const Field pairs = f["pairs"];
  return at_field(f, [&] { return make_precoder(matrix_from_pairs(pairs.raw(), m, m, "pairs"), label); });
}

ModulationScheme parse_scheme(const Field& f, const Context& ctx) {
  f.allow({"kind", "m", "mp", "precoder", "n_doppler", "m_delay", "file", "psi", "g",
           "adjust_prefix", "label"});
  const SchemeKind kind = at_field(f["kind"], [&] { return parse_scheme_kind(f["kind"].str()); });

  ModulationScheme scheme = [&] {
    if (kind == SchemeKind::custom && f.has("file")) {
      const Field file = f["file"];
      std::ifstream in(file.str());
      if (!in) throw SchemaError(file.path(), "cannot open '" + file.str() + "'");
      json j;
      try {
        j = json::parse(in);
      } catch (const json::parse_error& e) {
        throw SchemaError(file.path(), std::string("invalid JSON: ") + e.what());
      }
      return at_field(file, [&] { return scheme_from_json(j); });
    }
    const std::size_t m = f["m"].count(1);
    const std::size_t mp = f["mp"].count();
    SchemeParams params;
    if (auto p = f.opt("precoder")) params.precoder = parse_precoder(*p, m, ctx);
    if (auto n = f.opt("n_doppler")) params.n_doppler = n->count(1);
    if (auto d = f.opt("m_delay")) params.m_delay = d->count(1);
    if (kind == SchemeKind::custom) {
      const Field psi = f["psi"];
      const Field g = f["g"];
      params.psi = at_field(f, [&] { return matrix_from_pairs(psi.raw(), m + mp, m, "psi"); });
      params.g = at_field(f, [&] { return matrix_from_pairs(g.raw(), m, m, "g"); });
    }
    return at_field(f, [&] { return build_scheme(kind, m, mp, params); });
  }();

  if (auto adj = f.opt("adjust_prefix"); adj && adj->boolean())
    scheme = at_field(f, [&] { return adjust_prefix_for_diversity2(scheme); });
  if (auto label = f.opt("label"))
    scheme = ModulationScheme(scheme.kind(), scheme.mp(), scheme.psi(), scheme.g(), scheme.precoder(),
                              label->str());
  return scheme;
}

std::optional<Precoder> construction_precoder(const ModulationScheme& scheme) {
  if (scheme.kind() == SchemeKind::precoded_cp_ofdm || scheme.kind() == SchemeKind::dft_s_ofdm)
    return scheme.precoder();
  return std::nullopt;
}

struct ParsedRotation {
  RotationPattern phi;
  std::string source;
  std::optional<RotationCertificate> certificate;
};

ParsedRotation parse_rotation(const std::optional<Field>& f, std::size_t m, std::uint64_t derived_seed,
                              const ModulationScheme* scheme, const DifferenceSet& b,
                              const ChannelSpec& ch, const Context& ctx) {
  if (!f) return {RotationPattern::identity(m), "none", std::nullopt};
  if (f->raw().is_string()) {
    const std::string name = f->str();
    if (name == "none" || name == "identity") return {RotationPattern::identity(m), "none", std::nullopt};
    if (name == "random") return {random_rotation(m, derived_seed), "random", std::nullopt};
    if (name == "constructed") {
      if (!scheme) throw SchemaError(f->path(), "\"constructed\" needs a modulation scheme");
      if (auto p = construction_precoder(*scheme); p && ch.k == 0) {
        auto r = construct_rotation_precoded(*p, b, derived_seed);
        return {r.phi, "constructed", r.certificate};
      }
      EnumerationOptions opts;
      opts.workers = ctx.workers;
      opts.rank_scale = ctx.rank_scale;
      auto r = construct_rotation_general(*scheme, b, ch.l, ch.k, derived_seed, 100, opts);
      return {r.phi, "constructed", r.certificate};
    }
    throw SchemaError(f->path(), "expected \"none\", \"random\", \"constructed\" or an object");
  }
  if (f->raw().is_array()) {
    auto phi = at_field(*f, [&] { return rotation_from_json(f->raw()); });
    if (phi.size() != m) throw SchemaError(f->path(), "must hold M = " + std::to_string(m) + " angles");
    return {phi, "explicit", std::nullopt};
  }
  f->allow({"seed", "angles"});
  if (auto s = f->opt("seed")) return {random_rotation(m, s->u64()), "seeded", std::nullopt};
  const Field angles = (*f)["angles"];
  auto phi = at_field(angles, [&] { return rotation_from_angles(angles.reals()); });
  if (phi.size() != m) throw SchemaError(angles.path(), "must hold M = " + std::to_string(m) + " angles");
  return {phi, "explicit", std::nullopt};
}

EnumerationOptions enum_options(const Field& spec, const Context& ctx) {
  EnumerationOptions opts;
  opts.workers = ctx.workers;
  opts.rank_scale = ctx.rank_scale;
  if (auto c = spec.opt("cap")) opts.cap = c->u64();
  return opts;
}

// ---------------------------------------------------------------- commands

RunResult run_check_diversity(const Field& spec, const Context& ctx) {
  spec.allow({"command", "seed", "workers", "rank_scale", "scheme", "schemes", "alphabet", "channel",
              "rotations", "cap"});
  const MappingAlphabet alphabet = parse_alphabet(spec);
  const DifferenceSet b = difference_set(alphabet);
  const ChannelSpec ch = parse_channel(spec);
  const EnumerationOptions opts = enum_options(spec, ctx);

  std::vector<Field> scheme_fields;
  if (auto list = spec.opt("schemes")) {
    for (std::size_t i = 0; i < list->size(); ++i) scheme_fields.push_back(list->at(i));
    if (scheme_fields.empty()) throw SchemaError(list->path(), "must not be empty");
  } else {
    scheme_fields.push_back(spec["scheme"]);
  }

  std::size_t n_rot = 0;
  bool include_identity = true;
  if (auto r = spec.opt("rotations")) {
    r->allow({"count", "include_identity"});
    n_rot = r->opt("count") ? r->opt("count")->count() : 0;
    if (auto id = r->opt("include_identity")) include_identity = id->boolean();
  }

  RunResult result;
  json schemes = json::array();
  std::ostringstream csv;
  csv << "scheme,rotation,rotation_seed,order,full_order,vectors_checked\n";

  for (std::size_t s = 0; s < scheme_fields.size(); ++s) {
    const ModulationScheme scheme = parse_scheme(scheme_fields[s], ctx);
    const std::string label = scheme.label().empty() ? to_string(scheme.kind()) : scheme.label();
    if (ch.l > scheme.mp() + 1)
      throw SchemaError("channel.l", "L - 1 must not exceed the prefix length of " + label);
    if (ch.k > 0 && (2 * ch.k + 1) * ch.l >= scheme.m())
      throw SchemaError("channel.k", "doubly dispersive analysis requires (2K+1) L < M");

    const ConditionResult cond = check_full_diversity_condition(scheme, ch.l, ch.k, ctx.rank_scale);
    json entry = {{"label", label}, {"kind", to_string(scheme.kind())}, {"m", scheme.m()},
                  {"mp", scheme.mp()}, {"condition", to_json(cond)}};

    if (include_identity) {
      const auto rep = exhaustive_diversity(scheme, RotationPattern::identity(scheme.m()), b, ch.l, ch.k, opts);
      entry["identity"] = to_json(rep);
      csv << csv_text(label) << ",identity,," << rep.order << "," << rep.full_order << ","
          << rep.n_vectors_checked << "\n";
    }
    if (n_rot > 0) {
      std::vector<std::size_t> orders;
      std::size_t n_full = 0;
      for (std::size_t i = 0; i < n_rot; ++i) {
        const std::uint64_t seed = derive_stream(ctx.seed, kRotationSetDomain, i);
        const RotationPattern phi = random_rotation(scheme.m(), seed);
        const auto rep = exhaustive_diversity(scheme, phi, b, ch.l, ch.k, opts);
        orders.push_back(rep.order);
        n_full += rep.order == rep.full_order ? 1 : 0;
        csv << csv_text(label) << ",random," << seed << "," << rep.order << "," << rep.full_order
            << "," << rep.n_vectors_checked << "\n";
      }
      entry["random_rotations"] = {{"count", n_rot},
                                   {"orders", orders},
                                   {"n_full_order", n_full},
                                   {"min_order", *std::min_element(orders.begin(), orders.end())},
                                   {"seed_rule", "derive_stream(master_seed, RSET, index)"}};
    }
    schemes.push_back(entry);
  }

  result.report = {{"command", "check-diversity"},
                   {"alphabet", alphabet.label},
                   {"channel", {{"l", ch.l}, {"k", ch.k}}},
                   {"enumeration_cap", opts.cap},
                   {"schemes", schemes},
                   {"assumptions", assumptions(ctx)}};
  write_file(ctx.out_dir / "results.csv", csv.str(), result.artifacts);
  return result;
}

RunResult run_construct_rotation(const Field& spec, const Context& ctx) {
  spec.allow({"command", "seed", "workers", "rank_scale", "scheme", "alphabet", "channel", "mode",
              "max_tries", "cap", "verify"});
  const MappingAlphabet alphabet = parse_alphabet(spec);
  const DifferenceSet b = difference_set(alphabet);
  const ChannelSpec ch = parse_channel(spec);
  const ModulationScheme scheme = parse_scheme(spec["scheme"], ctx);
  const EnumerationOptions opts = enum_options(spec, ctx);
  std::string mode = spec.opt("mode") ? spec.opt("mode")->str() : "auto";
  if (mode != "auto" && mode != "precoded" && mode != "general")
    throw SchemaError("mode", "expected \"auto\", \"precoded\" or \"general\"");
  const auto precoder = construction_precoder(scheme);
  if (mode == "auto") mode = precoder && ch.k == 0 ? "precoded" : "general";
  if (mode == "precoded" && !precoder)
    throw SchemaError("mode", "\"precoded\" needs a precoded_cp_ofdm or dft_s_ofdm scheme");
  const std::size_t max_tries = spec.opt("max_tries") ? spec.opt("max_tries")->count(1) : 100;
  const bool verify = spec.opt("verify") ? spec.opt("verify")->boolean() : true;

  ConstructionResult res;
  json verification;
  if (mode == "precoded") {
    PrecodedConstructionOptions popts;
    popts.cap = opts.cap;
    res = construct_rotation_precoded(*precoder, b, ctx.seed, popts);
    if (verify) {
      const auto spread = nonzero_spread_check(*precoder, res.phi, b, opts);
      verification["nonzero_spread"] = {{"pass", spread.pass},
                                        {"min_relative_magnitude", spread.min_relative_magnitude},
                                        {"near_threshold", spread.near_threshold}};
      if (ch.l <= scheme.mp() + 1) {
        const auto rep = exhaustive_diversity(scheme, res.phi, b, ch.l, ch.k, opts);
        verification["exhaustive"] = to_json(rep);
      }
    }
  } else {
    res = construct_rotation_general(scheme, b, ch.l, ch.k, ctx.seed, max_tries, opts);
  }

  std::ostringstream csv;
  csv << "q,angle_rad,forbidden_size,inequality_count\n";
  for (std::size_t q = 0; q < res.phi.size(); ++q) {
    csv << q << "," << num(res.phi.angles[q]) << ",";
    if (q < res.certificate.forbidden_sizes.size()) csv << res.certificate.forbidden_sizes[q];
    csv << ",";
    if (q < res.certificate.inequality_counts.size()) csv << res.certificate.inequality_counts[q];
    csv << "\n";
  }
  RunResult result;
  result.report = {{"command", "construct-rotation"},
                   {"mode", mode},
                   {"scheme", scheme.label().empty() ? to_string(scheme.kind()) : scheme.label()},
                   {"alphabet", alphabet.label},
                   {"channel", {{"l", ch.l}, {"k", ch.k}}},
                   {"rotation", rotation_to_json(res.phi)},
                   {"certificate", to_json(res.certificate)},
                   {"verification", verification},
                   {"assumptions", assumptions(ctx)}};
  write_file(ctx.out_dir / "results.csv", csv.str(), result.artifacts);
  return result;
}

std::vector<double> parse_snr_grid(const Field& f) {
  if (f.raw().is_array()) return f.reals();
  f.allow({"start", "stop", "step"});
  const double start = f["start"].real();
  const double stop = f["stop"].real();
  const double step = f["step"].real();
  if (!(step > 0.0)) throw SchemaError(f.path() + ".step", "must be positive");
  if (stop < start) throw SchemaError(f.path() + ".stop", "must not be below start");
  std::vector<double> out;
  const auto n = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9));
  for (std::size_t i = 0; i <= n; ++i) out.push_back(start + step * static_cast<double>(i));
  return out;
}

RunResult run_ber(const Field& spec, const Context& ctx) {
  spec.allow({"command", "seed", "workers", "rank_scale", "curves", "alphabet", "channel", "snr_db",
              "frames", "target_errors", "detector", "batch_frames", "ml_cap_bits", "slope_window"});
  const MappingAlphabet alphabet = parse_alphabet(spec);
  const DifferenceSet b = difference_set(alphabet);
  const ChannelSpec ch = parse_channel(spec);
  const Field curves_f = spec["curves"];
  if (curves_f.size() == 0) throw SchemaError(curves_f.path(), "must not be empty");
  const std::vector<double> snr = parse_snr_grid(spec["snr_db"]);

  SimConfig base{.scheme = build_scheme(SchemeKind::plain_ofdm, 1, 0),
                 .rotation = RotationPattern::identity(1),
                 .alphabet = alphabet,
                 .l_max = ch.l,
                 .k_max = ch.k,
                 .snr_db = snr,
                 .max_frames = 100000,
                 .target_errors = 200,
                 .master_seed = ctx.seed,
                 .detector = DetectorKind::ml,
                 .workers = ctx.workers,
                 .batch_frames = 2000,
                 .ml_cap_bits = kDefaultMlCapBits,
                 .label = {}};
  if (auto f = spec.opt("frames")) base.max_frames = f->u64();
  if (auto t = spec.opt("target_errors")) base.target_errors = t->u64();
  if (auto d = spec.opt("detector"))
    base.detector = at_field(*d, [&] { return parse_detector_kind(d->str()); });
  if (auto bf = spec.opt("batch_frames")) base.batch_frames = bf->count(1);
  if (auto cap = spec.opt("ml_cap_bits")) base.ml_cap_bits = cap->count(1);
  std::optional<std::pair<double, double>> window;
  if (auto w = spec.opt("slope_window")) {
    if (w->size() != 2) throw SchemaError(w->path(), "must be [lo_db, hi_db]");
    window = std::pair{w->at(0).real(), w->at(1).real()};
  }

  RunResult result;
  json curves = json::array();
  std::ostringstream csv;
  csv << "curve,snr_db,ber,bit_errors,bits,frames,erasures\n";
  PlotSpec plot{"BER vs SNR", "SNR (dB)", "BER", true, {}};

  for (std::size_t i = 0; i < curves_f.size(); ++i) {
    const Field c = curves_f.at(i);
    c.allow({"label", "scheme", "rotation"});
    SimConfig cfg = base;
    cfg.scheme = parse_scheme(c["scheme"], ctx);
    const auto rot = parse_rotation(c.opt("rotation"), cfg.scheme.m(),
                                    derive_stream(ctx.seed, kCurveRotationDomain, i), &cfg.scheme, b, ch, ctx);
    cfg.rotation = rot.phi;
    cfg.label = c.opt("label") ? c.opt("label")->str() : "curve" + std::to_string(i);
    at_field(c, [&] { validate(cfg); return 0; });

    const BerCurve curve = ber_sweep(cfg);
    json cj = to_json(curve);
    cj["metadata"]["rotation_source"] = rot.source;
    if (rot.certificate) cj["metadata"]["rotation_certificate"] = to_json(*rot.certificate);
    if (window) {
      try {
        cj["slope"] = slope_estimate(curve, *window);
      } catch (const Error& e) {
        cj["slope"] = nullptr;
        cj["slope_error"] = e.what();
      }
    }
    curves.push_back(cj);
    for (std::size_t s = 0; s < curve.snr_db.size(); ++s)
      csv << csv_text(curve.label) << "," << num(curve.snr_db[s]) << "," << num(curve.ber[s]) << ","
          << curve.bit_errors[s] << "," << curve.bits_simulated[s] << "," << curve.frames[s] << ","
          << curve.erasures[s] << "\n";
    plot.series.push_back({curve.label, curve.snr_db, curve.ber});
  }

  result.report = {{"command", "ber"},
                   {"alphabet", alphabet.label},
                   {"channel", {{"l", ch.l}, {"k", ch.k}}},
                   {"detector", to_string(base.detector)},
                   {"curves", curves},
                   {"assumptions", assumptions(ctx)}};
  if (window) result.report["slope_window"] = {window->first, window->second};
  write_file(ctx.out_dir / "results.csv", csv.str(), result.artifacts);
  write_file(ctx.out_dir / "plot.svg", render_svg(plot), result.artifacts);
  return result;
}

RunResult run_papr(const Field& spec, const Context& ctx) {
  spec.allow({"command", "seed", "workers", "rank_scale", "curves", "alphabet", "m", "oversample",
              "frames", "grid_step_db", "levels"});
  const MappingAlphabet alphabet = parse_alphabet(spec);
  const DifferenceSet b = difference_set(alphabet);
  const std::size_t m = spec["m"].count(1);
  const Field curves_f = spec["curves"];
  if (curves_f.size() == 0) throw SchemaError(curves_f.path(), "must not be empty");
  std::vector<double> levels{1e-2, 1e-3};
  if (auto l = spec.opt("levels")) levels = l->reals();

  PaprConfig base;
  base.alphabet = alphabet;
  base.m = m;
  base.seed = ctx.seed;
  base.workers = ctx.workers;
  if (auto o = spec.opt("oversample")) base.oversample = o->count(1);
  if (auto f = spec.opt("frames")) base.frames = f->count(1);
  if (auto g = spec.opt("grid_step_db")) {
    base.grid_step_db = g->real();
    if (!(base.grid_step_db > 0.0)) throw SchemaError(g->path(), "must be positive");
  }

  RunResult result;
  json curves = json::array();
  std::ostringstream csv;
  csv << "curve,papr_db,ccdf\n";
  PlotSpec plot{"PAPR CCDF", "PAPR (dB)", "P(PAPR > x)", true, {}};

  for (std::size_t i = 0; i < curves_f.size(); ++i) {
    const Field c = curves_f.at(i);
    c.allow({"label", "waveform", "precoder", "rotation"});
    PaprConfig cfg = base;
    cfg.waveform = at_field(c["waveform"], [&] { return parse_papr_waveform(c["waveform"].str()); });
    if (auto p = c.opt("precoder")) cfg.precoder = parse_precoder(*p, m, ctx);
    if (cfg.waveform == PaprWaveform::precoded && !cfg.precoder)
      throw SchemaError(c.path() + ".precoder", "required for the precoded waveform");
    const std::uint64_t rot_seed = derive_stream(ctx.seed, kCurveRotationDomain, i);
    if (auto r = c.opt("rotation"); r && r->raw().is_string() && r->str() == "constructed") {
      std::optional<Precoder> p = cfg.precoder;
      if (cfg.waveform == PaprWaveform::dft_s_ofdm) p = Precoder{dft_matrix(m), "dft"};
      if (cfg.waveform == PaprWaveform::ofdm) p = Precoder{ComplexMatrix::Identity(m, m), "identity"};
      cfg.rotation = construct_rotation_precoded(*p, b, rot_seed).phi;
    } else {
      cfg.rotation = parse_rotation(c.opt("rotation"), m, rot_seed, nullptr, b, ChannelSpec{}, ctx).phi;
    }
    cfg.label = c.opt("label") ? c.opt("label")->str() : "curve" + std::to_string(i);

    const PaprCcdf ccdf = papr_ccdf(cfg);
    json at_levels = json::object();
    for (double level : levels) {
      try {
        at_levels[num(level)] = ccdf.papr_at_ccdf(level);
      } catch (const Error&) {
        at_levels[num(level)] = nullptr;
      }
    }
    curves.push_back({{"label", ccdf.label},
                      {"waveform", to_string(cfg.waveform)},
                      {"rotation", rotation_to_json(*cfg.rotation)},
                      {"papr_at_ccdf", at_levels}});
    for (std::size_t k = 0; k < ccdf.papr_db.size(); ++k)
      csv << csv_text(ccdf.label) << "," << num(ccdf.papr_db[k]) << "," << num(ccdf.ccdf[k]) << "\n";
    plot.series.push_back({ccdf.label, ccdf.papr_db, ccdf.ccdf});
  }

  result.report = {{"command", "papr"},
                   {"alphabet", alphabet.label},
                   {"m", m},
                   {"oversample", base.oversample},
                   {"frames", base.frames},
                   {"grid_step_db", base.grid_step_db},
                   {"zero_padding", "spectrum centre; bins [0, ceil(M/2)) low, the rest high"},
                   {"curves", curves},
                   {"assumptions", assumptions(ctx)}};
  write_file(ctx.out_dir / "results.csv", csv.str(), result.artifacts);
  write_file(ctx.out_dir / "plot.svg", render_svg(plot), result.artifacts);
  return result;
}

RunResult run_lemma_suite(const Field& spec, const Context& ctx) {
  spec.allow({"command", "seed", "workers", "rank_scale", "trials", "max_rows", "max_cols"});
  const std::size_t trials = spec.opt("trials") ? spec.opt("trials")->count(1) : 100;
  const std::size_t max_rows = spec.opt("max_rows") ? spec.opt("max_rows")->count(1) : 6;
  const std::size_t max_cols = spec.opt("max_cols") ? spec.opt("max_cols")->count(1) : 4;

  struct Row {
    std::size_t rows, cols;
    Lemma1Result res;
  };
  std::vector<Row> rows(trials);
  parallel_for(trials, ctx.workers, [&](std::size_t t) {
    Rng rng(derive_stream(ctx.seed, kLemmaDomain, t));
    const std::size_t r = 1 + static_cast<std::size_t>(rng() % max_rows);
    const std::size_t c = 1 + static_cast<std::size_t>(rng() % max_cols);
    ComplexMatrix a(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
    ComplexMatrix b(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
    do {
      for (Eigen::Index i = 0; i < a.size(); ++i) a(i) = complex_gaussian(rng, 1.0);
      for (Eigen::Index i = 0; i < b.size(); ++i) b(i) = complex_gaussian(rng, 1.0);
    } while (rank_of(a) < std::min(r, c) || rank_of(b) < std::min(r, c));
    rows[t] = {r, c, lemma1_root_count(a, b)};
  });

  std::ostringstream csv;
  csv << "trial,rows,cols,n_roots,bound,a0_nonzero,within_bound\n";
  std::size_t n_ok = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    const auto& r = rows[t];
    n_ok += r.res.within_bound && r.res.constant_coeff_nonzero ? 1 : 0;
    csv << t << "," << r.rows << "," << r.cols << "," << r.res.n_roots << "," << r.res.bound << ","
        << (r.res.constant_coeff_nonzero ? 1 : 0) << "," << (r.res.within_bound ? 1 : 0) << "\n";
  }
  RunResult result;
  result.report = {{"command", "lemma-suite"},
                   {"trials", trials},
                   {"max_shape", {max_rows, max_cols}},
                   {"n_pass", n_ok},
                   {"pass", n_ok == trials},
                   {"assumptions", assumptions(ctx)}};
  write_file(ctx.out_dir / "results.csv", csv.str(), result.artifacts);
  return result;
}

json curve(const std::string& label, json scheme, json rotation = nullptr) {
  json c = {{"label", label}, {"scheme", std::move(scheme)}};
  if (!rotation.is_null()) c["rotation"] = std::move(rotation);
  return c;
}

const std::map<std::string, json>& presets() {
  static const std::map<std::string, json> table = [] {
    std::map<std::string, json> t;
    const json dft4 = {{"kind", "dft_s_ofdm"}, {"m", 4}, {"mp", 2}};
    const json ofdm4 = {{"kind", "plain_ofdm"}, {"m", 4}, {"mp", 2}};
    t["diversity"] = {{"command", "check-diversity"},
                      {"seed", 1},
                      {"schemes", {ofdm4, dft4}},
                      {"alphabet", "bpsk"},
                      {"channel", {{"l", 2}}},
                      {"rotations", {{"count", 100}, {"include_identity", true}}}};
    t["fig2"] = {{"command", "ber"},
                 {"seed", 1},
                 {"alphabet", "bpsk"},
                 {"channel", {{"l", 2}}},
                 {"detector", "ml"},
                 {"snr_db", {{"start", 0}, {"stop", 28}, {"step", 2}}},
                 {"frames", 2000000},
                 {"target_errors", 200},
                 {"slope_window", {20, 28}},
                 {"curves",
                  {curve("OFDM", ofdm4), curve("OFDM, rotated", ofdm4, "random"),
                   curve("DFT-s-OFDM", dft4), curve("DFT-s-OFDM, rotated", dft4, "random")}}};
    const json dft8 = {{"kind", "dft_s_ofdm"}, {"m", 8}, {"mp", 4}};
    const json ofdm8 = {{"kind", "plain_ofdm"}, {"m", 8}, {"mp", 4}};
    t["fig3"] = {{"command", "ber"},
                 {"seed", 1},
                 {"alphabet", "bpsk"},
                 {"channel", {{"l", 4}}},
                 {"detector", "ml"},
                 {"snr_db", {{"start", 0}, {"stop", 22}, {"step", 2}}},
                 {"frames", 3000000},
                 {"target_errors", 200},
                 {"slope_window", {16, 22}},
                 {"curves",
                  {curve("OFDM", ofdm8), curve("DFT-s-OFDM", dft8),
                   curve("DFT-s-OFDM, rotated", dft8, "random")}}};
    t["fig5"] = {{"command", "papr"},
                 {"seed", 1},
                 {"alphabet", "bpsk"},
                 {"m", 1024},
                 {"oversample", 8},
                 {"frames", 100000},
                 {"levels", {1e-2, 1e-3}},
                 {"curves",
                  {{{"label", "OFDM"}, {"waveform", "ofdm"}},
                   {{"label", "DFT-s-OFDM"}, {"waveform", "dft_s_ofdm"}},
                   {{"label", "DFT-s-OFDM, rotated"}, {"waveform", "dft_s_ofdm"}, {"rotation", "random"}}}}};
    const json dd = {{"kind", "dd_grid"}, {"m", 8}, {"mp", 2}, {"n_doppler", 4}, {"m_delay", 2}};
    t["fig6"] = {{"command", "ber"},
                 {"seed", 1},
                 {"alphabet", "bpsk"},
                 {"channel", {{"l", 2}, {"k", 1}}},
                 {"detector", "ml"},
                 {"snr_db", {{"start", 0}, {"stop", 20}, {"step", 2}}},
                 {"frames", 200000},
                 {"target_errors", 200},
                 {"curves", {curve("DD grid", dd), curve("DD grid, rotated", dd, "random")}}};
    return t;
  }();
  return table;
}

}  // namespace

std::vector<std::string> list_presets() {
  std::vector<std::string> names;
  for (const auto& [name, _] : presets()) names.push_back(name);
  return names;
}

json preset_spec(const std::string& name) {
  const auto it = presets().find(name);
  if (it == presets().end()) throw Error(ErrorKind::input, "unknown preset '" + name + "'");
  return it->second;
}

RunResult run_experiment(const json& spec_json, const RunOptions& opts) {
  const Field spec(spec_json, "");
  if (!spec_json.is_object()) throw SchemaError("$", "spec must be a JSON object");
  const std::string command = spec["command"].str();

  Context ctx;
  if (auto s = spec.opt("seed")) ctx.seed = s->u64();
  if (auto w = spec.opt("workers")) ctx.workers = static_cast<unsigned>(w->u64());
  if (auto r = spec.opt("rank_scale")) ctx.rank_scale = r->real();
  if (opts.seed) ctx.seed = *opts.seed;
  if (opts.workers) ctx.workers = *opts.workers;
  if (opts.tolerance) ctx.rank_scale = *opts.tolerance;
  if (ctx.workers == 0) ctx.workers = default_workers();
  if (!(ctx.rank_scale > 0.0 && ctx.rank_scale < 1.0))
    throw SchemaError("rank_scale", "must lie in (0, 1)");

  ctx.out_dir = opts.out_dir;
  std::error_code ec;
  fs::create_directories(ctx.out_dir, ec);
  if (ec || !fs::is_directory(ctx.out_dir))
    throw Error(ErrorKind::io, "cannot create output directory " + ctx.out_dir.string());

  RunResult result;
  if (command == "check-diversity") result = run_check_diversity(spec, ctx);
  else if (command == "construct-rotation") result = run_construct_rotation(spec, ctx);
  else if (command == "ber") result = run_ber(spec, ctx);
  else if (command == "papr") result = run_papr(spec, ctx);
  else if (command == "lemma-suite") result = run_lemma_suite(spec, ctx);
  else
    throw SchemaError("command", "expected one of check-diversity, construct-rotation, ber, papr, "
                                 "lemma-suite");

  result.report["spec"] = spec_json;
  result.report["workers"] = ctx.workers;
  write_file(ctx.out_dir / "report.json", result.report.dump(2) + "\n", result.artifacts);
  return result;
}

json error_to_json(const std::exception& e) {
  json err = {{"message", e.what()}};
  if (const auto* se = dynamic_cast<const SchemaError*>(&e)) {
    err["kind"] = to_string(se->kind());
    err["field"] = se->field();
  } else if (const auto* re = dynamic_cast<const Error*>(&e)) {
    err["kind"] = to_string(re->kind());
    if (re->kind() == ErrorKind::cap_exceeded)
      err["hint"] = "lower M or the alphabet size, raise \"cap\" / \"ml_cap_bits\", or use the lzf detector";
  } else if (dynamic_cast<const json::exception*>(&e)) {
    err["kind"] = "input";
    err["field"] = "$";
  } else {
    err["kind"] = "internal";
  }
  return {{"error", err}};
}

}  // namespace rotdiv
