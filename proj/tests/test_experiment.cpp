#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "rotdiv/error.hpp"
#include "rotdiv/experiment.hpp"

using namespace rotdiv;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("rotdiv_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string schema_field(const json& spec) {
  try {
    run_experiment(spec, RunOptions{.out_dir = scratch("bad"), .seed = {}, .workers = {}, .tolerance = {}});
  } catch (const SchemaError& e) {
    return e.field();
  }
  return "<no error>";
}

const json kDiversity = {{"command", "check-diversity"},
                         {"seed", 7},
                         {"scheme", {{"kind", "dft_s_ofdm"}, {"m", 4}, {"mp", 2}}},
                         {"alphabet", "bpsk"},
                         {"channel", {{"l", 2}}},
                         {"rotations", {{"count", 10}}}};

}  // namespace

TEST_CASE("check-diversity experiment writes a reproducible table") {
  const auto dir = scratch("div");
  RunOptions opts{.out_dir = dir, .seed = {}, .workers = 1, .tolerance = {}};
  const auto r = run_experiment(kDiversity, opts);
  const auto& entry = r.report["schemes"][0];
  CHECK(entry["random_rotations"]["n_full_order"] == 10);
  CHECK(r.report["spec"] == kDiversity);
  const std::string first = slurp(dir / "results.csv");
  CHECK(first.rfind("scheme,rotation,rotation_seed,order,full_order,vectors_checked\n", 0) == 0);
  CHECK(fs::exists(dir / "report.json"));

  opts.workers = 2;
  run_experiment(kDiversity, opts);
  CHECK(slurp(dir / "results.csv") == first);

  opts.seed = 8;
  run_experiment(kDiversity, opts);
  CHECK(slurp(dir / "results.csv") != first);
}

TEST_CASE("small BER and PAPR experiments run end to end") {
  const auto dir = scratch("ber");
  json spec = {{"command", "ber"},
               {"alphabet", "bpsk"},
               {"channel", {{"l", 2}}},
               {"snr_db", {{"start", 0}, {"stop", 4}, {"step", 2}}},
               {"frames", 500},
               {"curves", {{{"label", "a"}, {"scheme", {{"kind", "dft_s_ofdm"}, {"m", 4}, {"mp", 1}}},
                            {"rotation", "random"}}}}};
  const auto r = run_experiment(spec, RunOptions{.out_dir = dir, .seed = {}, .workers = {}, .tolerance = {}});
  CHECK(r.report["curves"][0]["snr_db"].size() == 3);
  CHECK(fs::exists(dir / "plot.svg"));

  json papr = {{"command", "papr"},
               {"m", 32},
               {"frames", 400},
               {"curves", {{{"label", "ofdm"}, {"waveform", "ofdm"}}}}};
  papr["levels"] = {1e-2};
  CHECK_NOTHROW(run_experiment(papr, RunOptions{.out_dir = dir, .seed = {}, .workers = {}, .tolerance = {}}));
  CHECK(slurp(dir / "results.csv").rfind("curve,papr_db,ccdf\n", 0) == 0);
}

TEST_CASE("schema errors name the offending field") {
  json spec = kDiversity;
  spec["scheme"]["mp"] = -1;
  CHECK(schema_field(spec) == "scheme.mp");

  spec = kDiversity;
  spec["alphabet"] = "8psk";
  CHECK(schema_field(spec) == "alphabet");

  spec = kDiversity;
  spec["bogus"] = 1;
  CHECK(schema_field(spec) == "bogus");

  json ber = {{"command", "ber"},
              {"channel", {{"l", 2}}},
              {"snr_db", {0, 2}},
              {"curves", {{{"scheme", {{"kind", "plain_ofdm"}, {"m", 4}, {"mp", 1}}}},
                          {{"scheme", {{"kind", "plain_ofdm"}, {"m", 4}, {"mp", "x"}}}}}}};
  CHECK(schema_field(ber) == "curves[1].scheme.mp");
  ber["snr_db"] = {2, 0};
  ber["curves"][1]["scheme"]["mp"] = 1;
  CHECK(schema_field(ber) != "<no error>");

  CHECK(schema_field(json::array()) == "$");
  CHECK(schema_field({{"command", "fly"}}) == "command");
}

TEST_CASE("presets and error JSON") {
  const auto names = list_presets();
  for (const char* want : {"diversity", "fig2", "fig3", "fig5", "fig6"})
    CHECK(std::find(names.begin(), names.end(), want) != names.end());
  CHECK(preset_spec("fig2")["command"] == "ber");
  CHECK_THROWS_AS(preset_spec("nope"), Error);

  const json e = error_to_json(SchemaError("a.b", "bad"));
  CHECK(e["error"]["field"] == "a.b");
  CHECK(e["error"]["kind"] == "input");
  const json plain = error_to_json(Error(ErrorKind::cap_exceeded, "too big"));
  CHECK(plain["error"]["kind"] == "cap_exceeded");
  CHECK_FALSE(plain["error"].contains("field"));
}
