#include <gtest/gtest.h>

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <ponderolens/config.hpp>
#include <ponderolens/grid_file.hpp>

using namespace ponderolens;
namespace fs = std::filesystem;

namespace {
fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("ponderolens_test_" + std::to_string(::getpid())) / name;
  fs::create_directories(p.parent_path());
  return p;
}
std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}
int run_cli(const std::string& args) {
  const std::string cmd = std::string(PONDEROLENS_CLI) + " " + args + " > /dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}
std::string repo(const std::string& rel) { return std::string(PONDEROLENS_SOURCE_DIR) + "/" + rel; }
}  // namespace

TEST(GridFile, RoundTripIsBitExact) {
  std::mt19937_64 g(1);
  GridFile a;
  a.dims = {3, 4, 5};
  a.axis_min = {-1, -2e-6, 0.5};
  a.axis_max = {1, 2e-6, 0.75};
  for (int i = 0; i < 60; ++i) a.real.push_back(std::bit_cast<double>(g() & 0x7fefffffffffffffULL));
  a.real[7] = -0.0;
  a.real[8] = std::numeric_limits<double>::denorm_min();
  const auto p = scratch("a.plg");
  write_grid_file(p.string(), a);
  const GridFile b = read_grid_file(p.string());
  EXPECT_EQ(b.dims, a.dims);
  EXPECT_EQ(std::memcmp(b.axis_min.data(), a.axis_min.data(), 24), 0);
  EXPECT_EQ(std::memcmp(b.real.data(), a.real.data(), 60 * 8), 0);
  write_grid_file(scratch("a2.plg").string(), b);
  EXPECT_EQ(slurp(p), slurp(scratch("a2.plg")));

  GridFile c;
  c.dtype = DType::c128;
  c.dims = {2, 2};
  c.axis_min = {0, 0};
  c.axis_max = {1, 1};
  c.cplx = {{1, -2}, {3.5, 1e-300}, {-0.0, 4}, {7, 8}};
  write_grid_file(scratch("c.plg").string(), c);
  const GridFile d = read_grid_file(scratch("c.plg").string());
  EXPECT_EQ(d.dtype, DType::c128);
  EXPECT_EQ(std::memcmp(d.cplx.data(), c.cplx.data(), 64), 0);
}

TEST(GridFile, CorruptFilesRejected) {
  GridFile a;
  a.dims = {4};
  a.axis_min = {0};
  a.axis_max = {1};
  a.real = {1, 2, 3, 4};
  const auto p = scratch("t.plg");
  write_grid_file(p.string(), a);
  const std::string full = slurp(p);
  std::ofstream(p, std::ios::binary) << full.substr(0, full.size() - 3);
  EXPECT_THROW(read_grid_file(p.string()), IoError);
  std::ofstream(p, std::ios::binary) << full << "x";
  EXPECT_THROW(read_grid_file(p.string()), IoError);
  std::ofstream(p, std::ios::binary) << "NOPE" << full.substr(4);
  EXPECT_THROW(read_grid_file(p.string()), IoError);
  EXPECT_THROW(read_grid_file(scratch("missing.plg").string()), IoError);
  a.real.pop_back();
  EXPECT_THROW(write_grid_file(p.string(), a), IoError);
}

TEST(Config, EchoRoundTrip) {
  RunConfig c = load_config(repo("configs/vortex.json"));
  EXPECT_EQ(c.slm.l, 1);
  EXPECT_DOUBLE_EQ(c.slm.zernike.at(4), -1.78);
  EXPECT_DOUBLE_EQ(c.beam.dz0, 8.5e-6);
  const RunConfig d = parse_config(config_to_json(c).dump());
  EXPECT_TRUE(c == d);
  EXPECT_EQ(config_to_json(c).dump(), config_to_json(d).dump());
  c.seed = 3;
  EXPECT_FALSE(c == d);
}

TEST(Config, UnknownFieldNamesItsPath) {
  try {
    parse_config(R"({"beam": {"E0_eV": 1000, "Cs_m": 1}})", "x.json");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("beam.Cs_m"), std::string::npos) << e.what();
    EXPECT_EQ(e.code(), ExitCode::config);
  }
}

TEST(Config, SyntaxErrorReportsLine) {
  try {
    parse_config("{\n  \"seed\": 1,\n  \"beam\": {\n    \"E0_eV\": ,\n  }\n}", "bad.json");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("bad.json:4:"), std::string::npos) << e.what();
  }
}

TEST(Config, TypeAndValueErrors) {
  EXPECT_THROW(parse_config(R"({"beam": {"E0_eV": "hot"}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"grids": {"energy_samples": 40}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"slm": {"peak_field_V_per_m": 1e9, "c0_V_per_m": 1e6}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"focus": {"NA": 1.5}})"), ConfigError);
  EXPECT_THROW(load_config(scratch("nope.json").string()), ConfigError);
}

TEST(Cli, ExitCodes) {
  const auto bad = scratch("bad.json");
  std::ofstream(bad) << R"({"beam": {"bogus": 1}})";
  EXPECT_EQ(run_cli("focus -c " + bad.string()), 2);
  EXPECT_EQ(run_cli("focus"), 2);
  EXPECT_EQ(run_cli("pipeline -c " + repo("configs/vortex.json") + " --dry-run"), 0);

  // Phase stack with three energies against a seven-sample config.
  GridFile g;
  g.dims = {3, 5, 5};
  g.axis_min = {999.5, -2.5e-6, -2.5e-6};
  g.axis_max = {1000.5, 2.5e-6, 2.5e-6};
  g.real.assign(75, -1.0);
  const auto ph = scratch("phase3.plg");
  write_grid_file(ph.string(), g);
  const std::string out = scratch("cli_out").string();
  EXPECT_EQ(run_cli("probe -c " + repo("tests/data/tiny.json") + " -i " + ph.string() + " -o " + out), 3);

  const auto junk = scratch("junk.plg");
  std::ofstream(junk) << "not a grid";
  EXPECT_EQ(run_cli("metrics -c " + repo("tests/data/tiny.json") + " -i " + junk.string() + " -o " + out), 5);
  EXPECT_EQ(run_cli("focus -c " + repo("tests/data/tiny.json") + " -o /proc/ponderolens_cannot_write"), 5);
}
