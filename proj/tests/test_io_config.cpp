#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "ivri/config.hpp"
#include "ivri/io.hpp"
#include "ivri/trajectory.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch_dir() {
  const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
  const fs::path dir = fs::temp_directory_path() / "ivri_test_io" / (std::string(info->test_suite_name()) + "_" + info->name());
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  for (std::string l; std::getline(is, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST(Hash, FnvTestVectors) {
  EXPECT_EQ(ivri::io::fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(ivri::io::fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(ivri::io::fnv1a64("foobar"), 0x85944171f73967e8ULL);
  EXPECT_EQ(ivri::io::hex64(0xabcULL), "0000000000000abc");
}

TEST(Format, SeventeenDigitsRoundTrip) {
  for (double v : {0.1, 1.0 / 3.0, -12.56, 1e-300, 6.02214076e23, 0.0}) {
    const std::string s = ivri::io::format_double(v);
    EXPECT_EQ(std::strtod(s.c_str(), nullptr), v) << s;
  }
  EXPECT_EQ(ivri::io::format_double(0.1), "0.10000000000000001");
}

TEST(Csv, CommentHeaderRows) {
  const auto dir = scratch_dir();
  {
    ivri::io::CsvWriter w(dir / "a.csv", "00000000deadbeef", {"x", "y"});
    w.row({1.0, 0.5});
    w.row({2.0, 1.0 / 3.0});
    EXPECT_THROW(w.row({1.0}), ivri::DomainError);
  }
  const auto l = lines(slurp(dir / "a.csv"));
  ASSERT_EQ(l.size(), 4u);
  EXPECT_EQ(l[0], "# config-hash=00000000deadbeef");
  EXPECT_EQ(l[1], "x,y");
  EXPECT_EQ(l[2], "1,0.5");
  EXPECT_EQ(l[3], "2,0.33333333333333331");
  EXPECT_THROW(ivri::io::CsvWriter(dir / "no" / "such" / "b.csv", "0", {"x"}), ivri::DomainError);
}

TEST(Csv, Trajectory) {
  const auto dir = scratch_dir();
  ivri::Trajectory t(2);
  t.push_back(0.0, std::vector<double>{1.0, 2.0});
  t.push_back(0.25, std::vector<double>{3.0, -4.5});
  ivri::io::write_trajectory_csv(dir / "t.csv", t, {"v", "xi"}, "abc");
  const auto l = lines(slurp(dir / "t.csv"));
  ASSERT_EQ(l.size(), 4u);
  EXPECT_EQ(l[1], "t,v,xi");
  EXPECT_EQ(l[3], "0.25,3,-4.5");
  EXPECT_THROW(ivri::io::write_trajectory_csv(dir / "u.csv", t, {"v"}, "abc"), ivri::DomainError);
}

TEST(Binary, RoundTripAndLayout) {
  const auto dir = scratch_dir();
  ivri::Trajectory t(3);
  for (int i = 0; i < 5; ++i) t.push_back(0.1 * i, std::vector<double>{std::sin(i), 1.0 / (i + 1), -i * 1e-300});
  ivri::io::write_trajectory_binary(dir / "t.bin", t);
  const std::string raw = slurp(dir / "t.bin");
  ASSERT_EQ(raw.size(), 4u + 4u + 8u + 5u * 4u * 8u);
  EXPECT_EQ(raw.substr(0, 4), "IVRI");
  EXPECT_EQ(static_cast<unsigned char>(raw[4]), 3u);  // u32 m, little-endian
  EXPECT_EQ(raw[5], 0);
  EXPECT_EQ(static_cast<unsigned char>(raw[8]), 5u);  // u64 count
  const auto back = ivri::io::read_trajectory_binary(dir / "t.bin");
  EXPECT_EQ(back.dimension(), 3u);
  EXPECT_EQ(back.times(), t.times());
  EXPECT_EQ(back.data(), t.data());

  std::ofstream(dir / "bad.bin", std::ios::binary) << "NOPE";
  EXPECT_THROW(ivri::io::read_trajectory_binary(dir / "bad.bin"), ivri::DomainError);
  std::ofstream(dir / "short.bin", std::ios::binary) << raw.substr(0, raw.size() - 3);
  EXPECT_THROW(ivri::io::read_trajectory_binary(dir / "short.bin"), ivri::DomainError);
}

TEST(Config, Defaults) {
  const ivri::RunConfig c;
  EXPECT_EQ(c.noise.kind, "ou");
  EXPECT_EQ(c.noise.tau, 1.0);
  EXPECT_EQ(c.noise.gamma, 0.5);
  EXPECT_EQ(c.integrator.dt_ode, 0.01);
  EXPECT_EQ(c.integrator.dt_sde, 1e-3);
  EXPECT_EQ(c.threads, 1u);
  EXPECT_EQ(c.model.g_na, 120.0);
}

TEST(Config, MergeOverridesOnlyPresentKeys) {
  auto c = ivri::RunConfig::from_json(json::parse(R"({"noise": {"gamma": 0.2, "signal": {"type": "sinusoid", "amplitude": 3, "period": 12}}, "seed": 9})"));
  EXPECT_EQ(c.noise.gamma, 0.2);
  EXPECT_EQ(c.noise.tau, 1.0);
  EXPECT_EQ(c.seed, 9u);
  const auto n = c.noise.build(10.0);
  EXPECT_EQ(n.signal.label, "sinusoid");
  EXPECT_NEAR(n.signal(3.0), 3.0, 1e-12);
  c.merge(json::parse(R"({"integrator": {"dt_sde": 0.002}})"));
  EXPECT_EQ(c.integrator.dt_sde, 0.002);
  EXPECT_EQ(c.noise.gamma, 0.2);
}

TEST(Config, RoundTripThroughJson) {
  auto c = ivri::RunConfig::from_json(json::parse(R"({"noise": {"kind": "cir", "shift": 4}, "threads": 3, "out": "x"})"));
  const auto d = ivri::RunConfig::from_json(c.to_json());
  EXPECT_EQ(d.to_json().dump(), c.to_json().dump());
  EXPECT_EQ(d.noise.kind, "cir");
  EXPECT_EQ(d.threads, 3u);
}

TEST(Config, RejectsUnknownKeys) {
  EXPECT_THROW(ivri::RunConfig::from_json(json::parse(R"({"sed": 1})")), ivri::DomainError);
  EXPECT_THROW(ivri::RunConfig::from_json(json::parse(R"({"model": {"gna": 1}})")), ivri::DomainError);
  EXPECT_THROW(ivri::RunConfig::from_json(json::parse(R"({"noise": {"signal": {"freq": 1}}})")), ivri::DomainError);
  try {
    ivri::RunConfig::from_json(json::parse(R"({"noise": {"sigma": 1}})"));
    FAIL();
  } catch (const ivri::DomainError& e) {
    EXPECT_NE(std::string(e.what()).find("noise.sigma"), std::string::npos);
  }
}

TEST(Config, RejectsBadValues) {
  EXPECT_THROW(ivri::RunConfig::from_json(json::parse(R"({"seed": "x"})")), ivri::DomainError);
  EXPECT_THROW(ivri::RunConfig::from_json(json::parse(R"({"threads": 0})")), ivri::DomainError);
  EXPECT_THROW(ivri::RunConfig::from_json(json::parse(R"({"integrator": {"dt_ode": 0}})")), ivri::DomainError);
  EXPECT_THROW(ivri::RunConfig::from_json(json::parse(R"({"model": {"g_k": -1}})")), ivri::DomainError);
  EXPECT_THROW(ivri::RunConfig::from_json(json::parse(R"([1, 2])")), ivri::DomainError);
  const auto bad_kind = ivri::RunConfig::from_json(json::parse(R"({"noise": {"kind": "gbm"}})"));
  EXPECT_THROW(bad_kind.noise.build(1.0), ivri::DomainError);
  const auto bad_signal = ivri::RunConfig::from_json(json::parse(R"({"noise": {"signal": {"type": "square"}}})"));
  EXPECT_THROW(bad_signal.noise.build(1.0), ivri::DomainError);
  // CIR shift must exceed gamma^2/2 + sup|S|
  const auto cir = ivri::RunConfig::from_json(json::parse(R"({"noise": {"kind": "cir", "shift": 0.1}})"));
  EXPECT_THROW(cir.noise.build(1.0), ivri::DomainError);
}

TEST(Config, LoadFromFile) {
  const auto dir = scratch_dir();
  std::ofstream(dir / "c.json") << R"({"seed": 5, "noise": {"tau": 2}})";
  const auto c = ivri::RunConfig::load(dir / "c.json");
  EXPECT_EQ(c.seed, 5u);
  EXPECT_EQ(c.noise.tau, 2.0);
  std::ofstream(dir / "broken.json") << "{seed: 5";
  EXPECT_THROW(ivri::RunConfig::load(dir / "broken.json"), ivri::DomainError);
  EXPECT_THROW(ivri::RunConfig::load(dir / "missing.json"), ivri::DomainError);
}
