#include <filesystem>
#include <fstream>
#include <sstream>

#include <doctest.h>
#include <json.hpp>

#include "blowup_lab/cli.hpp"

using nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = blowup_lab::dispatch(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("no arguments prints usage") {
  const auto r = run({});
  CHECK(r.code == 2);
  CHECK(r.out.find("bernstein") != std::string::npos);
}

TEST_CASE("version") {
  const auto r = run({"--version"});
  CHECK(r.code == 0);
  CHECK(r.out.find(blowup_lab::kToolVersion) != std::string::npos);
}

TEST_CASE("bernstein check") {
  const auto r = run({"bernstein", "check", "--phi", "gamma"});
  REQUIRE(r.code == 0);
  const auto j = json::parse(r.out);
  CHECK(j.at("grow") == "fails");
  CHECK(j.at("a2") == "holds");
}

TEST_CASE("unknown ids exit 2 with the catalog") {
  const auto r = run({"bernstein", "check", "--phi", "levy"});
  CHECK(r.code == 2);
  CHECK(r.err.find("stable") != std::string::npos);
  CHECK(run({"bernstein", "check", "--bogus"}).code == 2);
}

TEST_CASE("blowup identity") {
  const auto r = run({"blowup", "identity", "--phi", "drift", "--eps", "3"});
  REQUIRE(r.code == 0);
  const auto j = json::parse(r.out);
  CHECK(j.at("lhs").get<double>() == doctest::Approx(0.25).epsilon(1e-10));
  CHECK(j.at("consistent").get<bool>());
  const auto div = json::parse(run({"blowup", "identity", "--phi", "drift", "--eps", "1"}).out);
  CHECK(div.at("lhs") == "divergent");
}

TEST_CASE("blowup report ineligible mode") {
  const auto r = run({"blowup", "report", "--mode", "white_lower_bounded", "--phi", "stable:0.6",
                      "--kappa", "1"});
  CHECK(r.code == 2);
  CHECK(r.err.find("Assumption 2") != std::string::npos);
}

TEST_CASE("kernel eval and verify") {
  const auto r = run({"kernel", "eval", "--phi", "drift", "--t", "1", "--x", "0"});
  REQUIRE(r.code == 0);
  CHECK(json::parse(r.out).at("value").get<double>() ==
        doctest::Approx(1.0 / std::sqrt(4.0 * 3.141592653589793)).epsilon(1e-7));
  CHECK(run({"kernel", "verify", "--phi", "stable:1.5", "--t", "1"}).code == 0);
}

TEST_CASE("noise dalang") {
  const auto r = run({"noise", "dalang", "--phi", "stable:1.5", "--kernel", "riesz:0.8"});
  REQUIRE(r.code == 0);
  const auto j = json::parse(r.out);
  CHECK(j.at("finite").get<bool>());
  CHECK(j.at("K_Rf").at("value").get<double>() == doctest::Approx(std::pow(2.0, -0.8)).epsilon(1e-6));
}

TEST_CASE("output is deterministic") {
  const std::vector<std::string> args{"subord", "check", "--phi", "gamma", "--n", "2000"};
  CHECK(run(args).out == run(args).out);
}

TEST_CASE("simulate writes moments and a manifest") {
  const auto dir = std::filesystem::temp_directory_path() / "blowup_lab_cli_test";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  const auto cfg = dir / "config.json";
  std::ofstream(cfg) << R"({"phi": "stable:1.5", "cells": 32, "dt": 0.01, "t_end": 0.1,
    "paths": 20, "seed": 5, "sigma": {"kind": "power", "gamma": 0.5},
    "u0": {"kind": "constant", "kappa": 1.0},
    "probes": {"points": [[0.0], [0.5]], "pairs": [[0, 1]]}})";
  const auto a = run({"simulate", "--config", cfg.string(), "--out", (dir / "a").string()});
  REQUIRE(a.code == 0);
  const auto b = run({"simulate", "--config", cfg.string(), "--out", (dir / "b").string()});
  REQUIRE(b.code == 0);
  const auto csv = slurp(dir / "a" / "moments.csv");
  CHECK(csv.rfind("time,probe_id,moment,stderr,escape_fraction", 0) == 0);
  CHECK(csv.find("cross:0") != std::string::npos);
  CHECK(csv == slurp(dir / "b" / "moments.csv"));
  const auto manifest = json::parse(slurp(dir / "a" / "manifest.json"));
  CHECK(manifest.at("seed") == 5);
  CHECK(manifest.at("config_digest") == json::parse(a.out).at("config_digest"));

  std::ofstream(dir / "bad.json") << R"({"phi": "gamma", "typo": 1})";
  const auto bad = run({"simulate", "--config", (dir / "bad.json").string(), "--out",
                        (dir / "c").string()});
  CHECK(bad.code == 2);
  CHECK(bad.err.find("typo") != std::string::npos);
  std::filesystem::remove_all(dir);
}
