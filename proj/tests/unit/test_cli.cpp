// Copyright 2026 The annulab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "annulab/certificate.hpp"
#include "annulab/cli/run.hpp"
#include "annulab/errors.hpp"
#include "annulab/registry.hpp"

using namespace annulab;
using namespace annulab::cli;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("annulab_test_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream o;
  o << f.rdbuf();
  return o.str();
}

json read_json(const fs::path& p) { return json::parse(slurp(p)); }

RunConfig config(const std::string& command, const char* map, const fs::path& out) {
  RunConfig c;
  c.command = command;
  if (map) c.map = parse_map_arg(map);
  c.out_dir = out;
  return c;
}

int reverify_file(const fs::path& cert) {
  RunConfig c;
  c.command = "reverify";
  c.params["certificate"] = cert.string();
  return run(c).exit_code;
}

// Runs the installed-layout executable and returns its exit status.
int shell(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string("\"") + ANNULAB_EXE + "\" " + args + " > \"" + log.string() +
                          "\" 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("run config round trips through JSON") {
  RunConfig c = config("returning", "RNF:alpha=0.05", "/tmp/x");
  c.params["sign"] = "negative";
  c.seed = 42;
  c.tol = 1e-9;
  const json j = c;
  const RunConfig back = j.get<RunConfig>();
  CHECK(back.command == c.command);
  CHECK(back.map == c.map);
  CHECK(back.params == c.params);
  CHECK(back.out_dir == c.out_dir);
  CHECK(back.seed == 42);
  CHECK(back.tol == c.tol);
}

TEST_CASE("rotation: CSV plus an estimate of 1/4") {
  const fs::path out = scratch("rotation");
  RunConfig c = config("rotation", "RIGID:alpha=0.25", out);
  c.params["point"] = {0.0, 0.5};
  c.params["steps"] = 1000;
  const RunResult r = run(c);
  CHECK(r.exit_code == kExitOk);
  CHECK(fs::exists(out / "rotation.csv"));
  CHECK(fs::exists(out / "run.json"));
  CHECK(std::abs(read_json(out / "rotation.json").at("estimate").get<double>() - 0.25) < 1e-9);
  CHECK(read_json(out / "run.json").get<RunConfig>().command == "rotation");
}

TEST_CASE("horseshoe --verify: certificate with (1, -1) and (5, +1)") {
  const fs::path out = scratch("horseshoe");
  RunConfig c = config("horseshoe", nullptr, out);
  c.params["verify"] = true;
  const RunResult r = run(c);
  CHECK(r.exit_code == kExitOk);
  const json cert = read_json(out / "horseshoe.json");
  const auto& claims = cert.at("payload").at("claims");
  CHECK(claims.at("negative").at("n") == 1);
  CHECK(claims.at("negative").at("k") == -1);
  CHECK(claims.at("positive").at("n") == 5);
  CHECK(claims.at("positive").at("k") == 1);
  CHECK(reverify_file(out / "horseshoe.json") == kExitOk);
}

TEST_CASE("window on the circle billiard: exit 2, unbounded at scale") {
  const fs::path out = scratch("window_billiard");
  RunConfig c = config("window", "billiard-circle", out);
  c.params["grow"] = true;
  c.params["resolution"] = 6;
  const RunResult r = run(c);
  CHECK(r.exit_code == kExitNotFound);
  CHECK(read_json(out / "window_report.json").at("status") == "unbounded-at-scale");
  CHECK_FALSE(fs::exists(out / "window.json"));
}

TEST_CASE("window on DISS_ROT: certificate re-verifies") {
  const fs::path out = scratch("window_diss");
  RunConfig c = config("window", "DISS_ROT", out);
  c.params["resolution"] = 6;
  CHECK(run(c).exit_code == kExitOk);
  CHECK(reverify_file(out / "window.json") == kExitOk);
}

TEST_CASE("returning, fixed and periodic certificates re-verify; tampering fails") {
  const fs::path out = scratch("certs");
  {
    RunConfig c = config("returning", "TH", out);
    c.params["resolution"] = 6;
    c.params["base"] = verify_example_claims().U;
    c.params["chain"] = true;
    CHECK(run(c).exit_code == kExitOk);
  }
  {
    RunConfig c = config("fixed", "PT", out);
    CHECK(run(c).exit_code == kExitOk);
  }
  {
    RunConfig c = config("periodic", "DISS_ROT:alpha=0.3333333333333333", out);
    c.params["p"] = 1;
    c.params["q"] = 3;
    CHECK(run(c).exit_code == kExitOk);
  }
  const std::map<std::string, std::string> points{
      {"returning_positive.json", "/payload/witness/z"},
      {"returning_negative.json", "/payload/witness/image"},
      {"chain.json", "/payload/chain/links/0/z"},
      {"fixed.json", "/payload/records/0/point"},
      {"periodic.json", "/payload/orbits/0/point"}};
  for (const auto& [file, pointer] : points) {
    CHECK_MESSAGE(reverify_file(out / file) == kExitOk, file);
    json t = read_json(out / file);
    auto& v = t.at(json::json_pointer(pointer))[0];
    v = v.get<double>() + 0.05;
    std::ofstream(out / ("tampered_" + file)) << t.dump(2);
    CHECK_MESSAGE(reverify_file(out / ("tampered_" + file)) == kExitError, file);
  }
}

TEST_CASE("not-found results exit 2, errors throw") {
  const fs::path out = scratch("codes");
  CHECK(run(config("fixed", "RNF", out)).exit_code == kExitNotFound);
  CHECK_THROWS_AS(run(config("teapot", "RNF", out)), BadParameter);
  CHECK_THROWS_AS(run(config("rotation", nullptr, out)), BadParameter);
  RunConfig bad = config("rotation", "RIGID", out);
  bad.params["steps"] = "many";
  CHECK_THROWS_AS(run(bad), BadParameter);
  RunConfig missing;
  missing.command = "reverify";
  CHECK_THROWS_AS(run(missing), BadParameter);
  std::ofstream(out / "junk.json") << "{\"kind\": 3}";
  RunConfig junk;
  junk.command = "reverify";
  junk.params["certificate"] = (out / "junk.json").string();
  CHECK_THROWS_AS(run(junk), SchemaError);
}

TEST_CASE("identical configs give byte-identical files") {
  const fs::path out = scratch("determinism");
  for (const char* command : {"returning", "drift", "periodic"}) {
    RunConfig c = config(command, command == std::string("periodic") ? "DISS_ROT" : "RNF", out / command);
    if (c.command == "periodic") {
      c.params["p"] = 0;
      c.params["q"] = 1;
    }
    if (c.command == "drift") c.params["samples"] = 10;
    if (c.command == "returning") c.params["sign"] = "negative";
    const RunResult first = run(c);
    std::map<std::string, std::string> bytes;
    for (const auto& f : first.files) bytes[f] = slurp(c.out_dir / f);
    const RunResult second = run(c);
    CHECK(second.files == first.files);
    for (const auto& f : second.files) CHECK_MESSAGE(slurp(c.out_dir / f) == bytes[f], f);
  }
}

TEST_CASE("the executable: flags, exit codes, reverify") {
  const fs::path out = scratch("exe");
  const std::string o = " --out \"" + out.string() + "\"";
  CHECK(shell("rotation --map RIGID:alpha=0.25 --point 0,0.5 --steps 1000" + o, out / "log1") == 0);
  CHECK(slurp(out / "log1").find("0.25") != std::string::npos);
  CHECK(shell("window --map billiard-circle --grow --resolution 6" + o, out / "log2") == 2);
  CHECK(shell("horseshoe --verify" + o, out / "log3") == 0);
  CHECK(shell("reverify \"" + (out / "horseshoe.json").string() + "\"", out / "log4") == 0);
  CHECK(shell("rotation --map NOPE" + o, out / "log5") == 1);
  CHECK(shell("rotation --no-such-flag" + o, out / "log6") == 1);
  CHECK(shell("fixed --map RNF" + o, out / "log7") == 2);
}
