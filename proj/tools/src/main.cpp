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


#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "annulab/cli/run.hpp"
#include "annulab/errors.hpp"
#include "annulab/registry.hpp"

namespace {

using annulab::cli::RunConfig;
using json = nlohmann::json;

std::vector<double> parse_numbers(const std::string& text, std::size_t expected,
                                  const std::string& what) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) {
      throw annulab::BadParameter(what + ": '" + item + "' is not a number");
    }
    out.push_back(v);
  }
  if (expected && out.size() != expected) {
    throw annulab::BadParameter(what + " expects " + std::to_string(expected) +
                                " comma-separated numbers");
  }
  return out;
}

// circle:R or ellipse:A,B
json parse_table(const std::string& text) {
  const auto colon = text.find(':');
  const std::string kind = text.substr(0, colon);
  const std::string rest = colon == std::string::npos ? "" : text.substr(colon + 1);
  if (kind == "circle") {
    const double r = rest.empty() ? 1.0 : parse_numbers(rest, 1, "--table")[0];
    return {{"kind", "circle"}, {"a", r}, {"b", r}};
  }
  if (kind == "ellipse") {
    const auto ab = parse_numbers(rest, 2, "--table");
    return {{"kind", "ellipse"}, {"a", ab[0]}, {"b", ab[1]}};
  }
  throw annulab::BadParameter("--table must be circle:R or ellipse:A,B");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Annulus dynamics toolkit: lifts, rotation numbers, windows, returning disks, "
               "fixed points and certificates"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string map_arg, out_dir = ".", point, band, table, bumpers_file, base, sign = "both";
  std::vector<std::string> bumper_args;
  std::string certificate;
  int resolution = 0, depth = 0, samples = 0, max_rounds = 0, avoid_resolution = 0;
  long horizon = 0, steps = 0, p = 0, q = 0, kmax = 0;
  double tol = 0.0, theta0 = 0.0, escape = 0.0;
  std::uint64_t seed = 1;
  bool grow = false, verify = false, chain = false, no_fixed_check = false;

  app.add_option("--map", map_arg, "Map: NAME, NAME:key=val,... or variant=NAME,key=val");
  app.add_option("--out", out_dir, "Output directory")->capture_default_str();
  app.add_option("--seed", seed, "Seed for sampled choices")->capture_default_str();
  app.add_option("--tol", tol, "Tolerance override");
  app.add_option("--resolution", resolution, "Box depth (cells of side 2^-d)");
  app.add_option("--horizon", horizon, "Search horizon in iterates");

  auto* rotation = app.add_subcommand("rotation", "Rotation number estimate and CSV of rates");
  rotation->add_option("--point", point, "Start point x,y");
  rotation->add_option("--steps", steps, "Iterates");

  auto window_opts = [&](CLI::App* s) {
    s->add_option("--band", band, "Fiber band lo,hi");
    s->add_flag("--grow", grow, "Grow from the box at the band's middle");
    s->add_option("--max-rounds", max_rounds, "Growth round limit");
  };
  auto* window = app.add_subcommand("window", "Verify or grow a window");
  window_opts(window);
  auto* attractor = app.add_subcommand("attractor", "Box cover of the global attractor");
  window_opts(attractor);
  attractor->add_option("--depth", depth, "Image-intersection rounds");
  auto* recurrence = app.add_subcommand("recurrence", "Chain-recurrent boxes");
  recurrence->add_option("--band", band, "Fiber band lo,hi");
  auto* returning = app.add_subcommand("returning", "Positively/negatively returning disks");
  returning->add_option("--band", band, "Fiber band lo,hi");
  returning->add_option("--sign", sign, "positive, negative or both")
      ->check(CLI::IsMember({"positive", "negative", "both"}));
  returning->add_option("--kmax", kmax, "Largest |k| searched");
  returning->add_option("--base", base, "Restrict to the disk x0,x1,y0,y1");
  returning->add_option("--avoid-resolution", avoid_resolution,
                        "Skip boxes meeting the chain-recurrent set at this depth");
  returning->add_flag("--chain", chain, "Assemble a periodic disk chain from both witnesses");
  auto* fixed = app.add_subcommand("fixed", "Fixed points with indices");
  fixed->add_option("--band", band, "Fiber band lo,hi");
  auto* periodic = app.add_subcommand("periodic", "Periodic points of type p/q");
  periodic->add_option("--band", band, "Fiber band lo,hi");
  periodic->add_option("--p", p, "Translation p")->required();
  periodic->add_option("--q", q, "Period q")->required();
  auto* drift = app.add_subcommand("drift", "Drift classification of sampled orbits");
  window_opts(drift);
  drift->add_option("--samples", samples, "Number of sample points");
  drift->add_option("--steps", steps, "Iterates per sample");
  drift->add_option("--escape", escape, "Tail advance threshold in turns");
  drift->add_flag("--no-fixed-check", no_fixed_check, "Skip the fixed-point search");
  auto* billiard = app.add_subcommand("billiard", "Bumper avoidance on a convex table");
  billiard->add_option("--table", table, "circle:R or ellipse:A,B");
  billiard->add_option("--theta0", theta0, "Initial angle with the wall");
  billiard->add_option("--steps", steps, "Collisions");
  billiard->add_option("--bumpers", bumpers_file, "JSON list of {center, radius}");
  billiard->add_option("--bumper", bumper_args, "Bumper cx,cy,r (repeatable)");
  auto* horseshoe = app.add_subcommand("horseshoe", "Triple horseshoe checks");
  horseshoe->add_flag("--verify", verify, "Verify the returning-disk claims");
  horseshoe->add_option("--depth", depth, "Shift conjugacy word length");
  auto* reverify = app.add_subcommand("reverify", "Replay the checks of a certificate");
  reverify->add_option("certificate", certificate, "Certificate JSON file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : annulab::cli::kExitError;
  }

  RunConfig cfg;
  try {
    cfg.command = app.get_subcommands().front()->get_name();
    if (!map_arg.empty()) cfg.map = annulab::parse_map_arg(map_arg);
    cfg.out_dir = out_dir;
    cfg.seed = seed;
    auto& prm = cfg.params;
    CLI::App* sub = app.get_subcommands().front();
    auto given = [&](const char* flag) {
      const CLI::Option* o = sub->get_option_no_throw(flag);
      return o != nullptr && o->count() > 0;
    };
    if (app.count("--tol")) cfg.tol = tol;
    if (app.count("--resolution")) prm["resolution"] = resolution;
    if (app.count("--horizon")) prm["horizon"] = horizon;
    if (given("--point")) prm["point"] = parse_numbers(point, 2, "--point");
    if (given("--band")) prm["band"] = parse_numbers(band, 2, "--band");
    if (given("--steps")) prm["steps"] = steps;
    if (given("--grow")) prm["grow"] = grow;
    if (given("--max-rounds")) prm["max_rounds"] = max_rounds;
    if (given("--depth")) prm["depth"] = depth;
    if (given("--sign")) prm["sign"] = sign;
    if (given("--kmax")) prm["kmax"] = kmax;
    if (given("--base")) prm["base"] = parse_numbers(base, 4, "--base");
    if (given("--avoid-resolution")) prm["avoid_resolution"] = avoid_resolution;
    if (given("--chain")) prm["chain"] = chain;
    if (given("--p")) prm["p"] = p;
    if (given("--q")) prm["q"] = q;
    if (given("--samples")) prm["samples"] = samples;
    if (given("--escape")) prm["escape"] = escape;
    if (given("--no-fixed-check")) prm["fixed_check"] = false;
    if (given("--table")) prm["table"] = parse_table(table);
    if (given("--theta0")) prm["theta0"] = theta0;
    if (given("--verify")) prm["verify"] = verify;
    if (given("--bumpers") || given("--bumper")) {
      json list = json::array();
      if (!bumpers_file.empty()) {
        std::ifstream f(bumpers_file);
        if (!f) throw annulab::BadParameter("cannot read " + bumpers_file);
        try {
          list = json::parse(f);
        } catch (const json::parse_error& e) {
          throw annulab::SchemaError(std::string("bumper file is not JSON: ") + e.what());
        }
        if (!list.is_array()) throw annulab::SchemaError("bumper file must hold a JSON list");
      }
      for (const auto& b : bumper_args) {
        const auto v = parse_numbers(b, 3, "--bumper");
        list.push_back({{"center", {v[0], v[1]}}, {"radius", v[2]}});
      }
      prm["bumpers"] = list;
    }
    if (!certificate.empty()) prm["certificate"] = certificate;

    const auto result = annulab::cli::run(cfg);
    std::cout << result.summary << '\n';
    for (const auto& f : result.files) std::cout << "  wrote " << (cfg.out_dir / f).string() << '\n';
    return result.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "annulab: " << e.what() << '\n';
    return annulab::cli::kExitError;
  }
}
