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


#include "annulab/cli/run.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>

#include "annulab/billiards.hpp"
#include "annulab/boxdyn.hpp"
#include "annulab/certificate.hpp"
#include "annulab/errors.hpp"
#include "annulab/fixedpoint.hpp"
#include "annulab/horseshoe.hpp"
#include "annulab/registry.hpp"
#include "annulab/rotation.hpp"

namespace annulab::cli {
namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

template <class T>
T param(const RunConfig& c, const char* key, T fallback) {
  const auto it = c.params.find(key);
  if (it == c.params.end() || it->is_null()) return fallback;
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw BadParameter(std::string("parameter '") + key + "' has the wrong type");
  }
}

YBand band_param(const RunConfig& c, YBand fallback) {
  const auto v = param<std::vector<double>>(c, "band", {fallback.lo, fallback.hi});
  if (v.size() != 2 || !(v[0] < v[1]) || v[0] < 0.0 || v[1] > 1.0) {
    throw BadParameter("band must be lo,hi with 0 <= lo < hi <= 1");
  }
  return {v[0], v[1]};
}

LiftMap need_map(const RunConfig& c) {
  if (!c.map) throw BadParameter("command '" + c.command + "' needs --map");
  return build_map(*c.map);
}

class Output {
 public:
  Output(const RunConfig& c, RunResult& r) : dir_(c.out_dir), result_(r) {
    fs::create_directories(dir_);
  }

  void write_json(const std::string& name, const json& j) { write_text(name, j.dump(2) + "\n"); }

  void write_text(const std::string& name, const std::string& text) {
    std::ofstream f(dir_ / name, std::ios::binary);
    f << text;
    if (!f) throw BadParameter("cannot write " + (dir_ / name).string());
    result_.files.push_back(name);
  }

 private:
  fs::path dir_;
  RunResult& result_;
};

std::string boxes_csv(const BoxSet& s) {
  std::ostringstream o;
  o << std::setprecision(17) << "index,col,row,x0,x1,y0,y1\n";
  const BoxGrid& g = s.grid();
  for (auto i : s.indices()) {
    const Box b = g.box(i);
    o << i << ',' << g.col_of(i) << ',' << g.row_of(i) << ',' << b.x0 << ',' << b.x1 << ','
      << b.y0 << ',' << b.y1 << '\n';
  }
  return o.str();
}

std::string fmt(double v) {
  std::ostringstream o;
  o << std::setprecision(10) << v;
  return o.str();
}

struct WindowOutcome {
  WindowReport report;
  std::string status;
  int rounds = 0;
};

// A window from the band of boxes, or grown from the box at the band's
// middle when `grow` is set. The default round limit lets growth that
// gains one row per round reach the fiber ends.
WindowOutcome obtain_window(const LiftMap& m, const RunConfig& c, const GraphOptions& g) {
  const int d = param<int>(c, "resolution", 8);
  const YBand band = band_param(c, {0.25, 0.75});
  const BoxGrid grid(d, {0.0, 1.0});
  WindowOutcome out;
  if (param<bool>(c, "grow", false)) {
    const auto loc = grid.locate({0.5, 0.5 * (band.lo + band.hi)});
    if (!loc) throw BadParameter("seed point lies outside the grid");
    const GrowResult gr =
        grow_window(m, BoxSet(grid, {loc->index}),
                    param<int>(c, "max_rounds", std::max(100, grid.rows())), g);
    out.report = gr.report;
    out.status = to_string(gr.status);
    out.rounds = gr.rounds;
  } else {
    out.report = verify_window(m, band_boxes(grid, band), g);
    out.status = out.report.verified() ? "window" : "unverified";
  }
  return out;
}

json window_status_json(const LiftMap& m, const WindowOutcome& w) {
  json j{{"map", m.spec()},
         {"status", w.status},
         {"rounds", w.rounds},
         {"boxes", w.report.boxes.size()},
         {"forward_invariant", w.report.forward_invariant},
         {"margin", w.report.margin},
         {"verified", w.report.verified()}};
  if (w.report.counterexample) j["counterexample"] = *w.report.counterexample;
  return j;
}

RunResult cmd_rotation(const RunConfig& c) {
  RunResult r;
  Output out(c, r);
  const LiftMap m = need_map(c);
  const auto pt = param<std::vector<double>>(c, "point", {0.0, 0.5});
  if (pt.size() != 2) throw BadParameter("point must be x,y");
  const long steps = param<long>(c, "steps", 1000);
  if (steps < 1) throw BadParameter("steps must be positive");
  const LiftPoint p{pt[0], pt[1]};
  std::ostringstream csv;
  write_rotation_csv(csv, m, p, steps);
  out.write_text("rotation.csv", csv.str());
  const RotationEstimate e = rotation_estimate(m, p, steps, c.tol.value_or(1e-6));
  out.write_json("rotation.json", {{"map", m.spec()},
                                   {"point", p},
                                   {"steps", steps},
                                   {"estimate", e.mean},
                                   {"liminf", e.liminf_est},
                                   {"limsup", e.limsup_est},
                                   {"converged", e.converged}});
  r.summary = "rotation estimate " + fmt(e.mean) + " in [" + fmt(e.liminf_est) + ", " +
              fmt(e.limsup_est) + "]";
  return r;
}

RunResult cmd_window(const RunConfig& c) {
  RunResult r;
  Output out(c, r);
  const LiftMap m = need_map(c);
  const GraphOptions g;
  const WindowOutcome w = obtain_window(m, c, g);
  if (!w.report.verified()) {
    out.write_json("window_report.json", window_status_json(m, w));
    r.exit_code = kExitNotFound;
    r.summary = "no window at this scale: " + w.status;
    return r;
  }
  json payload = window_payload(w.report, g);
  out.write_json("window.json", make_certificate("window", m.spec(), payload));
  out.write_text("window_boxes.csv", boxes_csv(w.report.boxes));
  const auto ann = construct_invariant_annulus(m, w.report, 64, g);
  if (ann) out.write_text("annulus_boxes.csv", boxes_csv(ann->band));
  json report = window_status_json(m, w);
  report["invariant_annulus"] = ann.has_value();
  out.write_json("window_report.json", report);
  r.summary = "window verified: " + std::to_string(w.report.boxes.size()) + " boxes, margin " +
              fmt(w.report.margin) + (ann ? ", invariant annulus found" : "");
  return r;
}

RunResult cmd_attractor(const RunConfig& c) {
  RunResult r;
  Output out(c, r);
  const LiftMap m = need_map(c);
  const GraphOptions g;
  const WindowOutcome w = obtain_window(m, c, g);
  if (!w.report.verified()) {
    out.write_json("window_report.json", window_status_json(m, w));
    r.exit_code = kExitNotFound;
    r.summary = "no window at this scale: " + w.status;
    return r;
  }
  const AttractorReport a = attractor_boxes(m, w.report, param<int>(c, "depth", 10), g);
  out.write_json("attractor.json",
                 make_certificate("attractor", m.spec(), attractor_payload(a, w.report, g)));
  out.write_text("attractor_boxes.csv", boxes_csv(a.boxes));
  r.summary = "attractor cover: " + std::to_string(a.boxes.size()) + " boxes, " +
              std::to_string(a.topology.components) + " component(s), " +
              (a.topology.separates ? "separates" : "does not separate") + " the ends";
  return r;
}

RunResult cmd_recurrence(const RunConfig& c) {
  RunResult r;
  Output out(c, r);
  const LiftMap m = need_map(c);
  const int d = param<int>(c, "resolution", 7);
  const YBand band = band_param(c, {0.0, 1.0});
  const BoxGraph g = build_box_graph(m, BoxGrid(d, band));
  const BoxSet cr = chain_recurrent_boxes(g);
  out.write_json("recurrence.json", {{"map", m.spec()},
                                     {"resolution", d},
                                     {"edges", g.edge_count()},
                                     {"chain_recurrent", box_set_to_json(cr)}});
  out.write_text("recurrence_boxes.csv", boxes_csv(cr));
  r.exit_code = cr.empty() ? kExitNotFound : kExitOk;
  r.summary = "chain-recurrent boxes: " + std::to_string(cr.size()) + " of " +
              std::to_string(g.grid.size());
  return r;
}

RunResult cmd_returning(const RunConfig& c) {
  RunResult r;
  Output out(c, r);
  const LiftMap m = need_map(c);
  const int d = param<int>(c, "resolution", 4);
  const YBand band = band_param(c, {0.0, 1.0});
  const BoxGraph g = build_box_graph(m, BoxGrid(d, band));
  ReturningSearchOptions opts;
  opts.horizon = param<long>(c, "horizon", 64);
  opts.kmax = param<long>(c, "kmax", 8);
  if (c.params.contains("base")) opts.base = c.params.at("base").get<Box>();
  std::optional<BoxSet> cr;
  if (const int ad = param<int>(c, "avoid_resolution", 0); ad > 0) {
    cr = chain_recurrent_boxes(build_box_graph(m, BoxGrid(ad, band)));
    opts.avoid = cr;
  }
  const std::string which = param<std::string>(c, "sign", "both");
  if (which != "both" && which != "positive" && which != "negative") {
    throw BadParameter("sign must be positive, negative or both");
  }
  std::optional<ReturningWitness> found[2];
  std::vector<std::string> notes;
  for (const Sign s : {Sign::negative, Sign::positive}) {
    if (which != "both" && which != to_string(s)) continue;
    auto w = find_returning_disk(m, g, s, opts);
    const std::string name = to_string(s);
    if (!w) {
      notes.push_back("no " + name + " witness");
      r.exit_code = kExitNotFound;
      continue;
    }
    out.write_json("returning_" + name + ".json",
                   make_certificate("returning", m.spec(), returning_payload(*w, cr)));
    notes.push_back(name + " witness n=" + std::to_string(w->n) + " k=" + std::to_string(w->k));
    found[s == Sign::positive ? 1 : 0] = std::move(w);
  }
  if (param<bool>(c, "chain", false)) {
    if (found[0] && found[1]) {
      try {
        const DiskChain ch = assemble_periodic_chain(m, *found[1], *found[0]);
        out.write_json("chain.json", make_certificate("chain", m.spec(), chain_payload(ch)));
        notes.push_back("periodic chain of " + std::to_string(ch.offsets.size()) + " disks");
      } catch (const LinkVerificationFailed& e) {
        notes.push_back(std::string("chain not assembled: ") + e.what());
        r.exit_code = kExitNotFound;
      }
    } else {
      notes.push_back("chain needs witnesses of both signs");
      r.exit_code = kExitNotFound;
    }
  }
  for (std::size_t i = 0; i < notes.size(); ++i) r.summary += (i ? "; " : "") + notes[i];
  return r;
}

FixedPointOptions fixed_options(const RunConfig& c) {
  FixedPointOptions o;
  o.region = band_param(c, o.region);
  o.max_depth = param<int>(c, "resolution", o.max_depth);
  if (c.tol) o.tol = *c.tol;
  return o;
}

RunResult cmd_fixed(const RunConfig& c) {
  RunResult r;
  Output out(c, r);
  const LiftMap m = need_map(c);
  const FixedPointOptions o = fixed_options(c);
  const FixedPointSearch s = find_fixed_points(m, o);
  out.write_json("fixed.json", make_certificate("fixed", m.spec(), fixed_payload(m, s, o)));
  std::ostringstream csv;
  csv << std::setprecision(17) << "x,y,index,residual\n";
  for (const auto& p : s.points) {
    csv << p.point.x << ',' << p.point.y << ',' << p.index << ',' << p.residual << '\n';
  }
  out.write_text("fixed_points.csv", csv.str());
  r.exit_code = s.empty() ? kExitNotFound : kExitOk;
  r.summary = std::to_string(s.points.size()) + " fixed point(s), " +
              std::to_string(s.curves.size()) + " fixed curve(s), min displacement " +
              fmt(s.min_displacement);
  return r;
}

RunResult cmd_periodic(const RunConfig& c) {
  RunResult r;
  Output out(c, r);
  const LiftMap m = need_map(c);
  const long p = param<long>(c, "p", 0);
  const long q = param<long>(c, "q", 1);
  const FixedPointOptions o = fixed_options(c);
  const PeriodicSearch s = find_periodic_orbit(m, p, q, o);
  out.write_json("periodic.json",
                 make_certificate("periodic", m.spec(), periodic_payload(m, s, p, q, o)));
  std::ostringstream csv;
  csv << std::setprecision(17) << "x,y,index,residual,on_curve,rotation_consistent\n";
  for (const auto& rec : s.orbits) {
    csv << rec.point.x << ',' << rec.point.y << ',' << rec.index << ',' << rec.residual << ','
        << rec.on_curve << ',' << rec.rotation_consistent << '\n';
  }
  out.write_text("periodic_points.csv", csv.str());
  r.exit_code = s.orbits.empty() ? kExitNotFound : kExitOk;
  r.summary = std::to_string(s.orbits.size()) + " periodic point(s) of type " +
              std::to_string(p) + "/" + std::to_string(q);
  return r;
}

RunResult cmd_drift(const RunConfig& c) {
  RunResult r;
  Output out(c, r);
  const LiftMap m = need_map(c);
  const WindowOutcome w = obtain_window(m, c, GraphOptions{});
  DriftOptions o;
  o.N = param<long>(c, "steps", o.N);
  o.escape = param<double>(c, "escape", o.escape);
  if (c.tol) o.tol = *c.tol;
  if (param<bool>(c, "fixed_check", true)) o.fix_empty = find_fixed_points(m).empty();
  const int count = param<int>(c, "samples", 50);
  if (count < 1) throw BadParameter("samples must be positive");
  const YBand band = band_param(c, {0.25, 0.75});
  std::mt19937_64 rng(c.seed);
  std::uniform_real_distribution<double> ux(0.0, 1.0), uy(band.lo, band.hi);
  std::vector<LiftPoint> pts;
  for (int i = 0; i < count; ++i) {
    const double x = ux(rng);
    pts.push_back({x, uy(rng)});
  }
  const DriftClass d = drift_classification(m, pts, w.report, o);
  out.write_json("drift.json", make_certificate("drift", m.spec(), drift_payload(d, o, w.report)));
  std::ostringstream csv;
  csv << std::setprecision(17) << "x0,y0,tag,xN,yN,tail_advance\n";
  for (const auto& s : d.samples) {
    csv << s.start.x << ',' << s.start.y << ',' << to_string(s.tag) << ',' << s.end.x << ','
        << s.end.y << ',' << s.tail_advance << '\n';
  }
  out.write_text("drift.csv", csv.str());
  r.exit_code = d.verdict == DriftVerdict::inconclusive ? kExitNotFound : kExitOk;
  r.summary = std::string("drift verdict: ") + to_string(d.verdict);
  return r;
}

TableSpec table_param(const RunConfig& c) {
  if (!c.params.contains("table")) return TableSpec::circle(1.0);
  return c.params.at("table").get<TableSpec>();
}

RunResult cmd_billiard(const RunConfig& c) {
  RunResult r;
  Output out(c, r);
  const TableSpec table = table_param(c);
  table.validate();
  std::vector<Bumper> bumpers;
  if (c.params.contains("bumpers")) {
    try {
      bumpers = c.params.at("bumpers").get<std::vector<Bumper>>();
    } catch (const json::exception& e) {
      throw SchemaError(std::string("malformed bumper list: ") + e.what());
    }
  }
  const int steps = param<int>(c, "steps", 10000);
  const std::vector<double> grid{param<double>(c, "theta0", 0.05)};
  const auto cert = bumper_avoidance_search(table, bumpers, grid, steps);
  if (!cert) {
    out.write_json("billiard_report.json",
                   {{"table", table}, {"bumpers", bumpers}, {"steps", steps}, {"found", false}});
    r.exit_code = kExitNotFound;
    r.summary = "no bumper-free trajectory for the requested angle";
    return r;
  }
  out.write_json("billiard.json", make_certificate("billiard", billiard_spec(table),
                                                   billiard_payload(table, bumpers, *cert)));
  std::ostringstream csv;
  csv << std::setprecision(17) << "step,min_distance\n";
  for (std::size_t i = 0; i < cert->min_distance.size(); ++i) {
    csv << i << ',' << cert->min_distance[i] << '\n';
  }
  out.write_text("billiard_clearance.csv", csv.str());
  r.summary = "bumper-free for " + std::to_string(cert->steps) + " steps, clearance " +
              fmt(cert->overall_min);
  return r;
}

RunResult cmd_horseshoe(const RunConfig& c) {
  RunResult r;
  Output out(c, r);
  const HorseshoeSpec hs;
  const ConjugacyReport cj = shift_conjugacy_check(hs, param<int>(c, "depth", 8));
  out.write_json("horseshoe_spec.json", {{"spec", hs},
                                         {"map", hs.map_spec()},
                                         {"conjugacy",
                                          {{"depth", cj.depth},
                                           {"words_checked", cj.words_checked},
                                           {"mismatches", cj.mismatches}}}});
  r.summary = "shift conjugacy: " + std::to_string(cj.words_checked) + " words, " +
              std::to_string(cj.mismatches) + " mismatches";
  if (cj.mismatches) r.exit_code = kExitError;
  if (param<bool>(c, "verify", false)) {
    const HorseshoeClaims claims = verify_example_claims(hs);
    out.write_json("horseshoe.json",
                   make_certificate("horseshoe", hs.map_spec(), horseshoe_payload(claims)));
    r.summary += "; claims verified: negative (n=" + std::to_string(claims.negative.n) +
                 ", k=" + std::to_string(claims.negative.k) + "), positive (n=" +
                 std::to_string(claims.positive.n) + ", k=" + std::to_string(claims.positive.k) +
                 "), no positive return with n < " +
                 std::to_string(claims.minimality.min_positive_n);
  }
  return r;
}

RunResult cmd_reverify(const RunConfig& c) {
  RunResult r;
  const auto path = param<std::string>(c, "certificate", "");
  if (path.empty()) throw BadParameter("reverify needs a certificate file");
  std::ifstream f(path);
  if (!f) throw BadParameter("cannot read " + path);
  json doc;
  try {
    doc = json::parse(f);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("not JSON: ") + e.what());
  }
  const ReverifyResult v = reverify(doc);
  r.exit_code = v.ok ? kExitOk : kExitError;
  r.summary = v.kind + " certificate " + (v.ok ? "passes" : "FAILS");
  for (const auto& why : v.failures) r.summary += "\n  " + why;
  return r;
}

using Handler = RunResult (*)(const RunConfig&);

const std::vector<std::pair<std::string, Handler>>& handlers() {
  static const std::vector<std::pair<std::string, Handler>> h{
      {"rotation", cmd_rotation},     {"window", cmd_window},     {"attractor", cmd_attractor},
      {"recurrence", cmd_recurrence}, {"returning", cmd_returning}, {"fixed", cmd_fixed},
      {"periodic", cmd_periodic},     {"drift", cmd_drift},       {"billiard", cmd_billiard},
      {"horseshoe", cmd_horseshoe},   {"reverify", cmd_reverify}};
  return h;
}

}  // namespace

void to_json(json& j, const RunConfig& c) {
  j = json{{"command", c.command},
           {"map", c.map ? json(*c.map) : json(nullptr)},
           {"params", c.params},
           {"out_dir", c.out_dir.generic_string()},
           {"seed", c.seed},
           {"tol", c.tol ? json(*c.tol) : json(nullptr)}};
}

void from_json(const json& j, RunConfig& c) {
  try {
    c.command = j.at("command").get<std::string>();
    c.map.reset();
    if (j.contains("map") && !j.at("map").is_null()) c.map = j.at("map").get<MapSpec>();
    c.params = j.value("params", json::object());
    c.out_dir = j.value("out_dir", std::string("."));
    c.seed = j.value("seed", std::uint64_t{1});
    c.tol.reset();
    if (j.contains("tol") && !j.at("tol").is_null()) c.tol = j.at("tol").get<double>();
  } catch (const json::exception& e) {
    throw SchemaError(std::string("malformed run config: ") + e.what());
  }
}

std::vector<std::string> command_names() {
  std::vector<std::string> names;
  for (const auto& [name, fn] : handlers()) names.push_back(name);
  return names;
}

RunResult run(const RunConfig& config) {
  const auto& h = handlers();
  const auto it = std::find_if(h.begin(), h.end(),
                               [&](const auto& e) { return e.first == config.command; });
  if (it == h.end()) throw BadParameter("unknown command '" + config.command + "'");
  RunResult r = it->second(config);
  if (config.command != "reverify") {
    std::ofstream f(config.out_dir / "run.json", std::ios::binary);
    f << json(config).dump(2) << '\n';
    r.files.push_back("run.json");
  }
  return r;
}

}  // namespace annulab::cli
