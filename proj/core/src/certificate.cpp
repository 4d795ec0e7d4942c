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

#include "annulab/certificate.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "annulab/errors.hpp"
#include "annulab/registry.hpp"

namespace annulab {
namespace {

using json = nlohmann::json;

json graph_options_json(const GraphOptions& o) {
  return json{{"inflation", o.inflation},
              {"samples_per_side", o.samples_per_side},
              {"adaptive", o.adaptive}};
}

GraphOptions graph_options_from(const json& j) {
  GraphOptions o;
  o.inflation = j.at("inflation").get<double>();
  o.samples_per_side = j.at("samples_per_side").get<int>();
  o.adaptive = j.at("adaptive").get<bool>();
  return o;
}

std::vector<std::string> checks_for(const std::string& kind) {
  if (kind == "returning") {
    return {"z in U", "f^n(z) recomputes to image", "image in U + k", "sign of k",
            "f(U) misses U", "U misses the recorded chain-recurrent set when claimed"};
  }
  if (kind == "chain") {
    return {"f(U) misses U", "translates disjoint", "each link recomputes and lands in next disk"};
  }
  if (kind == "fixed" || kind == "periodic") {
    return {"point in cell", "image recomputes", "residual below tol", "index recomputes",
            "index cells disjoint"};
  }
  if (kind == "window") return {"inflated sampled images inside W with positive margin"};
  if (kind == "attractor") return {"window verifies", "attractor cover recomputes", "topology"};
  if (kind == "drift") return {"window verifies", "tags recompute"};
  if (kind == "billiard") return {"chords recompute and avoid every bumper"};
  if (kind == "horseshoe") {
    return {"(1, -1) witness", "(5, +1) witness", "no positive return below 5",
            "small-disk (7, +1) witness"};
  }
  return {};
}

struct Ctx {
  ReverifyResult& res;
  void fail(const std::string& why) {
    res.ok = false;
    res.failures.push_back(why);
  }
};

std::string describe_mismatch(const MapSpec& a, const MapSpec& b) {
  std::ostringstream os;
  os << "map mismatch between certificate and reverify block:";
  if (a.name != b.name) os << " name " << a.name << " vs " << b.name << ";";
  for (const auto& [k, v] : a.params) {
    if (!b.has(k)) {
      os << ' ' << k << " missing;";
    } else if (b.param(k) != v) {
      os << ' ' << k << ' ' << v << " vs " << b.param(k) << ';';
    }
  }
  for (const auto& [k, v] : b.params) {
    if (!a.has(k)) os << ' ' << k << " extra;";
  }
  if (!(a.chart == b.chart)) os << " chart differs;";
  return os.str();
}

json point_record(const LiftMap& m, const LiftPoint& z) {
  const LiftPoint img = m(z);
  return json{{"point", z}, {"image", img}, {"residual", norm(img - z)}};
}

void check_point_record(const LiftMap& m, const json& r, double tol, const std::string& tag,
                        Ctx& ctx, const Box* cell) {
  const auto z = r.at("point").get<LiftPoint>();
  const auto image = r.at("image").get<LiftPoint>();
  const double residual = r.at("residual").get<double>();
  if (cell && !cell->contains(z)) ctx.fail(tag + ": point outside its cell");
  LiftPoint img;
  try {
    img = m(z);
  } catch (const Error& e) {
    ctx.fail(tag + ": " + e.what());
    return;
  }
  if (!(norm(img - image) <= m.tolerance())) ctx.fail(tag + ": image does not recompute");
  const double rr = norm(img - z);
  if (!(rr < tol)) ctx.fail(tag + ": residual above tolerance");
  if (!(std::abs(rr - residual) <= m.tolerance())) ctx.fail(tag + ": residual does not recompute");
}

void check_fixed_like(const LiftMap& m, const json& payload, const std::string& list, Ctx& ctx) {
  const double tol = payload.at("tol").get<double>();
  std::vector<FixedPointRecord> records;
  std::size_t i = 0;
  for (const auto& r : payload.at(list)) {
    const std::string tag = list + "[" + std::to_string(i++) + "]";
    const Box cell = r.at("cell").get<Box>();
    check_point_record(m, r, tol, tag, ctx, &cell);
    if (r.value("on_curve", false)) continue;
    const int index = r.at("index").get<int>();
    try {
      if (fixed_point_index(m, cell) != index) ctx.fail(tag + ": index does not recompute");
    } catch (const Error& e) {
      ctx.fail(tag + ": " + e.what());
    }
    records.push_back({r.at("point").get<LiftPoint>(), index, r.at("residual").get<double>(), cell});
  }
  try {
    lefschetz_sum(records, YBand{-1.0, 2.0});
  } catch (const OverlapError& e) {
    ctx.fail(e.what());
  }
  if (payload.contains("curves")) {
    std::size_t c = 0;
    for (const auto& curve : payload.at("curves")) {
      std::size_t k = 0;
      for (const auto& r : curve.at("points")) {
        check_point_record(m, r, tol, "curves[" + std::to_string(c) + "].points[" +
                                          std::to_string(k++) + "]",
                           ctx, nullptr);
      }
      ++c;
    }
  }
}

}  // namespace

json make_certificate(const std::string& kind, const MapSpec& map, json payload) {
  return json{{"kind", kind},
              {"tool", kToolName},
              {"version", kToolVersion},
              {"map", map},
              {"payload", std::move(payload)},
              {"reverify", {{"map", map}, {"checks", checks_for(kind)}}}};
}

json returning_payload(const ReturningWitness& w, const std::optional<BoxSet>& chain_recurrent) {
  json j{{"witness", w}};
  if (chain_recurrent) {
    j["chain_recurrent"] = box_set_to_json(*chain_recurrent);
    j["disjoint_from_chain_recurrent"] = !chain_recurrent->meets(w.U);
  }
  return j;
}

json chain_payload(const DiskChain& c) { return json{{"chain", c}}; }

json fixed_payload(const LiftMap& m, const FixedPointSearch& s, const FixedPointOptions& opts) {
  json records = json::array();
  for (const auto& r : s.points) {
    json e = point_record(m, r.point);
    e["cell"] = r.cell;
    e["index"] = r.index;
    records.push_back(std::move(e));
  }
  json curves = json::array();
  for (const auto& c : s.curves) {
    json pts = json::array();
    for (const auto& p : c.points) pts.push_back(point_record(m, p));
    curves.push_back({{"cells", c.cells}, {"points", pts}});
  }
  int lsum = 0;
  for (const auto& r : s.points) lsum += r.index;
  return json{{"tol", opts.tol},
              {"region", {opts.region.lo, opts.region.hi}},
              {"max_depth", opts.max_depth},
              {"min_displacement", s.min_displacement},
              {"records", records},
              {"curves", curves},
              {"index_sum", lsum}};
}

json periodic_payload(const LiftMap& m, const PeriodicSearch& s, long p, long q,
                      const FixedPointOptions& opts) {
  const LiftMap g = return_map(m, p, q);
  json orbits = json::array();
  for (const auto& r : s.orbits) {
    json e = point_record(g, r.point);
    e["cell"] = r.cell;
    e["index"] = r.index;
    e["on_curve"] = r.on_curve;
    e["rotation_consistent"] = r.rotation_consistent;
    orbits.push_back(std::move(e));
  }
  return json{{"p", p},
              {"q", q},
              {"tol", opts.tol},
              {"region", {opts.region.lo, opts.region.hi}},
              {"max_depth", opts.max_depth},
              {"min_displacement", s.min_displacement},
              {"orbits", orbits}};
}

json window_payload(const WindowReport& w, const GraphOptions& opts) {
  return json{{"boxes", box_set_to_json(w.boxes)},
              {"options", graph_options_json(opts)},
              {"verified", w.verified()},
              {"margin", w.margin},
              {"components", w.topology.components},
              {"separates", w.topology.separates}};
}

json attractor_payload(const AttractorReport& a, const WindowReport& w, const GraphOptions& opts) {
  return json{{"window", box_set_to_json(w.boxes)},
              {"attractor", box_set_to_json(a.boxes)},
              {"depth", a.depth},
              {"options", graph_options_json(opts)},
              {"connected", a.topology.connected},
              {"separates", a.topology.separates},
              {"forward_invariant", a.forward_invariant}};
}

json drift_payload(const DriftClass& d, const DriftOptions& opts, const WindowReport& w) {
  json samples = json::array();
  for (const auto& s : d.samples) {
    samples.push_back({{"start", s.start}, {"tag", to_string(s.tag)}, {"end", s.end}});
  }
  json j{{"N", opts.N},
         {"escape", opts.escape},
         {"tol", opts.tol},
         {"window", box_set_to_json(w.boxes)},
         {"samples", samples},
         {"verdict", to_string(d.verdict)},
         {"same_sign_clause_holds", d.same_sign_clause_holds}};
  if (opts.fix_empty) j["fix_empty"] = *opts.fix_empty;
  return j;
}

json billiard_payload(const TableSpec& table, std::span<const Bumper> bumpers,
                      const AvoidanceCertificate& cert) {
  return json{{"table", table},
              {"bumpers", std::vector<Bumper>(bumpers.begin(), bumpers.end())},
              {"initial", {{"s", cert.initial.s}, {"theta", cert.initial.theta}}},
              {"steps", cert.steps},
              {"min_distance", cert.min_distance},
              {"overall_min", cert.overall_min}};
}

json horseshoe_payload(const HorseshoeClaims& c) { return json{{"claims", c}}; }

ReverifyResult reverify(const json& cert) {
  ReverifyResult res;
  Ctx ctx{res};
  MapSpec spec;
  try {
    res.kind = cert.at("kind").get<std::string>();
    if (cert.at("tool").get<std::string>() != kToolName) throw SchemaError("not an annulab certificate");
    spec = cert.at("map").get<MapSpec>();
    const auto again = cert.at("reverify").at("map").get<MapSpec>();
    if (!(spec == again)) ctx.fail(describe_mismatch(spec, again));
  } catch (const json::exception& e) {
    throw SchemaError(std::string("malformed certificate: ") + e.what());
  }
  const json& payload = cert.at("payload");
  try {
    const LiftMap m = build_map(spec);
    const std::string& kind = res.kind;
    if (kind == "returning") {
      const auto w = payload.at("witness").get<ReturningWitness>();
      if (const auto chk = verify_returning(m, w); !chk.ok) ctx.fail(chk.reason);
      if (payload.contains("chain_recurrent")) {
        const BoxSet cr = box_set_from_json(payload.at("chain_recurrent"));
        const bool claimed = payload.at("disjoint_from_chain_recurrent").get<bool>();
        if (claimed != !cr.meets(w.U)) ctx.fail("chain-recurrent disjointness does not recompute");
      }
    } else if (kind == "chain") {
      const auto c = payload.at("chain").get<DiskChain>();
      if (const auto chk = verify_chain(m, c); !chk.ok) ctx.fail(chk.reason);
    } else if (kind == "fixed") {
      check_fixed_like(m, payload, "records", ctx);
    } else if (kind == "periodic") {
      const LiftMap g = return_map(m, payload.at("p").get<long>(), payload.at("q").get<long>());
      check_fixed_like(g, payload, "orbits", ctx);
    } else if (kind == "window") {
      const BoxSet w = box_set_from_json(payload.at("boxes"));
      const auto rep = verify_window(m, w, graph_options_from(payload.at("options")));
      if (rep.verified() != payload.at("verified").get<bool>()) {
        ctx.fail("window verification does not recompute");
      }
      if (!rep.verified()) ctx.fail("window does not verify");
    } else if (kind == "attractor") {
      const GraphOptions opts = graph_options_from(payload.at("options"));
      const auto w = verify_window(m, box_set_from_json(payload.at("window")), opts);
      if (!w.verified()) {
        ctx.fail("window does not verify");
      } else {
        const auto a = attractor_boxes(m, w, payload.at("depth").get<int>(), opts);
        if (!(a.boxes == box_set_from_json(payload.at("attractor")))) {
          ctx.fail("attractor cover does not recompute");
        }
        if (a.topology.connected != payload.at("connected").get<bool>() ||
            a.topology.separates != payload.at("separates").get<bool>()) {
          ctx.fail("attractor topology does not recompute");
        }
      }
    } else if (kind == "drift") {
      const auto w = verify_window(m, box_set_from_json(payload.at("window")));
      DriftOptions opts;
      opts.N = payload.at("N").get<long>();
      opts.escape = payload.at("escape").get<double>();
      opts.tol = payload.at("tol").get<double>();
      if (payload.contains("fix_empty")) opts.fix_empty = payload.at("fix_empty").get<bool>();
      std::vector<LiftPoint> starts;
      for (const auto& s : payload.at("samples")) starts.push_back(s.at("start").get<LiftPoint>());
      const auto d = drift_classification(m, starts, w, opts);
      for (std::size_t i = 0; i < starts.size(); ++i) {
        const auto& s = payload.at("samples")[i];
        if (s.at("tag").get<std::string>() != to_string(d.samples[i].tag)) {
          ctx.fail("samples[" + std::to_string(i) + "]: tag does not recompute");
        }
        const auto end = s.at("end").get<LiftPoint>();
        if (!(norm(end - d.samples[i].end) <= 1e-9 * std::max(1.0, norm(end)))) {
          ctx.fail("samples[" + std::to_string(i) + "]: end point does not recompute");
        }
      }
    } else if (kind == "billiard") {
      const auto table = payload.at("table").get<TableSpec>();
      const auto bumpers = payload.at("bumpers").get<std::vector<Bumper>>();
      AvoidanceCertificate c;
      c.initial = {payload.at("initial").at("s").get<double>(),
                   payload.at("initial").at("theta").get<double>()};
      c.steps = payload.at("steps").get<int>();
      // Chords with no bumper to avoid have infinite clearance, stored as null.
      const auto clearance = [](const json& v) {
        return v.is_null() ? std::numeric_limits<double>::infinity() : v.get<double>();
      };
      for (const auto& v : payload.at("min_distance")) c.min_distance.push_back(clearance(v));
      c.overall_min = clearance(payload.at("overall_min"));
      if (!verify_avoidance(table, bumpers, c)) ctx.fail("bumper avoidance does not recompute");
    } else if (kind == "horseshoe") {
      const auto& c = payload.at("claims");
      const HorseshoeSpec hs = HorseshoeSpec::from_map_spec(spec);
      for (const char* key : {"negative", "positive"}) {
        const auto w = c.at(key).get<ReturningWitness>();
        if (const auto chk = verify_returning(m, w); !chk.ok) {
          ctx.fail(std::string(key) + ": " + chk.reason);
        }
      }
      const auto neg = c.at("negative").get<ReturningWitness>();
      const auto pos = c.at("positive").get<ReturningWitness>();
      if (neg.n != 1 || neg.k != -1) ctx.fail("negative witness is not (1, -1)");
      if (pos.n != 5 || pos.k != 1) ctx.fail("positive witness is not (5, +1)");
      const auto small = c.at("small_disk").at("witness").get<ReturningWitness>();
      if (const auto chk = verify_returning(m, small); !chk.ok) ctx.fail("small disk: " + chk.reason);
      const auto mini = enumerate_returns(hs, c.at("U").get<Box>(), 5);
      if (mini.counterexample || mini.min_positive_n != 5) {
        ctx.fail("positive return shorter than 5 exists");
      }
    } else {
      throw SchemaError("unknown certificate kind '" + kind + "'");
    }
  } catch (const json::exception& e) {
    throw SchemaError(std::string("malformed certificate payload: ") + e.what());
  } catch (const SchemaError&) {
    throw;
  } catch (const Error& e) {
    ctx.fail(e.what());
  }
  return res;
}

}  // namespace annulab
