// Copyright 2026 The Factorlab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <algorithm>
#include <cstdlib>
#include <string>

#include "doctest.h"
#include "factorlab/errors.hpp"
#include "factorlab/harness.hpp"

using namespace factorlab;

namespace {

Json base_config() {
  return Json::parse(R"({
    "name": "t",
    "space": {"kind": "lp", "p": "inf", "dim": 256},
    "generator": {"kind": "identity"},
    "target_blocks": 8,
    "seed": 1
  })");
}

bool same(const DenseMatrix& a, const DenseMatrix& b) {
  return a.rows() == b.rows() && std::ranges::equal(a.data(), b.data());
}

std::string data_file(const std::string& name) {
  const char* dir = std::getenv("FACTORLAB_DATA_DIR");
  return std::string(dir ? dir : "tests/data") + "/" + name;
}

}  // namespace

TEST_CASE("config parsing and echo") {
  const RunConfig cfg = parse_config(base_config());
  CHECK(cfg.space.p == kInf);
  CHECK(cfg.space.dim == 256);
  CHECK(cfg.target_blocks == 8);
  CHECK(!cfg.min_retained);
  const Json echo = config_to_json(cfg);
  CHECK(config_to_json(parse_config(echo)) == echo);
  CHECK(echo["space"]["p"] == "inf");
}

TEST_CASE("signed and unsigned integers parse alike") {
  const Json built = {{"space", {{"kind", "lp"}, {"p", "inf"}, {"dim", 64}}},
                      {"generator", {{"kind", "identity"}}},
                      {"target_blocks", 4},
                      {"seed", 9}};
  const RunConfig a = parse_config(built);
  const RunConfig b = parse_config(Json::parse(built.dump()));
  CHECK(a.space.dim == 64);
  CHECK(a.seed == 9);
  CHECK(config_to_json(a) == config_to_json(b));
}

TEST_CASE("config errors are parse errors") {
  auto expect_parse = [](Json doc) {
    try {
      parse_config(doc);
      FAIL("expected a parse error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Parse);
    }
  };
  Json a = base_config();
  a["colour"] = "blue";
  expect_parse(a);
  Json b = base_config();
  b.erase("target_blocks");
  expect_parse(b);
  Json c = base_config();
  c["space"]["p"] = "infinity";
  expect_parse(c);
  Json d = base_config();
  d["generator"] = {{"kind", "coordinate_projection"}};
  expect_parse(d);
  Json e = base_config();
  e["seed"] = -3;
  expect_parse(e);
  Json f = base_config();
  f["schema_version"] = 99;
  expect_parse(f);
  Json g = base_config();
  g["space"]["outer_dim"] = 3;
  expect_parse(g);
}

TEST_CASE("compact space strings") {
  const auto a = parse_space_string("lp:inf:8");
  CHECK(a.p == kInf);
  CHECK(a.dim == 8);
  const auto b = parse_space_string("lp_sum:1:4:2.5:16");
  CHECK(b.kind == SpaceSpec::Kind::lp_sum);
  CHECK(b.outer_p == 1.0);
  CHECK(b.outer_dim == 4);
  CHECK(b.p == 2.5);
  CHECK_THROWS_AS(parse_space_string("lp:x:8"), Error);
  CHECK_THROWS_AS(parse_space_string("lp:2"), Error);
  CHECK_THROWS_AS(parse_space_string("lp:2:-4"), Error);
}

TEST_CASE("generators") {
  const auto s = SpaceSpec::lp(2.0, 24);
  GeneratorSpec g;
  const Operator id = generate_operator(g, s, 1);
  CHECK(same(id.to_dense(), DenseMatrix::identity(24)));

  g.kind = GeneratorSpec::Kind::coordinate_projection;
  g.density = 1.0;
  CHECK(same(generate_operator(g, s, 5).to_dense(), DenseMatrix::identity(24)));
  g.density = 0.4;
  CHECK(generate_operator(g, s, 5).diag() == generate_operator(g, s, 5).diag());
  CHECK(generate_operator(g, s, 5).diag() != generate_operator(g, s, 6).diag());
  g.density = 1.5;
  CHECK_THROWS_AS(generate_operator(g, s, 5), Error);

  g.kind = GeneratorSpec::Kind::random_rank_k_projection;
  g.rank = 3;
  const DenseMatrix P = generate_operator(g, s, 9).to_dense();
  CHECK(same(P, generate_operator(g, s, 9).to_dense()));
  CHECK(max_abs_entry(P * P - P) <= 1e-9 * (1.0 + max_abs_entry(P)));
  double trace = 0.0;
  for (std::size_t i = 0; i < 24; ++i) trace += P(i, i);
  CHECK(trace == doctest::Approx(3.0).epsilon(1e-9));
  g.rank = 0;
  CHECK_THROWS_AS(generate_operator(g, s, 9), Error);

  g.kind = GeneratorSpec::Kind::random_contraction;
  g.norm_cap = 0.5;
  for (double p : {1.0, 3.0, kInf}) {
    const auto sp = SpaceSpec::lp(p, 12);
    CHECK(op_norm(generate_operator(g, sp, 2)).upper <= 0.5);
  }

  g.kind = GeneratorSpec::Kind::from_file;
  g.path = data_file("diag.txt");
  const auto s4 = SpaceSpec::lp(kInf, 4);
  const DenseMatrix f = generate_operator(g, s4, 1).to_dense();
  CHECK(f(0, 0) == 1.0);
  CHECK(f(1, 1) == 0.0);
  CHECK_THROWS_AS(generate_operator(g, SpaceSpec::lp(kInf, 5), 1), Error);
}

TEST_CASE("run: identity on ℓ^∞_256 passes") {
  const RunReport r = run(parse_config(base_config()));
  CHECK(r.pass);
  CHECK(r.doc["verdict"] == "pass");
  CHECK(r.doc["error"].is_null());
  CHECK(r.doc["results"]["norm_product_MN"].get<double>() <= 48.0);
  CHECK(!r.doc.contains("wall_time_s"));
  CHECK(r.doc["blocks"]["blocks"].size() == 8);
  CHECK(r.doc["blocks"]["blocks"][0]["k0"] == 1);
}

TEST_CASE("run: an oversized target is captured with a suggestion") {
  Json doc = base_config();
  doc["space"]["dim"] = 16;
  doc["target_blocks"] = 32;
  const RunReport r = run(parse_config(doc));
  CHECK_FALSE(r.pass);
  CHECK(r.doc["verdict"] == "fail");
  CHECK(r.doc["error"]["stage"] == "plan_budget");
  CHECK(r.doc["error"]["kind"] == "DimensionTooSmall");
  CHECK(r.doc["error"]["suggested_dim"].get<std::size_t>() >= 64);
}

TEST_CASE("run: failed checks name the bound") {
  Json doc = base_config();
  doc["tolerances"] = {{"identity", -1.0}};
  const RunReport r = run(parse_config(doc));
  CHECK_FALSE(r.pass);
  CHECK(r.stage == "verify");
  bool named = false;
  for (const auto& v : r.doc["violated"]) named = named || v["name"] == "QB_identity";
  CHECK(named);
}

TEST_CASE("run: annihilation failures name the step") {
  Json doc = base_config();
  doc["space"]["dim"] = 96;
  doc["target_blocks"] = 4;
  doc["generator"] = {{"kind", "random_contraction"}, {"norm_cap", 1.0}};
  const RunReport r = run(parse_config(doc));
  CHECK_FALSE(r.pass);
  CHECK(r.doc["error"]["stage"] == "build_blocks");
  CHECK(r.doc["error"]["step"].is_number());
}

TEST_CASE("run: exact recheck and timing flags") {
  Json doc = base_config();
  doc["exact"] = true;
  doc["timing"] = true;
  const RunReport r = run(parse_config(doc));
  CHECK(r.pass);
  CHECK(r.doc["exact"]["held"] == r.doc["exact"]["checked"]);
  CHECK(r.doc.contains("wall_time_s"));
}

TEST_CASE("run: replay is byte-identical") {
  Json doc = base_config();
  doc["generator"] = {{"kind", "coordinate_projection"}, {"density", 0.5}};
  doc["space"] = {{"kind", "lp_sum"}, {"outer_p", 1}, {"outer_dim", 4}, {"p", 2}, {"dim", 128}};
  const RunConfig cfg = parse_config(doc);
  CHECK(run(cfg).dump() == run(cfg).dump());
}

TEST_CASE("batch: seed sweep of coordinate projections") {
  const Json sweep = {
      {"base",
       {{"name", "proj"},
        {"space", {{"kind", "lp"}, {"p", "inf"}, {"dim", 256}}},
        {"generator", {{"kind", "coordinate_projection"}, {"density", 0.5}}},
        {"target_blocks", 8}}},
      {"seeds", {{"first", 1}, {"count", 100}}}};
  const auto configs = expand_batch(sweep);
  REQUIRE(configs.size() == 100);
  CHECK(configs[0].name == "proj-seed-1");
  CHECK(configs[99].seed == 100);
  const BatchResult serial = batch(configs, 1);
  const BatchResult parallel = batch(configs, 4);
  CHECK(serial.reports.size() == 100);
  CHECK(serial.summary.dump() == parallel.summary.dump());
  std::size_t passes = 0;
  for (std::size_t i = 0; i < 100; ++i) {
    CHECK(serial.reports[i].dump() == parallel.reports[i].dump());
    passes += serial.reports[i].pass;
  }
  CHECK(serial.summary["passed"] == passes);
  CHECK(serial.all_pass == (passes == 100));
}

TEST_CASE("batch: failures are counted, not averaged") {
  Json good = base_config();
  Json bad = base_config();
  bad["space"]["dim"] = 16;
  bad["target_blocks"] = 32;
  const auto configs = expand_batch(Json{{"configs", {good, bad, good}}});
  const BatchResult res = batch(configs, 2);
  CHECK(res.summary["runs"] == 3);
  CHECK(res.summary["passed"] == 2);
  CHECK(res.summary["failed"] == 1);
  CHECK(res.summary["failures"][0]["index"] == 2);
  CHECK(res.summary["failures_by_stage"]["plan_budget"] == 1);
  CHECK_FALSE(res.all_pass);
}

TEST_CASE("batch documents are validated") {
  CHECK_THROWS_AS(expand_batch(Json{{"configs", 3}}), Error);
  CHECK_THROWS_AS(expand_batch(Json{{"base", base_config()}}), Error);
  CHECK_THROWS_AS(expand_batch(Json{{"base", base_config()}, {"seeds", {{"first", 1}}}}), Error);
  CHECK_THROWS_AS(expand_batch(Json{{"runs", Json::array()}}), Error);
}

TEST_CASE("lemma self-check finds no discrepancies") {
  const auto r = check_lemmas(3, 4000, 12);
  CHECK(r.cases == 4000);
  CHECK(r.discrepancies == 0);
  CHECK(r.past_checked + r.future_checked == 4000);
}
