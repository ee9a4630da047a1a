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
#include <atomic>
#include <chrono>
#include <cmath>
#include <thread>

#include "factorlab/blocks.hpp"
#include "factorlab/errors.hpp"
#include "factorlab/harness.hpp"
#include "internal.hpp"

namespace factorlab {

namespace {

// Non-finite doubles have no JSON number form.
Json num(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

Json estimate_json(const NormEstimate& e) {
  return {{"lower", num(e.lower)}, {"upper", num(e.upper)}, {"exact", e.exact}};
}

Json one_based(const IndexSet& s) {
  Json a = Json::array();
  for (std::size_t k : s) a.push_back(k + 1);
  return a;
}

// Sorted index set as 1-based inclusive runs [first, last].
Json ranges(const IndexSet& s) {
  Json a = Json::array();
  for (std::size_t i = 0; i < s.size();) {
    std::size_t j = i;
    while (j + 1 < s.size() && s[j + 1] == s[j] + 1) ++j;
    a.push_back({s[i] + 1, s[j] + 1});
    i = j + 1;
  }
  return a;
}

Json plan_json(const BudgetPlan& p) {
  Json j;
  j["target_blocks"] = p.target_blocks;
  j["reserve"] = p.reserve;
  j["required_dim"] = p.required_dim;
  j["required_rows"] = p.required_rows;
  j["min_keep"] = p.min_keep;
  return j;
}

Json blocks_json(const BlockSystem& sys) {
  Json out;
  out["two_param"] = sys.two_param;
  out["strategy"] = std::string(to_string(sys.strategy));
  Json list = Json::array();
  for (std::size_t i = 0; i < sys.size(); ++i) {
    const Block& b = sys.blocks[i];
    list.push_back({{"index", i + 1},
                    {"rank", b.rank},
                    {"label", {b.label.i, b.label.j}},
                    {"row", b.row + 1},
                    {"k0", b.k0 + 1},
                    {"k1", b.k1 + 1}});
  }
  out["blocks"] = std::move(list);
  Json eta = Json::array();
  for (double v : sys.eta.values) eta.push_back(num(v));
  out["eta"] = std::move(eta);
  Json sums = Json::array();
  for (double v : sys.past_sums) sums.push_back(num(v));
  out["past_sums"] = std::move(sums);
  return out;
}

Json certificates_json(const BlockSystem& sys) {
  Json past = Json::array();
  for (std::size_t i = 0; i < sys.past.size(); ++i) {
    const auto& c = sys.past[i];
    Json j;
    j["step"] = i + 1;
    if (c.row) j["row"] = *c.row + 1;
    j["F"] = one_based(c.F);
    j["signs"] = c.signs;
    j["achieved"] = num(c.achieved);
    j["eta"] = num(c.eta);
    j["functionals"] = c.functional_count;
    j["strategy"] = std::string(to_string(c.strategy));
    past.push_back(std::move(j));
  }
  Json future = Json::array();
  for (std::size_t i = 0; i < sys.future.size(); ++i) {
    for (const auto& c : sys.future[i]) {
      Json j;
      j["step"] = i + 1;
      if (c.row) j["row"] = *c.row + 1;
      j["size"] = c.A.size();
      j["A"] = ranges(c.A);
      j["achieved"] = num(c.achieved);
      j["eta"] = num(c.eta);
      future.push_back(std::move(j));
    }
  }
  return {{"past", std::move(past)}, {"future", std::move(future)}};
}

Json selection_json(const Selection& sel, const BlockSystem& sys) {
  Json j;
  j["branch"] = std::string(to_string(sel.branch));
  j["min_retained"] = sel.min_retained;
  j["retained"] = one_based(sel.retained);
  Json d = Json::array();
  for (double v : sel.d) d.push_back(num(v));
  j["d"] = std::move(d);
  if (sys.two_param) j["rows"] = one_based(sel.rows);
  return j;
}

Json check_json(const Check& c) {
  return {{"name", c.name},
          {"measured", num(c.measured)},
          {"bound", num(c.bound)},
          {"passed", c.passed},
          {"detail", c.detail}};
}

Json error_json(const std::string& stage, const Error& e) {
  Json j;
  j["stage"] = stage;
  j["kind"] = std::string(to_string(e.kind()));
  j["message"] = e.what();
  j["step"] = e.step ? Json(*e.step) : Json(nullptr);
  j["row"] = e.row ? Json(*e.row + 1) : Json(nullptr);
  j["suggested_dim"] = e.suggested_dim ? Json(*e.suggested_dim) : Json(nullptr);
  return j;
}

}  // namespace

std::string RunReport::dump() const { return doc.dump(2) + "\n"; }

RunReport run(const RunConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  RunReport r;
  Json& doc = r.doc;
  doc["schema_version"] = kSchemaVersion;
  doc["config"] = config_to_json(cfg);
  doc["verdict"] = "fail";
  doc["stage"] = "";
  doc["error"] = nullptr;

  std::string stage = "validate";
  std::vector<Check> checks;
  try {
    cfg.space.validate(true);
    require(cfg.target_blocks >= 1, ErrorKind::InvalidArgument, "target_blocks must be positive");

    stage = "plan_budget";
    const BudgetPlan plan = plan_budget(cfg.space, cfg.target_blocks, cfg.reserve);
    doc["plan"] = plan_json(plan);

    stage = "generate_operator";
    const Operator T = generate_operator(cfg.generator, cfg.space, cfg.seed);
    NormOptions nopts = cfg.norm;
    nopts.seed = detail::derive_seed(cfg.seed, 3);
    doc["operator"] = {{"storage", T.is_diagonal() ? "diagonal" : "dense"},
                       {"norm", estimate_json(op_norm(T, nopts))}};

    stage = "build_blocks";
    BuildOptions bopts;
    bopts.strategy = cfg.strategy;
    bopts.reserve = cfg.reserve;
    const bool two = cfg.space.kind == SpaceSpec::Kind::lp_sum;
    const BlockSystem sys = two ? build_blocks_2d(T, cfg.space, cfg.target_blocks, bopts)
                                : build_blocks_1d(T, cfg.space, cfg.target_blocks, bopts);
    doc["blocks"] = blocks_json(sys);
    doc["certificates"] = certificates_json(sys);

    stage = "verify_blocks";
    checks = verify_blocks(T, sys);

    stage = "select_H";
    const Selection sel = select_H(T, sys, cfg.min_retained);
    doc["selection"] = selection_json(sel, sys);

    stage = "assemble";
    AssembleOptions aopts;
    aopts.min_retained = cfg.min_retained;
    aopts.tol = cfg.tol;
    aopts.norm = nopts;
    aopts.identity_samples = cfg.identity_samples;
    aopts.seed = detail::derive_seed(cfg.seed, 4);
    const auto [bundle, rep] = assemble(sys, T, aopts);
    Json norms;
    for (const auto& [name, e] : bundle.norms) norms[name] = estimate_json(e);
    doc["norms"] = std::move(norms);
    checks.insert(checks.end(), rep.checks.begin(), rep.checks.end());
    r.assembled = true;
    r.residual = rep.residual_identity;
    r.norm_product = rep.norm_product_MN;
    r.defect = rep.neumann_defect.upper;
    doc["results"] = {{"residual_identity", num(rep.residual_identity)},
                      {"neumann_defect", estimate_json(rep.neumann_defect)},
                      {"inverse_norm", estimate_json(rep.inverse_norm)},
                      {"norm_product_MN", num(rep.norm_product_MN)},
                      {"retained", bundle.retained.size()},
                      {"branch", std::string(to_string(bundle.branch))}};

    if (cfg.exact) {
      stage = "exact_recheck";
      const ExactSummary ex = exact_recheck(T, sys);
      doc["exact"] = {{"checked", ex.checked}, {"held", ex.held}, {"skipped", ex.skipped}};
      checks.push_back({"exact_certificates", static_cast<double>(ex.checked - ex.held), 0.0,
                        ex.held == ex.checked,
                        "certificates failing a rational recheck"});
    }
    stage = "verify";
  } catch (const Error& e) {
    doc["error"] = error_json(stage, e);
  } catch (const std::exception& e) {
    doc["error"] = {{"stage", stage}, {"kind", "Internal"}, {"message", e.what()}};
  }

  Json cj = Json::array();
  Json violated = Json::array();
  for (const auto& c : checks) {
    cj.push_back(check_json(c));
    if (!c.passed)
      violated.push_back({{"name", c.name}, {"measured", num(c.measured)}, {"bound", num(c.bound)}});
  }
  doc["checks"] = std::move(cj);
  doc["violated"] = std::move(violated);

  r.stage = stage;
  r.pass = doc["error"].is_null() && doc["violated"].empty() && !checks.empty();
  doc["stage"] = stage;
  doc["verdict"] = r.pass ? "pass" : "fail";
  if (cfg.timing)
    doc["wall_time_s"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

std::vector<RunConfig> expand_batch(const Json& doc) {
  if (!doc.is_object()) fail(ErrorKind::Parse, "batch: expected an object");
  for (const auto& [key, value] : doc.items())
    if (key != "schema_version" && key != "configs" && key != "base" && key != "seeds")
      fail(ErrorKind::Parse, "batch: unknown key '" + key + "'");
  if (doc.contains("schema_version") && doc.at("schema_version") != kSchemaVersion)
    fail(ErrorKind::Parse, "batch: unsupported schema_version");
  std::vector<RunConfig> out;
  if (doc.contains("configs")) {
    if (doc.contains("base") || doc.contains("seeds"))
      fail(ErrorKind::Parse, "batch: use either 'configs' or 'base' with 'seeds'");
    if (!doc.at("configs").is_array()) fail(ErrorKind::Parse, "batch: 'configs' must be an array");
    for (const auto& c : doc.at("configs")) out.push_back(parse_config(c));
    return out;
  }
  if (!doc.contains("base") || !doc.contains("seeds"))
    fail(ErrorKind::Parse, "batch: needs 'configs', or 'base' and 'seeds'");
  const RunConfig base = parse_config(doc.at("base"));
  const Json& s = doc.at("seeds");
  if (!s.is_object() || !s.contains("first") || !s.contains("count") ||
      !detail::non_negative_integer(s.at("first")) || !detail::non_negative_integer(s.at("count")) || s.size() != 2)
    fail(ErrorKind::Parse, "batch: 'seeds' must be {\"first\": n, \"count\": n}");
  const auto first = s.at("first").get<std::uint64_t>();
  const auto n = s.at("count").get<std::uint64_t>();
  for (std::uint64_t k = 0; k < n; ++k) {
    RunConfig c = base;
    c.seed = first + k;
    c.name = (base.name.empty() ? std::string("run") : base.name) + "-seed-" +
             std::to_string(c.seed);
    out.push_back(std::move(c));
  }
  return out;
}

BatchResult batch(const std::vector<RunConfig>& configs, std::size_t jobs) {
  BatchResult out;
  out.reports.resize(configs.size());
  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  jobs = std::min(jobs, std::max<std::size_t>(configs.size(), 1));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < configs.size(); i = next++) out.reports[i] = run(configs[i]);
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < jobs; ++w) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  std::size_t passed = 0;
  double worst_residual = 0.0;
  double worst_product = 0.0;
  double worst_defect = 0.0;
  Json failures = Json::array();
  Json stages = Json::object();
  for (std::size_t i = 0; i < out.reports.size(); ++i) {
    const auto& r = out.reports[i];
    if (r.pass) ++passed;
    if (r.assembled) {
      worst_residual = std::max(worst_residual, r.residual);
      worst_product = std::max(worst_product, r.norm_product);
      worst_defect = std::max(worst_defect, r.defect);
    }
    if (!r.pass) {
      Json f;
      f["index"] = i + 1;
      f["name"] = configs[i].name;
      f["stage"] = r.stage;
      f["error"] = r.doc["error"];
      f["violated"] = r.doc["violated"];
      failures.push_back(std::move(f));
      stages[r.stage] = stages.value(r.stage, 0) + 1;
    }
  }
  Json& s = out.summary;
  s["schema_version"] = kSchemaVersion;
  s["runs"] = configs.size();
  s["passed"] = passed;
  s["failed"] = configs.size() - passed;
  s["pass_rate"] = configs.empty() ? 0.0
                                   : static_cast<double>(passed) / static_cast<double>(configs.size());
  s["worst_residual_identity"] = num(worst_residual);
  s["worst_norm_product_MN"] = num(worst_product);
  s["worst_neumann_defect"] = num(worst_defect);
  s["failures_by_stage"] = std::move(stages);
  s["failures"] = std::move(failures);
  out.all_pass = passed == configs.size();
  return out;
}

}  // namespace factorlab
