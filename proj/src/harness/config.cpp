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


#include <cmath>
#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>

#include "factorlab/errors.hpp"
#include "factorlab/harness.hpp"
#include "internal.hpp"

namespace factorlab {

namespace {

[[noreturn]] void parse_fail(const std::string& where, const std::string& what) {
  fail(ErrorKind::Parse, where + ": " + what);
}

void only_keys(const Json& obj, const std::string& where, std::set<std::string> allowed) {
  if (!obj.is_object()) parse_fail(where, "expected an object");
  for (const auto& [key, value] : obj.items())
    if (!allowed.count(key)) parse_fail(where, "unknown key '" + key + "'");
}

const Json& need(const Json& obj, const std::string& where, const std::string& key) {
  if (!obj.contains(key)) parse_fail(where, "missing '" + key + "'");
  return obj.at(key);
}

double exponent(const Json& v, const std::string& where) {
  if (v.is_string()) {
    if (v.get<std::string>() == "inf") return kInf;
    parse_fail(where, "exponent must be a number or \"inf\"");
  }
  if (!v.is_number()) parse_fail(where, "exponent must be a number or \"inf\"");
  return v.get<double>();
}

Json exponent_json(double p) { return std::isinf(p) ? Json("inf") : Json(p); }

std::size_t count(const Json& v, const std::string& where) {
  if (!detail::non_negative_integer(v)) parse_fail(where, "expected a non-negative integer");
  return v.get<std::size_t>();
}

double number(const Json& v, const std::string& where) {
  if (!v.is_number()) parse_fail(where, "expected a number");
  return v.get<double>();
}

bool boolean(const Json& v, const std::string& where) {
  if (!v.is_boolean()) parse_fail(where, "expected true or false");
  return v.get<bool>();
}

std::optional<std::size_t> optional_count(const Json& obj, const std::string& key,
                                          const std::string& where) {
  if (!obj.contains(key) || obj.at(key).is_null()) return std::nullopt;
  return count(obj.at(key), where + "." + key);
}

GeneratorSpec parse_generator(const Json& g) {
  const std::string where = "generator";
  only_keys(g, where, {"kind", "scale", "density", "rank", "norm_cap", "path"});
  const Json& kind = need(g, where, "kind");
  if (!kind.is_string()) parse_fail(where, "'kind' must be a string");
  const auto k = kind.get<std::string>();
  GeneratorSpec spec;
  using K = GeneratorSpec::Kind;
  if (k == "identity") {
    spec.kind = K::identity;
  } else if (k == "zero") {
    spec.kind = K::zero;
  } else if (k == "scaled_identity") {
    spec.kind = K::scaled_identity;
    spec.scale = number(need(g, where, "scale"), where + ".scale");
  } else if (k == "coordinate_projection") {
    spec.kind = K::coordinate_projection;
    spec.density = number(need(g, where, "density"), where + ".density");
  } else if (k == "random_rank_k_projection") {
    spec.kind = K::random_rank_k_projection;
    spec.rank = count(need(g, where, "rank"), where + ".rank");
  } else if (k == "random_contraction") {
    spec.kind = K::random_contraction;
    spec.norm_cap = number(need(g, where, "norm_cap"), where + ".norm_cap");
  } else if (k == "from_file") {
    spec.kind = K::from_file;
    const Json& path = need(g, where, "path");
    if (!path.is_string()) parse_fail(where, "'path' must be a string");
    spec.path = path.get<std::string>();
  } else {
    parse_fail(where, "unknown generator '" + k + "'");
  }
  return spec;
}

Json generator_to_json(const GeneratorSpec& g) {
  Json j;
  j["kind"] = std::string(to_string(g.kind));
  using K = GeneratorSpec::Kind;
  switch (g.kind) {
    case K::scaled_identity: j["scale"] = g.scale; break;
    case K::coordinate_projection: j["density"] = g.density; break;
    case K::random_rank_k_projection: j["rank"] = g.rank; break;
    case K::random_contraction: j["norm_cap"] = g.norm_cap; break;
    case K::from_file: j["path"] = g.path; break;
    default: break;
  }
  return j;
}

}  // namespace

std::string_view to_string(GeneratorSpec::Kind k) {
  using K = GeneratorSpec::Kind;
  switch (k) {
    case K::identity: return "identity";
    case K::zero: return "zero";
    case K::scaled_identity: return "scaled_identity";
    case K::coordinate_projection: return "coordinate_projection";
    case K::random_rank_k_projection: return "random_rank_k_projection";
    case K::random_contraction: return "random_contraction";
    case K::from_file: return "from_file";
  }
  return "?";
}

SpaceSpec parse_space(const Json& doc) {
  const std::string where = "space";
  only_keys(doc, where, {"kind", "p", "dim", "outer_p", "outer_dim", "K_u", "K_s"});
  const Json& kind = need(doc, where, "kind");
  if (!kind.is_string()) parse_fail(where, "'kind' must be a string");
  SpaceSpec s;
  const auto k = kind.get<std::string>();
  const double p = exponent(need(doc, where, "p"), where + ".p");
  const std::size_t dim = count(need(doc, where, "dim"), where + ".dim");
  if (k == "lp") {
    if (doc.contains("outer_p") || doc.contains("outer_dim"))
      parse_fail(where, "outer_p and outer_dim only apply to lp_sum");
    s = SpaceSpec::lp(p, dim);
  } else if (k == "lp_sum") {
    s = SpaceSpec::lp_sum(exponent(need(doc, where, "outer_p"), where + ".outer_p"),
                          count(need(doc, where, "outer_dim"), where + ".outer_dim"), p, dim);
  } else {
    parse_fail(where, "kind must be \"lp\" or \"lp_sum\"");
  }
  if (doc.contains("K_u")) s.K_u = number(doc.at("K_u"), where + ".K_u");
  if (doc.contains("K_s")) s.K_s = number(doc.at("K_s"), where + ".K_s");
  s.validate();
  return s;
}

Json space_to_json(const SpaceSpec& s) {
  Json j;
  if (s.kind == SpaceSpec::Kind::lp) {
    j["kind"] = "lp";
  } else {
    j["kind"] = "lp_sum";
    j["outer_p"] = exponent_json(s.outer_p);
    j["outer_dim"] = s.outer_dim;
  }
  j["p"] = exponent_json(s.p);
  j["dim"] = s.dim;
  j["K_u"] = s.K_u;
  j["K_s"] = s.K_s;
  return j;
}

SpaceSpec parse_space_string(std::string_view text) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : text) {
    if (c == ':') {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  parts.push_back(cur);
  auto exp_of = [&](const std::string& s) -> double {
    if (s == "inf") return kInf;
    try {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used == s.size()) return v;
    } catch (const std::exception&) {
    }
    fail(ErrorKind::Parse, "bad exponent '" + s + "' in space '" + std::string(text) + "'");
  };
  auto dim_of = [&](const std::string& s) -> std::size_t {
    try {
      std::size_t used = 0;
      const unsigned long long v = std::stoull(s, &used);
      if (used == s.size() && s.find('-') == std::string::npos) return v;
    } catch (const std::exception&) {
    }
    fail(ErrorKind::Parse, "bad dimension '" + s + "' in space '" + std::string(text) + "'");
  };
  if (parts.size() == 3 && parts[0] == "lp") return SpaceSpec::lp(exp_of(parts[1]), dim_of(parts[2]));
  if (parts.size() == 5 && parts[0] == "lp_sum")
    return SpaceSpec::lp_sum(exp_of(parts[1]), dim_of(parts[2]), exp_of(parts[3]),
                             dim_of(parts[4]));
  fail(ErrorKind::Parse, "space must look like lp:P:DIM or lp_sum:OUTER_P:OUTER_DIM:P:DIM, got '" +
                             std::string(text) + "'");
}

RunConfig parse_config(const Json& doc) {
  const std::string where = "config";
  only_keys(doc, where,
            {"schema_version", "name", "space", "generator", "target_blocks", "min_retained",
             "reserve", "seed", "strategy", "tolerances", "norm", "identity_samples", "exact",
             "timing"});
  if (doc.contains("schema_version") && doc.at("schema_version") != kSchemaVersion)
    parse_fail(where, "unsupported schema_version (expected " + std::to_string(kSchemaVersion) + ")");
  RunConfig cfg;
  if (doc.contains("name")) {
    if (!doc.at("name").is_string()) parse_fail(where, "'name' must be a string");
    cfg.name = doc.at("name").get<std::string>();
  }
  cfg.space = parse_space(need(doc, where, "space"));
  cfg.generator = parse_generator(need(doc, where, "generator"));
  cfg.target_blocks = count(need(doc, where, "target_blocks"), where + ".target_blocks");
  cfg.min_retained = optional_count(doc, "min_retained", where);
  cfg.reserve = optional_count(doc, "reserve", where);
  if (doc.contains("seed")) {
    const Json& s = doc.at("seed");
    if (!detail::non_negative_integer(s)) parse_fail(where, "'seed' must be a non-negative integer");
    cfg.seed = s.get<std::uint64_t>();
  }
  if (doc.contains("strategy")) {
    if (!doc.at("strategy").is_string()) parse_fail(where, "'strategy' must be a string");
    cfg.strategy = parse_past_strategy(doc.at("strategy").get<std::string>());
  }
  if (doc.contains("tolerances")) {
    const Json& t = doc.at("tolerances");
    only_keys(t, "tolerances", {"residual", "algebraic", "identity", "norm_slack"});
    if (t.contains("residual")) cfg.tol.residual = number(t.at("residual"), "tolerances.residual");
    if (t.contains("algebraic"))
      cfg.tol.algebraic = number(t.at("algebraic"), "tolerances.algebraic");
    if (t.contains("identity")) cfg.tol.identity = number(t.at("identity"), "tolerances.identity");
    if (t.contains("norm_slack"))
      cfg.tol.norm_slack = number(t.at("norm_slack"), "tolerances.norm_slack");
  }
  if (doc.contains("norm")) {
    const Json& n = doc.at("norm");
    only_keys(n, "norm", {"restarts", "tol", "max_iter"});
    if (n.contains("restarts"))
      cfg.norm.restarts = static_cast<int>(count(n.at("restarts"), "norm.restarts"));
    if (n.contains("tol")) cfg.norm.tol = number(n.at("tol"), "norm.tol");
    if (n.contains("max_iter"))
      cfg.norm.max_iter = static_cast<int>(count(n.at("max_iter"), "norm.max_iter"));
  }
  if (doc.contains("identity_samples"))
    cfg.identity_samples = count(doc.at("identity_samples"), where + ".identity_samples");
  if (doc.contains("exact")) cfg.exact = boolean(doc.at("exact"), where + ".exact");
  if (doc.contains("timing")) cfg.timing = boolean(doc.at("timing"), where + ".timing");
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Parse, "cannot open config '" + path + "'");
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Parse, path + ": " + e.what());
  }
  return parse_config(doc);
}

Json config_to_json(const RunConfig& cfg) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["name"] = cfg.name;
  j["space"] = space_to_json(cfg.space);
  j["generator"] = generator_to_json(cfg.generator);
  j["target_blocks"] = cfg.target_blocks;
  j["min_retained"] = cfg.min_retained ? Json(*cfg.min_retained) : Json(nullptr);
  j["reserve"] = cfg.reserve ? Json(*cfg.reserve) : Json(nullptr);
  j["seed"] = cfg.seed;
  j["strategy"] = std::string(to_string(cfg.strategy));
  j["tolerances"] = {{"residual", cfg.tol.residual},
                     {"algebraic", cfg.tol.algebraic},
                     {"identity", cfg.tol.identity},
                     {"norm_slack", cfg.tol.norm_slack}};
  j["norm"] = {{"restarts", cfg.norm.restarts},
               {"tol", cfg.norm.tol},
               {"max_iter", cfg.norm.max_iter}};
  j["identity_samples"] = cfg.identity_samples;
  j["exact"] = cfg.exact;
  j["timing"] = cfg.timing;
  return j;
}

}  // namespace factorlab
