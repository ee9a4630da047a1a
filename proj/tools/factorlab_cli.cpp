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


// factorlab: command-line driver for block factorization experiments.

#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "factorlab/errors.hpp"
#include "factorlab/harness.hpp"
#include "factorlab/opnorm.hpp"
#include "factorlab/seqspace.hpp"

namespace fs = std::filesystem;
using namespace factorlab;

namespace {

constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;

Json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Parse, "cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Parse, path + ": " + e.what());
  }
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::InvalidArgument, "cannot write '" + path.string() + "'");
  out << text;
}

std::string file_stem(const RunConfig& cfg, std::optional<std::size_t> index) {
  std::string base = cfg.name.empty() ? "report" : cfg.name;
  for (char& c : base)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.')) c = '_';
  if (!index) return base;
  char prefix[16];
  std::snprintf(prefix, sizeof prefix, "%04zu-", *index + 1);
  return prefix + base;
}

struct RunArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  bool exact = false;
  bool timing = false;
  std::size_t jobs = 0;
};

int cmd_run(const RunArgs& a) {
  RunConfig cfg = load_config(a.config);
  if (a.seed) cfg.seed = *a.seed;
  cfg.exact = cfg.exact || a.exact;
  cfg.timing = cfg.timing || a.timing;
  const RunReport r = run(cfg);
  if (a.out.empty()) {
    std::cout << r.dump();
  } else {
    fs::create_directories(a.out);
    const fs::path path = fs::path(a.out) / (file_stem(cfg, std::nullopt) + ".json");
    write_file(path, r.dump());
    std::cout << (r.pass ? "pass" : "fail") << "  " << path.string() << "\n";
  }
  return r.pass ? 0 : kExitFail;
}

int cmd_batch(const RunArgs& a) {
  Json doc = read_json(a.config);
  if (a.seed) {
    if (!doc.contains("seeds") || !doc["seeds"].is_object())
      fail(ErrorKind::Parse, "--seed applies to seed sweeps ('base' + 'seeds') only");
    doc["seeds"]["first"] = *a.seed;
  }
  std::vector<RunConfig> configs = expand_batch(doc);
  for (auto& c : configs) {
    c.exact = c.exact || a.exact;
    c.timing = c.timing || a.timing;
  }
  const BatchResult res = batch(configs, a.jobs);
  if (!a.out.empty()) {
    fs::create_directories(a.out);
    for (std::size_t i = 0; i < configs.size(); ++i)
      write_file(fs::path(a.out) / (file_stem(configs[i], i) + ".json"), res.reports[i].dump());
    write_file(fs::path(a.out) / "summary.json", res.summary.dump(2) + "\n");
  }
  std::cout << res.summary.dump(2) << "\n";
  return res.all_pass ? 0 : kExitFail;
}

int cmd_check_lemmas(std::uint64_t seed, std::size_t cases, std::size_t max_dim) {
  const LemmaSuiteResult r = check_lemmas(seed, cases, max_dim);
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["seed"] = seed;
  j["cases"] = r.cases;
  j["past_checked"] = r.past_checked;
  j["future_checked"] = r.future_checked;
  j["discrepancies"] = r.discrepancies;
  j["messages"] = r.messages;
  std::cout << j.dump(2) << "\n";
  return r.discrepancies == 0 ? 0 : kExitFail;
}

int cmd_norms(const std::string& matrix, const std::string& domain, const std::string& codomain,
              std::optional<std::uint64_t> seed, int restarts) {
  const SpaceSpec dom = parse_space_string(domain);
  const SpaceSpec cod = codomain.empty() ? dom : parse_space_string(codomain);
  const DenseMatrix m = read_matrix_file(matrix);
  NormOptions opts;
  if (seed) opts.seed = *seed;
  opts.restarts = restarts;
  const NormEstimate e = op_norm(m, dom, cod, opts);
  Json j;
  j["domain"] = space_to_json(dom);
  j["codomain"] = space_to_json(cod);
  j["lower"] = e.lower;
  j["upper"] = e.upper;
  j["exact"] = e.exact;
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_order(std::optional<std::uint64_t> count, std::optional<std::uint64_t> rank,
              const std::vector<std::uint64_t>& index) {
  if (count) {
    for (std::uint64_t k = 1; k <= *count; ++k) {
      const auto idx = precede_unrank(k);
      std::cout << k << " " << idx.i << " " << idx.j << "\n";
    }
  }
  if (rank) {
    const auto idx = precede_unrank(*rank);
    std::cout << *rank << " " << idx.i << " " << idx.j << "\n";
  }
  if (!index.empty()) {
    if (index.size() != 2 || index[0] == 0 || index[1] == 0)
      fail(ErrorKind::InvalidArgument, "--index takes two positive integers");
    const TwoParamIndex idx{index[0], index[1]};
    std::cout << precede_rank(idx) << " " << idx.i << " " << idx.j << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Block factorization of the identity on finite sequence spaces"};
  app.require_subcommand(1);

  RunArgs run_args;
  auto* run_cmd = app.add_subcommand("run", "Run one config and print or write its report");
  run_cmd->add_option("--config", run_args.config, "Run config (JSON)")->required();
  run_cmd->add_option("--seed", run_args.seed, "Override the config seed");
  run_cmd->add_option("--out", run_args.out, "Write the report into this directory");
  run_cmd->add_flag("--exact", run_args.exact, "Recheck certificates in rational arithmetic");
  run_cmd->add_flag("--timing", run_args.timing, "Record wall time (reports stop being replayable)");

  RunArgs batch_args;
  auto* batch_cmd = app.add_subcommand("batch", "Run a list of configs or a seed sweep");
  batch_cmd->add_option("--config", batch_args.config, "Batch document (JSON)")->required();
  batch_cmd->add_option("--seed", batch_args.seed, "First seed of a sweep");
  batch_cmd->add_option("--out", batch_args.out, "Write reports and summary.json here");
  batch_cmd->add_option("--jobs", batch_args.jobs, "Concurrent runs (0 = all cores)");
  batch_cmd->add_flag("--exact", batch_args.exact, "Recheck certificates in rational arithmetic");
  batch_cmd->add_flag("--timing", batch_args.timing, "Record wall time per run");

  std::uint64_t lemma_seed = 1;
  std::size_t lemma_cases = 10000;
  std::size_t lemma_dim = 12;
  auto* lemma_cmd = app.add_subcommand("check-lemmas", "Randomized annihilation self-check");
  lemma_cmd->add_option("--seed", lemma_seed, "Seed")->capture_default_str();
  lemma_cmd->add_option("--cases", lemma_cases, "Number of cases")->capture_default_str();
  lemma_cmd->add_option("--max-dim", lemma_dim, "Largest dimension")->capture_default_str();

  std::string norm_matrix;
  std::string norm_domain;
  std::string norm_codomain;
  std::optional<std::uint64_t> norm_seed;
  int norm_restarts = NormOptions{}.restarts;
  auto* norms_cmd = app.add_subcommand("norms", "Operator norm of a matrix file");
  norms_cmd->add_option("--matrix", norm_matrix, "Matrix in text format")->required();
  norms_cmd->add_option("--domain", norm_domain, "lp:P:DIM or lp_sum:OP:OD:P:DIM")->required();
  norms_cmd->add_option("--codomain", norm_codomain, "Defaults to the domain");
  norms_cmd->add_option("--seed", norm_seed, "Seed for the lower-bound search");
  norms_cmd->add_option("--restarts", norm_restarts, "Random restarts")->capture_default_str();

  std::optional<std::uint64_t> order_count;
  std::optional<std::uint64_t> order_rank;
  std::vector<std::uint64_t> order_index;
  auto* order_cmd = app.add_subcommand("order", "Enumerate the diagonal order on N x N");
  order_cmd->add_option("--count", order_count, "Print ranks 1..N");
  order_cmd->add_option("--rank", order_rank, "Print the pair of one rank");
  order_cmd->add_option("--index", order_index, "Print the rank of a pair: --index I J")
      ->expected(2);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitUsage;
  }

  try {
    if (*run_cmd) return cmd_run(run_args);
    if (*batch_cmd) return cmd_batch(batch_args);
    if (*lemma_cmd) return cmd_check_lemmas(lemma_seed, lemma_cases, lemma_dim);
    if (*norms_cmd)
      return cmd_norms(norm_matrix, norm_domain, norm_codomain, norm_seed, norm_restarts);
    if (*order_cmd) return cmd_order(order_count, order_rank, order_index);
  } catch (const Error& e) {
    std::cerr << "factorlab: " << to_string(e.kind()) << ": " << e.what() << "\n";
    return e.kind() == ErrorKind::Parse ? kExitUsage : kExitFail;
  } catch (const std::exception& e) {
    std::cerr << "factorlab: " << e.what() << "\n";
    return kExitFail;
  }
  return kExitUsage;
}
