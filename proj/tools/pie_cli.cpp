// Copyright PIE simulator contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>

#include "pie/attestation/report.hpp"
#include "pie/harness/runner.hpp"

namespace {

using namespace pie;
using nlohmann::json;

void print_result(const harness::ScenarioResult& r, bool verbose) {
  std::cout << (r.passed() ? "PASS " : "FAIL ") << r.name << "\n";
  if (!r.invalid_reason.empty())
    std::cout << "  invalid: " << r.invalid_reason << "\n";
  for (const auto& a : r.assertions)
    if (verbose || !a.passed)
      std::cout << "  [" << a.index << "] " << a.kind << " "
                << (a.passed ? "ok" : "FAILED") << " (" << a.detail << ")\n";
}

int write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    std::cerr << "cannot write " << path << "\n";
    return harness::kExitInvalid;
  }
  out << text;
  return 0;
}

int cmd_run(const std::string& file, std::optional<std::uint64_t> seed,
            std::optional<std::size_t> max_entries, const std::string& trace_out,
            const std::string& reports_out, bool verbose) {
  auto scenario = harness::load_scenario_file(file);
  if (!scenario) {
    std::cerr << "invalid scenario: " << scenario.error().detail << "\n";
    return harness::kExitInvalid;
  }
  auto r = harness::run_scenario(*scenario, {seed, max_entries});
  print_result(r, verbose);
  if (!trace_out.empty() && write_file(trace_out, r.trace.to_jsonl()) != 0)
    return harness::kExitInvalid;
  if (!reports_out.empty()) {
    std::string text;
    for (const auto& rep : r.reports) text += to_hex(rep) + "\n";
    if (write_file(reports_out, text) != 0) return harness::kExitInvalid;
  }
  return r.exit_code;
}

int cmd_corpus(const std::string& export_dir, bool verbose) {
  auto corpus = harness::builtin_corpus();
  int worst = harness::kExitPass;
  std::size_t passed = 0;
  for (const auto& s : corpus) {
    if (!export_dir.empty()) {
      std::filesystem::create_directories(export_dir);
      if (write_file(export_dir + "/" + s.name + ".json",
                     s.source.dump(2) + "\n") != 0)
        return harness::kExitInvalid;
    }
    auto r = harness::run_scenario(s);
    print_result(r, verbose);
    if (r.passed()) ++passed;
    worst = std::max(worst, r.exit_code);
  }
  std::cout << passed << "/" << corpus.size() << " scenarios passed\n";
  return worst;
}

// Report files hold one hex-encoded report per line; raw binary also works.
std::vector<Bytes> read_reports(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::string text((std::istreambuf_iterator<char>(in)), {});
  std::vector<Bytes> out;
  std::istringstream lines(text);
  std::string line;
  bool all_hex = true;
  while (std::getline(lines, line)) {
    while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back())))
      line.pop_back();
    if (line.empty()) continue;
    auto b = from_hex(line);
    if (!b) {
      all_hex = false;
      break;
    }
    out.push_back(std::move(*b));
  }
  if (!all_hex) out = {to_bytes(text)};
  return out;
}

int cmd_attest_dump(const std::string& file, const std::string& provider_name,
                    std::optional<std::uint64_t> platform_seed) {
  if (!std::filesystem::exists(file)) {
    std::cerr << "cannot open " << file << "\n";
    return harness::kExitInvalid;
  }
  auto provider = crypto::make_provider(provider_name, 0);
  if (!provider) {
    std::cerr << "unknown provider " << provider_name << "\n";
    return harness::kExitInvalid;
  }
  // The deterministic provider only verifies keys it generated itself.
  if (platform_seed)
    provider->keygen("pie-platform-root/" + std::to_string(*platform_seed));

  int code = 0;
  for (const auto& bytes : read_reports(file)) {
    auto report = attestation::AttestationReport::decode(bytes);
    if (!report) {
      std::cerr << "malformed report\n";
      return harness::kExitInvalid;
    }
    json j = report->to_json();
    bool valid = provider->verify(report->platform_public_key,
                                  report->signed_body(),
                                  report->platform_signature);
    j["signature_valid"] = valid;
    std::cout << j.dump(2) << "\n";
    if (!valid) code = harness::kExitAssertion;
  }
  return code;
}

int cmd_keygen(std::uint64_t seed, const std::string& provider_name) {
  auto provider = crypto::make_provider(provider_name, seed);
  if (!provider) {
    std::cerr << "unknown provider " << provider_name << "\n";
    return harness::kExitInvalid;
  }
  auto key = provider->keygen("pie-platform-root/" + std::to_string(seed));
  json j{{"provider", provider->name()},
         {"seed", seed},
         {"public_key", to_hex(key.public_key)},
         {"secret_key", to_hex(key.secret_key)}};
  std::cout << j.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"PIE platform isolation simulator"};
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "Print every assertion");

  auto* run = app.add_subcommand("run", "Run one scenario file");
  std::string file;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> max_entries;
  std::string trace_out, reports_out;
  run->add_option("scenario", file, "Scenario JSON file")->required();
  run->add_option("--seed", seed, "Override the scenario seed");
  run->add_option("--max-entries", max_entries, "PMP entries")
      ->check(CLI::IsMember({8, 16}));
  run->add_option("--trace-out", trace_out, "Write the trace as JSON lines");
  run->add_option("--reports-out", reports_out,
                  "Write the last attestation's reports, one hex line each");

  auto* corpus = app.add_subcommand("corpus", "Run the builtin scenario corpus");
  std::string export_dir;
  corpus->add_option("--export", export_dir, "Also write each scenario here");

  auto* dump = app.add_subcommand("attest-dump", "Decode and verify reports");
  std::string report_file, provider_name = "deterministic";
  std::optional<std::uint64_t> platform_seed;
  dump->add_option("report", report_file, "Report file")->required();
  dump->add_option("--provider", provider_name, "deterministic or ed25519");
  dump->add_option("--platform-seed", platform_seed,
                   "Seed of the run that produced the reports");

  auto* keygen = app.add_subcommand("keygen", "Derive the platform root key");
  std::uint64_t key_seed = 0;
  std::string key_provider = "deterministic";
  keygen->add_option("--seed", key_seed, "Seed")->required();
  keygen->add_option("--provider", key_provider, "deterministic or ed25519");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : harness::kExitInvalid;
  }

  if (*run)
    return cmd_run(file, seed, max_entries, trace_out, reports_out, verbose);
  if (*corpus) return cmd_corpus(export_dir, verbose);
  if (*dump) return cmd_attest_dump(report_file, provider_name, platform_seed);
  return cmd_keygen(key_seed, key_provider);
}
