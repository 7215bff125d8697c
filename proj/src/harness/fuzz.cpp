// Copyright PIE simulator contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#include <map>
#include <random>

#include "pie/harness/runner.hpp"

namespace pie::harness {

using nlohmann::json;

namespace {

std::uint64_t parse_addr(const json& v) {
  if (v.is_string()) return std::stoull(v.get<std::string>(), nullptr, 0);
  return v.get<std::uint64_t>();
}

void clear(std::map<std::uint64_t, std::string>& taint, std::uint64_t base,
           std::uint64_t size) {
  taint.erase(taint.lower_bound(base), taint.lower_bound(base + size));
}

}  // namespace

std::vector<FuzzViolation> taint_violations(const Trace& trace) {
  std::vector<FuzzViolation> out;
  // Byte address -> enclave whose write is still in place.
  std::map<std::uint64_t, std::string> taint;
  for (const auto& r : trace.records()) {
    if (r.operation == "zero_fill") {
      const auto& range = r.args["range"];
      clear(taint, parse_addr(range["base"]), range["size"].get<std::uint64_t>());
      continue;
    }
    if (r.result != "ok") continue;
    bool from_enclave = r.actor.rfind("enclave:", 0) == 0;
    if (r.operation == "checked_write" || r.operation == "dma_write") {
      std::uint64_t addr = parse_addr(r.args["addr"]);
      auto data = from_hex(r.args["data"].get<std::string>());
      if (!data) continue;
      if (from_enclave) {
        for (std::size_t i = 0; i < data->size(); ++i) taint[addr + i] = r.actor;
      } else {
        clear(taint, addr, data->size());
      }
    } else if (r.operation == "checked_read" && r.actor == "OS") {
      std::uint64_t addr = parse_addr(r.args["addr"]);
      std::uint64_t len = r.args["len"].get<std::uint64_t>();
      auto it = taint.lower_bound(addr);
      if (it != taint.end() && it->first < addr + len)
        out.push_back({r.step, "OS read byte " + std::to_string(it->first) +
                                   " written by " + it->second});
    }
  }
  return out;
}

namespace {

class Fuzzer {
 public:
  Fuzzer(std::uint64_t seed) : seed_(seed), rng_(seed) {}

  FuzzReport run(std::size_t steps) {
    FuzzReport report;
    report.seed = seed_;
    PlatformSpec spec;
    spec.max_entries = seed_ % 2 == 0 ? 16 : 8;
    spec.id_policy =
        seed_ % 3 == 0 ? monitor::IdPolicy::Reuse : monitor::IdPolicy::Monotonic;
    spec.peripherals = {
        {"sensor0", "sensor", "sensor0", false, "sensor-fw", "1.0", "acme", true},
        {"kbd0", "keyboard", "kbd0", false, "kbd-fw", "1.0", "acme", false},
        {"acc0", "accelerator", "acc0", true, "acc-fw", "1.0", "acme", true},
    };
    devices_ = {"sensor0", "kbd0", "acc0"};
    auto sim = Simulation::create(spec, seed_);
    if (!sim) {
      report.violations.push_back({0, "platform: " + sim.error().detail});
      return report;
    }
    sim_ = sim->get();

    for (std::size_t step = 0; step < steps; ++step) {
      json action = next_action();
      std::string op = action["op"].get<std::string>();
      bool os_access = op == "os.read" || op == "os.write";
      std::vector<platform::MemRange> protected_before;
      if (os_access) protected_before = sim_->sm().protected_ranges();

      auto out = sim_->execute(action);
      ++report.steps;
      if (!out) continue;  // referenced something that no longer resolves
      after(action, *out);

      if (os_access) {
        if (!out->ok) {
          ++report.os_accesses_denied;
        } else {
          if (op == "os.read") ++report.os_reads_ok;
          std::uint64_t len =
              op == "os.write" ? action["hex"].get<std::string>().size() / 2 : 1;
          auto range = sim_->target(action, len);
          for (const auto& p : protected_before)
            if (range && platform::range_overlaps(*range, p))
              report.violations.push_back(
                  {step, op + " reached protected " + platform::to_string(p)});
        }
      }
      if (Status s = sim_->sm().check_invariants(); !s)
        report.violations.push_back({step, s.error().detail});
    }
    for (auto& v : taint_violations(sim_->trace()))
      report.violations.push_back(std::move(v));
    report.trace_digest =
        to_hex(sim_->provider().hash(to_bytes(sim_->trace().to_jsonl())));
    return report;
  }

 private:
  std::uint64_t pick(std::uint64_t n) {
    return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(rng_);
  }
  template <typename T>
  const T& pick_of(const std::vector<T>& v) {
    return v[pick(v.size())];
  }

  json random_target() {
    json t;
    std::uint64_t roll = pick(10);
    if (roll < 4 && !enclaves_.empty()) {
      t["enclave"] = pick_of(enclaves_);
      t["offset"] = pick(0x1000 + 64);
    } else if (roll < 8 && !regions_.empty()) {
      t["region"] = pick_of(regions_);
      t["offset"] = pick(0x200 + 64);
    } else if (roll < 9) {
      t["sm"] = true;
      t["offset"] = pick(0x1000);
    } else {
      t["addr"] = 0x8020'0000 + pick(0x8'0000);
    }
    t["len"] = 1 + pick(64);
    return t;
  }

  Bytes random_bytes(std::size_t n) {
    Bytes b(n);
    for (auto& x : b) x = static_cast<std::uint8_t>(1 + pick(255));
    return b;
  }

  json next_action() {
    std::uint64_t roll = pick(100);
    if (roll < 12 || enclaves_.size() < 2) {
      std::string name = "e" + std::to_string(counter_++);
      pending_name_ = name;
      return {{"op", "os.create_enclave"},
              {"as", name},
              {"kind", pick(3) == 0 ? "CE" : "AE"},
              {"code", "fuzz-" + std::to_string(pick(4))},
              {"size", 0x1000}};
    }
    if (roll < 18) return {{"op", "os.destroy_enclave"}, {"enclave", pick_of(enclaves_)}};
    if (roll < 30) {
      std::string name = "r" + std::to_string(counter_++);
      pending_name_ = name;
      std::string b = pick(4) == 0 ? pick_of(devices_) : pick_of(enclaves_);
      return {{"op", "os.connect"}, {"a", pick_of(enclaves_)}, {"b", b},
              {"as", name}, {"size", 0x200}};
    }
    if (roll < 36 && !regions_.empty())
      return {{"op", "os.sync_disconnect"}, {"region", pick_of(regions_)}};
    if (roll < 52) {
      json t = random_target();
      std::uint64_t len = t["len"].get<std::uint64_t>();
      t.erase("len");
      return {{"op", "enclave.write"}, {"enclave", pick_of(enclaves_)},
              {"at", t}, {"hex", to_hex(random_bytes(len))}};
    }
    if (roll < 70) {
      json t = random_target();
      t["op"] = "os.read";
      return t;
    }
    if (roll < 78) {
      json t = random_target();
      std::uint64_t len = t["len"].get<std::uint64_t>();
      t.erase("len");
      t["op"] = "os.write";
      t["hex"] = to_hex(Bytes(len, 0xee));
      return t;
    }
    if (roll < 86)
      return {{"op", "ae.call"}, {"ae", pick_of(enclaves_)}, {"ce", pick_of(enclaves_)},
              {"request", "raw"}, {"hex", to_hex(random_bytes(1 + pick(24)))}};
    if (roll < 89)
      return {{"op", "ce.attach"}, {"controller", pick_of(enclaves_)},
              {"peripheral", pick_of(devices_)}};
    if (roll < 91) return {{"op", "env.unplug"}, {"peripheral", pick_of(devices_)}};
    if (roll < 93) return {{"op", "env.replug"}, {"peripheral", pick_of(devices_)}};
    if (roll < 96 && !regions_.empty()) {
      json t = random_target();
      std::uint64_t len = t["len"].get<std::uint64_t>();
      t.erase("len");
      return {{"op", "periph.dma_write"}, {"peripheral", pick_of(devices_)},
              {"at", t}, {"hex", to_hex(Bytes(len, 0xd0))}};
    }
    if (roll < 98) return {{"op", "os.pause"}, {"enclave", pick_of(enclaves_)}};
    if (roll < 99) return {{"op", "os.resume"}, {"enclave", pick_of(enclaves_)}};
    return {{"op", "os.schedule"}, {"enclave", pick_of(enclaves_)}};
  }

  void after(const json& action, const ActionOutcome& out) {
    const std::string op = action["op"].get<std::string>();
    if (!out.ok) return;
    if (op == "os.create_enclave") enclaves_.push_back(pending_name_);
    if (op == "os.connect") regions_.push_back(pending_name_);
    // Keep the name lists short so that actions hit live objects.
    if (enclaves_.size() > 24) enclaves_.erase(enclaves_.begin());
    if (regions_.size() > 24) regions_.erase(regions_.begin());
  }

  std::uint64_t seed_;
  std::mt19937_64 rng_;
  Simulation* sim_ = nullptr;
  std::vector<std::string> enclaves_;
  std::vector<std::string> regions_;
  std::vector<std::string> devices_;
  std::string pending_name_;
  std::uint64_t counter_ = 0;
};

}  // namespace

FuzzReport fuzz_isolation(std::uint64_t seed, std::size_t steps) {
  return Fuzzer(seed).run(steps);
}

}  // namespace pie::harness
