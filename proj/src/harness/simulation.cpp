// Copyright PIE simulator contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#include "pie/harness/simulation.hpp"

#include <algorithm>

#include "pie/attestation/measurement.hpp"

namespace pie::harness {

using nlohmann::json;
using platform::PhysAddr;

namespace {

constexpr std::uint64_t kPage = 0x1000;
constexpr std::uint64_t kDefaultDramBase = 0x8000'0000;
constexpr std::uint64_t kDefaultDramSize = 0x1000'0000;
constexpr std::uint64_t kDefaultMmioBase = 0x1000'0000;
constexpr std::uint64_t kEnclaveAccessOffset = 0x100;

Error invalid(std::string why) {
  return make_error(Errc::ScenarioInvalid, std::move(why));
}

std::optional<std::uint64_t> u64_of(const json& v) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0)
    return static_cast<std::uint64_t>(v.get<std::int64_t>());
  if (!v.is_string()) return std::nullopt;
  try {
    const auto& s = v.get_ref<const std::string&>();
    std::size_t used = 0;
    std::uint64_t out = std::stoull(s, &used, 0);
    if (used != s.size()) return std::nullopt;
    return out;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

Result<std::uint64_t> need_u64(const json& a, const char* key,
                               std::optional<std::uint64_t> fallback = {}) {
  if (!a.contains(key)) {
    if (fallback) return *fallback;
    return invalid(std::string("missing ") + key);
  }
  auto v = u64_of(a[key]);
  if (!v) return invalid(std::string("bad number in ") + key);
  return *v;
}

Result<std::string> need_string(const json& a, const char* key) {
  if (!a.contains(key) || !a[key].is_string())
    return invalid(std::string("missing string ") + key);
  return a[key].get<std::string>();
}

std::string string_or(const json& a, const char* key, std::string fallback) {
  if (a.contains(key) && a[key].is_string()) return a[key].get<std::string>();
  return fallback;
}

// Payload of a write-like action: "hex", "text" or {"fill": byte, "len": n}.
Result<Bytes> payload_of(const json& a, bool required) {
  if (a.contains("hex")) {
    if (!a["hex"].is_string()) return invalid("hex must be a string");
    auto b = from_hex(a["hex"].get<std::string>());
    if (!b) return invalid("bad hex payload");
    return *b;
  }
  if (a.contains("text")) {
    if (!a["text"].is_string()) return invalid("text must be a string");
    return to_bytes(a["text"].get<std::string>());
  }
  if (a.contains("fill")) {
    auto byte = u64_of(a["fill"]);
    auto len = need_u64(a, "len");
    if (!byte || *byte > 0xff || !len) return invalid("bad fill payload");
    return Bytes(*len, static_cast<std::uint8_t>(*byte));
  }
  if (required) return invalid("missing payload (hex, text or fill)");
  return Bytes{};
}

Bytes keystream(crypto::CryptoProvider& p, const Digest& secret,
                std::size_t n) {
  Bytes out;
  for (std::uint64_t block = 0; out.size() < n; ++block) {
    Bytes in = to_bytes("pie-provision-stream");
    append(in, secret);
    put_be64(in, block);
    append(out, p.hash(in));
  }
  out.resize(n);
  return out;
}

Digest provision_tag(crypto::CryptoProvider& p, ByteView secret,
                     ByteView ciphertext) {
  Bytes in = to_bytes("pie-provision-tag");
  append(in, secret);
  append(in, ciphertext);
  return p.hash(in);
}

}  // namespace

Simulation::Simulation(PlatformSpec spec, std::uint64_t seed)
    : spec_(std::move(spec)), seed_(seed) {}

Result<std::unique_ptr<Simulation>> Simulation::create(const PlatformSpec& spec,
                                                       std::uint64_t seed) {
  std::unique_ptr<Simulation> sim(new Simulation(spec, seed));
  if (Status s = sim->boot(); !s) return s.error();
  return sim;
}

Status Simulation::boot() {
  provider_ = crypto::make_provider(spec_.provider, seed_);
  if (!provider_) return invalid("unknown provider " + spec_.provider);

  json doc;
  if (spec_.device_tree) {
    doc = *spec_.device_tree;
  } else {
    json nodes = json::array();
    nodes.push_back({{"name", "cpu0"}, {"kind", "cpu"}});
    nodes.push_back({{"name", "dram"},
                     {"kind", "dram"},
                     {"base", kDefaultDramBase},
                     {"size", kDefaultDramSize}});
    nodes.push_back({{"name", "dma-bus"},
                     {"kind", "bus-controller"},
                     {"base", 0x0c00'0000},
                     {"size", kPage}});
    std::uint64_t next = kDefaultMmioBase;
    for (const auto& p : spec_.peripherals) {
      if (p.dma) continue;
      nodes.push_back({{"name", p.node},
                       {"kind", "mmio-peripheral"},
                       {"base", next},
                       {"size", kPage},
                       {"model", p.kind}});
      next += kPage;
    }
    doc = json{{"nodes", nodes}};
  }
  auto tree = platform::DeviceTree::load(doc);
  if (!tree) return invalid("device tree: " + tree.error().detail);
  tree_.emplace(std::move(*tree));
  memory_.emplace(tree_->span());

  monitor::MonitorConfig cfg;
  cfg.max_entries = spec_.max_entries;
  cfg.id_policy = spec_.id_policy;
  if (!tree_->in_dram(cfg.sm_range))
    return invalid("device tree has no dram at the monitor range");
  sm_ = std::make_unique<monitor::Monitor>(*tree_, *memory_, *provider_, cfg,
                                           &trace_);

  auto dram = std::ranges::find_if(
      tree_->nodes(), [&](const auto& n) {
        return n.kind == platform::NodeKind::Dram && n.range &&
               n.range->contains(cfg.sm_range);
      });
  next_free_ = cfg.sm_range.end();
  alloc_end_ = dram->range->end();

  platform_key_ =
      provider_->keygen("pie-platform-root/" + std::to_string(seed_));
  std::vector<Bytes> trusted;
  for (const auto& m : spec_.trusted_manufacturers) {
    auto [it, fresh] = manufacturers_.try_emplace(m);
    if (fresh) it->second = provider_->keygen("pie-manufacturer/" + m);
    trusted.push_back(it->second.public_key);
  }
  bus_ = std::make_unique<peripherals::PeripheralBus>(*sm_, &trace_);
  runtime_ = std::make_unique<progmodel::Runtime>(*sm_, *bus_, *provider_,
                                                  trusted, &trace_);

  for (const auto& p : spec_.peripherals) {
    if (!p.dma) {
      const auto* node = tree_->find(p.node);
      if (!node || node->kind != platform::NodeKind::MmioPeripheral)
        return invalid("peripheral " + p.name + " has no mmio node " + p.node);
    }
    DeviceRecord rec{p, {}, 0, std::nullopt};
    auto dev = build_device(rec);
    auto id = bus_->attach(std::move(dev));
    if (!id) return invalid("attach " + p.name + ": " + id.error().detail);
    rec.id = *id;
    devices_.emplace(p.name, std::move(rec));
  }
  return ok_status();
}

attestation::PeripheralCertificate Simulation::certify(
    const PeripheralSpec& spec, const crypto::KeyPair& device) {
  auto [it, fresh] = manufacturers_.try_emplace(spec.manufacturer);
  if (fresh)
    it->second = provider_->keygen("pie-manufacturer/" + spec.manufacturer);
  return attestation::issue_certificate(*provider_, it->second,
                                        device.public_key,
                                        provider_->hash(to_bytes(spec.firmware)),
                                        spec.version);
}

std::unique_ptr<peripherals::Peripheral> Simulation::build_device(
    DeviceRecord& rec) {
  const auto& spec = rec.spec;
  auto kp = provider_->keygen("pie-device/" + spec.name + "/" +
                              std::to_string(rec.generation));
  auto cert = certify(spec, kp);
  peripherals::Binding binding;
  binding.dma = spec.dma;
  if (!spec.dma) binding.mmio_range = tree_->find(spec.node)->range;
  auto kind = *peripherals::peripheral_kind_from_string(spec.kind);
  std::unique_ptr<peripherals::Peripheral> dev;
  Bytes fw = to_bytes(spec.firmware);
  switch (kind) {
    case peripherals::PeripheralKind::Sensor:
      dev = std::make_unique<peripherals::Sensor>(spec.name, kind, *provider_,
                                                  kp, cert, fw, binding);
      break;
    case peripherals::PeripheralKind::Keyboard:
      dev = std::make_unique<peripherals::Keyboard>(spec.name, kind, *provider_,
                                                    kp, cert, fw, binding);
      break;
    case peripherals::PeripheralKind::Accelerator:
      dev = std::make_unique<peripherals::Accelerator>(
          spec.name, kind, *provider_, kp, cert, fw, binding);
      break;
  }
  dev->set_terminate_on_peer_loss(spec.terminate_on_peer_loss);
  return dev;
}

// ---------------------------------------------------------------------------
// Name resolution

std::optional<EntityId> Simulation::entity(const std::string& name) const {
  if (auto it = enclaves_.find(name); it != enclaves_.end())
    return it->second.id;
  if (auto it = devices_.find(name); it != devices_.end()) return it->second.id;
  return monitor::entity_from_string(name);
}

std::optional<RegionId> Simulation::region(const std::string& name) const {
  auto it = regions_.find(name);
  if (it == regions_.end()) return std::nullopt;
  return it->second;
}

std::optional<MemRange> Simulation::enclave_range(
    const std::string& name) const {
  auto it = enclaves_.find(name);
  if (it == enclaves_.end()) return std::nullopt;
  return it->second.range;
}

Result<EntityId> Simulation::need_entity(const json& a, const char* key) const {
  auto name = need_string(a, key);
  if (!name) return name.error();
  auto id = entity(*name);
  if (!id) return invalid("unknown name " + *name);
  return *id;
}

Result<EntityId> Simulation::need_enclave(const json& a,
                                          const char* key) const {
  auto id = need_entity(a, key);
  if (id && !id->is_enclave())
    return invalid(a[key].get<std::string>() + " is not an enclave");
  return id;
}

Result<Simulation::DeviceRecord*> Simulation::need_device(const json& a,
                                                          const char* key) {
  auto name = need_string(a, key);
  if (!name) return name.error();
  auto it = devices_.find(*name);
  if (it == devices_.end()) return invalid("unknown peripheral " + *name);
  return &it->second;
}

Result<RegionId> Simulation::need_region(const json& a, const char* key) const {
  auto name = need_string(a, key);
  if (!name) return name.error();
  auto id = region(*name);
  if (!id) return invalid("unknown region " + *name);
  return *id;
}

Result<MemRange> Simulation::allocate(std::uint64_t size) {
  if (size == 0) return make_error(Errc::InvalidArgument, "empty range");
  std::uint64_t base = (next_free_ + kPage - 1) / kPage * kPage;
  if (base + size > alloc_end_ || base + size < base)
    return make_error(Errc::OutOfSpan, "harness allocator exhausted");
  next_free_ = base + size;
  return MemRange{PhysAddr{base}, size};
}

Result<MemRange> Simulation::target(const json& args,
                                    std::uint64_t default_len) const {
  auto len = need_u64(args, "len", default_len);
  if (!len) return len.error();
  auto offset = need_u64(args, "offset", 0);
  if (!offset) return offset.error();
  std::optional<MemRange> whole;
  if (args.contains("addr")) {
    auto addr = u64_of(args["addr"]);
    if (!addr) return invalid("bad addr");
    return MemRange{PhysAddr{*addr + *offset}, *len};
  } else if (args.contains("region")) {
    auto rid = need_region(args, "region");
    if (!rid) return rid.error();
    whole = sm_->region(*rid)->range;
  } else if (args.contains("enclave")) {
    auto name = need_string(args, "enclave");
    if (!name) return name.error();
    whole = enclave_range(*name);
    if (!whole) return invalid("unknown enclave " + *name);
  } else if (args.value("sm", false)) {
    whole = sm_->config().sm_range;
  } else {
    return invalid("access needs addr, region, enclave or sm");
  }
  if (args.value("whole", false)) return *whole;
  if (args.value("from_end", false))
    return MemRange{PhysAddr{whole->end() - *offset - *len}, *len};
  return MemRange{PhysAddr{whole->base.value + *offset}, *len};
}

Result<Bytes> Simulation::inspect(const MemRange& range) const {
  return sm_->sm_read(range.base, range.size);
}

void Simulation::fail(ActionOutcome& o, const Error& e) {
  o.ok = false;
  o.result = std::string(to_string(e.code));
  o.detail = e.detail;
}

// ---------------------------------------------------------------------------
// Dispatch

Result<ActionOutcome> Simulation::execute(const json& action) {
  if (!action.is_object() || !action.contains("op") ||
      !action["op"].is_string())
    return invalid("action needs a string op");
  Action a{action["op"].get<std::string>(), std::nullopt, action};
  if (action.contains("label") && action["label"].is_string())
    a.label = action["label"].get<std::string>();
  return execute(a);
}

Result<ActionOutcome> Simulation::execute(const Action& action) {
  ActionOutcome o;
  o.index = outcomes_.size();
  o.op = action.op;
  const json& a = action.args;
  const std::string& op = action.op;
  Status s = ok_status();
  if (op == "os.create_enclave") s = do_create(a, o);
  else if (op == "os.destroy_enclave") s = do_destroy(a, o);
  else if (op == "os.connect") s = do_connect(a, o);
  else if (op == "os.sync_disconnect") s = do_sync_disconnect(a, o);
  else if (op == "os.read") s = do_os_access(a, o, false);
  else if (op == "os.write") s = do_os_access(a, o, true);
  else if (op == "os.schedule") s = do_schedule(a, o);
  else if (op == "os.pause") s = do_pause(a, o, true);
  else if (op == "os.resume") s = do_pause(a, o, false);
  else if (op == "enclave.write") s = do_enclave_access(a, o, true);
  else if (op == "enclave.read") s = do_enclave_access(a, o, false);
  else if (op == "ce.attach") s = do_ce_attach(a, o);
  else if (op == "ae.call") s = do_ae_call(a, o);
  else if (op == "env.set_sensor" || op == "env.inject_key") s = do_env(a, o);
  else if (op == "env.unplug") s = do_unplug(a, o);
  else if (op == "env.replug") s = do_replug(a, o);
  else if (op == "periph.lie_dma") s = do_lie_dma(a, o);
  else if (op == "periph.dma_write") s = do_dma_access(a, o, true);
  else if (op == "periph.dma_read") s = do_dma_access(a, o, false);
  else if (op == "verifier.attest") s = do_attest(a, o);
  else if (op == "verifier.provision_secret") s = do_provision(a, o);
  else if (op == "adversary.relaunch_with_same_id") s = do_relaunch(a, o);
  else if (op == "adversary.replay_report") s = do_replay(a, o);
  else s = invalid("unknown action " + op);
  if (!s) return s.error();
  outcomes_.push_back(o);
  return o;
}

// ---------------------------------------------------------------------------
// OS actions

Status Simulation::do_create(const json& a, ActionOutcome& o) {
  auto as = need_string(a, "as");
  if (!as) return as.error();
  std::string kind = string_or(a, "kind", "AE");
  if (kind != "AE" && kind != "CE") return invalid("kind must be AE or CE");
  std::string code = string_or(a, "code", *as);
  std::string config = string_or(a, "config", "");
  auto size = need_u64(a, "size", kDefaultEnclaveSize);
  if (!size) return size.error();
  Result<MemRange> range = make_error(Errc::InvalidArgument, "");
  if (a.contains("base")) {
    auto base = need_u64(a, "base");
    if (!base) return base.error();
    range = MemRange{PhysAddr{*base}, *size};
  } else {
    range = allocate(*size);
  }
  if (!range) {
    fail(o, range.error());
    return ok_status();
  }
  auto ek = kind == "AE" ? monitor::EnclaveKind::Application
                         : monitor::EnclaveKind::Controller;
  auto id = sm_->create_enclave(to_bytes(code), to_bytes(config), *range, ek);
  if (!id) {
    fail(o, id.error());
    return ok_status();
  }
  enclaves_[*as] = EnclaveRecord{*id, ek, code, config, *range};
  expected_.try_emplace(*as, code, config);
  o.detail = monitor::to_string(*id);
  return ok_status();
}

Status Simulation::do_destroy(const json& a, ActionOutcome& o) {
  auto id = need_enclave(a, "enclave");
  if (!id) return id.error();
  if (Status s = sm_->destroy_enclave(*id); !s)
    fail(o, s.error());
  else
    runtime_->forget(*id);
  return ok_status();
}

Status Simulation::do_connect(const json& a, ActionOutcome& o) {
  auto ea = need_entity(a, "a");
  if (!ea) return ea.error();
  auto eb = need_entity(a, "b");
  if (!eb) return eb.error();
  DeviceRecord* dev = nullptr;
  for (auto& [name, rec] : devices_)
    if (rec.id == *ea || rec.id == *eb) dev = &rec;
  EntityId other = dev && dev->id == *ea ? *eb : *ea;

  auto size = need_u64(a, "size", kDefaultRegionSize);
  if (!size) return size.error();
  Result<MemRange> range = make_error(Errc::InvalidArgument, "");
  if (a.contains("at")) {
    auto r = target(a["at"], *size);
    if (!r) return r.error();
    range = *r;
  } else if (a.contains("same_as")) {
    auto rid = need_region(a, "same_as");
    if (!rid) return rid.error();
    MemRange r = sm_->region(*rid)->range;
    if (a.contains("shift")) {
      if (!a["shift"].is_number_integer()) return invalid("shift is an integer");
      r.base.value += a["shift"].get<std::int64_t>();
    }
    range = r;
  } else if (a.contains("base")) {
    auto base = need_u64(a, "base");
    if (!base) return base.error();
    range = MemRange{PhysAddr{*base}, *size};
  } else if (dev && !dev->spec.dma) {
    range = *tree_->find(dev->spec.node)->range;
  } else {
    range = allocate(*size);
  }
  if (!range) {
    fail(o, range.error());
    return ok_status();
  }

  if (dev && dev->spec.dma) {
    auto* p = bus_->get(dev->id);
    p->set_negotiated(*range);
    if (dev->lie_shift)
      p->lie_dma(MemRange{PhysAddr{range->base.value + *dev->lie_shift},
                          range->size});
    if (a.value("verify", true)) {
      Status v = sm_->verify_dma_region(dev->id, other, *range);
      o.detail = v ? "dma verified" : "dma " + std::string(to_string(v.code()));
    }
  }
  auto rid = sm_->connect_enclaves(*ea, *eb, *range);
  if (!rid) {
    fail(o, rid.error());
    return ok_status();
  }
  if (a.contains("as")) {
    auto as = need_string(a, "as");
    if (!as) return as.error();
    regions_[*as] = *rid;
  }
  o.detail += (o.detail.empty() ? "" : "; ") + ("region " + std::to_string(*rid));
  return ok_status();
}

Status Simulation::do_sync_disconnect(const json& a, ActionOutcome& o) {
  auto rid = need_region(a, "region");
  if (!rid) return rid.error();
  if (Status s = sm_->sync_disconnect_enclaves(*rid); !s) fail(o, s.error());
  return ok_status();
}

Status Simulation::do_os_access(const json& a, ActionOutcome& o, bool write) {
  auto data = payload_of(a, write);
  if (!data) return data.error();
  auto range = target(a, write ? data->size() : 32);
  if (!range) return range.error();
  if (write) {
    if (Status s = sm_->checked_write(EntityId::os(), range->base, *data); !s)
      fail(o, s.error());
    return ok_status();
  }
  auto bytes = sm_->checked_read(EntityId::os(), range->base, range->size);
  if (!bytes)
    fail(o, bytes.error());
  else
    o.data = std::move(*bytes);
  return ok_status();
}

Status Simulation::do_enclave_access(const json& a, ActionOutcome& o,
                                     bool write) {
  auto id = need_enclave(a, "enclave");
  if (!id) return id.error();
  json at = a.value("at", json{{"enclave", a["enclave"]},
                               {"offset", kEnclaveAccessOffset}});
  auto data = payload_of(a, write);
  if (!data) return data.error();
  if (write) at["len"] = data->size();
  auto range = target(at, write ? data->size() : 32);
  if (!range) return range.error();

  if (Status s = sm_->enter_enclave(*id); !s) {
    fail(o, s.error());
    return ok_status();
  }
  if (write) {
    if (Status s = sm_->checked_write(*id, range->base, *data); !s)
      fail(o, s.error());
  } else {
    auto bytes = sm_->checked_read(*id, range->base, range->size);
    if (!bytes)
      fail(o, bytes.error());
    else
      o.data = std::move(*bytes);
  }
  (void)sm_->exit_to_os();
  return ok_status();
}

Status Simulation::do_schedule(const json& a, ActionOutcome& o) {
  auto id = need_enclave(a, "enclave");
  if (!id) return id.error();
  if (Status s = runtime_->schedule(*id); !s) fail(o, s.error());
  return ok_status();
}

Status Simulation::do_pause(const json& a, ActionOutcome& o, bool pause) {
  auto id = need_enclave(a, "enclave");
  if (!id) return id.error();
  if (pause) {
    // A timer interrupt preempts the enclave while it runs.
    Status s = sm_->enter_enclave(*id);
    if (s) s = sm_->pause(*id);
    if (!s) {
      fail(o, s.error());
      if (!sm_->current().is_os()) (void)sm_->exit_to_os();
    }
    return ok_status();
  }
  Status s = sm_->resume(*id);
  if (!s)
    fail(o, s.error());
  else
    (void)sm_->exit_to_os();
  return ok_status();
}

// ---------------------------------------------------------------------------
// Enclave runtime actions

Status Simulation::do_ce_attach(const json& a, ActionOutcome& o) {
  auto ce = need_enclave(a, "controller");
  if (!ce) return ce.error();
  auto dev = need_device(a, "peripheral");
  if (!dev) return dev.error();
  auto out = runtime_->ce_attach_peripheral(*ce, (*dev)->id);
  if (!out.ok) {
    o.ok = false;
    o.result = "Fail(" + out.detail + ")";
    o.detail = out.detail;
  }
  return ok_status();
}

Status Simulation::do_ae_call(const json& a, ActionOutcome& o) {
  auto ae = need_enclave(a, "ae");
  if (!ae) return ae.error();
  auto ce = need_enclave(a, "ce");
  if (!ce) return ce.error();
  std::string request = string_or(a, "request", "raw");
  auto data = payload_of(a, false);
  if (!data) return data.error();
  Bytes payload;
  if (request == "read") payload.push_back(std::uint8_t(progmodel::Op::Read));
  else if (request == "submit")
    payload.push_back(std::uint8_t(progmodel::Op::Submit));
  else if (request == "result")
    payload.push_back(std::uint8_t(progmodel::Op::Result));
  else if (request == "frame")
    payload.push_back(std::uint8_t(progmodel::Op::Frame));
  else if (request != "raw")
    return invalid("unknown request " + request);
  append(payload, *data);

  auto reply = runtime_->ae_call(*ae, *ce, payload);
  if (!reply) {
    fail(o, reply.error());
  } else if (reply->error) {
    o.ok = false;
    o.result = std::string(to_string(*reply->error));
    o.detail.assign(reply->payload.begin(), reply->payload.end());
  } else {
    o.data = std::move(reply->payload);
  }
  return ok_status();
}

// ---------------------------------------------------------------------------
// Environment and device actions

Status Simulation::do_env(const json& a, ActionOutcome& o) {
  auto dev = need_device(a, "peripheral");
  if (!dev) return dev.error();
  auto* p = bus_->get((*dev)->id);
  if (a["op"] == "env.set_sensor") {
    auto* sensor = dynamic_cast<peripherals::Sensor*>(p);
    if (!sensor || !a.contains("value") || !a["value"].is_number_integer())
      return invalid("env.set_sensor needs a sensor and an integer value");
    sensor->set_environment(static_cast<std::int16_t>(a["value"].get<int>()));
    return ok_status();
  }
  auto* kb = dynamic_cast<peripherals::Keyboard*>(p);
  if (!kb) return invalid("env.inject_key needs a keyboard");
  json keys = a.contains("keys") ? a["keys"] : json::array({a.value("key", 0)});
  for (const auto& k : keys) {
    auto v = u64_of(k);
    if (!v || *v > 0xff) return invalid("scancodes are bytes");
    kb->inject_key(static_cast<std::uint8_t>(*v));
  }
  o.detail = std::to_string(keys.size()) + " key(s)";
  return ok_status();
}

Status Simulation::do_unplug(const json& a, ActionOutcome& o) {
  auto dev = need_device(a, "peripheral");
  if (!dev) return dev.error();
  if (Status s = sm_->unplug_peripheral((*dev)->id); !s) fail(o, s.error());
  return ok_status();
}

Status Simulation::do_replug(const json& a, ActionOutcome& o) {
  auto dev = need_device(a, "peripheral");
  if (!dev) return dev.error();
  DeviceRecord& rec = **dev;
  rec.spec.firmware = string_or(a, "firmware", rec.spec.firmware);
  rec.spec.version = string_or(a, "version", rec.spec.version);
  rec.spec.manufacturer = string_or(a, "manufacturer", rec.spec.manufacturer);
  ++rec.generation;
  auto kp = provider_->keygen("pie-device/" + rec.spec.name + "/" +
                              std::to_string(rec.generation));
  auto* p = bus_->get(rec.id);
  p->reflash(kp, certify(rec.spec, kp), to_bytes(rec.spec.firmware));
  if (Status s = sm_->replug_peripheral(rec.id, p->firmware_digest(),
                                        kp.public_key);
      !s)
    fail(o, s.error());
  return ok_status();
}

Status Simulation::do_lie_dma(const json& a, ActionOutcome&) {
  auto dev = need_device(a, "peripheral");
  if (!dev) return dev.error();
  auto* p = bus_->get((*dev)->id);
  if (a.contains("shift")) {
    if (!a["shift"].is_number_integer()) return invalid("shift is an integer");
    (*dev)->lie_shift = a["shift"].get<std::int64_t>();
    if (auto n = p->binding().negotiated)
      p->lie_dma(MemRange{PhysAddr{n->base.value + *(*dev)->lie_shift},
                          n->size});
    return ok_status();
  }
  auto base = need_u64(a, "base");
  if (!base) return base.error();
  auto size = need_u64(a, "size");
  if (!size) return size.error();
  p->lie_dma(MemRange{PhysAddr{*base}, *size});
  return ok_status();
}

Status Simulation::do_dma_access(const json& a, ActionOutcome& o, bool write) {
  auto dev = need_device(a, "peripheral");
  if (!dev) return dev.error();
  auto data = payload_of(a, write);
  if (!data) return data.error();
  json at = a.value("at", json::object());
  if (write) at["len"] = data->size();
  auto range = target(at, 32);
  if (!range) return range.error();
  if (write) {
    if (Status s = sm_->peripheral_write((*dev)->id, range->base, *data); !s)
      fail(o, s.error());
    return ok_status();
  }
  auto bytes = sm_->peripheral_read((*dev)->id, range->base, range->size);
  if (!bytes)
    fail(o, bytes.error());
  else
    o.data = std::move(*bytes);
  return ok_status();
}

// ---------------------------------------------------------------------------
// Remote verifier and adversary

attestation::VerificationPolicy Simulation::default_policy(
    const json& a, const std::string& subject) {
  attestation::VerificationPolicy policy;
  monitor::MonitorConfig reference;
  policy.sm = attestation::measure(
      *provider_, to_bytes(string_or(a, "sm_image",
                                     std::string(reference.sm_image.begin(),
                                                 reference.sm_image.end()))),
      {});
  const json expect = a.value("expect", json::object());

  auto [code, config] = expected_.count(subject)
                            ? expected_.at(subject)
                            : std::pair<std::string, std::string>{subject, ""};
  code = string_or(expect, "ae", code);
  config = string_or(expect, "ae_config", config);
  policy.ae = attestation::measure(*provider_, to_bytes(code), to_bytes(config));

  if (expect.contains("ce") && expect["ce"].is_array()) {
    for (const auto& c : expect["ce"])
      if (c.is_string())
        policy.ce.push_back(attestation::measure(
            *provider_, to_bytes(c.get<std::string>()), {}));
  } else {
    for (const auto& [name, rec] : enclaves_) {
      if (rec.kind != monitor::EnclaveKind::Controller) continue;
      const auto& [c, cfg] = expected_.at(name);
      policy.ce.push_back(
          attestation::measure(*provider_, to_bytes(c), to_bytes(cfg)));
    }
  }

  if (string_or(a, "platform_key", "platform") == "rogue")
    policy.platform_public_key = provider_->keygen("pie-rogue-platform").public_key;
  else
    policy.platform_public_key = platform_key_.public_key;

  for (const auto& m : spec_.trusted_manufacturers)
    policy.manufacturer_keys.push_back(manufacturers_.at(m).public_key);

  if (a.contains("firmware_versions") && a["firmware_versions"].is_array()) {
    for (const auto& v : a["firmware_versions"])
      if (v.is_string()) policy.firmware_versions.push_back(v.get<std::string>());
  } else {
    for (const auto& p : spec_.peripherals)
      policy.firmware_versions.push_back(p.version);
  }
  return policy;
}

Status Simulation::do_attest(const json& a, ActionOutcome& o) {
  auto name = need_string(a, "ae");
  if (!name) return name.error();
  auto id = need_enclave(a, "ae");
  if (!id) return id.error();
  std::map<EntityId, EntityId> relay;
  if (a.contains("relay")) {
    if (!a["relay"].is_object()) return invalid("relay must be an object");
    for (const auto& [from, to] : a["relay"].items()) {
      auto f = entity(from);
      auto t = to.is_string() ? entity(to.get<std::string>()) : std::nullopt;
      if (!f || !t) return invalid("relay names unknown enclaves");
      relay[*f] = *t;
    }
  }

  Bytes ephemeral = provider_->random(32);
  Bytes nonce0 = provider_->random(attestation::kNonceSize);
  auto r0 = attestation::attest_enclave(*sm_, *id, nonce0, platform_key_,
                                        runtime_.get());
  if (!r0) {
    fail(o, r0.error());
    return ok_status();
  }
  std::vector<Bytes> reports{r0->encode()};
  std::vector<Bytes> nonces{nonce0};
  for (EntityId cid : r0->connected_ids) {
    if (!cid.is_enclave()) continue;
    Bytes nonce = provider_->random(attestation::kNonceSize);
    EntityId subject = relay.count(cid) ? relay.at(cid) : cid;
    auto r = attestation::attest_enclave(*sm_, subject, nonce, platform_key_,
                                         runtime_.get());
    // The OS cannot produce a report for an enclave that is gone.
    if (!r) continue;
    reports.push_back(r->encode());
    nonces.push_back(nonce);
  }

  auto policy = default_policy(a, *name);
  auto verdict = attestation::verify_platform(
      *provider_, std::span<const Bytes>(reports), policy,
      std::span<const Bytes>(nonces));
  trace_.append("verifier", "verify_platform",
                {{"subject", monitor::to_string(*id)},
                 {"reports", reports.size()},
                 {"detail", verdict.detail}},
                verdict.to_string());
  attest_runs_[*name] = AttestRun{*name, policy, reports};
  if (a.contains("label") && a["label"].is_string())
    attest_runs_[a["label"].get<std::string>()] =
        AttestRun{*name, policy, reports};
  last_reports_ = reports;

  o.verdict = verdict;
  o.result = verdict.to_string();
  o.ok = verdict.accepted;
  o.detail = verdict.detail;
  if (!verdict.accepted) return ok_status();

  // Key agreement bound to this exchange; the attested enclave keeps the
  // result in its own memory.
  Bytes kdf = to_bytes("pie-provision-kdf");
  append(kdf, ephemeral);
  append(kdf, nonce0);
  Digest secret = provider_->hash(kdf);
  sessions_[*name] = VerifierSession{*id, secret};
  const auto* e = sm_->enclave(*id);
  if (sm_->enter_enclave(*id)) {
    (void)sm_->checked_write(
        *id, PhysAddr{e->private_range.end() - kSecretSlot}, secret);
    (void)sm_->exit_to_os();
  }
  return ok_status();
}

Status Simulation::do_provision(const json& a, ActionOutcome& o) {
  auto name = need_string(a, "ae");
  if (!name) return name.error();
  Bytes token = to_bytes(string_or(a, "token", "pie-provisioned-token"));
  auto done = [&](bool recovered, std::string why, json args) {
    o.ok = recovered;
    o.result = recovered ? "recovered" : "failed";
    o.detail = std::move(why);
    trace_.append("verifier", "provision_secret", std::move(args), o.result);
    return ok_status();
  };

  auto it = sessions_.find(*name);
  if (it == sessions_.end())
    return done(false, "no attested session", {{"ae", *name}});
  const VerifierSession& session = it->second;
  Bytes ct = keystream(*provider_, session.secret, token.size());
  for (std::size_t i = 0; i < ct.size(); ++i) ct[i] ^= token[i];
  Digest tag = provision_tag(*provider_, session.secret, ct);
  json args{{"enclave", monitor::to_string(session.subject)},
            {"ciphertext", to_hex(ct)}};

  // Delivered through the OS to whatever enclave now holds the identifier.
  const auto* e = sm_->enclave(session.subject);
  if (!e) return done(false, "no enclave with that identifier", args);
  if (Status s = sm_->enter_enclave(session.subject); !s)
    return done(false, "enclave cannot run", args);
  auto held = sm_->checked_read(
      session.subject, PhysAddr{e->private_range.end() - kSecretSlot},
      kSecretSlot);
  (void)sm_->exit_to_os();
  if (!held) return done(false, "enclave cannot read its key slot", args);
  Digest held_secret{};
  std::copy(held->begin(), held->end(), held_secret.begin());
  if (provision_tag(*provider_, held_secret, ct) != tag)
    return done(false, "enclave does not hold the shared secret", args);
  Bytes plain = keystream(*provider_, held_secret, ct.size());
  for (std::size_t i = 0; i < plain.size(); ++i) plain[i] ^= ct[i];
  o.data = plain;
  return done(plain == token, plain == token ? "" : "token garbled", args);
}

Status Simulation::do_relaunch(const json& a, ActionOutcome& o) {
  auto name = need_string(a, "enclave");
  if (!name) return name.error();
  auto it = enclaves_.find(*name);
  if (it == enclaves_.end()) return invalid("unknown enclave " + *name);
  EnclaveRecord old = it->second;
  if (sm_->destroy_enclave(old.id)) runtime_->forget(old.id);

  std::string code = string_or(a, "code", old.code);
  std::string config = string_or(a, "config", old.config);
  std::string as = string_or(a, "as", *name);
  auto range = allocate(old.range.size);
  if (!range) {
    fail(o, range.error());
    return ok_status();
  }
  auto id = sm_->create_enclave(to_bytes(code), to_bytes(config), *range,
                                old.kind);
  if (!id) {
    fail(o, id.error());
    return ok_status();
  }
  enclaves_[as] = EnclaveRecord{*id, old.kind, code, config, *range};
  expected_.try_emplace(as, code, config);
  bool same = *id == old.id;
  o.detail = same ? "same-id" : "new-id";
  trace_.append("adversary", "relaunch_with_same_id",
                {{"old", monitor::to_string(old.id)},
                 {"new", monitor::to_string(*id)}},
                o.detail);
  return ok_status();
}

Status Simulation::do_replay(const json& a, ActionOutcome& o) {
  auto from = need_string(a, "from");
  if (!from) return from.error();
  auto it = attest_runs_.find(*from);
  if (it == attest_runs_.end()) return invalid("no attestation run " + *from);
  const AttestRun& run = it->second;
  std::vector<Bytes> nonces;
  for (std::size_t i = 0; i < run.reports.size(); ++i)
    nonces.push_back(provider_->random(attestation::kNonceSize));
  auto verdict = attestation::verify_platform(
      *provider_, std::span<const Bytes>(run.reports), run.policy,
      std::span<const Bytes>(nonces));
  trace_.append("verifier", "verify_platform",
                {{"subject", run.subject},
                 {"reports", run.reports.size()},
                 {"replayed", true},
                 {"detail", verdict.detail}},
                verdict.to_string());
  o.verdict = verdict;
  o.result = verdict.to_string();
  o.ok = verdict.accepted;
  o.detail = verdict.detail;
  return ok_status();
}

}  // namespace pie::harness
