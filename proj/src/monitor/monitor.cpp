// Copyright PIE simulator contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#include "pie/monitor/monitor.hpp"

#include <algorithm>
#include <stdexcept>

#include "pie/crypto/canonical.hpp"

namespace pie::monitor {

namespace {

using nlohmann::json;
using pmp::Perms;
using pmp::Privilege;

constexpr std::string_view kSmTag = "SM";
constexpr std::string_view kBackgroundTag = "OS-background";

std::string enclave_tag(EntityId id) { return "enclave:" + std::to_string(id.id); }
std::string region_tag(RegionId id) { return "region:" + std::to_string(id); }

json range_json(const MemRange& r) {
  return json{{"base", platform::to_string(r.base)}, {"size", r.size}};
}

}  // namespace

Monitor::Monitor(const platform::DeviceTree& device_tree,
                 platform::PhysicalMemory& memory,
                 crypto::CryptoProvider& provider, MonitorConfig config,
                 Trace* trace)
    : device_tree_(device_tree),
      memory_(memory),
      provider_(provider),
      config_(std::move(config)),
      trace_(trace),
      pmp_(config_.max_entries),
      background_index_(config_.max_entries - 1) {
  if (config_.max_entries < 3)
    throw std::invalid_argument("the monitor needs at least 3 PMP entries");
  if (!config_.sm_range.valid() || !device_tree_.in_dram(config_.sm_range))
    throw std::invalid_argument("monitor memory must lie in dram");
  if (!memory_.total_span().contains(device_tree_.span()))
    throw std::invalid_argument("physical memory does not cover the platform");

  pmp_.install_entry(Privilege::Machine,
                     {0, config_.sm_range, Perms::none(), std::string(kSmTag)})
      .value();
  pmp_.install_entry(Privilege::Machine,
                     {background_index_, memory_.total_span(), Perms::rwx(),
                      std::string(kBackgroundTag)})
      .value();
  sm_measurement_ = attestation::measure(provider_, config_.sm_image, {});
  record("SM", "boot",
         json{{"max_entries", config_.max_entries},
              {"id_policy", to_string(config_.id_policy)},
              {"sm_range", range_json(config_.sm_range)}},
         ok_status());
}

// ---------------------------------------------------------------------------
// Bookkeeping helpers

void Monitor::record(std::string actor, std::string op, json args,
                     const Status& status) {
  if (!trace_) return;
  trace_->append(std::move(actor), std::move(op), std::move(args),
                 status ? "ok" : std::string(to_string(status.code())));
}

EnclaveDescriptor* Monitor::find_enclave(EntityId id) {
  if (!id.is_enclave()) return nullptr;
  auto it = enclaves_.find(id.id);
  return it == enclaves_.end() ? nullptr : &it->second;
}

const EnclaveDescriptor* Monitor::enclave(EntityId id) const {
  if (!id.is_enclave()) return nullptr;
  auto it = enclaves_.find(id.id);
  return it == enclaves_.end() ? nullptr : &it->second;
}

PeripheralRecord* Monitor::find_peripheral(EntityId id) {
  if (!id.is_peripheral()) return nullptr;
  auto it = peripherals_.find(id.id);
  return it == peripherals_.end() ? nullptr : &it->second;
}

const PeripheralRecord* Monitor::peripheral(EntityId id) const {
  if (!id.is_peripheral()) return nullptr;
  auto it = peripherals_.find(id.id);
  return it == peripherals_.end() ? nullptr : &it->second;
}

const SharedRegion* Monitor::region(RegionId id) const {
  auto it = regions_.find(id);
  return it == regions_.end() ? nullptr : &it->second;
}

bool Monitor::is_live(EntityId id) const {
  if (id.is_enclave()) return enclaves_.count(id.id) != 0;
  if (const auto* p = peripheral(id)) return p->attached;
  return false;
}

std::vector<EntityId> Monitor::live_enclaves() const {
  std::vector<EntityId> out;
  for (const auto& [id, e] : enclaves_) out.push_back(e.id);
  return out;
}

std::vector<RegionId> Monitor::live_regions() const {
  std::vector<RegionId> out;
  for (const auto& [id, r] : regions_)
    if (r.live()) out.push_back(id);
  return out;
}

std::optional<RegionId> Monitor::region_between(EntityId a,
                                                EntityId b) const {
  for (const auto& [id, r] : regions_)
    if (r.status == RegionStatus::Shared &&
        ((r.a == a && r.b == b) || (r.a == b && r.b == a)))
      return id;
  return std::nullopt;
}

std::vector<MemRange> Monitor::protected_ranges() const {
  std::vector<MemRange> out{config_.sm_range};
  for (const auto& [id, e] : enclaves_) out.push_back(e.private_range);
  for (const auto& [id, r] : regions_)
    if (r.live()) out.push_back(r.range);
  return out;
}

std::uint64_t Monitor::assign_identifier() {
  if (config_.id_policy == IdPolicy::Monotonic) return next_enclave_id_++;
  std::uint64_t id = 1;
  while (enclaves_.count(id)) ++id;
  return id;
}

pmp::Privilege Monitor::privilege_of(EntityId ctx) const {
  return ctx.is_os() ? Privilege::Supervisor : Privilege::User;
}

Status Monitor::check_placement(const MemRange& range,
                                bool allow_mmio) const {
  if (!allow_mmio && !device_tree_.in_dram(range))
    return make_error(Errc::OutOfSpan, platform::to_string(range) +
                                           " is not inside dram");
  if (platform::range_overlaps(range, config_.sm_range))
    return make_error(Errc::OverlapError, "overlaps monitor memory");
  for (const auto& [id, e] : enclaves_)
    if (platform::range_overlaps(range, e.private_range))
      return make_error(Errc::OverlapError,
                        "overlaps private memory of " + to_string(e.id));
  for (const auto& [id, r] : regions_)
    if (r.live() && platform::range_overlaps(range, r.range))
      return make_error(Errc::OverlapError,
                        "overlaps region " + std::to_string(id));
  return ok_status();
}

void Monitor::apply_view(EntityId ctx) {
  for (const auto& [id, e] : enclaves_)
    pmp_.set_perms(Privilege::Machine, e.pmp_index,
                   ctx == e.id ? Perms::rwx() : Perms::none())
        .value();
  for (const auto& [id, r] : regions_) {
    if (!r.pmp_index) continue;
    bool party = ctx.is_enclave() && r.has_party(ctx);
    pmp_.set_perms(Privilege::Machine, *r.pmp_index,
                   party ? Perms::rw() : Perms::none())
        .value();
  }
  pmp_.set_perms(Privilege::Machine, background_index_,
                 ctx.is_os() ? Perms::rwx() : Perms::none())
      .value();
}

void Monitor::queue(EntityId target, Notification n) {
  if (auto* e = find_enclave(target)) {
    e->pending_events.push_back(n);
    record("SM", "notify",
           json{{"target", to_string(target)},
                {"kind", to_string(n.kind)},
                {"region", n.region},
                {"peer", to_string(n.peer)}},
           ok_status());
  }
}

void Monitor::drop_connection(EntityId party, RegionId region) {
  if (auto* e = find_enclave(party)) {
    std::erase_if(e->connections,
                  [&](const Connection& c) { return c.region == region; });
  }
}

void Monitor::free_region(SharedRegion& region) {
  memory_.zero_fill(region.range).value();
  record("SM", "zero_fill", json{{"range", range_json(region.range)}},
         ok_status());
  if (region.pmp_index) {
    pmp_.clear_entry(Privilege::Machine, *region.pmp_index).value();
    region.pmp_index.reset();
  }
  region.status = RegionStatus::Freed;
}

// ---------------------------------------------------------------------------
// Enclave life cycle

Result<EntityId> Monitor::create_enclave(ByteView code, ByteView config,
                                         MemRange private_range,
                                         EnclaveKind kind) {
  json args{{"range", range_json(private_range)},
            {"kind", to_string(kind)},
            {"code_len", code.size()}};
  auto fail = [&](Error e) -> Result<EntityId> {
    record("OS", "create_enclave", args, e);
    return e;
  };
  if (!private_range.valid())
    return fail(make_error(Errc::InvalidArgument, "malformed range"));
  if (auto s = check_placement(private_range, false); !s) return fail(s.error());

  crypto::CanonicalWriter image;
  image.field(code).field(config);
  if (image.bytes().size() > private_range.size)
    return fail(make_error(Errc::InvalidArgument, "image larger than range"));

  auto index = pmp_.lowest_free_index(1, background_index_ - 1);
  if (!index)
    return fail(make_error(Errc::NoFreeEntry, "no PMP entry for enclave"));

  EntityId id = EntityId::enclave(assign_identifier());
  pmp_.install_entry(Privilege::Machine,
                     {*index, private_range, Perms::none(), enclave_tag(id)})
      .value();
  memory_.zero_fill(private_range).value();
  record("SM", "zero_fill", json{{"range", range_json(private_range)}},
         ok_status());
  memory_.raw_write(private_range.base, image.bytes()).value();

  EnclaveDescriptor d;
  d.id = id;
  d.kind = kind;
  d.private_range = private_range;
  d.measurement = attestation::measure(provider_, code, config);
  d.config_digest = provider_.hash(config);
  d.pmp_index = *index;
  enclaves_.emplace(id.id, std::move(d));
  apply_view(current_);

  args["id"] = to_string(id);
  args["pmp_index"] = *index;
  record("OS", "create_enclave", args, ok_status());
  return id;
}

Status Monitor::destroy_enclave(EntityId id) {
  json args{{"id", to_string(id)}};
  auto* e = find_enclave(id);
  if (!e) {
    Status s = make_error(Errc::UnknownEnclave, to_string(id));
    record("OS", "destroy_enclave", args, s);
    return s;
  }
  if (current_ == id) current_ = EntityId::os();

  for (auto& [rid, r] : regions_) {
    if (!r.has_party(id)) continue;
    if (r.status == RegionStatus::Shared) {
      EntityId survivor = r.peer_of(id);
      r.status = RegionStatus::SoleOwned;
      r.a = survivor;
      r.b = id;
      record("SM", "async_disconnect_enclaves",
             json{{"region", rid}, {"dead", to_string(id)},
                  {"survivor", to_string(survivor)}},
             ok_status());
      if (survivor.is_enclave()) {
        queue(survivor, {NotificationKind::PeerDestroyed, rid, id});
      } else if (auto* p = find_peripheral(survivor); p && p->port) {
        p->port->on_peer_lost(rid, id);
      }
    } else {
      free_region(r);
      record("SM", "release_sole_owned", json{{"region", rid}}, ok_status());
    }
  }

  memory_.zero_fill(e->private_range).value();
  record("SM", "zero_fill", json{{"range", range_json(e->private_range)}},
         ok_status());
  pmp_.clear_entry(Privilege::Machine, e->pmp_index).value();
  enclaves_.erase(id.id);
  for (auto it = verified_dma_.begin(); it != verified_dma_.end();)
    it = std::get<1>(*it) == id ? verified_dma_.erase(it) : std::next(it);
  apply_view(current_);
  record("OS", "destroy_enclave", args, ok_status());
  return ok_status();
}

Status Monitor::enter_enclave(EntityId id) {
  json args{{"id", to_string(id)}};
  Status s = ok_status();
  auto* e = find_enclave(id);
  if (!e) {
    s = make_error(Errc::UnknownEnclave, to_string(id));
  } else if (e->state != EnclaveState::Idle &&
             e->state != EnclaveState::Paused) {
    s = make_error(Errc::BadState, "enclave is " +
                                       std::string(to_string(e->state)));
  } else if (!current_.is_os()) {
    s = make_error(Errc::BadState, to_string(current_) + " is running");
  }
  if (!s) {
    record("OS", "enter_enclave", args, s);
    return s;
  }
  e->state = EnclaveState::Running;
  current_ = id;
  args["delivered"] = e->pending_events.size();
  while (!e->pending_events.empty()) {
    e->delivered.push_back(e->pending_events.front());
    e->pending_events.pop_front();
  }
  apply_view(id);
  record("OS", "enter_enclave", args, s);
  return s;
}

Status Monitor::exit_to_os() {
  json args{{"from", to_string(current_)}};
  auto* e = find_enclave(current_);
  if (!e) {
    Status s = make_error(Errc::BadState, "no enclave is running");
    record("SM", "exit_to_os", args, s);
    return s;
  }
  e->state = EnclaveState::Idle;
  current_ = EntityId::os();
  apply_view(current_);
  record("SM", "exit_to_os", args, ok_status());
  return ok_status();
}

Status Monitor::pause(EntityId id) {
  json args{{"id", to_string(id)}};
  Status s = ok_status();
  auto* e = find_enclave(id);
  if (!e)
    s = make_error(Errc::UnknownEnclave, to_string(id));
  else if (e->state != EnclaveState::Running)
    s = make_error(Errc::BadState, "enclave not running");
  if (s) {
    e->state = EnclaveState::Paused;
    current_ = EntityId::os();
    apply_view(current_);
  }
  record("OS", "pause", args, s);
  return s;
}

Status Monitor::resume(EntityId id) {
  auto* e = find_enclave(id);
  if (e && e->state != EnclaveState::Paused) {
    Status s = make_error(Errc::BadState, "enclave not paused");
    record("OS", "resume", json{{"id", to_string(id)}}, s);
    return s;
  }
  return enter_enclave(id);
}

// ---------------------------------------------------------------------------
// Peripherals

Result<EntityId> Monitor::attach_peripheral(PeripheralInfo info,
                                            PeripheralPort* port) {
  json args{{"name", info.name}, {"dma", info.dma_capable}};
  if (info.mmio_range) {
    const auto* node = device_tree_.mmio_node_overlapping(*info.mmio_range);
    if (!node || !node->range || *node->range != *info.mmio_range) {
      Status s = make_error(Errc::Mismatch,
                            "MMIO range is not a device-tree node");
      record("harness", "attach_peripheral", args, s);
      return s.error();
    }
  }
  EntityId id = EntityId::peripheral(next_peripheral_id_++);
  peripherals_.emplace(id.id, PeripheralRecord{id, std::move(info), port,
                                               true, {}});
  args["id"] = to_string(id);
  record("harness", "attach_peripheral", args, ok_status());
  return id;
}

Status Monitor::unplug_peripheral(EntityId peripheral) {
  json args{{"id", to_string(peripheral)}};
  auto* p = find_peripheral(peripheral);
  if (!p || !p->attached) {
    Status s = make_error(Errc::UnknownPeripheral, to_string(peripheral));
    record("harness", "unplug", args, s);
    return s;
  }
  p->attached = false;
  record("harness", "unplug", args, ok_status());
  for (auto& [rid, r] : regions_) {
    if (r.status == RegionStatus::Shared && r.has_party(peripheral))
      async_disconnect_enclaves(rid, peripheral).value();
  }
  for (auto it = verified_dma_.begin(); it != verified_dma_.end();)
    it = std::get<0>(*it) == peripheral ? verified_dma_.erase(it)
                                        : std::next(it);
  return ok_status();
}

Status Monitor::replug_peripheral(EntityId peripheral, Digest firmware_digest,
                                  Bytes public_key) {
  json args{{"id", to_string(peripheral)}};
  auto* p = find_peripheral(peripheral);
  if (!p || p->attached) {
    Status s = make_error(Errc::UnknownPeripheral,
                          to_string(peripheral) + " is not unplugged");
    record("harness", "replug", args, s);
    return s;
  }
  bool changed = firmware_digest != p->info.firmware_digest;
  p->attached = true;
  p->info.firmware_digest = firmware_digest;
  p->info.public_key = std::move(public_key);
  args["firmware_changed"] = changed;
  record("harness", "replug", args, ok_status());
  auto kind = changed ? NotificationKind::PeripheralFirmwareChanged
                      : NotificationKind::PeripheralReattached;
  for (EntityId e : p->bound_enclaves) {
    RegionId last = 0;
    for (const auto& [rid, r] : regions_)
      if ((r.a == e && r.b == peripheral) || (r.a == peripheral && r.b == e))
        last = rid;
    queue(e, {kind, last, peripheral});
  }
  return ok_status();
}

// ---------------------------------------------------------------------------
// Shared memory

Result<RegionId> Monitor::connect_enclaves(EntityId a, EntityId b,
                                           MemRange range) {
  json args{{"a", to_string(a)}, {"b", to_string(b)},
            {"range", range_json(range)}};
  auto fail = [&](Error e) -> Result<RegionId> {
    record("OS", "connect_enclaves", args, e);
    return e;
  };
  if (a == b || a.is_os() || b.is_os() ||
      (a.is_peripheral() && b.is_peripheral()))
    return fail(make_error(Errc::InvalidArgument, "bad party pair"));
  for (EntityId x : {a, b}) {
    if (!is_live(x))
      return fail(make_error(x.is_enclave() ? Errc::UnknownEnclave
                                            : Errc::UnknownPeripheral,
                             to_string(x)));
  }
  for (EntityId x : {a, b}) {
    for (const auto& [rid, r] : regions_)
      if (r.status == RegionStatus::SoleOwned && r.a == x)
        return fail(make_error(Errc::MustSyncDisconnectFirst,
                               to_string(x) + " still owns region " +
                                   std::to_string(rid)));
    if (const auto* e = enclave(x)) {
      for (const auto& n : e->pending_events)
        if (n.kind == NotificationKind::SyncDisconnected)
          return fail(make_error(Errc::MustSyncDisconnectFirst,
                                 to_string(x) +
                                     " has not observed its disconnect"));
    }
  }
  if (!range.valid())
    return fail(make_error(Errc::InvalidArgument, "malformed range"));
  for (const auto& [rid, r] : regions_)
    if (r.live() && r.range == range)
      return fail(make_error(Errc::ThirdParty,
                             "range already bound by region " +
                                 std::to_string(rid)));

  EntityId periph = a.is_peripheral() ? a : b;
  EntityId encl = a.is_peripheral() ? b : a;
  bool mmio = false;
  if (periph.is_peripheral()) {
    const auto* p = peripheral(periph);
    if (p->info.dma_capable) {
      if (!verified_dma_.count({periph, encl, range}))
        return fail(make_error(Errc::Mismatch,
                               "DMA range not verified with the device"));
    } else {
      if (!p->info.mmio_range || *p->info.mmio_range != range)
        return fail(make_error(Errc::Mismatch,
                               "range differs from the device-tree node"));
      mmio = true;
    }
  }
  if (auto s = check_placement(range, mmio); !s) return fail(s.error());
  if (!mmio && device_tree_.mmio_node_overlapping(range))
    return fail(make_error(Errc::OverlapError, "overlaps an MMIO node"));

  auto index = pmp_.lowest_free_index(1, background_index_ - 1);
  if (!index)
    return fail(make_error(Errc::NoFreeEntry, "no PMP entry for region"));

  RegionId id = next_region_id_++;
  pmp_.install_entry(Privilege::Machine,
                     {*index, range, Perms::none(), region_tag(id)})
      .value();
  if (!mmio) {
    memory_.zero_fill(range).value();
    record("SM", "zero_fill", json{{"range", range_json(range)}},
           ok_status());
  }
  regions_.emplace(id, SharedRegion{id, range, RegionStatus::Shared, a, b,
                                    *index});
  for (EntityId x : {a, b}) {
    if (auto* e = find_enclave(x)) {
      e->connections.push_back({x == a ? b : a, id});
    }
  }
  if (auto* p = find_peripheral(periph)) {
    p->bound_enclaves.insert(encl);
    verified_dma_.erase({periph, encl, range});
  }
  apply_view(current_);
  args["region"] = id;
  args["pmp_index"] = *index;
  record("OS", "connect_enclaves", args, ok_status());
  return id;
}

Status Monitor::async_disconnect_enclaves(RegionId region, EntityId dead) {
  json args{{"region", region}, {"dead", to_string(dead)}};
  auto it = regions_.find(region);
  Status s = ok_status();
  if (it == regions_.end() || it->second.status != RegionStatus::Shared ||
      !it->second.has_party(dead))
    s = make_error(Errc::BadRegionState, "region is not shared with party");
  else if (is_live(dead))
    s = make_error(Errc::BadState, to_string(dead) + " is still alive");
  if (!s) {
    record("SM", "async_disconnect_enclaves", args, s);
    return s;
  }
  SharedRegion& r = it->second;
  EntityId survivor = r.peer_of(dead);
  r.status = RegionStatus::SoleOwned;
  r.a = survivor;
  r.b = dead;
  apply_view(current_);
  args["survivor"] = to_string(survivor);
  record("SM", "async_disconnect_enclaves", args, ok_status());
  if (survivor.is_enclave()) {
    queue(survivor, {NotificationKind::PeerDestroyed, region, dead});
  } else if (auto* p = find_peripheral(survivor); p && p->port) {
    p->port->on_peer_lost(region, dead);
  }
  return ok_status();
}

Status Monitor::sync_disconnect_enclaves(RegionId region) {
  json args{{"region", region}};
  auto it = regions_.find(region);
  if (it == regions_.end() || !it->second.live()) {
    Status s = make_error(Errc::BadRegionState, "region is not live");
    record("OS", "sync_disconnect_enclaves", args, s);
    return s;
  }
  SharedRegion& r = it->second;
  std::vector<std::pair<EntityId, EntityId>> survivors;  // (party, peer)
  if (r.status == RegionStatus::Shared) {
    survivors = {{r.a, r.b}, {r.b, r.a}};
  } else {
    survivors = {{r.a, r.b}};
  }
  free_region(r);
  record("OS", "sync_disconnect_enclaves", args, ok_status());
  for (auto [party, peer] : survivors) {
    drop_connection(party, region);
    if (party.is_enclave()) {
      queue(party, {NotificationKind::SyncDisconnected, region, peer});
    } else if (auto* p = find_peripheral(party); p && p->port) {
      p->port->on_region_freed(region);
    }
  }
  apply_view(current_);
  return ok_status();
}

Status Monitor::verify_dma_region(EntityId peripheral_id, EntityId enclave_id,
                                  MemRange claimed) {
  json args{{"peripheral", to_string(peripheral_id)},
            {"enclave", to_string(enclave_id)},
            {"claimed", range_json(claimed)}};
  auto done = [&](Status s) {
    record("SM", "verify_dma_region", args, s);
    return s;
  };
  auto* p = find_peripheral(peripheral_id);
  if (!p || !p->attached)
    return done(make_error(Errc::UnknownPeripheral, to_string(peripheral_id)));
  if (!p->info.dma_capable || !p->port)
    return done(make_error(Errc::NotDmaCapable, p->info.name));
  if (!find_enclave(enclave_id))
    return done(make_error(Errc::UnknownEnclave, to_string(enclave_id)));

  Bytes reply = p->port->query_dma_config();
  if (reply.size() != 16 + crypto::kSignatureSize)
    return done(make_error(Errc::SignatureInvalid, "malformed DMA config"));
  ByteView body(reply.data(), 16);
  ByteView sig(reply.data() + 16, crypto::kSignatureSize);
  if (!provider_.verify(p->info.public_key, body, sig))
    return done(make_error(Errc::SignatureInvalid, "DMA config signature"));
  MemRange reported{PhysAddr{get_be64(body.first(8))},
                    get_be64(body.subspan(8, 8))};
  args["reported"] = range_json(reported);
  if (reported != claimed)
    return done(make_error(Errc::Mismatch, "device reports " +
                                               platform::to_string(reported)));
  verified_dma_.insert({peripheral_id, enclave_id, claimed});
  return done(ok_status());
}

// ---------------------------------------------------------------------------
// Memory access

Result<Bytes> Monitor::checked_read(EntityId ctx, PhysAddr addr,
                                    std::uint64_t len) {
  json args{{"ctx", to_string(ctx)}, {"addr", platform::to_string(addr)},
            {"len", len}, {"kind", "read"}};
  auto fail = [&](Error e) -> Result<Bytes> {
    record(to_string(ctx), "checked_read", args, e);
    return e;
  };
  if (ctx.is_peripheral() || len == 0)
    return fail(make_error(Errc::InvalidArgument, "bad context or length"));
  if (ctx != current_)
    return fail(make_error(Errc::BadState, to_string(current_) + " runs"));
  auto d = pmp::check_access(pmp_, privilege_of(ctx), addr, len,
                             pmp::AccessKind::Read);
  args["verdict"] = d.allowed ? "allow" : "deny";
  args["index"] = d.index ? json(*d.index) : json(nullptr);
  if (!d.allowed) return fail(make_error(Errc::AccessFault,
                                         platform::to_string(addr)));
  auto bytes = memory_.raw_read(addr, len);
  if (!bytes) return fail(bytes.error());
  args["data"] = to_hex(*bytes);
  record(to_string(ctx), "checked_read", args, ok_status());
  return bytes;
}

Status Monitor::checked_write(EntityId ctx, PhysAddr addr, ByteView bytes) {
  json args{{"ctx", to_string(ctx)}, {"addr", platform::to_string(addr)},
            {"len", bytes.size()}, {"kind", "write"},
            {"data", to_hex(bytes)}};
  auto done = [&](Status s) {
    record(to_string(ctx), "checked_write", args, s);
    return s;
  };
  if (ctx.is_peripheral() || bytes.empty())
    return done(make_error(Errc::InvalidArgument, "bad context or length"));
  if (ctx != current_)
    return done(make_error(Errc::BadState, to_string(current_) + " runs"));
  auto d = pmp::check_access(pmp_, privilege_of(ctx), addr, bytes.size(),
                             pmp::AccessKind::Write);
  args["verdict"] = d.allowed ? "allow" : "deny";
  args["index"] = d.index ? json(*d.index) : json(nullptr);
  if (!d.allowed)
    return done(make_error(Errc::AccessFault, platform::to_string(addr)));
  return done(memory_.raw_write(addr, bytes));
}

Result<Bytes> Monitor::peripheral_read(EntityId peripheral_id, PhysAddr addr,
                                       std::uint64_t len) {
  json args{{"addr", platform::to_string(addr)}, {"len", len}};
  const auto* p = peripheral(peripheral_id);
  bool ok = p && p->attached && len > 0 &&
            std::any_of(regions_.begin(), regions_.end(), [&](const auto& kv) {
              return kv.second.has_party(peripheral_id) &&
                     kv.second.range.contains(addr, len);
            });
  if (!ok) {
    Status s = make_error(Errc::AccessFault, "device access outside binding");
    record(to_string(peripheral_id), "dma_read", args, s);
    return s.error();
  }
  auto bytes = memory_.raw_read(addr, len);
  if (bytes) args["data"] = to_hex(*bytes);
  record(to_string(peripheral_id), "dma_read", args,
         bytes ? ok_status() : Status(bytes.error()));
  return bytes;
}

Status Monitor::peripheral_write(EntityId peripheral_id, PhysAddr addr,
                                 ByteView bytes) {
  json args{{"addr", platform::to_string(addr)}, {"len", bytes.size()},
            {"data", to_hex(bytes)}};
  const auto* p = peripheral(peripheral_id);
  bool ok = p && p->attached && !bytes.empty() &&
            std::any_of(regions_.begin(), regions_.end(), [&](const auto& kv) {
              return kv.second.has_party(peripheral_id) &&
                     kv.second.range.contains(addr, bytes.size());
            });
  Status s = ok ? memory_.raw_write(addr, bytes)
                : Status(make_error(Errc::AccessFault,
                                    "device access outside binding"));
  record(to_string(peripheral_id), "dma_write", args, s);
  return s;
}

Result<Bytes> Monitor::sm_read(PhysAddr addr, std::uint64_t len) const {
  return memory_.raw_read(addr, len);
}

Status Monitor::notify_connected(EntityId from, NotificationKind kind,
                                 EntityId about) {
  json args{{"from", to_string(from)}, {"kind", to_string(kind)},
            {"about", to_string(about)}};
  const auto* e = enclave(from);
  if (!e || current_ != from) {
    Status s = make_error(Errc::BadState, "caller is not the running enclave");
    record(to_string(from), "notify_connected", args, s);
    return s;
  }
  record(to_string(from), "notify_connected", args, ok_status());
  auto connections = e->connections;
  for (const auto& c : connections) {
    const auto* r = region(c.region);
    if (r && r->status == RegionStatus::Shared && c.peer.is_enclave())
      queue(c.peer, {kind, c.region, about});
  }
  return ok_status();
}

std::vector<Notification> Monitor::take_delivered(EntityId id) {
  auto* e = find_enclave(id);
  if (!e) return {};
  return std::exchange(e->delivered, {});
}

// ---------------------------------------------------------------------------
// Invariants

Status Monitor::check_invariants() const {
  auto broken = [](std::string what) {
    return Status(make_error(Errc::BadState, "invariant: " + what));
  };

  std::vector<std::pair<std::string, MemRange>> owned{
      {"SM", config_.sm_range}};
  std::size_t running = 0;
  for (const auto& [id, e] : enclaves_) {
    owned.emplace_back(to_string(e.id), e.private_range);
    if (e.state == EnclaveState::Running) {
      ++running;
      if (current_ != e.id) return broken("running enclave is not current");
    }
    const auto& entry = pmp_.entry(e.pmp_index);
    if (!entry || entry->tag != enclave_tag(e.id) ||
        entry->range != e.private_range)
      return broken("enclave PMP entry");
    for (const auto& c : e.connections) {
      const auto* r = region(c.region);
      if (!r || !r->has_party(e.id)) return broken("dangling connection");
    }
  }
  if (running > 1) return broken("more than one running enclave");
  if (!current_.is_os() && running != 1) return broken("current not running");

  std::size_t live = 0;
  for (const auto& [id, r] : regions_) {
    if (!r.live()) {
      if (r.pmp_index) return broken("freed region holds a PMP entry");
      continue;
    }
    ++live;
    if (r.status == RegionStatus::Shared && r.a == r.b)
      return broken("region shared with itself");
    owned.emplace_back("region:" + std::to_string(id), r.range);
    if (!r.pmp_index) return broken("live region without PMP entry");
    const auto& entry = pmp_.entry(*r.pmp_index);
    if (!entry || entry->tag != region_tag(id) || entry->range != r.range)
      return broken("region PMP entry");
    for (EntityId party : {r.a, r.b}) {
      if (!r.has_party(party) || !party.is_enclave()) continue;
      const auto* e = enclave(party);
      if (!e) return broken("region party is dead");
      bool listed = std::any_of(
          e->connections.begin(), e->connections.end(),
          [&](const Connection& c) { return c.region == id; });
      if (!listed) return broken("region missing from connection set");
    }
  }
  for (std::size_t i = 0; i < owned.size(); ++i)
    for (std::size_t j = i + 1; j < owned.size(); ++j)
      if (platform::range_overlaps(owned[i].second, owned[j].second))
        return broken(owned[i].first + " overlaps " + owned[j].first);

  if (pmp_.free_entry_count() !=
      pmp_.max_entries() - (2 + enclaves_.size() + live))
    return broken("PMP entry accounting");
  return ok_status();
}

}  // namespace pie::monitor
