// Copyright PIE simulator contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#include "pie/pmp/pmp.hpp"

#include <stdexcept>

namespace pie::pmp {

std::string_view to_string(AccessKind kind) {
  switch (kind) {
    case AccessKind::Read: return "read";
    case AccessKind::Write: return "write";
    case AccessKind::Execute: return "execute";
  }
  return "?";
}

std::string_view to_string(Privilege priv) {
  switch (priv) {
    case Privilege::Machine: return "M";
    case Privilege::Supervisor: return "S";
    case Privilege::User: return "U";
  }
  return "?";
}

std::string to_string(Perms perms) {
  std::string s = "---";
  if (perms.read) s[0] = 'r';
  if (perms.write) s[1] = 'w';
  if (perms.execute) s[2] = 'x';
  return s;
}

PmpConfig::PmpConfig(std::size_t max_entries) {
  if (max_entries == 0 || max_entries > 64)
    throw std::invalid_argument("PMP table size must be in [1, 64]");
  entries_.resize(max_entries);
}

Status PmpConfig::install_entry(Privilege caller, PmpEntry entry) {
  if (caller != Privilege::Machine)
    return make_error(Errc::NotMachineMode, "install_entry");
  if (entry.index >= entries_.size())
    return make_error(Errc::NoFreeEntry,
                      "index " + std::to_string(entry.index) + " of " +
                          std::to_string(entries_.size()));
  if (!entry.range.valid())
    return make_error(Errc::InvalidArgument, "malformed PMP range");
  auto& slot = entries_[entry.index];
  if (slot && slot->tag != entry.tag)
    return make_error(Errc::NoFreeEntry, "index " +
                                             std::to_string(entry.index) +
                                             " held by " + slot->tag);
  audit_.push_back({AuditRecord::Op::Install, entry.index, caller, entry.tag});
  slot = std::move(entry);
  return ok_status();
}

Status PmpConfig::clear_entry(Privilege caller, std::size_t index) {
  if (caller != Privilege::Machine)
    return make_error(Errc::NotMachineMode, "clear_entry");
  if (index >= entries_.size())
    return make_error(Errc::InvalidArgument, "index out of range");
  auto& slot = entries_[index];
  if (!slot) return ok_status();
  audit_.push_back({AuditRecord::Op::Clear, index, caller, slot->tag});
  slot.reset();
  return ok_status();
}

Status PmpConfig::set_perms(Privilege caller, std::size_t index,
                            Perms perms) {
  if (caller != Privilege::Machine)
    return make_error(Errc::NotMachineMode, "set_perms");
  if (index >= entries_.size() || !entries_[index])
    return make_error(Errc::InvalidArgument, "no entry at index");
  if (entries_[index]->perms == perms) return ok_status();
  audit_.push_back(
      {AuditRecord::Op::SetPerms, index, caller, entries_[index]->tag});
  entries_[index]->perms = perms;
  return ok_status();
}

std::size_t PmpConfig::free_entry_count() const {
  std::size_t used = 0;
  for (const auto& e : entries_)
    if (e) ++used;
  return entries_.size() - used;
}

std::optional<std::size_t> PmpConfig::lowest_free_index(
    std::size_t first, std::size_t last) const {
  for (std::size_t i = first; i <= last && i < entries_.size(); ++i)
    if (!entries_[i]) return i;
  return std::nullopt;
}

Decision check_access(const PmpConfig& cfg, Privilege priv, PhysAddr addr,
                      std::uint64_t len, AccessKind kind) {
  if (priv == Privilege::Machine) return Decision::allow();
  MemRange access{addr, len};
  if (!access.valid()) return Decision::deny();
  for (const auto& e : cfg.entries()) {
    if (!e || !platform::range_overlaps(e->range, access)) continue;
    bool ok = e->range.contains(access) && e->perms.grants(kind);
    return ok ? Decision::allow(e->index) : Decision::deny(e->index);
  }
  return Decision::deny();
}

}  // namespace pie::pmp
