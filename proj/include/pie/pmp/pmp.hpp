// Copyright PIE simulator contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pie/common/result.hpp"
#include "pie/platform/memory.hpp"

namespace pie::pmp {

using platform::MemRange;
using platform::PhysAddr;

enum class AccessKind { Read, Write, Execute };
enum class Privilege { Machine, Supervisor, User };

std::string_view to_string(AccessKind kind);
std::string_view to_string(Privilege priv);

struct Perms {
  bool read = false;
  bool write = false;
  bool execute = false;

  static constexpr Perms none() { return {}; }
  static constexpr Perms rw() { return {true, true, false}; }
  static constexpr Perms rwx() { return {true, true, true}; }

  constexpr bool grants(AccessKind kind) const {
    switch (kind) {
      case AccessKind::Read: return read;
      case AccessKind::Write: return write;
      case AccessKind::Execute: return execute;
    }
    return false;
  }
  constexpr bool operator==(const Perms&) const = default;
};

std::string to_string(Perms perms);

struct PmpEntry {
  std::size_t index = 0;
  MemRange range;
  Perms perms;
  /// Owner label: "SM", "OS-background", "enclave:<id>", "region:<id>".
  std::string tag;
};

/// Outcome of an access check. `index` names the deciding entry; a Deny with
/// no index means no entry matched.
struct Decision {
  bool allowed = false;
  std::optional<std::size_t> index;

  static Decision allow(std::optional<std::size_t> idx = std::nullopt) {
    return {true, idx};
  }
  static Decision deny(std::optional<std::size_t> idx = std::nullopt) {
    return {false, idx};
  }
  bool operator==(const Decision&) const = default;
};

struct AuditRecord {
  enum class Op { Install, Clear, SetPerms };
  Op op;
  std::size_t index;
  Privilege caller;
  std::string tag;
};

/// The ordered table of range policies. Only Machine mode may change it; every
/// successful change is recorded in the audit log.
class PmpConfig {
 public:
  static constexpr std::size_t kDefaultEntries = 16;

  /// Throws std::invalid_argument unless 1 <= max_entries <= 64.
  explicit PmpConfig(std::size_t max_entries = kDefaultEntries);

  std::size_t max_entries() const { return entries_.size(); }

  /// Writes `entry` at entry.index. Re-installing over an entry with the same
  /// tag is allowed; an index out of range or held by another owner is not.
  Status install_entry(Privilege caller, PmpEntry entry);
  /// Clearing an empty index succeeds and does nothing.
  Status clear_entry(Privilege caller, std::size_t index);
  Status set_perms(Privilege caller, std::size_t index, Perms perms);

  std::size_t free_entry_count() const;
  std::optional<std::size_t> lowest_free_index(std::size_t first,
                                               std::size_t last) const;

  const std::optional<PmpEntry>& entry(std::size_t index) const {
    return entries_.at(index);
  }
  std::span<const std::optional<PmpEntry>> entries() const { return entries_; }
  std::span<const AuditRecord> audit_log() const { return audit_; }

 private:
  std::vector<std::optional<PmpEntry>> entries_;
  std::vector<AuditRecord> audit_;
};

/// Machine mode is never checked. Otherwise the lowest-index entry that
/// intersects [addr, addr + len) decides: the access must lie wholly inside
/// that entry and the entry must grant `kind`. No match means Deny.
Decision check_access(const PmpConfig& cfg, Privilege priv, PhysAddr addr,
                      std::uint64_t len, AccessKind kind);

}  // namespace pie::pmp
