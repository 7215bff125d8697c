// Copyright PIE simulator contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "pie/platform/memory.hpp"

namespace pie::platform {

enum class NodeKind { Cpu, Dram, BusController, MmioPeripheral };

std::string_view to_string(NodeKind kind);

struct DeviceNode {
  std::string name;
  NodeKind kind;
  /// Absent only for cpu nodes, which need not claim any address range.
  std::optional<MemRange> range;
  std::string model;
};

/// The trusted catalogue of physical ranges. Built once by load() and never
/// modified afterwards; there are no mutating members.
class DeviceTree {
 public:
  /// Parses the JSON device-tree document:
  ///   {"nodes": [{"name", "kind", "base": "0x...", "size": N, "model"}]}
  static Result<DeviceTree> load(std::string_view document);
  static Result<DeviceTree> load(const char* document) {
    return load(std::string_view(document));
  }
  static Result<DeviceTree> load(const std::string& document) {
    return load(std::string_view(document));
  }
  static Result<DeviceTree> load(const nlohmann::json& document);

  std::span<const DeviceNode> nodes() const { return nodes_; }
  const DeviceNode* find(std::string_view name) const;

  /// The hull of all ranged nodes.
  MemRange span() const { return span_; }

  /// True iff `range` lies entirely inside one dram node.
  bool in_dram(const MemRange& range) const;

  /// The bus-controller or mmio-peripheral node whose range overlaps `range`.
  const DeviceNode* mmio_node_overlapping(const MemRange& range) const;

 private:
  explicit DeviceTree(std::vector<DeviceNode> nodes, MemRange span)
      : nodes_(std::move(nodes)), span_(span) {}

  std::vector<DeviceNode> nodes_;
  MemRange span_;
};

}  // namespace pie::platform
