// Copyright PIE simulator contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#include "pie/platform/device_tree.hpp"

#include <algorithm>
#include <array>

namespace pie::platform {

namespace {

struct KindName {
  NodeKind kind;
  std::string_view name;
};
constexpr std::array kKindNames = {
    KindName{NodeKind::Cpu, "cpu"},
    KindName{NodeKind::Dram, "dram"},
    KindName{NodeKind::BusController, "bus-controller"},
    KindName{NodeKind::MmioPeripheral, "mmio-peripheral"},
};

std::optional<NodeKind> kind_from_string(std::string_view name) {
  for (const auto& k : kKindNames)
    if (k.name == name) return k.kind;
  return std::nullopt;
}

std::optional<std::uint64_t> parse_u64(const nlohmann::json& v) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer()) {
    auto i = v.get<std::int64_t>();
    if (i < 0) return std::nullopt;
    return static_cast<std::uint64_t>(i);
  }
  if (!v.is_string()) return std::nullopt;
  const auto& s = v.get_ref<const std::string&>();
  try {
    std::size_t used = 0;
    std::uint64_t out = std::stoull(s, &used, 0);
    if (used != s.size()) return std::nullopt;
    return out;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

}  // namespace

std::string_view to_string(NodeKind kind) {
  for (const auto& k : kKindNames)
    if (k.kind == kind) return k.name;
  return "unknown";
}

Result<DeviceTree> DeviceTree::load(std::string_view document) {
  auto parsed = nlohmann::json::parse(document, nullptr, false);
  if (parsed.is_discarded())
    return make_error(Errc::ParseError, "device tree is not valid JSON");
  return load(parsed);
}

Result<DeviceTree> DeviceTree::load(const nlohmann::json& document) {
  if (!document.is_object() || !document.contains("nodes") ||
      !document["nodes"].is_array())
    return make_error(Errc::ParseError, "missing top-level \"nodes\" list");

  std::vector<DeviceNode> nodes;
  for (const auto& n : document["nodes"]) {
    if (!n.is_object() || !n.contains("name") || !n["name"].is_string() ||
        !n.contains("kind") || !n["kind"].is_string())
      return make_error(Errc::ParseError, "node needs string name and kind");
    DeviceNode node;
    node.name = n["name"].get<std::string>();
    auto kind = kind_from_string(n["kind"].get<std::string>());
    if (!kind)
      return make_error(Errc::ParseError, "unknown node kind in " + node.name);
    node.kind = *kind;
    if (n.contains("model")) {
      if (!n["model"].is_string())
        return make_error(Errc::ParseError, "model must be text");
      node.model = n["model"].get<std::string>();
    }
    bool has_base = n.contains("base");
    bool has_size = n.contains("size");
    if (has_base != has_size)
      return make_error(Errc::ParseError, node.name + ": base without size");
    if (has_base) {
      auto base = parse_u64(n["base"]);
      auto size = parse_u64(n["size"]);
      if (!base || !size)
        return make_error(Errc::ParseError, node.name + ": bad base/size");
      auto range = MemRange::make(*base, *size);
      if (!range)
        return make_error(Errc::ParseError,
                          node.name + ": " + range.error().detail);
      node.range = *range;
    } else if (node.kind != NodeKind::Cpu) {
      return make_error(Errc::ParseError, node.name + ": range required");
    }
    if (std::any_of(nodes.begin(), nodes.end(),
                    [&](const DeviceNode& o) { return o.name == node.name; }))
      return make_error(Errc::ParseError, "duplicate node " + node.name);
    nodes.push_back(std::move(node));
  }

  std::uint64_t lo = std::numeric_limits<std::uint64_t>::max();
  std::uint64_t hi = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (!nodes[i].range) continue;
    for (std::size_t j = i + 1; j < nodes.size(); ++j) {
      if (nodes[j].range && range_overlaps(*nodes[i].range, *nodes[j].range))
        return make_error(Errc::OverlapError,
                          nodes[i].name + " overlaps " + nodes[j].name);
    }
    lo = std::min(lo, nodes[i].range->base.value);
    hi = std::max(hi, nodes[i].range->end());
  }
  if (hi == 0) return make_error(Errc::ParseError, "no ranged nodes");
  return DeviceTree(std::move(nodes), MemRange{PhysAddr{lo}, hi - lo});
}

const DeviceNode* DeviceTree::find(std::string_view name) const {
  for (const auto& n : nodes_)
    if (n.name == name) return &n;
  return nullptr;
}

bool DeviceTree::in_dram(const MemRange& range) const {
  return std::any_of(nodes_.begin(), nodes_.end(), [&](const DeviceNode& n) {
    return n.kind == NodeKind::Dram && n.range && n.range->contains(range);
  });
}

const DeviceNode* DeviceTree::mmio_node_overlapping(
    const MemRange& range) const {
  for (const auto& n : nodes_) {
    if ((n.kind == NodeKind::BusController ||
         n.kind == NodeKind::MmioPeripheral) &&
        n.range && range_overlaps(*n.range, range))
      return &n;
  }
  return nullptr;
}

}  // namespace pie::platform
