// Copyright PIE simulator contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#include "pie/common/result.hpp"

#include <array>

namespace pie {

namespace {
struct Named {
  Errc code;
  std::string_view name;
};

constexpr std::array kNames = {
    Named{Errc::ParseError, "ParseError"},
    Named{Errc::OverlapError, "OverlapError"},
    Named{Errc::OutOfSpan, "OutOfSpan"},
    Named{Errc::NoFreeEntry, "NoFreeEntry"},
    Named{Errc::NotMachineMode, "NotMachineMode"},
    Named{Errc::UnknownEnclave, "UnknownEnclave"},
    Named{Errc::UnknownPeripheral, "UnknownPeripheral"},
    Named{Errc::BadState, "BadState"},
    Named{Errc::ThirdParty, "ThirdParty"},
    Named{Errc::MustSyncDisconnectFirst, "MustSyncDisconnectFirst"},
    Named{Errc::BadRegionState, "BadRegionState"},
    Named{Errc::AccessFault, "AccessFault"},
    Named{Errc::SignatureInvalid, "SignatureInvalid"},
    Named{Errc::Mismatch, "Mismatch"},
    Named{Errc::NotDmaCapable, "NotDmaCapable"},
    Named{Errc::NotConnected, "NotConnected"},
    Named{Errc::NoSession, "NoSession"},
    Named{Errc::NotAttested, "NotAttested"},
    Named{Errc::DisconnectedError, "DisconnectedError"},
    Named{Errc::InvalidArgument, "InvalidArgument"},
    Named{Errc::ScenarioInvalid, "ScenarioInvalid"},
};
}  // namespace

std::string_view to_string(Errc code) {
  for (const auto& n : kNames)
    if (n.code == code) return n.name;
  return "Unknown";
}

std::optional<Errc> errc_from_string(std::string_view name) {
  for (const auto& n : kNames)
    if (n.name == name) return n.code;
  return std::nullopt;
}

}  // namespace pie
