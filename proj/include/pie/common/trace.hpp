// Copyright PIE simulator contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

namespace pie {

/// One line of the trace log. Serialized as a JSON object with the keys
/// step, actor, operation, args, result (in that order).
struct TraceRecord {
  std::uint64_t step = 0;
  std::string actor;
  std::string operation;
  nlohmann::json args = nlohmann::json::object();
  std::string result;

  std::string to_json_line() const;
};

/// Append-only event log. The harness asserts against it, so everything a
/// scenario may want to check has to end up here.
class Trace {
 public:
  void append(std::string actor, std::string operation, nlohmann::json args,
              std::string result);

  const std::vector<TraceRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }

  void write_jsonl(std::ostream& out) const;
  std::string to_jsonl() const;

 private:
  std::vector<TraceRecord> records_;
};

}  // namespace pie
