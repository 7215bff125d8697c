// Copyright PIE simulator contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#include "pie/common/trace.hpp"

#include <sstream>

namespace pie {

std::string TraceRecord::to_json_line() const {
  std::string line = "{\"step\":" + std::to_string(step);
  line += ",\"actor\":" + nlohmann::json(actor).dump();
  line += ",\"operation\":" + nlohmann::json(operation).dump();
  line += ",\"args\":" + args.dump();
  line += ",\"result\":" + nlohmann::json(result).dump();
  line += "}";
  return line;
}

void Trace::append(std::string actor, std::string operation,
                   nlohmann::json args, std::string result) {
  records_.push_back(TraceRecord{records_.size(), std::move(actor),
                                 std::move(operation), std::move(args),
                                 std::move(result)});
}

void Trace::write_jsonl(std::ostream& out) const {
  for (const auto& r : records_) out << r.to_json_line() << '\n';
}

std::string Trace::to_jsonl() const {
  std::ostringstream out;
  write_jsonl(out);
  return out.str();
}

}  // namespace pie
