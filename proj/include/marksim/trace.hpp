#pragma once

#include <cstdio>
#include <ostream>
#include <string_view>

#include "marksim/packet.hpp"

namespace marksim {

// Optional per-event trace: one line per semantic event, stable formatting so
// traces can be diffed across runs.
class TraceLog {
 public:
  TraceLog() = default;
  explicit TraceLog(std::ostream* out) : out_(out) {}

  void attach(std::ostream* out) { out_ = out; }
  bool enabled() const { return out_ != nullptr; }

  void emit(SimTime t, std::string_view node, std::string_view kind, FlowId flow,
            std::int64_t seq) {
    if (!out_) return;
    char buf[160];
    std::snprintf(buf, sizeof(buf), "t=%.9f node=%.*s ev=%.*s flow=%d seq=%lld\n", t,
                  static_cast<int>(node.size()), node.data(), static_cast<int>(kind.size()),
                  kind.data(), flow, static_cast<long long>(seq));
    *out_ << buf;
  }

 private:
  std::ostream* out_ = nullptr;
};

}  // namespace marksim
