#pragma once

#include <functional>
#include <iostream>
#include <mutex>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace augbench {

using WarningSink = std::function<void(std::string_view)>;

namespace detail {

struct WarningChannel {
  std::mutex mutex;
  WarningSink sink;
};

inline WarningChannel& warning_channel() {
  static WarningChannel channel;
  return channel;
}

}  // namespace detail

// Replaces the process-wide warning sink and returns the previous one. An
// empty sink restores the default (stderr).
inline WarningSink set_warning_sink(WarningSink sink) {
  auto& ch = detail::warning_channel();
  std::lock_guard lock(ch.mutex);
  return std::exchange(ch.sink, std::move(sink));
}

inline void warn(std::string_view message) {
  auto& ch = detail::warning_channel();
  std::lock_guard lock(ch.mutex);
  if (ch.sink) {
    ch.sink(message);
  } else {
    std::cerr << "augbench: warning: " << message << '\n';
  }
}

// Collects warnings for the lifetime of the object; used by tests and by the
// CLI when it wants to keep stderr quiet.
class ScopedWarningCapture {
 public:
  ScopedWarningCapture()
      : previous_(set_warning_sink([this](std::string_view m) { messages_.emplace_back(m); })) {}
  ~ScopedWarningCapture() { set_warning_sink(std::move(previous_)); }
  ScopedWarningCapture(const ScopedWarningCapture&) = delete;
  ScopedWarningCapture& operator=(const ScopedWarningCapture&) = delete;

  const std::vector<std::string>& messages() const { return messages_; }
  bool contains(std::string_view needle) const {
    for (const auto& m : messages_) {
      if (m.find(needle) != std::string::npos) return true;
    }
    return false;
  }

 private:
  std::vector<std::string> messages_;
  WarningSink previous_;
};

}  // namespace augbench
