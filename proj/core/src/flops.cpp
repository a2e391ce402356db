#include "auraseg/flops.hpp"

namespace auraseg::flops {

namespace {

thread_local Recorder* current_recorder = nullptr;
thread_local std::string current_path;

}  // namespace

Recorder::Recorder() : previous_(current_recorder) { current_recorder = this; }

Recorder::~Recorder() { current_recorder = previous_; }

ModuleScope::ModuleScope(const std::string& name)
    : previous_length_(current_path.size()), pushed_(current_recorder != nullptr) {
  if (!pushed_) return;
  if (!current_path.empty()) current_path += '.';
  current_path += name;
}

ModuleScope::~ModuleScope() {
  if (pushed_) current_path.resize(previous_length_);
}

bool active() noexcept { return current_recorder != nullptr; }

void add(int64_t count) {
  Recorder* recorder = current_recorder;
  if (recorder == nullptr || count == 0) return;
  auto& breakdown = recorder->breakdown_;
  const std::string path = current_path.empty() ? std::string("other") : current_path;
  const std::string top = path.substr(0, path.find('.'));
  breakdown.per_module[top] += count;
  breakdown.per_path[path] += count;
  breakdown.total += count;
}

}  // namespace auraseg::flops
