#pragma once

#include <cstdint>
#include <map>
#include <string>

namespace auraseg::flops {

// Analytic FLOP accounting. Layers report their cost while a Recorder is alive
// on the current thread; with no recorder the calls are no-ops.
//
// Conventions (FLOPs = 2 x MACs throughout):
//   convolution        2 * kh * kw * (Cin / groups) * Cout * Hout * Wout  (bias not counted)
//   batch norm         2 per element (scale and shift)
//   ReLU, sigmoid      1 per element
//   add, multiply      1 per output element
//   pooling reductions 1 per input element (global average, channel max, channel mean)
//   bilinear resize    8 per output element (4 taps, multiply-accumulate)
//   nearest resize     0

struct Breakdown {
  std::map<std::string, int64_t> per_module;  // keyed by outermost module scope
  std::map<std::string, int64_t> per_path;    // keyed by full dotted scope path
  int64_t total = 0;

  double gflops() const { return static_cast<double>(total) / 1e9; }
};

class Recorder {
 public:
  Recorder();
  ~Recorder();
  Recorder(const Recorder&) = delete;
  Recorder& operator=(const Recorder&) = delete;

  const Breakdown& result() const noexcept { return breakdown_; }

 private:
  friend void add(int64_t);
  Breakdown breakdown_;
  Recorder* previous_;
};

// Names the module currently executing; scopes nest into dotted paths.
class ModuleScope {
 public:
  explicit ModuleScope(const std::string& name);
  ~ModuleScope();
  ModuleScope(const ModuleScope&) = delete;
  ModuleScope& operator=(const ModuleScope&) = delete;

 private:
  size_t previous_length_;
  bool pushed_;
};

bool active() noexcept;
void add(int64_t flops);

constexpr int64_t conv2d(int64_t kernel_h, int64_t kernel_w, int64_t in_per_group, int64_t out_channels,
                         int64_t out_h, int64_t out_w) {
  return 2 * kernel_h * kernel_w * in_per_group * out_channels * out_h * out_w;
}

}  // namespace auraseg::flops
