#pragma once

#include <torch/torch.h>

#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace auraseg {

enum class Split { Train, Val, Test };

std::string_view to_string(Split split);
Split parse_split(std::string_view text);

struct SampleRecord {
  std::filesystem::path image_path;  // relative to the dataset root
  std::filesystem::path mask_path;
  Split split = Split::Train;
};

struct SplitCounts {
  size_t train = 0;
  size_t val = 0;
  size_t test = 0;
  bool operator==(const SplitCounts&) const = default;
};

struct Manifest {
  std::vector<SampleRecord> records;
  std::vector<std::string> warnings;

  SplitCounts counts() const;
};

// Manifest lines are "image<TAB>mask<TAB>split", paths relative to `root`.
// Blank lines are skipped. Throws FormatError (with the line number) on a
// malformed line or a repeated image, IoError when a referenced file is missing.
Manifest parse_manifest(std::string_view text, const std::filesystem::path& root, bool check_files = true);
Manifest load_manifest(const std::filesystem::path& root, const std::filesystem::path& manifest_file,
                       bool check_files = true);
void write_manifest(const std::vector<SampleRecord>& records, const std::filesystem::path& manifest_file);

// Interleaved 8-bit pixels, row-major, channel order gray / RGB / RGBA.
struct RawImage {
  int height = 0;
  int width = 0;
  int channels = 0;
  std::vector<uint8_t> pixels;

  uint8_t at(int y, int x, int c) const { return pixels[(static_cast<size_t>(y) * width + x) * channels + c]; }
};

/// Throws DecodeError on unreadable or undecodable files.
RawImage read_image(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const RawImage& image);

/// Luminance 0.299 R + 0.587 G + 0.114 B (gray passes through, alpha ignored);
/// returns a [1, H, W] float tensor with 1 where luminance > 127.
torch::Tensor decode_mask(const RawImage& raw);
torch::Tensor decode_mask_file(const std::filesystem::path& path);

/// [3, H, W] float in [0, 1]; gray images are replicated across channels.
torch::Tensor image_to_tensor(const RawImage& raw);
/// Inverse of image_to_tensor for [3, H, W] or [1, H, W] tensors in [0, 1].
RawImage tensor_to_image(const torch::Tensor& chw);

torch::Tensor resize_image(const torch::Tensor& chw, int64_t height, int64_t width);
/// Nearest-neighbour only, so binary masks stay binary.
torch::Tensor resize_mask(const torch::Tensor& mask, int64_t height, int64_t width);

struct DataConfig {
  std::string source = "toy";  // "toy" or "manifest"
  std::string root;
  std::string manifest;
  std::array<double, 3> mean{0.485, 0.456, 0.406};
  std::array<double, 3> std{0.229, 0.224, 0.225};
  bool hflip = false;
  double brightness_jitter = 0.0;  // max relative change; 0 disables
  uint64_t shuffle_seed = 0;
  int toy_train = 8;
  int toy_val = 4;
  int toy_test = 4;
  uint64_t toy_seed = 7;

  bool operator==(const DataConfig&) const = default;
};

struct Sample {
  std::string id;
  torch::Tensor image;  // [3, H, W], float32 in [0, 1]
  torch::Tensor mask;   // [1, H, W], float32 in {0, 1}
};

struct Dataset {
  std::vector<Sample> train;
  std::vector<Sample> val;
  std::vector<Sample> test;

  const std::vector<Sample>& split(Split s) const;
};

/// Reads every manifest record, resizing images (bilinear) and masks (nearest) to the input size.
Dataset load_dataset(const Manifest& manifest, const std::filesystem::path& root, int64_t height, int64_t width);

struct Batch {
  std::vector<std::string> ids;
  torch::Tensor images;  // [B, 3, H, W] standardized with the configured mean / std
  torch::Tensor masks;   // [B, 1, H, W]
};

torch::Tensor standardize(const torch::Tensor& images, const DataConfig& cfg);

struct BatchOptions {
  int64_t batch_size = 4;
  bool shuffle = false;
  uint64_t seed = 0;  // shuffle and augmentation seed; combined with the epoch
  int epoch = 0;
  bool augment = false;
  torch::Dtype dtype = torch::kFloat32;
};

/// Deterministic batching: the order depends only on (seed, epoch). The last
/// batch may be smaller.
std::vector<Batch> make_batches(const std::vector<Sample>& samples, const DataConfig& cfg, const BatchOptions& options);

// Assembles the batches of make_batches on a worker thread and hands them over
// through a queue holding at most `capacity` finished batches. Order and
// contents match make_batches exactly. `samples` must outlive the queue.
class BatchQueue {
 public:
  BatchQueue(const std::vector<Sample>& samples, const DataConfig& cfg, const BatchOptions& options,
             size_t capacity = 2);
  ~BatchQueue();
  BatchQueue(const BatchQueue&) = delete;
  BatchQueue& operator=(const BatchQueue&) = delete;

  /// Blocks for the next batch; empty once the epoch is exhausted. Rethrows
  /// any failure raised while assembling.
  std::optional<Batch> next();
  size_t batch_count() const noexcept;

 private:
  struct State;
  std::unique_ptr<State> state_;
};

// ---------------------------------------------------------------------------
// Synthetic floor scenes for desk-scale training and tests.

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

struct PixelRect {
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;  // half-open [x0, x1) x [y0, y1)
  bool contains(int x, int y) const { return x >= x0 && x < x1 && y >= y0 && y < y1; }
};

struct ToySample {
  torch::Tensor image;  // [3, H, W] float in [0, 1]
  torch::Tensor mask;   // [1, H, W] float in {0, 1}
  std::vector<Point2> floor;        // polygon, pixel coordinates
  std::vector<PixelRect> obstacles; // excluded from the drivable mask
};

/// A pixel belongs to the polygon when its centre (x + 0.5, y + 0.5) is inside
/// by the even-odd rule. Returns [H, W] uint8.
torch::Tensor rasterize_polygon(const std::vector<Point2>& polygon, int height, int width);

/// Deterministic in `seed`. Each scene has a textured lower floor polygon
/// (the drivable region), a different wall texture above it, rectangular
/// occluders standing on the floor, noise and brightness jitter. Every mask
/// has 20-80% foreground. Height and width must be multiples of 32.
std::vector<ToySample> make_toy_dataset(int n, int height, int width, uint64_t seed);

/// Toy scenes split into train / val / test as sized in `cfg`.
Dataset make_toy_splits(const DataConfig& cfg, int height, int width);

/// Writes a dataset as images/, masks/ PNG pairs plus a manifest; returns the manifest path.
std::filesystem::path export_dataset(const Dataset& dataset, const std::filesystem::path& root);

}  // namespace auraseg
