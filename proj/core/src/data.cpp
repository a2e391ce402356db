#include "auraseg/data.hpp"

#include "auraseg/errors.hpp"

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include <algorithm>
#include <condition_variable>
#include <deque>
#include <exception>
#include <fstream>
#include <mutex>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <thread>

namespace auraseg {

namespace fs = std::filesystem;
namespace F = torch::nn::functional;

std::string_view to_string(Split split) {
  switch (split) {
    case Split::Train: return "train";
    case Split::Val: return "val";
    case Split::Test: return "test";
  }
  return "train";
}

Split parse_split(std::string_view text) {
  if (text == "train") return Split::Train;
  if (text == "val" || text == "validation") return Split::Val;
  if (text == "test") return Split::Test;
  throw ValueError("unknown split '" + std::string(text) + "' (expected train, val or test)");
}

SplitCounts Manifest::counts() const {
  SplitCounts c;
  for (const auto& r : records) {
    switch (r.split) {
      case Split::Train: ++c.train; break;
      case Split::Val: ++c.val; break;
      case Split::Test: ++c.test; break;
    }
  }
  return c;
}

Manifest parse_manifest(std::string_view text, const fs::path& root, bool check_files) {
  Manifest manifest;
  std::set<std::string> seen;
  int line_number = 0;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;

    std::vector<std::string> fields;
    std::string field;
    std::istringstream fields_in(line);
    while (std::getline(fields_in, field, '\t')) fields.push_back(field);
    if (fields.size() != 3) {
      throw FormatError("expected 3 tab-separated fields (image, mask, split), got " + std::to_string(fields.size()),
                        line_number);
    }
    if (fields[0].empty() || fields[1].empty()) throw FormatError("empty path field", line_number);

    SampleRecord record;
    record.image_path = fields[0];
    record.mask_path = fields[1];
    try {
      record.split = parse_split(fields[2]);
    } catch (const ValueError& e) {
      throw FormatError(e.what(), line_number);
    }
    if (!seen.insert(record.image_path.lexically_normal().string()).second) {
      throw FormatError("image '" + fields[0] + "' listed more than once", line_number);
    }
    if (check_files) {
      for (const auto& p : {record.image_path, record.mask_path}) {
        if (!fs::exists(root / p)) {
          throw IoError("manifest line " + std::to_string(line_number) + ": missing file " + (root / p).string());
        }
      }
    }
    manifest.records.push_back(std::move(record));
  }
  if (manifest.records.empty()) manifest.warnings.push_back("manifest lists no samples");
  return manifest;
}

Manifest load_manifest(const fs::path& root, const fs::path& manifest_file, bool check_files) {
  std::ifstream in(manifest_file);
  if (!in) throw IoError("cannot read manifest " + manifest_file.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_manifest(buffer.str(), root, check_files);
}

void write_manifest(const std::vector<SampleRecord>& records, const fs::path& manifest_file) {
  if (manifest_file.has_parent_path()) fs::create_directories(manifest_file.parent_path());
  std::ofstream out(manifest_file);
  if (!out) throw IoError("cannot write manifest " + manifest_file.string());
  for (const auto& r : records) {
    out << r.image_path.generic_string() << '\t' << r.mask_path.generic_string() << '\t' << to_string(r.split)
        << '\n';
  }
}

RawImage read_image(const fs::path& path) {
  cv::Mat mat = cv::imread(path.string(), cv::IMREAD_UNCHANGED);
  if (mat.empty()) throw DecodeError("cannot decode image " + path.string());
  if (mat.depth() == CV_16U) mat.convertTo(mat, CV_8U, 1.0 / 257.0);
  if (mat.depth() != CV_8U) throw DecodeError("unsupported pixel depth in " + path.string());
  if (mat.channels() == 3) {
    cv::cvtColor(mat, mat, cv::COLOR_BGR2RGB);
  } else if (mat.channels() == 4) {
    cv::cvtColor(mat, mat, cv::COLOR_BGRA2RGBA);
  } else if (mat.channels() != 1) {
    throw DecodeError("unsupported channel count in " + path.string());
  }
  RawImage raw;
  raw.height = mat.rows;
  raw.width = mat.cols;
  raw.channels = mat.channels();
  raw.pixels.resize(static_cast<size_t>(mat.rows) * mat.cols * mat.channels());
  for (int y = 0; y < mat.rows; ++y) {
    std::copy_n(mat.ptr<uint8_t>(y), static_cast<size_t>(mat.cols) * mat.channels(),
                raw.pixels.data() + static_cast<size_t>(y) * mat.cols * mat.channels());
  }
  return raw;
}

void write_png(const fs::path& path, const RawImage& image) {
  if (image.channels != 1 && image.channels != 3 && image.channels != 4) {
    throw ValueError("write_png: unsupported channel count");
  }
  const int type = image.channels == 1 ? CV_8UC1 : (image.channels == 3 ? CV_8UC3 : CV_8UC4);
  cv::Mat mat(image.height, image.width, type, const_cast<uint8_t*>(image.pixels.data()));
  cv::Mat out;
  if (image.channels == 3) {
    cv::cvtColor(mat, out, cv::COLOR_RGB2BGR);
  } else if (image.channels == 4) {
    cv::cvtColor(mat, out, cv::COLOR_RGBA2BGRA);
  } else {
    out = mat;
  }
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  if (!cv::imwrite(path.string(), out)) throw IoError("cannot write " + path.string());
}

torch::Tensor decode_mask(const RawImage& raw) {
  if (raw.channels < 1 || raw.pixels.size() != static_cast<size_t>(raw.height) * raw.width * raw.channels) {
    throw DecodeError("decode_mask: inconsistent image buffer");
  }
  auto mask = torch::zeros({1, raw.height, raw.width}, torch::kFloat32);
  auto acc = mask.accessor<float, 3>();
  for (int y = 0; y < raw.height; ++y) {
    for (int x = 0; x < raw.width; ++x) {
      double luminance;
      if (raw.channels >= 3) {
        luminance = 0.299 * raw.at(y, x, 0) + 0.587 * raw.at(y, x, 1) + 0.114 * raw.at(y, x, 2);
      } else {
        luminance = raw.at(y, x, 0);
      }
      acc[0][y][x] = luminance > 127.0 ? 1.0f : 0.0f;
    }
  }
  return mask;
}

torch::Tensor decode_mask_file(const fs::path& path) { return decode_mask(read_image(path)); }

torch::Tensor image_to_tensor(const RawImage& raw) {
  auto hwc = torch::from_blob(const_cast<uint8_t*>(raw.pixels.data()), {raw.height, raw.width, raw.channels},
                              torch::kUInt8);
  auto chw = hwc.permute({2, 0, 1}).to(torch::kFloat32).div(255.0);
  if (raw.channels == 1) chw = chw.expand({3, raw.height, raw.width});
  if (raw.channels == 4) chw = chw.slice(0, 0, 3);
  return chw.contiguous();
}

RawImage tensor_to_image(const torch::Tensor& chw) {
  if (chw.dim() != 3 || (chw.size(0) != 1 && chw.size(0) != 3)) {
    throw ShapeError("tensor_to_image expects [1|3, H, W]");
  }
  auto hwc = chw.detach().to(torch::kFloat32).clamp(0.0, 1.0).mul(255.0).round().to(torch::kUInt8)
                 .permute({1, 2, 0}).contiguous();
  RawImage raw;
  raw.channels = static_cast<int>(chw.size(0));
  raw.height = static_cast<int>(chw.size(1));
  raw.width = static_cast<int>(chw.size(2));
  raw.pixels.assign(hwc.data_ptr<uint8_t>(), hwc.data_ptr<uint8_t>() + hwc.numel());
  return raw;
}

torch::Tensor resize_image(const torch::Tensor& chw, int64_t height, int64_t width) {
  if (chw.size(1) == height && chw.size(2) == width) return chw;
  return F::interpolate(chw.unsqueeze(0), F::InterpolateFuncOptions()
                                               .size(std::vector<int64_t>{height, width})
                                               .mode(torch::kBilinear)
                                               .align_corners(false))
      .squeeze(0)
      .clamp(0.0, 1.0);
}

torch::Tensor resize_mask(const torch::Tensor& mask, int64_t height, int64_t width) {
  if (mask.size(-2) == height && mask.size(-1) == width) return mask;
  auto batched = mask.dim() == 3 ? mask.unsqueeze(0) : mask;
  auto out = F::interpolate(batched.to(torch::kFloat32),
                            F::InterpolateFuncOptions().size(std::vector<int64_t>{height, width}).mode(torch::kNearest));
  return mask.dim() == 3 ? out.squeeze(0) : out;
}

const std::vector<Sample>& Dataset::split(Split s) const {
  switch (s) {
    case Split::Train: return train;
    case Split::Val: return val;
    case Split::Test: return test;
  }
  return train;
}

Dataset load_dataset(const Manifest& manifest, const fs::path& root, int64_t height, int64_t width) {
  Dataset dataset;
  for (const auto& record : manifest.records) {
    Sample sample;
    sample.id = record.image_path.stem().string();
    sample.image = resize_image(image_to_tensor(read_image(root / record.image_path)), height, width);
    sample.mask = resize_mask(decode_mask_file(root / record.mask_path), height, width);
    switch (record.split) {
      case Split::Train: dataset.train.push_back(std::move(sample)); break;
      case Split::Val: dataset.val.push_back(std::move(sample)); break;
      case Split::Test: dataset.test.push_back(std::move(sample)); break;
    }
  }
  return dataset;
}

torch::Tensor standardize(const torch::Tensor& images, const DataConfig& cfg) {
  auto opts = torch::TensorOptions().dtype(images.dtype());
  auto mean = torch::tensor(std::vector<double>(cfg.mean.begin(), cfg.mean.end()), opts).view({1, 3, 1, 1});
  auto std = torch::tensor(std::vector<double>(cfg.std.begin(), cfg.std.end()), opts).view({1, 3, 1, 1});
  return (images - mean) / std;
}

namespace {

struct PlannedSample {
  size_t index = 0;
  bool flip = false;
  double brightness = 1.0;
};

using BatchPlan = std::vector<std::vector<PlannedSample>>;

// All random draws for an epoch, made up front.
BatchPlan plan_batches(size_t count, const DataConfig& cfg, const BatchOptions& options) {
  if (options.batch_size < 1) throw ConfigError("batch size must be >= 1");
  std::vector<size_t> order(count);
  std::iota(order.begin(), order.end(), size_t{0});
  std::mt19937_64 rng(options.seed * 0x9E3779B97F4A7C15ULL + static_cast<uint64_t>(options.epoch));
  if (options.shuffle) std::shuffle(order.begin(), order.end(), rng);

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  BatchPlan plan;
  for (size_t start = 0; start < order.size(); start += static_cast<size_t>(options.batch_size)) {
    const size_t end = std::min(order.size(), start + static_cast<size_t>(options.batch_size));
    auto& members = plan.emplace_back();
    for (size_t i = start; i < end; ++i) {
      PlannedSample p{order[i]};
      if (options.augment) {
        if (cfg.hflip) p.flip = unit(rng) < 0.5;
        if (cfg.brightness_jitter > 0.0) p.brightness = 1.0 + cfg.brightness_jitter * (2.0 * unit(rng) - 1.0);
      }
      members.push_back(p);
    }
  }
  return plan;
}

Batch assemble(const std::vector<Sample>& samples, const std::vector<PlannedSample>& members, const DataConfig& cfg,
               torch::Dtype dtype) {
  Batch batch;
  std::vector<torch::Tensor> images;
  std::vector<torch::Tensor> masks;
  for (const auto& p : members) {
    const auto& s = samples[p.index];
    auto image = s.image;
    auto mask = s.mask;
    if (p.flip) {
      image = image.flip({2});
      mask = mask.flip({2});
    }
    if (p.brightness != 1.0) image = (image * p.brightness).clamp(0.0, 1.0);
    batch.ids.push_back(s.id);
    images.push_back(image);
    masks.push_back(mask);
  }
  batch.images = standardize(torch::stack(images).to(dtype), cfg);
  batch.masks = torch::stack(masks).to(dtype);
  return batch;
}

}  // namespace

std::vector<Batch> make_batches(const std::vector<Sample>& samples, const DataConfig& cfg, const BatchOptions& options) {
  std::vector<Batch> batches;
  for (const auto& members : plan_batches(samples.size(), cfg, options)) {
    batches.push_back(assemble(samples, members, cfg, options.dtype));
  }
  return batches;
}

struct BatchQueue::State {
  State(const std::vector<Sample>& s, const DataConfig& c, torch::Dtype d, BatchPlan p, size_t cap)
      : samples(s), cfg(c), dtype(d), plan(std::move(p)), capacity(cap) {}

  const std::vector<Sample>& samples;
  DataConfig cfg;
  torch::Dtype dtype;
  BatchPlan plan;
  size_t capacity;

  std::mutex mutex;
  std::condition_variable changed;
  std::deque<Batch> ready;
  size_t produced = 0;
  size_t consumed = 0;
  std::exception_ptr failure;
  bool stopping = false;
  std::thread worker;

  void produce() {
    for (size_t i = 0; i < plan.size(); ++i) {
      {
        std::unique_lock lock(mutex);
        changed.wait(lock, [&] { return stopping || ready.size() < capacity; });
        if (stopping) return;
      }
      Batch batch;
      try {
        batch = assemble(samples, plan[i], cfg, dtype);
      } catch (...) {
        std::lock_guard lock(mutex);
        failure = std::current_exception();
        changed.notify_all();
        return;
      }
      std::lock_guard lock(mutex);
      ready.push_back(std::move(batch));
      ++produced;
      changed.notify_all();
    }
  }
};

BatchQueue::BatchQueue(const std::vector<Sample>& samples, const DataConfig& cfg, const BatchOptions& options,
                       size_t capacity)
    : state_(std::make_unique<State>(samples, cfg, options.dtype, plan_batches(samples.size(), cfg, options),
                                     std::max<size_t>(capacity, 1))) {
  state_->worker = std::thread([s = state_.get()] { s->produce(); });
}

BatchQueue::~BatchQueue() {
  {
    std::lock_guard lock(state_->mutex);
    state_->stopping = true;
  }
  state_->changed.notify_all();
  if (state_->worker.joinable()) state_->worker.join();
}

std::optional<Batch> BatchQueue::next() {
  std::unique_lock lock(state_->mutex);
  if (state_->consumed == state_->plan.size()) return std::nullopt;
  state_->changed.wait(lock, [&] { return !state_->ready.empty() || state_->failure; });
  if (state_->ready.empty()) std::rethrow_exception(state_->failure);
  Batch batch = std::move(state_->ready.front());
  state_->ready.pop_front();
  ++state_->consumed;
  state_->changed.notify_all();
  return batch;
}

size_t BatchQueue::batch_count() const noexcept { return state_->plan.size(); }

fs::path export_dataset(const Dataset& dataset, const fs::path& root) {
  std::vector<SampleRecord> records;
  for (Split split : {Split::Train, Split::Val, Split::Test}) {
    for (const auto& sample : dataset.split(split)) {
      const std::string stem = std::string(to_string(split)) + "_" + sample.id;
      SampleRecord record{fs::path("images") / (stem + ".png"), fs::path("masks") / (stem + ".png"), split};
      write_png(root / record.image_path, tensor_to_image(sample.image));
      write_png(root / record.mask_path, tensor_to_image(sample.mask));
      records.push_back(std::move(record));
    }
  }
  const auto manifest = root / "manifest.tsv";
  write_manifest(records, manifest);
  return manifest;
}

}  // namespace auraseg
