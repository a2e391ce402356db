#include "auraseg/data.hpp"
#include "auraseg/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

namespace auraseg {

torch::Tensor rasterize_polygon(const std::vector<Point2>& polygon, int height, int width) {
  auto mask = torch::zeros({height, width}, torch::kUInt8);
  auto acc = mask.accessor<uint8_t, 2>();
  const size_t n = polygon.size();
  if (n < 3) return mask;
  for (int y = 0; y < height; ++y) {
    const double cy = y + 0.5;
    for (int x = 0; x < width; ++x) {
      const double cx = x + 0.5;
      bool inside = false;
      for (size_t i = 0, j = n - 1; i < n; j = i++) {
        const Point2& a = polygon[i];
        const Point2& b = polygon[j];
        if ((a.y > cy) != (b.y > cy)) {
          const double cross_x = a.x + (cy - a.y) * (b.x - a.x) / (b.y - a.y);
          if (cx < cross_x) inside = !inside;
        }
      }
      acc[y][x] = inside;
    }
  }
  return mask;
}

namespace {

struct Rgb {
  double r, g, b;
};

class SceneRng {
 public:
  explicit SceneRng(uint64_t seed) : engine_(seed) {}
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine_); }
  double normal(double sigma) { return std::normal_distribution<double>(0.0, sigma)(engine_); }

 private:
  std::mt19937_64 engine_;
};

std::vector<Point2> random_floor(SceneRng& rng, int h, int w) {
  const double horizon = rng.uniform(0.3, 0.6) * h;
  const double bottom = h + 1.0;
  std::vector<Point2> poly;
  poly.push_back({rng.uniform(-0.3, 0.2) * w, bottom});
  poly.push_back({rng.uniform(0.8, 1.3) * w, bottom});
  // Right edge may bend once, giving five vertices on some scenes.
  if (rng.uniform(0.0, 1.0) < 0.5) {
    poly.push_back({rng.uniform(0.75, 1.0) * w, horizon + rng.uniform(0.3, 0.6) * (h - horizon)});
  }
  poly.push_back({rng.uniform(0.55, 0.85) * w, horizon + rng.uniform(-0.05, 0.05) * h});
  poly.push_back({rng.uniform(0.15, 0.45) * w, horizon + rng.uniform(-0.05, 0.05) * h});
  return poly;
}

ToySample render_scene(SceneRng& rng, int h, int w) {
  ToySample sample;
  torch::Tensor drivable;
  // Redraw until the drivable fraction lands in [0.2, 0.8].
  for (;;) {
    sample.floor = random_floor(rng, h, w);
    sample.obstacles.clear();
    auto raster = rasterize_polygon(sample.floor, h, w);
    const int count = rng.integer(0, 2);
    for (int k = 0; k < count; ++k) {
      const int ow = std::max(2, static_cast<int>(rng.uniform(0.08, 0.18) * w));
      const int oh = std::max(2, static_cast<int>(rng.uniform(0.08, 0.2) * h));
      const int ox = rng.integer(0, w - ow);
      const int oy = rng.integer(h / 2, h - oh);
      sample.obstacles.push_back({ox, oy, ox + ow, oy + oh});
      raster.slice(0, oy, oy + oh).slice(1, ox, ox + ow).zero_();
    }
    const double fraction = raster.to(torch::kFloat64).mean().item<double>();
    if (fraction >= 0.2 && fraction <= 0.8) {
      drivable = raster;
      break;
    }
  }

  const Rgb floor_color{rng.uniform(0.45, 0.65), rng.uniform(0.33, 0.5), rng.uniform(0.18, 0.33)};
  const Rgb wall_color{rng.uniform(0.6, 0.85), rng.uniform(0.7, 0.9), rng.uniform(0.78, 0.95)};
  const Rgb obstacle_color{rng.uniform(0.05, 0.3), rng.uniform(0.05, 0.3), rng.uniform(0.05, 0.3)};
  const double tile = rng.uniform(4.0, 10.0);
  const double stripe = rng.uniform(3.0, 8.0);
  const double brightness = rng.uniform(0.75, 1.25);

  sample.image = torch::zeros({3, h, w}, torch::kFloat32);
  auto img = sample.image.accessor<float, 3>();
  const auto floor_raster = rasterize_polygon(sample.floor, h, w);
  auto floor_acc = floor_raster.accessor<uint8_t, 2>();
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      bool on_obstacle = false;
      for (const auto& rect : sample.obstacles) on_obstacle = on_obstacle || rect.contains(x, y);
      Rgb c;
      if (on_obstacle) {
        c = obstacle_color;
      } else if (floor_acc[y][x]) {
        const bool checker = (static_cast<int>(x / tile) + static_cast<int>(y / tile)) % 2 == 0;
        const double shade = checker ? 1.0 : 0.85;
        c = {floor_color.r * shade, floor_color.g * shade, floor_color.b * shade};
      } else {
        const double shade = 0.9 + 0.1 * std::sin(2.0 * M_PI * x / stripe);
        c = {wall_color.r * shade, wall_color.g * shade, wall_color.b * shade};
      }
      const double noise = rng.normal(0.03);
      img[0][y][x] = static_cast<float>(std::clamp((c.r + noise) * brightness, 0.0, 1.0));
      img[1][y][x] = static_cast<float>(std::clamp((c.g + noise) * brightness, 0.0, 1.0));
      img[2][y][x] = static_cast<float>(std::clamp((c.b + noise) * brightness, 0.0, 1.0));
    }
  }
  sample.mask = drivable.to(torch::kFloat32).unsqueeze(0);
  return sample;
}

}  // namespace

std::vector<ToySample> make_toy_dataset(int n, int height, int width, uint64_t seed) {
  if (n < 0) throw ValueError("toy dataset size must be >= 0");
  if (height < 32 || width < 32 || height % 32 != 0 || width % 32 != 0) {
    throw ConfigError("toy dataset size must be a multiple of 32");
  }
  SceneRng rng(seed);
  std::vector<ToySample> samples;
  samples.reserve(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) samples.push_back(render_scene(rng, height, width));
  return samples;
}

Dataset make_toy_splits(const DataConfig& cfg, int height, int width) {
  const int total = cfg.toy_train + cfg.toy_val + cfg.toy_test;
  auto scenes = make_toy_dataset(total, height, width, cfg.toy_seed);
  Dataset dataset;
  for (int i = 0; i < total; ++i) {
    char id[32];
    std::snprintf(id, sizeof(id), "toy_%04d", i);
    Sample sample{id, scenes[i].image, scenes[i].mask};
    if (i < cfg.toy_train) {
      dataset.train.push_back(std::move(sample));
    } else if (i < cfg.toy_train + cfg.toy_val) {
      dataset.val.push_back(std::move(sample));
    } else {
      dataset.test.push_back(std::move(sample));
    }
  }
  return dataset;
}

}  // namespace auraseg
