#include "oracles.hpp"

#include <algorithm>
#include <cmath>

namespace oracle {

double dice(const std::vector<double>& p, const std::vector<double>& g, double eps) {
  double inter = 0, pp = 0, gg = 0;
  for (size_t i = 0; i < p.size(); ++i) {
    inter += p[i] * g[i];
    pp += p[i] * p[i];
    gg += g[i] * g[i];
  }
  return 1.0 - (2.0 * inter + eps) / (pp + gg + eps);
}

double focal(const std::vector<double>& p, const std::vector<double>& g, double alpha, double gamma, double eps) {
  double sum = 0;
  for (size_t i = 0; i < p.size(); ++i) {
    const double q = std::min(std::max(p[i], eps), 1.0 - eps);
    sum += -alpha * g[i] * std::pow(1.0 - q, gamma) * std::log(q) -
           (1.0 - alpha) * (1.0 - g[i]) * std::pow(q, gamma) * std::log(1.0 - q);
  }
  return sum / static_cast<double>(p.size());
}

double bce(const std::vector<double>& p, const std::vector<double>& g, double eps) {
  double sum = 0;
  for (size_t i = 0; i < p.size(); ++i) {
    const double q = std::min(std::max(p[i], eps), 1.0 - eps);
    sum += -g[i] * std::log(q) - (1.0 - g[i]) * std::log(1.0 - q);
  }
  return sum / static_cast<double>(p.size());
}

Counts recount(const std::vector<int>& pred, const std::vector<int>& gt) {
  Counts c;
  for (size_t i = 0; i < pred.size(); ++i) {
    if (pred[i] && gt[i]) ++c.tp;
    if (pred[i] && !gt[i]) ++c.fp;
    if (!pred[i] && gt[i]) ++c.fn;
    if (!pred[i] && !gt[i]) ++c.tn;
  }
  return c;
}

namespace {

// |A n B| / |A u B| for indicator vectors, 1 when both sets are empty.
double jaccard(const std::vector<int>& a, const std::vector<int>& b) {
  int64_t inter = 0, uni = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    inter += a[i] && b[i];
    uni += a[i] || b[i];
  }
  return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace

Metrics metrics_from_sets(const std::vector<int>& pred, const std::vector<int>& gt) {
  std::vector<int> pred_bg(pred.size()), gt_bg(gt.size());
  for (size_t i = 0; i < pred.size(); ++i) {
    pred_bg[i] = !pred[i];
    gt_bg[i] = !gt[i];
  }
  Metrics m{};
  m.iou_fg = jaccard(pred, gt);
  m.iou_bg = jaccard(pred_bg, gt_bg);
  m.miou = (m.iou_fg + m.iou_bg) / 2.0;

  int64_t pred_n = 0, gt_n = 0, hit = 0;
  for (size_t i = 0; i < pred.size(); ++i) {
    pred_n += pred[i];
    gt_n += gt[i];
    hit += pred[i] && gt[i];
  }
  // Precision compares the predicted set with the hits; recall the ground truth.
  if (pred_n == 0) {
    m.precision = gt_n == 0 ? 1.0 : 0.0;
  } else {
    m.precision = static_cast<double>(hit) / pred_n;
  }
  if (gt_n == 0) {
    m.recall = pred_n == 0 ? 1.0 : 0.0;
  } else {
    m.recall = static_cast<double>(hit) / gt_n;
  }
  m.f1 = m.precision + m.recall > 0 ? 2 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
  return m;
}

std::vector<double> f1_sweep(const std::vector<std::vector<double>>& probs, const std::vector<std::vector<int>>& gts,
                             const std::vector<double>& thresholds) {
  std::vector<double> out;
  for (double t : thresholds) {
    std::vector<int> pred_all, gt_all;
    for (size_t k = 0; k < probs.size(); ++k) {
      for (size_t i = 0; i < probs[k].size(); ++i) {
        pred_all.push_back(probs[k][i] > t ? 1 : 0);
        gt_all.push_back(gts[k][i]);
      }
    }
    out.push_back(metrics_from_sets(pred_all, gt_all).f1);
  }
  return out;
}

namespace {

int64_t cbr(int64_t in, int64_t out, int64_t k) { return k * k * in * out + 2 * out; }
int64_t head(int64_t in, int64_t out) { return in * out + out; }

int64_t context_channels(const auraseg::ModelConfig& cfg) {
  return cfg.use_aspp ? cfg.aspp_out_channels : cfg.encoder_channels.back();
}

}  // namespace

int64_t backbone_parameters(const auraseg::ModelConfig& cfg) {
  const auto& c = cfg.encoder_channels;
  int64_t n = cbr(cfg.in_channels, c[0], 3);
  for (size_t i = 1; i < c.size(); ++i) {
    const int64_t half = c[i] / 2;
    n += cbr(c[i - 1], c[i], 3);
    n += cfg.encoder_blocks[i - 1] * (cbr(half, half, 1) + cbr(half, half, 3));
    n += cbr(c[i], c[i], 1);
  }
  return n;
}

int64_t aspp_parameters(const auraseg::ModelConfig& cfg) {
  if (!cfg.use_aspp) return 0;
  const int64_t branches = static_cast<int64_t>(cfg.aspp_dilations.size());
  return branches * cbr(cfg.encoder_channels.back(), cfg.aspp_filters, 3) +
         cbr(branches * cfg.aspp_filters, cfg.aspp_out_channels, 1);
}

int64_t decoder_parameters(const auraseg::ModelConfig& cfg) {
  if (!cfg.use_apud) return head(context_channels(cfg), cfg.num_classes);
  const auto& enc = cfg.encoder_channels;
  int64_t below = context_channels(cfg);
  int64_t n = 0;
  for (size_t s = 0; s < cfg.decoder_channels.size(); ++s) {
    const int64_t w = cfg.decoder_channels[s];
    const int64_t skip = enc[enc.size() - 2 - s];
    const int64_t reduced = std::max<int64_t>(w / cfg.se_reduction, 4);
    const int64_t k = cfg.spatial_kernel;
    n += cbr(below, w, 1) + cbr(skip, w, 1);
    n += head(w, reduced) + head(reduced, w);
    n += 2 * k * k + 1;
    n += cbr(w, w, 3);
    n += head(w, cfg.num_classes);
    below = w;
  }
  return n + head(below, cfg.num_classes);
}

int64_t rbrm_parameters(const auraseg::ModelConfig& cfg) {
  if (!cfg.use_rbrm) return 0;
  std::vector<int64_t> level{cfg.rbrm_base_channels};
  for (int l = 1; l <= cfg.rbrm_depth; ++l) level.push_back(int64_t{cfg.rbrm_base_channels} << (l - 1));
  int64_t n = cbr(cfg.num_classes, level[0], 3);
  for (int l = 1; l <= cfg.rbrm_depth; ++l) n += cbr(level[l - 1], level[l], 3) + cbr(level[l], level[l - 1], 3);
  n += cbr(level.back(), level.back(), 3);
  return n + head(level[0], cfg.num_classes);
}

int64_t parameter_count(const auraseg::ModelConfig& cfg) {
  return backbone_parameters(cfg) + aspp_parameters(cfg) + decoder_parameters(cfg) + rbrm_parameters(cfg);
}

std::vector<double> conv2d_single(const std::vector<double>& x, int h, int w, const std::vector<double>& kernel,
                                  int k, int dilation, int pad) {
  std::vector<double> out(static_cast<size_t>(h) * w, 0.0);
  for (int y = 0; y < h; ++y) {
    for (int xx = 0; xx < w; ++xx) {
      double acc = 0;
      for (int i = 0; i < k; ++i) {
        for (int j = 0; j < k; ++j) {
          const int sy = y - pad + i * dilation;
          const int sx = xx - pad + j * dilation;
          if (sy < 0 || sy >= h || sx < 0 || sx >= w) continue;
          acc += kernel[i * k + j] * x[sy * w + sx];
        }
      }
      out[y * w + xx] = acc;
    }
  }
  return out;
}

namespace {

std::vector<int> band_mask(const std::vector<int>& gt, int h, int w, int radius) {
  std::vector<int> boundary(gt.size(), 0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int v = gt[y * w + x];
      const int nbr[4][2] = {{y - 1, x}, {y + 1, x}, {y, x - 1}, {y, x + 1}};
      for (const auto& n : nbr) {
        if (n[0] >= 0 && n[0] < h && n[1] >= 0 && n[1] < w && gt[n[0] * w + n[1]] != v) boundary[y * w + x] = 1;
      }
    }
  }
  std::vector<int> band(gt.size(), 0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int by = 0; by < h && !band[y * w + x]; ++by) {
        for (int bx = 0; bx < w; ++bx) {
          if (boundary[by * w + bx] && (by - y) * (by - y) + (bx - x) * (bx - x) <= radius * radius) {
            band[y * w + x] = 1;
            break;
          }
        }
      }
    }
  }
  return band;
}

}  // namespace

double boundary_fraction(const std::vector<int>& pred, const std::vector<int>& gt, int h, int w, int radius) {
  const auto band = band_mask(gt, h, w, radius);
  int64_t errors = 0, in_band = 0;
  for (size_t i = 0; i < gt.size(); ++i) {
    if (pred[i] != gt[i]) {
      ++errors;
      in_band += band[i];
    }
  }
  return errors == 0 ? 0.0 : static_cast<double>(in_band) / errors;
}

int64_t band_area(const std::vector<int>& gt, int h, int w, int radius) {
  const auto band = band_mask(gt, h, w, radius);
  int64_t n = 0;
  for (int v : band) n += v;
  return n;
}

torch::Tensor numeric_gradient(const std::function<double(const torch::Tensor&)>& f, const torch::Tensor& x,
                               double step) {
  auto base = x.detach().clone().to(torch::kFloat64).contiguous();
  auto grad = torch::zeros_like(base);
  auto flat = base.view({-1});
  auto gflat = grad.view({-1});
  for (int64_t i = 0; i < flat.numel(); ++i) {
    const double orig = flat[i].item<double>();
    flat[i] = orig + step;
    const double up = f(base);
    flat[i] = orig - step;
    const double down = f(base);
    flat[i] = orig;
    gflat[i] = (up - down) / (2 * step);
  }
  return grad;
}

double relative_error(const torch::Tensor& a, const torch::Tensor& b) {
  const double diff = (a - b).norm().item<double>();
  const double scale = std::max({a.norm().item<double>(), b.norm().item<double>(), 1e-300});
  return diff / scale;
}

std::vector<double> to_vector(const torch::Tensor& t) {
  auto c = t.detach().to(torch::kFloat64).contiguous().view({-1});
  return std::vector<double>(c.data_ptr<double>(), c.data_ptr<double>() + c.numel());
}

std::vector<int> to_int_vector(const torch::Tensor& t) {
  auto c = t.detach().to(torch::kInt32).contiguous().view({-1});
  return std::vector<int>(c.data_ptr<int>(), c.data_ptr<int>() + c.numel());
}

auraseg::ModelConfig small_config() {
  auraseg::ModelConfig cfg;
  cfg.encoder_channels = {8, 16, 16, 24, 32};
  cfg.encoder_blocks = {1, 1, 1, 1};
  cfg.aspp_filters = 8;
  cfg.aspp_out_channels = 32;
  cfg.decoder_channels = {32, 16, 16, 8};
  cfg.rbrm_base_channels = 4;
  cfg.input_height = 64;
  cfg.input_width = 64;
  return cfg;
}

}  // namespace oracle
