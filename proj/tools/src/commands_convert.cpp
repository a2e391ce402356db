#include "commands.hpp"

#include "auraseg/errors.hpp"
#include "auraseg/key_value.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <ostream>
#include <set>

namespace auraseg::cli {

namespace fs = std::filesystem;

namespace {

const std::set<std::string> kImageExtensions{".png", ".jpg", ".jpeg", ".bmp", ".ppm"};

bool is_image(const fs::path& p) {
  auto ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return kImageExtensions.count(ext) != 0;
}

// Image files directly inside `dir`, sorted by name.
std::vector<fs::path> list_images(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && is_image(entry.path())) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

std::map<std::string, fs::path> by_stem(const std::vector<fs::path>& files) {
  std::map<std::string, fs::path> out;
  for (const auto& f : files) out.emplace(f.stem().string(), f);
  return out;
}

[[noreturn]] void missing_layout(const std::string& kind, const fs::path& root, const std::vector<std::string>& missing) {
  std::string msg = kind + " layout not found under " + root.string() + "; missing:";
  for (const auto& m : missing) msg += " " + m;
  throw LayoutError(msg);
}

void require_dirs(const std::string& kind, const fs::path& root, const std::vector<std::string>& dirs) {
  std::vector<std::string> missing;
  for (const auto& d : dirs) {
    if (!fs::is_directory(root / d)) missing.push_back(d + "/");
  }
  if (!missing.empty()) missing_layout(kind, root, missing);
}

std::vector<std::string> read_list(const fs::path& path) {
  std::ifstream in(path);
  std::vector<std::string> names;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t')) line.pop_back();
    if (!line.empty() && line.front() != '#') names.push_back(line);
  }
  return names;
}

// images/ and masks/ side by side, membership from train.txt / val.txt /
// test.txt (one image file name or stem per line).
std::vector<SampleRecord> folder_pairs(const fs::path& root) {
  require_dirs("folder_pairs", root, {"images", "masks"});
  bool any_list = false;
  for (const char* s : {"train", "val", "test"}) any_list = any_list || fs::is_regular_file(root / (std::string(s) + ".txt"));
  if (!any_list) missing_layout("folder_pairs", root, {"train.txt|val.txt|test.txt"});

  const auto images = by_stem(list_images(root / "images"));
  const auto masks = by_stem(list_images(root / "masks"));
  std::vector<SampleRecord> records;
  for (Split split : {Split::Train, Split::Val, Split::Test}) {
    const fs::path list = root / (std::string(to_string(split)) + ".txt");
    if (!fs::is_regular_file(list)) continue;
    for (const auto& name : read_list(list)) {
      const std::string stem = fs::path(name).stem().string();
      const auto img = images.find(stem);
      const auto msk = masks.find(stem);
      if (img == images.end()) throw LayoutError(list.string() + " lists '" + name + "' but images/ has no such file");
      if (msk == masks.end()) throw LayoutError("no mask in masks/ for image '" + name + "'");
      records.push_back({fs::relative(img->second, root), fs::relative(msk->second, root), split});
    }
  }
  return records;
}

// <split>/rgb and <split>/label for split in train, val, test; label images
// mark the drivable region in white.
std::vector<SampleRecord> gmrp(const fs::path& root) {
  std::vector<SampleRecord> records;
  std::vector<std::string> missing;
  bool any = false;
  for (Split split : {Split::Train, Split::Val, Split::Test}) {
    const std::string s(to_string(split));
    const bool rgb = fs::is_directory(root / s / "rgb");
    const bool label = fs::is_directory(root / s / "label");
    if (!rgb) missing.push_back(s + "/rgb/");
    if (!label) missing.push_back(s + "/label/");
    if (!rgb || !label) continue;
    any = true;
    const auto labels = by_stem(list_images(root / s / "label"));
    for (const auto& img : list_images(root / s / "rgb")) {
      const auto lbl = labels.find(img.stem().string());
      if (lbl == labels.end()) throw LayoutError("no label for " + img.string());
      records.push_back({fs::relative(img, root), fs::relative(lbl->second, root), split});
    }
  }
  if (!any) missing_layout("gmrp", root, missing);
  return records;
}

// KITTI road: training/image_2/<cat>_<id>.png with ground truth
// training/gt_image_2/<cat>_road_<id>.png, road marked magenta. Binary masks
// (road where the blue channel exceeds 127) are written to auraseg_masks/.
// Only the training half has ground truth, so it is split 8:1:1 by sorted
// index into train / val / test.
std::vector<SampleRecord> kitti_road(const fs::path& root_in) {
  fs::path root = root_in;
  if (!fs::is_directory(root / "training") && fs::is_directory(root / "data_road" / "training")) root /= "data_road";
  require_dirs("kitti_road", root, {"training/image_2", "training/gt_image_2"});
  const fs::path mask_dir = root / "auraseg_masks";
  fs::create_directories(mask_dir);

  std::vector<SampleRecord> records;
  size_t index = 0;
  for (const auto& img : list_images(root / "training" / "image_2")) {
    const std::string stem = img.stem().string();
    const auto underscore = stem.find('_');
    if (underscore == std::string::npos) continue;
    const fs::path gt = root / "training" / "gt_image_2" /
                        (stem.substr(0, underscore) + "_road" + stem.substr(underscore) + ".png");
    if (!fs::is_regular_file(gt)) throw LayoutError("no road ground truth for " + img.string());

    const RawImage raw = read_image(gt);
    RawImage mask;
    mask.height = raw.height;
    mask.width = raw.width;
    mask.channels = 1;
    mask.pixels.resize(static_cast<size_t>(raw.height) * raw.width);
    const int blue = raw.channels >= 3 ? 2 : 0;
    for (int y = 0; y < raw.height; ++y) {
      for (int x = 0; x < raw.width; ++x) {
        mask.pixels[static_cast<size_t>(y) * raw.width + x] = raw.at(y, x, blue) > 127 ? 255 : 0;
      }
    }
    const fs::path mask_path = mask_dir / (stem + ".png");
    write_png(mask_path, mask);

    const Split split = index % 10 == 8 ? Split::Val : index % 10 == 9 ? Split::Test : Split::Train;
    records.push_back({fs::relative(img, root_in), fs::relative(mask_path, root_in), split});
    ++index;
  }
  if (records.empty()) missing_layout("kitti_road", root, {"training/image_2/*.png"});
  return records;
}

}  // namespace

std::vector<SampleRecord> discover_layout(const std::string& kind, const fs::path& root) {
  if (!fs::is_directory(root)) throw LayoutError("dataset root " + root.string() + " is not a directory");
  if (kind == "folder_pairs") return folder_pairs(root);
  if (kind == "gmrp") return gmrp(root);
  if (kind == "kitti_road") return kitti_road(root);
  throw ConfigError("unknown dataset kind '" + kind + "' (expected gmrp, kitti_road or folder_pairs)");
}

int cmd_convert_manifest(const ConvertArgs& args, std::ostream& out) {
  const auto records = discover_layout(args.kind, args.root);
  const fs::path out_dir = args.out_manifest.has_parent_path() ? args.out_manifest.parent_path() : fs::path(".");
  fs::create_directories(out_dir);
  write_manifest(records, args.out_manifest);

  KeyValueDocument snapshot;
  snapshot.set("convert.kind", args.kind);
  snapshot.set("convert.root", fs::absolute(args.root).string());
  snapshot.set("convert.out", fs::absolute(args.out_manifest).string());
  snapshot.save(out_dir / kResolvedConfigName);

  const auto manifest = load_manifest(args.root, args.out_manifest);
  const auto counts = manifest.counts();
  out << "wrote " << args.out_manifest.string() << ": train " << counts.train << ", val " << counts.val << ", test "
      << counts.test << '\n';
  return kSuccess;
}

}  // namespace auraseg::cli
