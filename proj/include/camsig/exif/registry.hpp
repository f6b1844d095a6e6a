#pragma once

#include <array>
#include <fstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "camsig/common.hpp"

namespace camsig::exif {

// The canonical tag vocabulary. Iteration order of every ExifRecord and the
// fixed serialization order both follow this list; it is sorted by ASCII so
// that rebuilding the registry from any corpus yields a reproducible order.
class TagRegistry {
 public:
  TagRegistry() = default;

  explicit TagRegistry(std::vector<std::string> names) : names_(std::move(names)) {
    for (size_t i = 0; i < names_.size(); ++i) index_[names_[i]] = static_cast<int>(i);
  }

  // The 44 tags used for training.
  static const TagRegistry& default_registry() {
    static const TagRegistry reg{std::vector<std::string>{
        "Aperture Value",
        "Camera Make",
        "Camera Model",
        "Color Space",
        "Components Configuration",
        "Compressed Bits",
        "Custom Rendered",
        "Date/Time",
        "Date/Time Digitized",
        "Date/Time Original",
        "Digital Zoom Ratio",
        "Exif Image Height",
        "Exif Image Width",
        "Exif Version",
        "Exposure Bias Value",
        "Exposure Mode",
        "Exposure Program",
        "Exposure Time",
        "F-Number",
        "File Source",
        "Flash",
        "FlashPix Version",
        "Focal Length",
        "Focal Plane X Resolution",
        "Focal Plane Y Resolution",
        "Gain Control",
        "ISO Speed Ratings",
        "Interoperability Index",
        "Interoperability Version",
        "Max Aperture Value",
        "Metering Mode",
        "Orientation",
        "Resolution Unit",
        "Scene Capture Type",
        "Sensing Method",
        "Shutter Speed Value",
        "Software",
        "Thumbnail Compression",
        "Thumbnail Length",
        "Thumbnail Offset",
        "White Balance Mode",
        "X Resolution",
        "Y Resolution",
        "YCbCr Positioning",
    }};
    return reg;
  }

  const std::vector<std::string>& names() const { return names_; }
  size_t size() const { return names_.size(); }

  // -1 if the name is not a registry tag.
  int index_of(std::string_view name) const {
    auto it = index_.find(std::string(name));
    return it == index_.end() ? -1 : it->second;
  }

  bool contains(std::string_view name) const { return index_of(name) >= 0; }

  // Values of this tag are merged by leading brand token before quantization.
  bool brand_merged(std::string_view name) const { return name == "Camera Model"; }

  void save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write registry file: " + path);
    for (const auto& n : names_) out << n << '\n';
  }

  static TagRegistry load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot read registry file: " + path);
    std::vector<std::string> names;
    std::string line;
    while (std::getline(in, line)) {
      std::string t = trim(line);
      if (!t.empty() && t[0] != '#') names.push_back(std::move(t));
    }
    return TagRegistry(std::move(names));
  }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, int> index_;
};

}  // namespace camsig::exif
