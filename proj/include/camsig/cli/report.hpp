#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "camsig/common.hpp"
#include "camsig/image/image.hpp"

namespace camsig::cli {

// [0,1] map rendered as an 8-bit grayscale PNG.
inline img::Image response_to_image(const Eigen::MatrixXd& response) {
  img::Image out(static_cast<int>(response.cols()), static_cast<int>(response.rows()), 1);
  for (int y = 0; y < out.height; ++y)
    for (int x = 0; x < out.width; ++x)
      out.at(x, y, 0) = static_cast<uint8_t>(
          std::lround(std::clamp(response(y, x), 0.0, 1.0) * 255.0));
  return out;
}

// Response map alpha-blended at 0.5 over the image; low response (suspected
// splice) shows red, high response green. Presentation only.
inline img::Image overlay_response(const img::Image& image, const Eigen::MatrixXd& response) {
  img::Image out(image.width, image.height, 3);
  for (int y = 0; y < image.height; ++y)
    for (int x = 0; x < image.width; ++x) {
      const double r = std::clamp(response(y, x), 0.0, 1.0);
      const double tint[3] = {255.0 * (1.0 - r), 255.0 * r, 40.0};
      for (int c = 0; c < 3; ++c)
        out.at(x, y, c) =
            static_cast<uint8_t>(std::lround(0.5 * image.at(x, y, c) + 0.5 * tint[c]));
    }
  return out;
}

// All command outputs land in one run directory: <root>/<stamp>-<confhash>.
// The stamp is wall-clock (reruns differ only here); an explicit run_dir
// pins the location for reproducibility checks.
inline std::string make_run_dir(const std::string& root, uint64_t config_hash,
                                const std::string& explicit_dir = {}) {
  std::string dir;
  if (!explicit_dir.empty()) {
    dir = explicit_dir;
  } else {
    const auto now = std::chrono::system_clock::now().time_since_epoch();
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(now).count();
    dir = root + "/" + std::to_string(secs) + "-" + hash_hex(config_hash).substr(0, 8);
  }
  std::filesystem::create_directories(dir);
  return dir;
}

inline void write_json(const std::string& path, const nlohmann::json& doc) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write report: " + path);
  out << doc.dump(2) << '\n';
}

inline void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write file: " + path);
  out << content;
}

}  // namespace camsig::cli
