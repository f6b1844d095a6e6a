#pragma once

#include <array>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "camsig/common.hpp"
#include "camsig/exif/record.hpp"
#include "camsig/image/image.hpp"
#include "camsig/train/trainer.hpp"

// Synthetic camera fleet for desk-scale experiments. Each camera applies a
// distinct imaging pipeline (tone curve, white balance, sensor noise, chroma
// subsampling, DCT quantization) and stamps a consistent metadata record;
// per-shot ISO and exposure settings modulate noise level and brightness so
// they are recoverable from pixels.

namespace camsig::synth {

struct CameraProfile {
  std::string make;
  std::string model;
  std::string software;
  double gamma;           // tone curve exponent
  double s_curve;         // sigmoid contrast mix, 0..1
  double wb_r, wb_b;      // white balance gains (green fixed at 1)
  double base_noise;      // gaussian sigma at ISO 100, 8-bit units
  int chroma_mode;        // 0 = 4:4:4, 1 = 4:2:2, 2 = 4:2:0
  int quality;            // DCT quantization quality, 1..100
  double sharpen;         // unsharp-mask strength applied by the ISP
  std::string color_space;
  std::string fnumber;
  std::string focal_length;
  std::string white_balance;
};

inline const std::array<CameraProfile, 8>& camera_fleet() {
  static const std::array<CameraProfile, 8> fleet{{
      {"Aurica", "Aurica AX-1", "AuricaOS 2.3", 0.70, 0.10, 1.12, 0.88, 1.0, 2, 88,
       0.0, "sRGB", "F2.8", "18.0 mm", "Auto"},
      {"Bellona", "Bellona B200", "PhotoCore 5", 0.85, 0.30, 0.92, 1.10, 1.8, 0, 95,
       0.5, "sRGB", "F4", "24.0 mm", "Auto"},
      {"Cervus", "Cervus C9", "CervusFW 1.1", 1.00, 0.00, 1.14, 1.00, 0.6, 1, 76,
       1.0, "sRGB", "F5.6", "35.0 mm", "Manual"},
      {"Dorado", "Dorado D5", "DoradoLab 7", 1.15, 0.20, 0.88, 0.96, 2.6, 2, 82,
       0.3, "sRGB", "F2", "50.0 mm", "Auto"},
      {"Electra", "Electra E30", "Lumen 3.0", 0.75, 0.40, 1.00, 1.12, 1.3, 0, 92,
       0.9, "Undefined", "F3.5", "28.0 mm", "Manual"},
      {"Faxon", "Faxon F7", "FaxonSuite 4", 0.95, 0.10, 1.08, 0.86, 3.4, 1, 70,
       0.15, "Undefined", "F8", "6.3 mm", "Auto"},
      {"Gemina", "Gemina G2", "GeminaCam 9", 1.10, 0.30, 0.86, 1.08, 0.5, 2, 85,
       0.7, "Undefined", "F1.8", "85.0 mm", "Manual"},
      {"Hyperion", "Hyperion H1", "HyperWorks 6", 1.25, 0.00, 1.10, 1.04, 2.2, 0, 72,
       1.2, "Undefined", "F11", "12.0 mm", "Auto"},
  }};
  return fleet;
}

struct ShotSettings {
  int iso = 100;                 // noise multiplier = iso / 100
  int exposure_index = 1;        // 0..3
};

inline const std::array<const char*, 4>& exposure_names() {
  static const std::array<const char*, 4> names{"1/30 sec", "1/60 sec", "1/125 sec",
                                                "1/250 sec"};
  return names;
}

inline double exposure_brightness(int exposure_index) {
  static const double factors[4] = {1.35, 1.05, 0.84, 0.64};
  return factors[exposure_index];
}

// ---------------------------------------------------------------------------
// Scene synthesis: smooth gradients, soft blobs, and band-limited texture.

inline img::Image render_scene(int width, int height, Rng& rng) {
  img::Image im(width, height, 3);
  const double ang = rng.uniform(0.0, 6.283185307179586);
  const double gx = std::cos(ang), gy = std::sin(ang);
  double c0[3], c1[3];
  for (int c = 0; c < 3; ++c) {
    c0[c] = rng.uniform(85.0, 150.0);
    c1[c] = rng.uniform(105.0, 180.0);
  }
  // low-frequency texture grid, bilinearly upsampled
  const int gw = 9, gh = 9;
  std::vector<double> grid(gw * gh * 3);
  for (auto& v : grid) v = rng.uniform(-18.0, 18.0);
  auto tex = [&](double fx, double fy, int c) {
    const double u = fx * (gw - 1), v = fy * (gh - 1);
    const int x0 = std::min(gw - 2, static_cast<int>(u)), y0 = std::min(gh - 2, static_cast<int>(v));
    const double du = u - x0, dv = v - y0;
    auto g = [&](int x, int y) { return grid[(y * gw + x) * 3 + c]; };
    return (g(x0, y0) * (1 - du) + g(x0 + 1, y0) * du) * (1 - dv) +
           (g(x0, y0 + 1) * (1 - du) + g(x0 + 1, y0 + 1) * du) * dv;
  };

  struct Blob {
    double cx, cy, rx, ry, color[3];
  };
  std::vector<Blob> blobs;
  const int n_blobs = 3 + rng.uniform_int(6);
  for (int b = 0; b < n_blobs; ++b) {
    Blob blob;
    blob.cx = rng.uniform(0.0, width);
    blob.cy = rng.uniform(0.0, height);
    blob.rx = rng.uniform(width * 0.06, width * 0.30);
    blob.ry = rng.uniform(height * 0.06, height * 0.30);
    for (int c = 0; c < 3; ++c) blob.color[c] = rng.uniform(60.0, 195.0);
    blobs.push_back(blob);
  }

  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      const double fx = static_cast<double>(x) / (width - 1);
      const double fy = static_cast<double>(y) / (height - 1);
      const double t = 0.5 + 0.5 * (gx * (fx - 0.5) + gy * (fy - 0.5)) * 2.0;
      for (int c = 0; c < 3; ++c) {
        double v = c0[c] * (1 - t) + c1[c] * t + tex(fx, fy, c);
        for (const auto& b : blobs) {
          const double dx = (x - b.cx) / b.rx, dy = (y - b.cy) / b.ry;
          const double d2 = dx * dx + dy * dy;
          if (d2 < 1.0) {
            const double w = (1.0 - d2) * (1.0 - d2);  // soft edge
            v = v * (1 - w) + b.color[c] * w;
          }
        }
        im.at(x, y, c) = static_cast<uint8_t>(std::clamp(v, 0.0, 255.0));
      }
    }
  return im;
}

// ---------------------------------------------------------------------------
// Camera pipeline

namespace detail {

inline const Eigen::Matrix<double, 8, 8>& dct_basis() {
  static const Eigen::Matrix<double, 8, 8> c = [] {
    Eigen::Matrix<double, 8, 8> m;
    for (int k = 0; k < 8; ++k)
      for (int n = 0; n < 8; ++n)
        m(k, n) = (k == 0 ? std::sqrt(1.0 / 8.0) : std::sqrt(2.0 / 8.0)) *
                  std::cos((2 * n + 1) * k * 3.14159265358979323846 / 16.0);
    return m;
  }();
  return c;
}

// standard luminance/chrominance quantization tables
inline const int* base_quant(bool luma) {
  static const int kLuma[64] = {16, 11, 10, 16, 24,  40,  51,  61,  12, 12, 14, 19, 26,
                                58, 60, 55, 14, 13,  16,  24,  40,  57, 69, 56, 14, 17,
                                22, 29, 51, 87, 80,  62,  18,  22,  37, 56, 68, 109, 103,
                                77, 24, 35, 55, 64,  81,  104, 113, 92, 49, 64, 78,  87,
                                103, 121, 120, 101, 72, 92, 95, 98, 112, 100, 103, 99};
  static const int kChroma[64] = {17, 18, 24, 47, 99, 99, 99, 99, 18, 21, 26, 66, 99, 99, 99,
                                  99, 24, 26, 56, 99, 99, 99, 99, 99, 47, 66, 99, 99, 99, 99,
                                  99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99,
                                  99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99,
                                  99, 99, 99, 99};
  return luma ? kLuma : kChroma;
}

inline void quantize_plane(Eigen::MatrixXd& plane, int quality, bool luma) {
  const int scale = quality < 50 ? 5000 / quality : 200 - 2 * quality;
  Eigen::Matrix<double, 8, 8> q;
  const int* base = base_quant(luma);
  for (int i = 0; i < 64; ++i) {
    const int v = std::clamp((base[i] * scale + 50) / 100, 1, 255);
    q(i / 8, i % 8) = static_cast<double>(v);
  }
  const auto& c = dct_basis();
  const int bh = static_cast<int>(plane.rows()) / 8, bw = static_cast<int>(plane.cols()) / 8;
  for (int by = 0; by < bh; ++by)
    for (int bx = 0; bx < bw; ++bx) {
      Eigen::Matrix<double, 8, 8> block = plane.block<8, 8>(by * 8, bx * 8);
      block.array() -= 128.0;
      Eigen::Matrix<double, 8, 8> coef = c * block * c.transpose();
      coef = (coef.array() / q.array()).round() * q.array();
      block = c.transpose() * coef * c;
      plane.block<8, 8>(by * 8, bx * 8) = block.array() + 128.0;
    }
}

}  // namespace detail

inline img::Image apply_camera(const img::Image& scene, const CameraProfile& cam,
                               const ShotSettings& shot, Rng& rng) {
  if (scene.channels != 3) throw DataError("apply_camera: RGB scene required");
  if (scene.width % 8 != 0 || scene.height % 8 != 0)
    throw DataError("apply_camera: dimensions must be multiples of 8");
  const int w = scene.width, h = scene.height;
  const double brightness = exposure_brightness(shot.exposure_index);
  const double wb[3] = {cam.wb_r, 1.0, cam.wb_b};
  const double sigma = cam.base_noise * (shot.iso / 100.0);

  // exposure scaling and motion blur (longer exposure = more horizontal
  // smear), then white balance, tone curve, and sensor noise
  Eigen::MatrixXd rgb[3];
  for (int c = 0; c < 3; ++c) rgb[c].resize(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c)
        rgb[c](y, x) = scene.at(x, y, c) / 255.0 * brightness;
  const int blur_passes = 3 - shot.exposure_index;
  for (int pass = 0; pass < blur_passes; ++pass)
    for (auto& plane : rgb) {
      Eigen::MatrixXd blurred = plane;
      for (int y = 0; y < h; ++y)
        for (int x = 1; x + 1 < w; ++x)
          blurred(y, x) = 0.25 * plane(y, x - 1) + 0.5 * plane(y, x) + 0.25 * plane(y, x + 1);
      plane = std::move(blurred);
    }
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c) {
        double v = std::clamp(rgb[c](y, x) * wb[c], 0.0, 1.0);
        const double curved = std::pow(v, cam.gamma);
        const double sig = curved * curved * (3.0 - 2.0 * curved);  // smoothstep contrast
        v = (1.0 - cam.s_curve) * curved + cam.s_curve * sig;
        v = v * 255.0 + sigma * rng.normal();
        rgb[c](y, x) = std::clamp(v, 0.0, 255.0);
      }

  // ISP sharpening (unsharp mask); amplifies detail and sensor noise alike
  if (cam.sharpen > 0.0) {
    for (auto& plane : rgb) {
      Eigen::MatrixXd blurred = plane;
      for (int y = 1; y + 1 < h; ++y)
        for (int x = 1; x + 1 < w; ++x)
          blurred(y, x) = (plane(y - 1, x) + plane(y + 1, x) + plane(y, x - 1) +
                           plane(y, x + 1) + 4.0 * plane(y, x)) /
                          8.0;
      plane = (plane + cam.sharpen * (plane - blurred)).cwiseMax(0.0).cwiseMin(255.0);
    }
  }

  // RGB -> YCbCr (BT.601 full range)
  Eigen::MatrixXd ycc[3];
  ycc[0] = 0.299 * rgb[0] + 0.587 * rgb[1] + 0.114 * rgb[2];
  ycc[1] = (rgb[2] - ycc[0]) * 0.564 + Eigen::MatrixXd::Constant(h, w, 128.0);
  ycc[2] = (rgb[0] - ycc[0]) * 0.713 + Eigen::MatrixXd::Constant(h, w, 128.0);

  // chroma subsampling: box-average and nearest-neighbor replication
  if (cam.chroma_mode >= 1) {
    for (int c = 1; c < 3; ++c) {
      for (int y = 0; y < h; y += cam.chroma_mode == 2 ? 2 : 1)
        for (int x = 0; x < w; x += 2) {
          if (cam.chroma_mode == 2) {
            const double m = (ycc[c](y, x) + ycc[c](y, x + 1) + ycc[c](y + 1, x) +
                              ycc[c](y + 1, x + 1)) /
                             4.0;
            ycc[c](y, x) = ycc[c](y, x + 1) = ycc[c](y + 1, x) = ycc[c](y + 1, x + 1) = m;
          } else {
            const double m = (ycc[c](y, x) + ycc[c](y, x + 1)) / 2.0;
            ycc[c](y, x) = ycc[c](y, x + 1) = m;
          }
        }
    }
  }

  detail::quantize_plane(ycc[0], cam.quality, true);
  detail::quantize_plane(ycc[1], cam.quality, false);
  detail::quantize_plane(ycc[2], cam.quality, false);

  img::Image out(w, h, 3);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double yy = ycc[0](y, x);
      const double cb = ycc[1](y, x) - 128.0;
      const double cr = ycc[2](y, x) - 128.0;
      const double r = yy + 1.403 * cr;
      const double g = yy - 0.344 * cb - 0.714 * cr;
      const double b = yy + 1.773 * cb;
      out.at(x, y, 0) = static_cast<uint8_t>(std::clamp(r, 0.0, 255.0));
      out.at(x, y, 1) = static_cast<uint8_t>(std::clamp(g, 0.0, 255.0));
      out.at(x, y, 2) = static_cast<uint8_t>(std::clamp(b, 0.0, 255.0));
    }
  return out;
}

// ---------------------------------------------------------------------------
// Metadata records

// Capture timestamps come from a pool of 64 values so that date words stay in
// the tokenizer vocabulary; records remain distinct through the combination
// (camera, iso, exposure, date).
inline std::string pooled_datetime(uint64_t image_index) {
  const int slot = static_cast<int>(image_index / 128 % 64);
  char datetime[32];
  std::snprintf(datetime, sizeof datetime, "2022:06:%02d %02d:%02d:00", 1 + slot % 8,
                9 + slot / 8, 5 * (slot % 12));
  return datetime;
}

inline exif::ExifRecord shot_record(const CameraProfile& cam, const ShotSettings& shot,
                                    uint64_t image_index, int width, int height) {
  std::vector<std::pair<std::string, std::string>> pairs{
      {"Camera Make", cam.make},
      {"Camera Model", cam.model},
      {"Software", cam.software},
      {"Color Space", cam.color_space},
      {"White Balance Mode", cam.white_balance},
      {"F-Number", cam.fnumber},
      {"Focal Length", cam.focal_length},
      {"Thumbnail Compression", cam.chroma_mode > 0 ? "JPEG" : "Uncompressed"},
      {"Compressed Bits", cam.quality >= 80 ? "4 bits per pixel" : "2 bits per pixel"},
      {"ISO Speed Ratings", std::to_string(shot.iso)},
      {"Exposure Time", exposure_names()[shot.exposure_index]},
      {"Date/Time Original", pooled_datetime(image_index)},
      {"Exif Image Width", std::to_string(width) + " pixels"},
      {"Exif Image Height", std::to_string(height) + " pixels"},
  };
  return exif::ExifRecord::from_pairs(exif::TagRegistry::default_registry(), pairs,
                                      "synth-" + std::to_string(image_index));
}

// Deterministic per-index example: camera, settings, and scene all derive
// from (seed, index), so corpus generation order never matters.
inline train::TrainExample make_example(uint64_t index, int image_size, uint64_t seed) {
  const auto& fleet = camera_fleet();
  const int cam_idx = static_cast<int>(index % fleet.size());
  const CameraProfile& cam = fleet[cam_idx];
  Rng scene_rng = Rng(seed).fork(hash_combine(0x5CE4E, index));
  Rng noise_rng = Rng(seed).fork(hash_combine(0x4015E, index));
  ShotSettings shot;
  const uint64_t variant = index / fleet.size();
  shot.iso = 100 << static_cast<int>(variant % 4);
  shot.exposure_index = static_cast<int>(variant / 4 % 4);
  train::TrainExample ex;
  char id[32];
  std::snprintf(id, sizeof id, "synth-%05llu", static_cast<unsigned long long>(index));
  ex.id = id;
  const img::Image scene = render_scene(image_size, image_size, scene_rng);
  ex.image = apply_camera(scene, cam, shot, noise_rng);
  ex.record = shot_record(cam, shot, index, image_size, image_size);
  ex.caption = "synthetic scene " + std::to_string(index);
  return ex;
}

inline std::vector<train::TrainExample> make_corpus(int n, int image_size, uint64_t seed) {
  std::vector<train::TrainExample> out(n);
  parallel_for(n, [&](int i) { out[i] = make_example(static_cast<uint64_t>(i), image_size, seed); });
  return out;
}

}  // namespace camsig::synth
