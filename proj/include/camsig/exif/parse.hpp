#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <functional>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "camsig/common.hpp"
#include "camsig/exif/record.hpp"

#include <json.hpp>

// Minimal EXIF extraction: JPEG APP1 / PNG eXIf / bare TIFF containers, IFD0,
// the Exif and Interoperability sub-IFDs, and the thumbnail IFD. Only registry
// tags are pulled out; everything else (MakerNotes included) is skipped.

namespace camsig::exif {

namespace detail {

struct ByteReader {
  std::span<const uint8_t> data;
  bool big_endian = false;

  bool in_bounds(size_t off, size_t n) const {
    return off <= data.size() && n <= data.size() - off;
  }
  uint16_t u16(size_t off) const {
    return big_endian ? uint16_t(data[off] << 8 | data[off + 1])
                      : uint16_t(data[off + 1] << 8 | data[off]);
  }
  uint32_t u32(size_t off) const {
    return big_endian ? (uint32_t(data[off]) << 24) | (uint32_t(data[off + 1]) << 16) |
                            (uint32_t(data[off + 2]) << 8) | data[off + 3]
                      : (uint32_t(data[off + 3]) << 24) | (uint32_t(data[off + 2]) << 16) |
                            (uint32_t(data[off + 1]) << 8) | data[off];
  }
};

struct TagValue {
  uint16_t type = 0;
  std::vector<int64_t> ints;                            // BYTE/SHORT/LONG/SLONG
  std::vector<std::pair<int64_t, int64_t>> rationals;   // RATIONAL/SRATIONAL
  std::string text;                                     // ASCII/UNDEFINED bytes

  int64_t first_int() const { return ints.empty() ? 0 : ints.front(); }
  double first_rational() const {
    if (rationals.empty() || rationals.front().second == 0) return 0.0;
    return static_cast<double>(rationals.front().first) /
           static_cast<double>(rationals.front().second);
  }
};

inline size_t type_size(uint16_t type) {
  switch (type) {
    case 1: case 2: case 7: return 1;  // BYTE, ASCII, UNDEFINED
    case 3: return 2;                  // SHORT
    case 4: case 9: return 4;          // LONG, SLONG
    case 5: case 10: return 8;         // RATIONAL, SRATIONAL
    default: return 0;
  }
}

inline bool read_value(const ByteReader& r, size_t entry_off, TagValue& out) {
  out.type = r.u16(entry_off + 2);
  const uint32_t count = r.u32(entry_off + 4);
  const size_t elem = type_size(out.type);
  if (elem == 0 || count > 1u << 20) return false;
  const size_t total = elem * count;
  size_t off = entry_off + 8;
  if (total > 4) {
    off = r.u32(entry_off + 8);
  }
  if (!r.in_bounds(off, total)) return false;

  switch (out.type) {
    case 2:
    case 7: {
      out.text.assign(reinterpret_cast<const char*>(r.data.data() + off), count);
      while (!out.text.empty() && out.text.back() == '\0') out.text.pop_back();
      break;
    }
    case 1:
      for (uint32_t i = 0; i < count; ++i) out.ints.push_back(r.data[off + i]);
      break;
    case 3:
      for (uint32_t i = 0; i < count; ++i) out.ints.push_back(r.u16(off + 2 * i));
      break;
    case 4:
      for (uint32_t i = 0; i < count; ++i) out.ints.push_back(r.u32(off + 4 * i));
      break;
    case 9:
      for (uint32_t i = 0; i < count; ++i)
        out.ints.push_back(static_cast<int32_t>(r.u32(off + 4 * i)));
      break;
    case 5:
      for (uint32_t i = 0; i < count; ++i)
        out.rationals.emplace_back(r.u32(off + 8 * i), r.u32(off + 8 * i + 4));
      break;
    case 10:
      for (uint32_t i = 0; i < count; ++i)
        out.rationals.emplace_back(static_cast<int32_t>(r.u32(off + 8 * i)),
                                   static_cast<int32_t>(r.u32(off + 8 * i + 4)));
      break;
    default:
      return false;
  }
  return true;
}

// ---- value formatting, matching the human-readable style of common readers

inline std::string fmt_fraction_sec(int64_t num, int64_t den) {
  if (den == 0) return {};
  if (num == 0) return "0 sec";
  if (std::llabs(num) < std::llabs(den)) {
    const int64_t g = std::gcd(num, den);
    return fmt_trim(double(num / g)) == "1"
               ? "1/" + std::to_string(den / g) + " sec"
               : std::to_string(num / g) + "/" + std::to_string(den / g) + " sec";
  }
  return fmt_trim(static_cast<double>(num) / static_cast<double>(den)) + " sec";
}

inline std::string fmt_fnumber(double f) {
  std::string s = fmt_fixed1(f);
  if (s.size() > 2 && s.substr(s.size() - 2) == ".0") s.resize(s.size() - 2);
  return "F" + s;
}

// "0221" -> "2.21", "0100" -> "1.00"
inline std::string fmt_version(const std::string& raw) {
  if (raw.size() != 4) return raw;
  const int major = (raw[0] - '0') * 10 + (raw[1] - '0');
  return std::to_string(major) + "." + raw.substr(2);
}

inline std::string map_enum(int64_t v,
                            std::initializer_list<std::pair<int64_t, const char*>> table,
                            const char* fallback = nullptr) {
  for (const auto& [key, name] : table)
    if (key == v) return name;
  return fallback ? fallback : std::to_string(v);
}

inline std::string fmt_orientation(int64_t v) {
  return map_enum(v, {{1, "Top, left side (Horizontal / normal)"},
                      {2, "Top, right side (Mirror horizontal)"},
                      {3, "Bottom, right side (Rotate 180)"},
                      {4, "Bottom, left side (Mirror vertical)"},
                      {5, "Left side, top (Mirror horizontal and rotate 270 CW)"},
                      {6, "Right side, top (Rotate 90 CW)"},
                      {7, "Right side, bottom (Mirror horizontal and rotate 90 CW)"},
                      {8, "Left side, bottom (Rotate 270 CW)"}});
}

inline std::string fmt_flash(int64_t v) {
  const bool fired = v & 0x1;
  const bool red_eye = v & 0x40;
  if (fired && red_eye) return "Fired(red-eye reduction)";
  return fired ? "Fired" : "Unfired";
}

inline std::string fmt_components(const std::string& bytes) {
  static const char* names[] = {"", "Y", "Cb", "Cr", "R", "G", "B"};
  std::string out;
  for (unsigned char c : bytes)
    if (c >= 1 && c <= 6) out += names[c];
  return out;
}

enum class IfdKind { Ifd0, Exif, Interop, Thumbnail };

// Returns the registry tag name and formatted value, or empty name if the
// (ifd, id) pair is not a registry tag.
inline std::pair<std::string, std::string> format_tag(IfdKind ifd, uint16_t id,
                                                      const TagValue& v) {
  using P = std::pair<std::string, std::string>;
  switch (ifd) {
    case IfdKind::Ifd0:
      switch (id) {
        case 0x010F: return P{"Camera Make", v.text};
        case 0x0110: return P{"Camera Model", v.text};
        case 0x0131: return P{"Software", v.text};
        case 0x0132: return P{"Date/Time", v.text};
        case 0x011A: return P{"X Resolution", fmt_trim(v.first_rational()) + " dots per inch"};
        case 0x011B: return P{"Y Resolution", fmt_trim(v.first_rational()) + " dots per inch"};
        case 0x0128:
          return P{"Resolution Unit", map_enum(v.first_int(), {{2, "Inch"}, {3, "cm"}})};
        case 0x0112: return P{"Orientation", fmt_orientation(v.first_int())};
        case 0x0213:
          return P{"YCbCr Positioning",
                   map_enum(v.first_int(), {{1, "Center of pixel array"}, {2, "Datum point"}})};
        default: return {};
      }
    case IfdKind::Exif:
      switch (id) {
        case 0x829A:
          return v.rationals.empty()
                     ? P{}
                     : P{"Exposure Time",
                         fmt_fraction_sec(v.rationals[0].first, v.rationals[0].second)};
        case 0x829D: return P{"F-Number", fmt_fnumber(v.first_rational())};
        case 0x8822:
          return P{"Exposure Program", map_enum(v.first_int(), {{0, "Not defined"},
                                                                {1, "Manual control"},
                                                                {2, "Program normal"},
                                                                {3, "Aperture priority"},
                                                                {4, "Shutter priority"},
                                                                {5, "Creative program"},
                                                                {6, "Action program"},
                                                                {7, "Portrait mode"},
                                                                {8, "Landscape mode"}})};
        case 0x8827: return P{"ISO Speed Ratings", std::to_string(v.first_int())};
        case 0x9000: return P{"Exif Version", fmt_version(v.text)};
        case 0x9003: return P{"Date/Time Original", v.text};
        case 0x9004: return P{"Date/Time Digitized", v.text};
        case 0x9101: return P{"Components Configuration", fmt_components(v.text)};
        case 0x9102:
          return P{"Compressed Bits", fmt_trim(v.first_rational()) + " bits per pixel"};
        case 0x9201: {
          // APEX: exposure time = 2^-value
          const double t = std::exp2(-v.first_rational());
          return P{"Shutter Speed Value",
                   t < 1.0 ? "1/" + std::to_string(llround(1.0 / t)) + " sec"
                           : fmt_trim(t) + " sec"};
        }
        case 0x9202: return P{"Aperture Value", fmt_fnumber(std::exp2(v.first_rational() / 2.0))};
        case 0x9204: return P{"Exposure Bias Value", fmt_trim(v.first_rational()) + " EV"};
        case 0x9205:
          return P{"Max Aperture Value", fmt_fnumber(std::exp2(v.first_rational() / 2.0))};
        case 0x9207:
          return P{"Metering Mode", map_enum(v.first_int(), {{0, "Unknown"},
                                                             {1, "Average"},
                                                             {2, "Center weighted average"},
                                                             {3, "Spot"},
                                                             {4, "Multi-spot"},
                                                             {5, "Multi-segment"},
                                                             {6, "Partial"},
                                                             {255, "Other"}})};
        case 0x9209: return P{"Flash", fmt_flash(v.first_int())};
        case 0x920A: return P{"Focal Length", fmt_fixed1(v.first_rational()) + " mm"};
        case 0xA000: return P{"FlashPix Version", fmt_version(v.text)};
        case 0xA001:
          return P{"Color Space",
                   map_enum(v.first_int(), {{1, "sRGB"}, {0xFFFF, "Undefined"}}, "Uncalibrated")};
        case 0xA002: return P{"Exif Image Width", std::to_string(v.first_int()) + " pixels"};
        case 0xA003: return P{"Exif Image Height", std::to_string(v.first_int()) + " pixels"};
        case 0xA20E:
          return P{"Focal Plane X Resolution",
                   fmt_trim(v.first_rational()) + " dots per inch"};
        case 0xA20F:
          return P{"Focal Plane Y Resolution",
                   fmt_trim(v.first_rational()) + " dots per inch"};
        case 0xA217:
          return P{"Sensing Method",
                   map_enum(v.first_int(), {{1, "Not defined"},
                                            {2, "One-chip color area sensor"},
                                            {3, "Two-chip color area sensor"},
                                            {4, "Three-chip color area sensor"},
                                            {5, "Color sequential area sensor"},
                                            {7, "Trilinear sensor"},
                                            {8, "Color sequential linear sensor"}})};
        case 0xA300: {
          const int64_t code = v.text.empty() ? v.first_int() : v.text[0];
          return P{"File Source", map_enum(code, {{1, "Film Scanner"},
                                                  {2, "Print Scanner"},
                                                  {3, "Digital Still Camera"}})};
        }
        case 0xA401:
          return P{"Custom Rendered",
                   map_enum(v.first_int(), {{0, "Normal process"}, {1, "Custom process"}})};
        case 0xA402:
          return P{"Exposure Mode", map_enum(v.first_int(), {{0, "Auto exposure"},
                                                             {1, "Manual exposure"},
                                                             {2, "Auto bracket"}})};
        case 0xA403:
          return P{"White Balance Mode", map_enum(v.first_int(), {{0, "Auto"}, {1, "Manual"}})};
        case 0xA404: {
          if (v.rationals.empty() || v.rationals[0].second == 0) return {};
          return P{"Digital Zoom Ratio", fmt_trim(v.first_rational())};
        }
        case 0xA406:
          return P{"Scene Capture Type", map_enum(v.first_int(), {{0, "Standard"},
                                                                  {1, "Landscape"},
                                                                  {2, "Portrait"},
                                                                  {3, "Night Scene"}})};
        case 0xA407:
          return P{"Gain Control", map_enum(v.first_int(), {{0, "None"},
                                                            {1, "Low"},
                                                            {2, "High"},
                                                            {3, "Low"},
                                                            {4, "High"}})};
        default: return {};
      }
    case IfdKind::Interop:
      switch (id) {
        case 0x0001: return P{"Interoperability Index", v.text};
        case 0x0002: return P{"Interoperability Version", fmt_version(v.text)};
        default: return {};
      }
    case IfdKind::Thumbnail:
      switch (id) {
        case 0x0103:
          return P{"Thumbnail Compression",
                   map_enum(v.first_int(), {{1, "Uncompressed"}, {6, "JPEG"}})};
        case 0x0201: return P{"Thumbnail Offset", std::to_string(v.first_int()) + " bytes"};
        case 0x0202: return P{"Thumbnail Length", std::to_string(v.first_int()) + " bytes"};
        default: return {};
      }
  }
  return {};
}

inline void parse_ifd(const ByteReader& r, size_t offset, IfdKind kind,
                      std::vector<std::pair<std::string, std::string>>& out,
                      uint32_t* next_ifd) {
  if (next_ifd) *next_ifd = 0;
  if (!r.in_bounds(offset, 2)) return;
  const uint16_t n = r.u16(offset);
  if (!r.in_bounds(offset + 2, size_t(n) * 12 + 4)) return;
  size_t exif_off = 0, interop_off = 0;
  for (uint16_t i = 0; i < n; ++i) {
    const size_t e = offset + 2 + size_t(i) * 12;
    const uint16_t id = r.u16(e);
    if (kind == IfdKind::Ifd0 && id == 0x8769) {
      exif_off = r.u32(e + 8);
      continue;
    }
    if (kind == IfdKind::Exif && id == 0xA005) {
      interop_off = r.u32(e + 8);
      continue;
    }
    TagValue v;
    if (!read_value(r, e, v)) continue;
    auto [name, text] = format_tag(kind, id, v);
    if (!name.empty() && !text.empty()) out.emplace_back(std::move(name), std::move(text));
  }
  if (next_ifd) *next_ifd = r.u32(offset + 2 + size_t(n) * 12);
  if (exif_off) parse_ifd(r, exif_off, IfdKind::Exif, out, nullptr);
  if (interop_off) parse_ifd(r, interop_off, IfdKind::Interop, out, nullptr);
}

inline std::vector<std::pair<std::string, std::string>> parse_tiff(
    std::span<const uint8_t> tiff) {
  std::vector<std::pair<std::string, std::string>> out;
  if (tiff.size() < 8) return out;
  ByteReader r{tiff, false};
  if (tiff[0] == 'M' && tiff[1] == 'M') r.big_endian = true;
  else if (!(tiff[0] == 'I' && tiff[1] == 'I')) return out;
  if (r.u16(2) != 42) return out;
  uint32_t ifd1 = 0;
  parse_ifd(r, r.u32(4), IfdKind::Ifd0, out, &ifd1);
  if (ifd1) parse_ifd(r, ifd1, IfdKind::Thumbnail, out, nullptr);
  return out;
}

inline std::vector<std::pair<std::string, std::string>> parse_jpeg(
    std::span<const uint8_t> buf) {
  size_t pos = 2;  // past FFD8
  while (pos + 4 <= buf.size()) {
    if (buf[pos] != 0xFF) break;
    const uint8_t marker = buf[pos + 1];
    if (marker == 0xD8 || marker == 0x01 || (marker >= 0xD0 && marker <= 0xD7)) {
      pos += 2;
      continue;
    }
    if (marker == 0xDA || marker == 0xD9) break;  // image data / end
    const size_t len = size_t(buf[pos + 2]) << 8 | buf[pos + 3];
    if (len < 2 || pos + 2 + len > buf.size()) break;
    if (marker == 0xE1 && len >= 8 &&
        std::memcmp(buf.data() + pos + 4, "Exif\0\0", 6) == 0) {
      return parse_tiff(buf.subspan(pos + 10, len - 8));
    }
    pos += 2 + len;
  }
  return {};
}

inline std::vector<std::pair<std::string, std::string>> parse_png(
    std::span<const uint8_t> buf) {
  size_t pos = 8;  // past signature
  while (pos + 12 <= buf.size()) {
    const size_t len = (size_t(buf[pos]) << 24) | (size_t(buf[pos + 1]) << 16) |
                       (size_t(buf[pos + 2]) << 8) | buf[pos + 3];
    if (pos + 12 + len > buf.size()) break;
    const std::string_view type(reinterpret_cast<const char*>(buf.data() + pos + 4), 4);
    if (type == "eXIf") return parse_tiff(buf.subspan(pos + 8, len));
    if (type == "IEND") break;
    pos += 12 + len;
  }
  return {};
}

}  // namespace detail

// --------------------------------------------------------------------------
// Sidecar formats

// Newline-delimited "Name<TAB>Value" lines; '#' starts a comment.
inline ExifRecord parse_sidecar_text(const std::string& content, std::string source_id = {},
                                     const TagRegistry& registry = TagRegistry::default_registry()) {
  std::vector<std::pair<std::string, std::string>> pairs;
  std::istringstream in(content);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const size_t tab = line.find('\t');
    if (tab == std::string::npos) continue;
    pairs.emplace_back(line.substr(0, tab), line.substr(tab + 1));
  }
  return ExifRecord::from_pairs(registry, pairs, std::move(source_id));
}

// A JSON document of name -> value; nested objects are flattened one level at
// a time so grouped documents ({"exif": {...}}) also work.
inline ExifRecord parse_sidecar_json(const std::string& content, std::string source_id = {},
                                     const TagRegistry& registry = TagRegistry::default_registry()) {
  std::vector<std::pair<std::string, std::string>> pairs;
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(content);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("sidecar JSON parse failed: ") + e.what());
  }
  std::function<void(const nlohmann::json&)> walk = [&](const nlohmann::json& obj) {
    if (!obj.is_object()) return;
    for (const auto& [key, val] : obj.items()) {
      if (val.is_object()) {
        walk(val);
      } else if (val.is_string()) {
        pairs.emplace_back(key, val.get<std::string>());
      } else if (val.is_number() || val.is_boolean()) {
        pairs.emplace_back(key, val.dump());
      }
    }
  };
  walk(doc);
  return ExifRecord::from_pairs(registry, pairs, std::move(source_id));
}

// --------------------------------------------------------------------------
// Entry point: image file with embedded metadata, or a sidecar document.
// A readable file with no recognizable metadata block yields an empty record.

inline ExifRecord parse_exif_bytes(std::span<const uint8_t> bytes, std::string source_id = {},
                                   const TagRegistry& registry = TagRegistry::default_registry()) {
  std::vector<std::pair<std::string, std::string>> pairs;
  if (bytes.size() >= 2 && bytes[0] == 0xFF && bytes[1] == 0xD8) {
    pairs = detail::parse_jpeg(bytes);
  } else if (bytes.size() >= 8 && bytes[0] == 0x89 && bytes[1] == 'P' && bytes[2] == 'N' &&
             bytes[3] == 'G') {
    pairs = detail::parse_png(bytes);
  } else if (bytes.size() >= 8 && ((bytes[0] == 'I' && bytes[1] == 'I') ||
                                   (bytes[0] == 'M' && bytes[1] == 'M'))) {
    pairs = detail::parse_tiff(bytes);
  }
  return ExifRecord::from_pairs(registry, pairs, std::move(source_id));
}

inline ExifRecord parse_exif(const std::string& path,
                             const TagRegistry& registry = TagRegistry::default_registry()) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read file: " + path);
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const auto* bytes = reinterpret_cast<const uint8_t*>(content.data());
  if (content.size() >= 2 && bytes[0] == 0xFF && bytes[1] == 0xD8)
    return parse_exif_bytes({bytes, content.size()}, path, registry);
  if (content.size() >= 8 && bytes[0] == 0x89 && content.compare(1, 3, "PNG") == 0)
    return parse_exif_bytes({bytes, content.size()}, path, registry);
  if (content.size() >= 8 &&
      ((bytes[0] == 'I' && bytes[1] == 'I') || (bytes[0] == 'M' && bytes[1] == 'M')))
    return parse_exif_bytes({bytes, content.size()}, path, registry);
  const std::string head = trim(content.substr(0, 64));
  if (!head.empty() && head[0] == '{') return parse_sidecar_json(content, path, registry);
  return parse_sidecar_text(content, path, registry);
}

}  // namespace camsig::exif
