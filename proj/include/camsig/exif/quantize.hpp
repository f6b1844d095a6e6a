#pragma once

#include <algorithm>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "camsig/common.hpp"
#include "camsig/exif/registry.hpp"

namespace camsig::exif {

enum class QuantizerMode { Enumerated, Binned, BrandMerged };

inline const char* to_string(QuantizerMode m) {
  switch (m) {
    case QuantizerMode::Enumerated: return "enumerated";
    case QuantizerMode::Binned: return "binned";
    case QuantizerMode::BrandMerged: return "brand-merged";
  }
  return "?";
}

// First whitespace-delimited token, upper-cased: "NIKON D90" -> "NIKON".
inline std::string brand_key(std::string_view value) {
  const std::string v = normalize_value(value);
  const size_t sp = v.find(' ');
  return to_upper(sp == std::string::npos ? v : v.substr(0, sp));
}

// Maps a tag's string values onto a closed set of class labels. Values outside
// the label set are reported as dropped, never coerced.
class TagQuantizer {
 public:
  TagQuantizer() = default;
  TagQuantizer(std::string tag, QuantizerMode mode, std::vector<std::string> classes)
      : tag_(std::move(tag)), mode_(mode), classes_(std::move(classes)) {
    for (size_t i = 0; i < classes_.size(); ++i) lookup_[classes_[i]] = static_cast<int>(i);
  }

  const std::string& tag() const { return tag_; }
  QuantizerMode mode() const { return mode_; }
  const std::vector<std::string>& classes() const { return classes_; }
  size_t n_classes() const { return classes_.size(); }

  // Class index, or nullopt for out-of-vocabulary (dropped) values.
  std::optional<int> quantize(std::string_view value) const {
    const std::string key =
        mode_ == QuantizerMode::BrandMerged ? brand_key(value) : normalize_value(value);
    auto it = lookup_.find(key);
    if (it == lookup_.end()) return std::nullopt;
    return it->second;
  }

 private:
  std::string tag_;
  QuantizerMode mode_ = QuantizerMode::Enumerated;
  std::vector<std::string> classes_;
  std::unordered_map<std::string, int> lookup_;
};

struct QuantizerOptions {
  int max_enumerated = 20;      // fewer distinct values than this -> one class per value
  double min_frequency = 0.001; // otherwise keep classes strictly above this fraction
};

// Fits the quantizer for one tag over the values observed in the corpus
// (i.e., over images that carry the tag). Tags listed as brand-merged in the
// registry collapse values to their leading brand token before counting.
inline TagQuantizer fit_quantizer(const std::string& tag,
                                  const std::vector<std::string>& corpus_values,
                                  bool brand_merge = false, QuantizerOptions opts = {}) {
  if (corpus_values.empty()) throw DataError("fit_quantizer: no values for tag " + tag);

  std::map<std::string, size_t> raw_counts;
  for (const auto& v : corpus_values) {
    std::string n = normalize_value(v);
    if (!n.empty()) raw_counts[n]++;
  }
  if (raw_counts.empty()) throw DataError("fit_quantizer: no usable values for tag " + tag);

  auto ordered_classes = [](const std::map<std::string, size_t>& counts) {
    std::vector<std::pair<std::string, size_t>> items(counts.begin(), counts.end());
    std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
      if (a.second != b.second) return a.second > b.second;
      return a.first < b.first;
    });
    std::vector<std::string> labels;
    labels.reserve(items.size());
    for (auto& [label, count] : items) labels.push_back(label);
    return labels;
  };

  if (static_cast<int>(raw_counts.size()) < opts.max_enumerated) {
    return TagQuantizer(tag, QuantizerMode::Enumerated, ordered_classes(raw_counts));
  }

  std::map<std::string, size_t> merged;
  if (brand_merge) {
    for (const auto& [value, count] : raw_counts) merged[brand_key(value)] += count;
  } else {
    merged = raw_counts;
  }

  const double total = static_cast<double>(corpus_values.size());
  std::map<std::string, size_t> common;
  for (const auto& [label, count] : merged)
    if (static_cast<double>(count) / total > opts.min_frequency) common[label] = count;
  if (common.empty())
    throw DataError("fit_quantizer: every value of tag '" + tag +
                    "' falls below the frequency floor; tag unusable");

  return TagQuantizer(tag, brand_merge ? QuantizerMode::BrandMerged : QuantizerMode::Binned,
                      ordered_classes(common));
}

// --------------------------------------------------------------------------
// Persistence: human-readable blocks, one per tag, separated by blank lines.
//
//   tag: Camera Model
//   mode: brand-merged
//   class: NIKON
//   class: CANON

inline void save_quantizers(const std::vector<TagQuantizer>& qs, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write quantizer file: " + path);
  out << "# camsig quantizers v1\n";
  for (const auto& q : qs) {
    out << "tag: " << q.tag() << '\n';
    out << "mode: " << to_string(q.mode()) << '\n';
    for (const auto& c : q.classes()) out << "class: " << c << '\n';
    out << '\n';
  }
}

inline std::vector<TagQuantizer> load_quantizers(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read quantizer file: " + path);
  std::vector<TagQuantizer> out;
  std::string line, tag;
  QuantizerMode mode = QuantizerMode::Enumerated;
  std::vector<std::string> classes;
  auto flush = [&] {
    if (!tag.empty()) out.emplace_back(tag, mode, classes);
    tag.clear();
    classes.clear();
  };
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (t.empty()) {
      flush();
      continue;
    }
    if (t[0] == '#') continue;
    const size_t colon = t.find(':');
    if (colon == std::string::npos) throw DataError("malformed quantizer line: " + t);
    const std::string key = trim(t.substr(0, colon));
    const std::string value = trim(t.substr(colon + 1));
    if (key == "tag") {
      flush();
      tag = value;
    } else if (key == "mode") {
      if (value == "enumerated") mode = QuantizerMode::Enumerated;
      else if (value == "binned") mode = QuantizerMode::Binned;
      else if (value == "brand-merged") mode = QuantizerMode::BrandMerged;
      else throw DataError("unknown quantizer mode: " + value);
    } else if (key == "class") {
      classes.push_back(value);
    } else {
      throw DataError("unknown quantizer key: " + key);
    }
  }
  flush();
  return out;
}

}  // namespace camsig::exif
