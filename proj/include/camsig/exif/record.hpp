#pragma once

#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "camsig/common.hpp"
#include "camsig/exif/registry.hpp"

namespace camsig::exif {

// One image's metadata: unique tag names with normalized non-empty values,
// iterated in registry order regardless of input order.
class ExifRecord {
 public:
  ExifRecord() = default;

  // Filters to registry tags, normalizes values, drops empties and duplicate
  // names (first occurrence wins), and orders by the registry.
  static ExifRecord from_pairs(const TagRegistry& registry,
                               const std::vector<std::pair<std::string, std::string>>& pairs,
                               std::string source_id = {}) {
    std::map<int, std::pair<std::string, std::string>> by_index;
    for (const auto& [name, value] : pairs) {
      const int idx = registry.index_of(trim(name));
      if (idx < 0) continue;
      std::string v = normalize_value(value);
      if (v.empty()) continue;
      by_index.emplace(idx, std::make_pair(trim(name), std::move(v)));
    }
    ExifRecord rec;
    rec.source_id_ = std::move(source_id);
    rec.tags_.reserve(by_index.size());
    for (auto& [idx, nv] : by_index) rec.tags_.push_back(std::move(nv));
    return rec;
  }

  const std::vector<std::pair<std::string, std::string>>& tags() const { return tags_; }
  size_t size() const { return tags_.size(); }
  bool empty() const { return tags_.empty(); }
  const std::string& source_id() const { return source_id_; }
  void set_source_id(std::string id) { source_id_ = std::move(id); }

  const std::string* value_of(std::string_view name) const {
    for (const auto& [n, v] : tags_)
      if (n == name) return &v;
    return nullptr;
  }

  bool has(std::string_view name) const { return value_of(name) != nullptr; }

 private:
  std::vector<std::pair<std::string, std::string>> tags_;
  std::string source_id_;
};

// Training keeps only records carrying at least min_tags registry tags
// ("less than 10" is the discard condition, so exactly 10 passes).
inline bool passes_training_filter(const ExifRecord& record, int min_tags = 10) {
  return static_cast<int>(record.size()) >= min_tags;
}

// Builds a registry of tags whose presence frequency strictly exceeds the
// threshold over the corpus, in ASCII order.
inline TagRegistry select_common_tags(const std::vector<ExifRecord>& corpus,
                                      double threshold = 0.5) {
  if (corpus.empty()) throw DataError("select_common_tags: empty corpus");
  if (!(threshold > 0.0 && threshold < 1.0))
    throw DataError("select_common_tags: threshold must be in (0,1)");
  std::map<std::string, size_t> counts;
  for (const auto& rec : corpus)
    for (const auto& [name, value] : rec.tags()) counts[name]++;
  std::vector<std::string> kept;
  const double n = static_cast<double>(corpus.size());
  for (const auto& [name, c] : counts)
    if (static_cast<double>(c) / n > threshold) kept.push_back(name);
  // std::map already iterates in ASCII order.
  return TagRegistry(std::move(kept));
}

}  // namespace camsig::exif
