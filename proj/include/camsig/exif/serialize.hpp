#pragma once

#include <numeric>
#include <string>
#include <vector>

#include "camsig/common.hpp"
#include "camsig/exif/record.hpp"

namespace camsig::exif {

enum class TagOrder { Fixed, Random };
enum class TagNames { With, Without };

struct SerializeFormat {
  TagOrder order = TagOrder::Fixed;
  TagNames names = TagNames::With;
};

struct CanonicalText {
  std::string text;
  SerializeFormat format;
};

// Renders a record as text: each tag "<Name>: <Value>" (or the bare value),
// tags joined by single spaces. Fixed order is the registry order and is
// byte-stable; random order draws a fresh uniform permutation from `rng`.
inline CanonicalText serialize(const ExifRecord& record, SerializeFormat format = {},
                               Rng* rng = nullptr) {
  if (record.empty()) throw DataError("serialize: empty record has no text form");
  const auto& tags = record.tags();
  std::vector<size_t> order(tags.size());
  std::iota(order.begin(), order.end(), size_t{0});
  if (format.order == TagOrder::Random) {
    if (rng == nullptr) throw DataError("serialize: random order requires a random source");
    rng->shuffle(order);
  }
  std::string text;
  for (size_t k = 0; k < order.size(); ++k) {
    const auto& [name, value] = tags[order[k]];
    if (k > 0) text.push_back(' ');
    if (format.names == TagNames::With) {
      text += name;
      text += ": ";
    }
    text += value;
  }
  return CanonicalText{std::move(text), format};
}

}  // namespace camsig::exif
