#include <doctest.h>

#include <algorithm>
#include <set>

#include "camsig/exif/record.hpp"
#include "camsig/exif/registry.hpp"
#include "camsig/exif/serialize.hpp"

using namespace camsig;
using namespace camsig::exif;

TEST_SUITE("exif_registry") {
  TEST_CASE("default registry has exactly 44 tags in ASCII order") {
    const auto& reg = TagRegistry::default_registry();
    CHECK(reg.size() == 44);
    CHECK(std::is_sorted(reg.names().begin(), reg.names().end()));
    std::set<std::string> unique(reg.names().begin(), reg.names().end());
    CHECK(unique.size() == 44);
    CHECK(reg.index_of("Aperture Value") == 0);
    CHECK(reg.index_of("YCbCr Positioning") == 43);
    CHECK(reg.contains("Camera Make"));
    CHECK(reg.contains("White Balance Mode"));
    CHECK_FALSE(reg.contains("GPS Latitude"));
  }

  TEST_CASE("registry file round trip") {
    const auto& reg = TagRegistry::default_registry();
    const std::string path = "registry_roundtrip.txt";
    reg.save(path);
    const TagRegistry loaded = TagRegistry::load(path);
    CHECK(loaded.names() == reg.names());
  }

  TEST_CASE("shipped registry data file matches the built-in list") {
    const TagRegistry shipped = TagRegistry::load(CAMSIG_REGISTRY_FILE);
    CHECK(shipped.names() == TagRegistry::default_registry().names());
  }

  TEST_CASE("only Camera Model is brand-merged") {
    const auto& reg = TagRegistry::default_registry();
    CHECK(reg.brand_merged("Camera Model"));
    CHECK_FALSE(reg.brand_merged("Camera Make"));
  }
}

TEST_SUITE("exif_record") {
  const auto& reg = TagRegistry::default_registry();

  TEST_CASE("unknown tags are discarded") {
    auto rec = ExifRecord::from_pairs(
        reg, {{"Camera Make", "Apple"}, {"Unknown Tag", "x"}}, "img0");
    CHECK(rec.size() == 1);
    CHECK(*rec.value_of("Camera Make") == "Apple");
    CHECK(rec.source_id() == "img0");
  }

  TEST_CASE("empty input yields empty record") {
    auto rec = ExifRecord::from_pairs(reg, {});
    CHECK(rec.empty());
  }

  TEST_CASE("all 44 registry tags survive, in registry order, from any input order") {
    std::vector<std::pair<std::string, std::string>> pairs;
    for (const auto& name : reg.names()) pairs.emplace_back(name, "v");
    std::reverse(pairs.begin(), pairs.end());
    auto rec = ExifRecord::from_pairs(reg, pairs);
    REQUIRE(rec.size() == 44);
    for (size_t i = 0; i < 44; ++i) CHECK(rec.tags()[i].first == reg.names()[i]);
  }

  TEST_CASE("values are whitespace-normalized, empty values dropped") {
    auto rec = ExifRecord::from_pairs(reg, {{"Camera Make", "  NIKON   Corporation \t"},
                                            {"Software", "   "}});
    CHECK(rec.size() == 1);
    CHECK(*rec.value_of("Camera Make") == "NIKON Corporation");
  }

  TEST_CASE("duplicate names keep the first occurrence") {
    auto rec = ExifRecord::from_pairs(reg, {{"Camera Make", "Apple"}, {"Camera Make", "Canon"}});
    CHECK(rec.size() == 1);
    CHECK(*rec.value_of("Camera Make") == "Apple");
  }

  TEST_CASE("training filter boundary: 9 fails, 10 and 44 pass") {
    auto make_rec = [&](int n) {
      std::vector<std::pair<std::string, std::string>> pairs;
      for (int i = 0; i < n; ++i) pairs.emplace_back(reg.names()[i], "v");
      return ExifRecord::from_pairs(reg, pairs);
    };
    CHECK_FALSE(passes_training_filter(make_rec(9)));
    CHECK(passes_training_filter(make_rec(10)));
    CHECK(passes_training_filter(make_rec(44)));
  }

  TEST_CASE("filter monotonicity: adding a tag never un-passes a record") {
    for (int n = 0; n < 44; ++n) {
      std::vector<std::pair<std::string, std::string>> pairs;
      for (int i = 0; i < n; ++i) pairs.emplace_back(reg.names()[i], "v");
      const bool before = passes_training_filter(ExifRecord::from_pairs(reg, pairs));
      pairs.emplace_back(reg.names()[n], "v");
      const bool after = passes_training_filter(ExifRecord::from_pairs(reg, pairs));
      if (before) CHECK(after);
    }
  }
}

TEST_SUITE("select_common_tags") {
  const auto& reg = TagRegistry::default_registry();

  static ExifRecord rec_with(const std::vector<std::string>& names) {
    std::vector<std::pair<std::string, std::string>> pairs;
    for (const auto& n : names) pairs.emplace_back(n, "v");
    return ExifRecord::from_pairs(reg, pairs);
  }

  TEST_CASE("presence in 3 of 4 records includes the tag (0.75 > 0.5)") {
    std::vector<ExifRecord> corpus{
        rec_with({"Camera Make", "Software"}), rec_with({"Camera Make", "Software"}),
        rec_with({"Camera Make"}), rec_with({"Software"})};
    auto selected = select_common_tags(corpus, 0.5);
    CHECK(selected.contains("Camera Make"));   // 3/4
    CHECK(selected.contains("Software"));      // 3/4
  }

  TEST_CASE("presence in exactly half excludes the tag (strict inequality)") {
    std::vector<ExifRecord> corpus{rec_with({"Camera Make", "Flash"}), rec_with({"Camera Make"}),
                                   rec_with({"Flash"}), rec_with({"Software"})};
    auto selected = select_common_tags(corpus, 0.5);
    CHECK_FALSE(selected.contains("Camera Make"));  // 2/4 == 0.5, not > 0.5
    CHECK_FALSE(selected.contains("Flash"));
    CHECK_FALSE(selected.contains("Software"));     // 1/4
  }

  TEST_CASE("result is in ASCII order") {
    std::vector<ExifRecord> corpus{rec_with({"Software", "Camera Make", "Flash"}),
                                   rec_with({"Software", "Camera Make", "Flash"})};
    auto selected = select_common_tags(corpus, 0.5);
    REQUIRE(selected.size() == 3);
    CHECK(selected.names()[0] == "Camera Make");
    CHECK(selected.names()[1] == "Flash");
    CHECK(selected.names()[2] == "Software");
  }

  TEST_CASE("empty corpus is an argument error") {
    CHECK_THROWS_AS(select_common_tags({}, 0.5), DataError);
  }
}

TEST_SUITE("exif_serialize") {
  const auto& reg = TagRegistry::default_registry();

  TEST_CASE("fixed order with names uses colon-space and single-space joins") {
    auto rec = ExifRecord::from_pairs(
        reg, {{"Focal Length", "35.0 mm"}, {"Camera Make", "Apple"}});
    auto text = serialize(rec, {TagOrder::Fixed, TagNames::With});
    CHECK(text.text == "Camera Make: Apple Focal Length: 35.0 mm");
  }

  TEST_CASE("without names emits bare values") {
    auto rec = ExifRecord::from_pairs(reg, {{"Camera Make", "Apple"}});
    auto text = serialize(rec, {TagOrder::Fixed, TagNames::Without});
    CHECK(text.text == "Apple");
  }

  TEST_CASE("empty record cannot be serialized") {
    CHECK_THROWS_AS(serialize(ExifRecord{}), DataError);
  }

  TEST_CASE("fixed-order serialization is byte-stable across calls") {
    std::vector<std::pair<std::string, std::string>> pairs;
    for (const auto& n : reg.names()) pairs.emplace_back(n, "value of " + n);
    auto rec = ExifRecord::from_pairs(reg, pairs);
    const auto a = serialize(rec).text;
    const auto b = serialize(rec).text;
    CHECK(a == b);
  }

  TEST_CASE("random order emits a permutation of the fixed-order tag set") {
    auto rec = ExifRecord::from_pairs(reg, {{"Camera Make", "Apple"},
                                            {"Camera Model", "iPhone 4s"},
                                            {"Software", "QuickTime"},
                                            {"Flash", "Unfired"},
                                            {"Color Space", "sRGB"}});
    Rng rng(7);
    std::multiset<std::string> fixed_tags;
    for (const auto& [n, v] : rec.tags()) fixed_tags.insert(n + ": " + v);
    bool saw_nonfixed_order = false;
    const std::string fixed_text = serialize(rec).text;
    for (int trial = 0; trial < 50; ++trial) {
      auto text = serialize(rec, {TagOrder::Random, TagNames::With}, &rng);
      if (text.text != fixed_text) saw_nonfixed_order = true;
      // Re-split on known "Name: " boundaries and compare as multisets.
      std::multiset<std::string> seen;
      std::string rest = text.text;
      while (!rest.empty()) {
        size_t best = std::string::npos;
        // find the next tag-name boundary after position 0
        for (const auto& [n, v] : rec.tags()) {
          const std::string marker = " " + n + ": ";
          const size_t at = rest.find(marker);
          if (at != std::string::npos && (best == std::string::npos || at < best)) best = at;
        }
        if (best == std::string::npos) {
          seen.insert(rest);
          break;
        }
        seen.insert(rest.substr(0, best));
        rest = rest.substr(best + 1);
      }
      CHECK(seen == fixed_tags);
    }
    CHECK(saw_nonfixed_order);
  }

  TEST_CASE("random order without a random source is an error") {
    auto rec = ExifRecord::from_pairs(reg, {{"Camera Make", "Apple"}});
    CHECK_THROWS_AS(serialize(rec, {TagOrder::Random, TagNames::With}, nullptr), DataError);
  }
}
