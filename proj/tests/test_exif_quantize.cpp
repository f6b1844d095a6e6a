#include <doctest.h>

#include <map>

#include "camsig/exif/quantize.hpp"

using namespace camsig;
using namespace camsig::exif;

TEST_SUITE("exif_quantize") {
  TEST_CASE("two-valued tag enumerates one class per value") {
    std::vector<std::string> values;
    for (int i = 0; i < 60; ++i) values.push_back("Auto");
    for (int i = 0; i < 40; ++i) values.push_back("Manual");
    auto q = fit_quantizer("White Balance Mode", values);
    CHECK(q.mode() == QuantizerMode::Enumerated);
    REQUIRE(q.n_classes() == 2);
    CHECK(q.classes()[0] == "Auto");   // most frequent first
    CHECK(q.classes()[1] == "Manual");
    CHECK(q.quantize("Auto") == 0);
    CHECK(q.quantize("Manual") == 1);
  }

  TEST_CASE("camera models merge into brand classes") {
    std::vector<std::string> values;
    // 25 distinct models across three brands forces the merged mode.
    for (int i = 0; i < 10; ++i) values.push_back("NIKON D" + std::to_string(90 + i));
    for (int i = 0; i < 10; ++i) values.push_back("Canon EOS " + std::to_string(i));
    for (int i = 0; i < 5; ++i) values.push_back("Apple iPhone " + std::to_string(i));
    auto q = fit_quantizer("Camera Model", values, /*brand_merge=*/true);
    CHECK(q.mode() == QuantizerMode::BrandMerged);
    REQUIRE(q.n_classes() == 3);
    auto idx = q.quantize("NIKON D90");
    REQUIRE(idx.has_value());
    CHECK(q.classes()[*idx] == "NIKON");
    // brand key is the upper-cased leading token
    CHECK(q.quantize("Canon EOS 7") == q.quantize("Canon PowerShot"));
  }

  TEST_CASE("unseen value is dropped, never coerced") {
    auto q = fit_quantizer("White Balance Mode", {"Auto", "Manual"});
    CHECK_FALSE(q.quantize("FooCam X").has_value());
  }

  TEST_CASE("25 distinct values with three above the floor keep 3 classes") {
    // Corpus of 3000 values: three common values and 22 rare ones.
    std::vector<std::string> values;
    for (int i = 0; i < 1500; ++i) values.push_back("alpha");
    for (int i = 0; i < 1000; ++i) values.push_back("beta");
    for (int i = 0; i < 478; ++i) values.push_back("gamma");
    for (int i = 0; i < 22; ++i) values.push_back("rare" + std::to_string(i));  // 1 each
    REQUIRE(values.size() == 3000);
    // Frequency-count oracle: strictly above 0.1% of 3000 means count >= 4.
    std::map<std::string, int> counts;
    for (const auto& v : values) counts[v]++;
    int expected = 0;
    for (const auto& [v, c] : counts)
      if (c > 3) ++expected;
    REQUIRE(expected == 3);

    auto q = fit_quantizer("Software", values);
    CHECK(q.mode() == QuantizerMode::Binned);
    CHECK(static_cast<int>(q.n_classes()) == expected);
    CHECK(q.quantize("alpha") == 0);
    CHECK(q.quantize("beta") == 1);
    CHECK(q.quantize("gamma") == 2);
    CHECK_FALSE(q.quantize("rare3").has_value());
  }

  TEST_CASE("partition property: exactly one of class index or dropped") {
    std::vector<std::string> values;
    for (int i = 0; i < 30; ++i) values.push_back("v" + std::to_string(i % 25));
    auto q = fit_quantizer("Software", values);
    Rng rng(3);
    for (int t = 0; t < 200; ++t) {
      std::string probe = "v" + std::to_string(rng.uniform_int(40));
      auto idx = q.quantize(probe);
      if (idx.has_value()) {
        CHECK(*idx >= 0);
        CHECK(*idx < static_cast<int>(q.n_classes()));
        CHECK(q.classes()[*idx] == probe);
      }
    }
  }

  TEST_CASE("all values below the floor make the tag unusable") {
    // 2000 values, each distinct: every frequency is 0.05% < 0.1%.
    std::vector<std::string> values;
    for (int i = 0; i < 2000; ++i) values.push_back("unique" + std::to_string(i));
    CHECK_THROWS_AS(fit_quantizer("Software", values), DataError);
  }

  TEST_CASE("empty corpus is an error") {
    CHECK_THROWS_AS(fit_quantizer("Software", {}), DataError);
  }

  TEST_CASE("persistence round trip") {
    std::vector<TagQuantizer> qs;
    qs.push_back(fit_quantizer("White Balance Mode", {"Auto", "Auto", "Manual"}));
    std::vector<std::string> models;
    for (int i = 0; i < 25; ++i) models.push_back("NIKON D" + std::to_string(i));
    qs.push_back(fit_quantizer("Camera Model", models, true));
    save_quantizers(qs, "quantizers_roundtrip.txt");
    auto loaded = load_quantizers("quantizers_roundtrip.txt");
    REQUIRE(loaded.size() == qs.size());
    for (size_t i = 0; i < qs.size(); ++i) {
      CHECK(loaded[i].tag() == qs[i].tag());
      CHECK(loaded[i].mode() == qs[i].mode());
      CHECK(loaded[i].classes() == qs[i].classes());
    }
    CHECK(loaded[1].quantize("NIKON D90") == qs[1].quantize("NIKON D90"));
  }
}
