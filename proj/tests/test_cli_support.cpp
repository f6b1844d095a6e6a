#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "camsig/cli/cache.hpp"
#include "camsig/cli/config.hpp"
#include "camsig/cli/manifest.hpp"
#include "camsig/cli/report.hpp"

using namespace camsig;
using namespace camsig::cli;

TEST_SUITE("manifest") {
  TEST_CASE("round trip preserves rows and optional fields") {
    Manifest m;
    m.rows.push_back({"a", "img/a.png", "img/a.tsv", "a caption", "", "", false});
    m.rows.push_back({"b", "img/b.png", "", "", "img/b_mask.png", "spliced", true});
    m.save("manifest_roundtrip.tsv");
    auto loaded = Manifest::load("manifest_roundtrip.tsv");
    REQUIRE(loaded.rows.size() == 2);
    CHECK(loaded.rows[0].id == "a");
    CHECK(loaded.rows[0].caption == "a caption");
    CHECK(loaded.rows[0].mask.empty());
    CHECK(loaded.rows[1].filtered);
    CHECK(loaded.rows[1].label == "spliced");
    CHECK(loaded.rows[1].sidecar.empty());
  }

  TEST_CASE("duplicate ids are rejected") {
    std::ofstream f("manifest_dup.tsv");
    f << "x\ta.png\t-\t-\t-\t-\t0\nx\tb.png\t-\t-\t-\t-\t0\n";
    f.close();
    CHECK_THROWS_AS(Manifest::load("manifest_dup.tsv"), DataError);
  }

  TEST_CASE("missing referenced images get flagged, not dropped") {
    Manifest m;
    m.rows.push_back({"gone", "definitely/not/here.png", "", "", "", "", false});
    CHECK(m.flag_missing_paths() == 1);
    CHECK(m.rows[0].filtered);
  }
}

TEST_SUITE("config") {
  TEST_CASE("parse, defaults, and typed errors") {
    {
      std::ofstream f("test_config.txt");
      f << "# comment\n"
        << "train.epochs = 12\n"
        << "train.lr=0.5\n"
        << "flag = true\n"
        << "name = hello world\n";
    }
    auto cfg = Config::load("test_config.txt");
    CHECK(cfg.get_int("train.epochs", 1) == 12);
    CHECK(cfg.get_double("train.lr", 0.0) == 0.5);
    CHECK(cfg.get_bool("flag", false));
    CHECK(cfg.get_string("name", "") == "hello world");
    CHECK(cfg.get_int("absent", 7) == 7);
    cfg.set("train.epochs", "oops");
    CHECK_THROWS_AS(cfg.get_int("train.epochs", 1), DataError);
  }

  TEST_CASE("effective dump includes defaults that were consulted") {
    Config cfg;
    cfg.get_int("a.b", 3);
    cfg.set("x", "1");
    const std::string dump = cfg.dump_effective();
    CHECK(dump.find("a.b = 3") != std::string::npos);
    CHECK(dump.find("x = 1") != std::string::npos);
  }

  TEST_CASE("override parsing") {
    Config cfg;
    cfg.set_override("k=v");
    CHECK(cfg.get_string("k", "") == "v");
    CHECK_THROWS_AS(cfg.set_override("novalue"), UsageError);
  }

  TEST_CASE("hash changes with content") {
    Config a, b;
    a.set("k", "1");
    b.set("k", "2");
    CHECK(a.hash() != b.hash());
  }
}

TEST_SUITE("embedding_cache") {
  TEST_CASE("store/lookup round trip is bit-identical") {
    std::filesystem::remove_all("test_cache");
    EmbeddingCache cache("test_cache");
    Eigen::MatrixXd m(3, 5);
    Rng rng(7);
    for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = rng.normal();
    auto key = EmbeddingCache::make_key(0x1234, "side=32;n=25", 0x9876);
    CHECK_FALSE(cache.lookup(key).has_value());
    cache.store(key, m);
    auto hit = cache.lookup(key);
    REQUIRE(hit.has_value());
    CHECK((*hit - m).cwiseAbs().maxCoeff() == 0.0);
  }

  TEST_CASE("stale checkpoint hash is never served") {
    std::filesystem::remove_all("test_cache2");
    EmbeddingCache cache("test_cache2");
    Eigen::MatrixXd m = Eigen::MatrixXd::Ones(2, 2);
    auto key = EmbeddingCache::make_key(1, "g", 100);
    cache.store(key, m);
    auto stale = EmbeddingCache::make_key(1, "g", 101);
    CHECK_FALSE(cache.lookup(stale).has_value());
    auto other_grid = EmbeddingCache::make_key(1, "g2", 100);
    CHECK_FALSE(cache.lookup(other_grid).has_value());
  }

  TEST_CASE("file content hash distinguishes contents") {
    { std::ofstream f("hash_a.bin", std::ios::binary); f << "aaaa"; }
    { std::ofstream f("hash_b.bin", std::ios::binary); f << "aaab"; }
    CHECK(file_content_hash("hash_a.bin") != file_content_hash("hash_b.bin"));
    CHECK_THROWS_AS(file_content_hash("missing_for_hash.bin"), DataError);
  }
}

TEST_SUITE("report_helpers") {
  TEST_CASE("response map renders to grayscale with clamping") {
    Eigen::MatrixXd r(2, 3);
    r << 0.0, 0.5, 1.0, -0.2, 1.4, 0.25;
    auto im = response_to_image(r);
    CHECK(im.width == 3);
    CHECK(im.height == 2);
    CHECK(im.at(0, 0, 0) == 0);
    CHECK(im.at(1, 0, 0) == 128);
    CHECK(im.at(2, 0, 0) == 255);
    CHECK(im.at(0, 1, 0) == 0);    // clamped
    CHECK(im.at(1, 1, 0) == 255);  // clamped
  }

  TEST_CASE("explicit run dir is honored") {
    const std::string dir = make_run_dir("ignored_root", 0x42, "explicit_run_dir");
    CHECK(dir == "explicit_run_dir");
    CHECK(std::filesystem::is_directory(dir));
  }
}
