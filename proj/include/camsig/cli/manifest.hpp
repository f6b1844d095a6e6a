#pragma once

#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "camsig/common.hpp"

namespace camsig::cli {

// One dataset row. Optional fields hold "-" on disk.
struct ManifestRow {
  std::string id;
  std::string image;
  std::string sidecar;
  std::string caption;
  std::string mask;       // ground-truth mask or response-map pairing
  std::string label;      // free-form label (e.g. "pristine"/"spliced", class id)
  bool filtered = false;  // excluded by the training filter
};

struct Manifest {
  std::vector<ManifestRow> rows;

  static constexpr const char* kHeader = "#camsig-manifest\tv1";

  void save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write manifest: " + path);
    out << kHeader << '\n';
    out << "#id\timage\tsidecar\tcaption\tmask\tlabel\tfiltered\n";
    for (const auto& r : rows) {
      auto field = [](const std::string& s) { return s.empty() ? std::string("-") : s; };
      out << r.id << '\t' << field(r.image) << '\t' << field(r.sidecar) << '\t'
          << field(r.caption) << '\t' << field(r.mask) << '\t' << field(r.label) << '\t'
          << (r.filtered ? "1" : "0") << '\n';
    }
  }

  static Manifest load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot read manifest: " + path);
    Manifest m;
    std::string line;
    std::set<std::string> seen;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#') continue;
      const auto parts = split(line, '\t');
      if (parts.size() < 7) throw DataError("malformed manifest row: " + line);
      auto field = [](const std::string& s) { return s == "-" ? std::string() : s; };
      ManifestRow r;
      r.id = parts[0];
      r.image = field(parts[1]);
      r.sidecar = field(parts[2]);
      r.caption = field(parts[3]);
      r.mask = field(parts[4]);
      r.label = field(parts[5]);
      r.filtered = parts[6] == "1";
      if (!seen.insert(r.id).second) throw DataError("duplicate manifest id: " + r.id);
      m.rows.push_back(std::move(r));
    }
    return m;
  }

  // Rows whose referenced files are missing get flagged (not dropped).
  int flag_missing_paths() {
    int flagged = 0;
    for (auto& r : rows) {
      if (!r.image.empty() && !std::filesystem::exists(r.image)) {
        r.filtered = true;
        ++flagged;
      }
    }
    return flagged;
  }
};

}  // namespace camsig::cli
