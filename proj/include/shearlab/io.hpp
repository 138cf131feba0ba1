#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "shearlab/common.hpp"

namespace shearlab {

// Fixed-format float printing keeps CSV output byte-identical across runs.
inline std::string fmt_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& columns)
      : out_(path) {
    if (!out_) throw ConfigInvalid("cannot open " + path.string());
    for (std::size_t i = 0; i < columns.size(); ++i)
      out_ << (i ? "," : "") << columns[i];
    out_ << "\n";
    width_ = columns.size();
  }

  void row(const std::vector<double>& values) {
    if (values.size() != width_) throw ConfigInvalid("CSV row width mismatch");
    for (std::size_t i = 0; i < values.size(); ++i)
      out_ << (i ? "," : "") << fmt_double(values[i]);
    out_ << "\n";
  }

 private:
  std::ofstream out_;
  std::size_t width_ = 0;
};

// FNV-1a 64-bit content digest of a file.
inline std::string file_digest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigInvalid("cannot digest " + path.string());
  std::uint64_t h = 1469598103934665603ull;
  char buf[65536];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 1099511628211ull;
    }
    if (!in) break;
  }
  char out[20];
  std::snprintf(out, sizeof out, "%016llx", static_cast<unsigned long long>(h));
  return out;
}

// Simple (t, value) table reader for fit-decay inputs: two columns, header
// line optional.
inline std::pair<rvector, rvector> read_tv_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigInvalid("cannot open " + path.string());
  rvector ts, vs;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    double t, v;
    if (std::sscanf(line.c_str(), "%lf,%lf", &t, &v) == 2) {
      ts.push_back(t);
      vs.push_back(v);
    }
  }
  if (ts.empty()) throw ConfigInvalid("no (t,value) rows in " + path.string());
  return {ts, vs};
}

}  // namespace shearlab
