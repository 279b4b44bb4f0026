#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dsm/field.hpp"

namespace dsm::cli {

std::string toolkit_version();

struct Metadata {
  std::string version;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string command;

  nlohmann::json to_json() const;
  /// "# dsm <version> config_hash=<hash> seed=<seed> command=<command>"
  std::string csv_comment() const;
};

/// Shortest representation that round-trips.
std::string full_precision(double x);

/// 6 significant digits.
std::string report_number(double x);

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const Metadata& meta,
            const std::vector<std::string>& columns);

  CsvWriter& operator<<(double x);
  CsvWriter& operator<<(long x);
  CsvWriter& operator<<(int x) { return *this << static_cast<long>(x); }
  CsvWriter& operator<<(const std::string& s);
  void end_row();

 private:
  void separator();

  std::ofstream out_;
  bool fresh_ = true;
};

/// Top-level object gets a leading "metadata" member.
void write_json(const std::filesystem::path& path, const Metadata& meta, nlohmann::json body);

/// One JSON object per line; the first line is {"metadata": ...}.
class JsonLinesWriter {
 public:
  JsonLinesWriter(const std::filesystem::path& path, const Metadata& meta);
  void write(const nlohmann::json& record);

 private:
  std::ofstream out_;
};

/// Little-endian snapshot stream:
///   char[8] "DSMSNAP1", uint32 metadata length, metadata JSON bytes,
///   uint64 n, float64 l,
///   per snapshot: float64 t, float64 u[n+1], float64 v[n+1].
class BinarySnapshotWriter {
 public:
  BinarySnapshotWriter(const std::filesystem::path& path, const Metadata& meta, int n, double l);
  void write(double t, const Field& f);

 private:
  void put_u64(std::uint64_t x);
  void put_f64(double x);

  std::ofstream out_;
};

}  // namespace dsm::cli
