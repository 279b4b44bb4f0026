#include "dsm_cli/output.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>

#include "dsm/errors.hpp"

#ifndef DSM_VERSION
#define DSM_VERSION "0.0.0"
#endif

namespace dsm::cli {
namespace {

std::ofstream open_output(const std::filesystem::path& path, std::ios::openmode mode) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, mode);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write " + path.string());
  return out;
}

}  // namespace

std::string toolkit_version() { return DSM_VERSION; }

nlohmann::json Metadata::to_json() const {
  return {{"toolkit", "dsm"},
          {"version", version},
          {"config_hash", config_hash},
          {"seed", seed},
          {"command", command}};
}

std::string Metadata::csv_comment() const {
  return "# dsm " + version + " config_hash=" + config_hash + " seed=" + std::to_string(seed) +
         " command=" + command;
}

std::string full_precision(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string report_number(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const Metadata& meta,
                     const std::vector<std::string>& columns)
    : out_(open_output(path, std::ios::out | std::ios::trunc)) {
  out_ << meta.csv_comment() << '\n';
  for (const auto& c : columns) *this << c;
  end_row();
}

void CsvWriter::separator() {
  if (!fresh_) out_ << ',';
  fresh_ = false;
}

CsvWriter& CsvWriter::operator<<(double x) {
  separator();
  out_ << full_precision(x);
  return *this;
}

CsvWriter& CsvWriter::operator<<(long x) {
  separator();
  out_ << x;
  return *this;
}

CsvWriter& CsvWriter::operator<<(const std::string& s) {
  separator();
  out_ << s;
  return *this;
}

void CsvWriter::end_row() {
  out_ << '\n';
  fresh_ = true;
}

void write_json(const std::filesystem::path& path, const Metadata& meta, nlohmann::json body) {
  nlohmann::ordered_json doc;
  doc["metadata"] = nlohmann::ordered_json::parse(meta.to_json().dump());
  for (auto& [key, value] : body.items()) doc[key] = nlohmann::ordered_json::parse(value.dump());
  auto out = open_output(path, std::ios::out | std::ios::trunc);
  out << doc.dump(2) << '\n';
}

JsonLinesWriter::JsonLinesWriter(const std::filesystem::path& path, const Metadata& meta)
    : out_(open_output(path, std::ios::out | std::ios::trunc)) {
  out_ << nlohmann::json{{"metadata", meta.to_json()}}.dump() << '\n';
}

void JsonLinesWriter::write(const nlohmann::json& record) {
  out_ << record.dump() << '\n';
  out_.flush();
}

BinarySnapshotWriter::BinarySnapshotWriter(const std::filesystem::path& path,
                                           const Metadata& meta, int n, double l)
    : out_(open_output(path, std::ios::out | std::ios::trunc | std::ios::binary)) {
  const std::string text = meta.to_json().dump();
  out_.write("DSMSNAP1", 8);
  const auto len = static_cast<std::uint32_t>(text.size());
  for (int b = 0; b < 4; ++b) out_.put(static_cast<char>((len >> (8 * b)) & 0xffu));
  out_.write(text.data(), static_cast<std::streamsize>(text.size()));
  put_u64(static_cast<std::uint64_t>(n));
  put_f64(l);
}

void BinarySnapshotWriter::put_u64(std::uint64_t x) {
  char bytes[8];
  for (int b = 0; b < 8; ++b) bytes[b] = static_cast<char>((x >> (8 * b)) & 0xffu);
  out_.write(bytes, 8);
}

void BinarySnapshotWriter::put_f64(double x) { put_u64(std::bit_cast<std::uint64_t>(x)); }

void BinarySnapshotWriter::write(double t, const Field& f) {
  put_f64(t);
  for (double x : f.u) put_f64(x);
  for (double x : f.v) put_f64(x);
}

}  // namespace dsm::cli
