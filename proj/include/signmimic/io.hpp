#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <json.hpp>
#include <string>
#include <string_view>
#include <vector>

namespace signmimic {

using Json = nlohmann::json;

/// 64-bit FNV-1a. Used for model/clip/config fingerprints in manifests.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed = 14695981039346656037ull);
std::string hex64(std::uint64_t value);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, std::string_view text);

/// Shortest round-trip representation, so CSV and JSON artifacts are
/// byte-stable for identical values.
std::string format_double(double value);

Json to_json(const Eigen::VectorXd& v);
Json to_json(const Eigen::MatrixXd& m);  // row-major nested arrays
Eigen::VectorXd vector_from_json(const Json& j, std::string_view field);
Eigen::MatrixXd matrix_from_json(const Json& j, std::string_view field);
Eigen::Vector3d vec3_from_json(const Json& j, std::string_view field);

/// Minimal CSV writer with a fixed header.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header) : header_(std::move(header)) {}
  void add_row(const std::vector<double>& values);
  std::string str() const;
  std::size_t rows() const { return rows_.size(); }

 private:
  std::vector<std::string> header_;
  std::vector<std::string> rows_;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  int column(std::string_view name) const;
};
CsvTable parse_csv(std::string_view text);

}  // namespace signmimic
