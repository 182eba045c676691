#ifndef PME_IO_HPP
#define PME_IO_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include <Eigen/Dense>
#include <json.hpp>

#include "pme/errors.hpp"

namespace pme::io
{

// Shortest decimal form that parses back to the identical double.
std::string format_double(double v);
double parse_double(std::string_view token);

// FNV-1a 64-bit; used for config and provenance hashes. Stable across
// platforms and runs.
std::uint64_t fnv1a64(std::string_view data);
std::string hash_hex(std::uint64_t h);

// Comma-separated matrix, one row per line, shortest round-trip doubles.
void write_matrix_csv(const std::filesystem::path& path, const Eigen::MatrixXd& m);
Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path);

void write_vector_csv(const std::filesystem::path& path, const Eigen::VectorXd& v);
Eigen::VectorXd read_vector_csv(const std::filesystem::path& path);

// Rows of possibly different lengths (e.g. means.csv, x_bounds.csv).
void write_rows_csv(const std::filesystem::path& path, const std::vector<Eigen::VectorXd>& rows);
std::vector<Eigen::VectorXd> read_rows_csv(const std::filesystem::path& path);

nlohmann::json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace pme::io

#endif  // PME_IO_HPP
