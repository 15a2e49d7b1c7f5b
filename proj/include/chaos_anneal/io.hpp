#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "chaos_anneal/hilbert.hpp"

namespace chaos_anneal::io {

/// Shortest decimal form that parses back to the same double.
std::string format_double(double v);
/// Strict parse of a whole string; `key` names the offending entry in errors.
double parse_double(std::string_view text, const std::string& key);
std::uint64_t parse_unsigned(std::string_view text, const std::string& key);
bool parse_bool(std::string_view text, const std::string& key);
std::vector<double> parse_double_list(std::string_view text, const std::string& key);

/// Comma-separated table with optional '#' comment lines above the header.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& columns,
            const std::vector<std::string>& comments = {});
  void row(std::span<const double> values);
  void row(std::initializer_list<double> values) { row(std::span<const double>(values.begin(), values.size())); }

 private:
  std::ofstream out_;
  std::size_t columns_;
};

struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  std::vector<double> column(const std::string& name) const;
};

CsvTable read_csv(const std::filesystem::path& path);

/// Section -> key -> value, iterated in sorted order.
using Ini = std::map<std::string, std::map<std::string, std::string>>;

Ini read_ini(const std::filesystem::path& path);
void write_ini(const std::filesystem::path& path, const Ini& ini);

/// Binary density matrix: "CADM", u32 version, u64 rows, u64 cols, u64 dim_a, u64 dim_b,
/// then rows*cols (re, im) float64 pairs in row-major order, host byte order.
/// Full-space matrices use basis index n_a * dim_b + n_b; cavity matrices have dim_b = 1.
inline constexpr std::uint32_t kDensityFormatVersion = 1;

struct DensityFile {
  hilbert::DensityMatrix rho;
  std::uint64_t dim_a = 0;
  std::uint64_t dim_b = 0;
};

void write_density_binary(const std::filesystem::path& path, const hilbert::DensityMatrix& rho,
                          std::uint64_t dim_a, std::uint64_t dim_b);
DensityFile read_density_binary(const std::filesystem::path& path);
/// Long format: row, col, re, im.
void write_density_csv(const std::filesystem::path& path, const hilbert::DensityMatrix& rho);

}  // namespace chaos_anneal::io
