#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "dgcca/linalg.hpp"
#include "dgcca/network.hpp"

namespace dgcca {

// Binary matrix container ("MVMX"):
//   magic "MVMX" | u32 version (=1) | u64 rows | u64 cols |
//   rows*cols f64, little-endian, row-major.
// Loaders reject bad magic, version mismatches, and truncated payloads.
void write_matrix_mvmx(const std::filesystem::path& path, const Matrix& m);
Matrix read_matrix_mvmx(const std::filesystem::path& path);

// Label container ("MVLB"): magic | u32 version (=1) | u64 count | i32 payload.
void write_labels(const std::filesystem::path& path, const std::vector<std::int32_t>& labels);
std::vector<std::int32_t> read_labels(const std::filesystem::path& path);

// Network container ("MVNN"):
//   magic "MVNN" | u32 version (=1) | u32 activation id | u32 layer count K |
//   u64 widths[K+1] | per layer: f64 weights (row-major) then f64 biases.
void write_network(const std::filesystem::path& path, const MlpNetwork& net);
MlpNetwork read_network(const std::filesystem::path& path);

// CSV, comma-separated; a non-numeric first line is treated as a header row.
Matrix read_matrix_csv(const std::filesystem::path& path);
void write_matrix_csv(const std::filesystem::path& path, const Matrix& m);

}  // namespace dgcca
