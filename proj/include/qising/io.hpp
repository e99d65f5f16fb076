#pragma once

// Interchange formats: CSV with 17-significant-digit floats (lossless for
// doubles and locale-independent), JSON manifests and fit reports.

#include <filesystem>
#include <string>
#include <vector>

#include "qising/channels.hpp"
#include "qising/observables.hpp"
#include "qising/scaling.hpp"

namespace qising {

std::string format_double(double v);  // shortest-17 via std::to_chars

void write_series_csv(const std::filesystem::path& path, const TimeSeries& s);
TimeSeries read_series_csv(const std::filesystem::path& path);

void write_grid_csv(const std::filesystem::path& path, const HammingClassGrid& g);

// Row-major matrix dump, one row per line.
void write_matrix_csv(const std::filesystem::path& path, const double* data,
                      int rows, int cols);
Mat4 read_x_matrix_csv(const std::filesystem::path& path);

std::uint64_t fnv1a64_file(const std::filesystem::path& path);
std::string fnv1a64_hex(std::uint64_t digest);

std::string scaling_fit_report_json(
    const ScalingFit& fit, const std::vector<std::string>& input_names,
    const std::vector<std::uint64_t>& input_digests);

}  // namespace qising
