// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace dmce::bench {

struct ResultRow {
    std::string method;
    double snr_db = 0.0;
    double alpha = 1.0;
    int bits = 0;  // 0 = full resolution
    double nmse_db = 0.0;
    double latency_ms = 0.0;
    long n = 0;

    bool operator==(const ResultRow&) const = default;
};

inline constexpr const char* kCsvHeader = "method,snr_db,alpha,bits,nmse_db,latency_ms,n";

/// Orders rows by (method, snr_db, alpha, bits).
void sort_rows(std::vector<ResultRow>& rows);

std::string format_csv(const std::vector<ResultRow>& rows);
/// Throws FormatError with the offending line number.
std::vector<ResultRow> parse_csv(const std::string& text);

void write_csv(const std::filesystem::path& path, const std::vector<ResultRow>& rows);
std::vector<ResultRow> read_csv(const std::filesystem::path& path);

/// Median of `samples` after dropping the first `warmup` entries (all of them are used
/// when there are no more than `warmup`).
double median_latency(std::vector<double> samples, std::size_t warmup = 3);

struct Chart {
    std::string file_name;  // e.g. nmse_alpha1_bits0.svg
    std::string svg;
};

/// One NMSE-vs-SNR chart per (alpha, bits) pair, one polyline per method. Throws
/// InvalidArgument if there are no rows.
std::vector<Chart> render_charts(const std::vector<ResultRow>& rows);

} // namespace dmce::bench
