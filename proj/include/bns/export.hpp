#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "bns/features.hpp"
#include "bns/impact.hpp"

namespace bns {

// Shortest round-trip decimal form (std::to_chars); deterministic and
// locale-independent, so emitted files are byte-stable across runs.
std::string format_double(double v);

// Write via temp file + rename in the destination directory.
void atomic_write(const std::filesystem::path& path, const std::string& content);

std::string vectors_to_csv(const std::vector<BNSVector>& vectors);
std::string vectors_manifest_json(const std::vector<BNSVector>& vectors, int layout_version = 1);

std::string impact_result_json(const ImpactResult& result);
std::string curve_to_csv(const TemporalCurve& curve);
std::string scan_to_csv(const ScanSeries& series);
std::string spikes_json(const ScanSeries& series, double threshold, std::int64_t min_separation_hours);

// Minimal line chart for quick inspection; optional overlay (e.g. spline
// samples) drawn as a second polyline, spikes as markers.
struct SvgSeries {
    std::vector<double> x;
    std::vector<double> y;
};
std::string line_chart_svg(const SvgSeries& raw, const SvgSeries* overlay,
                           const std::vector<std::pair<double, double>>& markers,
                           const std::string& x_label, const std::string& y_label);

}  // namespace bns
