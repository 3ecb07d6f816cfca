#include "bns/export.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "bns/time_util.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace bns {

std::string format_double(double v) {
    char buf[32];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, p);
}

void atomic_write(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw IoError("short write to " + tmp.string());
    }
    fs::rename(tmp, path);
}

std::string vectors_to_csv(const std::vector<BNSVector>& vectors) {
    if (vectors.empty()) return "";
    const FeatureLayout& lay = layout(vectors.front().feature_set);
    std::string out = "window_start,window_end";
    for (const auto& f : lay.features) {
        out += ',';
        out += f.name;
    }
    out += '\n';
    for (const auto& v : vectors) {
        out += std::to_string(v.window.start);
        out += ',';
        out += std::to_string(v.window.end);
        for (double x : v.values) {
            out += ',';
            out += format_double(x);
        }
        out += '\n';
    }
    return out;
}

std::string vectors_manifest_json(const std::vector<BNSVector>& vectors, int layout_version) {
    json j;
    j["layout_version"] = layout_version;
    if (!vectors.empty()) {
        const auto& first = vectors.front();
        j["feature_set"] = to_string(first.feature_set);
        j["feature_names"] = layout(first.feature_set).names();
        j["window_seconds"] = first.window.length();
        j["windows"] = {{"count", vectors.size()},
                        {"first_start", vectors.front().window.start},
                        {"last_end", vectors.back().window.end}};
    } else {
        j["windows"] = {{"count", 0}};
    }
    return j.dump(2) + "\n";
}

namespace {

json config_json(const ImpactConfig& cfg) {
    json j;
    j["event_time"] = cfg.event_time;
    j["event_time_utc"] = format_time_utc(cfg.event_time);
    j["data_frame_hours"] = cfg.data_frame_hours;
    j["gap_hours"] = cfg.gap_hours;
    j["background_days"] = cfg.background_days;
    j["step_hours"] = cfg.step_hours;
    j["feature_set"] = to_string(cfg.feature_set);
    j["distance"] = to_string(cfg.distance);
    j["exclude_event_pairs"] = cfg.exclude_event_pairs;
    return j;
}

}  // namespace

std::string impact_result_json(const ImpactResult& result) {
    json j;
    j["config"] = config_json(result.config);
    j["event_distance"] = result.event_distance;
    j["background"] = {{"median", result.background_median},
                       {"std", result.background_std},
                       {"pair_count", result.background_pairs}};
    j["i_score"] = result.i_score;
    j["classification"] = to_string(result.classification);
    j["delay_hours"] = result.delay_hours;
    return j.dump(2) + "\n";
}

std::string curve_to_csv(const TemporalCurve& curve) {
    std::string out = "delay_hours,i_score\n";
    for (auto [d, i] : curve.points) {
        out += format_double(d);
        out += ',';
        out += format_double(i);
        out += '\n';
    }
    return out;
}

std::string scan_to_csv(const ScanSeries& series) {
    std::string out = "timestamp,distance\n";
    for (std::size_t i = 0; i < series.centers.size(); ++i) {
        out += std::to_string(series.centers[i]);
        out += ',';
        out += format_double(series.distances[i]);
        out += '\n';
    }
    return out;
}

std::string spikes_json(const ScanSeries& series, double threshold, std::int64_t min_separation_hours) {
    json j;
    j["threshold"] = threshold;
    j["min_separation_hours"] = min_separation_hours;
    json spikes = json::array();
    for (const auto& s : series.spikes) {
        spikes.push_back({{"time", s.time},
                          {"time_utc", format_time_utc(s.time)},
                          {"distance", s.distance}});
    }
    j["spikes"] = spikes;
    return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// SVG
// ---------------------------------------------------------------------------

namespace {

constexpr double kWidth = 960, kHeight = 420;
constexpr double kMarginL = 70, kMarginR = 20, kMarginT = 20, kMarginB = 50;

struct Range {
    double lo = 0.0, hi = 1.0;
    double map(double v, double pix_lo, double pix_hi) const {
        double t = hi == lo ? 0.5 : (v - lo) / (hi - lo);
        return pix_lo + t * (pix_hi - pix_lo);
    }
};

Range fit(const std::vector<double>& values) {
    Range r;
    if (values.empty()) return r;
    auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    r.lo = *lo;
    r.hi = *hi;
    if (r.lo == r.hi) {
        r.lo -= 1.0;
        r.hi += 1.0;
    }
    return r;
}

void append_polyline(std::string& svg, const SvgSeries& s, const Range& xr, const Range& yr,
                     const char* style) {
    svg += "<polyline fill=\"none\" style=\"";
    svg += style;
    svg += "\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
        svg += format_double(xr.map(s.x[i], kMarginL, kWidth - kMarginR));
        svg += ',';
        svg += format_double(yr.map(s.y[i], kHeight - kMarginB, kMarginT));
        svg += ' ';
    }
    svg += "\"/>\n";
}

}  // namespace

std::string line_chart_svg(const SvgSeries& raw, const SvgSeries* overlay,
                           const std::vector<std::pair<double, double>>& markers,
                           const std::string& x_label, const std::string& y_label) {
    std::vector<double> all_x = raw.x, all_y = raw.y;
    if (overlay) {
        all_x.insert(all_x.end(), overlay->x.begin(), overlay->x.end());
        all_y.insert(all_y.end(), overlay->y.begin(), overlay->y.end());
    }
    Range xr = fit(all_x), yr = fit(all_y);
    std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + format_double(kWidth) +
                      "\" height=\"" + format_double(kHeight) + "\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    // Axes
    svg += "<line x1=\"" + format_double(kMarginL) + "\" y1=\"" + format_double(kHeight - kMarginB) +
           "\" x2=\"" + format_double(kWidth - kMarginR) + "\" y2=\"" +
           format_double(kHeight - kMarginB) + "\" stroke=\"black\"/>\n";
    svg += "<line x1=\"" + format_double(kMarginL) + "\" y1=\"" + format_double(kMarginT) + "\" x2=\"" +
           format_double(kMarginL) + "\" y2=\"" + format_double(kHeight - kMarginB) +
           "\" stroke=\"black\"/>\n";
    for (int tick = 0; tick <= 4; ++tick) {
        double f = tick / 4.0;
        double xv = xr.lo + f * (xr.hi - xr.lo);
        double yv = yr.lo + f * (yr.hi - yr.lo);
        double xp = xr.map(xv, kMarginL, kWidth - kMarginR);
        double yp = yr.map(yv, kHeight - kMarginB, kMarginT);
        svg += "<text x=\"" + format_double(xp) + "\" y=\"" + format_double(kHeight - kMarginB + 18) +
               "\" font-size=\"11\" text-anchor=\"middle\">" + format_double(xv) + "</text>\n";
        svg += "<text x=\"" + format_double(kMarginL - 6) + "\" y=\"" + format_double(yp + 4) +
               "\" font-size=\"11\" text-anchor=\"end\">" + format_double(yv) + "</text>\n";
    }
    svg += "<text x=\"" + format_double((kMarginL + kWidth - kMarginR) / 2) + "\" y=\"" +
           format_double(kHeight - 12) + "\" font-size=\"13\" text-anchor=\"middle\">" + x_label +
           "</text>\n";
    svg += "<text x=\"16\" y=\"" + format_double((kMarginT + kHeight - kMarginB) / 2) +
           "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
           format_double((kMarginT + kHeight - kMarginB) / 2) + ")\">" + y_label + "</text>\n";
    if (overlay && !overlay->x.empty()) {
        append_polyline(svg, *overlay, xr, yr, "stroke:#7799dd;stroke-width:1");
    }
    append_polyline(svg, raw, xr, yr, "stroke:#202020;stroke-width:1.2");
    for (auto [mx, my] : markers) {
        svg += "<circle cx=\"" + format_double(xr.map(mx, kMarginL, kWidth - kMarginR)) + "\" cy=\"" +
               format_double(yr.map(my, kHeight - kMarginB, kMarginT)) +
               "\" r=\"4\" fill=\"none\" stroke=\"#cc3333\" stroke-width=\"1.5\"/>\n";
    }
    svg += "</svg>\n";
    return svg;
}

}  // namespace bns
