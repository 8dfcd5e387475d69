#pragma once

// Static SVG charts rendered from a benchmark report: per-bug survival
// steps with confidence bands, an exclusive-intersection bar chart with
// decoy bugs in a distinct color, and per-fuzzer consistency bars. No
// external renderer; every coordinate is printed with %.2f so identical
// reports produce byte-identical SVG.

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"

namespace frb {

namespace chart_detail {

inline const std::vector<std::string>& palette() {
    static const std::vector<std::string> p = {"#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e",
                                               "#17becf", "#8c564b", "#7f7f7f", "#bcbd22"};
    return p;
}
inline constexpr const char* kTpColor = "#1f77b4";
inline constexpr const char* kFpColor = "#d62728";

inline std::string f2(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

inline std::string esc(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '&') out += "&amp;";
        else if (c == '<') out += "&lt;";
        else if (c == '>') out += "&gt;";
        else out += c;
    }
    return out;
}

struct Frame {
    double width = 720, height = 420;
    double left = 64, right = 20, top = 34, bottom = 48;
    double x0, x1, y0, y1; // data ranges

    double px(double x) const {
        return left + (x - x0) / (x1 - x0) * (width - left - right);
    }
    double py(double y) const {
        return height - bottom - (y - y0) / (y1 - y0) * (height - top - bottom);
    }
};

inline std::string svg_open(const Frame& fr, const std::string& title) {
    std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + f2(fr.width) +
                    "\" height=\"" + f2(fr.height) + "\" viewBox=\"0 0 " + f2(fr.width) + " " +
                    f2(fr.height) + "\">\n";
    s += "<rect x=\"0\" y=\"0\" width=\"" + f2(fr.width) + "\" height=\"" + f2(fr.height) +
         "\" fill=\"#ffffff\"/>\n";
    s += "<text x=\"" + f2(fr.width / 2) + "\" y=\"20\" text-anchor=\"middle\" "
         "font-family=\"monospace\" font-size=\"14\" fill=\"#111111\">" +
         esc(title) + "</text>\n";
    return s;
}

inline std::string axis_line(double x1, double y1, double x2, double y2) {
    return "<line x1=\"" + f2(x1) + "\" y1=\"" + f2(y1) + "\" x2=\"" + f2(x2) + "\" y2=\"" +
           f2(y2) + "\" stroke=\"#444444\" stroke-width=\"1\"/>\n";
}

inline std::string tick_label(double x, double y, const std::string& text,
                              const std::string& anchor) {
    return "<text x=\"" + f2(x) + "\" y=\"" + f2(y) + "\" text-anchor=\"" + anchor +
           "\" font-family=\"monospace\" font-size=\"11\" fill=\"#333333\">" + esc(text) +
           "</text>\n";
}

inline std::string hhmm(double seconds) {
    auto total_min = static_cast<unsigned long long>(seconds < 0 ? 0 : seconds) / 60;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%02llu:%02llu", total_min / 60, total_min % 60);
    return buf;
}

} // namespace chart_detail

// Survival chart for one bug: a step line per fuzzer plus its 95% band.
inline std::string svg_survival(const nlohmann::json& report, const std::string& bug_id) {
    using namespace chart_detail;
    Frame fr;
    fr.x0 = 0;
    fr.x1 = report.at("horizon_s").get<double>();
    if (fr.x1 <= 0) fr.x1 = 1;
    fr.y0 = 0;
    fr.y1 = 1;

    std::string svg = svg_open(fr, "survival of " + bug_id + " (lower = found sooner)");
    svg += axis_line(fr.left, fr.py(0), fr.px(fr.x1), fr.py(0));
    svg += axis_line(fr.left, fr.py(0), fr.left, fr.py(1));
    for (int i = 0; i <= 4; i++) {
        double yv = i / 4.0;
        svg += tick_label(fr.left - 6, fr.py(yv) + 4, f2(yv), "end");
        double xv = fr.x1 * i / 4.0;
        svg += tick_label(fr.px(xv), fr.height - fr.bottom + 16, hhmm(xv), "middle");
    }
    svg += tick_label(fr.px(fr.x1 / 2), fr.height - 8, "time (hh:mm)", "middle");

    int color_i = 0;
    double legend_y = fr.top + 8;
    for (const auto& f : report.at("fuzzers")) {
        const nlohmann::json* rollup = nullptr;
        for (const auto& b : f.at("bugs"))
            if (b.at("bug_id").get<std::string>() == bug_id) rollup = &b;
        if (!rollup) continue;
        std::string color = palette()[size_t(color_i) % palette().size()];
        color_i++;

        // Step samples: (0,1,1,1), the curve points, then a flat run-out.
        std::vector<std::array<double, 3>> pts = {{0, 1, 1}}; // t, lo, hi for band
        std::vector<std::array<double, 2>> line = {{0, 1}};
        for (const auto& p : rollup->at("survival")) {
            double t = p.at("time_s").get<double>();
            line.push_back({t, p.at("prob").get<double>()});
            pts.push_back({t, p.at("ci_low").get<double>(), p.at("ci_high").get<double>()});
        }

        // Confidence band as a closed step polygon (upper forward, lower back).
        std::string band = "M " + f2(fr.px(pts[0][0])) + " " + f2(fr.py(pts[0][2]));
        for (size_t i = 1; i < pts.size(); i++) {
            band += " L " + f2(fr.px(pts[i][0])) + " " + f2(fr.py(pts[i - 1][2]));
            band += " L " + f2(fr.px(pts[i][0])) + " " + f2(fr.py(pts[i][2]));
        }
        band += " L " + f2(fr.px(fr.x1)) + " " + f2(fr.py(pts.back()[2]));
        band += " L " + f2(fr.px(fr.x1)) + " " + f2(fr.py(pts.back()[1]));
        for (size_t i = pts.size(); i-- > 1;) {
            band += " L " + f2(fr.px(pts[i][0])) + " " + f2(fr.py(pts[i][1]));
            band += " L " + f2(fr.px(pts[i][0])) + " " + f2(fr.py(pts[i - 1][1]));
        }
        band += " L " + f2(fr.px(pts[0][0])) + " " + f2(fr.py(pts[0][1])) + " Z";
        svg += "<path d=\"" + band + "\" fill=\"" + color + "\" fill-opacity=\"0.15\" "
               "stroke=\"none\"/>\n";

        std::string path = "M " + f2(fr.px(line[0][0])) + " " + f2(fr.py(line[0][1]));
        for (size_t i = 1; i < line.size(); i++) {
            path += " H " + f2(fr.px(line[i][0]));
            path += " V " + f2(fr.py(line[i][1]));
        }
        path += " H " + f2(fr.px(fr.x1));
        svg += "<path d=\"" + path + "\" fill=\"none\" stroke=\"" + color +
               "\" stroke-width=\"2\"/>\n";

        svg += "<rect x=\"" + f2(fr.width - fr.right - 150) + "\" y=\"" + f2(legend_y - 9) +
               "\" width=\"14\" height=\"6\" fill=\"" + color + "\"/>\n";
        svg += tick_label(fr.width - fr.right - 132, legend_y,
                          f.at("name").get<std::string>(), "start");
        legend_y += 16;
    }
    svg += "</svg>\n";
    return svg;
}

// Exclusive intersections across fuzzers; real and decoy bugs stack in
// different colors.
inline std::string svg_upset(const nlohmann::json& report) {
    using namespace chart_detail;
    const auto& rows = report.at("intersections");
    Frame fr;
    fr.x0 = 0;
    fr.x1 = double(std::max<size_t>(rows.size(), 1));
    double max_count = 1;
    for (const auto& r : rows)
        max_count = std::max(max_count, double(r.at("tp_bugs").size() + r.at("fp_bugs").size()));
    fr.y0 = 0;
    fr.y1 = max_count;
    fr.bottom = 72;

    std::string svg = svg_open(fr, "bugs triggered exclusively by each fuzzer subset");
    svg += axis_line(fr.left, fr.py(0), fr.px(fr.x1), fr.py(0));
    svg += axis_line(fr.left, fr.py(0), fr.left, fr.py(fr.y1));
    for (int i = 0; i <= int(max_count); i++)
        svg += tick_label(fr.left - 6, fr.py(i) + 4, std::to_string(i), "end");

    double slot = (fr.px(fr.x1) - fr.px(0)) / double(std::max<size_t>(rows.size(), 1));
    size_t idx = 0;
    for (const auto& r : rows) {
        double cx = fr.px(double(idx)) + slot / 2;
        double w = slot * 0.55;
        double tp = double(r.at("tp_bugs").size());
        double fp = double(r.at("fp_bugs").size());
        if (tp > 0)
            svg += "<rect x=\"" + f2(cx - w / 2) + "\" y=\"" + f2(fr.py(tp)) + "\" width=\"" +
                   f2(w) + "\" height=\"" + f2(fr.py(0) - fr.py(tp)) + "\" fill=\"" + kTpColor +
                   "\"/>\n";
        if (fp > 0)
            svg += "<rect x=\"" + f2(cx - w / 2) + "\" y=\"" + f2(fr.py(tp + fp)) +
                   "\" width=\"" + f2(w) + "\" height=\"" + f2(fr.py(tp) - fr.py(tp + fp)) +
                   "\" fill=\"" + kFpColor + "\"/>\n";
        if (tp + fp > 0)
            svg += tick_label(cx, fr.py(tp + fp) - 5,
                              std::to_string(size_t(tp)) +
                                  (fp > 0 ? "+" + std::to_string(size_t(fp)) : ""),
                              "middle");
        std::string label;
        for (const auto& name : r.at("fuzzers"))
            label += (label.empty() ? "" : "+") + name.get<std::string>();
        svg += "<text x=\"" + f2(cx) + "\" y=\"" + f2(fr.height - fr.bottom + 16) +
               "\" text-anchor=\"end\" font-family=\"monospace\" font-size=\"11\" "
               "fill=\"#333333\" transform=\"rotate(-35 " + f2(cx) + " " +
               f2(fr.height - fr.bottom + 16) + ")\">" + esc(label) + "</text>\n";
        idx++;
    }
    svg += "<rect x=\"" + f2(fr.width - fr.right - 150) + "\" y=\"" + f2(fr.top) +
           "\" width=\"14\" height=\"10\" fill=\"" + std::string(kTpColor) + "\"/>\n";
    svg += tick_label(fr.width - fr.right - 132, fr.top + 9, "real bugs", "start");
    svg += "<rect x=\"" + f2(fr.width - fr.right - 150) + "\" y=\"" + f2(fr.top + 16) +
           "\" width=\"14\" height=\"10\" fill=\"" + std::string(kFpColor) + "\"/>\n";
    svg += tick_label(fr.width - fr.right - 132, fr.top + 25, "decoy bugs", "start");
    svg += "</svg>\n";
    return svg;
}

// One consistency bar per fuzzer, scale 0..1.
inline std::string svg_consistency(const nlohmann::json& report) {
    using namespace chart_detail;
    const auto& fuzzers = report.at("fuzzers");
    Frame fr;
    fr.x0 = 0;
    fr.x1 = double(std::max<size_t>(fuzzers.size(), 1));
    fr.y0 = 0;
    fr.y1 = 1;
    fr.bottom = 60;

    std::string svg = svg_open(fr, "consistency (mean per-bug trigger rate across trials)");
    svg += axis_line(fr.left, fr.py(0), fr.px(fr.x1), fr.py(0));
    svg += axis_line(fr.left, fr.py(0), fr.left, fr.py(1));
    for (int i = 0; i <= 4; i++)
        svg += tick_label(fr.left - 6, fr.py(i / 4.0) + 4, f2(i / 4.0), "end");

    double slot = (fr.px(fr.x1) - fr.px(0)) / double(std::max<size_t>(fuzzers.size(), 1));
    size_t idx = 0;
    for (const auto& f : fuzzers) {
        double v = f.at("consistency").get<double>();
        double cx = fr.px(double(idx)) + slot / 2;
        double w = slot * 0.5;
        std::string color = palette()[idx % palette().size()];
        svg += "<rect x=\"" + f2(cx - w / 2) + "\" y=\"" + f2(fr.py(v)) + "\" width=\"" + f2(w) +
               "\" height=\"" + f2(fr.py(0) - fr.py(v)) + "\" fill=\"" + color + "\"/>\n";
        svg += tick_label(cx, fr.py(v) - 5, f2(v), "middle");
        svg += tick_label(cx, fr.height - fr.bottom + 16, f.at("name").get<std::string>(),
                          "middle");
        idx++;
    }
    svg += "</svg>\n";
    return svg;
}

// Writes survival_<bug>.svg for every bug in the report, then upset.svg and
// consistency.svg. Returns relative paths in write order.
inline std::vector<std::string> write_charts(const std::string& out_dir,
                                             const nlohmann::json& report) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    std::vector<std::string> written;
    auto emit = [&](const std::string& rel, const std::string& body) {
        std::ofstream f(fs::path(out_dir) / rel, std::ios::binary);
        if (!f) throw std::runtime_error("cannot write " + rel + " under " + out_dir);
        f << body;
        written.push_back(rel);
    };
    auto sanitize = [](const std::string& s) {
        std::string out;
        for (char c : s)
            out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_') ? c : '_';
        return out;
    };
    for (const char* key : {"tp", "fp"})
        for (const auto& bug : report.at("bugs").at(key)) {
            std::string id = bug.get<std::string>();
            emit("survival_" + sanitize(id) + ".svg", svg_survival(report, id));
        }
    emit("upset.svg", svg_upset(report));
    emit("consistency.svg", svg_consistency(report));
    return written;
}

} // namespace frb
