#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "metaevolve/event_log.hpp"
#include "metaevolve/engine.hpp"

namespace metaevolve {

// Everything a report needs, derived purely from an event log. Regenerating
// a report from the log alone yields identical artifacts.
struct LogDigest {
    std::string task;
    std::uint64_t seed = 0;
    std::vector<double> best_raw;      // per step
    std::vector<double> best_internal; // per step
    std::vector<std::string> strategy_per_step;
    std::vector<int> switched;         // 1 on steps where a switch applied
    std::vector<TimelineEntry> timeline;
    std::vector<json> window_records;  // strategy_record bodies
    double final_best_raw = 0.0;
    double final_best_internal = 0.0;
    std::int64_t steps = 0;
    std::int64_t switch_count = 0;
    bool finished = false;
};

inline LogDigest digest_log(const std::string& path) {
    const LoadedLog loaded = load_event_log(path);
    if (loaded.events.empty()) throw std::runtime_error("empty log: " + path);
    LogDigest d;
    double best_internal = 0.0;
    double best_raw = 0.0;
    bool have_best = false;
    std::string active = "?";
    bool switch_pending = false;
    for (const auto& ev : loaded.events) {
        const std::string type = ev.at("event").get<std::string>();
        if (type == "run_started") {
            d.task = ev.at("config").at("task").get<std::string>();
            d.seed = ev.at("config").at("seed").get<std::uint64_t>();
            if (!ev.at("config").at("initial_strategy").is_null()) {
                active = ev.at("config").at("initial_strategy").at("id").get<std::string>();
            } else {
                active = "builtin:random";
            }
            d.timeline.push_back({1, active, "initial"});
        } else if (type == "step") {
            const auto& rec = ev.at("record");
            const double internal = rec.at("internal_score").get<double>();
            const double raw = rec.at("raw_score").get<double>();
            if (!have_best || internal > best_internal) {
                best_internal = internal;
                best_raw = raw;
                have_best = true;
            }
            d.best_raw.push_back(best_raw);
            d.best_internal.push_back(best_internal);
            d.strategy_per_step.push_back(active);
            d.switched.push_back(switch_pending ? 1 : 0);
            switch_pending = false;
            d.steps += 1;
        } else if (type == "window_scored") {
            d.window_records.push_back(ev.at("strategy_record"));
        } else if (type == "switch_applied") {
            active = ev.at("spec").at("id").get<std::string>();
            d.switch_count += 1;
            switch_pending = true;
            d.timeline.push_back({ev.at("step").get<std::int64_t>(), active, "stagnation"});
        } else if (type == "run_finished") {
            d.finished = true;
        }
    }
    d.final_best_raw = best_raw;
    d.final_best_internal = best_internal;
    return d;
}

inline std::string format_double(double v) {
    json j = v;
    return j.dump();
}

inline void write_trajectory_csv(const LogDigest& d, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write csv: " + path);
    out << "step,best_raw,best_internal,strategy_id,switched\n";
    for (std::size_t i = 0; i < d.best_raw.size(); ++i) {
        out << (i + 1) << "," << format_double(d.best_raw[i]) << ","
            << format_double(d.best_internal[i]) << "," << d.strategy_per_step[i] << ","
            << d.switched[i] << "\n";
    }
}

inline void write_timeline_csv(const LogDigest& d, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write csv: " + path);
    out << "step,strategy_id,reason\n";
    for (const auto& e : d.timeline) {
        out << e.step << "," << e.strategy_id << "," << e.reason << "\n";
    }
}

// --- SVG convergence figure ------------------------------------------------------

namespace detail {

inline const char* kCurveColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                     "#ff7f0e", "#8c564b", "#e377c2", "#7f7f7f"};

struct PlotRange {
    double x_lo = 1.0, x_hi = 2.0, y_lo = 0.0, y_hi = 1.0;
};

inline double map_x(const PlotRange& r, double x, double w, double margin) {
    return margin + (x - r.x_lo) / (r.x_hi - r.x_lo) * (w - 2 * margin);
}

inline double map_y(const PlotRange& r, double y, double h, double margin) {
    return h - margin - (y - r.y_lo) / (r.y_hi - r.y_lo) * (h - 2 * margin);
}

} // namespace detail

struct CurveSeries {
    std::string label;
    std::vector<double> values;     // best-so-far internal per step
    std::vector<std::int64_t> switch_steps; // 1-based steps with a switch marker
};

// Self-contained SVG: one polyline per run, circles marking strategy switches.
inline void write_convergence_svg(const std::vector<CurveSeries>& series, const std::string& title,
                                  const std::string& path) {
    if (series.empty()) throw std::invalid_argument("write_convergence_svg: no series");
    const double width = 860, height = 480, margin = 60;

    detail::PlotRange r;
    r.x_lo = 1.0;
    r.x_hi = 1.0;
    bool have_y = false;
    for (const auto& s : series) {
        r.x_hi = std::max(r.x_hi, static_cast<double>(s.values.size()));
        for (double v : s.values) {
            if (!have_y) {
                r.y_lo = r.y_hi = v;
                have_y = true;
            } else {
                r.y_lo = std::min(r.y_lo, v);
                r.y_hi = std::max(r.y_hi, v);
            }
        }
    }
    if (r.x_hi <= r.x_lo) r.x_hi = r.x_lo + 1.0;
    if (r.y_hi <= r.y_lo) r.y_hi = r.y_lo + 1.0;
    const double pad = 0.05 * (r.y_hi - r.y_lo);
    r.y_lo -= pad;
    r.y_hi += pad;

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"16\">" << title << "</text>\n";
    // axes
    svg << "<line x1=\"" << margin << "\" y1=\"" << height - margin << "\" x2=\"" << width - margin
        << "\" y2=\"" << height - margin << "\" stroke=\"black\"/>\n";
    svg << "<line x1=\"" << margin << "\" y1=\"" << margin << "\" x2=\"" << margin << "\" y2=\""
        << height - margin << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << width / 2 << "\" y=\"" << height - 16
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">step</text>\n";
    svg << "<text x=\"18\" y=\"" << height / 2
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
           "transform=\"rotate(-90 18 " << height / 2 << ")\">best internal score</text>\n";
    // y tick labels
    for (int i = 0; i <= 4; ++i) {
        const double v = r.y_lo + (r.y_hi - r.y_lo) * i / 4.0;
        const double y = detail::map_y(r, v, height, margin);
        svg << "<line x1=\"" << margin - 4 << "\" y1=\"" << y << "\" x2=\"" << margin << "\" y2=\""
            << y << "\" stroke=\"black\"/>\n";
        svg << "<text x=\"" << margin - 8 << "\" y=\"" << y + 4
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">"
            << std::setprecision(4) << v << "</text>\n";
    }

    for (std::size_t si = 0; si < series.size(); ++si) {
        const auto& s = series[si];
        const char* color = detail::kCurveColors[si % std::size(detail::kCurveColors)];
        svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < s.values.size(); ++i) {
            svg << detail::map_x(r, static_cast<double>(i + 1), width, margin) << ","
                << detail::map_y(r, s.values[i], height, margin) << " ";
        }
        svg << "\"/>\n";
        for (std::int64_t step : s.switch_steps) {
            if (step < 1 || step > static_cast<std::int64_t>(s.values.size())) continue;
            const double cx = detail::map_x(r, static_cast<double>(step), width, margin);
            const double cy =
                detail::map_y(r, s.values[static_cast<std::size_t>(step - 1)], height, margin);
            svg << "<circle cx=\"" << cx << "\" cy=\"" << cy << "\" r=\"4\" fill=\"none\" stroke=\""
                << color << "\" stroke-width=\"1.5\"/>\n";
        }
        // legend, argument order
        const double ly = margin + 18.0 * static_cast<double>(si);
        svg << "<line x1=\"" << width - margin - 150 << "\" y1=\"" << ly << "\" x2=\""
            << width - margin - 120 << "\" y2=\"" << ly << "\" stroke=\"" << color
            << "\" stroke-width=\"2\"/>\n";
        svg << "<text x=\"" << width - margin - 114 << "\" y=\"" << ly + 4
            << "\" font-family=\"sans-serif\" font-size=\"11\">" << s.label << "</text>\n";
    }
    svg << "</svg>\n";

    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write svg: " + path);
    out << svg.str();
}

inline CurveSeries curve_from_digest(const LogDigest& d, const std::string& label) {
    CurveSeries s;
    s.label = label;
    s.values = d.best_internal;
    for (std::size_t i = 0; i < d.switched.size(); ++i) {
        if (d.switched[i]) s.switch_steps.push_back(static_cast<std::int64_t>(i + 1));
    }
    return s;
}

struct ReportBundle {
    std::string trajectory_csv;
    std::string timeline_csv;
    std::string figure_svg;
    std::string summary_text;
};

inline ReportBundle write_report(const LogDigest& d, const std::string& out_dir,
                                 const std::string& stem) {
    ReportBundle b;
    b.trajectory_csv = out_dir + "/" + stem + "_trajectory.csv";
    b.timeline_csv = out_dir + "/" + stem + "_timeline.csv";
    b.figure_svg = out_dir + "/" + stem + "_convergence.svg";
    write_trajectory_csv(d, b.trajectory_csv);
    write_timeline_csv(d, b.timeline_csv);
    write_convergence_svg({curve_from_digest(d, d.task + " seed " + std::to_string(d.seed))},
                          "Best-so-far convergence (" + d.task + ")", b.figure_svg);

    std::ostringstream sum;
    sum << "task: " << d.task << "\n";
    sum << "seed: " << d.seed << "\n";
    sum << "steps: " << d.steps << (d.finished ? "" : " (incomplete)") << "\n";
    sum << "best raw score: " << format_double(d.final_best_raw) << "\n";
    sum << "strategy switches: " << d.switch_count << "\n";
    sum << "strategy windows (id, J, delta, window):\n";
    for (const auto& w : d.window_records) {
        sum << "  " << w.at("spec").at("id").get<std::string>() << "  J="
            << format_double(w.at("J").get<double>()) << "  delta="
            << format_double(w.at("delta").get<double>()) << "  W="
            << w.at("window_len").get<std::int64_t>() << "\n";
    }
    b.summary_text = sum.str();
    return b;
}

} // namespace metaevolve
