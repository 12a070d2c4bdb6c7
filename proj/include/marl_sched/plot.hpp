#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "experiment.hpp"

namespace marl_sched {

namespace svg {

inline std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

inline std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

inline const char* color(std::size_t i) {
    static const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"};
    return palette[i % 6];
}

/// Round tick spacing (1, 2 or 5 times a power of ten) giving about `target` ticks.
inline double nice_step(double span, int target = 5) {
    if (!(span > 0.0)) return 1.0;
    const double raw = span / target;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    const double r = raw / mag;
    return (r < 1.5 ? 1.0 : r < 3.5 ? 2.0 : r < 7.5 ? 5.0 : 10.0) * mag;
}

struct Range {
    double lo = 0.0;
    double hi = 1.0;
};

inline Range padded_range(double lo, double hi, bool include_zero) {
    if (include_zero) {
        lo = std::min(lo, 0.0);
        hi = std::max(hi, 0.0);
    }
    if (!(hi > lo)) {
        const double pad = lo == 0.0 ? 1.0 : std::abs(lo) * 0.1;
        return {lo - pad, hi + pad};
    }
    const double step = nice_step(hi - lo);
    return {std::floor(lo / step) * step, std::ceil(hi / step) * step};
}

/// Plot area inside an SVG document with data-to-pixel mapping.
struct Panel {
    double x0, y0, w, h;
    Range xr, yr;

    double px(double x) const { return x0 + (x - xr.lo) / (xr.hi - xr.lo) * w; }
    double py(double y) const { return y0 + h - (y - yr.lo) / (yr.hi - yr.lo) * h; }
};

class Document {
public:
    Document(double width, double height) : width_(width), height_(height) {}

    void line(double x1, double y1, double x2, double y2, const std::string& stroke, double sw = 1.0,
              const std::string& dash = "") {
        body_ << "<line x1=\"" << fmt(x1) << "\" y1=\"" << fmt(y1) << "\" x2=\"" << fmt(x2) << "\" y2=\"" << fmt(y2)
              << "\" stroke=\"" << stroke << "\" stroke-width=\"" << fmt(sw) << "\"";
        if (!dash.empty()) body_ << " stroke-dasharray=\"" << dash << "\"";
        body_ << "/>\n";
    }

    void rect(double x, double y, double w, double h, const std::string& fill) {
        body_ << "<rect x=\"" << fmt(x) << "\" y=\"" << fmt(y) << "\" width=\"" << fmt(w) << "\" height=\"" << fmt(h)
              << "\" fill=\"" << fill << "\"/>\n";
    }

    void text(double x, double y, const std::string& s, const std::string& anchor = "middle", double size = 12,
              double rotate = 0.0) {
        body_ << "<text x=\"" << fmt(x) << "\" y=\"" << fmt(y) << "\" font-size=\"" << fmt(size)
              << "\" font-family=\"sans-serif\" text-anchor=\"" << anchor << "\"";
        if (rotate != 0.0) body_ << " transform=\"rotate(" << fmt(rotate) << ' ' << fmt(x) << ' ' << fmt(y) << ")\"";
        body_ << '>' << escape(s) << "</text>\n";
    }

    void polyline(const std::vector<std::pair<double, double>>& pts, const std::string& stroke, double sw = 2.0) {
        body_ << "<polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"" << fmt(sw) << "\" points=\"";
        for (const auto& [x, y] : pts) body_ << fmt(x) << ',' << fmt(y) << ' ';
        body_ << "\"/>\n";
    }

    void circle(double cx, double cy, double r, const std::string& fill) {
        body_ << "<circle cx=\"" << fmt(cx) << "\" cy=\"" << fmt(cy) << "\" r=\"" << fmt(r) << "\" fill=\"" << fill
              << "\"/>\n";
    }

    void axes(const Panel& p, const std::string& xlabel, const std::string& ylabel, bool x_ticks = true) {
        line(p.x0, p.y0 + p.h, p.x0 + p.w, p.y0 + p.h, "#000");
        line(p.x0, p.y0, p.x0, p.y0 + p.h, "#000");
        const double ys = nice_step(p.yr.hi - p.yr.lo);
        for (double y = std::ceil(p.yr.lo / ys - 1e-9) * ys; y <= p.yr.hi + 1e-9 * ys; y += ys) {
            line(p.x0 - 4, p.py(y), p.x0, p.py(y), "#000");
            line(p.x0, p.py(y), p.x0 + p.w, p.py(y), "#ddd", 0.5);
            text(p.x0 - 6, p.py(y) + 4, fmt(std::abs(y) < 1e-12 * ys ? 0.0 : y), "end", 10);
        }
        if (x_ticks) {
            const double xs = std::max(1.0, nice_step(p.xr.hi - p.xr.lo, 6));
            for (double x = std::ceil(p.xr.lo / xs) * xs; x <= p.xr.hi + 1e-9; x += xs) {
                line(p.px(x), p.y0 + p.h, p.px(x), p.y0 + p.h + 4, "#000");
                text(p.px(x), p.y0 + p.h + 16, fmt(x), "middle", 10);
            }
        }
        if (!xlabel.empty()) text(p.x0 + p.w / 2, p.y0 + p.h + 34, xlabel, "middle", 12);
        if (!ylabel.empty()) text(p.x0 - 46, p.y0 + p.h / 2, ylabel, "middle", 12, -90);
    }

    std::string str() const {
        std::ostringstream os;
        os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(width_) << "\" height=\"" << fmt(height_)
           << "\" viewBox=\"0 0 " << fmt(width_) << ' ' << fmt(height_) << "\">\n"
           << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
           << body_.str() << "</svg>\n";
        return os.str();
    }

private:
    double width_, height_;
    std::ostringstream body_;
};

}  // namespace svg

/// Per-episode ATCT of every scheduler, one line each.
inline std::string learning_curve_svg(const std::vector<SchedulerRun>& runs) {
    if (runs.empty()) throw InputError("learning curve: no scheduler results");
    std::size_t episodes = 0;
    double lo = 1e300, hi = -1e300;
    for (const auto& r : runs) {
        episodes = std::max(episodes, r.episodes.size());
        for (const auto& e : r.episodes) {
            if (!e.atct) continue;
            lo = std::min(lo, *e.atct);
            hi = std::max(hi, *e.atct);
        }
    }
    if (lo > hi) lo = hi = 0.0;
    svg::Document doc(760, 440);
    svg::Panel p{80, 50, 500, 320, {1.0, std::max(2.0, static_cast<double>(episodes))}, svg::padded_range(lo, hi, true)};
    doc.text(380, 28, "Average task completion time per episode", "middle", 15);
    doc.axes(p, "Episode", "ATCT (s)");
    for (std::size_t i = 0; i < runs.size(); ++i) {
        std::vector<std::pair<double, double>> pts;
        for (std::size_t e = 0; e < runs[i].episodes.size(); ++e) {
            if (const auto& a = runs[i].episodes[e].atct) pts.emplace_back(p.px(static_cast<double>(e + 1)), p.py(*a));
        }
        doc.polyline(pts, svg::color(i));
        for (const auto& [x, y] : pts) doc.circle(x, y, 2.5, svg::color(i));
        const double ly = 70 + 22.0 * static_cast<double>(i);
        doc.line(600, ly, 625, ly, svg::color(i), 3);
        doc.text(632, ly + 4, runs[i].name, "start", 12);
    }
    return doc.str();
}

/// Four bar panels (ATCT, energy, SLA rate, throughput) over the final window.
inline std::string comparison_bars_svg(const std::vector<SchedulerRun>& runs, std::size_t window) {
    if (runs.empty()) throw InputError("comparison bars: no scheduler results");
    struct PanelSpec {
        Metric metric;
        const char* title;
        double scale;
    };
    const PanelSpec specs[] = {{Metric::Atct, "ATCT (s)", 1.0},
                               {Metric::Energy, "Energy (kWh)", 1.0},
                               {Metric::SlaRate, "SLA compliance (%)", 100.0},
                               {Metric::Throughput, "Throughput (tasks/1000 s)", 1.0}};
    svg::Document doc(900, 700);
    doc.text(450, 26, "Final " + std::to_string(window) + "-episode means", "middle", 15);
    for (std::size_t k = 0; k < 4; ++k) {
        std::vector<double> means;
        for (const auto& r : runs) {
            const std::size_t w = std::min(window, r.episodes.size());
            const auto xs = final_window(r.episodes, w, specs[k].metric);
            means.push_back(mean_std(xs).mean * specs[k].scale);
        }
        const double hi = *std::max_element(means.begin(), means.end());
        const double lo = *std::min_element(means.begin(), means.end());
        svg::Panel p{90.0 + 440.0 * static_cast<double>(k % 2), 60.0 + 320.0 * static_cast<double>(k / 2), 330, 230,
                     {0.0, static_cast<double>(runs.size())}, svg::padded_range(lo, hi, true)};
        doc.text(p.x0 + p.w / 2, p.y0 - 10, specs[k].title, "middle", 13);
        doc.axes(p, "", "", false);
        for (std::size_t i = 0; i < runs.size(); ++i) {
            const double x = p.px(static_cast<double>(i) + 0.15);
            const double bw = p.px(0.7) - p.px(0.0);
            const double top = p.py(std::max(means[i], 0.0));
            const double bottom = p.py(std::min(means[i], 0.0));
            doc.rect(x, top, bw, bottom - top, svg::color(i));
            doc.text(x + bw / 2, top - 4, svg::fmt(std::round(means[i] * 100.0) / 100.0), "middle", 10);
            doc.text(x + bw / 2, p.y0 + p.h + 16, runs[i].name, "middle", 11);
        }
    }
    return doc.str();
}

/// Per-episode ATCT improvement of `candidate` over `baseline`, in percent.
inline std::string improvement_svg(const SchedulerRun& baseline, const SchedulerRun& candidate) {
    std::vector<std::pair<double, double>> series;
    const std::size_t n = std::min(baseline.episodes.size(), candidate.episodes.size());
    for (std::size_t e = 0; e < n; ++e) {
        const auto& b = baseline.episodes[e].atct;
        const auto& c = candidate.episodes[e].atct;
        if (b && c && *b != 0.0) series.emplace_back(static_cast<double>(e + 1), 100.0 * relative_improvement(*b, *c));
    }
    if (series.empty()) throw InputError("improvement curve: no episodes with ATCT for both schedulers");
    double lo = 0.0, hi = 0.0;
    for (const auto& [x, y] : series) {
        lo = std::min(lo, y);
        hi = std::max(hi, y);
    }
    svg::Document doc(700, 420);
    svg::Panel p{80, 50, 560, 300, {1.0, std::max(2.0, static_cast<double>(n))}, svg::padded_range(lo, hi, true)};
    doc.text(350, 28, "ATCT improvement of " + candidate.name + " over " + baseline.name, "middle", 15);
    doc.axes(p, "Episode", "Improvement (%)");
    doc.line(p.x0, p.py(0.0), p.x0 + p.w, p.py(0.0), "#555", 1.0, "4,3");
    std::vector<std::pair<double, double>> pts;
    for (const auto& [x, y] : series) pts.emplace_back(p.px(x), p.py(y));
    doc.polyline(pts, svg::color(3));
    for (const auto& [x, y] : pts) doc.circle(x, y, 2.5, svg::color(3));
    return doc.str();
}

struct PlotOutcome {
    std::vector<std::string> written;
    std::vector<std::string> errors;  // each names the offending file

    bool ok() const { return errors.empty(); }
};

/// Emit learning_curve.svg, comparison.svg and improvement.svg from the episode
/// CSVs in `dir`. A bad input file fails only the plots that need it.
inline PlotOutcome cmd_plot(const std::string& dir, std::size_t window = 10,
                            const std::vector<std::string>& names = known_schedulers()) {
    namespace fs = std::filesystem;
    PlotOutcome out;
    std::map<std::string, SchedulerRun> loaded;
    std::map<std::string, std::string> failed;
    std::vector<SchedulerRun> ordered;
    for (const auto& name : names) {
        const fs::path path = fs::path(dir) / (name + ".csv");
        if (!fs::exists(path)) continue;
        try {
            SchedulerRun r = read_episode_csv(path.string());
            r.name = name;
            loaded[name] = r;
            ordered.push_back(std::move(r));
        } catch (const InputError& e) {
            failed[name] = e.what();
            out.errors.push_back(e.what());
        }
    }
    if (ordered.empty() && failed.empty()) {
        out.errors.push_back(dir + ": no episode CSVs found");
        return out;
    }

    auto emit = [&](const std::string& file, const auto& make) {
        const fs::path path = fs::path(dir) / file;
        try {
            const std::string content = make();
            std::ofstream os(path);
            if (!os) throw InputError(path.string() + ": cannot write");
            os << content;
            out.written.push_back(path.string());
        } catch (const InputError& e) {
            out.errors.push_back(path.string() + ": " + e.what());
        }
    };
    if (!ordered.empty()) {
        emit("learning_curve.svg", [&] { return learning_curve_svg(ordered); });
        emit("comparison.svg", [&] { return comparison_bars_svg(ordered, window); });
    }
    emit("improvement.svg", [&]() -> std::string {
        for (const char* need : {"random", "drl"}) {
            const std::string file = (fs::path(dir) / (std::string(need) + ".csv")).string();
            if (failed.count(need)) throw InputError("needs " + file + " which failed to load");
            if (!loaded.count(need)) throw InputError("needs " + file + " which is missing");
        }
        return improvement_svg(loaded.at("random"), loaded.at("drl"));
    });
    return out;
}

}  // namespace marl_sched
