#include "tsreg/io.hpp"

#include "tsreg/error.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>

namespace tsreg::io {

namespace {

std::string fixed(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    // keep "-0.000" out of the output so equal geometry gives equal bytes
    if (std::string_view(buf) == "-0.000") return "0.000";
    return buf;
}

std::string escape(std::string_view s) {
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

// comments may not contain "--"
std::string comment_safe(std::string_view s) {
    std::string out;
    for (char c : s) out += (c == '-' && !out.empty() && out.back() == '-') ? '_' : c;
    return out;
}

} // namespace

std::string render_svg(std::span<const PlotLayer> layers, const SvgOptions& options) {
    if (layers.empty()) throw Error("plot_svg: no layers to draw");
    if (!(options.width > 0.0) || !(options.margin >= 0.0)) throw Error("plot_svg: invalid options");

    double min_x = std::numeric_limits<double>::infinity();
    double min_y = min_x;
    double max_x = -min_x;
    double max_y = -min_x;
    for (const PlotLayer& layer : layers) {
        for (const Point& p : layer.points) {
            if (!p.allFinite()) throw Error("plot_svg: layer '" + layer.style.label + "' has a non-finite point");
            min_x = std::min(min_x, p.x());
            max_x = std::max(max_x, p.x());
            min_y = std::min(min_y, p.y());
            max_y = std::max(max_y, p.y());
        }
    }
    const bool any_points = min_x <= max_x;
    if (!any_points) {
        min_x = min_y = 0.0;
        max_x = max_y = 1.0;
    }

    double span = std::max(max_x - min_x, max_y - min_y);
    if (!(span > 0.0)) span = 1.0;
    const double pad = options.margin * span;
    const double data_w = std::max(max_x - min_x, span * 1e-3) + 2.0 * pad;
    const double data_h = std::max(max_y - min_y, span * 1e-3) + 2.0 * pad;
    const double scale = options.width / data_w;
    const double plot_h = data_h * scale;

    const double row = 18.0;
    std::size_t drawn = 0;
    for (const PlotLayer& layer : layers) drawn += layer.points.empty() ? 0 : 1;
    const double legend_h = row * static_cast<double>(drawn) + (drawn ? 8.0 : 0.0);
    const double height = plot_h + legend_h;

    // data (x, y) -> pixels, y pointing up
    auto px = [&](double x) { return (x - min_x + pad) * scale; };
    auto py = [&](double y) { return plot_h - (y - min_y + pad) * scale; };

    std::string out;
    out += "<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"no\"?>\n";
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + fixed(options.width) +
           "\" height=\"" + fixed(height) + "\" viewBox=\"0.000 0.000 " + fixed(options.width) + " " +
           fixed(height) + "\">\n";
    out += "<rect x=\"0.000\" y=\"0.000\" width=\"" + fixed(options.width) + "\" height=\"" + fixed(height) +
           "\" fill=\"#ffffff\"/>\n";

    for (std::size_t i = 0; i < layers.size(); ++i) {
        const PlotLayer& layer = layers[i];
        const PlotStyle& s = layer.style;
        if (layer.points.empty()) {
            out += "<!-- warning: layer " + std::to_string(i) + " '" + comment_safe(s.label) +
                   "' has no points and was skipped -->\n";
            continue;
        }
        out += "<g id=\"layer" + std::to_string(i) + "\">\n";
        out += "<polyline fill=\"none\" stroke=\"" + escape(s.color) + "\" stroke-width=\"" + fixed(s.stroke_width) +
               "\"";
        if (s.dashed) out += " stroke-dasharray=\"6.000 4.000\"";
        out += " points=\"";
        for (std::size_t k = 0; k < layer.points.size(); ++k) {
            if (k) out += ' ';
            out += fixed(px(layer.points[k].x())) + "," + fixed(py(layer.points[k].y()));
        }
        out += "\"/>\n";
        if (s.markers) {
            for (const Point& p : layer.points) {
                out += "<circle cx=\"" + fixed(px(p.x())) + "\" cy=\"" + fixed(py(p.y())) + "\" r=\"" +
                       fixed(1.5 * s.stroke_width) + "\" fill=\"" + escape(s.color) + "\"/>\n";
            }
        }
        out += "</g>\n";
    }

    if (drawn) {
        out += "<g id=\"legend\" font-family=\"sans-serif\" font-size=\"12.000\">\n";
        double y = plot_h + 4.0 + row / 2.0;
        for (const PlotLayer& layer : layers) {
            if (layer.points.empty()) continue;
            const PlotStyle& s = layer.style;
            out += "<line x1=\"10.000\" y1=\"" + fixed(y) + "\" x2=\"40.000\" y2=\"" + fixed(y) + "\" stroke=\"" +
                   escape(s.color) + "\" stroke-width=\"" + fixed(s.stroke_width) + "\"";
            if (s.dashed) out += " stroke-dasharray=\"6.000 4.000\"";
            out += "/>\n";
            out += "<text x=\"48.000\" y=\"" + fixed(y + 4.0) + "\">" + escape(s.label) + "</text>\n";
            y += row;
        }
        out += "</g>\n";
    }
    out += "</svg>\n";
    return out;
}

void plot_svg(std::span<const PlotLayer> layers, const std::filesystem::path& path, const SvgOptions& options) {
    write_text(path, render_svg(layers, options));
}

} // namespace tsreg::io
