#include "tsreg/geometry.hpp"

#include "tsreg/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace tsreg {

namespace {

double wrap180(double degrees) {
    double r = std::fmod(degrees, 360.0);
    if (r > 180.0) r -= 360.0;
    if (r <= -180.0) r += 360.0;
    return r;
}

void check_uniform(const std::vector<Point>& nodes, double delta_l) {
    if (nodes.size() < 2) throw Error("curve needs at least 2 nodes, got " + std::to_string(nodes.size()));
    if (!(delta_l > 0.0) || !std::isfinite(delta_l)) throw Error("curve delta_l must be positive and finite");
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (!nodes[i].allFinite()) throw Error("curve node " + std::to_string(i) + " is not finite");
    }
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
        const double d = (nodes[i + 1] - nodes[i]).norm();
        if (std::abs(d - delta_l) > kUniformTolerance * delta_l) {
            throw Error("segment " + std::to_string(i) + " has length " + std::to_string(d) + ", expected delta_l " +
                        std::to_string(delta_l) + "; resample the polyline with resample_uniform first");
        }
    }
}

// Position on a polyline: segment index plus parameter in [0, 1].
struct Cursor {
    std::size_t seg = 0;
    double u = 0.0;
};

Point at(std::span<const Point> pts, const Cursor& c) {
    return pts[c.seg] + c.u * (pts[c.seg + 1] - pts[c.seg]);
}

// Advances `c` to the first polyline point beyond it at chord distance
// `chord` from `from`. Returns false when the polyline ends first.
bool advance(std::span<const Point> pts, Cursor& c, const Point& from, double chord) {
    for (std::size_t s = c.seg; s + 1 < pts.size(); ++s) {
        const Point r = pts[s] - from;
        const Point e = pts[s + 1] - pts[s];
        const double a = e.squaredNorm();
        const double b = 2.0 * r.dot(e);
        const double q = r.squaredNorm() - chord * chord;
        const double disc = b * b - 4.0 * a * q;
        if (disc < 0.0) continue;
        const double u = (-b + std::sqrt(disc)) / (2.0 * a);
        const double u0 = (s == c.seg) ? c.u : 0.0;
        if (u >= u0 && u <= 1.0) {
            c = {s, u};
            return true;
        }
    }
    return false;
}

// Remaining polyline arc length after placing `steps` equal chords, or a
// negative value when they do not fit.
double chord_walk(std::span<const Point> pts, std::size_t steps, double chord, std::vector<Point>* out) {
    Cursor c;
    Point p = pts.front();
    if (out) out->assign(1, p);
    for (std::size_t k = 0; k < steps; ++k) {
        if (!advance(pts, c, p, chord)) return -static_cast<double>(steps - k);
        p = at(pts, c);
        if (out) out->push_back(p);
    }
    double rest = (1.0 - c.u) * (pts[c.seg + 1] - pts[c.seg]).norm();
    for (std::size_t s = c.seg + 1; s + 1 < pts.size(); ++s) rest += (pts[s + 1] - pts[s]).norm();
    return rest;
}

} // namespace

double deg2rad(double degrees) { return degrees * std::numbers::pi / 180.0; }
double rad2deg(double radians) { return radians * 180.0 / std::numbers::pi; }

Curve::Curve(std::vector<Point> nodes, double delta_l) : nodes_(std::move(nodes)), delta_l_(delta_l) {
    check_uniform(nodes_, delta_l_);
}

Curve Curve::from_nodes(std::vector<Point> nodes) {
    if (nodes.size() < 2) throw Error("curve needs at least 2 nodes, got " + std::to_string(nodes.size()));
    const double delta_l = curve_length(nodes) / static_cast<double>(nodes.size() - 1);
    return Curve(std::move(nodes), delta_l);
}

void TangentProfile::validate() const {
    if (thetas.empty()) throw Error("tangent profile has no segments");
    if (!(delta_l > 0.0) || !std::isfinite(delta_l)) throw Error("tangent profile delta_l must be positive");
    if (!(abscissa_scale > 0.0) || !std::isfinite(abscissa_scale))
        throw Error("tangent profile abscissa scale must be positive");
    if (!base_point.allFinite()) throw Error("tangent profile base point is not finite");
    for (std::size_t i = 0; i < thetas.size(); ++i) {
        if (!std::isfinite(thetas[i])) throw Error("tangent angle " + std::to_string(i) + " is not finite");
    }
}

Curve resample_uniform(std::span<const Point> polyline, std::size_t node_count) {
    if (node_count < 2) throw Error("resample_uniform needs at least 2 output nodes");
    std::vector<Point> pts;
    pts.reserve(polyline.size());
    for (const Point& p : polyline) {
        if (!p.allFinite()) throw Error("polyline contains a non-finite point");
        if (pts.empty() || (p - pts.back()).norm() > 0.0) pts.push_back(p);
    }
    if (pts.size() < 2) throw Error("degenerate polyline: total length is zero");

    const std::size_t steps = node_count - 1;
    const double total = curve_length(pts);

    // Chords never exceed the arc they span, so total/steps is an upper
    // bound on the common chord; bisect for the largest chord that fits.
    double lo = 0.0;
    double hi = total / static_cast<double>(steps);
    std::vector<Point> nodes;
    if (chord_walk(pts, steps, hi, nullptr) >= 0.0) {
        lo = hi;
    } else {
        for (int it = 0; it < 200 && hi - lo > 1e-17 * total; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (chord_walk(pts, steps, mid, nullptr) >= 0.0) lo = mid;
            else hi = mid;
        }
    }
    chord_walk(pts, steps, lo, &nodes);
    // Usually the largest fitting chord ends on the polyline's last point.
    // On a hairpin the walk can instead stop short, with the remaining tail
    // curling back inside one chord; the last node then stays where the
    // walk put it so the spacing stays uniform.
    if ((nodes.back() - pts.back()).norm() <= 1e-3 * kUniformTolerance * lo) nodes.back() = pts.back();
    return Curve::from_nodes(std::move(nodes));
}

TangentProfile to_tangent(const Curve& curve, double abscissa_scale) {
    TangentProfile profile;
    profile.base_point = curve.node(0);
    profile.delta_l = curve.delta_l();
    profile.abscissa_scale = abscissa_scale;
    profile.thetas.reserve(curve.segments());
    const auto& nodes = curve.nodes();
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
        const Point d = nodes[i + 1] - nodes[i];
        if (d.squaredNorm() == 0.0) throw Error("coincident nodes " + std::to_string(i) + " and " + std::to_string(i + 1));
        const double raw = rad2deg(std::atan2(d.y(), d.x()));
        if (profile.thetas.empty()) profile.thetas.push_back(raw);
        else profile.thetas.push_back(profile.thetas.back() + wrap180(raw - profile.thetas.back()));
    }
    profile.validate();
    return profile;
}

Curve from_tangent(const TangentProfile& profile) {
    profile.validate();
    std::vector<Point> nodes;
    nodes.reserve(profile.thetas.size() + 1);
    nodes.push_back(profile.base_point);
    for (double theta : profile.thetas) {
        const double r = deg2rad(theta);
        nodes.push_back(nodes.back() + profile.delta_l * Point(std::cos(r), std::sin(r)));
    }
    return Curve(std::move(nodes), profile.delta_l);
}

Eigen::MatrixXd tangent_point_set(const TangentProfile& profile) {
    profile.validate();
    Eigen::MatrixXd pts(static_cast<Eigen::Index>(profile.thetas.size()), 2);
    for (std::size_t i = 0; i < profile.thetas.size(); ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        pts(r, 0) = static_cast<double>(i) * profile.abscissa_scale;
        pts(r, 1) = profile.thetas[i];
    }
    return pts;
}

double curve_length(std::span<const Point> points) {
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < points.size(); ++i) total += (points[i + 1] - points[i]).norm();
    return total;
}

double segment_deviation(std::span<const Point> points, double delta_l) {
    if (!(delta_l > 0.0)) throw Error("segment_deviation needs a positive delta_l");
    if (points.size() < 2) throw Error("segment_deviation needs at least 2 points");
    double worst = 0.0;
    for (std::size_t i = 0; i + 1 < points.size(); ++i) {
        worst = std::max(worst, std::abs((points[i + 1] - points[i]).norm() - delta_l) / delta_l);
    }
    return worst;
}

void align_branch(TangentProfile& profile, double reference) {
    if (profile.thetas.empty()) return;
    const double shift = 360.0 * std::round((reference - profile.thetas.front()) / 360.0);
    if (shift == 0.0) return;
    for (double& t : profile.thetas) t += shift;
}

} // namespace tsreg
