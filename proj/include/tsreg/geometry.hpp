#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <span>
#include <vector>

namespace tsreg {

using Point = Eigen::Vector2d;

/// Relative tolerance on adjacent-node spacing accepted by Curve.
inline constexpr double kUniformTolerance = 1e-9;

/// Ordered planar nodes with uniform spacing between neighbours.
///
/// Every adjacent pair is `delta_l()` apart within kUniformTolerance
/// (relative). Construction validates this and throws tsreg::Error
/// otherwise; non-uniform input should go through resample_uniform().
class Curve {
public:
    Curve(std::vector<Point> nodes, double delta_l);

    /// Infers delta_l as the mean spacing, then validates uniformity.
    static Curve from_nodes(std::vector<Point> nodes);

    const std::vector<Point>& nodes() const { return nodes_; }
    const Point& node(std::size_t i) const { return nodes_.at(i); }
    std::size_t size() const { return nodes_.size(); }
    std::size_t segments() const { return nodes_.size() - 1; }
    double delta_l() const { return delta_l_; }

    bool operator==(const Curve&) const = default;

private:
    std::vector<Point> nodes_;
    double delta_l_;
};

/// Tangent-space form of a curve: one direction angle per segment.
///
/// `thetas` are in degrees and unwrapped, so consecutive entries differ by
/// less than 180 and the sequence may leave (-180, 180]. Node 0 sits at
/// `base_point`. `abscissa_scale` is the spacing used when the profile is
/// embedded as a planar point set for registration.
struct TangentProfile {
    std::vector<double> thetas;
    Point base_point = Point::Zero();
    double delta_l = 1.0;
    double abscissa_scale = 10.0;

    void validate() const;
};

Curve resample_uniform(std::span<const Point> polyline, std::size_t node_count);

TangentProfile to_tangent(const Curve& curve, double abscissa_scale = 10.0);

Curve from_tangent(const TangentProfile& profile);

/// Embeds a profile as points (i * abscissa_scale, theta_i), one row each.
Eigen::MatrixXd tangent_point_set(const TangentProfile& profile);

/// Sum of adjacent-node distances. Works on raw polylines too.
double curve_length(std::span<const Point> points);
inline double curve_length(const Curve& curve) { return curve_length(curve.nodes()); }

/// max_i |dist(p_i, p_{i+1}) - delta_l| / delta_l
double segment_deviation(std::span<const Point> points, double delta_l);

/// Shifts every angle by a multiple of 360 so thetas.front() lies within
/// 180 degrees of `reference`. The described curve is unchanged.
void align_branch(TangentProfile& profile, double reference);

double deg2rad(double degrees);
double rad2deg(double radians);

} // namespace tsreg
