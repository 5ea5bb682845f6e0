#pragma once

#include "tsreg/geometry.hpp"

#include <cmath>
#include <random>
#include <vector>

namespace testsupport {

/// A random smooth curve: angles are a sum of a few low-frequency sines,
/// integrated from a random base point. `max_turning` bounds the amplitude
/// so the total turning can exceed a full revolution when asked for.
inline tsreg::Curve random_curve(std::mt19937& rng, std::size_t nodes, double max_turning_deg = 120.0) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double delta_l = 0.005 + 0.03 * unit(rng);
    const double start = 360.0 * unit(rng) - 180.0;
    const double drift = (2.0 * unit(rng) - 1.0) * max_turning_deg;
    double a[3], f[3], ph[3];
    for (int k = 0; k < 3; ++k) {
        a[k] = 40.0 * unit(rng);
        f[k] = 0.5 + 2.5 * unit(rng);
        ph[k] = 6.283185307179586 * unit(rng);
    }
    tsreg::TangentProfile p;
    p.delta_l = delta_l;
    p.base_point = tsreg::Point(2.0 * unit(rng) - 1.0, 2.0 * unit(rng) - 1.0);
    const std::size_t segs = nodes - 1;
    for (std::size_t i = 0; i < segs; ++i) {
        const double s = static_cast<double>(i) / static_cast<double>(segs);
        double theta = start + drift * s;
        for (int k = 0; k < 3; ++k) theta += a[k] * std::sin(6.283185307179586 * f[k] * s + ph[k]);
        p.thetas.push_back(theta);
    }
    return tsreg::from_tangent(p);
}

/// A curve whose total turning exceeds `turns` full revolutions (a planar spiral).
inline tsreg::Curve spiral(std::size_t nodes, double turns, double delta_l = 0.01) {
    tsreg::TangentProfile p;
    p.delta_l = delta_l;
    for (std::size_t i = 0; i + 1 < nodes; ++i) {
        p.thetas.push_back(360.0 * turns * static_cast<double>(i) / static_cast<double>(nodes - 2));
    }
    return tsreg::from_tangent(p);
}

inline Eigen::MatrixXd random_points(std::mt19937& rng, Eigen::Index rows, double spread = 1.0) {
    std::uniform_real_distribution<double> u(-spread, spread);
    Eigen::MatrixXd m(rows, 2);
    for (Eigen::Index i = 0; i < rows; ++i) m.row(i) << u(rng), u(rng);
    return m;
}

inline Eigen::MatrixXd to_matrix(const std::vector<tsreg::Point>& pts) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(pts.size()), 2);
    for (std::size_t i = 0; i < pts.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = pts[i].transpose();
    return m;
}

inline double max_node_error(const tsreg::Curve& a, const tsreg::Curve& b) {
    double e = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) e = std::max(e, (a.node(i) - b.node(i)).norm());
    return e;
}

} // namespace testsupport
