#include "tsreg/scenario.hpp"

#include "tsreg/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace tsreg {

namespace {

// Pulls `node` back to delta_l from `leader`; a collapsed pair keeps the
// direction it had before the update.
void follow(Point& node, const Point& leader, const Point& old_direction, double delta_l) {
    Point v = node - leader;
    double n = v.norm();
    if (n == 0.0) {
        v = old_direction;
        n = v.norm();
    }
    node = leader + (delta_l / n) * v;
}

void drag_tail(std::vector<Point>& nodes, const std::vector<Point>& old, std::size_t from, bool upward,
               double delta_l) {
    if (upward) {
        for (std::size_t j = from + 1; j < nodes.size(); ++j) follow(nodes[j], nodes[j - 1], old[j] - old[j - 1], delta_l);
    } else {
        for (std::size_t j = from; j-- > 0;) follow(nodes[j], nodes[j + 1], old[j] - old[j + 1], delta_l);
    }
}

// Walks the chain between `from` and `to` (inclusive), re-projecting each
// node behind its predecessor.
void pull_chain(std::vector<Point>& nodes, std::size_t from, std::size_t to, double delta_l) {
    const std::vector<Point> old = nodes;
    if (from < to) {
        for (std::size_t j = from + 1; j <= to; ++j) follow(nodes[j], nodes[j - 1], old[j] - old[j - 1], delta_l);
    } else {
        for (std::size_t j = from; j-- > to;) follow(nodes[j], nodes[j + 1], old[j] - old[j + 1], delta_l);
    }
}

void move_grasp(std::vector<Point>& nodes, std::size_t grasp, const Point& target, std::optional<std::size_t> anchor,
                double delta_l) {
    const std::vector<Point> old = nodes;
    const std::size_t last = nodes.size() - 1;

    if (!anchor) {
        nodes[grasp] = target;
        drag_tail(nodes, old, grasp, true, delta_l);
        drag_tail(nodes, old, grasp, false, delta_l);
        return;
    }

    const std::size_t a = *anchor;
    const Point pin = old[a];
    const double links = static_cast<double>(grasp > a ? grasp - a : a - grasp);
    const double reach = links * delta_l;
    const double dist = (target - pin).norm();
    if (dist > reach * (1.0 + 1e-9)) {
        throw Error("gripper target is " + std::to_string(dist) + " m from anchored node " + std::to_string(a) +
                    " but node " + std::to_string(grasp) + " can reach only " + std::to_string(reach) + " m");
    }

    const int step = grasp > a ? 1 : -1;
    if (dist >= reach * (1.0 - 1e-12)) {
        const Point u = (target - pin) / dist;
        for (std::size_t k = 1; k <= static_cast<std::size_t>(links); ++k) {
            nodes[static_cast<std::size_t>(static_cast<long>(a) + step * static_cast<long>(k))] =
                pin + (static_cast<double>(k) * delta_l) * u;
        }
    } else {
        // both ends fixed: alternate pulls from the gripper and from the anchor
        const double tol = 1e-12 * std::max(reach, 1.0);
        for (int it = 0; it < 500; ++it) {
            nodes[grasp] = target;
            pull_chain(nodes, grasp, a, delta_l);
            nodes[a] = pin;
            pull_chain(nodes, a, grasp, delta_l);
            if ((nodes[grasp] - target).norm() < tol) break;
        }
    }
    const bool upward = grasp > a;
    if (upward ? grasp < last : grasp > 0) drag_tail(nodes, old, grasp, upward, delta_l);
}

double extent(const std::vector<Point>& pts, int axis) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const Point& p : pts) {
        lo = std::min(lo, p(axis));
        hi = std::max(hi, p(axis));
    }
    return hi - lo;
}

} // namespace

void TaskDemo::validate() const {
    if (steps.empty()) throw Error("task has no steps");
    for (std::size_t k = 0; k < steps.size(); ++k) {
        const StepDemo& s = steps[k];
        const std::string where = "step " + std::to_string(k);
        if (s.before.size() != s.after.size()) throw Error(where + ": before/after node counts differ");
        if (s.trajectory.keyframes.empty()) throw Error(where + ": trajectory is empty");
        if (s.anchor_node && *s.anchor_node >= s.before.size()) throw Error(where + ": anchor node out of range");
        for (const Keyframe& f : s.trajectory.keyframes) {
            if (f.grasp_node && *f.grasp_node >= s.before.size()) throw Error(where + ": grasp node out of range");
        }
        if (k + 1 < steps.size()) {
            const Curve& next = steps[k + 1].before;
            if (next.size() != s.after.size()) throw Error(where + ": next step starts with a different node count");
            for (std::size_t i = 0; i < next.size(); ++i) {
                if ((next.node(i) - s.after.node(i)).norm() > kContinuityTolerance) {
                    throw Error(where + ": final state differs from step " + std::to_string(k + 1) +
                                " initial state at node " + std::to_string(i));
                }
            }
        }
    }
}

Curve replay_rope(const Curve& state, std::size_t grasp_node, std::span<const Point> gripper_path,
                  std::optional<std::size_t> anchor) {
    if (grasp_node >= state.size()) throw Error("grasp node " + std::to_string(grasp_node) + " out of range");
    if (anchor && *anchor >= state.size()) throw Error("anchor node " + std::to_string(*anchor) + " out of range");
    if (anchor && *anchor == grasp_node) throw Error("cannot move the anchored node " + std::to_string(grasp_node));

    const double dl = state.delta_l();
    std::vector<Point> nodes = state.nodes();
    Point cur = nodes[grasp_node];
    for (const Point& p : gripper_path) {
        if (!p.allFinite()) throw Error("gripper path contains a non-finite point");
        const Point leg = p - cur;
        const double len = leg.norm();
        if (len == 0.0) continue;
        const auto substeps = static_cast<int>(std::ceil(len / (0.25 * dl)));
        for (int s = 1; s <= substeps; ++s) {
            const Point target = (s == substeps) ? p : Point(cur + leg * (static_cast<double>(s) / substeps));
            move_grasp(nodes, grasp_node, target, anchor, dl);
        }
        cur = p;
    }
    return Curve(std::move(nodes), dl);
}

Curve replay_trajectory(const Curve& state, const Trajectory& traj, std::optional<std::size_t> anchor) {
    Curve current = state;
    const auto& kf = traj.keyframes;
    std::size_t i = 0;
    while (i < kf.size()) {
        if (kf[i].status != GripperStatus::closed) {
            ++i;
            continue;
        }
        if (!kf[i].grasp_node) throw Error("keyframe " + std::to_string(i) + " is closed but has no grasp node");
        const std::size_t node = *kf[i].grasp_node;
        std::vector<Point> path;
        while (i < kf.size() && kf[i].status == GripperStatus::closed) {
            if (kf[i].grasp_node != node) break;
            path.push_back(kf[i].position);
            ++i;
        }
        current = replay_rope(current, node, path, anchor);
    }
    return current;
}

std::vector<StepOutcome> run_task(const TaskDemo& demo, const Curve& test_initial, const WarpConfig& config) {
    demo.validate();
    std::vector<StepOutcome> outcomes;
    outcomes.reserve(demo.steps.size());
    Curve current = test_initial;
    for (std::size_t k = 0; k < demo.steps.size(); ++k) {
        const StepDemo& step = demo.steps[k];
        try {
            WarpOutput warp = warp_tangent_scene(step.before, step.after, current, config, step.anchor_node);
            Trajectory traj = generate_step_trajectory(warp, step.trajectory, current);
            std::optional<std::size_t> anchor;
            if (step.anchor_node) anchor = map_pinned_node(warp.correspondence, *step.anchor_node);
            Curve predicted = replay_trajectory(current, traj, anchor);
            current = predicted;
            outcomes.push_back({std::move(warp), std::move(traj), std::move(predicted)});
        } catch (const Error& e) {
            throw Error("step " + std::to_string(k) + ": " + e.what());
        }
    }
    return outcomes;
}

ValidationReport validate_physical(std::span<const std::vector<Point>> states, double delta_l, double threshold) {
    if (!(delta_l > 0.0)) throw Error("validate_physical needs a positive delta_l");
    ValidationReport report;
    report.threshold = threshold;
    for (const auto& pts : states) {
        if (pts.size() < 2) throw Error("validate_physical: every state needs at least 2 points");
        StateCheck c;
        const double nominal = delta_l * static_cast<double>(pts.size() - 1);
        c.length_error = (curve_length(pts) - nominal) / nominal;
        for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
            const double rel = ((pts[i + 1] - pts[i]).norm() - delta_l) / delta_l;
            c.max_stretch = std::max(c.max_stretch, rel);
            c.max_compression = std::max(c.max_compression, -rel);
        }
        c.x_extent = extent(pts, 0);
        c.y_extent = extent(pts, 1);
        report.max_segment_deviation = std::max({report.max_segment_deviation, c.max_stretch, c.max_compression});
        report.over_stretch = report.over_stretch || c.max_stretch > threshold;
        report.over_compression = report.over_compression || c.max_compression > threshold;
        report.states.push_back(c);
    }
    return report;
}

} // namespace tsreg
