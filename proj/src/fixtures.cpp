#include "tsreg/error.hpp"
#include "tsreg/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace tsreg {

namespace {

Curve from_angles(const Point& base, double delta_l, const std::vector<double>& thetas) {
    TangentProfile p;
    p.thetas = thetas;
    p.base_point = base;
    p.delta_l = delta_l;
    return from_tangent(p);
}

// Constant-curvature arc turning by `turn` degrees, starting along +x.
Curve arc(std::size_t nodes, double delta_l, double turn) {
    std::vector<double> thetas(nodes - 1);
    for (std::size_t i = 0; i < thetas.size(); ++i) thetas[i] = turn * static_cast<double>(i) / static_cast<double>(thetas.size() - 1);
    return from_angles(Point::Zero(), delta_l, thetas);
}

// Straight run, a fold of `fold` degrees spread over a few segments, then
// straight again.
Curve folded_edge(std::size_t nodes, double length, double fold, double fold_at) {
    const std::size_t segs = nodes - 1;
    const double span = 4.0;
    const double centre = fold_at * static_cast<double>(segs);
    std::vector<double> thetas(segs);
    for (std::size_t i = 0; i < segs; ++i) {
        const double t = (static_cast<double>(i) - centre) / span;
        thetas[i] = fold * 0.5 * (1.0 + std::tanh(2.0 * t));
    }
    return from_angles(Point::Zero(), length / static_cast<double>(segs), thetas);
}

Keyframe frame(const Point& p, GripperStatus s, std::optional<std::size_t> node) { return {p, s, node}; }

// Approach, grasp, carry through `waypoints`, release.
Trajectory pick_and_place(const Curve& state, std::size_t node, const std::vector<Point>& waypoints) {
    Trajectory t;
    const Point start = state.node(node);
    t.keyframes.push_back(frame(start, GripperStatus::open, node));
    t.keyframes.push_back(frame(start, GripperStatus::closed, node));
    for (const Point& w : waypoints) t.keyframes.push_back(frame(w, GripperStatus::closed, node));
    t.keyframes.push_back(frame(waypoints.back(), GripperStatus::open, node));
    return t;
}

StepDemo demonstrate(const Curve& before, Trajectory traj, std::optional<std::size_t> anchor) {
    Curve after = replay_trajectory(before, traj, anchor);
    // place and release frames sit exactly where the grasped node ended up
    auto& kf = traj.keyframes;
    for (std::size_t i = kf.size(); i-- > 0;) {
        kf[i].position = after.node(*kf[i].grasp_node);
        if (kf[i].status == GripperStatus::closed) break;
    }
    return {before, std::move(after), std::move(traj), anchor};
}

// Pull the free end of an anchored edge out to full extension along +x.
StepDemo extend_to_straight(const Curve& before) {
    const std::size_t end = before.size() - 1;
    const Point goal(static_cast<double>(end) * before.delta_l(), 0.0);
    const Point mid = 0.5 * (before.node(end) + goal);
    return demonstrate(before, pick_and_place(before, end, {mid, goal}), 0);
}

Fixture straighten() {
    Fixture f{"straighten", {}, arc(26, 0.022, 200.0)};
    f.demo.steps.push_back(extend_to_straight(arc(30, 0.02, 90.0)));
    return f;
}

Fixture cloth(const std::string& name, double test_length, double test_fold_at) {
    Fixture f{name, {}, folded_edge(24, test_length, 120.0, test_fold_at)};
    f.demo.steps.push_back(extend_to_straight(folded_edge(24, 0.46, 120.0, 0.5)));
    return f;
}

Fixture knot() {
    const std::size_t nodes = 40;
    const double dl = 0.02;
    std::vector<double> thetas(nodes - 1);
    for (std::size_t i = 0; i < thetas.size(); ++i) thetas[i] = 30.0 * std::sin(static_cast<double>(i) / 6.0);
    Curve s0 = from_angles(Point::Zero(), dl, thetas);

    Fixture f{"knot_4step", {}, s0};
    const std::size_t end = nodes - 1;
    const Point e = s0.node(end);

    // 1: carry the free end up and back over the rope (first half-turn)
    f.demo.steps.push_back(demonstrate(
        s0, pick_and_place(s0, end, {e + Point(-0.06, 0.075), e + Point(0.0, 0.15), e + Point(-0.15, 0.15), e + Point(-0.30, 0.15)}),
        0));

    // 2: bring it down across the rope and out to the right, closing the loop
    const Curve s1 = f.demo.steps.back().after;
    const Point e1 = s1.node(end);
    f.demo.steps.push_back(demonstrate(
        s1, pick_and_place(s1, end, {e1 + Point(-0.06, -0.10), e1 + Point(-0.04, -0.20), e1 + Point(0.02, -0.25), e1 + Point(0.12, -0.20)}),
        0));

    // 3: feed the end back up through the loop
    const Curve s2 = f.demo.steps.back().after;
    const Point e2 = s2.node(end);
    f.demo.steps.push_back(demonstrate(
        s2, pick_and_place(s2, end, {e2 + Point(0.01, 0.05), e2 + Point(-0.02, 0.10), e2 + Point(-0.06, 0.12)}), 0));

    // 4: hold the threaded end and pull the standing end to tighten
    const Curve s3 = f.demo.steps.back().after;
    const Point b3 = s3.node(0);
    f.demo.steps.push_back(
        demonstrate(s3, pick_and_place(s3, 0, {b3 + Point(-0.015, -0.003), b3 + Point(-0.03, -0.006)}), end));
    return f;
}

} // namespace

std::vector<std::string> fixture_names() {
    return {"straighten", "cloth_unfold", "cloth_unfold_same", "cloth_unfold_wide", "knot_4step"};
}

Fixture make_fixture(std::string_view name) {
    if (name == "straighten") return straighten();
    if (name == "cloth_unfold") return cloth("cloth_unfold", 0.35, 0.3);
    if (name == "cloth_unfold_same") return cloth("cloth_unfold_same", 0.46, 0.4);
    if (name == "cloth_unfold_wide") return cloth("cloth_unfold_wide", 0.58, 0.7);
    if (name == "knot_4step") return knot();
    std::string known;
    for (const auto& n : fixture_names()) known += (known.empty() ? "" : ", ") + n;
    throw Error("unknown fixture '" + std::string(name) + "'; available: " + known);
}

} // namespace tsreg
