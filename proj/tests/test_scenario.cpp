#include "support.hpp"

#include "tsreg/error.hpp"
#include "tsreg/scenario.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace tsreg;
using doctest::Approx;

namespace {

Curve line(std::size_t nodes, double delta_l) {
    std::vector<Point> pts;
    for (std::size_t i = 0; i < nodes; ++i) pts.emplace_back(delta_l * static_cast<double>(i), 0.0);
    return Curve(pts, delta_l);
}

double turning(const Curve& c) {
    const TangentProfile p = to_tangent(c);
    return p.thetas.back() - p.thetas.front();
}

} // namespace

TEST_CASE("replay_rope") {
    const Curve rope = line(11, 0.1);
    SUBCASE("empty or zero-length path leaves the state alone") {
        CHECK(replay_rope(rope, 10, {}) == rope);
        const std::vector<Point> stay{rope.node(10), rope.node(10)};
        CHECK(replay_rope(rope, 10, stay) == rope);
    }
    SUBCASE("pulling along the axis translates the rope") {
        const std::vector<Point> path{Point(1.3, 0.0)};
        const Curve out = replay_rope(rope, 10, path);
        for (std::size_t i = 0; i < out.size(); ++i) CHECK((out.node(i) - (rope.node(i) + Point(0.3, 0))).norm() < 1e-12);
    }
    SUBCASE("any replay keeps every segment at delta_l") {
        std::mt19937 rng(1);
        std::uniform_real_distribution<double> u(-0.5, 0.5);
        for (int t = 0; t < 20; ++t) {
            std::vector<Point> path;
            Point p = rope.node(static_cast<std::size_t>(t) % 11);
            for (int k = 0; k < 5; ++k) path.push_back(p += Point(u(rng), u(rng)));
            const Curve out = replay_rope(rope, static_cast<std::size_t>(t) % 11, path);
            CHECK(segment_deviation(out.nodes(), 0.1) < 1e-9);
        }
    }
    SUBCASE("an anchored node stays put") {
        const Curve slack = replay_rope(rope, 10, std::vector<Point>{Point(0.6, 0.3)}, 0);
        CHECK(slack.node(0) == rope.node(0));
        CHECK((slack.node(10) - Point(0.6, 0.3)).norm() < 1e-9);
        CHECK(segment_deviation(slack.nodes(), 0.1) < 1e-9);
    }
    SUBCASE("nodes beyond the anchor do not move") {
        const Curve out = replay_rope(rope, 8, std::vector<Point>{Point(0.7, 0.2)}, 4);
        for (std::size_t i = 0; i <= 4; ++i) CHECK(out.node(i) == rope.node(i));
        CHECK(segment_deviation(out.nodes(), 0.1) < 1e-9);
    }
    SUBCASE("a target out of reach of the anchor is an error") {
        CHECK_THROWS_WITH_AS(replay_rope(rope, 10, std::vector<Point>{Point(1.5, 0.0)}, 0),
                             doctest::Contains("can reach only"), Error);
    }
    SUBCASE("bad indices") {
        CHECK_THROWS_AS(replay_rope(rope, 11, {}), Error);
        CHECK_THROWS_AS(replay_rope(rope, 3, {}, 3), Error);
    }
}

TEST_CASE("validate_physical") {
    SUBCASE("valid curves raise no flags") {
        const Curve c = line(6, 0.2);
        const std::vector<std::vector<Point>> states{c.nodes(), c.nodes()};
        const ValidationReport r = validate_physical(states, 0.2);
        CHECK(r.states.size() == 2);
        CHECK(r.max_segment_deviation < 1e-9);
        CHECK_FALSE(r.over_stretch);
        CHECK_FALSE(r.over_compression);
    }
    SUBCASE("one stretched segment") {
        const std::vector<std::vector<Point>> states{{Point(0, 0), Point(1, 0), Point(2.1, 0), Point(3.1, 0)}};
        const ValidationReport r = validate_physical(states, 1.0);
        CHECK(r.max_segment_deviation == Approx(0.10));
        CHECK(r.states[0].max_stretch == Approx(0.10));
        CHECK(r.states[0].length_error == Approx(0.1 / 3.0));
        CHECK(r.over_stretch);
        CHECK_FALSE(r.over_compression);
    }
    SUBCASE("compression and extents") {
        const std::vector<std::vector<Point>> states{{Point(0, 0), Point(0.8, 0), Point(0.8, 1)}};
        const ValidationReport r = validate_physical(states, 1.0, 0.1);
        CHECK(r.states[0].max_compression == Approx(0.2));
        CHECK(r.states[0].x_extent == Approx(0.8));
        CHECK(r.states[0].y_extent == Approx(1.0));
        CHECK(r.over_compression);
        CHECK(r.threshold == 0.1);
    }
    CHECK_THROWS_AS(validate_physical(std::vector<std::vector<Point>>{{Point(0, 0)}}, 1.0), Error);
}

TEST_CASE("fixtures") {
    SUBCASE("names and errors") {
        for (const std::string& n : fixture_names()) CHECK_NOTHROW(make_fixture(n));
        CHECK_THROWS_WITH_AS(make_fixture("nope"), doctest::Contains("knot_4step"), Error);
    }
    SUBCASE("straighten ends exactly straight") {
        const Fixture f = make_fixture("straighten");
        const TangentProfile p = to_tangent(f.demo.steps.front().after);
        for (double t : p.thetas) CHECK(t == Approx(p.thetas.front()).epsilon(1e-9));
    }
    SUBCASE("cloth edge is 46 cm before and after") {
        const Fixture f = make_fixture("cloth_unfold");
        CHECK(curve_length(f.demo.steps.front().before) == Approx(0.46).epsilon(1e-12));
        CHECK(curve_length(f.demo.steps.front().after) == Approx(0.46).epsilon(1e-12));
        CHECK(curve_length(f.test) == Approx(0.35).epsilon(1e-12));
        CHECK(curve_length(make_fixture("cloth_unfold_wide").test) == Approx(0.58).epsilon(1e-12));
    }
    SUBCASE("knot states are continuous and loop past a full turn") {
        const Fixture f = make_fixture("knot_4step");
        REQUIRE(f.demo.steps.size() == 4);
        CHECK_NOTHROW(f.demo.validate());
        double most = 0.0;
        for (const StepDemo& s : f.demo.steps) most = std::max(most, std::abs(turning(s.after)));
        CHECK(most > 360.0);
    }
    SUBCASE("fixtures are pure") {
        for (const std::string& n : fixture_names()) {
            const Fixture a = make_fixture(n), b = make_fixture(n);
            CHECK(a.test == b.test);
            for (std::size_t k = 0; k < a.demo.steps.size(); ++k) {
                CHECK(a.demo.steps[k].after == b.demo.steps[k].after);
                CHECK(a.demo.steps[k].trajectory == b.demo.steps[k].trajectory);
            }
        }
    }
}

TEST_CASE("TaskDemo validation") {
    TaskDemo demo = make_fixture("knot_4step").demo;
    CHECK_NOTHROW(demo.validate());
    TaskDemo broken = demo;
    std::vector<Point> shifted = broken.steps[1].before.nodes();
    for (Point& p : shifted) p += Point(0.01, 0.0);
    broken.steps[1].before = Curve(shifted, broken.steps[1].before.delta_l());
    CHECK_THROWS_WITH_AS(broken.validate(), doctest::Contains("step 0"), Error);
    TaskDemo empty_traj = demo;
    empty_traj.steps[2].trajectory.keyframes.clear();
    CHECK_THROWS_AS(empty_traj.validate(), Error);
    CHECK_THROWS_AS(TaskDemo{}.validate(), Error);
}

TEST_CASE("run_task") {
    SUBCASE("knot self-transfer reproduces the demonstration and conserves length") {
        const Fixture f = make_fixture("knot_4step");
        const std::vector<StepOutcome> out = run_task(f.demo, f.test);
        REQUIRE(out.size() == 4);
        for (const StepOutcome& s : out) {
            const double nominal = s.predicted.delta_l() * static_cast<double>(s.predicted.segments());
            CHECK(std::abs(curve_length(s.predicted) - nominal) / nominal < 1e-9);
        }
        const Curve& expected = f.demo.steps.back().after;
        CHECK(testsupport::max_node_error(out.back().predicted, expected) < 0.02 * curve_length(expected));
    }
    SUBCASE("straightening ends straight") {
        const Fixture f = make_fixture("straighten");
        const std::vector<StepOutcome> out = run_task(f.demo, f.test);
        CHECK(segment_deviation(out.back().predicted.nodes(), f.test.delta_l()) < 1e-9);
        const TangentProfile p = to_tangent(out.back().predicted);
        for (double t : p.thetas) CHECK(t == Approx(p.thetas.front()).epsilon(1e-6));
    }
    SUBCASE("step failures carry the step index") {
        Fixture f = make_fixture("straighten");
        for (Keyframe& k : f.demo.steps.front().trajectory.keyframes) k.grasp_node.reset();
        CHECK_THROWS_WITH_AS(run_task(f.demo, f.test), doctest::Contains("step 0"), Error);
    }
}
