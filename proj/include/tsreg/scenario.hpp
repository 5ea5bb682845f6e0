#pragma once

#include "tsreg/geometry.hpp"
#include "tsreg/pipeline.hpp"

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tsreg {

/// One demonstrated manipulation. `anchor_node`, when set, is a node held
/// in place for the whole step (an end fixed on the table or held by the
/// other gripper).
struct StepDemo {
    Curve before;
    Curve after;
    Trajectory trajectory;
    std::optional<std::size_t> anchor_node;
};

/// A multi-step demonstration. Step k's final state is step k+1's
/// initial state.
struct TaskDemo {
    std::vector<StepDemo> steps;

    /// Checks node counts, non-empty trajectories and state continuity.
    void validate() const;
};

inline constexpr double kContinuityTolerance = 1e-6;
inline constexpr double kDefaultStretchThreshold = 0.05;

struct StateCheck {
    double length_error = 0.0;     // (length - segments * delta_l) / (segments * delta_l)
    double max_stretch = 0.0;      // max (d - delta_l) / delta_l, clamped at 0
    double max_compression = 0.0;  // max (delta_l - d) / delta_l, clamped at 0
    double x_extent = 0.0;
    double y_extent = 0.0;

    bool operator==(const StateCheck&) const = default;
};

struct ValidationReport {
    std::vector<StateCheck> states;
    double max_segment_deviation = 0.0;
    double threshold = kDefaultStretchThreshold;
    bool over_stretch = false;
    bool over_compression = false;
    /// Test grasp node of every closed-gripper run, in execution order.
    std::vector<std::size_t> grasp_nodes;

    bool operator==(const ValidationReport&) const = default;
};

struct StepOutcome {
    WarpOutput warp;
    Trajectory trajectory;
    Curve predicted;
};

struct Fixture {
    std::string name;
    TaskDemo demo;
    Curve test;
};

/// Drags `grasp_node` along `gripper_path` (starting from where the node
/// is now) and lets the rest of the rope follow: each neighbour is pulled
/// back to delta_l from the neighbour nearer the grasp. With an anchor,
/// the stretch between anchor and grasp is solved with both ends fixed and
/// the nodes past the anchor stay put.
Curve replay_rope(const Curve& state, std::size_t grasp_node, std::span<const Point> gripper_path,
                  std::optional<std::size_t> anchor = std::nullopt);

/// Replays every closed-gripper run of a trajectory in order.
Curve replay_trajectory(const Curve& state, const Trajectory& traj, std::optional<std::size_t> anchor = std::nullopt);

/// Transfers every step onto the test object, feeding each predicted state
/// into the next step.
std::vector<StepOutcome> run_task(const TaskDemo& demo, const Curve& test_initial, const WarpConfig& config = {});

ValidationReport validate_physical(std::span<const std::vector<Point>> states, double delta_l,
                                   double threshold = kDefaultStretchThreshold);

std::vector<std::string> fixture_names();
Fixture make_fixture(std::string_view name);

} // namespace tsreg
