#pragma once

#include "tsreg/cpd.hpp"
#include "tsreg/geometry.hpp"

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

namespace tsreg {

enum class GripperStatus { open, closed };

struct Keyframe {
    Point position = Point::Zero();
    GripperStatus status = GripperStatus::open;
    std::optional<std::size_t> grasp_node;

    bool operator==(const Keyframe&) const = default;
};

/// End-effector keyframes of one gripper.
struct Trajectory {
    std::vector<Keyframe> keyframes;

    bool operator==(const Trajectory&) const = default;
};

/// N x M row-stochastic weights: row n holds test point n's weights over
/// training points. Indices are tangent-space points, i.e. segments.
using CorrespondenceMatrix = Eigen::MatrixXd;

struct WarpConfig {
    cpd::RegistrationConfig registration;
    double abscissa_scale = 10.0;
};

struct WarpOutput {
    TangentProfile target_profile;
    Curve target_curve;
    CorrespondenceMatrix correspondence;
    /// (training node, test node) for every training node.
    std::vector<std::pair<std::size_t, std::size_t>> grasp_map;
    cpd::RegistrationResult registration;
};

struct CartesianWarpOutput {
    cpd::RegistrationResult registration;
    /// Training final state pushed through the registration transform.
    std::vector<Point> implied_target;
    /// Segment length the implied target would need to match the test object.
    double reference_delta_l = 0.0;
    Trajectory trajectory;
};

/// Transposes the posterior and renormalizes each test row over the
/// training points, dropping outlier mass.
CorrespondenceMatrix correspondence(const cpd::RegistrationResult& reg);

/// Tangent-space transfer of the demonstrated final shape onto the test object.
///
/// The target keeps the test object's segment length and starts at its
/// first node. When `anchor` names a training node held still during the
/// step, the target is instead translated so the matching test node stays
/// where it is.
WarpOutput warp_tangent_scene(const Curve& train_before, const Curve& train_after, const Curve& test_before,
                              const WarpConfig& config = {}, std::optional<std::size_t> anchor = std::nullopt);

/// argmax over test rows of column `column`; ties go to the smaller row.
std::size_t map_grasp_node(const CorrespondenceMatrix& C, std::size_t column);

/// Maps a training node index to a test node index. Node i leads segment i;
/// the final node trails the last segment and maps to the node after the
/// matched test segment.
std::size_t map_training_node(const CorrespondenceMatrix& C, std::size_t node);

/// Like map_training_node, but the two end nodes always map to the test
/// object's end nodes.
std::size_t map_pinned_node(const CorrespondenceMatrix& C, std::size_t node);

Point grasp_target_position(const WarpOutput& output, std::size_t training_node);

/// Pushes every keyframe position through the registration transform.
/// Statuses and grasp-node annotations are kept as they are.
Trajectory warp_trajectory_cartesian(const cpd::RegistrationResult& reg, const Trajectory& traj);

/// Cartesian-space baseline: registers training nodes onto test nodes and
/// warps both the demonstrated final state and the trajectory with the
/// same transform. Grasp annotations are re-pointed at the test node
/// nearest each warped keyframe.
CartesianWarpOutput warp_cartesian_scene(const Curve& train_before, const Curve& train_after,
                                         const Curve& test_before, const Trajectory& train_traj,
                                         const cpd::RegistrationConfig& config = {});

/// Builds the test trajectory for one demonstrated step.
///
/// Each run of closed keyframes is one grasp. Its first frame lands on the
/// mapped node of `test_before` and its last frame on the same node of the
/// target curve. Frames in between follow the demonstrated path under the
/// similarity taking the demonstrated pick/place pair onto the test pair.
/// Open frames reuse the mapping of the nearest grasp, preferring the one
/// before them.
Trajectory generate_step_trajectory(const WarpOutput& output, const Trajectory& train_traj, const Curve& test_before);

} // namespace tsreg
