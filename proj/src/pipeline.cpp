#include "tsreg/pipeline.hpp"

#include "tsreg/error.hpp"

#include <complex>
#include <limits>
#include <string>

namespace tsreg {

namespace {

using Complex = std::complex<double>;

Complex to_complex(const Point& p) { return {p.x(), p.y()}; }
Point to_point(const Complex& z) { return {z.real(), z.imag()}; }

// z -> a z + b taking `from_a` to `to_a` and `from_b` to `to_b`; a pure
// translation when the source pair is degenerate.
struct Similarity {
    Complex a{1.0, 0.0};
    Complex b{0.0, 0.0};

    static Similarity between(const Point& from_a, const Point& from_b, const Point& to_a, const Point& to_b) {
        Similarity s;
        const Complex src = to_complex(from_b) - to_complex(from_a);
        const Complex dst = to_complex(to_b) - to_complex(to_a);
        if (std::abs(src) > 1e-12 && std::abs(dst) > 1e-12) s.a = dst / src;
        s.b = to_complex(to_a) - s.a * to_complex(from_a);
        return s;
    }

    Point operator()(const Point& p) const { return to_point(a * to_complex(p) + b); }
};

struct GraspRun {
    std::size_t first = 0;  // keyframe indices, inclusive
    std::size_t last = 0;
    std::size_t node = 0;
};

std::vector<GraspRun> grasp_runs(const Trajectory& traj) {
    std::vector<GraspRun> runs;
    const auto& kf = traj.keyframes;
    for (std::size_t i = 0; i < kf.size(); ++i) {
        if (kf[i].status != GripperStatus::closed) continue;
        if (!kf[i].grasp_node) throw Error("keyframe " + std::to_string(i) + " is closed but has no grasp node");
        if (!runs.empty() && runs.back().last + 1 == i) {
            if (*kf[i].grasp_node != runs.back().node) {
                throw Error("keyframe " + std::to_string(i) + " changes grasp node while the gripper stays closed");
            }
            runs.back().last = i;
        } else {
            runs.push_back({i, i, *kf[i].grasp_node});
        }
    }
    return runs;
}

// Closed frames belong to their own run. An open frame naming a grasp node
// is an approach or release of the closest run holding that node, the
// following run winning ties; other open frames follow the preceding run.
std::size_t run_for_frame(const std::vector<GraspRun>& runs, const std::vector<Keyframe>& kf, std::size_t i) {
    std::size_t before = runs.size();
    std::size_t after = runs.size();
    for (std::size_t j = 0; j < runs.size(); ++j) {
        if (runs[j].first <= i && i <= runs[j].last) return j;
        if (kf[i].grasp_node && runs[j].node != *kf[i].grasp_node) continue;
        if (runs[j].last < i) before = j;
        if (runs[j].first > i && after == runs.size()) after = j;
    }
    if (before == runs.size() && after == runs.size()) {
        if (kf[i].grasp_node) throw Error("open keyframe " + std::to_string(i) + " names a node no grasp uses");
        return 0;
    }
    if (before == runs.size()) return after;
    if (after == runs.size()) return before;
    if (!kf[i].grasp_node) return before;
    return (runs[after].first - i <= i - runs[before].last) ? after : before;
}

cpd::PointSet to_matrix(const std::vector<Point>& pts) {
    cpd::PointSet m(static_cast<Eigen::Index>(pts.size()), 2);
    for (std::size_t i = 0; i < pts.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = pts[i].transpose();
    return m;
}

} // namespace

CorrespondenceMatrix correspondence(const cpd::RegistrationResult& reg) {
    CorrespondenceMatrix C = reg.P.transpose();
    for (Eigen::Index n = 0; n < C.rows(); ++n) {
        const double mass = C.row(n).sum();
        if (!(mass > 0.0)) {
            throw Error("test point " + std::to_string(n) + " has zero posterior mass over all training points");
        }
        C.row(n) /= mass;
    }
    return C;
}

WarpOutput warp_tangent_scene(const Curve& train_before, const Curve& train_after, const Curve& test_before,
                              const WarpConfig& config, std::optional<std::size_t> anchor) {
    if (train_before.size() != train_after.size()) {
        throw Error("training states differ in node count (" + std::to_string(train_before.size()) + " before, " +
                    std::to_string(train_after.size()) + " after)");
    }
    const TangentProfile reference = to_tangent(train_before, config.abscissa_scale);
    const TangentProfile demonstrated = to_tangent(train_after, config.abscissa_scale);
    TangentProfile observed = to_tangent(test_before, config.abscissa_scale);
    align_branch(observed, reference.thetas.front());

    cpd::RegistrationResult reg =
        cpd::register_points(tangent_point_set(observed), tangent_point_set(reference), config.registration);
    CorrespondenceMatrix C = correspondence(reg);

    const Eigen::Map<const Eigen::VectorXd> train_angles(demonstrated.thetas.data(),
                                                         static_cast<Eigen::Index>(demonstrated.thetas.size()));
    const Eigen::VectorXd target_angles = C * train_angles;

    TangentProfile target;
    target.thetas.assign(target_angles.data(), target_angles.data() + target_angles.size());
    target.base_point = test_before.node(0);
    target.delta_l = test_before.delta_l();
    target.abscissa_scale = config.abscissa_scale;
    Curve target_curve = from_tangent(target);
    if (anchor) {
        const std::size_t pinned = map_pinned_node(C, *anchor);
        target.base_point += test_before.node(pinned) - target_curve.node(pinned);
        target_curve = from_tangent(target);
    }

    std::vector<std::pair<std::size_t, std::size_t>> grasp_map;
    grasp_map.reserve(train_before.size());
    for (std::size_t m = 0; m < train_before.size(); ++m) grasp_map.emplace_back(m, map_training_node(C, m));

    return WarpOutput{std::move(target), std::move(target_curve), std::move(C), std::move(grasp_map),
                      std::move(reg)};
}

std::size_t map_grasp_node(const CorrespondenceMatrix& C, std::size_t column) {
    if (column >= static_cast<std::size_t>(C.cols())) {
        throw Error("training index " + std::to_string(column) + " out of range (" + std::to_string(C.cols()) +
                    " columns)");
    }
    const auto col = static_cast<Eigen::Index>(column);
    Eigen::Index best = 0;
    for (Eigen::Index n = 1; n < C.rows(); ++n) {
        if (C(n, col) > C(best, col)) best = n;
    }
    return static_cast<std::size_t>(best);
}

std::size_t map_training_node(const CorrespondenceMatrix& C, std::size_t node) {
    const auto segments = static_cast<std::size_t>(C.cols());
    if (node > segments) {
        throw Error("training node " + std::to_string(node) + " out of range (" + std::to_string(segments + 1) +
                    " nodes)");
    }
    if (node < segments) return map_grasp_node(C, node);
    return map_grasp_node(C, segments - 1) + 1;
}

std::size_t map_pinned_node(const CorrespondenceMatrix& C, std::size_t node) {
    const auto segments = static_cast<std::size_t>(C.cols());
    if (node == 0) return 0;
    if (node == segments) return static_cast<std::size_t>(C.rows());
    return map_training_node(C, node);
}

Point grasp_target_position(const WarpOutput& output, std::size_t training_node) {
    return output.target_curve.node(map_training_node(output.correspondence, training_node));
}

Trajectory warp_trajectory_cartesian(const cpd::RegistrationResult& reg, const Trajectory& traj) {
    Trajectory out = traj;
    for (auto& k : out.keyframes) {
        const Eigen::RowVectorXd moved = reg.apply(Eigen::RowVectorXd(k.position.transpose()));
        k.position = Point(moved(0), moved(1));
    }
    return out;
}

CartesianWarpOutput warp_cartesian_scene(const Curve& train_before, const Curve& train_after,
                                         const Curve& test_before, const Trajectory& train_traj,
                                         const cpd::RegistrationConfig& config) {
    if (train_before.size() != train_after.size()) {
        throw Error("training states differ in node count (" + std::to_string(train_before.size()) + " before, " +
                    std::to_string(train_after.size()) + " after)");
    }
    CartesianWarpOutput out;
    out.registration =
        cpd::register_points(to_matrix(test_before.nodes()), to_matrix(train_before.nodes()), config);

    const cpd::PointSet implied = out.registration.apply(to_matrix(train_after.nodes()));
    out.implied_target.reserve(static_cast<std::size_t>(implied.rows()));
    for (Eigen::Index i = 0; i < implied.rows(); ++i) out.implied_target.emplace_back(implied(i, 0), implied(i, 1));
    out.reference_delta_l = curve_length(test_before) / static_cast<double>(train_after.segments());

    out.trajectory = warp_trajectory_cartesian(out.registration, train_traj);
    for (auto& k : out.trajectory.keyframes) {
        if (!k.grasp_node) continue;
        std::size_t nearest = 0;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t n = 0; n < test_before.size(); ++n) {
            const double d = (test_before.node(n) - k.position).squaredNorm();
            if (d < best) {
                best = d;
                nearest = n;
            }
        }
        k.grasp_node = nearest;
    }
    return out;
}

Trajectory generate_step_trajectory(const WarpOutput& output, const Trajectory& train_traj, const Curve& test_before) {
    const auto& kf = train_traj.keyframes;
    if (kf.empty()) throw Error("training trajectory is empty");
    const std::vector<GraspRun> runs = grasp_runs(train_traj);
    if (runs.empty()) throw Error("training trajectory never closes the gripper");
    if (output.target_curve.size() != test_before.size()) {
        throw Error("target curve and test object differ in node count");
    }

    struct RunMap {
        std::size_t node;
        Point pick;
        Point place;
        Similarity carry;
    };
    std::vector<RunMap> maps;
    for (const GraspRun& run : runs) {
        const std::size_t n = map_training_node(output.correspondence, run.node);
        const Point pick = test_before.node(n);
        const Point place = output.target_curve.node(n);
        maps.push_back({n, pick, place,
                        Similarity::between(kf[run.first].position, kf[run.last].position, pick, place)});
    }

    Trajectory out;
    out.keyframes.reserve(kf.size());
    for (std::size_t i = 0; i < kf.size(); ++i) {
        const std::size_t r = run_for_frame(runs, kf, i);
        const GraspRun& run = runs[r];
        const RunMap& map = maps[r];

        Keyframe k = kf[i];
        if (i == run.first) k.position = map.pick;
        else if (i == run.last) k.position = map.place;
        else k.position = map.carry(kf[i].position);
        if (k.grasp_node || k.status == GripperStatus::closed) k.grasp_node = map.node;
        out.keyframes.push_back(k);
    }
    return out;
}

} // namespace tsreg
