#pragma once

#include "tsreg/cpd.hpp"
#include "tsreg/geometry.hpp"
#include "tsreg/pipeline.hpp"
#include "tsreg/scenario.hpp"

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace tsreg::io {

inline constexpr int kFormatVersion = 1;

/// Scene roles accepted in the optional "role" field.
inline constexpr std::string_view kSceneRoles[] = {"train_before", "train_after", "test_before"};

// ---------------------------------------------------------------------------
// Scenes
//
//   {"version": 1, "role": "test_before", "delta_l": 0.02, "nodes": [[x, y], ...]}

struct SceneDocument {
    std::optional<std::string> role;
    double delta_l = 0.0;
    std::vector<Point> nodes;

    bool operator==(const SceneDocument&) const = default;
};

/// Parses without checking uniformity; delta_l must still be positive.
SceneDocument parse_scene_document(std::string_view text);
std::string serialize_scene(const SceneDocument& scene);
std::string serialize_scene(const Curve& curve, std::optional<std::string> role = std::nullopt);

/// Strict: nodes must be uniformly spaced at the declared delta_l.
Curve to_curve(const SceneDocument& scene);

Curve load_scene(const std::filesystem::path& path);
/// Nodes only, no uniformity requirement (registration inputs, raw polylines).
std::vector<Point> load_points(const std::filesystem::path& path);
void save_scene(const std::filesystem::path& path, const Curve& curve, std::optional<std::string> role = std::nullopt);

// ---------------------------------------------------------------------------
// Demonstrations
//
//   {"version": 1, "steps": [{"before": scene, "after": scene, "anchor_node": 0,
//                             "keyframes": [{"position": [x, y], "status": "closed", "grasp_node": 39}, ...]}]}

TaskDemo parse_demo(std::string_view text);
std::string serialize_demo(const TaskDemo& demo);
TaskDemo load_demo(const std::filesystem::path& path);
void save_demo(const std::filesystem::path& path, const TaskDemo& demo);

// ---------------------------------------------------------------------------
// Results

struct Diagnostics {
    int iterations = 0;
    bool converged = false;
    double sigma2 = 0.0;
    std::vector<double> objective_trace;
    /// (length - segments * delta_l) / (segments * delta_l) of the target.
    std::optional<double> length_error;
    std::optional<double> segment_deviation;
    /// Largest displacement of a reference point (registration only).
    std::optional<double> max_displacement;
    /// RMS distance from each observed point to its nearest moved reference point.
    std::optional<double> residual;

    bool operator==(const Diagnostics&) const = default;
};

struct ResultDocument {
    std::string kind;  // register | warp | task_step | task_summary | validate
    std::optional<std::string> mode;  // tangent | cartesian
    std::optional<std::size_t> step;
    std::vector<Point> target_nodes;
    std::optional<double> target_delta_l;
    std::vector<double> target_angles;  // degrees
    std::vector<Point> predicted_nodes;
    std::optional<Eigen::MatrixXd> correspondence;
    std::vector<std::pair<std::size_t, std::size_t>> grasp_map;
    Trajectory trajectory;
    Diagnostics diagnostics;
    std::optional<ValidationReport> validation;

    bool operator==(const ResultDocument& other) const;
};

ResultDocument make_result(const cpd::RegistrationResult& reg, const cpd::PointSet& X);
ResultDocument make_result(const WarpOutput& warp, const Trajectory& trajectory, bool include_correspondence);
ResultDocument make_result(const CartesianWarpOutput& warp);
ResultDocument make_result(const ValidationReport& report);

ResultDocument parse_result(std::string_view text);
std::string serialize_result(const ResultDocument& result);
ResultDocument load_result(const std::filesystem::path& path);
void save_result(const std::filesystem::path& path, const ResultDocument& result);

// ---------------------------------------------------------------------------
// SVG

struct PlotStyle {
    std::string label;
    std::string color = "#000000";
    double stroke_width = 1.5;
    bool dashed = false;
    bool markers = false;
};

struct PlotLayer {
    std::vector<Point> points;
    PlotStyle style;
};

struct SvgOptions {
    double width = 800.0;    // pixels; height follows the data aspect ratio
    double margin = 0.05;    // fraction of the larger data extent on every side
};

/// Standalone SVG with one polyline per non-empty layer (in order) and a
/// legend. Empty layers are skipped and noted in a comment. Output bytes
/// depend only on the inputs.
std::string render_svg(std::span<const PlotLayer> layers, const SvgOptions& options = {});
void plot_svg(std::span<const PlotLayer> layers, const std::filesystem::path& path, const SvgOptions& options = {});

// ---------------------------------------------------------------------------

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, std::string_view text);

} // namespace tsreg::io
