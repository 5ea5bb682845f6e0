#include "cli.hpp"

#include "tsreg/error.hpp"
#include "tsreg/io.hpp"
#include "tsreg/pipeline.hpp"
#include "tsreg/scenario.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iomanip>
#include <optional>

namespace tsreg::cli {

namespace fs = std::filesystem;

namespace {

struct Options {
    cpd::RegistrationConfig registration;
    double scale = 10.0;
    double threshold = kDefaultStretchThreshold;
    std::string mode = "tangent";
    std::string fixture;
    std::string demo;
    std::size_t step = 0;
    std::optional<std::size_t> anchor;
    std::string out_dir = "tsreg_out";
    std::string out;
    std::optional<double> delta_l;
    std::optional<unsigned> seed;
    bool include_correspondence = false;
    std::string export_dir;
    std::vector<std::string> files;
};

void add_registration_flags(CLI::App& cmd, Options& o) {
    cmd.add_option("--lambda", o.registration.lambda, "Smoothness weight")->capture_default_str();
    cmd.add_option("--omega", o.registration.omega, "Outlier weight in [0, 1)")->capture_default_str();
    cmd.add_option("--beta", o.registration.beta, "Kernel width")->capture_default_str();
    cmd.add_option("--max-iter", o.registration.max_iter, "EM iteration limit")->capture_default_str();
    cmd.add_option("--tol", o.registration.tol, "Stop when the objective drops by less than this")->capture_default_str();
    cmd.add_option("--area", o.registration.area, "Observation area for the outlier term")->capture_default_str();
    cmd.add_option("--seed", o.seed, "Reserved; the algorithm is deterministic and ignores it");
}

void add_warp_flags(CLI::App& cmd, Options& o) {
    add_registration_flags(cmd, o);
    cmd.add_option("--scale", o.scale, "Tangent-space abscissa spacing per node")->capture_default_str();
    cmd.add_option("--threshold", o.threshold, "Relative segment deviation flagged as over-stretch/compression")
        ->capture_default_str();
    cmd.add_option("--fixture", o.fixture, "Use a built-in fixture instead of input files");
    cmd.add_option("--out-dir", o.out_dir, "Directory for result files")->capture_default_str();
    cmd.add_flag("--include-correspondence", o.include_correspondence, "Write the correspondence matrix");
}

WarpConfig warp_config(const Options& o) {
    WarpConfig c;
    c.registration = o.registration;
    c.abscissa_scale = o.scale;
    return c;
}

cpd::PointSet to_matrix(const std::vector<Point>& pts) {
    cpd::PointSet m(static_cast<Eigen::Index>(pts.size()), 2);
    for (std::size_t i = 0; i < pts.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = pts[i].transpose();
    return m;
}

std::vector<std::size_t> closed_grasp_nodes(const Trajectory& t) {
    std::vector<std::size_t> nodes;
    bool in_run = false;
    for (const Keyframe& k : t.keyframes) {
        const bool closed = k.status == GripperStatus::closed;
        if (closed && k.grasp_node && (!in_run || nodes.back() != *k.grasp_node)) nodes.push_back(*k.grasp_node);
        in_run = closed;
    }
    return nodes;
}

std::vector<Point> keyframe_positions(const Trajectory& t) {
    std::vector<Point> pts;
    for (const Keyframe& k : t.keyframes) pts.push_back(k.position);
    return pts;
}

void emit(const std::string& text, const std::string& out_path, std::ostream& out) {
    if (out_path.empty()) out << text;
    else io::write_text(out_path, text);
}

std::string num(double v) {
    std::ostringstream os;
    os << std::setprecision(6) << v;
    return os.str();
}

// ------------------------------------------------------------------ register

int cmd_register(const Options& o, std::ostream& out, std::ostream& err) {
    const cpd::PointSet X = to_matrix(io::load_points(o.files.at(0)));
    const cpd::PointSet Y = to_matrix(io::load_points(o.files.at(1)));
    const cpd::RegistrationResult reg = cpd::register_points(X, Y, o.registration);
    const io::ResultDocument doc = io::make_result(reg, X);
    emit(io::serialize_result(doc), o.out, out);
    err << "register: iterations=" << reg.iterations << " converged=" << (reg.converged ? "yes" : "no")
        << " sigma2=" << num(reg.sigma2) << " max_displacement=" << num(*doc.diagnostics.max_displacement)
        << " residual=" << num(*doc.diagnostics.residual) << "\n";
    if (!reg.converged) {
        err << "register: no convergence within " << o.registration.max_iter << " iterations\n";
        return kNotConverged;
    }
    return kSuccess;
}

// ---------------------------------------------------------------------- warp

struct WarpInputs {
    Curve train_before;
    Curve train_after;
    Curve test_before;
    Trajectory trajectory;
    std::optional<std::size_t> anchor;
};

WarpInputs warp_inputs(const Options& o) {
    if (!o.fixture.empty() || !o.demo.empty()) {
        if (!o.fixture.empty() && !o.demo.empty()) throw Error("give either --fixture or --demo, not both");
        std::optional<Fixture> fixture;
        TaskDemo demo;
        if (!o.fixture.empty()) {
            fixture = make_fixture(o.fixture);
            demo = fixture->demo;
        } else {
            demo = io::load_demo(o.demo);
        }
        if (o.step >= demo.steps.size()) {
            throw Error("--step " + std::to_string(o.step) + " is out of range (" + std::to_string(demo.steps.size()) +
                        " steps)");
        }
        Curve test = fixture ? fixture->test : demo.steps[o.step].before;
        if (!o.files.empty()) {
            if (o.files.size() != 1) throw Error("with --fixture or --demo, give at most one test scene");
            test = io::load_scene(o.files[0]);
        } else if (!fixture) {
            throw Error("--demo needs a test scene file");
        }
        const StepDemo& s = demo.steps[o.step];
        return {s.before, s.after, test, s.trajectory, o.anchor ? o.anchor : s.anchor_node};
    }
    if (o.files.size() != 3) throw Error("warp needs train_before, train_after and test_before scene files");
    return {io::load_scene(o.files[0]), io::load_scene(o.files[1]), io::load_scene(o.files[2]), {}, o.anchor};
}

std::vector<io::PlotLayer> scene_layers(const WarpInputs& in) {
    return {
        {in.train_before.nodes(), {"training before", "#9e9e9e", 1.5, true, false}},
        {in.train_after.nodes(), {"training after", "#616161", 1.5, false, false}},
        {in.test_before.nodes(), {"test before", "#1f77b4", 1.5, true, false}},
    };
}

int cmd_warp(const Options& o, std::ostream& out, std::ostream& err) {
    if (o.mode != "tangent" && o.mode != "cartesian") throw Error("--mode must be tangent or cartesian");
    const WarpInputs in = warp_inputs(o);

    io::ResultDocument doc;
    std::vector<io::PlotLayer> layers = scene_layers(in);
    if (o.mode == "tangent") {
        const WarpOutput w = warp_tangent_scene(in.train_before, in.train_after, in.test_before, warp_config(o), in.anchor);
        Trajectory traj;
        if (!in.trajectory.keyframes.empty()) traj = generate_step_trajectory(w, in.trajectory, in.test_before);
        doc = io::make_result(w, traj, o.include_correspondence);
        layers.push_back({w.target_curve.nodes(), {"tangent-space target", "#d62728", 2.0, false, true}});
    } else {
        const CartesianWarpOutput w =
            warp_cartesian_scene(in.train_before, in.train_after, in.test_before, in.trajectory, o.registration);
        doc = io::make_result(w);
        layers.push_back({w.implied_target, {"cartesian implied target", "#ff7f0e", 2.0, false, true}});
    }
    layers.push_back({keyframe_positions(doc.trajectory), {"gripper keyframes", "#2ca02c", 1.0, true, true}});

    const std::vector<std::vector<Point>> states{doc.target_nodes};
    ValidationReport report = validate_physical(states, *doc.target_delta_l, o.threshold);
    report.grasp_nodes = closed_grasp_nodes(doc.trajectory);
    doc.validation = report;

    const fs::path dir(o.out_dir);
    const fs::path json_path = dir / ("warp_" + o.mode + ".json");
    const fs::path svg_path = dir / ("warp_" + o.mode + ".svg");
    io::save_result(json_path, doc);
    io::plot_svg(layers, svg_path);
    out << json_path.string() << "\n" << svg_path.string() << "\n";

    const io::Diagnostics& d = doc.diagnostics;
    err << "warp[" << o.mode << "]: iterations=" << d.iterations << " converged=" << (d.converged ? "yes" : "no")
        << " length_error=" << num(*d.length_error) << " segment_deviation=" << num(*d.segment_deviation)
        << " over_stretch=" << (report.over_stretch ? "yes" : "no")
        << " over_compression=" << (report.over_compression ? "yes" : "no") << "\n";
    if (!d.converged) err << "warp: registration stopped at the iteration limit without converging\n";
    return kSuccess;
}

// ---------------------------------------------------------------------- task

int cmd_task(const Options& o, std::ostream& out, std::ostream& err) {
    TaskDemo demo;
    std::optional<Curve> test;
    if (!o.fixture.empty()) {
        if (!o.files.empty()) throw Error("with --fixture, no input files are read");
        Fixture f = make_fixture(o.fixture);
        demo = std::move(f.demo);
        test = std::move(f.test);
    } else {
        if (o.files.size() != 2) throw Error("task needs a demo file and a test scene file (or --fixture)");
        demo = io::load_demo(o.files[0]);
        test = io::load_scene(o.files[1]);
    }

    const std::vector<StepOutcome> outcomes = run_task(demo, *test, warp_config(o));
    const fs::path dir(o.out_dir);
    std::vector<std::vector<Point>> predicted;
    std::vector<io::PlotLayer> layers{{test->nodes(), {"test initial", "#1f77b4", 1.5, true, false}}};
    static constexpr const char* kPalette[] = {"#d62728", "#ff7f0e", "#2ca02c", "#9467bd", "#8c564b", "#e377c2"};

    io::ResultDocument summary;
    summary.kind = "task_summary";
    summary.diagnostics.converged = true;
    ValidationReport report;
    for (std::size_t k = 0; k < outcomes.size(); ++k) {
        const StepOutcome& s = outcomes[k];
        io::ResultDocument doc = io::make_result(s.warp, s.trajectory, o.include_correspondence);
        doc.kind = "task_step";
        doc.step = k + 1;
        doc.predicted_nodes = s.predicted.nodes();
        const fs::path p = dir / ("step_" + std::to_string(k + 1) + ".json");
        io::save_result(p, doc);
        out << p.string() << "\n";

        predicted.push_back(s.predicted.nodes());
        layers.push_back({s.predicted.nodes(), {"after step " + std::to_string(k + 1), kPalette[k % 6], 1.5, false, false}});
        summary.diagnostics.iterations += doc.diagnostics.iterations;
        summary.diagnostics.converged = summary.diagnostics.converged && doc.diagnostics.converged;
        for (std::size_t g : closed_grasp_nodes(s.trajectory)) report.grasp_nodes.push_back(g);
        err << "task: step " << k + 1 << " iterations=" << doc.diagnostics.iterations
            << " converged=" << (doc.diagnostics.converged ? "yes" : "no")
            << " target_length_error=" << num(*doc.diagnostics.length_error)
            << " predicted_length_error=" << num(curve_length(s.predicted) / (s.predicted.delta_l() * static_cast<double>(s.predicted.segments())) - 1.0)
            << "\n";
    }
    const std::vector<std::size_t> grasps = report.grasp_nodes;
    report = validate_physical(predicted, test->delta_l(), o.threshold);
    report.grasp_nodes = grasps;
    summary.target_nodes = outcomes.back().predicted.nodes();
    summary.target_delta_l = outcomes.back().predicted.delta_l();
    summary.diagnostics.sigma2 = outcomes.back().warp.registration.sigma2;
    summary.diagnostics.length_error = report.states.back().length_error;
    summary.diagnostics.segment_deviation = segment_deviation(summary.target_nodes, *summary.target_delta_l);
    summary.validation = report;

    const fs::path summary_path = dir / "summary.json";
    const fs::path svg_path = dir / "task.svg";
    io::save_result(summary_path, summary);
    io::plot_svg(layers, svg_path);
    out << summary_path.string() << "\n" << svg_path.string() << "\n";
    err << "task: " << outcomes.size() << " steps, max segment deviation " << num(report.max_segment_deviation)
        << (summary.diagnostics.converged ? "" : " (some registrations hit the iteration limit)") << "\n";
    return kSuccess;
}

// ------------------------------------------------------------------ validate

int cmd_validate(const Options& o, std::ostream& out, std::ostream& err) {
    const std::string text = io::read_text(o.files.at(0));
    std::vector<std::vector<Point>> states;
    double delta_l = 0.0;
    try {
        io::SceneDocument scene = io::parse_scene_document(text);
        states.push_back(std::move(scene.nodes));
        delta_l = scene.delta_l;
    } catch (const Error& scene_error) {
        io::ResultDocument r;
        try {
            r = io::parse_result(text);
        } catch (const Error&) {
            throw Error(o.files[0] + ": not a scene or result file: " + scene_error.what());
        }
        if (!r.target_nodes.empty()) states.push_back(r.target_nodes);
        if (!r.predicted_nodes.empty()) states.push_back(r.predicted_nodes);
        if (states.empty()) throw Error(o.files[0] + ": result holds no point sequences to validate");
        if (r.target_delta_l) delta_l = *r.target_delta_l;
    }
    if (o.delta_l) delta_l = *o.delta_l;
    if (!(delta_l > 0.0)) throw Error("no segment length known; pass --delta-l");

    const ValidationReport report = validate_physical(states, delta_l, o.threshold);
    emit(io::serialize_result(io::make_result(report)), o.out, out);
    err << "validate: max segment deviation " << num(report.max_segment_deviation)
        << " over_stretch=" << (report.over_stretch ? "yes" : "no")
        << " over_compression=" << (report.over_compression ? "yes" : "no") << "\n";
    return kSuccess;
}

// ---------------------------------------------------------------------- plot

int cmd_plot(const Options& o, std::ostream& out, std::ostream& err) {
    static constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};
    std::vector<io::PlotLayer> layers;
    for (std::size_t i = 0; i < o.files.size(); ++i) {
        const std::string& f = o.files[i];
        const std::string color = kPalette[i % 6];
        const std::string text = io::read_text(f);
        const std::string name = fs::path(f).stem().string();
        try {
            layers.push_back({io::parse_scene_document(text).nodes, {name, color, 1.5, false, false}});
        } catch (const Error& scene_error) {
            io::ResultDocument r;
            try {
                r = io::parse_result(text);
            } catch (const Error&) {
                throw Error(f + ": not a scene or result file: " + scene_error.what());
            }
            layers.push_back({r.target_nodes, {name + " target", color, 2.0, false, true}});
            if (!r.predicted_nodes.empty()) layers.push_back({r.predicted_nodes, {name + " predicted", color, 1.5, true, false}});
            if (!r.trajectory.keyframes.empty()) {
                layers.push_back({keyframe_positions(r.trajectory), {name + " keyframes", color, 1.0, true, true}});
            }
        }
    }
    const std::string svg = io::render_svg(layers);
    emit(svg, o.out, out);
    if (!o.out.empty()) err << "plot: wrote " << o.out << "\n";
    return kSuccess;
}

// ------------------------------------------------------------------ fixtures

int cmd_fixtures(const Options& o, std::ostream& out, std::ostream& err) {
    for (const std::string& name : fixture_names()) {
        if (o.export_dir.empty()) {
            out << name << "\n";
            continue;
        }
        const Fixture f = make_fixture(name);
        const fs::path dir = fs::path(o.export_dir) / name;
        io::save_demo(dir / "demo.json", f.demo);
        io::save_scene(dir / "train_before.json", f.demo.steps.front().before, "train_before");
        io::save_scene(dir / "train_after.json", f.demo.steps.back().after, "train_after");
        io::save_scene(dir / "test_before.json", f.test, "test_before");
        out << dir.string() << "\n";
    }
    if (!o.export_dir.empty()) err << "fixtures: exported " << fixture_names().size() << " fixtures\n";
    return kSuccess;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Options o;
    CLI::App app{"Trajectory transfer for deformable objects by tangent-space point-set registration", "tsreg"};
    app.require_subcommand(1);

    CLI::App* reg = app.add_subcommand("register", "Register point set Y (reference) onto X (observation)");
    reg->add_option("x_file", o.files, "Observation scene, then reference scene")->required()->expected(2);
    add_registration_flags(*reg, o);
    reg->add_option("-o,--out", o.out, "Write the result here instead of standard output");

    CLI::App* warp = app.add_subcommand("warp", "Transfer a demonstrated step onto a test scene");
    warp->add_option("scenes", o.files, "train_before train_after test_before (or a test scene with --demo)");
    add_warp_flags(*warp, o);
    warp->add_option("--mode", o.mode, "tangent or cartesian")->capture_default_str()->check(CLI::IsMember({"tangent", "cartesian"}));
    warp->add_option("--demo", o.demo, "Take the training step and keyframes from a demo file");
    warp->add_option("--step", o.step, "Demo step to transfer (0-based)")->capture_default_str();
    warp->add_option("--anchor", o.anchor, "Training node held still during the step");

    CLI::App* task = app.add_subcommand("task", "Transfer every step of a multi-step demonstration");
    task->add_option("files", o.files, "demo file and test scene");
    add_warp_flags(*task, o);

    CLI::App* validate = app.add_subcommand("validate", "Check segment lengths of a scene or result file");
    validate->add_option("file", o.files, "Scene or result file")->required()->expected(1);
    validate->add_option("--threshold", o.threshold, "Relative segment deviation flagged")->capture_default_str();
    validate->add_option("--delta-l", o.delta_l, "Nominal segment length (defaults to the file's)");
    validate->add_option("-o,--out", o.out, "Write the report here instead of standard output");

    CLI::App* plot = app.add_subcommand("plot", "Draw scene and result files as one SVG");
    plot->add_option("files", o.files, "Scene or result files")->required();
    plot->add_option("-o,--out", o.out, "Write the SVG here instead of standard output");

    CLI::App* fixtures = app.add_subcommand("fixtures", "List built-in fixtures");
    fixtures->add_option("--export", o.export_dir, "Write every fixture's demo and scenes under this directory");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        if (!reversed.empty()) reversed.pop_back();
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kSuccess : kInputError;
    }

    try {
        if (*reg) return cmd_register(o, out, err);
        if (*warp) return cmd_warp(o, out, err);
        if (*task) return cmd_task(o, out, err);
        if (*validate) return cmd_validate(o, out, err);
        if (*plot) return cmd_plot(o, out, err);
        if (*fixtures) return cmd_fixtures(o, out, err);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kInputError;
    }
    return kInputError;
}

} // namespace tsreg::cli
