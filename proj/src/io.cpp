#include "tsreg/io.hpp"

#include "tsreg/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace tsreg::io {

namespace {

using json = nlohmann::ordered_json;

// ----------------------------------------------------------------- writing

json number(double v, std::string_view what) {
    if (!std::isfinite(v)) throw Error("cannot serialize non-finite value in " + std::string(what));
    return json(v);
}

json point_json(const Point& p, std::string_view what) {
    return json::array({number(p.x(), what), number(p.y(), what)});
}

json points_json(std::span<const Point> pts, std::string_view what) {
    json a = json::array();
    for (const Point& p : pts) a.push_back(point_json(p, what));
    return a;
}

json doubles_json(std::span<const double> xs, std::string_view what) {
    json a = json::array();
    for (double x : xs) a.push_back(number(x, what));
    return a;
}

bool is_scalar(const json& j) { return !j.is_object() && !j.is_array(); }

// Objects one key per line; arrays of scalars on one line; other arrays one
// element per line. Numbers use the shortest text that reads back to the
// same double.
void write_pretty(std::string& out, const json& j, int depth) {
    const std::string pad(static_cast<std::size_t>(2 * (depth + 1)), ' ');
    const std::string close_pad(static_cast<std::size_t>(2 * depth), ' ');
    if (j.is_object()) {
        if (j.empty()) {
            out += "{}";
            return;
        }
        out += "{\n";
        bool first = true;
        for (auto it = j.begin(); it != j.end(); ++it) {
            if (!first) out += ",\n";
            first = false;
            out += pad + json(it.key()).dump() + ": ";
            write_pretty(out, it.value(), depth + 1);
        }
        out += "\n" + close_pad + "}";
    } else if (j.is_array()) {
        if (j.empty()) {
            out += "[]";
            return;
        }
        if (std::all_of(j.begin(), j.end(), is_scalar)) {
            out += "[";
            for (std::size_t i = 0; i < j.size(); ++i) out += (i ? ", " : "") + j[i].dump();
            out += "]";
            return;
        }
        out += "[\n";
        for (std::size_t i = 0; i < j.size(); ++i) {
            if (i) out += ",\n";
            out += pad;
            write_pretty(out, j[i], depth + 1);
        }
        out += "\n" + close_pad + "]";
    } else {
        out += j.dump();
    }
}

std::string to_text(const json& j) {
    std::string out;
    write_pretty(out, j, 0);
    out += "\n";
    return out;
}

// ----------------------------------------------------------------- reading

// JSON has no NaN or infinity literals. Bare words such as NaN or -Infinity
// are turned into strings so the schema check can report where they are
// instead of the parser failing at a byte offset.
std::string quote_bare_words(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    bool in_string = false;
    bool escaped = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (in_string) {
            out += c;
            if (escaped) escaped = false;
            else if (c == '\\') escaped = true;
            else if (c == '"') in_string = false;
            continue;
        }
        if (c == '"') {
            in_string = true;
            out += c;
            continue;
        }
        const bool alpha = std::isalpha(static_cast<unsigned char>(c)) != 0;
        const bool in_number = !out.empty() && (std::isdigit(static_cast<unsigned char>(out.back())) || out.back() == '.');
        if (!alpha || in_number) {
            out += c;
            continue;
        }
        std::size_t j = i;
        while (j < text.size() && std::isalpha(static_cast<unsigned char>(text[j]))) ++j;
        std::string word(text.substr(i, j - i));
        if (word == "true" || word == "false" || word == "null") {
            out += word;
        } else {
            if (!out.empty() && out.back() == '-') {
                out.pop_back();
                word = "-" + word;
            }
            out += '"' + word + '"';
        }
        i = j - 1;
    }
    return out;
}

json parse_text(std::string_view text) {
    try {
        return json::parse(quote_bare_words(text));
    } catch (const json::parse_error& e) {
        throw Error(std::string("malformed JSON: ") + e.what());
    }
}

std::string child(const std::string& ptr, std::string_view key) { return ptr + "/" + std::string(key); }
std::string child(const std::string& ptr, std::size_t index) { return ptr + "/" + std::to_string(index); }

[[noreturn]] void schema_error(const std::string& ptr, const std::string& message) {
    throw Error((ptr.empty() ? std::string("/") : ptr) + ": " + message);
}

std::string describe(const json& v) {
    if (v.is_string()) return "string " + v.dump();
    if (v.is_null()) return "null";
    if (v.is_boolean()) return "boolean";
    if (v.is_array()) return "array";
    if (v.is_object()) return "object";
    return "number";
}

const json& object_at(const json& j, const std::string& ptr) {
    if (!j.is_object()) schema_error(ptr, "expected an object, found " + describe(j));
    return j;
}

const json& array_at(const json& j, const std::string& ptr) {
    if (!j.is_array()) schema_error(ptr, "expected an array, found " + describe(j));
    return j;
}

const json* optional_field(const json& obj, std::string_view key) {
    auto it = obj.find(std::string(key));
    if (it == obj.end() || it->is_null()) return nullptr;
    return &*it;
}

const json& field(const json& obj, const std::string& ptr, std::string_view key) {
    const json* v = optional_field(obj, key);
    if (!v) schema_error(child(ptr, key), "required field is missing");
    return *v;
}

double finite_number(const json& v, const std::string& ptr, const std::string& context = {}) {
    const std::string suffix = context.empty() ? "" : " (" + context + ")";
    if (!v.is_number()) schema_error(ptr, "expected a finite number, found " + describe(v) + suffix);
    const double d = v.get<double>();
    if (!std::isfinite(d)) schema_error(ptr, "expected a finite number" + suffix);
    return d;
}

std::size_t index_value(const json& v, const std::string& ptr) {
    if (!v.is_number_unsigned()) {
        if (v.is_number_integer() && v.get<long long>() >= 0) return static_cast<std::size_t>(v.get<long long>());
        schema_error(ptr, "expected a non-negative integer, found " + describe(v));
    }
    return v.get<std::size_t>();
}

std::string string_value(const json& v, const std::string& ptr) {
    if (!v.is_string()) schema_error(ptr, "expected a string, found " + describe(v));
    return v.get<std::string>();
}

bool bool_value(const json& v, const std::string& ptr) {
    if (!v.is_boolean()) schema_error(ptr, "expected true or false, found " + describe(v));
    return v.get<bool>();
}

Point point_value(const json& v, const std::string& ptr, const std::string& context) {
    const json& a = array_at(v, ptr);
    if (a.size() != 2) schema_error(ptr, "expected [x, y], found " + std::to_string(a.size()) + " values (" + context + ")");
    return {finite_number(a[0], child(ptr, 0), context), finite_number(a[1], child(ptr, 1), context)};
}

std::vector<Point> points_value(const json& v, const std::string& ptr, std::string_view item = "node") {
    const json& a = array_at(v, ptr);
    std::vector<Point> pts;
    pts.reserve(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        pts.push_back(point_value(a[i], child(ptr, i), std::string(item) + " " + std::to_string(i)));
    }
    return pts;
}

std::vector<double> doubles_value(const json& v, const std::string& ptr) {
    const json& a = array_at(v, ptr);
    std::vector<double> xs;
    xs.reserve(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) xs.push_back(finite_number(a[i], child(ptr, i)));
    return xs;
}

std::optional<double> optional_number(const json& obj, const std::string& ptr, std::string_view key) {
    const json* v = optional_field(obj, key);
    if (!v) return std::nullopt;
    return finite_number(*v, child(ptr, key));
}

void check_version(const json& obj, const std::string& ptr) {
    const json& v = field(obj, ptr, "version");
    if (!v.is_number_integer()) schema_error(child(ptr, "version"), "expected an integer, found " + describe(v));
    if (v.get<long long>() != kFormatVersion) {
        schema_error(child(ptr, "version"), "unsupported version " + v.dump() + " (expected " +
                                                std::to_string(kFormatVersion) + ")");
    }
}

// ------------------------------------------------------------------ scenes

json scene_json(const SceneDocument& scene, bool with_version) {
    json j = json::object();
    if (with_version) j["version"] = kFormatVersion;
    if (scene.role) j["role"] = *scene.role;
    j["delta_l"] = number(scene.delta_l, "delta_l");
    j["nodes"] = points_json(scene.nodes, "nodes");
    return j;
}

SceneDocument scene_value(const json& v, const std::string& ptr) {
    const json& obj = object_at(v, ptr);
    SceneDocument s;
    if (const json* role = optional_field(obj, "role")) {
        s.role = string_value(*role, child(ptr, "role"));
        if (std::find(std::begin(kSceneRoles), std::end(kSceneRoles), *s.role) == std::end(kSceneRoles)) {
            schema_error(child(ptr, "role"), "unknown role '" + *s.role + "' (expected train_before, train_after or test_before)");
        }
    }
    s.delta_l = finite_number(field(obj, ptr, "delta_l"), child(ptr, "delta_l"));
    if (!(s.delta_l > 0.0)) schema_error(child(ptr, "delta_l"), "must be positive");
    s.nodes = points_value(field(obj, ptr, "nodes"), child(ptr, "nodes"));
    if (s.nodes.size() < 2) schema_error(child(ptr, "nodes"), "a scene needs at least 2 nodes");
    return s;
}

Curve curve_value(const SceneDocument& s, const std::string& ptr) {
    for (std::size_t i = 0; i + 1 < s.nodes.size(); ++i) {
        const double d = (s.nodes[i + 1] - s.nodes[i]).norm();
        if (std::abs(d - s.delta_l) > kUniformTolerance * s.delta_l) {
            std::ostringstream os;
            os.precision(17);
            os << "nodes " << i << " and " << i + 1 << " are " << d << " apart but delta_l is " << s.delta_l
               << "; resample the polyline to uniform spacing first (resample_uniform)";
            schema_error(child(ptr, "nodes"), os.str());
        }
    }
    return Curve(s.nodes, s.delta_l);
}

SceneDocument document_of(const Curve& c, std::optional<std::string> role = std::nullopt) {
    return {std::move(role), c.delta_l(), c.nodes()};
}

// -------------------------------------------------------------- trajectories

json trajectory_json(const Trajectory& t) {
    json a = json::array();
    for (const Keyframe& k : t.keyframes) {
        json f = json::object();
        f["position"] = point_json(k.position, "keyframe position");
        f["status"] = k.status == GripperStatus::closed ? "closed" : "open";
        if (k.grasp_node) f["grasp_node"] = *k.grasp_node;
        a.push_back(std::move(f));
    }
    return a;
}

Trajectory trajectory_value(const json& v, const std::string& ptr) {
    const json& a = array_at(v, ptr);
    Trajectory t;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const std::string p = child(ptr, i);
        const json& f = object_at(a[i], p);
        Keyframe k;
        k.position = point_value(field(f, p, "position"), child(p, "position"), "keyframe " + std::to_string(i));
        const std::string status = string_value(field(f, p, "status"), child(p, "status"));
        if (status == "open") k.status = GripperStatus::open;
        else if (status == "closed") k.status = GripperStatus::closed;
        else schema_error(child(p, "status"), "expected \"open\" or \"closed\", found \"" + status + "\"");
        if (const json* g = optional_field(f, "grasp_node")) k.grasp_node = index_value(*g, child(p, "grasp_node"));
        if (k.status == GripperStatus::closed && !k.grasp_node) {
            schema_error(child(p, "grasp_node"), "a closed keyframe needs a grasp node");
        }
        t.keyframes.push_back(k);
    }
    return t;
}

// ------------------------------------------------------------------ results

json validation_json(const ValidationReport& r) {
    json j = json::object();
    j["threshold"] = number(r.threshold, "threshold");
    j["max_segment_deviation"] = number(r.max_segment_deviation, "max_segment_deviation");
    j["over_stretch"] = r.over_stretch;
    j["over_compression"] = r.over_compression;
    j["grasp_nodes"] = r.grasp_nodes;
    json states = json::array();
    for (const StateCheck& c : r.states) {
        json s = json::object();
        s["length_error"] = number(c.length_error, "length_error");
        s["max_stretch"] = number(c.max_stretch, "max_stretch");
        s["max_compression"] = number(c.max_compression, "max_compression");
        s["x_extent"] = number(c.x_extent, "x_extent");
        s["y_extent"] = number(c.y_extent, "y_extent");
        states.push_back(std::move(s));
    }
    j["states"] = std::move(states);
    return j;
}

ValidationReport validation_value(const json& v, const std::string& ptr) {
    const json& obj = object_at(v, ptr);
    ValidationReport r;
    r.threshold = finite_number(field(obj, ptr, "threshold"), child(ptr, "threshold"));
    r.max_segment_deviation = finite_number(field(obj, ptr, "max_segment_deviation"), child(ptr, "max_segment_deviation"));
    r.over_stretch = bool_value(field(obj, ptr, "over_stretch"), child(ptr, "over_stretch"));
    r.over_compression = bool_value(field(obj, ptr, "over_compression"), child(ptr, "over_compression"));
    const json& g = array_at(field(obj, ptr, "grasp_nodes"), child(ptr, "grasp_nodes"));
    for (std::size_t i = 0; i < g.size(); ++i) r.grasp_nodes.push_back(index_value(g[i], child(child(ptr, "grasp_nodes"), i)));
    const std::string sp = child(ptr, "states");
    const json& states = array_at(field(obj, ptr, "states"), sp);
    for (std::size_t i = 0; i < states.size(); ++i) {
        const std::string p = child(sp, i);
        const json& s = object_at(states[i], p);
        StateCheck c;
        c.length_error = finite_number(field(s, p, "length_error"), child(p, "length_error"));
        c.max_stretch = finite_number(field(s, p, "max_stretch"), child(p, "max_stretch"));
        c.max_compression = finite_number(field(s, p, "max_compression"), child(p, "max_compression"));
        c.x_extent = finite_number(field(s, p, "x_extent"), child(p, "x_extent"));
        c.y_extent = finite_number(field(s, p, "y_extent"), child(p, "y_extent"));
        r.states.push_back(c);
    }
    return r;
}

void fill_registration(Diagnostics& d, const cpd::RegistrationResult& reg) {
    d.iterations = reg.iterations;
    d.converged = reg.converged;
    d.sigma2 = reg.sigma2;
    d.objective_trace = reg.objective_trace;
}

double relative_length_error(std::span<const Point> pts, double delta_l) {
    const double nominal = delta_l * static_cast<double>(pts.size() - 1);
    return (curve_length(pts) - nominal) / nominal;
}

std::vector<Point> rows_to_points(const cpd::PointSet& m) {
    std::vector<Point> pts;
    pts.reserve(static_cast<std::size_t>(m.rows()));
    for (Eigen::Index i = 0; i < m.rows(); ++i) pts.emplace_back(m(i, 0), m(i, 1));
    return pts;
}

} // namespace

// ------------------------------------------------------------------ files

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path.string() + "' for reading");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_text(const std::filesystem::path& path, std::string_view text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open '" + path.string() + "' for writing");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw Error("failed writing '" + path.string() + "'");
}

namespace {

template <class F>
auto with_path(const std::filesystem::path& path, F&& f) {
    try {
        return f(read_text(path));
    } catch (const Error& e) {
        throw Error(path.string() + ": " + e.what());
    }
}

} // namespace

// ------------------------------------------------------------------ scenes

SceneDocument parse_scene_document(std::string_view text) {
    const json j = parse_text(text);
    object_at(j, "");
    check_version(j, "");
    return scene_value(j, "");
}

std::string serialize_scene(const SceneDocument& scene) { return to_text(scene_json(scene, true)); }

std::string serialize_scene(const Curve& curve, std::optional<std::string> role) {
    return serialize_scene(document_of(curve, std::move(role)));
}

Curve to_curve(const SceneDocument& scene) { return curve_value(scene, ""); }

Curve load_scene(const std::filesystem::path& path) {
    return with_path(path, [](const std::string& text) { return to_curve(parse_scene_document(text)); });
}

std::vector<Point> load_points(const std::filesystem::path& path) {
    return with_path(path, [](const std::string& text) { return parse_scene_document(text).nodes; });
}

void save_scene(const std::filesystem::path& path, const Curve& curve, std::optional<std::string> role) {
    write_text(path, serialize_scene(curve, std::move(role)));
}

// ------------------------------------------------------------------- demos

TaskDemo parse_demo(std::string_view text) {
    const json j = parse_text(text);
    object_at(j, "");
    check_version(j, "");
    const json& steps = array_at(field(j, "", "steps"), "/steps");
    TaskDemo demo;
    for (std::size_t k = 0; k < steps.size(); ++k) {
        const std::string p = child("/steps", k);
        const json& s = object_at(steps[k], p);
        Curve before = curve_value(scene_value(field(s, p, "before"), child(p, "before")), child(p, "before"));
        Curve after = curve_value(scene_value(field(s, p, "after"), child(p, "after")), child(p, "after"));
        Trajectory traj = trajectory_value(field(s, p, "keyframes"), child(p, "keyframes"));
        std::optional<std::size_t> anchor;
        if (const json* a = optional_field(s, "anchor_node")) anchor = index_value(*a, child(p, "anchor_node"));
        demo.steps.push_back({std::move(before), std::move(after), std::move(traj), anchor});
    }
    demo.validate();
    return demo;
}

std::string serialize_demo(const TaskDemo& demo) {
    json j = json::object();
    j["version"] = kFormatVersion;
    json steps = json::array();
    for (const StepDemo& s : demo.steps) {
        json o = json::object();
        o["before"] = scene_json(document_of(s.before), false);
        o["after"] = scene_json(document_of(s.after), false);
        if (s.anchor_node) o["anchor_node"] = *s.anchor_node;
        o["keyframes"] = trajectory_json(s.trajectory);
        steps.push_back(std::move(o));
    }
    j["steps"] = std::move(steps);
    return to_text(j);
}

TaskDemo load_demo(const std::filesystem::path& path) {
    return with_path(path, [](const std::string& text) { return parse_demo(text); });
}

void save_demo(const std::filesystem::path& path, const TaskDemo& demo) { write_text(path, serialize_demo(demo)); }

// ----------------------------------------------------------------- results

bool ResultDocument::operator==(const ResultDocument& o) const {
    const bool same_c = correspondence.has_value() == o.correspondence.has_value() &&
                        (!correspondence || (correspondence->rows() == o.correspondence->rows() &&
                                             correspondence->cols() == o.correspondence->cols() &&
                                             *correspondence == *o.correspondence));
    return same_c && kind == o.kind && mode == o.mode && step == o.step && target_nodes == o.target_nodes &&
           target_delta_l == o.target_delta_l && target_angles == o.target_angles &&
           predicted_nodes == o.predicted_nodes && grasp_map == o.grasp_map && trajectory == o.trajectory &&
           diagnostics == o.diagnostics && validation == o.validation;
}

ResultDocument make_result(const cpd::RegistrationResult& reg, const cpd::PointSet& X) {
    if (reg.Z.cols() != 2 || X.cols() != 2) throw Error("result documents hold planar point sets only");
    ResultDocument r;
    r.kind = "register";
    r.target_nodes = rows_to_points(reg.Z);
    fill_registration(r.diagnostics, reg);
    double max_disp = 0.0;
    for (Eigen::Index m = 0; m < reg.Z.rows(); ++m) max_disp = std::max(max_disp, (reg.Z.row(m) - reg.Y.row(m)).norm());
    double sum = 0.0;
    for (Eigen::Index n = 0; n < X.rows(); ++n) {
        double best = std::numeric_limits<double>::infinity();
        for (Eigen::Index m = 0; m < reg.Z.rows(); ++m) best = std::min(best, (X.row(n) - reg.Z.row(m)).squaredNorm());
        sum += best;
    }
    r.diagnostics.max_displacement = max_disp;
    r.diagnostics.residual = std::sqrt(sum / static_cast<double>(X.rows()));
    return r;
}

ResultDocument make_result(const WarpOutput& warp, const Trajectory& trajectory, bool include_correspondence) {
    ResultDocument r;
    r.kind = "warp";
    r.mode = "tangent";
    r.target_nodes = warp.target_curve.nodes();
    r.target_delta_l = warp.target_curve.delta_l();
    r.target_angles = warp.target_profile.thetas;
    if (include_correspondence) r.correspondence = warp.correspondence;
    r.grasp_map = warp.grasp_map;
    r.trajectory = trajectory;
    fill_registration(r.diagnostics, warp.registration);
    r.diagnostics.length_error = relative_length_error(r.target_nodes, warp.target_curve.delta_l());
    r.diagnostics.segment_deviation = segment_deviation(r.target_nodes, warp.target_curve.delta_l());
    return r;
}

ResultDocument make_result(const CartesianWarpOutput& warp) {
    ResultDocument r;
    r.kind = "warp";
    r.mode = "cartesian";
    r.target_nodes = warp.implied_target;
    r.target_delta_l = warp.reference_delta_l;
    r.trajectory = warp.trajectory;
    fill_registration(r.diagnostics, warp.registration);
    r.diagnostics.length_error = relative_length_error(r.target_nodes, warp.reference_delta_l);
    r.diagnostics.segment_deviation = segment_deviation(r.target_nodes, warp.reference_delta_l);
    return r;
}

ResultDocument make_result(const ValidationReport& report) {
    ResultDocument r;
    r.kind = "validate";
    r.validation = report;
    return r;
}

std::string serialize_result(const ResultDocument& r) {
    json j = json::object();
    j["version"] = kFormatVersion;
    j["kind"] = r.kind;
    if (r.mode) j["mode"] = *r.mode;
    if (r.step) j["step"] = *r.step;
    if (!r.target_nodes.empty()) j["target_nodes"] = points_json(r.target_nodes, "target_nodes");
    if (r.target_delta_l) j["target_delta_l"] = number(*r.target_delta_l, "target_delta_l");
    if (!r.target_angles.empty()) j["target_angles_deg"] = doubles_json(r.target_angles, "target_angles_deg");
    if (!r.predicted_nodes.empty()) j["predicted_nodes"] = points_json(r.predicted_nodes, "predicted_nodes");
    if (r.correspondence) {
        json rows = json::array();
        for (Eigen::Index n = 0; n < r.correspondence->rows(); ++n) {
            json row = json::array();
            for (Eigen::Index m = 0; m < r.correspondence->cols(); ++m) row.push_back(number((*r.correspondence)(n, m), "correspondence"));
            rows.push_back(std::move(row));
        }
        j["correspondence"] = std::move(rows);
    }
    if (!r.grasp_map.empty()) {
        json gm = json::array();
        for (const auto& [train, test] : r.grasp_map) gm.push_back(json::array({train, test}));
        j["grasp_map"] = std::move(gm);
    }
    if (!r.trajectory.keyframes.empty()) j["trajectory"] = trajectory_json(r.trajectory);

    const Diagnostics& d = r.diagnostics;
    json dj = json::object();
    dj["iterations"] = d.iterations;
    dj["converged"] = d.converged;
    dj["sigma2"] = number(d.sigma2, "sigma2");
    if (d.length_error) dj["length_error"] = number(*d.length_error, "length_error");
    if (d.segment_deviation) dj["segment_deviation"] = number(*d.segment_deviation, "segment_deviation");
    if (d.max_displacement) dj["max_displacement"] = number(*d.max_displacement, "max_displacement");
    if (d.residual) dj["residual"] = number(*d.residual, "residual");
    dj["objective_trace"] = doubles_json(d.objective_trace, "objective_trace");
    j["diagnostics"] = std::move(dj);
    if (r.validation) j["validation"] = validation_json(*r.validation);
    return to_text(j);
}

ResultDocument parse_result(std::string_view text) {
    const json j = parse_text(text);
    object_at(j, "");
    check_version(j, "");
    ResultDocument r;
    r.kind = string_value(field(j, "", "kind"), "/kind");
    if (const json* v = optional_field(j, "mode")) r.mode = string_value(*v, "/mode");
    if (const json* v = optional_field(j, "step")) r.step = index_value(*v, "/step");
    if (const json* v = optional_field(j, "target_nodes")) r.target_nodes = points_value(*v, "/target_nodes");
    r.target_delta_l = optional_number(j, "", "target_delta_l");
    if (const json* v = optional_field(j, "target_angles_deg")) r.target_angles = doubles_value(*v, "/target_angles_deg");
    if (const json* v = optional_field(j, "predicted_nodes")) r.predicted_nodes = points_value(*v, "/predicted_nodes");
    if (const json* v = optional_field(j, "correspondence")) {
        const json& rows = array_at(*v, "/correspondence");
        const std::size_t cols = rows.empty() ? 0 : array_at(rows[0], "/correspondence/0").size();
        Eigen::MatrixXd C(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
        for (std::size_t n = 0; n < rows.size(); ++n) {
            const std::string p = child("/correspondence", n);
            const std::vector<double> row = doubles_value(rows[n], p);
            if (row.size() != cols) schema_error(p, "row has " + std::to_string(row.size()) + " entries, expected " + std::to_string(cols));
            for (std::size_t m = 0; m < cols; ++m) C(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m)) = row[m];
        }
        r.correspondence = std::move(C);
    }
    if (const json* v = optional_field(j, "grasp_map")) {
        const json& a = array_at(*v, "/grasp_map");
        for (std::size_t i = 0; i < a.size(); ++i) {
            const std::string p = child("/grasp_map", i);
            const json& pair = array_at(a[i], p);
            if (pair.size() != 2) schema_error(p, "expected [training node, test node]");
            r.grasp_map.emplace_back(index_value(pair[0], child(p, 0)), index_value(pair[1], child(p, 1)));
        }
    }
    if (const json* v = optional_field(j, "trajectory")) r.trajectory = trajectory_value(*v, "/trajectory");

    const json& dj = object_at(field(j, "", "diagnostics"), "/diagnostics");
    Diagnostics& d = r.diagnostics;
    const json& it = field(dj, "/diagnostics", "iterations");
    if (!it.is_number_integer()) schema_error("/diagnostics/iterations", "expected an integer, found " + describe(it));
    d.iterations = it.get<int>();
    d.converged = bool_value(field(dj, "/diagnostics", "converged"), "/diagnostics/converged");
    d.sigma2 = finite_number(field(dj, "/diagnostics", "sigma2"), "/diagnostics/sigma2");
    d.length_error = optional_number(dj, "/diagnostics", "length_error");
    d.segment_deviation = optional_number(dj, "/diagnostics", "segment_deviation");
    d.max_displacement = optional_number(dj, "/diagnostics", "max_displacement");
    d.residual = optional_number(dj, "/diagnostics", "residual");
    d.objective_trace = doubles_value(field(dj, "/diagnostics", "objective_trace"), "/diagnostics/objective_trace");
    if (const json* v = optional_field(j, "validation")) r.validation = validation_value(*v, "/validation");
    return r;
}

ResultDocument load_result(const std::filesystem::path& path) {
    return with_path(path, [](const std::string& text) { return parse_result(text); });
}

void save_result(const std::filesystem::path& path, const ResultDocument& result) {
    write_text(path, serialize_result(result));
}

} // namespace tsreg::io
