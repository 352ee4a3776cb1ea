#include "depthq/deproject.hpp"
#include "depthq/errors.hpp"
#include "depthq/fixture.hpp"
#include "depthq/io.hpp"
#include "depthq/metrics.hpp"
#include "depthq/proximity.hpp"
#include "depthq/registration.hpp"
#include "depthq/synth.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

namespace {

using namespace depthq;

std::string slurp(const std::string& path) {
    const std::vector<std::uint8_t> bytes = read_file(path);
    return std::string(bytes.begin(), bytes.end());
}

double median(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    if (n % 2 == 1) return values[n / 2];
    return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

struct FixtureArgs {
    std::string pattern;
    std::string params_path;
    std::string out_mesh;
    std::string out_desc;
};

struct SynthArgs {
    std::string desc_path;
    std::string mesh_path;
    double distance = 0.6096;
    double noise_sigma = 0.0;
    double dropout = 0.0;
    std::uint64_t seed = 0;
    double depth_scale = kDefaultSynthDepthScale;
    std::string out_dir;
};

struct EvaluateArgs {
    std::vector<std::string> depth_paths;
    std::vector<std::string> corners_paths;
    std::string intrinsics_path;
    std::string desc_path;
    std::string mesh_path;
    double tolerance = 0.002;
    double reject_threshold = 0.005;
    std::string label = "unlabeled";
    std::string out_path;
};

struct CompareArgs {
    std::vector<std::string> report_paths;
    std::string csv_path;
};

int run_fixture(const FixtureArgs& args) {
    const PatternId id = pattern_id_from_string(args.pattern);
    PatternParams params = args.params_path.empty()
                               ? PatternParams::defaults(id)
                               : parse_pattern_params(slurp(args.params_path), id);
    const TriangleMesh mesh = generate_pattern(params);
    const FixtureDescriptor desc = generate_descriptor(params);
    write_file(args.out_mesh, write_stl(mesh));
    write_file(args.out_desc, write_descriptor(desc));
    std::printf("%s: %zu vertices, %zu faces -> %s\n", to_string(id).c_str(),
                mesh.vertex_count(), mesh.face_count(), args.out_mesh.c_str());
    std::printf("descriptor -> %s\n", args.out_desc.c_str());
    return 0;
}

int run_synth(const SynthArgs& args) {
    const TriangleMesh reference = parse_stl(read_file(args.mesh_path));
    const FixtureDescriptor desc = parse_descriptor(slurp(args.desc_path));
    const SyntheticScene scene =
        make_scene(reference, desc, frontal_pose(args.distance), default_synth_intrinsics(),
                   args.depth_scale, NoiseModel{args.noise_sigma, args.dropout}, args.seed);
    render_scene_bundle(scene, args.out_dir);
    std::printf("scene bundle -> %s\n", args.out_dir.c_str());
    return 0;
}

void print_report_row(const std::string& name, const QualityReport& r) {
    std::printf("%-28s %12.6g %18.8g %10zu %10zu %14.6g %12.6g\n", name.c_str(), r.rmse,
                r.density, r.inlier_count, r.total_points, r.visible_area,
                r.registration_rms);
}

int run_evaluate(const EvaluateArgs& args) {
    if (args.depth_paths.size() != args.corners_paths.size()) {
        std::fprintf(stderr,
                     "error: %zu depth frames but %zu corner files; they pair one to one\n",
                     args.depth_paths.size(), args.corners_paths.size());
        return 2;
    }

    const SensorConfig config = parse_intrinsics(slurp(args.intrinsics_path));
    const FixtureDescriptor desc = parse_descriptor(slurp(args.desc_path));
    const std::vector<std::uint8_t> mesh_bytes = read_file(args.mesh_path);
    const MeshBvh reference(parse_stl(mesh_bytes));

    std::map<std::string, std::string> shared_digests;
    shared_digests[args.intrinsics_path] = fnv1a_digest(read_file(args.intrinsics_path));
    shared_digests[args.desc_path] = fnv1a_digest(read_file(args.desc_path));
    shared_digests[args.mesh_path] = fnv1a_digest(mesh_bytes);

    std::vector<QualityReport> frames;
    for (std::size_t i = 0; i < args.depth_paths.size(); ++i) {
        const std::vector<std::uint8_t> depth_bytes = read_file(args.depth_paths[i]);
        const std::vector<std::uint8_t> corner_bytes = read_file(args.corners_paths[i]);
        const DepthImage img = parse_depth_pgm(depth_bytes);
        const CornerObservations obs = parse_corner_observations(
            std::string(corner_bytes.begin(), corner_bytes.end()));
        if (img.depth_scale != config.depth_scale) {
            std::fprintf(stderr,
                         "warning: %s carries depth scale %g but the intrinsics file says %g; "
                         "using the frame's own scale\n",
                         args.depth_paths[i].c_str(), img.depth_scale, config.depth_scale);
        }
        const PointCloud cloud = deproject_image(img, config.intrinsics);
        QualityReport report = evaluate(cloud, obs, config.intrinsics, img.depth_scale, desc,
                                        reference, args.tolerance, args.reject_threshold);
        report.label = args.label;
        report.input_digests = shared_digests;
        report.input_digests[args.depth_paths[i]] = fnv1a_digest(depth_bytes);
        report.input_digests[args.corners_paths[i]] = fnv1a_digest(corner_bytes);
        frames.push_back(std::move(report));
    }

    QualityReport final_report = frames.front();
    if (frames.size() > 1) {
        auto collect = [&](auto getter) {
            std::vector<double> v;
            for (const QualityReport& r : frames) v.push_back(getter(r));
            return median(std::move(v));
        };
        final_report.rmse = collect([](const QualityReport& r) { return r.rmse; });
        final_report.density = collect([](const QualityReport& r) { return r.density; });
        final_report.inlier_count = static_cast<std::size_t>(std::llround(
            collect([](const QualityReport& r) { return double(r.inlier_count); })));
        final_report.total_points = static_cast<std::size_t>(std::llround(
            collect([](const QualityReport& r) { return double(r.total_points); })));
        final_report.visible_area =
            collect([](const QualityReport& r) { return r.visible_area; });
        final_report.registration_rms =
            collect([](const QualityReport& r) { return r.registration_rms; });
        for (const QualityReport& r : frames) {
            final_report.input_digests.insert(r.input_digests.begin(),
                                              r.input_digests.end());
        }
    }

    std::printf("%-28s %12s %18s %10s %10s %14s %12s\n", "frame", "rmse_m",
                "density_pts_per_m2", "n_inliers", "n_points", "visible_m2", "reg_rms_m");
    for (std::size_t i = 0; i < frames.size(); ++i) {
        print_report_row(std::filesystem::path(args.depth_paths[i]).filename().string(),
                         frames[i]);
    }
    if (frames.size() > 1) print_report_row("median", final_report);

    if (!args.out_path.empty()) {
        nlohmann::json out = nlohmann::json::parse(write_report(final_report));
        if (frames.size() > 1) {
            nlohmann::json arr = nlohmann::json::array();
            for (const QualityReport& r : frames) {
                arr.push_back(nlohmann::json::parse(write_report(r)));
            }
            out["frames"] = std::move(arr);
        }
        write_file(args.out_path, out.dump(2) + "\n");
    }
    return 0;
}

int run_compare(const CompareArgs& args) {
    std::vector<std::string> fixture_order;
    std::vector<std::string> label_order;
    std::map<std::pair<std::string, std::string>, std::vector<QualityReport>> cells;
    std::vector<double> tolerances;

    for (const std::string& path : args.report_paths) {
        QualityReport r = parse_report(slurp(path));
        if (r.label.empty()) r.label = "unlabeled";
        if (std::find(fixture_order.begin(), fixture_order.end(), r.pattern_id) ==
            fixture_order.end()) {
            fixture_order.push_back(r.pattern_id);
        }
        if (std::find(label_order.begin(), label_order.end(), r.label) == label_order.end()) {
            label_order.push_back(r.label);
        }
        if (std::find(tolerances.begin(), tolerances.end(), r.tolerance) == tolerances.end()) {
            tolerances.push_back(r.tolerance);
        }
        cells[{r.pattern_id, r.label}].push_back(std::move(r));
    }
    if (tolerances.size() > 1) {
        std::fprintf(stderr,
                     "warning: reports mix %zu different tolerance values; "
                     "columns are not directly comparable\n",
                     tolerances.size());
    }

    // collapse duplicate (fixture, label) groups to their medians
    struct Cell {
        double rmse = 0.0;
        double density = 0.0;
        std::size_t inliers = 0;
        double area = 0.0;
        bool present = false;
    };
    std::map<std::pair<std::string, std::string>, Cell> table;
    for (auto& [key, reports] : cells) {
        std::vector<double> r, d, n, a;
        for (const QualityReport& q : reports) {
            r.push_back(q.rmse);
            d.push_back(q.density);
            n.push_back(static_cast<double>(q.inlier_count));
            a.push_back(q.visible_area);
        }
        table[key] = Cell{median(r), median(d),
                          static_cast<std::size_t>(std::llround(median(n))), median(a), true};
    }

    std::size_t name_width = std::string("fixture").size();
    for (const std::string& f : fixture_order) name_width = std::max(name_width, f.size());

    const int group_width = 24; // "  *1.2345e-04 1.2346e+06"
    std::printf("%-*s", static_cast<int>(name_width), "");
    for (const std::string& label : label_order) {
        std::printf(" | %*s", group_width - 3, label.c_str());
    }
    std::printf("\n%-*s", static_cast<int>(name_width), "fixture");
    for (std::size_t i = 0; i < label_order.size(); ++i) {
        std::printf(" | %11s %9s", "rmse_m", "density");
    }
    std::printf("\n");

    for (const std::string& fixture : fixture_order) {
        double best_rmse = std::numeric_limits<double>::infinity();
        for (const std::string& label : label_order) {
            const auto it = table.find({fixture, label});
            if (it != table.end()) best_rmse = std::min(best_rmse, it->second.rmse);
        }
        std::printf("%-*s", static_cast<int>(name_width), fixture.c_str());
        for (const std::string& label : label_order) {
            const auto it = table.find({fixture, label});
            if (it == table.end()) {
                std::printf(" | %*s", group_width - 3, "-");
                continue;
            }
            const Cell& cell = it->second;
            const char flag = (cell.rmse == best_rmse) ? '*' : ' ';
            std::printf(" | %c%10.4e %9.4g", flag, cell.rmse, cell.density);
        }
        std::printf("\n");
    }

    if (!args.csv_path.empty()) {
        std::string csv = "fixture,label,rmse_m,density_pts_per_m2,n_inliers,visible_area_m2\n";
        char line[256];
        for (const std::string& fixture : fixture_order) {
            for (const std::string& label : label_order) {
                const auto it = table.find({fixture, label});
                if (it == table.end()) continue;
                const Cell& cell = it->second;
                std::snprintf(line, sizeof(line), "%s,%s,%.9g,%.9g,%zu,%.9g\n",
                              fixture.c_str(), label.c_str(), cell.rmse, cell.density,
                              cell.inliers, cell.area);
                csv += line;
            }
        }
        write_file(args.csv_path, csv);
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"depth camera quality measurement toolkit"};
    app.require_subcommand(1);

    const CLI::Validator pattern_name(
        [](std::string& s) -> std::string {
            try {
                pattern_id_from_string(s);
                return {};
            } catch (const std::exception&) {
                return "unknown pattern '" + s +
                       "' (expected cylinders-vertical, cylinders-horizontal, spheres, or "
                       "angled-plates)";
            }
        },
        "PATTERN");

    FixtureArgs fixture_args;
    CLI::App* fixture_cmd =
        app.add_subcommand("fixture", "generate a test pattern mesh and fixture descriptor");
    fixture_cmd->add_option("--pattern", fixture_args.pattern, "pattern id")
        ->required()
        ->check(pattern_name);
    fixture_cmd->add_option("--params", fixture_args.params_path, "JSON parameter overrides")
        ->check(CLI::ExistingFile);
    fixture_cmd->add_option("--out-mesh", fixture_args.out_mesh, "output STL path")
        ->required();
    fixture_cmd->add_option("--out-desc", fixture_args.out_desc, "output descriptor path")
        ->required();

    SynthArgs synth_args;
    CLI::App* synth_cmd =
        app.add_subcommand("synth", "render a synthetic depth frame of a fixture");
    synth_cmd->add_option("--desc", synth_args.desc_path, "fixture descriptor")
        ->required()
        ->check(CLI::ExistingFile);
    synth_cmd->add_option("--mesh", synth_args.mesh_path, "reference pattern STL")
        ->required()
        ->check(CLI::ExistingFile);
    synth_cmd
        ->add_option("--distance", synth_args.distance,
                     "camera distance from the backplate face, meters")
        ->check(CLI::PositiveNumber);
    synth_cmd
        ->add_option("--noise-sigma", synth_args.noise_sigma,
                     "gaussian depth noise sigma, meters")
        ->check(CLI::NonNegativeNumber);
    synth_cmd->add_option("--dropout", synth_args.dropout, "sample dropout probability")
        ->check(CLI::Range(0.0, 1.0));
    synth_cmd->add_option("--seed", synth_args.seed, "noise stream seed");
    synth_cmd
        ->add_option("--depth-scale", synth_args.depth_scale, "raw depth units per meter")
        ->check(CLI::PositiveNumber);
    synth_cmd->add_option("--out", synth_args.out_dir, "output directory")->required();

    EvaluateArgs eval_args;
    CLI::App* eval_cmd =
        app.add_subcommand("evaluate", "measure depth quality of captured frames");
    eval_cmd->add_option("--depth", eval_args.depth_paths, "depth frame PGM (repeatable)")
        ->required()
        ->check(CLI::ExistingFile);
    eval_cmd
        ->add_option("--corners", eval_args.corners_paths,
                     "marker corner observations, one per depth frame")
        ->required()
        ->check(CLI::ExistingFile);
    eval_cmd->add_option("--intrinsics", eval_args.intrinsics_path, "camera intrinsics JSON")
        ->required()
        ->check(CLI::ExistingFile);
    eval_cmd->add_option("--desc", eval_args.desc_path, "fixture descriptor")
        ->required()
        ->check(CLI::ExistingFile);
    eval_cmd->add_option("--mesh", eval_args.mesh_path, "reference pattern STL")
        ->required()
        ->check(CLI::ExistingFile);
    eval_cmd
        ->add_option("--tolerance", eval_args.tolerance,
                     "inlier tolerance t, meters (also pads the crop box)")
        ->check(CLI::PositiveNumber);
    eval_cmd
        ->add_option("--reject-threshold", eval_args.reject_threshold,
                     "maximum acceptable registration rms residual, meters")
        ->check(CLI::PositiveNumber);
    eval_cmd->add_option("--label", eval_args.label, "capture source label for comparisons");
    eval_cmd->add_option("--out", eval_args.out_path, "report output path");

    CompareArgs compare_args;
    CLI::App* compare_cmd =
        app.add_subcommand("compare", "tabulate reports by fixture and label");
    compare_cmd->add_option("reports", compare_args.report_paths, "report files")
        ->required()
        ->check(CLI::ExistingFile);
    compare_cmd->add_option("--csv", compare_args.csv_path, "also write a CSV table");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (fixture_cmd->parsed()) return run_fixture(fixture_args);
        if (synth_cmd->parsed()) return run_synth(synth_args);
        if (eval_cmd->parsed()) return run_evaluate(eval_args);
        if (compare_cmd->parsed()) return run_compare(compare_args);
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
    return 2;
}
