// Experiment harness: render scenes with a chosen emission strategy, compare
// strategies against a uniform reference, and inspect fitted distributions.
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pg/gaussian.hpp"
#include "pg/image.hpp"
#include "pg/metrics.hpp"
#include "pg/renderer.hpp"
#include "pg/scene_io.hpp"
#include "pg/stats.hpp"
#include "pg/viz.hpp"

namespace fs = std::filesystem;
using namespace pg;

namespace {

struct Options {
    std::string scene_path;
    std::string out_dir;
    RenderConfig cfg;
    std::string reference_path;  // optional PFM for per-iteration metrics
    double exposure = 1.0;
};

const std::map<std::string, GuiderKind> kGuiderNames = {
    {"g3d", GuiderKind::kG3D},   {"uniform", GuiderKind::kUniform},
    {"bound", GuiderKind::kBound}, {"h2d", GuiderKind::kH2D},
    {"vmf", GuiderKind::kVMF},   {"mcmc", GuiderKind::kMCMC}};

const std::map<std::string, InitMode> kInitNames = {{"geometry", InitMode::kGeometry},
                                                    {"naive", InitMode::kNaive},
                                                    {"off", InitMode::kOff}};

const std::map<std::string, LightSamplerKind> kSamplerNames = {
    {"adaptive", LightSamplerKind::kAdaptive}, {"uniform", LightSamplerKind::kUniform}};

const std::map<std::string, GatherMode> kGatherNames = {{"adaptive", GatherMode::kAdaptive},
                                                        {"fixed", GatherMode::kFixed}};

std::string guider_name(GuiderKind kind) {
    for (const auto& [name, k] : kGuiderNames)
        if (k == kind) return name;
    return "?";
}

void add_config_flags(CLI::App* cmd, Options& o) {
    cmd->add_option("--scene", o.scene_path, "Scene JSON file")->required();
    cmd->add_option("--guider", o.cfg.guider, "Emission strategy")
        ->transform(CLI::CheckedTransformer(kGuiderNames, CLI::ignore_case));
    cmd->add_option("--iterations", o.cfg.iterations,
                    "Total passes (the first is setup-only and discarded)");
    cmd->add_option("--photons", o.cfg.photons_per_iteration, "Emissions per pass");
    cmd->add_option("--beta", o.cfg.beta, "Guided-vs-uniform blend in [0,1]");
    cmd->add_option("--components", o.cfg.components, "Mixture component count");
    cmd->add_option("--seed", o.cfg.seed, "Deterministic run seed");
    cmd->add_option("--init", o.cfg.init_mode, "Mixture initializer mode")
        ->transform(CLI::CheckedTransformer(kInitNames, CLI::ignore_case));
    cmd->add_option("--light-sampler", o.cfg.light_sampler, "Light selection strategy")
        ->transform(CLI::CheckedTransformer(kSamplerNames, CLI::ignore_case));
    cmd->add_option("--gather", o.cfg.gather_mode, "Density-estimation radius mode")
        ->transform(CLI::CheckedTransformer(kGatherNames, CLI::ignore_case));
    cmd->add_option("--max-radius-scale", o.cfg.max_radius_scale,
                    "Gather radius cap as a fraction of the bounding diameter");
    cmd->add_option("--max-depth", o.cfg.max_depth, "Specular chain depth limit");
    cmd->add_option("--branch-threshold", o.cfg.branch_threshold,
                    "Light-tree leaf split threshold");
    cmd->add_option("--mcmc-chains", o.cfg.mcmc_chains, "Replica count for --guider mcmc");
    cmd->add_option("--mcmc-sigma", o.cfg.mcmc_sigma, "Mutation size for --guider mcmc");
}

std::string csv_cell(double v) {
    if (std::isnan(v)) return "nan";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

Image to_image(const std::vector<RGB>& pixels, int w, int h) {
    Image img(w, h);
    img.pixels = pixels;
    return img;
}

struct RenderOutputs {
    RunResult result;
    std::vector<MetricsRow> rows;
};

// Full render + file emission for one configuration. Returns the metric rows
// (mse/ssim_comp populated when a reference image was supplied).
RenderOutputs run_render(const Scene& scene, const Options& o, const std::string& out_dir,
                         bool quiet = false) {
    fs::create_directories(out_dir);
    Renderer renderer(scene, o.cfg);

    bool have_ref = !o.reference_path.empty();
    Image ref;
    double data_range = 1.0;
    if (have_ref) {
        ref = read_pfm(o.reference_path);
        if (ref.width != scene.camera.width || ref.height != scene.camera.height)
            throw std::runtime_error("reference image resolution does not match the camera");
        double peak = 0;
        for (const RGB& p : ref.pixels) peak = std::max(peak, luminance(p));
        data_range = std::max(1e-6, peak);
    }

    RenderOutputs out;
    RunResult rr = renderer.run([&](int it, const Framebuffer& fb, MetricsRow& row) {
        if (have_ref && it >= 1) {
            Image img = to_image(fb.image(), fb.width, fb.height);
            row.mse = mse(img, ref);
            row.ssim_comp = 1.0 - ssim(img, ref, data_range);
        }
        out.rows.push_back(row);
    });

    const Framebuffer& fb = renderer.framebuffer();
    Image img = to_image(fb.image(), fb.width, fb.height);
    write_pfm(out_dir + "/image.pfm", img);
    write_ppm(out_dir + "/image.ppm", img, o.exposure);
    Image caustic = to_image(fb.caustic_image(), fb.width, fb.height);
    write_pfm(out_dir + "/caustic.pfm", caustic);
    write_ppm(out_dir + "/caustic.ppm", caustic, o.exposure);
    Image radius(fb.width, fb.height);
    for (size_t i = 0; i < fb.radius.size(); ++i) {
        double r = fb.radius[i];
        radius.pixels[i] = RGB{r, r, r};
    }
    write_pfm(out_dir + "/radius.pfm", radius);
    write_ppm(out_dir + "/radius.ppm",
              colorize_scalar(fb.radius, fb.width, fb.height, renderer.max_radius()), 1.0);

    std::ofstream csv(out_dir + "/metrics.csv");
    csv << "iteration,mse,ssim_comp,gathered,seconds\n";
    for (const MetricsRow& row : out.rows)
        csv << row.iteration << "," << csv_cell(row.mse) << "," << csv_cell(row.ssim_comp)
            << "," << row.gathered << "," << csv_cell(row.seconds) << "\n";

    if (!quiet) {
        long gathered = 0;
        for (const MetricsRow& row : out.rows) gathered += row.gathered;
        std::cout << "guider=" << guider_name(o.cfg.guider) << " iterations="
                  << o.cfg.iterations << " gathered=" << gathered;
        double total = 0;
        for (double f : rr.light_flux) total += f;
        for (size_t li = 0; li < rr.light_flux.size(); ++li)
            std::cout << " light" << li << "_share="
                      << csv_cell(total > 0 ? rr.light_flux[li] / total : 0.0);
        if (have_ref && !out.rows.empty()) {
            std::cout << " final_mse=" << csv_cell(out.rows.back().mse)
                      << " final_ssim_comp=" << csv_cell(out.rows.back().ssim_comp);
        }
        std::cout << "\n  outputs in " << out_dir << "\n";
    }
    out.result = std::move(rr);
    return out;
}

int cmd_render(const Options& o) {
    Scene scene = load_scene(o.scene_path);
    run_render(scene, o, o.out_dir);
    return 0;
}

int cmd_compare(const Options& base, const std::vector<std::string>& guiders,
                int reference_iterations, long reference_photons) {
    Scene scene = load_scene(base.scene_path);
    fs::create_directories(base.out_dir);

    // The reference is a long, dense uniform-emission run of the same pipeline
    // with a decorrelated seed; an explicitly supplied image overrides it. The
    // photon boost keeps the reference's adaptive gather radii well below the
    // candidates' so its own blur does not favor blurrier candidates.
    std::string ref_path = base.reference_path;
    if (ref_path.empty()) {
        Options refo = base;
        refo.cfg.guider = GuiderKind::kUniform;
        refo.cfg.iterations = reference_iterations;
        refo.cfg.photons_per_iteration =
            reference_photons > 0 ? reference_photons : 16 * base.cfg.photons_per_iteration;
        refo.cfg.seed = base.cfg.seed ^ 0x9e3779b97f4a7c15ULL;
        refo.reference_path.clear();
        std::cout << "rendering uniform reference (" << reference_iterations << " x "
                  << refo.cfg.photons_per_iteration << " photons)...\n";
        run_render(scene, refo, base.out_dir + "/reference", true);
        ref_path = base.out_dir + "/reference/image.pfm";
    }

    struct Entry {
        std::string name;
        double final_mse = 0, final_ssim_comp = 0;
        long gathered = 0;
        double seconds = 0;
    };
    std::vector<Entry> table;
    for (const std::string& name : guiders) {
        auto it = kGuiderNames.find(name);
        if (it == kGuiderNames.end()) throw std::runtime_error("unknown guider '" + name + "'");
        Options o = base;
        o.cfg.guider = it->second;
        o.reference_path = ref_path;
        std::cout << "rendering " << name << "...\n";
        RenderOutputs ro = run_render(scene, o, base.out_dir + "/" + name, true);
        Entry e;
        e.name = name;
        e.final_mse = ro.rows.back().mse;
        e.final_ssim_comp = ro.rows.back().ssim_comp;
        for (const MetricsRow& row : ro.rows) {
            e.gathered += row.gathered;
            e.seconds += row.seconds;
        }
        table.push_back(e);
    }

    std::sort(table.begin(), table.end(),
              [](const Entry& a, const Entry& b) { return a.final_mse < b.final_mse; });
    std::ofstream csv(base.out_dir + "/summary.csv");
    csv << "guider,final_mse,final_ssim_comp,gathered,seconds\n";
    std::cout << "ranking by final MSE vs the uniform reference:\n";
    for (const Entry& e : table) {
        csv << e.name << "," << csv_cell(e.final_mse) << "," << csv_cell(e.final_ssim_comp)
            << "," << e.gathered << "," << csv_cell(e.seconds) << "\n";
        std::cout << "  " << e.name << ": mse=" << csv_cell(e.final_mse)
                  << " ssim_comp=" << csv_cell(e.final_ssim_comp) << " gathered=" << e.gathered
                  << "\n";
    }
    return 0;
}

// Trains a renderer long enough to have fitted mixtures, without touching the
// caller's output configuration.
Renderer train_renderer(const Scene& scene, const Options& o, int train_iterations) {
    if (o.cfg.guider == GuiderKind::kMCMC)
        throw std::runtime_error("this subcommand needs a per-light strategy, not mcmc");
    Options t = o;
    t.cfg.iterations = std::max(1, train_iterations);
    Renderer renderer(scene, t.cfg);
    renderer.run();
    return renderer;
}

int cmd_viz(const Options& o, int light, int train_iterations, std::vector<double> from,
            int map_width) {
    Scene scene = load_scene(o.scene_path);
    if (light < 0 || light >= static_cast<int>(scene.lights.size()))
        throw std::runtime_error("viz: --light index out of range");
    fs::create_directories(o.out_dir);
    Renderer renderer = train_renderer(scene, o, train_iterations);

    const GaussianMixture* mix = renderer.guider(light).mixture();
    GaussianMixture empty;
    const GaussianMixture& m = mix ? *mix : empty;

    Vec3 observe = renderer.scene().bound_center;
    if (!from.empty()) observe = Vec3{from[0], from[1], from[2]};
    int W = map_width, H = map_width / 2;
    Image dir_map = directional_heatmap(m, observe, W, H);
    write_pfm(o.out_dir + "/dirpdf.pfm", dir_map);
    double peak = 0;
    for (const RGB& p : dir_map.pixels) peak = std::max(peak, p.r);
    write_ppm(o.out_dir + "/dirpdf.ppm", dir_map, peak > 0 ? 1.0 / peak : 1.0);

    Image splat = splat_mixture(renderer.scene(), m, scene.camera.width, scene.camera.height);
    write_pfm(o.out_dir + "/splat.pfm", splat);
    write_ppm(o.out_dir + "/splat.ppm", splat, 1.0);

    std::cout << "light=" << light << " components=" << m.components.size()
              << " heatmap_integral=" << csv_cell(heatmap_integral(dir_map))
              << " observe=" << observe.x << "," << observe.y << "," << observe.z
              << "\n  outputs in " << o.out_dir << "\n";
    return 0;
}

int cmd_test_dist(const Options& o, int light, int train_iterations, long samples) {
    Scene scene = load_scene(o.scene_path);
    if (light < 0 || light >= static_cast<int>(scene.lights.size()))
        throw std::runtime_error("test-dist: --light index out of range");
    Renderer renderer = train_renderer(scene, o, train_iterations);
    Guider& guider = renderer.guider(light);
    const Scene& sc = renderer.scene();
    const Light& l = sc.lights[light];

    // Support measure of the blended emission density (position x direction).
    double expected = 0;
    switch (l.kind) {
        case Light::kPoint: expected = 4.0 * kPi; break;
        case Light::kRectArea: expected = l.rect_area() * 2.0 * kPi; break;
        case Light::kDirectional: expected = kPi * sc.bound_radius * sc.bound_radius; break;
    }

    RunningMeanVar inv_pdf;
    double max_pdf_diff = 0;
    long zero_pdf = 0;
    for (long i = 0; i < samples; ++i) {
        Pcg32 rng = make_stream(o.cfg.seed, 1, kStreamMisc, static_cast<uint64_t>(i));
        EmissionSample e = guider.emit(sc, l, o.cfg.beta, rng);
        if (!(e.pdf > 0)) {
            ++zero_pdf;
            continue;
        }
        inv_pdf.add(1.0 / e.pdf);
        double again = guider.pdf(sc, l, o.cfg.beta, e.x0, e.w0);
        max_pdf_diff = std::max(max_pdf_diff, std::fabs(again - e.pdf));
    }
    double z = inv_pdf.std_error() > 0 ? (inv_pdf.mean - expected) / inv_pdf.std_error() : 0.0;
    std::cout << "samples=" << samples << " zero_pdf=" << zero_pdf
              << "\nself_integral=" << csv_cell(inv_pdf.mean) << " +- "
              << csv_cell(inv_pdf.std_error()) << " expected=" << csv_cell(expected)
              << " z=" << csv_cell(z) << "\nmax_pdf_mismatch=" << csv_cell(max_pdf_diff)
              << " (emit must report exactly the density pdf() evaluates)\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"photon-mapping renderer with learned emission guiding"};
    app.require_subcommand(1);

    Options ro;
    CLI::App* render = app.add_subcommand("render", "Render a scene to image + metrics files");
    add_config_flags(render, ro);
    render->add_option("--out", ro.out_dir, "Output directory")->required();
    render->add_option("--reference", ro.reference_path,
                       "Reference PFM enabling per-iteration mse/ssim_comp");
    render->add_option("--exposure", ro.exposure, "Preview exposure scale");

    Options co;
    std::vector<std::string> compare_guiders = {"g3d", "uniform", "bound"};
    int reference_iterations = 256;
    long reference_photons = 0;
    CLI::App* compare =
        app.add_subcommand("compare", "Render several strategies and rank them by MSE");
    add_config_flags(compare, co);
    compare->get_option("--seed")->required();  // explicit seed pins the experiment
    compare->add_option("--out", co.out_dir, "Output directory")->required();
    compare->add_option("--guiders", compare_guiders, "Comma-separated strategy list")
        ->delimiter(',');
    compare->add_option("--reference", co.reference_path, "Reference PFM (skips its render)");
    compare->add_option("--reference-iterations", reference_iterations,
                        "Length of the uniform reference run");
    compare->add_option("--reference-photons", reference_photons,
                        "Emissions per reference pass (default: 16x --photons)");
    compare->add_option("--exposure", co.exposure, "Preview exposure scale");

    Options vo;
    int viz_light = 0, viz_train = 8, viz_map_width = 256;
    std::vector<double> viz_from;
    CLI::App* viz =
        app.add_subcommand("viz", "Visualize a fitted mixture (directional map + splats)");
    add_config_flags(viz, vo);
    viz->add_option("--out", vo.out_dir, "Output directory")->required();
    viz->add_option("--light", viz_light, "Light index");
    viz->add_option("--train-iterations", viz_train, "Training passes before the snapshot");
    viz->add_option("--from", viz_from, "Observation point x y z (default: scene center)")
        ->expected(3);
    viz->add_option("--map-width", viz_map_width, "Heatmap width (height is half)");

    Options to;
    int td_light = 0, td_train = 4;
    long td_samples = 100000;
    CLI::App* tdist = app.add_subcommand(
        "test-dist", "Monte-Carlo self-checks of a strategy's emission density");
    add_config_flags(tdist, to);
    tdist->add_option("--light", td_light, "Light index");
    tdist->add_option("--train-iterations", td_train, "Training passes before the check");
    tdist->add_option("--samples", td_samples, "Emission draws");

    CLI11_PARSE(app, argc, argv);

    try {
        if (render->parsed()) return cmd_render(ro);
        if (compare->parsed())
            return cmd_compare(co, compare_guiders, reference_iterations, reference_photons);
        if (viz->parsed()) return cmd_viz(vo, viz_light, viz_train, viz_from, viz_map_width);
        if (tdist->parsed()) return cmd_test_dist(to, td_light, td_train, td_samples);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
