#include "igram/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "igram/raster_io.hpp"
#include "igram/rng.hpp"

namespace igram {

namespace {

void validate(const SceneConfig& c) {
    if (c.height < 64 || c.width < 64) {
        throw std::invalid_argument("scene size must be at least 64x64");
    }
    if (c.bubbles_min > c.bubbles_max || c.roads_min > c.roads_max ||
        c.buildings_min > c.buildings_max || c.bubble_sigma_min > c.bubble_sigma_max ||
        c.road_width_min > c.road_width_max || c.road_slope_min > c.road_slope_max ||
        c.building_extent_min > c.building_extent_max || c.sigma_min > c.sigma_max) {
        throw std::invalid_argument("scene config has an empty range");
    }
    if (c.sigma_min < 0.0) throw std::invalid_argument("sigma must be non-negative");
    if (c.sigma_grid_step < 1) throw std::invalid_argument("sigma grid step must be positive");
}

}  // namespace

PhaseRaster simulate_clean(const SceneConfig& config, std::uint64_t seed) {
    validate(config);
    const int h = config.height;
    const int w = config.width;
    Rng rng(seed);

    std::vector<double> phase(static_cast<std::size_t>(h) * w, 0.0);

    const int n_bubbles = rng.uniform_int(config.bubbles_min, config.bubbles_max);
    for (int b = 0; b < n_bubbles; ++b) {
        const double cx = rng.uniform(0.0, static_cast<double>(w));
        const double cy = rng.uniform(0.0, static_cast<double>(h));
        const double amp = rng.uniform(-config.bubble_amplitude, config.bubble_amplitude);
        const double sg = rng.uniform(config.bubble_sigma_min, config.bubble_sigma_max);
        const double inv = 1.0 / (2.0 * sg * sg);
        for (int y = 0; y < h; ++y) {
            const double dy = y - cy;
            double* row = phase.data() + static_cast<std::size_t>(y) * w;
            for (int x = 0; x < w; ++x) {
                const double dx = x - cx;
                row[x] += amp * std::exp(-(dx * dx + dy * dy) * inv);
            }
        }
    }

    constexpr double kPi = 3.14159265358979323846;
    const int n_roads = rng.uniform_int(config.roads_min, config.roads_max);
    for (int r = 0; r < n_roads; ++r) {
        const double px = rng.uniform(0.0, static_cast<double>(w));
        const double py = rng.uniform(0.0, static_cast<double>(h));
        const double theta = rng.uniform(0.0, 2.0 * kPi);
        const double width = rng.uniform(config.road_width_min, config.road_width_max);
        double slope = rng.uniform(config.road_slope_min, config.road_slope_max);
        if (rng.uniform01() < 0.5) slope = -slope;
        const double ux = std::cos(theta);
        const double uy = std::sin(theta);
        const double half = 0.5 * width;
        for (int y = 0; y < h; ++y) {
            const double dy = y - py;
            double* row = phase.data() + static_cast<std::size_t>(y) * w;
            for (int x = 0; x < w; ++x) {
                const double dx = x - px;
                const double across = -uy * dx + ux * dy;  // distance from the axis
                if (std::abs(across) <= half) {
                    const double along = ux * dx + uy * dy;  // ramp along the road
                    row[x] += slope * along;
                }
            }
        }
    }

    const int n_buildings = rng.uniform_int(config.buildings_min, config.buildings_max);
    for (int b = 0; b < n_buildings; ++b) {
        const double ex = rng.uniform(config.building_extent_min, config.building_extent_max);
        const double ey = rng.uniform(config.building_extent_min, config.building_extent_max);
        const double x0 = rng.uniform(0.0, static_cast<double>(w) - 1.0);
        const double y0 = rng.uniform(0.0, static_cast<double>(h) - 1.0);
        const double offset = rng.uniform(-config.building_offset, config.building_offset);
        const int ya = std::max(0, static_cast<int>(std::floor(y0)));
        const int yb = std::min(h, static_cast<int>(std::floor(y0 + ey)));
        const int xa = std::max(0, static_cast<int>(std::floor(x0)));
        const int xb = std::min(w, static_cast<int>(std::floor(x0 + ex)));
        for (int y = ya; y < yb; ++y) {
            double* row = phase.data() + static_cast<std::size_t>(y) * w;
            for (int x = xa; x < xb; ++x) row[x] += offset;
        }
    }

    PhaseRaster out(h, w);
    for (std::size_t i = 0; i < phase.size(); ++i) out.values[i] = static_cast<float>(phase[i]);
    return out;
}

SimulatedScene add_noise(const PhaseRaster& clean, const SceneConfig& config,
                         std::uint64_t seed) {
    if (config.sigma_min < 0.0 || config.sigma_min > config.sigma_max) {
        throw std::invalid_argument("invalid sigma range");
    }
    if (config.sigma_grid_step < 1) {
        throw std::invalid_argument("sigma grid step must be positive");
    }
    const int h = clean.height;
    const int w = clean.width;
    Rng rng(seed);

    // Smooth sigma field: uniform coarse grid, bilinear upsampling.
    const int step = config.sigma_grid_step;
    const int gh = (h + step - 1) / step + 1;
    const int gw = (w + step - 1) / step + 1;
    std::vector<double> grid(static_cast<std::size_t>(gh) * gw);
    for (double& g : grid) g = rng.uniform(config.sigma_min, config.sigma_max);

    SimulatedScene scene;
    scene.clean_phase = clean;
    scene.noisy = ComplexRaster(h, w);
    scene.true_coherence = CoherenceMap(h, w);
    scene.sigma.resize(static_cast<std::size_t>(h) * w);

    const double inv_sqrt2 = 0.70710678118654752440;
    for (int y = 0; y < h; ++y) {
        const double gy = static_cast<double>(y) / step;
        const int y0 = static_cast<int>(gy);
        const double fy = gy - y0;
        for (int x = 0; x < w; ++x) {
            const double gx = static_cast<double>(x) / step;
            const int x0 = static_cast<int>(gx);
            const double fx = gx - x0;
            const std::size_t g00 = static_cast<std::size_t>(y0) * gw + x0;
            const double sg = (1.0 - fy) * ((1.0 - fx) * grid[g00] + fx * grid[g00 + 1]) +
                              fy * ((1.0 - fx) * grid[g00 + gw] + fx * grid[g00 + gw + 1]);

            const std::size_t i = static_cast<std::size_t>(y) * w + x;
            const double phi = clean.values[i];
            const double component_sd = sg * inv_sqrt2;  // sigma^2 split re/im
            const double re = std::cos(phi) + component_sd * rng.normal();
            const double im = std::sin(phi) + component_sd * rng.normal();
            scene.noisy.samples[i] =
                std::complex<float>(static_cast<float>(re), static_cast<float>(im));
            scene.sigma[i] = static_cast<float>(sg);
            scene.true_coherence.values[i] =
                static_cast<float>(1.0 / std::sqrt(1.0 + sg * sg));
        }
    }
    return scene;
}

std::string DatasetManifest::resolve(const std::string& relative) const {
    if (relative.empty()) return relative;
    const std::filesystem::path p(relative);
    if (p.is_absolute() || directory.empty()) return relative;
    return (std::filesystem::path(directory) / p).string();
}

namespace {

std::string scene_file_name(int index, const char* suffix) {
    std::ostringstream name;
    name << "scene" << std::setw(4) << std::setfill('0') << index << suffix;
    return name.str();
}

}  // namespace

DatasetManifest make_dataset(int count, const SceneConfig& config, std::uint64_t seed,
                             const std::string& out_dir) {
    validate(config);
    if (count < 1) throw std::invalid_argument("dataset needs at least one scene");
    std::filesystem::create_directories(out_dir);

    DatasetManifest manifest;
    manifest.directory = out_dir;
    std::ostringstream lines;
    for (int i = 0; i < count; ++i) {
        const std::uint64_t scene_seed = derive_seed(seed, static_cast<std::uint64_t>(i));
        const PhaseRaster clean = simulate_clean(config, derive_seed(scene_seed, 0));
        const SimulatedScene scene = add_noise(clean, config, derive_seed(scene_seed, 1));

        DatasetEntry entry;
        entry.index = i;
        entry.seed = scene_seed;
        entry.phase_path = scene_file_name(i, "_clean.phse");
        entry.igram_path = scene_file_name(i, "_noisy.igrm");
        entry.coherence_path = scene_file_name(i, "_gamma.cohr");

        write_raster(scene.clean_phase, manifest.resolve(entry.phase_path));
        write_raster(scene.noisy, manifest.resolve(entry.igram_path));
        write_raster(scene.true_coherence, manifest.resolve(entry.coherence_path));

        lines << entry.index << ' ' << entry.seed << ' ' << entry.phase_path << ' '
              << entry.igram_path << ' ' << entry.coherence_path << '\n';
        manifest.entries.push_back(std::move(entry));
    }
    write_text_atomic((std::filesystem::path(out_dir) / "manifest.txt").string(),
                      lines.str());
    return manifest;
}

DatasetManifest read_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open manifest: " + path);
    DatasetManifest manifest;
    manifest.directory = std::filesystem::path(path).parent_path().string();
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream fields(line);
        DatasetEntry entry;
        if (!(fields >> entry.index >> entry.seed >> entry.phase_path >> entry.igram_path >>
              entry.coherence_path)) {
            std::ostringstream msg;
            msg << "malformed manifest line " << line_no << " in " << path;
            throw std::runtime_error(msg.str());
        }
        manifest.entries.push_back(std::move(entry));
    }
    return manifest;
}

}  // namespace igram
