#include "igram/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include "igram/baselines.hpp"
#include "igram/coherence.hpp"
#include "igram/denoiser.hpp"
#include "igram/metrics.hpp"
#include "igram/raster_io.hpp"
#include "igram/rng.hpp"
#include "igram/simulator.hpp"

namespace igram {

namespace {

// Salt separating patch-extraction randomness from scene-generation seeds.
constexpr std::uint64_t kPatchSalt = 0xA110C8EDULL;

void print_epoch(int epoch, double loss) {
    std::printf("epoch %3d  loss %.8f\n", epoch + 1, loss);
    std::fflush(stdout);
}

std::vector<std::string> split_csv(const std::string& text) {
    std::vector<std::string> out;
    std::string token;
    std::istringstream in(text);
    while (std::getline(in, token, ',')) {
        if (!token.empty()) out.push_back(token);
    }
    return out;
}

struct PairEntry {
    std::string igram_path;
    std::string target_path;
};

std::vector<PairEntry> read_pair_list(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open pair list: " + path);
    const std::string dir = std::filesystem::path(path).parent_path().string();
    const auto resolve = [&dir](const std::string& p) {
        const std::filesystem::path fp(p);
        if (fp.is_absolute() || dir.empty()) return p;
        return (std::filesystem::path(dir) / fp).string();
    };
    std::vector<PairEntry> pairs;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream fields(line);
        std::string a, b;
        if (!(fields >> a >> b)) {
            std::ostringstream msg;
            msg << "malformed pair list line " << line_no << " in " << path;
            throw std::runtime_error(msg.str());
        }
        pairs.push_back({resolve(a), resolve(b)});
    }
    if (pairs.empty()) throw std::runtime_error("pair list is empty: " + path);
    return pairs;
}

void run_simulate(const SceneConfig& config, int count, std::uint64_t seed,
                  const std::string& out_dir) {
    const DatasetManifest manifest = make_dataset(count, config, seed, out_dir);
    std::printf("wrote %zu scenes to %s (manifest.txt)\n", manifest.entries.size(),
                out_dir.c_str());
}

void run_train_denoiser(const std::string& manifest_path, TrainConfig config,
                        const std::string& out_path) {
    const DatasetManifest manifest = read_manifest(manifest_path);
    if (manifest.entries.empty()) {
        throw std::runtime_error("manifest lists no scenes: " + manifest_path);
    }
    std::vector<NetTensor> patches;
    for (const DatasetEntry& entry : manifest.entries) {
        const ComplexRaster igram = read_interferogram(manifest.resolve(entry.igram_path));
        const NormalizedPair normalized = preprocess_interferogram(igram);
        std::vector<NetTensor> scene_patches = extract_patches(
            normalized, config.patch_size, config.patches_per_image,
            derive_seed(derive_seed(config.seed, kPatchSalt),
                        static_cast<std::uint64_t>(entry.index)));
        for (NetTensor& p : scene_patches) patches.push_back(std::move(p));
    }
    std::printf("training denoiser on %zu patches from %zu scenes\n", patches.size(),
                manifest.entries.size());
    const DenoiserTraining result = train_denoiser(patches, config, print_epoch);
    save_checkpoint(result.model.stack, out_path);
    std::printf("saved model to %s\n", out_path.c_str());
}

void run_denoise(const std::string& model_path, const std::string& in_path,
                 const std::string& out_path) {
    DenoiserModel model{load_checkpoint(model_path)};
    const ComplexRaster igram = read_interferogram(in_path);
    const ComplexRaster filtered = denoise(model, igram);
    write_raster(filtered, out_path);
}

void run_build_targets(const std::string& noisy_path, const std::string& model_path,
                       int window, const std::string& out_path) {
    DenoiserModel model{load_checkpoint(model_path)};
    const ComplexRaster noisy = read_interferogram(noisy_path);
    const ComplexRaster filtered = denoise(model, noisy);
    const CoherenceMap raw = raw_coherence(noisy, filtered, window);
    const LabelMap labels = chan_vese_segment(raw);
    const CoherenceMap targets = preprocess_targets(raw, labels);
    write_raster(targets, out_path);
}

void run_train_coherence(const std::string& pairs_path, CoherenceTrainConfig config,
                         const std::string& out_path) {
    const std::vector<PairEntry> pairs = read_pair_list(pairs_path);
    std::vector<NetTensor> inputs;
    std::vector<NetTensor> targets;
    int index = 0;
    for (const PairEntry& pair : pairs) {
        const ComplexRaster igram = read_interferogram(pair.igram_path);
        const CoherenceMap target = read_coherence(pair.target_path);
        const NormalizedPair normalized = preprocess_interferogram(igram);
        extract_patch_pairs(normalized, target, config.patch_size,
                            config.patches_per_image,
                            derive_seed(derive_seed(config.seed, kPatchSalt),
                                        static_cast<std::uint64_t>(index)),
                            inputs, targets);
        ++index;
    }
    std::printf("training coherence CNN on %zu patch pairs from %zu scenes\n",
                inputs.size(), pairs.size());
    const CoherenceTraining result = train_coherence(inputs, targets, config, print_epoch);
    save_checkpoint(result.model.stack, out_path);
    std::printf("saved model to %s\n", out_path.c_str());
}

void run_estimate_coherence(const std::string& model_path, const std::string& in_path,
                            const std::string& out_path) {
    CoherenceModel model;
    model.stack = load_checkpoint(model_path);
    const ComplexRaster igram = read_interferogram(in_path);
    const CoherenceMap map = estimate_coherence(model, igram);
    write_raster(map, out_path);
}

void run_evaluate(const std::string& manifest_path, const std::string& methods_csv,
                  const std::string& report_path, const std::string& denoiser_path,
                  const std::string& coherence_path, int boxcar_window,
                  double goldstein_alpha, int coherence_window) {
    const DatasetManifest manifest = read_manifest(manifest_path);
    if (manifest.entries.empty()) {
        throw std::runtime_error("manifest lists no scenes: " + manifest_path);
    }
    const std::vector<std::string> methods = split_csv(methods_csv);
    if (methods.empty()) throw std::runtime_error("no evaluation methods given");
    for (const std::string& m : methods) {
        if (m != "noisy" && m != "boxcar" && m != "goldstein" && m != "cnn") {
            throw std::runtime_error("unknown evaluation method: " + m);
        }
    }
    const bool wants_cnn =
        std::find(methods.begin(), methods.end(), "cnn") != methods.end();
    DenoiserModel denoiser_model;
    CoherenceModel coherence_model;
    if (wants_cnn) {
        if (denoiser_path.empty() || coherence_path.empty()) {
            throw std::runtime_error(
                "method cnn needs --denoiser and --coherence model paths");
        }
        denoiser_model.stack = load_checkpoint(denoiser_path);
        coherence_model.stack = load_checkpoint(coherence_path);
    }

    EvalReport report;
    for (const DatasetEntry& entry : manifest.entries) {
        const ComplexRaster noisy = read_interferogram(manifest.resolve(entry.igram_path));
        const PhaseRaster clean = read_phase(manifest.resolve(entry.phase_path));
        const CoherenceMap gamma = read_coherence(manifest.resolve(entry.coherence_path));

        for (const std::string& method : methods) {
            ComplexRaster filtered;
            CoherenceMap est_coherence;
            const double seconds = time_stage([&] {
                if (method == "noisy") {
                    filtered = noisy;
                } else if (method == "boxcar") {
                    filtered = boxcar_filter(noisy, boxcar_window);
                } else if (method == "goldstein") {
                    GoldsteinParams params;
                    params.alpha = goldstein_alpha;
                    filtered = goldstein_filter(noisy, params);
                } else {
                    filtered = denoise(denoiser_model, noisy);
                }
                if (method == "cnn") {
                    est_coherence = estimate_coherence(coherence_model, noisy);
                } else {
                    est_coherence = raw_coherence(noisy, filtered, coherence_window);
                }
            });
            EvalRow row;
            row.scene = entry.index;
            row.method = method;
            row.phce_value = phce(phase_of(filtered), clean);
            row.cmse_value = cmse(est_coherence, gamma);
            row.seconds = seconds;
            report.rows.push_back(std::move(row));
        }
    }
    std::ostringstream note;
    note << "classical methods score the " << coherence_window
         << "x" << coherence_window
         << " windowed coherence between noisy and filtered rasters; cnn scores its own "
            "estimate";
    report.notes.push_back(note.str());
    if (!report_path.empty()) report.write_csv(report_path);
    std::fputs(report.table().c_str(), stdout);
    if (!report_path.empty()) std::printf("report written to %s\n", report_path.c_str());
}

void run_filter_boxcar(const std::string& in_path, const std::string& out_path, int window) {
    const ComplexRaster igram = read_interferogram(in_path);
    write_raster(boxcar_filter(igram, window), out_path);
}

void run_filter_goldstein(const std::string& in_path, const std::string& out_path,
                          const GoldsteinParams& params) {
    const ComplexRaster igram = read_interferogram(in_path);
    write_raster(goldstein_filter(igram, params), out_path);
}

void run_render(const std::string& in_path, const std::string& mode,
                const std::string& out_path) {
    const AnyRaster raster = read_raster(in_path);
    if (mode == "phase") {
        if (const auto* p = std::get_if<PhaseRaster>(&raster)) {
            render_phase_ppm(*p, out_path);
            return;
        }
        if (const auto* z = std::get_if<ComplexRaster>(&raster)) {
            render_phase_ppm(phase_of(*z), out_path);
            return;
        }
        throw std::runtime_error("phase rendering needs a PHSE or IGRM input");
    }
    if (mode == "coherence") {
        if (const auto* m = std::get_if<CoherenceMap>(&raster)) {
            render_coherence_ppm(*m, out_path);
            return;
        }
        throw std::runtime_error("coherence rendering needs a COHR input");
    }
    if (mode == "amplitude") {
        if (const auto* z = std::get_if<ComplexRaster>(&raster)) {
            render_amplitude_ppm(*z, out_path);
            return;
        }
        throw std::runtime_error("amplitude rendering needs an IGRM input");
    }
    throw std::runtime_error("unknown render mode: " + mode);
}

}  // namespace

int cli_dispatch(const std::vector<std::string>& args) {
    CLI::App app{"InSAR interferogram denoising and coherence estimation pipeline"};
    app.require_subcommand(1);
    std::function<void()> action;

    // simulate
    {
        auto* cmd = app.add_subcommand("simulate", "Generate a synthetic scene dataset");
        auto config = std::make_shared<SceneConfig>();
        auto count = std::make_shared<int>(20);
        auto seed = std::make_shared<std::uint64_t>(1);
        auto out = std::make_shared<std::string>();
        auto size = std::make_shared<int>(256);
        cmd->add_option("--count", *count, "Number of scenes")->check(CLI::PositiveNumber);
        cmd->add_option("--seed", *seed, "Master seed");
        cmd->add_option("--out", *out, "Output directory")->required();
        cmd->add_option("--size", *size, "Scene height and width");
        cmd->add_option("--sigma-min", config->sigma_min, "Noise sigma lower bound");
        cmd->add_option("--sigma-max", config->sigma_max, "Noise sigma upper bound");
        cmd->add_option("--sigma-grid", config->sigma_grid_step,
                        "Sigma field coarse-grid spacing");
        cmd->add_option("--bubbles-min", config->bubbles_min, "Minimum bubble count");
        cmd->add_option("--bubbles-max", config->bubbles_max, "Maximum bubble count");
        cmd->add_option("--roads-max", config->roads_max, "Maximum road count");
        cmd->add_option("--buildings-max", config->buildings_max, "Maximum building count");
        cmd->callback([config, count, seed, out, size, &action] {
            action = [=] {
                SceneConfig c = *config;
                c.height = *size;
                c.width = *size;
                c.seed = *seed;
                run_simulate(c, *count, *seed, *out);
            };
        });
    }

    // train-denoiser
    {
        auto* cmd = app.add_subcommand("train-denoiser",
                                       "Train the denoising autoencoder on a dataset");
        auto config = std::make_shared<TrainConfig>();
        auto data = std::make_shared<std::string>();
        auto out = std::make_shared<std::string>();
        cmd->add_option("--data", *data, "Dataset manifest path")->required();
        cmd->add_option("--patch-size", config->patch_size, "Square patch size")
            ->capture_default_str();
        cmd->add_option("--patches-per-image", config->patches_per_image,
                        "Patches sampled per scene")
            ->capture_default_str();
        cmd->add_option("--epochs", config->epochs, "Training epochs")
            ->capture_default_str();
        cmd->add_option("--batch", config->batch_size, "Minibatch size")
            ->capture_default_str();
        cmd->add_option("--seed", config->seed, "Training seed");
        cmd->add_option("--out", *out, "Checkpoint output path")->required();
        cmd->callback([config, data, out, &action] {
            action = [=] { run_train_denoiser(*data, *config, *out); };
        });
    }

    // denoise
    {
        auto* cmd = app.add_subcommand("denoise", "Denoise an interferogram");
        auto model = std::make_shared<std::string>();
        auto in = std::make_shared<std::string>();
        auto out = std::make_shared<std::string>();
        cmd->add_option("--model", *model, "Denoiser checkpoint")->required();
        cmd->add_option("--in", *in, "Input IGRM file")->required();
        cmd->add_option("--out", *out, "Output IGRM file")->required();
        cmd->callback([model, in, out, &action] {
            action = [=] { run_denoise(*model, *in, *out); };
        });
    }

    // build-targets
    {
        auto* cmd = app.add_subcommand(
            "build-targets", "Build coherence training targets from a noisy interferogram");
        auto noisy = std::make_shared<std::string>();
        auto model = std::make_shared<std::string>();
        auto window = std::make_shared<int>(11);
        auto out = std::make_shared<std::string>();
        cmd->add_option("--noisy", *noisy, "Noisy IGRM file")->required();
        cmd->add_option("--model", *model, "Denoiser checkpoint")->required();
        cmd->add_option("--window", *window, "Coherence window (odd)")
            ->capture_default_str();
        cmd->add_option("--out", *out, "Output COHR file")->required();
        cmd->callback([noisy, model, window, out, &action] {
            action = [=] { run_build_targets(*noisy, *model, *window, *out); };
        });
    }

    // train-coherence
    {
        auto* cmd = app.add_subcommand("train-coherence",
                                       "Train the coherence CNN on (IGRM, COHR) pairs");
        auto config = std::make_shared<CoherenceTrainConfig>();
        auto pairs = std::make_shared<std::string>();
        auto out = std::make_shared<std::string>();
        cmd->add_option("--pairs", *pairs,
                        "Text file: one '<igrm> <cohr>' pair per line")
            ->required();
        cmd->add_option("--patch-size", config->patch_size, "Square patch size")
            ->capture_default_str();
        cmd->add_option("--patches-per-image", config->patches_per_image,
                        "Patch pairs sampled per scene")
            ->capture_default_str();
        cmd->add_option("--epochs", config->epochs, "Training epochs")
            ->capture_default_str();
        cmd->add_option("--batch", config->batch_size, "Minibatch size")
            ->capture_default_str();
        cmd->add_option("--lambda", config->lambda, "Weight-std penalty weight")
            ->capture_default_str();
        cmd->add_option("--seed", config->seed, "Training seed");
        cmd->add_option("--out", *out, "Checkpoint output path")->required();
        cmd->callback([config, pairs, out, &action] {
            action = [=] { run_train_coherence(*pairs, *config, *out); };
        });
    }

    // estimate-coherence
    {
        auto* cmd = app.add_subcommand("estimate-coherence",
                                       "Estimate coherence with a trained CNN");
        auto model = std::make_shared<std::string>();
        auto in = std::make_shared<std::string>();
        auto out = std::make_shared<std::string>();
        cmd->add_option("--model", *model, "Coherence checkpoint")->required();
        cmd->add_option("--in", *in, "Input IGRM file")->required();
        cmd->add_option("--out", *out, "Output COHR file")->required();
        cmd->callback([model, in, out, &action] {
            action = [=] { run_estimate_coherence(*model, *in, *out); };
        });
    }

    // filter-boxcar
    {
        auto* cmd = app.add_subcommand("filter-boxcar", "Boxcar moving-average filter");
        auto in = std::make_shared<std::string>();
        auto out = std::make_shared<std::string>();
        auto window = std::make_shared<int>(3);
        cmd->add_option("--in", *in, "Input IGRM file")->required();
        cmd->add_option("--out", *out, "Output IGRM file")->required();
        cmd->add_option("--window", *window, "Odd window size")->capture_default_str();
        cmd->callback([in, out, window, &action] {
            action = [=] { run_filter_boxcar(*in, *out, *window); };
        });
    }

    // filter-goldstein
    {
        auto* cmd = app.add_subcommand("filter-goldstein", "Goldstein spectral filter");
        auto in = std::make_shared<std::string>();
        auto out = std::make_shared<std::string>();
        auto params = std::make_shared<GoldsteinParams>();
        cmd->add_option("--in", *in, "Input IGRM file")->required();
        cmd->add_option("--out", *out, "Output IGRM file")->required();
        cmd->add_option("--alpha", params->alpha, "Spectrum exponent")
            ->capture_default_str();
        cmd->add_option("--patch", params->patch_size, "Patch size (power of two)")
            ->capture_default_str();
        cmd->add_option("--overlap", params->overlap, "Patch overlap")
            ->capture_default_str();
        cmd->add_option("--smooth", params->smooth_kernel, "Spectrum smoothing kernel")
            ->capture_default_str();
        cmd->callback([in, out, params, &action] {
            action = [=] { run_filter_goldstein(*in, *out, *params); };
        });
    }

    // evaluate
    {
        auto* cmd = app.add_subcommand("evaluate",
                                       "Score methods on a dataset (phce, cmse, timing)");
        auto manifest = std::make_shared<std::string>();
        auto methods = std::make_shared<std::string>("noisy,boxcar,goldstein");
        auto report = std::make_shared<std::string>();
        auto denoiser = std::make_shared<std::string>();
        auto coherence = std::make_shared<std::string>();
        auto boxcar_window = std::make_shared<int>(3);
        auto alpha = std::make_shared<double>(0.5);
        auto window = std::make_shared<int>(11);
        cmd->add_option("--manifest", *manifest, "Dataset manifest path")->required();
        cmd->add_option("--methods", *methods,
                        "Comma list from {noisy,boxcar,goldstein,cnn}")
            ->capture_default_str();
        cmd->add_option("--report", *report, "CSV output path");
        cmd->add_option("--denoiser", *denoiser, "Denoiser checkpoint (for cnn)");
        cmd->add_option("--coherence", *coherence, "Coherence checkpoint (for cnn)");
        cmd->add_option("--boxcar-window", *boxcar_window, "Boxcar window")
            ->capture_default_str();
        cmd->add_option("--alpha", *alpha, "Goldstein alpha")->capture_default_str();
        cmd->add_option("--window", *window, "Coherence scoring window")
            ->capture_default_str();
        cmd->callback([=, &action] {
            action = [=] {
                run_evaluate(*manifest, *methods, *report, *denoiser, *coherence,
                             *boxcar_window, *alpha, *window);
            };
        });
    }

    // render
    {
        auto* cmd = app.add_subcommand("render", "Render a raster file to PPM");
        auto in = std::make_shared<std::string>();
        auto mode = std::make_shared<std::string>("phase");
        auto out = std::make_shared<std::string>();
        cmd->add_option("--in", *in, "Input raster file")->required();
        cmd->add_option("--mode", *mode, "phase | coherence | amplitude")
            ->capture_default_str();
        cmd->add_option("--out", *out, "Output PPM path")->required();
        cmd->callback([in, mode, out, &action] {
            action = [=] { run_render(*in, *mode, *out); };
        });
    }

    std::vector<const char*> argv;
    argv.reserve(args.size() + 1);
    argv.push_back("igram");
    for (const std::string& a : args) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);  // prints help, returns 0
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);  // prints the error and usage hint to stderr
        return 2;
    }

    try {
        if (action) action();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

}  // namespace igram
