#pragma once

#include <functional>
#include <string>
#include <vector>

#include "igram/raster.hpp"

namespace igram {

// Mean of cos(phase error). Differences are implicitly wrapped to (-pi, pi]:
// cosine is even and 2*pi periodic, so cos(wrap(d)) == cos(d). 1 is perfect.
double phce(const PhaseRaster& estimated, const PhaseRaster& truth);

// Coherence mean squared error: each map is centered by subtracting its own
// mean, then the mean squared difference is taken. 0 is perfect.
double cmse(const CoherenceMap& estimated, const CoherenceMap& truth);

// Wall-clock seconds of the enclosed stage on a monotonic clock.
double time_stage(const std::function<void()>& stage);

struct EvalRow {
    int scene = 0;
    std::string method;
    double phce_value = 0.0;
    double cmse_value = 0.0;
    double seconds = 0.0;
};

struct MethodAggregate {
    std::string method;
    int scenes = 0;
    double mean_phce = 0.0;
    double mean_cmse = 0.0;
    double total_seconds = 0.0;
};

struct EvalReport {
    std::vector<EvalRow> rows;
    std::vector<std::string> notes;

    std::vector<MethodAggregate> aggregates() const;  // method order of first appearance
    std::string csv() const;   // header: scene,method,phce,cmse,seconds
    std::string table() const;  // aligned per-method summary plus notes
    void write_csv(const std::string& path) const;
};

}  // namespace igram
