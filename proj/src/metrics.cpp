#include "igram/metrics.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "igram/raster_io.hpp"

namespace igram {

double phce(const PhaseRaster& estimated, const PhaseRaster& truth) {
    if (estimated.height != truth.height || estimated.width != truth.width) {
        throw std::invalid_argument("phce rasters must have equal dimensions");
    }
    const std::size_t n = estimated.values.size();
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sum += std::cos(static_cast<double>(estimated.values[i]) -
                        static_cast<double>(truth.values[i]));
    }
    return sum / static_cast<double>(n);
}

double cmse(const CoherenceMap& estimated, const CoherenceMap& truth) {
    if (estimated.height != truth.height || estimated.width != truth.width) {
        throw std::invalid_argument("cmse maps must have equal dimensions");
    }
    const std::size_t n = estimated.values.size();
    double mean_e = 0.0;
    double mean_t = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mean_e += estimated.values[i];
        mean_t += truth.values[i];
    }
    mean_e /= static_cast<double>(n);
    mean_t /= static_cast<double>(n);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = (estimated.values[i] - mean_e) - (truth.values[i] - mean_t);
        sum += d * d;
    }
    return sum / static_cast<double>(n);
}

double time_stage(const std::function<void()>& stage) {
    const auto start = std::chrono::steady_clock::now();
    stage();
    const auto stop = std::chrono::steady_clock::now();
    return std::chrono::duration<double>(stop - start).count();
}

std::vector<MethodAggregate> EvalReport::aggregates() const {
    std::vector<MethodAggregate> out;
    for (const EvalRow& row : rows) {
        auto it = std::find_if(out.begin(), out.end(), [&](const MethodAggregate& a) {
            return a.method == row.method;
        });
        if (it == out.end()) {
            out.push_back(MethodAggregate{row.method, 0, 0.0, 0.0, 0.0});
            it = out.end() - 1;
        }
        it->scenes += 1;
        it->mean_phce += row.phce_value;
        it->mean_cmse += row.cmse_value;
        it->total_seconds += row.seconds;
    }
    for (MethodAggregate& a : out) {
        if (a.scenes > 0) {
            a.mean_phce /= a.scenes;
            a.mean_cmse /= a.scenes;
        }
    }
    return out;
}

std::string EvalReport::csv() const {
    std::ostringstream out;
    out << "scene,method,phce,cmse,seconds\n";
    out << std::setprecision(9);
    for (const EvalRow& row : rows) {
        out << row.scene << ',' << row.method << ',' << row.phce_value << ','
            << row.cmse_value << ',' << row.seconds << '\n';
    }
    return out.str();
}

std::string EvalReport::table() const {
    std::ostringstream out;
    out << std::left << std::setw(12) << "method" << std::right << std::setw(8) << "scenes"
        << std::setw(12) << "phce" << std::setw(12) << "cmse" << std::setw(12) << "seconds"
        << '\n';
    out << std::string(56, '-') << '\n';
    out << std::fixed << std::setprecision(4);
    for (const MethodAggregate& a : aggregates()) {
        out << std::left << std::setw(12) << a.method << std::right << std::setw(8)
            << a.scenes << std::setw(12) << a.mean_phce << std::setw(12) << a.mean_cmse
            << std::setw(12) << a.total_seconds << '\n';
    }
    for (const std::string& note : notes) out << "note: " << note << '\n';
    return out.str();
}

void EvalReport::write_csv(const std::string& path) const {
    write_text_atomic(path, csv());
}

}  // namespace igram
