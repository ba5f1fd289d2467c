#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <variant>

#include "igram/net.hpp"
#include "igram/raster.hpp"

namespace igram {

// Base class for file-format failures; byte_offset locates the problem
// within the file (0 when it concerns the file as a whole).
class RasterIoError : public std::runtime_error {
public:
    RasterIoError(const std::string& message, std::size_t byte_offset)
        : std::runtime_error(message), offset_(byte_offset) {}
    std::size_t byte_offset() const { return offset_; }

private:
    std::size_t offset_;
};

// The four-byte magic is unknown or does not match the expected type.
class BadMagicError : public RasterIoError {
    using RasterIoError::RasterIoError;
};

// The format version byte is unsupported.
class VersionError : public RasterIoError {
    using RasterIoError::RasterIoError;
};

// The file ends before the declared payload does; the message names the
// expected and actual byte counts.
class TruncatedFileError : public RasterIoError {
    using RasterIoError::RasterIoError;
};

// The file continues past the declared payload.
class TrailingBytesError : public RasterIoError {
    using RasterIoError::RasterIoError;
};

// Header dimensions are zero or too large to represent safely.
class DimensionError : public RasterIoError {
    using RasterIoError::RasterIoError;
};

// A stored value violates the type's invariant (e.g. coherence outside
// [0, 1]); the offset points at the offending value.
class ValueRangeError : public RasterIoError {
    using RasterIoError::RasterIoError;
};

// A checkpoint's descriptor and stored layer shapes disagree.
class DescriptorError : public RasterIoError {
    using RasterIoError::RasterIoError;
};

using AnyRaster = std::variant<ComplexRaster, CoherenceMap, PhaseRaster>;

// Reads any raster file; the magic selects the returned alternative
// ("IGRM" -> ComplexRaster, "COHR" -> CoherenceMap, "PHSE" -> PhaseRaster).
AnyRaster read_raster(const std::string& path);

// Typed readers: fail with BadMagicError when the file holds another type.
ComplexRaster read_interferogram(const std::string& path);
CoherenceMap read_coherence(const std::string& path);
PhaseRaster read_phase(const std::string& path);

// Writers serialize little-endian f32 payloads and replace the target file
// atomically (write to a temporary, then rename).
void write_raster(const ComplexRaster& raster, const std::string& path);
void write_raster(const CoherenceMap& map, const std::string& path);
void write_raster(const PhaseRaster& phase, const std::string& path);

// Model checkpoints: magic "CNNM", version, the architecture descriptor
// (see LayerStack::descriptor), and per-conv-layer shapes and f32 weights.
void save_checkpoint(const LayerStack& stack, const std::string& path);
LayerStack load_checkpoint(const std::string& path);

// Atomic small-text writer shared by manifest/report emitters.
void write_text_atomic(const std::string& path, const std::string& content);

// Colormap helpers (exposed for byte-level tests).
// Phase: hue sweep 240 deg (blue, -pi) -> 0 deg (red, +pi), full S/V.
std::array<std::uint8_t, 3> phase_rgb(double phi);
// Coherence: linear grayscale, 0 -> black, 1 -> white.
std::array<std::uint8_t, 3> coherence_rgb(double value);

// P6 PPM renderers.
void render_phase_ppm(const PhaseRaster& phase, const std::string& path);
void render_coherence_ppm(const CoherenceMap& map, const std::string& path);
// Amplitude: log1p-scaled grayscale relative to the maximum amplitude.
void render_amplitude_ppm(const ComplexRaster& raster, const std::string& path);

}  // namespace igram
