#include "igram/raster_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

namespace igram {

namespace {

constexpr std::size_t kHeaderSize = 13;  // magic(4) + version(1) + h(4) + w(4)
constexpr std::uint8_t kFormatVersion = 1;
// Dimension guard: caps the payload around 64 GiB so h*w arithmetic can
// never overflow size_t on supported platforms.
constexpr std::uint32_t kMaxExtent = 1u << 22;

void append_u32(std::string& out, std::uint32_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
    out.push_back(static_cast<char>((v >> 16) & 0xff));
    out.push_back(static_cast<char>((v >> 24) & 0xff));
}

void append_f32(std::string& out, float f) {
    std::uint32_t bits = 0;
    std::memcpy(&bits, &f, sizeof(bits));
    append_u32(out, bits);
}

std::uint32_t parse_u32(const std::string& data, std::size_t offset) {
    return static_cast<std::uint32_t>(static_cast<unsigned char>(data[offset])) |
           (static_cast<std::uint32_t>(static_cast<unsigned char>(data[offset + 1])) << 8) |
           (static_cast<std::uint32_t>(static_cast<unsigned char>(data[offset + 2])) << 16) |
           (static_cast<std::uint32_t>(static_cast<unsigned char>(data[offset + 3])) << 24);
}

float parse_f32(const std::string& data, std::size_t offset) {
    const std::uint32_t bits = parse_u32(data, offset);
    float f = 0.0f;
    std::memcpy(&f, &bits, sizeof(f));
    return f;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw RasterIoError("cannot open file: " + path, 0);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    if (!in.good() && !in.eof()) {
        throw RasterIoError("read failure on file: " + path, 0);
    }
    return buffer.str();
}

void write_file_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    const fs::path temp = target.parent_path() /
                          (target.filename().string() + ".tmp");
    {
        std::ofstream out(temp, std::ios::binary | std::ios::trunc);
        if (!out) throw RasterIoError("cannot open for writing: " + temp.string(), 0);
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out.good()) {
            throw RasterIoError("write failure on file: " + temp.string(), 0);
        }
    }
    std::error_code ec;
    fs::rename(temp, target, ec);
    if (ec) {
        fs::remove(temp);
        throw RasterIoError("cannot move " + temp.string() + " to " + path + ": " +
                                ec.message(),
                            0);
    }
}

struct Header {
    std::string magic;
    int height = 0;
    int width = 0;
};

Header parse_header(const std::string& data, const std::string& path) {
    if (data.size() < kHeaderSize) {
        std::ostringstream msg;
        msg << path << ": expected at least " << kHeaderSize << " header bytes, got "
            << data.size();
        throw TruncatedFileError(msg.str(), data.size());
    }
    Header h;
    h.magic = data.substr(0, 4);
    if (h.magic != "IGRM" && h.magic != "COHR" && h.magic != "PHSE" && h.magic != "CNNM") {
        throw BadMagicError(path + ": unknown magic \"" + h.magic + "\"", 0);
    }
    const auto version = static_cast<std::uint8_t>(data[4]);
    if (version != kFormatVersion) {
        std::ostringstream msg;
        msg << path << ": unsupported version " << static_cast<int>(version);
        throw VersionError(msg.str(), 4);
    }
    const std::uint32_t height = parse_u32(data, 5);
    const std::uint32_t width = parse_u32(data, 9);
    if (height == 0 || height > kMaxExtent) {
        std::ostringstream msg;
        msg << path << ": height " << height << " outside [1, " << kMaxExtent << "]";
        throw DimensionError(msg.str(), 5);
    }
    if (width == 0 || width > kMaxExtent) {
        std::ostringstream msg;
        msg << path << ": width " << width << " outside [1, " << kMaxExtent << "]";
        throw DimensionError(msg.str(), 9);
    }
    h.height = static_cast<int>(height);
    h.width = static_cast<int>(width);
    return h;
}

void check_payload_size(const std::string& data, const std::string& path,
                        std::size_t values) {
    const std::size_t expected = kHeaderSize + values * 4;
    if (data.size() < expected) {
        std::ostringstream msg;
        msg << path << ": truncated payload, expected " << expected << " bytes, got "
            << data.size();
        throw TruncatedFileError(msg.str(), data.size());
    }
    if (data.size() > expected) {
        std::ostringstream msg;
        msg << path << ": " << (data.size() - expected)
            << " unexpected bytes after the payload of " << expected;
        throw TrailingBytesError(msg.str(), expected);
    }
}

std::string header_bytes(const char* magic, int height, int width) {
    std::string out;
    out.reserve(kHeaderSize);
    out.append(magic, 4);
    out.push_back(static_cast<char>(kFormatVersion));
    append_u32(out, static_cast<std::uint32_t>(height));
    append_u32(out, static_cast<std::uint32_t>(width));
    return out;
}

}  // namespace

AnyRaster read_raster(const std::string& path) {
    const std::string data = read_file(path);
    const Header h = parse_header(data, path);
    const std::size_t pixels = static_cast<std::size_t>(h.height) * h.width;
    if (h.magic == "IGRM") {
        check_payload_size(data, path, pixels * 2);
        ComplexRaster raster(h.height, h.width);
        for (std::size_t i = 0; i < pixels; ++i) {
            const float re = parse_f32(data, kHeaderSize + i * 8);
            const float im = parse_f32(data, kHeaderSize + i * 8 + 4);
            raster.samples[i] = std::complex<float>(re, im);
        }
        return raster;
    }
    if (h.magic == "COHR") {
        check_payload_size(data, path, pixels);
        CoherenceMap map(h.height, h.width);
        for (std::size_t i = 0; i < pixels; ++i) {
            const std::size_t offset = kHeaderSize + i * 4;
            const float v = parse_f32(data, offset);
            if (!(v >= 0.0f && v <= 1.0f)) {
                std::ostringstream msg;
                msg << path << ": coherence value " << v << " outside [0, 1] at byte "
                    << offset;
                throw ValueRangeError(msg.str(), offset);
            }
            map.values[i] = v;
        }
        return map;
    }
    if (h.magic == "PHSE") {
        check_payload_size(data, path, pixels);
        PhaseRaster phase(h.height, h.width);
        for (std::size_t i = 0; i < pixels; ++i) {
            phase.values[i] = parse_f32(data, kHeaderSize + i * 4);
        }
        return phase;
    }
    throw BadMagicError(path + ": \"" + h.magic + "\" is not a raster file", 0);
}

ComplexRaster read_interferogram(const std::string& path) {
    AnyRaster any = read_raster(path);
    if (auto* r = std::get_if<ComplexRaster>(&any)) return std::move(*r);
    throw BadMagicError(path + ": expected an IGRM interferogram", 0);
}

CoherenceMap read_coherence(const std::string& path) {
    AnyRaster any = read_raster(path);
    if (auto* m = std::get_if<CoherenceMap>(&any)) return std::move(*m);
    throw BadMagicError(path + ": expected a COHR coherence map", 0);
}

PhaseRaster read_phase(const std::string& path) {
    AnyRaster any = read_raster(path);
    if (auto* p = std::get_if<PhaseRaster>(&any)) return std::move(*p);
    throw BadMagicError(path + ": expected a PHSE phase raster", 0);
}

void write_raster(const ComplexRaster& raster, const std::string& path) {
    std::string out = header_bytes("IGRM", raster.height, raster.width);
    out.reserve(out.size() + raster.area() * 8);
    for (const auto& z : raster.samples) {
        append_f32(out, z.real());
        append_f32(out, z.imag());
    }
    write_file_atomic(path, out);
}

void write_raster(const CoherenceMap& map, const std::string& path) {
    std::string out = header_bytes("COHR", map.height, map.width);
    out.reserve(out.size() + map.values.size() * 4);
    for (std::size_t i = 0; i < map.values.size(); ++i) {
        const float v = map.values[i];
        if (!(v >= 0.0f && v <= 1.0f)) {
            std::ostringstream msg;
            msg << path << ": refusing to write coherence value " << v
                << " outside [0, 1] at pixel " << i;
            throw ValueRangeError(msg.str(), kHeaderSize + i * 4);
        }
        append_f32(out, v);
    }
    write_file_atomic(path, out);
}

void write_raster(const PhaseRaster& phase, const std::string& path) {
    std::string out = header_bytes("PHSE", phase.height, phase.width);
    out.reserve(out.size() + phase.values.size() * 4);
    for (float v : phase.values) append_f32(out, v);
    write_file_atomic(path, out);
}

void save_checkpoint(const LayerStack& stack, const std::string& path) {
    const std::string descriptor = stack.descriptor();
    std::string out;
    out.append("CNNM", 4);
    out.push_back(static_cast<char>(kFormatVersion));
    append_u32(out, static_cast<std::uint32_t>(descriptor.size()));
    out.append(descriptor);

    std::uint32_t conv_count = 0;
    for (const StackItem& item : stack.items) {
        if (item.kind == StackItem::Kind::Conv) ++conv_count;
    }
    append_u32(out, conv_count);
    for (const StackItem& item : stack.items) {
        if (item.kind != StackItem::Kind::Conv) continue;
        const ConvLayer& layer = item.conv;
        append_u32(out, static_cast<std::uint32_t>(layer.out_channels()));
        append_u32(out, static_cast<std::uint32_t>(layer.in_channels()));
        append_u32(out, static_cast<std::uint32_t>(layer.kernels.extent(2)));
        append_u32(out, static_cast<std::uint32_t>(layer.kernels.extent(3)));
        for (double v : layer.kernels.values) append_f32(out, static_cast<float>(v));
        for (double v : layer.bias.values) append_f32(out, static_cast<float>(v));
    }
    write_file_atomic(path, out);
}

LayerStack load_checkpoint(const std::string& path) {
    const std::string data = read_file(path);
    std::size_t cursor = 0;
    const auto need = [&](std::size_t count, const char* what) {
        if (data.size() - cursor < count) {
            std::ostringstream msg;
            msg << path << ": truncated checkpoint, expected " << count << " bytes for "
                << what << " at offset " << cursor << ", got " << (data.size() - cursor);
            throw TruncatedFileError(msg.str(), data.size());
        }
    };

    need(4, "magic");
    const std::string magic = data.substr(0, 4);
    if (magic != "CNNM") {
        throw BadMagicError(path + ": expected CNNM checkpoint, found \"" + magic + "\"", 0);
    }
    cursor = 4;
    need(1, "version");
    const auto version = static_cast<std::uint8_t>(data[cursor]);
    if (version != kFormatVersion) {
        std::ostringstream msg;
        msg << path << ": unsupported checkpoint version " << static_cast<int>(version);
        throw VersionError(msg.str(), cursor);
    }
    cursor += 1;

    need(4, "descriptor length");
    const std::uint32_t descriptor_len = parse_u32(data, cursor);
    cursor += 4;
    if (descriptor_len > (1u << 16)) {
        std::ostringstream msg;
        msg << path << ": descriptor length " << descriptor_len << " is implausible";
        throw DimensionError(msg.str(), cursor - 4);
    }
    need(descriptor_len, "descriptor");
    const std::string descriptor = data.substr(cursor, descriptor_len);
    cursor += descriptor_len;

    LayerStack stack;
    try {
        stack = LayerStack::from_descriptor(descriptor);
    } catch (const std::invalid_argument& e) {
        throw DescriptorError(path + ": " + e.what(), cursor - descriptor_len);
    }

    need(4, "layer count");
    const std::uint32_t conv_count = parse_u32(data, cursor);
    cursor += 4;
    std::uint32_t descriptor_convs = 0;
    for (const StackItem& item : stack.items) {
        if (item.kind == StackItem::Kind::Conv) ++descriptor_convs;
    }
    if (conv_count != descriptor_convs) {
        std::ostringstream msg;
        msg << path << ": layer count " << conv_count << " disagrees with descriptor ("
            << descriptor_convs << " convolutions)";
        throw DescriptorError(msg.str(), cursor - 4);
    }

    for (StackItem& item : stack.items) {
        if (item.kind != StackItem::Kind::Conv) continue;
        need(16, "layer shape");
        const std::uint32_t out_ch = parse_u32(data, cursor);
        const std::uint32_t in_ch = parse_u32(data, cursor + 4);
        const std::uint32_t kh = parse_u32(data, cursor + 8);
        const std::uint32_t kw = parse_u32(data, cursor + 12);
        if (out_ch != static_cast<std::uint32_t>(item.conv.out_channels()) ||
            in_ch != static_cast<std::uint32_t>(item.conv.in_channels()) || kh != 3 ||
            kw != 3) {
            std::ostringstream msg;
            msg << path << ": stored layer shape " << out_ch << "x" << in_ch << "x" << kh
                << "x" << kw << " disagrees with descriptor item conv"
                << item.conv.in_channels() << "-" << item.conv.out_channels();
            throw DescriptorError(msg.str(), cursor);
        }
        cursor += 16;
        const std::size_t kernel_count = item.conv.kernels.values.size();
        need(kernel_count * 4, "kernel values");
        for (std::size_t i = 0; i < kernel_count; ++i) {
            item.conv.kernels.values[i] = parse_f32(data, cursor + i * 4);
        }
        cursor += kernel_count * 4;
        const std::size_t bias_count = item.conv.bias.values.size();
        need(bias_count * 4, "bias values");
        for (std::size_t i = 0; i < bias_count; ++i) {
            item.conv.bias.values[i] = parse_f32(data, cursor + i * 4);
        }
        cursor += bias_count * 4;
    }
    if (cursor != data.size()) {
        std::ostringstream msg;
        msg << path << ": " << (data.size() - cursor)
            << " unexpected bytes after the checkpoint payload of " << cursor;
        throw TrailingBytesError(msg.str(), cursor);
    }
    return stack;
}

void write_text_atomic(const std::string& path, const std::string& content) {
    write_file_atomic(path, content);
}

std::array<std::uint8_t, 3> phase_rgb(double phi) {
    constexpr double kPi = 3.14159265358979323846;
    const double t = std::clamp((phi + kPi) / (2.0 * kPi), 0.0, 1.0);
    const double hue = 240.0 * (1.0 - t);  // blue at -pi down to red at +pi
    const double hp = hue / 60.0;
    const int sector = std::min(4, static_cast<int>(hp));  // hue <= 240 -> sector <= 4
    const double f = hp - sector;
    double r = 0.0, g = 0.0, b = 0.0;
    switch (sector) {
        case 0: r = 1.0; g = f; b = 0.0; break;
        case 1: r = 1.0 - f; g = 1.0; b = 0.0; break;
        case 2: r = 0.0; g = 1.0; b = f; break;
        case 3: r = 0.0; g = 1.0 - f; b = 1.0; break;
        default: r = f; g = 0.0; b = 1.0; break;
    }
    const auto byte = [](double v) {
        return static_cast<std::uint8_t>(std::lround(255.0 * std::clamp(v, 0.0, 1.0)));
    };
    return {byte(r), byte(g), byte(b)};
}

std::array<std::uint8_t, 3> coherence_rgb(double value) {
    const auto g = static_cast<std::uint8_t>(
        std::lround(255.0 * std::clamp(value, 0.0, 1.0)));
    return {g, g, g};
}

namespace {

std::string ppm_header(int height, int width) {
    std::ostringstream out;
    out << "P6\n" << width << ' ' << height << "\n255\n";
    return out.str();
}

}  // namespace

void render_phase_ppm(const PhaseRaster& phase, const std::string& path) {
    std::string out = ppm_header(phase.height, phase.width);
    out.reserve(out.size() + phase.values.size() * 3);
    for (float v : phase.values) {
        const auto rgb = phase_rgb(v);
        out.push_back(static_cast<char>(rgb[0]));
        out.push_back(static_cast<char>(rgb[1]));
        out.push_back(static_cast<char>(rgb[2]));
    }
    write_file_atomic(path, out);
}

void render_coherence_ppm(const CoherenceMap& map, const std::string& path) {
    std::string out = ppm_header(map.height, map.width);
    out.reserve(out.size() + map.values.size() * 3);
    for (float v : map.values) {
        const auto rgb = coherence_rgb(v);
        out.push_back(static_cast<char>(rgb[0]));
        out.push_back(static_cast<char>(rgb[1]));
        out.push_back(static_cast<char>(rgb[2]));
    }
    write_file_atomic(path, out);
}

void render_amplitude_ppm(const ComplexRaster& raster, const std::string& path) {
    double max_amp = 0.0;
    for (const auto& z : raster.samples) {
        max_amp = std::max(max_amp, static_cast<double>(std::abs(z)));
    }
    const double denom = max_amp > 0.0 ? std::log1p(max_amp) : 1.0;
    std::string out = ppm_header(raster.height, raster.width);
    out.reserve(out.size() + raster.area() * 3);
    for (const auto& z : raster.samples) {
        const double s = std::log1p(static_cast<double>(std::abs(z))) / denom;
        const auto rgb = coherence_rgb(s);
        out.push_back(static_cast<char>(rgb[0]));
        out.push_back(static_cast<char>(rgb[1]));
        out.push_back(static_cast<char>(rgb[2]));
    }
    write_file_atomic(path, out);
}

}  // namespace igram
