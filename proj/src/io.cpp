#include "risp/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "risp/bayer.hpp"
#include "risp/error.hpp"
#include "risp/rng.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace risp {

namespace {

constexpr char kRawMagic[4] = {'R', 'A', 'W', '2'};
constexpr std::size_t kRawHeaderSize = 16;  // magic + three uint32 fields

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v & 0xff));
    out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xff));
    out.push_back(static_cast<std::uint8_t>((v >> 16) & 0xff));
    out.push_back(static_cast<std::uint8_t>((v >> 24) & 0xff));
}

std::uint32_t get_u32(const std::uint8_t* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::vector<std::uint8_t> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    if (in.bad()) throw IoError("read failed on " + path);
    return bytes;
}

void write_file(const std::string& path, const void* data, std::size_t size) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot create " + path);
    out.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
    if (!out) throw IoError("write failed on " + path);
}

json parse_json_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError(path + ": " + e.what());
    }
}

void write_json_file(const std::string& path, const json& j) {
    const std::string text = j.dump(2) + "\n";
    write_file(path, text.data(), text.size());
}

double require_number(const json& j, const std::string& key, const std::string& what) {
    if (!j.contains(key)) throw ParseError(what + ": missing key '" + key + "'");
    if (!j.at(key).is_number()) throw ParseError(what + ": key '" + key + "' is not a number");
    return j.at(key).get<double>();
}

std::string require_string(const json& j, const std::string& key, const std::string& what) {
    if (!j.contains(key)) throw ParseError(what + ": missing key '" + key + "'");
    if (!j.at(key).is_string()) throw ParseError(what + ": key '" + key + "' is not a string");
    return j.at(key).get<std::string>();
}

std::vector<double> require_numbers(const json& j, const std::string& key, std::size_t arity,
                                    const std::string& what) {
    if (!j.contains(key)) throw ParseError(what + ": missing key '" + key + "'");
    const json& a = j.at(key);
    if (!a.is_array() || a.size() != arity) {
        throw ParseError(what + ": key '" + key + "' needs " + std::to_string(arity) +
                         " numbers");
    }
    std::vector<double> out;
    out.reserve(arity);
    for (const json& v : a) {
        if (!v.is_number()) throw ParseError(what + ": key '" + key + "' is not all numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

}  // namespace

// --- raw16 ----------------------------------------------------------------

std::vector<std::uint8_t> raw16_encode(const PackedRaw& raw) {
    std::vector<std::uint8_t> out;
    const std::size_t count = raw.samples.size();
    out.reserve(kRawHeaderSize + 2 * count);
    out.insert(out.end(), kRawMagic, kRawMagic + 4);
    put_u32(out, static_cast<std::uint32_t>(raw.height));
    put_u32(out, static_cast<std::uint32_t>(raw.width));
    put_u32(out, PackedRaw::kChannels);
    for (double v : raw.samples) {
        const double clamped = std::min(std::max(v, 0.0), 1.0);
        const auto code = static_cast<std::uint16_t>(std::lround(clamped * 4095.0));
        out.push_back(static_cast<std::uint8_t>(code & 0xff));
        out.push_back(static_cast<std::uint8_t>(code >> 8));
    }
    return out;
}

PackedRaw raw16_decode(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < kRawHeaderSize) throw ParseError("raw16: truncated header");
    if (!std::equal(kRawMagic, kRawMagic + 4, bytes.begin())) {
        throw ParseError("raw16: bad magic");
    }
    const std::uint32_t height = get_u32(bytes.data() + 4);
    const std::uint32_t width = get_u32(bytes.data() + 8);
    const std::uint32_t channels = get_u32(bytes.data() + 12);
    if (channels != PackedRaw::kChannels) {
        throw ParseError("raw16: channels must be 4, got " + std::to_string(channels));
    }
    if (height == 0 || width == 0) throw ParseError("raw16: zero dimension");
    const std::uint64_t count =
        static_cast<std::uint64_t>(height) * width * PackedRaw::kChannels;
    if (bytes.size() < kRawHeaderSize + 2 * count) throw ParseError("raw16: truncated payload");
    if (bytes.size() > kRawHeaderSize + 2 * count) throw ParseError("raw16: trailing bytes");

    PackedRaw raw = PackedRaw::zeros(static_cast<int>(height), static_cast<int>(width));
    const std::uint8_t* p = bytes.data() + kRawHeaderSize;
    for (std::uint64_t i = 0; i < count; ++i) {
        const std::uint16_t code =
            static_cast<std::uint16_t>(p[2 * i]) | (static_cast<std::uint16_t>(p[2 * i + 1]) << 8);
        if (code > 4095) {
            throw ParseError("raw16: code out of range: " + std::to_string(code));
        }
        raw.samples[i] = code / 4095.0;
    }
    return raw;
}

void save_raw16(const std::string& path, const PackedRaw& raw) {
    const std::vector<std::uint8_t> bytes = raw16_encode(raw);
    write_file(path, bytes.data(), bytes.size());
}

PackedRaw load_raw16(const std::string& path) {
    try {
        return raw16_decode(read_file(path));
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    }
}

// --- PPM -------------------------------------------------------------------

void save_ppm(const std::string& path, const RgbImage& image) {
    std::string out = "P6\n" + std::to_string(image.width) + " " + std::to_string(image.height) +
                      "\n255\n";
    out.reserve(out.size() + image.samples.size());
    for (double v : image.samples) {
        const double clamped = std::min(std::max(v, 0.0), 1.0);
        out.push_back(static_cast<char>(static_cast<std::uint8_t>(std::lround(clamped * 255.0))));
    }
    write_file(path, out.data(), out.size());
}

namespace {

// Reads one whitespace-delimited PPM header token, honoring '#' comments.
std::string ppm_token(const std::vector<std::uint8_t>& bytes, std::size_t& pos) {
    while (pos < bytes.size()) {
        if (std::isspace(bytes[pos])) {
            ++pos;
        } else if (bytes[pos] == '#') {
            while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
        } else {
            break;
        }
    }
    std::string token;
    while (pos < bytes.size() && !std::isspace(bytes[pos]) && bytes[pos] != '#') {
        token.push_back(static_cast<char>(bytes[pos++]));
    }
    if (token.empty()) throw ParseError("ppm: truncated header");
    return token;
}

int ppm_int(const std::vector<std::uint8_t>& bytes, std::size_t& pos) {
    const std::string token = ppm_token(bytes, pos);
    try {
        std::size_t used = 0;
        const int value = std::stoi(token, &used);
        if (used != token.size()) throw std::invalid_argument(token);
        return value;
    } catch (const std::exception&) {
        throw ParseError("ppm: bad header number '" + token + "'");
    }
}

}  // namespace

RgbImage load_ppm(const std::string& path) {
    const std::vector<std::uint8_t> bytes = read_file(path);
    try {
        std::size_t pos = 0;
        if (ppm_token(bytes, pos) != "P6") throw ParseError("ppm: not a binary PPM (P6)");
        const int width = ppm_int(bytes, pos);
        const int height = ppm_int(bytes, pos);
        const int maxval = ppm_int(bytes, pos);
        if (maxval != 255) {
            throw ParseError("ppm: unsupported bit depth (maxval " + std::to_string(maxval) +
                             ")");
        }
        if (pos >= bytes.size() || !std::isspace(bytes[pos])) {
            throw ParseError("ppm: missing separator before payload");
        }
        ++pos;  // exactly one whitespace byte separates header and payload
        if (width <= 0 || height <= 0) throw ParseError("ppm: zero dimension");
        const std::uint64_t count = static_cast<std::uint64_t>(width) * height * 3;
        if (bytes.size() - pos < count) throw ParseError("ppm: truncated payload");
        RgbImage image = RgbImage::zeros(height, width);
        for (std::uint64_t i = 0; i < count; ++i) image.samples[i] = bytes[pos + i] / 255.0;
        return image;
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    }
}

// --- metadata ----------------------------------------------------------------

IspMetadata load_metadata(const std::string& path) {
    const json j = parse_json_file(path);
    if (!j.is_object()) throw ParseError(path + ": metadata: not an object");
    IspMetadata meta;
    try {
        const std::vector<double> wb = require_numbers(j, "wb_gains", 3, "metadata");
        const std::vector<double> ccm = require_numbers(j, "ccm", 9, "metadata");
        std::copy(wb.begin(), wb.end(), meta.wb_gains.begin());
        std::copy(ccm.begin(), ccm.end(), meta.ccm.begin());
        meta.black_level = static_cast<int>(require_number(j, "black_level", "metadata"));
        meta.white_level = static_cast<int>(require_number(j, "white_level", "metadata"));
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    }
    meta.validate();
    return meta;
}

void save_metadata(const std::string& path, const IspMetadata& meta) {
    meta.validate();
    json j;
    j["wb_gains"] = meta.wb_gains;
    j["ccm"] = meta.ccm;
    j["black_level"] = meta.black_level;
    j["white_level"] = meta.white_level;
    write_json_file(path, j);
}

// --- model files ---------------------------------------------------------------

void save_model(const std::string& path, const ReverseModel& model) {
    model.validate();
    json j;
    j["format_version"] = 1;
    j["type"] = "gamma-mixture";
    j["gammas"] = model.gammas;
    j["weights"] = model.weights;
    json maps = json::array();
    for (const AffineColorMap& m : model.maps) {
        json entry;
        entry["a"] = m.a;
        entry["b"] = m.b;
        maps.push_back(std::move(entry));
    }
    j["maps"] = std::move(maps);
    write_json_file(path, j);
}

void save_model(const std::string& path, const ColorTransform& transform) {
    transform.validate();
    json j;
    j["format_version"] = 1;
    j["type"] = "global-matrix";
    j["m"] = transform.m;
    write_json_file(path, j);
}

ModelFile load_model(const std::string& path) {
    const json j = parse_json_file(path);
    ModelFile file;
    try {
        if (!j.is_object()) throw ParseError("model: not an object");
        const double version = require_number(j, "format_version", "model");
        if (version != 1) {
            throw ParseError("model: unsupported format_version " + std::to_string(version));
        }
        file.format_version = 1;
        file.type = require_string(j, "type", "model");
        if (file.type == "gamma-mixture") {
            if (!j.contains("gammas") || !j.at("gammas").is_array()) {
                throw ParseError("model: missing key 'gammas'");
            }
            const std::size_t k = j.at("gammas").size();
            file.mixture.gammas = require_numbers(j, "gammas", k, "model");
            file.mixture.weights = require_numbers(j, "weights", k, "model");
            if (!j.contains("maps") || !j.at("maps").is_array() || j.at("maps").size() != k) {
                throw ParseError("model: key 'maps' needs one entry per gamma");
            }
            file.mixture.maps.clear();
            for (const json& entry : j.at("maps")) {
                AffineColorMap map;
                const std::vector<double> a = require_numbers(entry, "a", 9, "model map");
                const std::vector<double> b = require_numbers(entry, "b", 3, "model map");
                std::copy(a.begin(), a.end(), map.a.begin());
                std::copy(b.begin(), b.end(), map.b.begin());
                file.mixture.maps.push_back(map);
            }
            file.mixture.validate();
        } else if (file.type == "global-matrix") {
            const std::vector<double> m = require_numbers(j, "m", 9, "model");
            std::copy(m.begin(), m.end(), file.transform.m.begin());
            file.transform.validate();
        } else {
            throw ParseError("model: unknown type '" + file.type + "'");
        }
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    }
    return file;
}

// --- manifest --------------------------------------------------------------------

const char* device_name(Device d) {
    switch (d) {
        case Device::iPhoneX: return "iPhoneX";
        case Device::SamsungS9: return "SamsungS9";
        case Device::SamsungS21: return "SamsungS21";
        case Device::VivoX90: return "VivoX90";
        case Device::Other: return "Other";
    }
    return "Other";
}

bool default_group(Device d, Group* out) {
    switch (d) {
        case Device::iPhoneX:
        case Device::SamsungS9:
            *out = Group::target;
            return true;
        case Device::SamsungS21:
        case Device::VivoX90:
            *out = Group::oof;
            return true;
        case Device::Other:
            return false;
    }
    return false;
}

const char* group_name(Group g) { return g == Group::target ? "target" : "oof"; }

Group parse_group(const std::string& name) {
    if (name == "target") return Group::target;
    if (name == "oof") return Group::oof;
    throw ParseError("manifest: unknown group '" + name + "'");
}

namespace {

Device parse_device(const std::string& name) {
    if (name == "iPhoneX") return Device::iPhoneX;
    if (name == "SamsungS9") return Device::SamsungS9;
    if (name == "SamsungS21") return Device::SamsungS21;
    if (name == "VivoX90") return Device::VivoX90;
    return Device::Other;
}

std::string join_under(const std::string& base, const std::string& rel) {
    if (rel.empty()) return "";
    fs::path p(rel);
    if (p.is_absolute()) return rel;
    return (fs::path(base) / p).string();
}

}  // namespace

std::string Manifest::rgb_file(const DevicePair& e) const { return join_under(base_dir, e.rgb_path); }
std::string Manifest::raw_file(const DevicePair& e) const { return join_under(base_dir, e.raw_path); }
std::string Manifest::meta_file(const DevicePair& e) const {
    return join_under(base_dir, e.meta_path);
}

Manifest load_manifest(const std::string& path) {
    const json j = parse_json_file(path);
    Manifest manifest;
    try {
        if (!j.is_object()) throw ParseError("manifest: not an object");
        const double version = require_number(j, "format_version", "manifest");
        if (version != 1) {
            throw ParseError("manifest: unsupported format_version " + std::to_string(version));
        }
        manifest.format_version = 1;
        manifest.split = require_string(j, "split", "manifest");
        if (manifest.split != "train" && manifest.split != "test") {
            throw ParseError("manifest: split must be 'train' or 'test'");
        }
        if (!j.contains("entries") || !j.at("entries").is_array()) {
            throw ParseError("manifest: missing key 'entries'");
        }
        std::set<std::string> seen;
        for (const json& e : j.at("entries")) {
            DevicePair pair;
            pair.id = require_string(e, "id", "manifest entry");
            if (!seen.insert(pair.id).second) {
                throw ParseError("manifest: duplicate id '" + pair.id + "'");
            }
            pair.device_label = require_string(e, "device", "manifest entry");
            pair.device = parse_device(pair.device_label);
            if (e.contains("group")) {
                pair.group = parse_group(require_string(e, "group", "manifest entry"));
            } else if (!default_group(pair.device, &pair.group)) {
                throw ParseError("manifest: device '" + pair.device_label +
                                 "' has no default group; entry '" + pair.id +
                                 "' must set one");
            }
            pair.rgb_path = require_string(e, "rgb", "manifest entry");
            pair.raw_path = require_string(e, "raw", "manifest entry");
            if (e.contains("meta")) {
                pair.meta_path = require_string(e, "meta", "manifest entry");
            }
            manifest.entries.push_back(std::move(pair));
        }
    } catch (const ParseError& err) {
        throw ParseError(path + ": " + err.what());
    }
    fs::path dir = fs::path(path).parent_path();
    manifest.base_dir = dir.empty() ? "." : dir.string();
    return manifest;
}

void save_manifest(const std::string& path, const Manifest& manifest) {
    json j;
    j["format_version"] = 1;
    j["split"] = manifest.split;
    json entries = json::array();
    std::set<std::string> seen;
    for (const DevicePair& pair : manifest.entries) {
        if (!seen.insert(pair.id).second) {
            throw DomainError("manifest: duplicate id '" + pair.id + "'");
        }
        json e;
        e["id"] = pair.id;
        e["device"] = pair.device_label.empty() ? device_name(pair.device) : pair.device_label;
        e["group"] = group_name(pair.group);
        e["rgb"] = pair.rgb_path;
        e["raw"] = pair.raw_path;
        if (!pair.meta_path.empty()) e["meta"] = pair.meta_path;
        entries.push_back(std::move(e));
    }
    j["entries"] = std::move(entries);
    write_json_file(path, j);
}

ManifestPartition partition(const Manifest& manifest) {
    ManifestPartition out;
    for (const DevicePair& pair : manifest.entries) {
        (pair.group == Group::target ? out.target : out.oof).push_back(pair);
    }
    return out;
}

// --- cropping ------------------------------------------------------------------

std::vector<int> tile_starts(int extent, int size, int stride) {
    if (size < 1 || size > extent) throw DomainError("tile_starts: size must be in [1, extent]");
    if (stride < 1) throw DomainError("tile_starts: stride must be positive");
    std::vector<int> starts;
    for (int p = 0;; p += stride) {
        if (p + size >= extent) {
            starts.push_back(extent - size);  // snap the last tile to the border
            break;
        }
        starts.push_back(p);
    }
    return starts;
}

namespace {

RgbImage crop_rgb(const RgbImage& img, int i0, int j0, int h, int w) {
    RgbImage out = RgbImage::zeros(h, w);
    for (int i = 0; i < h; ++i) {
        const double* src = &img.samples[img.index(i0 + i, j0, 0)];
        double* dst = &out.samples[out.index(i, 0, 0)];
        std::copy(src, src + static_cast<std::size_t>(w) * RgbImage::kChannels, dst);
    }
    return out;
}

PackedRaw crop_packed(const PackedRaw& raw, int i0, int j0, int h, int w) {
    PackedRaw out = PackedRaw::zeros(h, w);
    for (int i = 0; i < h; ++i) {
        const double* src = &raw.samples[raw.index(i0 + i, j0, 0)];
        double* dst = &out.samples[out.index(i, 0, 0)];
        std::copy(src, src + static_cast<std::size_t>(w) * PackedRaw::kChannels, dst);
    }
    return out;
}

}  // namespace

std::vector<PatchPair> crop_aligned(const RgbImage& rgb, const PackedRaw& raw, int size,
                                    int stride) {
    if (rgb.height != 2 * raw.height || rgb.width != 2 * raw.width) {
        throw DimensionError("crop_aligned: rgb dimensions must be exactly twice the raw's");
    }
    const std::vector<int> rows = tile_starts(raw.height, size, stride);
    const std::vector<int> cols = tile_starts(raw.width, size, stride);
    std::vector<PatchPair> out;
    out.reserve(rows.size() * cols.size());
    for (int i : rows) {
        for (int j : cols) {
            out.emplace_back(crop_rgb(rgb, 2 * i, 2 * j, 2 * size, 2 * size),
                             crop_packed(raw, i, j, size, size));
        }
    }
    return out;
}

// --- synthetic dataset ------------------------------------------------------------

std::string synth_dataset(const std::string& dir, int n, int raw_height, int raw_width,
                          const IspMetadata& meta, std::uint64_t seed) {
    if (n < 1) throw DomainError("synth_dataset: n must be at least 1");
    meta.validate();
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory " + dir);

    constexpr int kCell = 8;        // coarse-grid spacing in packed pixels
    constexpr double kLo = 0.02;    // value range leaves forward-ISP headroom
    constexpr double kHi = 0.98;
    const int gh = (raw_height - 1) / kCell + 2;
    const int gw = (raw_width - 1) / kCell + 2;

    Rng rng(seed);
    Manifest manifest;
    manifest.split = "test";

    const std::array<Device, 3> cycle{Device::iPhoneX, Device::SamsungS9, Device::SamsungS21};
    save_metadata((fs::path(dir) / "meta.json").string(), meta);

    std::vector<double> grid(static_cast<std::size_t>(gh) * gw * PackedRaw::kChannels);
    for (int img = 0; img < n; ++img) {
        for (double& g : grid) g = rng.next_in(kLo, kHi);

        // Bilinear upsampling of the coarse grid; convex combinations keep
        // every sample inside [kLo, kHi].
        PackedRaw raw = PackedRaw::zeros(raw_height, raw_width);
        for (int i = 0; i < raw_height; ++i) {
            const double u = static_cast<double>(i) / kCell;
            const int i0 = static_cast<int>(u);
            const double fu = u - i0;
            for (int j = 0; j < raw_width; ++j) {
                const double v = static_cast<double>(j) / kCell;
                const int j0 = static_cast<int>(v);
                const double fv = v - j0;
                for (int c = 0; c < PackedRaw::kChannels; ++c) {
                    const auto g = [&](int gi, int gj) {
                        return grid[(static_cast<std::size_t>(gi) * gw + gj) *
                                        PackedRaw::kChannels +
                                    c];
                    };
                    const double top = g(i0, j0) * (1.0 - fv) + g(i0, j0 + 1) * fv;
                    const double bot = g(i0 + 1, j0) * (1.0 - fv) + g(i0 + 1, j0 + 1) * fv;
                    raw.samples[raw.index(i, j, c)] = top * (1.0 - fu) + bot * fu;
                }
            }
        }
        raw = quantize12(raw);  // store exactly what raw16 will hold

        const RgbImage rgb = forward_isp(raw, meta);

        char name[32];
        std::snprintf(name, sizeof(name), "img_%04d", img);
        const std::string stem(name);
        save_raw16((fs::path(dir) / (stem + ".raw16")).string(), raw);
        save_ppm((fs::path(dir) / (stem + ".ppm")).string(), rgb);

        DevicePair pair;
        pair.id = stem;
        pair.device = cycle[img % 3];
        pair.device_label = device_name(pair.device);
        default_group(pair.device, &pair.group);
        pair.rgb_path = stem + ".ppm";
        pair.raw_path = stem + ".raw16";
        pair.meta_path = "meta.json";
        manifest.entries.push_back(std::move(pair));
    }

    const std::string manifest_path = (fs::path(dir) / "manifest.json").string();
    save_manifest(manifest_path, manifest);
    return manifest_path;
}

}  // namespace risp
