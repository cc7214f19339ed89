#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "risp/image.hpp"
#include "risp/isp.hpp"
#include "risp/model.hpp"

namespace risp {

// --- raw16 container ---------------------------------------------------
//
// Byte layout, fixed regardless of host endianness:
//   "RAW2"                     4 ASCII magic bytes
//   height, width, channels    little-endian uint32 each; channels must be 4
//   codes                      height*width*4 little-endian uint16 values,
//                              row-major, channel-interleaved, each <= 4095
//
// Samples are stored as 12-bit codes (code = value * 4095), so writing
// quantizes and read(write(p)) == quantize12(p) bit-exactly.

std::vector<std::uint8_t> raw16_encode(const PackedRaw& raw);
PackedRaw raw16_decode(const std::vector<std::uint8_t>& bytes);

void save_raw16(const std::string& path, const PackedRaw& raw);
PackedRaw load_raw16(const std::string& path);

// --- 8-bit RGB raster (binary PPM, P6, maxval 255) ----------------------
// Decode maps codes to code/255; encode rounds half away from zero, so the
// round trip of an already 8-bit-quantized image is byte-identical.

void save_ppm(const std::string& path, const RgbImage& image);
RgbImage load_ppm(const std::string& path);

// --- ISP metadata -------------------------------------------------------
// JSON object with keys wb_gains (3 numbers), ccm (9 numbers, row-major),
// black_level, white_level. Unknown keys are ignored on load.

IspMetadata load_metadata(const std::string& path);
void save_metadata(const std::string& path, const IspMetadata& meta);

// --- Reconstruction model files -----------------------------------------
// JSON with a format_version and a type tag: "gamma-mixture" stores gammas,
// per-candidate maps and weights; "global-matrix" stores the 3x3 matrix.
// Doubles survive the round trip exactly (shortest-round-trip printing).

struct ModelFile {
    int format_version = 1;
    std::string type;  // "gamma-mixture" | "global-matrix"
    ReverseModel mixture;
    ColorTransform transform;

    bool is_mixture() const { return type == "gamma-mixture"; }
};

void save_model(const std::string& path, const ReverseModel& model);
void save_model(const std::string& path, const ColorTransform& transform);
ModelFile load_model(const std::string& path);

// --- Dataset manifest ----------------------------------------------------

enum class Device { iPhoneX, SamsungS9, SamsungS21, VivoX90, Other };
enum class Group { target, oof };

// Known capture devices imply their evaluation group; Other does not, so
// manifests naming an unknown device must tag the group explicitly.
const char* device_name(Device d);
bool default_group(Device d, Group* out);
const char* group_name(Group g);
Group parse_group(const std::string& name);

struct DevicePair {
    std::string id;
    Device device = Device::Other;
    std::string device_label;  // canonical name, or the custom name for Other
    Group group = Group::target;
    std::string rgb_path;   // relative to the manifest directory
    std::string raw_path;   // relative to the manifest directory
    std::string meta_path;  // optional; empty means metadata-free
};

struct Manifest {
    int format_version = 1;
    std::string split = "test";  // "train" | "test"
    std::vector<DevicePair> entries;
    std::string base_dir;  // directory of the file it was loaded from; not serialized

    std::string rgb_file(const DevicePair& e) const;
    std::string raw_file(const DevicePair& e) const;
    std::string meta_file(const DevicePair& e) const;  // "" when absent
};

Manifest load_manifest(const std::string& path);
void save_manifest(const std::string& path, const Manifest& manifest);

struct ManifestPartition {
    std::vector<DevicePair> target;
    std::vector<DevicePair> oof;
};

// Stable partition by group tag: disjoint, order-preserving, union = entries.
ManifestPartition partition(const Manifest& manifest);

// --- Aligned patch cropping ----------------------------------------------
// RAW crop at (i, j, size, size) pairs with the RGB crop at (2i, 2j, 2*size,
// 2*size). Tiling steps by stride and snaps the last tile to the border, so
// coverage is complete without partial tiles.

std::vector<PatchPair> crop_aligned(const RgbImage& rgb, const PackedRaw& raw, int size,
                                    int stride);

// Tile start coordinates along one axis (exposed for tests).
std::vector<int> tile_starts(int extent, int size, int stride);

// --- Synthetic dataset ----------------------------------------------------
// Writes n RGB/RAW pairs plus metadata and a manifest into dir. RAW images
// are band-limited noise (bilinear upsampling of a coarse random grid) with
// values inside [0.02, 0.98] so the ISP round trip never clips; RGBs are
// rendered from the stored RAW with the given metadata. Devices alternate
// iPhoneX, SamsungS9, SamsungS21 so both evaluation groups are non-empty.
// Deterministic per seed. Returns the manifest path.

std::string synth_dataset(const std::string& dir, int n, int raw_height, int raw_width,
                          const IspMetadata& meta, std::uint64_t seed);

}  // namespace risp
