#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "cxstat/feature_set.hpp"

namespace cxstat::io {

enum class FileKind { fts_binary, fts_text, pgm, ppm };

/// Identifies a file by its leading bytes: "FTS1", "# fts-csv", "P5", "P6".
/// Throws FormatError when none match.
FileKind sniff(std::string_view bytes);

bool is_image(FileKind kind) noexcept;

// FTS1: magic "FTS1", u32 LE N, u32 LE d, then N*d float32 LE, row-major.
// Coordinates are narrowed to float32 on encode.
std::string encode_fts1(const FeatureSet& set);
FeatureSet decode_fts1(std::string_view bytes);

// "# fts-csv v1 dim=<d>" followed by one comma-separated row per point.
std::string encode_fts_csv(const FeatureSet& set);
FeatureSet decode_fts_csv(std::string_view text);

// Binary P5 (gray) / P6 (RGB), maxval 255. Values map by v/255 and round(v*255).
std::string encode_pnm(const ImageGrid& image);
ImageGrid decode_pnm(std::string_view bytes);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view bytes);

FeatureSet load_feature_set(const std::filesystem::path& path);
void save_feature_set(const std::filesystem::path& path, const FeatureSet& set,
                      FileKind kind = FileKind::fts_binary);

ImageGrid load_image(const std::filesystem::path& path);
void save_image(const std::filesystem::path& path, const ImageGrid& image);

}  // namespace cxstat::io
