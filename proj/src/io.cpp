#include "cxstat/io.hpp"

#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "cxstat/error.hpp"
#include "cxstat/format.hpp"

namespace cxstat::io {
namespace {

constexpr std::string_view kFtsMagic = "FTS1";
constexpr std::string_view kCsvHeader = "# fts-csv v1 dim=";

void put_u32(std::string& out, std::uint32_t v) {
  for (int shift = 0; shift < 32; shift += 8) {
    out.push_back(static_cast<char>((v >> shift) & 0xFFu));
  }
}

std::uint32_t get_u32(std::string_view bytes, std::size_t offset) {
  std::uint32_t v = 0;
  for (int b = 0; b < 4; ++b) {
    v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[offset + b])) << (8 * b);
  }
  return v;
}

// Cursor over a PNM header: whitespace-separated tokens with '#' comments.
struct PnmCursor {
  std::string_view bytes;
  std::size_t pos = 0;

  void skip_space_and_comments() {
    while (pos < bytes.size()) {
      const char c = bytes[pos];
      if (c == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos;
      } else {
        break;
      }
    }
  }

  std::size_t read_uint(const char* what) {
    skip_space_and_comments();
    const std::size_t start = pos;
    std::size_t v = 0;
    while (pos < bytes.size() && std::isdigit(static_cast<unsigned char>(bytes[pos]))) {
      v = v * 10 + static_cast<std::size_t>(bytes[pos] - '0');
      if (v > (1u << 24)) throw FormatError(std::string("PNM ") + what + " too large", start);
      ++pos;
    }
    if (pos == start) throw FormatError(std::string("PNM header: expected ") + what, start);
    return v;
  }
};

}  // namespace

FileKind sniff(std::string_view bytes) {
  if (bytes.starts_with(kFtsMagic)) return FileKind::fts_binary;
  if (bytes.starts_with("# fts-csv")) return FileKind::fts_text;
  if (bytes.starts_with("P5")) return FileKind::pgm;
  if (bytes.starts_with("P6")) return FileKind::ppm;
  throw FormatError("unrecognized file type", 0);
}

bool is_image(FileKind kind) noexcept {
  return kind == FileKind::pgm || kind == FileKind::ppm;
}

std::string encode_fts1(const FeatureSet& set) {
  std::string out;
  out.reserve(12 + set.values().size() * 4);
  out.append(kFtsMagic);
  put_u32(out, static_cast<std::uint32_t>(set.size()));
  put_u32(out, static_cast<std::uint32_t>(set.dim()));
  for (double v : set.values()) {
    put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  }
  return out;
}

FeatureSet decode_fts1(std::string_view bytes) {
  if (bytes.size() < 12) {
    throw FormatError("FTS1 header truncated: expected 12 bytes, got " +
                          std::to_string(bytes.size()),
                      bytes.size());
  }
  if (!bytes.starts_with(kFtsMagic)) throw FormatError("bad FTS1 magic", 0);
  const std::uint64_t n = get_u32(bytes, 4);
  const std::uint64_t d = get_u32(bytes, 8);
  if (n == 0) throw FormatError("FTS1 point count is zero", 4);
  if (d == 0) throw FormatError("FTS1 dimension is zero", 8);
  const std::uint64_t expected = 12 + n * d * 4;
  if (bytes.size() != expected) {
    throw FormatError("FTS1 length mismatch: expected " + std::to_string(expected) +
                          " bytes, got " + std::to_string(bytes.size()),
                      std::min<std::uint64_t>(bytes.size(), expected));
  }
  std::vector<double> values(n * d);
  for (std::size_t k = 0; k < values.size(); ++k) {
    const float f = std::bit_cast<float>(get_u32(bytes, 12 + 4 * k));
    if (!std::isfinite(f)) throw FormatError("non-finite coordinate", 12 + 4 * k);
    values[k] = f;
  }
  return FeatureSet(std::move(values), d);
}

std::string encode_fts_csv(const FeatureSet& set) {
  std::string out(kCsvHeader);
  out += std::to_string(set.dim());
  out += '\n';
  for (std::size_t i = 0; i < set.size(); ++i) {
    const auto p = set.point(i);
    for (std::size_t k = 0; k < p.size(); ++k) {
      if (k) out += ',';
      out += format_exact(p[k]);
    }
    out += '\n';
  }
  return out;
}

FeatureSet decode_fts_csv(std::string_view text) {
  if (!text.starts_with(kCsvHeader)) throw FormatError("bad fts-csv header", 0);
  std::size_t pos = kCsvHeader.size();
  std::size_t eol = text.find('\n', pos);
  if (eol == std::string_view::npos) eol = text.size();
  double dim_value = 0;
  if (!parse_number(text.substr(pos, eol - pos), dim_value) || dim_value < 1 ||
      dim_value != std::floor(dim_value)) {
    throw FormatError("bad fts-csv dimension", pos);
  }
  const auto dim = static_cast<std::size_t>(dim_value);

  std::vector<double> values;
  pos = eol + 1;
  while (pos < text.size()) {
    eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty()) {
      std::size_t field_start = 0;
      std::size_t count = 0;
      while (true) {
        const std::size_t comma = line.find(',', field_start);
        const std::size_t field_end = comma == std::string_view::npos ? line.size() : comma;
        double v = 0;
        if (!parse_number(line.substr(field_start, field_end - field_start), v) ||
            !std::isfinite(v)) {
          throw FormatError("bad fts-csv value", pos + field_start);
        }
        values.push_back(v);
        ++count;
        if (comma == std::string_view::npos) break;
        field_start = comma + 1;
      }
      if (count != dim) {
        throw FormatError("fts-csv row has " + std::to_string(count) + " values, expected " +
                              std::to_string(dim),
                          pos);
      }
    }
    pos = eol + 1;
  }
  if (values.empty()) throw FormatError("fts-csv holds no points", text.size());
  return FeatureSet(std::move(values), dim);
}

std::string encode_pnm(const ImageGrid& image) {
  std::string out = image.channels() == 3 ? "P6\n" : "P5\n";
  out += std::to_string(image.width()) + " " + std::to_string(image.height()) + "\n255\n";
  out.reserve(out.size() + image.size());
  for (double v : image.values()) {
    out.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(v * 255.0))));
  }
  return out;
}

ImageGrid decode_pnm(std::string_view bytes) {
  std::size_t channels = 0;
  if (bytes.starts_with("P5")) {
    channels = 1;
  } else if (bytes.starts_with("P6")) {
    channels = 3;
  } else {
    throw FormatError("bad PNM magic", 0);
  }
  PnmCursor cur{bytes, 2};
  const std::size_t width = cur.read_uint("width");
  const std::size_t height = cur.read_uint("height");
  const std::size_t maxval_at = cur.pos;
  const std::size_t maxval = cur.read_uint("maxval");
  if (width == 0 || height == 0) throw FormatError("PNM extent is zero", maxval_at);
  if (maxval != 255) throw FormatError("only 8-bit PNM (maxval 255) is supported", maxval_at);
  if (cur.pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[cur.pos]))) {
    throw FormatError("PNM header must end with a single whitespace byte", cur.pos);
  }
  const std::size_t data = cur.pos + 1;
  const std::size_t count = width * height * channels;
  if (bytes.size() - data != count) {
    throw FormatError("PNM pixel data length mismatch: expected " + std::to_string(count) +
                          " bytes, got " + std::to_string(bytes.size() - data),
                      data);
  }
  std::vector<double> values(count);
  for (std::size_t k = 0; k < count; ++k) {
    values[k] = static_cast<unsigned char>(bytes[data + k]) / 255.0;
  }
  return ImageGrid(height, width, channels, std::move(values));
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("short write to " + path.string());
}

FeatureSet load_feature_set(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  switch (sniff(bytes)) {
    case FileKind::fts_binary:
      return decode_fts1(bytes);
    case FileKind::fts_text:
      return decode_fts_csv(bytes);
    default:
      throw FormatError(path.string() + " is an image, not a feature set", 0);
  }
}

void save_feature_set(const std::filesystem::path& path, const FeatureSet& set,
                      FileKind kind) {
  if (kind == FileKind::fts_binary) {
    write_file(path, encode_fts1(set));
  } else if (kind == FileKind::fts_text) {
    write_file(path, encode_fts_csv(set));
  } else {
    throw UnsupportedError("feature sets are saved as FTS1 or fts-csv");
  }
}

ImageGrid load_image(const std::filesystem::path& path) {
  return decode_pnm(read_file(path));
}

void save_image(const std::filesystem::path& path, const ImageGrid& image) {
  write_file(path, encode_pnm(image));
}

}  // namespace cxstat::io
