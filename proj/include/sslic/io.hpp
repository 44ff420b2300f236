// Volume and label I/O plus contour rendering.
//
// The native on-disk format is a detached header: a small text file of
// key:value lines describing the payload, next to a raw little-endian data
// file in the library's frozen pixel order (row-major, first axis fastest,
// channels interleaved). Example header:
//
//   # sslic volume
//   dimension: 2
//   sizes: 512 512
//   channels: 3
//   type: float32
//   endian: little
//   spacing: 1 1
//   data file: photo.raw
//
// type is one of uint8 | float32 (uint32 for label maps). spacing is
// carried through but never used by the algorithm, which works in pixel
// units. 2D images can also be read from and written to 8-bit gray or RGB
// PNG files (selected by the .png extension).
#pragma once

#include <png.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "sslic/image.hpp"

namespace sslic {

enum class io_errc {
  file_not_found,
  malformed_header,
  size_mismatch,
  unsupported_type,
  write_failed,
};

class io_error : public std::runtime_error {
 public:
  io_error(io_errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  io_errc code() const { return code_; }

 private:
  io_errc code_;
};

/// Parsed detached header. Fully determines the payload byte length.
struct VolumeHeader {
  Shape dims;
  int channels = 1;
  std::string type;             // uint8 | float32 | uint32
  std::string endian = "little";
  std::string data_file;
  std::vector<double> spacing;  // optional, carried but unused

  std::int64_t element_size() const {
    if (type == "uint8") return 1;
    if (type == "float32" || type == "uint32") return 4;
    throw io_error(io_errc::unsupported_type, "unsupported element type: " + type);
  }
  std::int64_t payload_bytes() const { return pixel_count(dims) * channels * element_size(); }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

inline std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw io_error(io_errc::file_not_found, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                                  std::istreambuf_iterator<char>());
  return bytes;
}

inline void write_file_bytes(const std::filesystem::path& path,
                             const std::vector<std::uint8_t>& bytes) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw io_error(io_errc::write_failed, "cannot open " + path.string() + " for writing");
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw io_error(io_errc::write_failed, "short write to " + path.string());
}

inline std::uint32_t load_le32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

inline void store_le32(std::uint32_t v, std::uint8_t* p) {
  p[0] = static_cast<std::uint8_t>(v);
  p[1] = static_cast<std::uint8_t>(v >> 8);
  p[2] = static_cast<std::uint8_t>(v >> 16);
  p[3] = static_cast<std::uint8_t>(v >> 24);
}

inline bool has_extension(const std::filesystem::path& path, const char* ext) {
  std::string e = path.extension().string();
  std::transform(e.begin(), e.end(), e.begin(), [](unsigned char c) { return std::tolower(c); });
  return e == ext;
}

}  // namespace detail

inline VolumeHeader parse_volume_header(std::istream& is) {
  VolumeHeader h;
  bool saw_dimension = false, saw_sizes = false, saw_type = false, saw_data = false;
  std::vector<std::int64_t> sizes;
  std::string line;
  const auto to_int = [](const std::string& value, const char* key) {
    try {
      return std::stoi(value);
    } catch (const std::exception&) {
      throw io_error(io_errc::malformed_header,
                     std::string("non-numeric ") + key + ": " + value);
    }
  };
  while (std::getline(is, line)) {
    line = detail::trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto colon = line.find(':');
    if (colon == std::string::npos)
      throw io_error(io_errc::malformed_header, "header line without ':': " + line);
    const std::string key = detail::trim(line.substr(0, colon));
    const std::string value = detail::trim(line.substr(colon + 1));

    if (key == "dimension") {
      saw_dimension = true;
      const int n = to_int(value, "dimension");
      if (n < 1 || n > kMaxRank)
        throw io_error(io_errc::malformed_header, "dimension outside [1," +
                                                      std::to_string(kMaxRank) + "]: " + value);
      h.dims = Shape();
      for (int i = 0; i < n; ++i) h.dims.push_back(0);
    } else if (key == "sizes") {
      saw_sizes = true;
      std::istringstream vs(value);
      std::int64_t s;
      sizes.clear();
      while (vs >> s) sizes.push_back(s);
    } else if (key == "channels") {
      h.channels = to_int(value, "channels");
    } else if (key == "type") {
      saw_type = true;
      h.type = value;
    } else if (key == "endian") {
      h.endian = value;
    } else if (key == "data file") {
      saw_data = true;
      h.data_file = value;
    } else if (key == "spacing") {
      std::istringstream vs(value);
      double sp;
      while (vs >> sp) h.spacing.push_back(sp);
    }
    // Unknown keys are ignored for forward compatibility.
  }
  if (!saw_dimension || !saw_sizes || !saw_type || !saw_data)
    throw io_error(io_errc::malformed_header,
                   "header must contain dimension, sizes, type and data file");
  if (static_cast<int>(sizes.size()) != h.dims.size())
    throw io_error(io_errc::malformed_header, "sizes entry count does not match dimension");
  for (int i = 0; i < h.dims.size(); ++i) {
    if (sizes[i] < 1) throw io_error(io_errc::malformed_header, "non-positive size");
    h.dims[i] = sizes[i];
  }
  if (h.channels < 1) throw io_error(io_errc::malformed_header, "channels must be >= 1");
  if (h.type != "uint8" && h.type != "float32" && h.type != "uint32")
    throw io_error(io_errc::unsupported_type, "unsupported element type: " + h.type);
  if (h.endian != "little")
    throw io_error(io_errc::unsupported_type, "unsupported endianness: " + h.endian);
  return h;
}

namespace detail {

inline std::vector<std::uint8_t> read_payload(const std::filesystem::path& header_path,
                                              const VolumeHeader& h) {
  std::filesystem::path data_path(h.data_file);
  if (data_path.is_relative()) data_path = header_path.parent_path() / data_path;
  std::vector<std::uint8_t> bytes = read_file_bytes(data_path);
  if (static_cast<std::int64_t>(bytes.size()) != h.payload_bytes())
    throw io_error(io_errc::size_mismatch,
                   "payload is " + std::to_string(bytes.size()) + " bytes, header implies " +
                       std::to_string(h.payload_bytes()));
  return bytes;
}

inline void write_header(const std::filesystem::path& path, const VolumeHeader& h,
                         const std::string& extra_comment = "") {
  std::ostringstream os;
  os << "# sslic volume\n";
  if (!extra_comment.empty()) os << "# " << extra_comment << '\n';
  os << "dimension: " << h.dims.size() << '\n';
  os << "sizes:";
  for (std::int64_t d : h.dims) os << ' ' << d;
  os << '\n';
  os << "channels: " << h.channels << '\n';
  os << "type: " << h.type << '\n';
  os << "endian: little\n";
  if (!h.spacing.empty()) {
    os << "spacing:";
    std::ostringstream sp;
    sp.precision(17);
    for (double s : h.spacing) sp << ' ' << s;
    os << sp.str() << '\n';
  }
  os << "data file: " << h.data_file << '\n';
  const std::string text = os.str();
  write_file_bytes(path, std::vector<std::uint8_t>(text.begin(), text.end()));
}

// --- PNG (2D, 8-bit gray or RGB) ---

struct PngReadCtx {
  png_structp png = nullptr;
  png_infop info = nullptr;
  std::FILE* fp = nullptr;
  ~PngReadCtx() {
    if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
    if (fp) std::fclose(fp);
  }
};

struct PngWriteCtx {
  png_structp png = nullptr;
  png_infop info = nullptr;
  std::FILE* fp = nullptr;
  ~PngWriteCtx() {
    if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
    if (fp) std::fclose(fp);
  }
};

inline NDImage read_png(const std::filesystem::path& path) {
  PngReadCtx ctx;
  ctx.fp = std::fopen(path.string().c_str(), "rb");
  if (!ctx.fp) throw io_error(io_errc::file_not_found, "cannot open " + path.string());

  ctx.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!ctx.png) throw io_error(io_errc::malformed_header, "libpng initialization failed");
  ctx.info = png_create_info_struct(ctx.png);
  if (!ctx.info) throw io_error(io_errc::malformed_header, "libpng initialization failed");
  if (setjmp(png_jmpbuf(ctx.png)))
    throw io_error(io_errc::malformed_header, "libpng failed reading " + path.string());

  png_init_io(ctx.png, ctx.fp);
  png_read_info(ctx.png, ctx.info);

  // Normalize everything to 8-bit gray or RGB.
  png_set_palette_to_rgb(ctx.png);
  png_set_expand_gray_1_2_4_to_8(ctx.png);
  png_set_strip_16(ctx.png);
  png_set_strip_alpha(ctx.png);
  png_read_update_info(ctx.png, ctx.info);

  const png_uint_32 width = png_get_image_width(ctx.png, ctx.info);
  const png_uint_32 height = png_get_image_height(ctx.png, ctx.info);
  const int color_type = png_get_color_type(ctx.png, ctx.info);
  int channels;
  if (color_type == PNG_COLOR_TYPE_GRAY)
    channels = 1;
  else if (color_type == PNG_COLOR_TYPE_RGB)
    channels = 3;
  else
    throw io_error(io_errc::unsupported_type, "PNG color type not supported");

  std::vector<std::uint8_t> row(static_cast<std::size_t>(width) * channels);
  std::vector<double> data(static_cast<std::size_t>(width) * height * channels);
  for (png_uint_32 y = 0; y < height; ++y) {
    png_read_row(ctx.png, row.data(), nullptr);
    double* out = data.data() + static_cast<std::size_t>(y) * width * channels;
    for (std::size_t i = 0; i < row.size(); ++i) out[i] = static_cast<double>(row[i]);
  }
  png_read_end(ctx.png, nullptr);

  return NDImage(Shape{static_cast<std::int64_t>(width), static_cast<std::int64_t>(height)},
                 channels, std::move(data));
}

inline void write_png(const std::filesystem::path& path, const NDImage& img) {
  if (img.rank() != 2)
    throw io_error(io_errc::unsupported_type, "PNG output requires a 2D image");
  if (img.channels() != 1 && img.channels() != 3)
    throw io_error(io_errc::unsupported_type, "PNG output requires 1 or 3 channels");

  PngWriteCtx ctx;
  ctx.fp = std::fopen(path.string().c_str(), "wb");
  if (!ctx.fp) throw io_error(io_errc::write_failed, "cannot open " + path.string());

  ctx.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!ctx.png) throw io_error(io_errc::write_failed, "libpng initialization failed");
  ctx.info = png_create_info_struct(ctx.png);
  if (!ctx.info) throw io_error(io_errc::write_failed, "libpng initialization failed");
  if (setjmp(png_jmpbuf(ctx.png)))
    throw io_error(io_errc::write_failed, "libpng failed writing " + path.string());

  const std::int64_t width = img.dims()[0];
  const std::int64_t height = img.dims()[1];
  png_init_io(ctx.png, ctx.fp);
  png_set_IHDR(ctx.png, ctx.info, static_cast<png_uint_32>(width),
               static_cast<png_uint_32>(height), 8,
               img.channels() == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(ctx.png, ctx.info);

  std::vector<std::uint8_t> row(static_cast<std::size_t>(width) * img.channels());
  const double* data = img.data().data();
  for (std::int64_t y = 0; y < height; ++y) {
    const double* src = data + y * width * img.channels();
    for (std::size_t i = 0; i < row.size(); ++i)
      row[i] = static_cast<std::uint8_t>(std::clamp(std::llround(src[i]), 0ll, 255ll));
    png_write_row(ctx.png, row.data());
  }
  png_write_end(ctx.png, nullptr);
}

}  // namespace detail

/// Reads a volume: PNG for .png paths, the detached-header format
/// otherwise. Values are returned as doubles in the frozen pixel order.
inline NDImage read_volume(const std::filesystem::path& path) {
  if (detail::has_extension(path, ".png")) return detail::read_png(path);

  std::ifstream f(path);
  if (!f) throw io_error(io_errc::file_not_found, "cannot open " + path.string());
  const VolumeHeader h = parse_volume_header(f);
  if (h.type == "uint32")
    throw io_error(io_errc::unsupported_type, "uint32 volumes are label maps; use read_labels");
  const std::vector<std::uint8_t> bytes = detail::read_payload(path, h);

  const std::int64_t n = pixel_count(h.dims) * h.channels;
  std::vector<double> data(static_cast<std::size_t>(n));
  if (h.type == "uint8") {
    for (std::int64_t i = 0; i < n; ++i) data[i] = static_cast<double>(bytes[i]);
  } else {  // float32, little-endian
    for (std::int64_t i = 0; i < n; ++i) {
      const float v = std::bit_cast<float>(detail::load_le32(bytes.data() + 4 * i));
      data[i] = static_cast<double>(v);
    }
  }
  return NDImage(h.dims, h.channels, std::move(data));
}

/// Writes a volume: PNG for .png paths (2D, values rounded and clamped to
/// [0,255]), otherwise a detached header at `path` plus a raw payload named
/// `<stem>.raw` beside it. `type` selects uint8 or float32 storage.
inline void write_volume(const std::filesystem::path& path, const NDImage& img,
                         const std::string& type = "float32",
                         const std::vector<double>& spacing = {}) {
  if (detail::has_extension(path, ".png")) {
    detail::write_png(path, img);
    return;
  }
  if (type != "uint8" && type != "float32")
    throw io_error(io_errc::unsupported_type, "unsupported element type: " + type);

  VolumeHeader h;
  h.dims = img.dims();
  h.channels = img.channels();
  h.type = type;
  h.spacing = spacing;
  h.data_file = path.stem().string() + ".raw";

  const std::int64_t n = pixel_count(h.dims) * h.channels;
  std::vector<std::uint8_t> bytes(static_cast<std::size_t>(h.payload_bytes()));
  const double* data = img.data().data();
  if (type == "uint8") {
    for (std::int64_t i = 0; i < n; ++i)
      bytes[i] = static_cast<std::uint8_t>(std::clamp(std::llround(data[i]), 0ll, 255ll));
  } else {
    for (std::int64_t i = 0; i < n; ++i)
      detail::store_le32(std::bit_cast<std::uint32_t>(static_cast<float>(data[i])),
                         bytes.data() + 4 * i);
  }
  detail::write_file_bytes(path.parent_path() / h.data_file, bytes);
  detail::write_header(path, h);
}

/// Writes a label map in the detached-header format with type uint32.
/// The header carries the label count (max label + 1) as a comment.
inline void write_labels(const std::filesystem::path& path, const LabelMap& labels) {
  VolumeHeader h;
  h.dims = labels.dims();
  h.channels = 1;
  h.type = "uint32";
  h.data_file = path.stem().string() + ".raw";

  std::uint32_t max_label = 0;
  std::vector<std::uint8_t> bytes(static_cast<std::size_t>(h.payload_bytes()));
  for (std::int64_t i = 0; i < labels.pixel_count(); ++i) {
    max_label = std::max(max_label, labels[i]);
    detail::store_le32(labels[i], bytes.data() + 4 * i);
  }
  detail::write_file_bytes(path.parent_path() / h.data_file, bytes);
  detail::write_header(path, h, "label count: " + std::to_string(max_label + 1));
}

inline LabelMap read_labels(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw io_error(io_errc::file_not_found, "cannot open " + path.string());
  const VolumeHeader h = parse_volume_header(f);
  if (h.type != "uint32")
    throw io_error(io_errc::unsupported_type, "label maps must have type uint32, got " + h.type);
  if (h.channels != 1)
    throw io_error(io_errc::malformed_header, "label maps must have a single channel");
  const std::vector<std::uint8_t> bytes = detail::read_payload(path, h);

  LabelMap labels(h.dims);
  for (std::int64_t i = 0; i < labels.pixel_count(); ++i)
    labels[i] = detail::load_le32(bytes.data() + 4 * i);
  return labels;
}

/// Blacks out every pixel on a label boundary (any face neighbor with a
/// different label) across all channels; all other pixels copy through.
inline NDImage mask_label_contour(const NDImage& img, const LabelMap& labels) {
  if (!(img.dims() == labels.dims()))
    throw std::invalid_argument("mask_label_contour: image and label dims differ");

  const Shape& dims = img.dims();
  const Shape strides = strides_of(dims);
  const int rank = img.rank();
  NDImage out = img;

  for (const Coord& coord : region_pixels(img.full_region())) {
    const std::int64_t off = detail::linear_offset(coord, strides);
    bool boundary = false;
    for (int a = 0; a < rank && !boundary; ++a) {
      if (coord[a] > 0 && labels[off - strides[a]] != labels[off]) boundary = true;
      if (coord[a] + 1 < dims[a] && labels[off + strides[a]] != labels[off]) boundary = true;
    }
    if (boundary) {
      auto px = out.pixel(off);
      for (double& v : px) v = 0.0;
    }
  }
  return out;
}

}  // namespace sslic
