#include "terragan/raster_io.hpp"

#include <png.h>

#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <fstream>
#include <memory>
#include <string>

// jpeglib.h needs FILE and size_t declared first.
#include <jpeglib.h>

namespace terragan {
namespace {

struct FileCloser {
  void operator()(std::FILE* f) const noexcept {
    if (f != nullptr) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
  FilePtr file(std::fopen(path.c_str(), mode));
  if (!file) throw IoError("cannot open " + path.string());
  return file;
}

bool has_png_signature(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  unsigned char sig[8] = {};
  in.read(reinterpret_cast<char*>(sig), sizeof(sig));
  return in.gcount() == 8 && png_sig_cmp(sig, 0, 8) == 0;
}

// libpng and libjpeg report errors by longjmp; exceptions are raised only
// after control is back in our own frame.
struct PngErrorState {
  std::jmp_buf jump;
  char message[256] = {};
};

[[noreturn]] void png_fail(png_structp png, png_const_charp message) {
  auto* state = static_cast<PngErrorState*>(png_get_error_ptr(png));
  std::snprintf(state->message, sizeof(state->message), "%s", message);
  std::longjmp(state->jump, 1);
}
void png_warn(png_structp, png_const_charp) {}

struct JpegErrorState {
  jpeg_error_mgr mgr{};
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX] = {};
};

Image read_jpeg(const std::filesystem::path& path) {
  auto file = open_file(path, "rb");
  jpeg_decompress_struct cinfo{};
  JpegErrorState errors;
  cinfo.err = jpeg_std_error(&errors.mgr);
  errors.mgr.error_exit = [](j_common_ptr info) {
    auto* state = reinterpret_cast<JpegErrorState*>(info->err);
    (*info->err->format_message)(info, state->message);
    std::longjmp(state->jump, 1);
  };
  struct Guard {
    jpeg_decompress_struct* info;
    ~Guard() { jpeg_destroy_decompress(info); }
  };
  jpeg_create_decompress(&cinfo);
  Guard guard{&cinfo};
  Image out;
  std::vector<JSAMPLE> row;
  if (setjmp(errors.jump)) throw IoError(std::string("libjpeg: ") + errors.message + " in " + path.string());

  jpeg_stdio_src(&cinfo, file.get());
  jpeg_read_header(&cinfo, TRUE);
  if (cinfo.num_components != 1) cinfo.out_color_space = JCS_RGB;
  jpeg_start_decompress(&cinfo);

  const int channels = static_cast<int>(cinfo.output_components);
  out = Image(static_cast<int>(cinfo.output_height), static_cast<int>(cinfo.output_width), channels);
  row.resize(static_cast<std::size_t>(out.width) * channels);
  while (cinfo.output_scanline < cinfo.output_height) {
    const int r = static_cast<int>(cinfo.output_scanline);
    JSAMPROW rows[1] = {row.data()};
    jpeg_read_scanlines(&cinfo, rows, 1);
    float* dst = &out.data[static_cast<std::size_t>(r) * row.size()];
    for (std::size_t i = 0; i < row.size(); ++i) dst[i] = static_cast<float>(row[i]) / 255.0f;
  }
  jpeg_finish_decompress(&cinfo);
  return out;
}

}  // namespace

PngSamples read_png_samples(const std::filesystem::path& path) {
  auto file = open_file(path, "rb");
  PngErrorState errors;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &errors, png_fail, png_warn);
  if (png == nullptr) throw IoError("libpng: cannot allocate read struct");
  png_infop info = png_create_info_struct(png);
  struct Guard {
    png_structp* png;
    png_infop* info;
    ~Guard() { png_destroy_read_struct(png, info, nullptr); }
  } guard{&png, &info};
  PngSamples out;
  std::vector<png_byte> buffer;
  std::vector<png_bytep> rows;
  if (setjmp(errors.jump)) throw IoError(std::string("libpng: ") + errors.message + " in " + path.string());

  png_init_io(png, file.get());
  png_read_info(png, info);

  const auto color = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (color & PNG_COLOR_MASK_ALPHA || png_get_valid(png, info, PNG_INFO_tRNS)) png_set_strip_alpha(png);
  if (depth == 16) png_set_swap(png);  // host order (little-endian)
  png_read_update_info(png, info);

  out.width = static_cast<int>(png_get_image_width(png, info));
  out.height = static_cast<int>(png_get_image_height(png, info));
  out.channels = png_get_channels(png, info);
  out.bit_depth = png_get_bit_depth(png, info);
  if (out.channels != 1 && out.channels != 3) throw IoError("unsupported PNG channel layout in " + path.string());

  const std::size_t rowbytes = png_get_rowbytes(png, info);
  buffer.resize(rowbytes * out.height);
  rows.resize(out.height);
  for (int r = 0; r < out.height; ++r) rows[r] = buffer.data() + r * rowbytes;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);

  const std::size_t count = static_cast<std::size_t>(out.height) * out.width * out.channels;
  out.samples.resize(count);
  if (out.bit_depth == 16) {
    for (std::size_t i = 0; i < count; ++i) {
      out.samples[i] = static_cast<std::uint16_t>(buffer[2 * i] | (buffer[2 * i + 1] << 8));
    }
  } else {
    for (std::size_t i = 0; i < count; ++i) out.samples[i] = buffer[i];
  }
  return out;
}

void write_png_samples(const std::filesystem::path& path, const PngSamples& in) {
  if (in.channels != 1 && in.channels != 3) throw InvalidInput("PNG output needs 1 or 3 channels");
  if (in.bit_depth != 8 && in.bit_depth != 16) throw InvalidInput("PNG output needs bit depth 8 or 16");
  if (in.height < 1 || in.width < 1) throw InvalidInput("PNG output needs a non-empty image");
  if (in.samples.size() != static_cast<std::size_t>(in.height) * in.width * in.channels) {
    throw InvalidInput("PNG sample count does not match dimensions");
  }

  auto file = open_file(path, "wb");
  PngErrorState errors;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &errors, png_fail, png_warn);
  if (png == nullptr) throw IoError("libpng: cannot allocate write struct");
  png_infop info = png_create_info_struct(png);
  struct Guard {
    png_structp* png;
    png_infop* info;
    ~Guard() { png_destroy_write_struct(png, info); }
  } guard{&png, &info};
  const int bytes_per_sample = in.bit_depth / 8;
  const std::size_t row_samples = static_cast<std::size_t>(in.width) * in.channels;
  std::vector<png_byte> row(row_samples * bytes_per_sample);
  if (setjmp(errors.jump)) throw IoError(std::string("libpng: ") + errors.message + " in " + path.string());

  png_init_io(png, file.get());
  png_set_compression_level(png, 6);
  png_set_IHDR(png, info, in.width, in.height, in.bit_depth,
               in.channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);

  for (int r = 0; r < in.height; ++r) {
    const std::uint16_t* src = &in.samples[r * row_samples];
    for (std::size_t i = 0; i < row_samples; ++i) {
      if (bytes_per_sample == 2) {
        row[2 * i] = static_cast<png_byte>(src[i] >> 8);  // PNG is big-endian
        row[2 * i + 1] = static_cast<png_byte>(src[i] & 0xff);
      } else {
        row[i] = static_cast<png_byte>(src[i]);
      }
    }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  if (std::fflush(file.get()) != 0) throw IoError("failed writing " + path.string());
}

Image read_image(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw IoError("no such file: " + path.string());
  if (!has_png_signature(path)) return read_jpeg(path);

  const PngSamples png = read_png_samples(path);
  const float scale = 1.0f / static_cast<float>((1 << png.bit_depth) - 1);
  Image out(png.height, png.width, png.channels);
  for (std::size_t i = 0; i < png.samples.size(); ++i) out.data[i] = png.samples[i] * scale;
  return out;
}

void write_image_png(const std::filesystem::path& path, const Image& image, int bit_depth) {
  if (bit_depth != 8 && bit_depth != 16) throw InvalidInput("bit depth must be 8 or 16");
  const double maxval = bit_depth == 16 ? 65535.0 : 255.0;
  PngSamples png{image.height, image.width, image.channels, bit_depth, {}};
  png.samples.resize(image.data.size());
  for (std::size_t i = 0; i < image.data.size(); ++i) {
    const float v = image.data[i];
    if (!(v >= 0.0f && v <= 1.0f)) throw InvalidInput("write_image_png: value outside [0,1]");
    png.samples[i] = static_cast<std::uint16_t>(std::lround(v * maxval));
  }
  write_png_samples(path, png);
}

}  // namespace terragan
