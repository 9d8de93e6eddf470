/*
 * Copyright 2026 The evalmesh Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "evalmesh/pipeline/image.hpp"

#include <png.h>

#include <cctype>
#include <cstring>
#include <string>

#include "evalmesh/common/error.hpp"
#include "evalmesh/pipeline/ops.hpp"

namespace evalmesh::pipeline {

namespace {

constexpr int kMaxSide = 1 << 15;

class PnmReader {
 public:
  explicit PnmReader(std::span<const std::uint8_t> in) : in_(in) {}

  // Next whitespace-separated header integer, skipping '#' comments.
  int header_int() {
    skip_space();
    if (pos_ >= in_.size() || !std::isdigit(in_[pos_])) corrupt("bad header");
    long v = 0;
    while (pos_ < in_.size() && std::isdigit(in_[pos_])) {
      v = v * 10 + (in_[pos_++] - '0');
      if (v > kMaxSide * 16L) corrupt("header value too large");
    }
    return static_cast<int>(v);
  }

  void single_space() {
    if (pos_ >= in_.size() || !std::isspace(in_[pos_])) corrupt("missing raster separator");
    ++pos_;
  }

  std::uint8_t byte() {
    if (pos_ >= in_.size()) corrupt("truncated raster");
    return in_[pos_++];
  }

  [[noreturn]] static void corrupt(const std::string& why) {
    throw Error(ErrorCode::kCorruptImage, "netpbm: " + why);
  }

 private:
  void skip_space() {
    while (pos_ < in_.size()) {
      if (in_[pos_] == '#') {
        while (pos_ < in_.size() && in_[pos_] != '\n') ++pos_;
      } else if (std::isspace(in_[pos_])) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 2;
};

Image decode_pnm(std::span<const std::uint8_t> in) {
  const char kind = static_cast<char>(in[1]);
  const bool color = kind == '3' || kind == '6';
  const bool ascii = kind == '2' || kind == '3';
  PnmReader r(in);
  const int width = r.header_int();
  const int height = r.header_int();
  const int maxval = r.header_int();
  if (width < 1 || height < 1 || width > kMaxSide || height > kMaxSide) {
    PnmReader::corrupt("bad dimensions");
  }
  if (maxval < 1) PnmReader::corrupt("bad maxval");
  if (maxval > 255) {
    throw Error(ErrorCode::kUnsupportedFormat, "16-bit netpbm images are not supported");
  }
  if (!ascii) r.single_space();
  auto sample = [&] {
    const int v = ascii ? r.header_int() : r.byte();
    if (v > maxval) PnmReader::corrupt("sample exceeds maxval");
    return static_cast<std::uint8_t>(maxval == 255 ? v : (v * 255 + maxval / 2) / maxval);
  };
  Image img = make_image(height, width, ColorLayout::kRGB);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      if (color) {
        for (int c = 0; c < 3; ++c) img.at(y, x, c) = sample();
      } else {
        const auto g = sample();
        for (int c = 0; c < 3; ++c) img.at(y, x, c) = g;
      }
    }
  }
  return img;
}

Image decode_png(std::span<const std::uint8_t> in) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  if (png_image_begin_read_from_memory(&image, in.data(), in.size()) == 0) {
    std::string why = image.message;
    png_image_free(&image);
    throw Error(ErrorCode::kCorruptImage, "png: " + why);
  }
  if (image.width > kMaxSide || image.height > kMaxSide) {
    png_image_free(&image);
    throw Error(ErrorCode::kCorruptImage, "png: image too large");
  }
  image.format = PNG_FORMAT_RGB;
  Image img = make_image(static_cast<int>(image.height), static_cast<int>(image.width),
                         ColorLayout::kRGB);
  if (png_image_finish_read(&image, nullptr, img.pixels.data(), 0, nullptr) == 0) {
    std::string why = image.message;
    png_image_free(&image);
    throw Error(ErrorCode::kCorruptImage, "png: " + why);
  }
  return img;
}

}  // namespace

Image make_image(int height, int width, ColorLayout color) {
  Image img;
  img.height = height;
  img.width = width;
  img.color_layout = color;
  img.pixels.assign(static_cast<std::size_t>(height) * width * Image::kChannels, 0);
  return img;
}

Image decode_image(std::span<const std::uint8_t> bytes, ColorLayout target) {
  static constexpr std::uint8_t kPngMagic[] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  Image img;
  if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] >= '2' && bytes[1] <= '6' &&
      bytes[1] != '4') {
    img = decode_pnm(bytes);
  } else if (bytes.size() >= sizeof kPngMagic &&
             std::memcmp(bytes.data(), kPngMagic, sizeof kPngMagic) == 0) {
    img = decode_png(bytes);
  } else {
    throw Error(ErrorCode::kUnsupportedFormat, "unrecognised image encoding");
  }
  return convert_color(img, target);
}

std::vector<std::uint8_t> encode_ppm(const Image& img) {
  const Image rgb = convert_color(img, ColorLayout::kRGB);
  const std::string header =
      "P6\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), rgb.pixels.begin(), rgb.pixels.end());
  return out;
}

std::vector<std::uint8_t> encode_png(const Image& img) {
  const Image rgb = convert_color(img, ColorLayout::kRGB);
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width);
  image.height = static_cast<png_uint_32>(img.height);
  image.format = PNG_FORMAT_RGB;
  png_alloc_size_t size = 0;
  if (png_image_write_to_memory(&image, nullptr, &size, 0, rgb.pixels.data(), 0, nullptr) ==
      0) {
    throw Error(ErrorCode::kInternal, std::string("png encode: ") + image.message);
  }
  std::vector<std::uint8_t> out(size);
  if (png_image_write_to_memory(&image, out.data(), &size, 0, rgb.pixels.data(), 0,
                                nullptr) == 0) {
    throw Error(ErrorCode::kInternal, std::string("png encode: ") + image.message);
  }
  out.resize(size);
  return out;
}

Tensor image_to_tensor(const Image& img, DataLayout layout) {
  Tensor t = make_u8({1, img.height, img.width, Image::kChannels}, DataLayout::kNHWC,
                     img.pixels);
  return layout == DataLayout::kNHWC ? t : convert_layout(t, layout);
}

Image tensor_to_image(const Tensor& t, ColorLayout color) {
  if (t.element_type != ElementType::kUInt8) {
    throw Error(ErrorCode::kInvalidArgument, "image steps need a uint8 tensor");
  }
  const auto d = image_dims(t);
  if (d.n != 1 || d.c != Image::kChannels) {
    throw Error(ErrorCode::kShapeMismatch, "image steps need a single three-channel image");
  }
  Tensor hwc = t.layout == DataLayout::kNHWC ? t : convert_layout(t, DataLayout::kNHWC);
  Image img;
  img.height = static_cast<int>(d.h);
  img.width = static_cast<int>(d.w);
  img.color_layout = color;
  img.pixels = std::move(hwc.u8);
  return img;
}

}  // namespace evalmesh::pipeline
