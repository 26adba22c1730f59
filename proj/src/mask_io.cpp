/* Copyright 2026 The Oralscreen Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#include "oralscreen/mask_io.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <bit>
#include <cctype>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "oralscreen/errors.hpp"

namespace oralscreen {
namespace {

namespace fs = std::filesystem;

constexpr std::array<char, 4> kPmapMagic = {'P', 'M', 'A', 'P'};
constexpr std::uint32_t kMaxSide = 1u << 16;

std::ofstream OpenForWrite(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

std::vector<char> ReadAll(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return std::vector<char>(std::istreambuf_iterator<char>(in), {});
}

void Finish(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out) throw IoError("write failed: " + path.string());
}

std::vector<std::uint8_t> MaskToGray(const BinaryMask& mask) {
  std::vector<std::uint8_t> gray(mask.size());
  for (std::size_t i = 0; i < mask.size(); ++i) gray[i] = mask[i] ? 255 : 0;
  return gray;
}

BinaryMask GrayToMask(int width, int height, const std::uint8_t* gray,
                      const fs::path& path) {
  BinaryMask mask(width, height);
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (gray[i] == 255) {
      mask.set(i, true);
    } else if (gray[i] != 0) {
      throw ValidationError(path.string() + ": pixel " + std::to_string(i) +
                            " has gray level " + std::to_string(gray[i]) +
                            " (masks use 0 and 255)");
    }
  }
  return mask;
}

// Skips whitespace and '#' comments in a PNM header.
void SkipPnmSpace(std::istream& in) {
  for (;;) {
    const int c = in.peek();
    if (c == '#') {
      std::string line;
      std::getline(in, line);
    } else if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      in.get();
    } else {
      return;
    }
  }
}

int ReadPnmInt(std::istream& in, const fs::path& path) {
  SkipPnmSpace(in);
  long v = -1;
  if (!(in >> v) || v <= 0 || v > static_cast<long>(kMaxSide)) {
    throw IoError(path.string() + ": malformed PGM header");
  }
  return static_cast<int>(v);
}

void PutU32(std::ostream& out, std::uint32_t v) {
  const std::array<char, 4> b = {static_cast<char>(v & 0xff),
                                 static_cast<char>((v >> 8) & 0xff),
                                 static_cast<char>((v >> 16) & 0xff),
                                 static_cast<char>((v >> 24) & 0xff)};
  out.write(b.data(), 4);
}

std::uint32_t GetU32(const char* p) {
  const auto* u = reinterpret_cast<const unsigned char*>(p);
  return static_cast<std::uint32_t>(u[0]) |
         (static_cast<std::uint32_t>(u[1]) << 8) |
         (static_cast<std::uint32_t>(u[2]) << 16) |
         (static_cast<std::uint32_t>(u[3]) << 24);
}

// Reads any PNG into packed 8-bit samples of the given simplified format.
std::vector<std::uint8_t> ReadPng(const fs::path& path, png_uint_32 format,
                                  int* width, int* height) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  const std::string name = path.string();
  if (!png_image_begin_read_from_file(&image, name.c_str())) {
    throw IoError(name + ": " + image.message);
  }
  image.format = format;
  if (image.width == 0 || image.height == 0 || image.width > kMaxSide ||
      image.height > kMaxSide) {
    png_image_free(&image);
    throw IoError(name + ": unsupported PNG dimensions");
  }
  std::vector<std::uint8_t> buffer(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw IoError(name + ": " + msg);
  }
  *width = static_cast<int>(image.width);
  *height = static_cast<int>(image.height);
  return buffer;
}

void WritePng(const fs::path& path, png_uint_32 format, int width, int height,
              const std::uint8_t* samples) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(width);
  image.height = static_cast<png_uint_32>(height);
  image.format = format;
  const std::string name = path.string();
  if (!png_image_write_to_file(&image, name.c_str(), 0, samples, 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw IoError(name + ": " + msg);
  }
}

std::string Extension(const fs::path& path) {
  std::string ext = path.extension().string();
  for (char& c : ext) c = static_cast<char>(std::tolower(c));
  return ext;
}

}  // namespace

void write_mask_pgm(const fs::path& path, const BinaryMask& mask) {
  std::ofstream out = OpenForWrite(path);
  out << "P5\n" << mask.width() << ' ' << mask.height() << "\n255\n";
  const std::vector<std::uint8_t> gray = MaskToGray(mask);
  out.write(reinterpret_cast<const char*>(gray.data()),
            static_cast<std::streamsize>(gray.size()));
  Finish(out, path);
}

BinaryMask read_mask_pgm(const fs::path& path) {
  const std::vector<char> bytes = ReadAll(path);
  std::istringstream in(std::string(bytes.begin(), bytes.end()));
  std::string magic(2, '\0');
  in.read(magic.data(), 2);
  if (!in || magic != "P5") throw IoError(path.string() + ": not a binary PGM");
  const int width = ReadPnmInt(in, path);
  const int height = ReadPnmInt(in, path);
  const int maxval = ReadPnmInt(in, path);
  if (maxval != 255) {
    throw IoError(path.string() + ": PGM maxval must be 255");
  }
  // Exactly one whitespace byte separates the header from the raster.
  if (!std::isspace(in.get())) {
    throw IoError(path.string() + ": malformed PGM header");
  }
  const auto offset = static_cast<std::size_t>(in.tellg());
  const std::size_t n = static_cast<std::size_t>(width) * height;
  if (bytes.size() - offset != n) {
    throw IoError(path.string() + ": PGM raster has " +
                  std::to_string(bytes.size() - offset) + " bytes, expected " +
                  std::to_string(n));
  }
  return GrayToMask(width, height,
                    reinterpret_cast<const std::uint8_t*>(bytes.data() + offset),
                    path);
}

void write_mask_png(const fs::path& path, const BinaryMask& mask) {
  const std::vector<std::uint8_t> gray = MaskToGray(mask);
  WritePng(path, PNG_FORMAT_GRAY, mask.width(), mask.height(), gray.data());
}

BinaryMask read_mask_png(const fs::path& path) {
  int width = 0;
  int height = 0;
  const std::vector<std::uint8_t> gray =
      ReadPng(path, PNG_FORMAT_GRAY, &width, &height);
  return GrayToMask(width, height, gray.data(), path);
}

void write_mask(const fs::path& path, const BinaryMask& mask) {
  const std::string ext = Extension(path);
  if (ext == ".png") return write_mask_png(path, mask);
  if (ext == ".pgm") return write_mask_pgm(path, mask);
  throw IoError(path.string() + ": mask extension must be .png or .pgm");
}

BinaryMask read_mask(const fs::path& path) {
  const std::string ext = Extension(path);
  if (ext == ".png") return read_mask_png(path);
  if (ext == ".pgm") return read_mask_pgm(path);
  throw IoError(path.string() + ": mask extension must be .png or .pgm");
}

RgbImage read_image_png(const fs::path& path) {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb = ReadPng(path, PNG_FORMAT_RGB, &width, &height);
  return RgbImage(width, height, std::move(rgb));
}

void write_image_png(const fs::path& path, const RgbImage& image) {
  WritePng(path, PNG_FORMAT_RGB, image.width(), image.height(),
           image.bytes().data());
}

void write_probability_map(const fs::path& path, const ProbabilityMap& map) {
  std::ofstream out = OpenForWrite(path);
  out.write(kPmapMagic.data(), 4);
  PutU32(out, static_cast<std::uint32_t>(map.width()));
  PutU32(out, static_cast<std::uint32_t>(map.height()));
  PutU32(out, 0);
  for (float s : map.scores()) PutU32(out, std::bit_cast<std::uint32_t>(s));
  Finish(out, path);
}

ProbabilityMap read_probability_map(const fs::path& path) {
  const std::vector<char> bytes = ReadAll(path);
  if (bytes.size() < 16 || !std::equal(kPmapMagic.begin(), kPmapMagic.end(),
                                       bytes.begin())) {
    throw IoError(path.string() + ": not a PMAP file");
  }
  const std::uint32_t width = GetU32(bytes.data() + 4);
  const std::uint32_t height = GetU32(bytes.data() + 8);
  if (GetU32(bytes.data() + 12) != 0) {
    throw IoError(path.string() + ": PMAP reserved bytes must be zero");
  }
  if (width == 0 || height == 0 || width > kMaxSide || height > kMaxSide) {
    throw IoError(path.string() + ": PMAP dimensions out of range");
  }
  const std::size_t n = static_cast<std::size_t>(width) * height;
  if (bytes.size() != 16 + 4 * n) {
    throw IoError(path.string() + ": PMAP payload has " +
                  std::to_string(bytes.size() - 16) + " bytes, expected " +
                  std::to_string(4 * n));
  }
  std::vector<float> scores(n);
  for (std::size_t i = 0; i < n; ++i) {
    scores[i] = std::bit_cast<float>(GetU32(bytes.data() + 16 + 4 * i));
  }
  return ProbabilityMap(static_cast<int>(width), static_cast<int>(height),
                        std::move(scores));
}

}  // namespace oralscreen
