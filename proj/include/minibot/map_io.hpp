/*
 * Copyright 2026 The Minibot Authors
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

#ifndef MINIBOT_MAP_IO_HPP_
#define MINIBOT_MAP_IO_HPP_

// Occupancy maps on disk: a binary PGM image plus a YAML metadata file, in
// the layout produced by the common map_saver tool.
//
//   image: <name>.pgm
//   resolution: 0.010000
//   origin: [-5.000000, -15.560000, 0.000000]
//   negate: 0
//   occupied_thresh: 0.65
//   free_thresh: 0.196
//
// Pixels are 0 (occupied), 254 (free) or 205 (unknown). Image row 0 is the
// top of the map, i.e. the highest-y cell row.

#include <yaml-cpp/yaml.h>

#include <array>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <vector>

#include "minibot/world.hpp"

namespace minibot {

class MapError : public std::runtime_error {
 public:
  enum class Code { kMissingFile, kIo, kBadHeader, kBadYaml, kUnknownKey, kMissingKey, kBadValue };

  MapError(Code code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Code code() const { return code_; }

 private:
  Code code_;
};

inline constexpr std::uint8_t kPixelOccupied = 0;
inline constexpr std::uint8_t kPixelFree = 254;
inline constexpr std::uint8_t kPixelUnknown = 205;

namespace detail {

inline std::string format_fixed6(double v) {
  std::array<char, 64> buf{};
  std::snprintf(buf.data(), buf.size(), "%.6f", v);
  return buf.data();
}

inline std::string format_shortest(double v) {
  std::array<char, 64> buf{};
  auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

inline std::uint8_t pixel_for(CellClass c) {
  switch (c) {
    case CellClass::kOccupied: return kPixelOccupied;
    case CellClass::kFree: return kPixelFree;
    case CellClass::kUnknown: break;
  }
  return kPixelUnknown;
}

}  // namespace detail

// YAML metadata text for a grid whose image file is `image_name`.
inline std::string map_yaml(const OccupancyGrid& grid, const std::string& image_name) {
  std::ostringstream out;
  out << "image: " << image_name << "\n"
      << "resolution: " << detail::format_fixed6(grid.resolution) << "\n"
      << "origin: [" << detail::format_fixed6(grid.origin.x) << ", "
      << detail::format_fixed6(grid.origin.y) << ", " << detail::format_fixed6(grid.origin.theta)
      << "]\n"
      << "negate: 0\n"
      << "occupied_thresh: " << detail::format_shortest(grid.occupied_thresh) << "\n"
      << "free_thresh: " << detail::format_shortest(grid.free_thresh) << "\n";
  return out.str();
}

// Image rows top to bottom, trinary pixels.
inline std::vector<std::uint8_t> map_pixels(const OccupancyGrid& grid) {
  std::vector<std::uint8_t> px(grid.size());
  std::size_t k = 0;
  for (int row = grid.height - 1; row >= 0; --row) {
    for (int col = 0; col < grid.width; ++col) px[k++] = detail::pixel_for(grid.classify(col, row));
  }
  return px;
}

// Writes <basename>.pgm and <basename>.yaml.
inline void save_map(const OccupancyGrid& grid, const std::filesystem::path& basename) {
  grid.validate();
  std::filesystem::path pgm_path = basename;
  pgm_path += ".pgm";
  std::filesystem::path yaml_path = basename;
  yaml_path += ".yaml";

  {
    std::ofstream pgm(pgm_path, std::ios::binary | std::ios::trunc);
    if (!pgm) throw MapError(MapError::Code::kIo, "cannot open for writing: " + pgm_path.string());
    pgm << "P5\n" << grid.width << " " << grid.height << "\n255\n";
    const auto px = map_pixels(grid);
    pgm.write(reinterpret_cast<const char*>(px.data()), static_cast<std::streamsize>(px.size()));
    if (!pgm) throw MapError(MapError::Code::kIo, "write failed: " + pgm_path.string());
  }
  {
    std::ofstream yaml(yaml_path, std::ios::trunc);
    if (!yaml) throw MapError(MapError::Code::kIo, "cannot open for writing: " + yaml_path.string());
    yaml << map_yaml(grid, pgm_path.filename().string());
    if (!yaml) throw MapError(MapError::Code::kIo, "write failed: " + yaml_path.string());
  }
}

namespace detail {

struct PgmImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;
};

// Next whitespace-delimited header token, skipping '#' comments.
inline std::string pgm_token(std::istream& in, const std::string& path) {
  std::string tok;
  while (true) {
    const int c = in.get();
    if (c == EOF) break;
    if (c == '#') {
      std::string ignored;
      std::getline(in, ignored);
      if (!tok.empty()) break;
      continue;
    }
    if (std::isspace(c)) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(static_cast<char>(c));
  }
  if (tok.empty()) throw MapError(MapError::Code::kBadHeader, "truncated PGM header: " + path);
  return tok;
}

inline int pgm_int(std::istream& in, const std::string& path, const char* field) {
  const std::string tok = pgm_token(in, path);
  int v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size() || v <= 0) {
    throw MapError(MapError::Code::kBadHeader,
                   std::string("bad PGM ") + field + " '" + tok + "': " + path);
  }
  return v;
}

inline PgmImage read_pgm(const std::filesystem::path& p) {
  const std::string path = p.string();
  std::ifstream in(p, std::ios::binary);
  if (!in) throw MapError(MapError::Code::kMissingFile, "map image not found: " + path);
  if (pgm_token(in, path) != "P5") {
    throw MapError(MapError::Code::kBadHeader, "not a binary (P5) PGM: " + path);
  }
  PgmImage img;
  img.width = pgm_int(in, path, "width");
  img.height = pgm_int(in, path, "height");
  const int maxval = pgm_int(in, path, "maxval");
  if (maxval != 255) {
    throw MapError(MapError::Code::kBadHeader,
                   "unsupported PGM maxval " + std::to_string(maxval) + " (expected 255): " + path);
  }
  img.pixels.resize(static_cast<std::size_t>(img.width) * static_cast<std::size_t>(img.height));
  in.read(reinterpret_cast<char*>(img.pixels.data()),
          static_cast<std::streamsize>(img.pixels.size()));
  if (in.gcount() != static_cast<std::streamsize>(img.pixels.size())) {
    throw MapError(MapError::Code::kBadHeader, "PGM pixel data truncated: " + path);
  }
  return img;
}

template <typename T>
T yaml_value(const YAML::Node& node, const char* key, const std::string& path) {
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    throw MapError(MapError::Code::kBadValue, std::string("bad value for '") + key + "': " + path);
  }
}

}  // namespace detail

inline OccupancyGrid load_map(const std::filesystem::path& basename) {
  std::filesystem::path yaml_path = basename;
  if (yaml_path.extension() != ".yaml") yaml_path += ".yaml";
  const std::string path = yaml_path.string();
  if (!std::filesystem::exists(yaml_path)) {
    throw MapError(MapError::Code::kMissingFile, "map metadata not found: " + path);
  }

  YAML::Node doc;
  try {
    doc = YAML::LoadFile(path);
  } catch (const YAML::Exception& e) {
    throw MapError(MapError::Code::kBadYaml, "malformed map YAML (" + std::string(e.what()) +
                                                 "): " + path);
  }
  if (!doc.IsMap()) throw MapError(MapError::Code::kBadYaml, "map YAML is not a mapping: " + path);

  static const std::set<std::string> kKeys{"image",  "resolution",      "origin",
                                           "negate", "occupied_thresh", "free_thresh"};
  for (const auto& kv : doc) {
    const auto key = kv.first.as<std::string>();
    if (!kKeys.count(key)) {
      throw MapError(MapError::Code::kUnknownKey, "unknown map YAML key '" + key + "': " + path);
    }
  }
  for (const auto& key : kKeys) {
    if (!doc[key]) {
      throw MapError(MapError::Code::kMissingKey, "missing map YAML key '" + key + "': " + path);
    }
  }

  const auto image = detail::yaml_value<std::string>(doc["image"], "image", path);
  const auto resolution = detail::yaml_value<double>(doc["resolution"], "resolution", path);
  const auto origin = detail::yaml_value<std::vector<double>>(doc["origin"], "origin", path);
  const auto negate = detail::yaml_value<int>(doc["negate"], "negate", path);
  const auto occ = detail::yaml_value<double>(doc["occupied_thresh"], "occupied_thresh", path);
  const auto free = detail::yaml_value<double>(doc["free_thresh"], "free_thresh", path);
  if (origin.size() != 3) {
    throw MapError(MapError::Code::kBadValue, "origin must have 3 elements: " + path);
  }
  if (negate != 0 && negate != 1) {
    throw MapError(MapError::Code::kBadValue, "negate must be 0 or 1: " + path);
  }
  if (!(resolution > 0.0)) throw MapError(MapError::Code::kBadValue, "resolution <= 0: " + path);
  if (origin[2] != 0.0) {
    throw MapError(MapError::Code::kBadValue, "rotated map origins are not supported: " + path);
  }
  if (!(0.0 <= free && free < occ && occ <= 1.0)) {
    throw MapError(MapError::Code::kBadValue, "thresholds must satisfy free < occupied: " + path);
  }

  std::filesystem::path image_path(image);
  if (image_path.is_relative()) image_path = yaml_path.parent_path() / image_path;
  const auto img = detail::read_pgm(image_path);

  OccupancyGrid grid(img.width, img.height, resolution, Pose2D{origin[0], origin[1], 0.0});
  grid.occupied_thresh = occ;
  grid.free_thresh = free;
  std::size_t k = 0;
  for (int row = img.height - 1; row >= 0; --row) {
    for (int col = 0; col < img.width; ++col) {
      const double px = img.pixels[k++];
      const double p = negate ? px / 255.0 : (255.0 - px) / 255.0;
      const CellClass c = p > occ    ? CellClass::kOccupied
                          : p < free ? CellClass::kFree
                                     : CellClass::kUnknown;
      grid.set_class(col, row, c);
    }
  }
  return grid;
}

}  // namespace minibot

#endif  // MINIBOT_MAP_IO_HPP_
