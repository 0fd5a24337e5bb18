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

#include "minibot/map_io.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <string>
#include <vector>

#include "minibot/demo_world.hpp"

namespace minibot {
namespace {

namespace fs = std::filesystem;

class MapIoTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("minibot_map_io_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
            "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  static std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  }
  static void spit(const fs::path& p, const std::string& s) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out << s;
  }

  fs::path dir_;
};

// Image order: top row (y = 1) first.
OccupancyGrid two_by_two() {
  OccupancyGrid g(2, 2, 0.01);
  g.set_class(0, 1, CellClass::kOccupied);
  g.set_class(1, 1, CellClass::kFree);
  g.set_class(0, 0, CellClass::kUnknown);
  g.set_class(1, 0, CellClass::kFree);
  return g;
}

TEST_F(MapIoTest, TwoByTwoPixelBytes) {
  const OccupancyGrid g = two_by_two();
  save_map(g, dir_ / "m");
  const std::string pgm = slurp(dir_ / "m.pgm");
  const std::string expected = std::string("P5\n2 2\n255\n") + std::string("\x00\xfe\xcd\xfe", 4);
  EXPECT_EQ(pgm, expected);
}

TEST_F(MapIoTest, YamlFormatting) {
  const OccupancyGrid g = two_by_two();
  save_map(g, dir_ / "m");
  EXPECT_EQ(slurp(dir_ / "m.yaml"),
            "image: m.pgm\n"
            "resolution: 0.010000\n"
            "origin: [0.000000, 0.000000, 0.000000]\n"
            "negate: 0\n"
            "occupied_thresh: 0.65\n"
            "free_thresh: 0.196\n");
}

TEST_F(MapIoTest, RoundTripKeepsClassification) {
  OccupancyGrid g(37, 23, 0.05, Pose2D{-1.0, 2.5, 0.0});
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> l(-6.0, 6.0);
  for (double& c : g.cells) c = l(rng);
  save_map(g, dir_ / "r");
  const OccupancyGrid back = load_map(dir_ / "r");
  ASSERT_EQ(back.width, g.width);
  ASSERT_EQ(back.height, g.height);
  EXPECT_EQ(back.resolution, g.resolution);
  EXPECT_EQ(back.origin, g.origin);
  for (std::size_t i = 0; i < g.size(); ++i) EXPECT_EQ(back.classify(i), g.classify(i)) << i;
}

TEST_F(MapIoTest, SaveLoadSaveIsByteIdentical) {
  const OccupancyGrid g = make_demo_world(0.05);
  save_map(g, dir_ / "a");
  save_map(load_map(dir_ / "a"), dir_ / "b");
  EXPECT_EQ(slurp(dir_ / "a.pgm"), slurp(dir_ / "b.pgm"));
  // Only the image name differs.
  std::string ya = slurp(dir_ / "a.yaml");
  std::string yb = slurp(dir_ / "b.yaml");
  ya.replace(ya.find("a.pgm"), 5, "b.pgm");
  EXPECT_EQ(ya, yb);
}

TEST_F(MapIoTest, LoadsPaperOrigin) {
  spit(dir_ / "p.pgm", std::string("P5\n# comment\n3 1\n255\n") + std::string("\x00\xfe\xcd", 3));
  spit(dir_ / "p.yaml",
       "image: p.pgm\nresolution: 0.010000\norigin: [-5.000000, -15.560000, 0.000000]\n"
       "negate: 0\noccupied_thresh: 0.65\nfree_thresh: 0.196\n");
  const OccupancyGrid g = load_map(dir_ / "p");
  EXPECT_DOUBLE_EQ(g.origin.x, -5.0);
  EXPECT_DOUBLE_EQ(g.origin.y, -15.56);
  EXPECT_EQ(g.classify(0, 0), CellClass::kOccupied);
  EXPECT_EQ(g.classify(1, 0), CellClass::kFree);
  EXPECT_EQ(g.classify(2, 0), CellClass::kUnknown);
  EXPECT_EQ(g.cells[0], kLogOddsMax);
  EXPECT_EQ(g.cells[1], kLogOddsMin);
  EXPECT_EQ(g.cells[2], 0.0);
}

TEST_F(MapIoTest, NegateFlipsPixelMeaning) {
  spit(dir_ / "n.pgm", std::string("P5\n2 1\n255\n") + std::string("\x00\xfe", 2));
  spit(dir_ / "n.yaml",
       "image: n.pgm\nresolution: 0.1\norigin: [0, 0, 0]\n"
       "negate: 1\noccupied_thresh: 0.65\nfree_thresh: 0.196\n");
  const OccupancyGrid g = load_map(dir_ / "n");
  EXPECT_EQ(g.classify(0, 0), CellClass::kFree);
  EXPECT_EQ(g.classify(1, 0), CellClass::kOccupied);
}

MapError::Code load_error(const fs::path& base) {
  try {
    load_map(base);
  } catch (const MapError& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error";
  return MapError::Code::kIo;
}

TEST_F(MapIoTest, Errors) {
  const std::string yaml =
      "image: e.pgm\nresolution: 0.1\norigin: [0, 0, 0]\n"
      "negate: 0\noccupied_thresh: 0.65\nfree_thresh: 0.196\n";
  EXPECT_EQ(load_error(dir_ / "missing"), MapError::Code::kMissingFile);

  spit(dir_ / "e.yaml", yaml);
  EXPECT_EQ(load_error(dir_ / "e"), MapError::Code::kMissingFile);  // image absent

  spit(dir_ / "e.pgm", std::string("P5\n1 1\n100\n") + std::string("\x00", 1));
  EXPECT_EQ(load_error(dir_ / "e"), MapError::Code::kBadHeader);
  spit(dir_ / "e.pgm", std::string("P2\n1 1\n255\n0\n"));
  EXPECT_EQ(load_error(dir_ / "e"), MapError::Code::kBadHeader);
  spit(dir_ / "e.pgm", std::string("P5\n2 2\n255\n") + std::string("\x00", 1));
  EXPECT_EQ(load_error(dir_ / "e"), MapError::Code::kBadHeader);

  spit(dir_ / "e.pgm", std::string("P5\n1 1\n255\n") + std::string("\x00", 1));
  EXPECT_NO_THROW(load_map(dir_ / "e"));

  spit(dir_ / "e.yaml", yaml + "mode: trinary\n");
  EXPECT_EQ(load_error(dir_ / "e"), MapError::Code::kUnknownKey);
  spit(dir_ / "e.yaml", "image: e.pgm\nresolution: 0.1\norigin: [0, 0, 0]\nnegate: 0\n");
  EXPECT_EQ(load_error(dir_ / "e"), MapError::Code::kMissingKey);
  spit(dir_ / "e.yaml",
       "image: e.pgm\nresolution: 0.1\norigin: [0, 0, 0]\n"
       "negate: 2\noccupied_thresh: 0.65\nfree_thresh: 0.196\n");
  EXPECT_EQ(load_error(dir_ / "e"), MapError::Code::kBadValue);
  spit(dir_ / "e.yaml", "image: [unclosed\n");
  EXPECT_EQ(load_error(dir_ / "e"), MapError::Code::kBadYaml);
}

TEST_F(MapIoTest, ErrorsNameThePath) {
  try {
    load_map(dir_ / "nowhere");
    FAIL();
  } catch (const MapError& e) {
    EXPECT_NE(std::string(e.what()).find("nowhere"), std::string::npos);
  }
}

}  // namespace
}  // namespace minibot
