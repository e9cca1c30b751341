// Copyright 2026 The voxedge Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include "voxedge/config.hpp"
#include "voxedge/errors.hpp"

namespace voxedge {
namespace {

TEST(Config, DefaultsAreDeskScale) {
  const auto c = parse_config("");
  EXPECT_EQ(c.resolution, 16);
  EXPECT_EQ(c.channel_scale, 0.25);
  EXPECT_EQ(c.n_in, 512u);
  EXPECT_EQ(c.m_out, 512u);
  EXPECT_EQ(c.batch, 8u);
  EXPECT_EQ(c.lr, 0.0007);
  EXPECT_EQ(c.levels(), 4);
  EXPECT_EQ(ModelConfig::paper_scale().levels(), 5);
}

TEST(Config, ParsesKeysCommentsAndLambdaOverrides) {
  const auto c = parse_config(
      "# desk\nresolution = 32\nchannel_scale = 0.5   # half\nprofile = pcn\nlambda3 = 42\n"
      "lr=0.001\nseed = 9\nuse_edges = false\n");
  EXPECT_EQ(c.resolution, 32);
  EXPECT_EQ(c.channel_scale, 0.5);
  EXPECT_EQ(c.weights.cd_sharp, 0.0);
  EXPECT_EQ(c.weights.locality, 0.0);
  EXPECT_EQ(c.weights.bce, 42.0);
  EXPECT_EQ(c.lr, 0.001);
  EXPECT_EQ(c.seed, 9u);
  EXPECT_FALSE(c.use_edges);
}

TEST(Config, LambdaOverrideWinsRegardlessOfOrder) {
  EXPECT_EQ(parse_config("lambda2 = 7\nprofile = pcn\n").weights.cd_sharp, 7.0);
}

TEST(Config, FormatRoundTrips) {
  auto c = parse_config("resolution = 8\nn_in = 64\nlambda4 = 1.5e9\nlr = 0.00123\n");
  const auto back = parse_config(format_config(c));
  EXPECT_EQ(format_config(back), format_config(c));
  EXPECT_EQ(back.weights.density, 1.5e9);
  EXPECT_EQ(back.lr, 0.00123);
}

TEST(Config, ErrorsCarryLineNumbers) {
  try {
    parse_config("resolution = 16\nbogus = 1\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  EXPECT_THROW(parse_config("lr = fast\n"), ParseError);
  EXPECT_THROW(parse_config("use_edges = maybe\n"), ParseError);
  EXPECT_THROW(parse_config("resolution\n"), ParseError);
}

TEST(Config, ValidationRejectsBadCombinations) {
  EXPECT_THROW(parse_config("resolution = 12\n"), ConfigError);
  EXPECT_THROW(parse_config("resolution = 4\n"), ConfigError);
  EXPECT_THROW(parse_config("resolution = 32\nn_in = 8\n"), ConfigError);
  EXPECT_THROW(parse_config("profile = shapenet\n"), ConfigError);
  EXPECT_THROW(parse_config("lr = 0\n"), ConfigError);
  EXPECT_THROW(parse_config("bn_momentum = 1\n"), ConfigError);
}

TEST(Config, ChannelScaling) {
  ModelConfig c;
  c.channel_scale = 0.25;
  EXPECT_EQ(c.channels(128), 32);
  EXPECT_EQ(c.channels(8), 4);
  c.channel_scale = 1.0 / 3.0;
  EXPECT_EQ(c.channels(30), 10);
}

}  // namespace
}  // namespace voxedge
