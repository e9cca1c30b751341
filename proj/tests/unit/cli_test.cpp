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

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>

#include "test_support.hpp"
#include "voxedge/edges.hpp"
#include "voxedge/metrics.hpp"
#include "voxedge/pointcloud_io.hpp"
#include "voxedge/synth.hpp"
#include "voxedge/voxelizer.hpp"

namespace voxedge {
namespace {

namespace fs = std::filesystem;

struct Run {
  int code = -1;
  std::string out;
};

Run cli(const std::string& args) {
  const std::string cmd = std::string(VOXEDGE_CLI_PATH) + " " + args + " 2>/dev/null";
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  if (p == nullptr) return r;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

nlohmann::json last_json(const Run& r) {
  std::istringstream in(r.out);
  std::string line, last;
  while (std::getline(in, line)) {
    if (!line.empty()) last = line;
  }
  return nlohmann::json::parse(last);
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("voxedge_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  fs::path dir_;
};

TEST_F(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(cli("").code, 2);
  EXPECT_EQ(cli("frobnicate").code, 2);
  EXPECT_EQ(cli("edges --out x.ply").code, 2);
  EXPECT_EQ(cli("gradcheck --scope everything").code, 2);
  EXPECT_EQ(cli("--help").code, 0);
}

TEST_F(Cli, RuntimeErrorsExitOne) {
  write_file(path("bad.xyz"), "0 0 0\nnot a point\n");
  EXPECT_EQ(cli("edges --in " + path("bad.xyz") + " --out " + path("e.ply")).code, 1);
  write_file(path("cfg"), "resolution = 12\n");
  save_pointcloud(path("a.xyz"), testing::random_cloud(1, 10));
  EXPECT_EQ(cli("voxelize --in " + path("a.xyz") + " --resolution 12 --out " + path("g.bin")).code, 1);
}

TEST_F(Cli, EdgesMatchLibrary) {
  const auto pc = testing::random_cloud(3, 300);
  save_pointcloud(path("in.ply"), pc);
  const auto r = cli("edges --in " + path("in.ply") + " --out " + path("e.ply") + " --k 20 --lambda 1.5 --mask-out " +
                     path("mask.txt"));
  ASSERT_EQ(r.code, 0);
  const auto lib = extract_edges(load_pointcloud(path("in.ply")), {20, 1.5});
  EXPECT_EQ(load_pointcloud(path("e.ply")), lib.edges);
  std::string mask;
  for (auto m : lib.mask) mask += m ? "1\n" : "0\n";
  EXPECT_EQ(read_file(path("mask.txt")), mask);
  EXPECT_EQ(last_json(r)["edges"], lib.edges.size());
  const auto c3d = cli("edges --in " + path("in.ply") + " --out " + path("e2.ply") + " --profile completion3d");
  ASSERT_EQ(c3d.code, 0);
  EXPECT_EQ(last_json(c3d)["k"], 150);
  EXPECT_EQ(last_json(c3d)["lambda"], 1.8);
}

TEST_F(Cli, VoxelizeAndEvalMatchLibrary) {
  const auto a = testing::random_cloud(4, 200);
  const auto b = testing::random_cloud(5, 150);
  save_pointcloud(path("a.xyz"), a);
  save_pointcloud(path("b.xyz"), b);
  ASSERT_EQ(cli("voxelize --in " + path("a.xyz") + " --resolution 8 --out " + path("g.bin")).code, 0);
  const auto g = load_grid(path("g.bin"));
  const auto lib = density_target(a, GridSpec(8));
  for (std::size_t c = 0; c < 512; ++c) {
    EXPECT_EQ(g.at(0, c), lib.occupancy[c]);
    EXPECT_EQ(g.at(1, c), static_cast<double>(static_cast<float>(lib.density[c])));
  }
  const auto r = cli("eval --pred " + path("a.xyz") + " --gt " + path("b.xyz") + " --input " + path("b.xyz"));
  ASSERT_EQ(r.code, 0);
  const auto j = last_json(r);
  EXPECT_NEAR(j["cd"].get<double>(), chamfer(a, b), 1e-15);
  EXPECT_NEAR(j["cd_sharp"].get<double>(), chamfer_sharp(a, b), 1e-15);
  EXPECT_NEAR(j["fidelity"].get<double>(), fidelity(b, a), 1e-15);
}

TEST_F(Cli, SynthMatchesLibrary) {
  write_file(path("plan.txt"), "resolution = 8\ngenerate = 3 256 11\n");
  const auto r = cli("synth --spec " + path("plan.txt") + " --out " + path("data"));
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(last_json(r)["samples"], 3);
  make_dataset(load_synth_plan(path("plan.txt")), path("lib"));
  for (std::size_t id = 0; id < 3; ++id) {
    for (const char* f : {"complete.ply", "partial.ply", "edges.ply", "grids.bin"}) {
      EXPECT_EQ(read_file(sample_dir(path("data"), id) / f), read_file(sample_dir(path("lib"), id) / f));
    }
  }
}

TEST_F(Cli, TrainResumeCompleteScore) {
  write_file(path("plan.txt"), "resolution = 8\ngenerate = 2 256 1\n");
  ASSERT_EQ(cli("synth --spec " + path("plan.txt") + " --out " + path("data")).code, 0);
  write_file(path("cfg"), "resolution = 8\nn_in = 128\nm_out = 64\nm_edge = 16\nbatch = 2\nepochs = 1\n");
  const auto t = cli("train --config " + path("cfg") + " --data " + path("data") + " --out " + path("run/ckpt"));
  ASSERT_EQ(t.code, 0);
  EXPECT_EQ(last_json(t)["steps"], 1);
  const auto more = cli("train --resume --epochs 3 --data " + path("data") + " --out " + path("run/ckpt"));
  ASSERT_EQ(more.code, 0);
  EXPECT_EQ(last_json(more)["steps"], 3);
  const std::string log = read_file(path("run/ckpt.csv"));
  EXPECT_NE(log.find("\n2,"), std::string::npos);
  EXPECT_NE(log.find("\n3,"), std::string::npos);

  const auto in = (sample_dir(path("data"), 0) / "partial.ply").string();
  const auto c = cli("complete --ckpt " + path("run/ckpt") + " --in " + in + " --out " + path("out.ply") +
                     " --edges-out " + path("edges.ply"));
  ASSERT_EQ(c.code, 0);
  EXPECT_EQ(load_pointcloud(path("out.ply")).size(), 64u);
  EXPECT_EQ(load_pointcloud(path("edges.ply")).size(), 16u);
  const auto again = cli("complete --ckpt " + path("run/ckpt") + " --in " + in + " --out " + path("out2.ply"));
  EXPECT_EQ(read_file(path("out.ply")), read_file(path("out2.ply")));

  const auto s = cli("score --ckpt " + path("run/ckpt") + " --data " + path("data"));
  ASSERT_EQ(s.code, 0);
  EXPECT_EQ(last_json(s)["per_sample"].size(), 2u);
  EXPECT_EQ(cli("score --no-edges --ckpt " + path("run/ckpt") + " --data " + path("data")).code, 0);
}

TEST_F(Cli, GradcheckOpsIsReproducible) {
  const auto a = cli("gradcheck --scope ops --seed 3");
  const auto b = cli("gradcheck --scope ops --seed 3");
  EXPECT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
}

}  // namespace
}  // namespace voxedge
