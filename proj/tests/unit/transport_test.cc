/*
 * Copyright 2026 The fedspike Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "fedspike/transport.h"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <thread>

#include <gtest/gtest.h>

#include "fedspike/error.h"

namespace fedspike {
namespace {

using std::chrono::milliseconds;
namespace fs = std::filesystem;

fs::path FreshDir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("fedspike_" + name);
  fs::remove_all(dir);
  return dir;
}

void ExerciseTwoRounds(Transport& t) {
  auto a = t.Connect("a");
  auto b = t.Connect("b");
  a->Send(1, "alpha");
  b->Send(1, "beta");
  auto got = t.Gather(1, 2, milliseconds(2000));
  std::sort(got.begin(), got.end());
  ASSERT_EQ(got, (std::vector<std::string>{"alpha", "beta"}));
  t.Broadcast("global");
  EXPECT_EQ(a->AwaitBroadcast(milliseconds(2000)).value_or(""), "global");
  EXPECT_EQ(b->AwaitBroadcast(milliseconds(2000)).value_or(""), "global");
  a->Send(2, "a2");
  got = t.Gather(2, 2, milliseconds(300));
  EXPECT_EQ(got, std::vector<std::string>{"a2"});  // b stays silent
  t.Shutdown();
}

TEST(InProcessTransportTest, TwoRounds) {
  InProcessTransport t;
  ExerciseTwoRounds(t);
}

TEST(FileTransportTest, TwoRounds) {
  const fs::path dir = FreshDir("file_two_rounds");
  FileTransport t(dir);
  ExerciseTwoRounds(t);
  EXPECT_TRUE(fs::exists(dir / "1_a.msg"));
  EXPECT_TRUE(fs::exists(dir / FileTransport::kBroadcastFile));
  fs::remove_all(dir);
}

TEST(FileTransportTest, RejectsStaleSessionDirectory) {
  const fs::path dir = FreshDir("file_stale");
  fs::create_directories(dir);
  std::ofstream(dir / "1_x.msg") << "old";
  EXPECT_THROW(FileTransport{dir}, TransportError);
  fs::remove_all(dir);
}

TEST(FileTransportTest, MessageFileNames) {
  EXPECT_EQ(FileTransport::MessageFileName(1, "client-003"), "1_client-003.msg");
  EXPECT_EQ(FileTransport::MessageFileName(2, "x"), "2_x.msg");
}

TEST(TcpTransportTest, TwoRounds) {
  TcpTransport t;
  EXPECT_GT(t.port(), 0);
  ExerciseTwoRounds(t);
}

TEST(FrameTest, RoundTripAndTruncation) {
  const std::string payload = "{\"type\":\"projector\"}";
  const std::string frame = EncodeFrame(payload);
  ASSERT_EQ(frame.size(), payload.size() + 4);
  EXPECT_EQ(static_cast<unsigned char>(frame[3]), payload.size());
  EXPECT_EQ(DecodeFrame(frame), payload);
  EXPECT_THROW(DecodeFrame(frame.substr(0, 3)), TransportError);
  EXPECT_THROW(DecodeFrame(frame.substr(0, frame.size() - 1)), TransportError);
  EXPECT_THROW(DecodeFrame(frame + "x"), TransportError);
  EXPECT_EQ(DecodeFrame(EncodeFrame("")), "");
}

}  // namespace
}  // namespace fedspike
