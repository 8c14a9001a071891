/*
 * Copyright 2026 The attnfilter Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef ATTNFILTER_CORE_ORACLE_CLIENT_H_
#define ATTNFILTER_CORE_ORACLE_CLIENT_H_

#include <chrono>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "core/bundle.h"
#include "core/error.h"
#include "core/grid.h"
#include "core/npy.h"
#include "core/transport.h"
#include "json.hpp"

namespace attnfilter {

// Wire format, both directions:
//   u64 little-endian body length
//   body = compact JSON header (sorted keys) + '\n' + optional NPY payload
inline constexpr std::string_view kProtocolName = "attnfilter-oracle";
inline constexpr int kProtocolVersion = 1;
inline constexpr std::uint64_t kMaxFrameBytes = std::uint64_t{1} << 34;
inline constexpr std::chrono::milliseconds kDefaultOracleTimeout{30000};

struct Frame {
  nlohmann::json header;
  std::string payload;
};

std::string EncodeFrame(const nlohmann::json& header, std::string_view payload = {});
// Parses a frame body (everything after the length prefix).
Frame DecodeFrameBody(std::string_view body);
// Reads one complete frame. Throws Error(kProtocol) on a malformed frame.
Frame ReadFrame(Transport& transport, std::chrono::milliseconds timeout);

struct OracleInfo {
  std::string model;
  std::size_t class_count = 0;
  std::size_t layers = 0;
  std::size_t heads = 0;
  std::size_t tokens = 0;
  std::vector<std::size_t> input_shape;  // [C, H, W]
  std::vector<double> mean;
  std::vector<double> std;
};

// Client end of one oracle connection. One request in flight at a time; a
// session may move between threads but must not be shared concurrently.
class OracleSession {
 public:
  explicit OracleSession(std::unique_ptr<Transport> transport,
                         std::chrono::milliseconds timeout = kDefaultOracleTimeout);

  // Opens the transport named by `spec` and performs the handshake.
  static std::unique_ptr<OracleSession> Connect(
      std::string_view spec, std::chrono::milliseconds timeout = kDefaultOracleTimeout);

  // Sends hello and checks the protocol name/version of the reply.
  const OracleInfo& Handshake();
  bool handshaken() const { return handshaken_; }
  const OracleInfo& info() const { return info_; }

  // Softmax probabilities [C] (rows sum to 1 within 1e-4).
  std::vector<double> Score(const Image& image);
  std::vector<std::vector<double>> ScoreBatch(std::span<const Image> images);

  // [L, H, T, T] row-stochastic attentions (validated, else kBundleInvalid).
  FloatTensor GetAttentions(const Image& image);
  // [L, H, T, T] d(logit_c)/dA. Any error reply maps to kGradientMissing.
  FloatTensor GetGradients(const Image& image, std::int64_t class_id);

  // Attentions plus gradients for each requested class, as a bundle.
  AttentionBundle FetchBundle(const Image& image, std::string image_id,
                              std::span<const std::int64_t> classes);

 private:
  Frame Roundtrip(nlohmann::json header, std::string_view payload,
                  std::string_view reply_type, ErrorCode error_reply_code);
  void RequireHandshake() const;
  void CheckImage(const Image& image) const;
  BundleGeometry Geometry(const Image& image) const;

  std::unique_ptr<Transport> transport_;
  std::chrono::milliseconds timeout_;
  std::uint64_t next_id_ = 0;
  bool handshaken_ = false;
  OracleInfo info_;
};

}  // namespace attnfilter

#endif  // ATTNFILTER_CORE_ORACLE_CLIENT_H_
