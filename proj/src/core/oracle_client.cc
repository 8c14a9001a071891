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

#include "core/oracle_client.h"

#include <cmath>
#include <cstring>

#include "core/error.h"

namespace attnfilter {
namespace {

using nlohmann::json;

constexpr double kProbabilityTolerance = 1e-4;

std::string EncodeLength(std::uint64_t n) {
  std::string out(8, '\0');
  for (int i = 0; i < 8; ++i) out[i] = static_cast<char>((n >> (8 * i)) & 0xFF);
  return out;
}

std::uint64_t DecodeLength(std::string_view bytes) {
  std::uint64_t n = 0;
  for (int i = 7; i >= 0; --i) n = (n << 8) | static_cast<unsigned char>(bytes[i]);
  return n;
}

template <typename T>
T HelloField(const json& hello, const char* key) {
  if (!hello.contains(key)) {
    Fail(ErrorCode::kProtocol, std::string("hello lacks '") + key + "'");
  }
  try {
    return hello[key].get<T>();
  } catch (const json::exception&) {
    Fail(ErrorCode::kProtocol, std::string("hello field '") + key + "' has the wrong type");
  }
}

}  // namespace

std::string EncodeFrame(const json& header, std::string_view payload) {
  const std::string head = header.dump();
  std::string out = EncodeLength(head.size() + 1 + payload.size());
  out.reserve(8 + head.size() + 1 + payload.size());
  out += head;
  out.push_back('\n');
  out.append(payload);
  return out;
}

Frame DecodeFrameBody(std::string_view body) {
  const std::size_t nl = body.find('\n');
  if (nl == std::string_view::npos) Fail(ErrorCode::kProtocol, "frame has no header line");
  Frame f;
  try {
    f.header = json::parse(body.substr(0, nl));
  } catch (const json::exception&) {
    Fail(ErrorCode::kProtocol, "frame header is not JSON");
  }
  if (!f.header.is_object() || !f.header.contains("type") || !f.header["type"].is_string() ||
      !f.header.contains("id") || !f.header["id"].is_number_unsigned()) {
    Fail(ErrorCode::kProtocol, "frame header needs a string 'type' and an unsigned 'id'");
  }
  f.payload = std::string(body.substr(nl + 1));
  return f;
}

Frame ReadFrame(Transport& transport, std::chrono::milliseconds timeout) {
  const std::uint64_t len = DecodeLength(transport.ReadExact(8, timeout));
  if (len == 0 || len > kMaxFrameBytes) {
    Fail(ErrorCode::kProtocol, "implausible frame length " + std::to_string(len));
  }
  return DecodeFrameBody(transport.ReadExact(static_cast<std::size_t>(len), timeout));
}

OracleSession::OracleSession(std::unique_ptr<Transport> transport,
                             std::chrono::milliseconds timeout)
    : transport_(std::move(transport)), timeout_(timeout) {}

std::unique_ptr<OracleSession> OracleSession::Connect(std::string_view spec,
                                                      std::chrono::milliseconds timeout) {
  auto session = std::make_unique<OracleSession>(OpenTransport(spec), timeout);
  session->Handshake();
  return session;
}

Frame OracleSession::Roundtrip(json header, std::string_view payload,
                               std::string_view reply_type, ErrorCode error_reply_code) {
  const std::uint64_t id = next_id_++;
  header["id"] = id;
  const std::string request_type = header["type"].get<std::string>();
  transport_->WriteAll(EncodeFrame(header, payload));
  Frame reply = ReadFrame(*transport_, timeout_);
  const auto reply_id = reply.header["id"].get<std::uint64_t>();
  if (reply_id != id) {
    Fail(ErrorCode::kProtocol, "reply id " + std::to_string(reply_id) + " does not answer request " +
                                   std::to_string(id));
  }
  const std::string type = reply.header["type"].get<std::string>();
  if (type == "error") {
    std::string message = reply.header.value("message", std::string("unspecified error"));
    const std::string code = reply.header.value("code", std::string());
    if (!code.empty()) message = code + ": " + message;
    Fail(error_reply_code, "oracle rejected " + request_type + " request: " + message);
  }
  if (type != reply_type) {
    Fail(ErrorCode::kProtocol, "expected a '" + std::string(reply_type) + "' reply, got '" +
                                   type + "'");
  }
  return reply;
}

const OracleInfo& OracleSession::Handshake() {
  json hello = {{"type", "hello"},
                {"protocol", std::string(kProtocolName)},
                {"version", kProtocolVersion}};
  const Frame reply = Roundtrip(std::move(hello), {}, "hello", ErrorCode::kProtocol);
  const json& h = reply.header;
  const auto protocol = HelloField<std::string>(h, "protocol");
  const auto version = HelloField<int>(h, "version");
  if (protocol != kProtocolName || version != kProtocolVersion) {
    Fail(ErrorCode::kProtocol, "oracle speaks " + protocol + "/" + std::to_string(version) +
                                   ", expected " + std::string(kProtocolName) + "/" +
                                   std::to_string(kProtocolVersion));
  }
  info_.model = HelloField<std::string>(h, "model");
  info_.class_count = HelloField<std::size_t>(h, "class_count");
  info_.layers = HelloField<std::size_t>(h, "layers");
  info_.heads = HelloField<std::size_t>(h, "heads");
  info_.tokens = HelloField<std::size_t>(h, "tokens");
  info_.input_shape = HelloField<std::vector<std::size_t>>(h, "input_shape");
  info_.mean = HelloField<std::vector<double>>(h, "mean");
  info_.std = HelloField<std::vector<double>>(h, "std");
  if (info_.class_count == 0) Fail(ErrorCode::kProtocol, "hello reports zero classes");
  handshaken_ = true;
  return info_;
}

void OracleSession::RequireHandshake() const {
  if (!handshaken_) Fail(ErrorCode::kProtocol, "request issued before the handshake");
}

void OracleSession::CheckImage(const Image& image) const {
  if (image.values.size() != image.channels * image.NumPixels()) {
    Fail(ErrorCode::kShape, "image value count does not match its shape");
  }
  if (!info_.input_shape.empty()) {
    const std::vector<std::size_t> shape = {image.channels, image.height, image.width};
    if (shape != info_.input_shape) {
      Fail(ErrorCode::kShape, "image shape " + ShapeToString(shape) +
                                  " does not match the oracle input " +
                                  ShapeToString(info_.input_shape));
    }
  }
}

std::vector<double> OracleSession::Score(const Image& image) {
  return ScoreBatch(std::span<const Image>(&image, 1)).front();
}

std::vector<std::vector<double>> OracleSession::ScoreBatch(std::span<const Image> images) {
  RequireHandshake();
  if (images.empty()) Fail(ErrorCode::kInvalidArgument, "empty score batch");
  FloatTensor batch;
  if (images.size() == 1) {
    CheckImage(images[0]);
    batch = images[0].ToTensor();
  } else {
    const Image& first = images[0];
    batch.shape = {images.size(), first.channels, first.height, first.width};
    for (const Image& img : images) {
      CheckImage(img);
      batch.values.insert(batch.values.end(), img.values.begin(), img.values.end());
    }
  }
  const Frame reply = Roundtrip({{"type", "score"}}, SerializeNpy(batch), "score_result",
                                ErrorCode::kOracle);
  FloatTensor probs;
  try {
    probs = ParseNpy(reply.payload, "score_result").tensor;
  } catch (const Error& e) {
    Fail(ErrorCode::kOracle, std::string("malformed score_result: ") + e.what());
  }
  const std::size_t c = info_.class_count;
  const bool shape_ok =
      images.size() == 1
          ? (probs.shape == std::vector<std::size_t>{c} ||
             probs.shape == std::vector<std::size_t>{1, c})
          : probs.shape == std::vector<std::size_t>{images.size(), c};
  if (!shape_ok) {
    Fail(ErrorCode::kOracle, "score_result has shape " + ShapeToString(probs.shape));
  }
  std::vector<std::vector<double>> out(images.size(), std::vector<double>(c));
  for (std::size_t b = 0; b < images.size(); ++b) {
    double sum = 0.0;
    for (std::size_t k = 0; k < c; ++k) {
      const double p = probs.values[b * c + k];
      if (!std::isfinite(p) || p < 0.0) Fail(ErrorCode::kOracle, "score_result is not a probability vector");
      out[b][k] = p;
      sum += p;
    }
    if (std::abs(sum - 1.0) > kProbabilityTolerance) {
      Fail(ErrorCode::kOracle, "score_result row sums to " + std::to_string(sum));
    }
  }
  return out;
}

BundleGeometry OracleSession::Geometry(const Image& image) const {
  BundleGeometry g;
  g.layers = info_.layers;
  g.heads = info_.heads;
  g.tokens = info_.tokens;
  g.image_height = image.height;
  g.image_width = image.width;
  g.class_count = info_.class_count;
  const auto patch = PatchSizeFor(g.tokens, image.height, image.width);
  if (!patch) {
    Fail(ErrorCode::kGeometry, "tokens=" + std::to_string(g.tokens) +
                                   " does not tile a " + std::to_string(image.height) + "x" +
                                   std::to_string(image.width) + " image");
  }
  g.patch_size = *patch;
  return g;
}

FloatTensor OracleSession::GetAttentions(const Image& image) {
  RequireHandshake();
  CheckImage(image);
  const Frame reply = Roundtrip({{"type", "attentions"}}, SerializeNpy(image.ToTensor()),
                                "attentions_result", ErrorCode::kOracle);
  FloatTensor att;
  try {
    att = ParseNpy(reply.payload, "attentions_result").tensor;
  } catch (const Error& e) {
    Fail(ErrorCode::kBundleInvalid, std::string("attentions_result: ") + e.what());
  }
  BundleGeometry g;
  g.layers = info_.layers;
  g.heads = info_.heads;
  g.tokens = info_.tokens;
  ValidateAttentionTensor(att, g);
  return att;
}

FloatTensor OracleSession::GetGradients(const Image& image, std::int64_t class_id) {
  RequireHandshake();
  CheckImage(image);
  const Frame reply =
      Roundtrip({{"type", "gradients"}, {"class", class_id}}, SerializeNpy(image.ToTensor()),
                "gradients_result", ErrorCode::kGradientMissing);
  FloatTensor grad;
  try {
    grad = ParseNpy(reply.payload, "gradients_result").tensor;
  } catch (const Error& e) {
    Fail(ErrorCode::kBundleInvalid, std::string("gradients_result: ") + e.what());
  }
  const std::vector<std::size_t> want = {info_.layers, info_.heads, info_.tokens, info_.tokens};
  if (grad.shape != want) {
    Fail(ErrorCode::kBundleInvalid, "gradient-shape: gradients_result has shape " +
                                        ShapeToString(grad.shape) + ", expected " +
                                        ShapeToString(want));
  }
  return grad;
}

AttentionBundle OracleSession::FetchBundle(const Image& image, std::string image_id,
                                           std::span<const std::int64_t> classes) {
  RequireHandshake();
  AttentionBundle b;
  b.image_id = std::move(image_id);
  b.geometry = Geometry(image);
  b.attentions = GetAttentions(image);
  for (std::int64_t c : classes) {
    if (!b.gradients.contains(c)) b.gradients[c] = GetGradients(image, c);
  }
  return b;
}

}  // namespace attnfilter
