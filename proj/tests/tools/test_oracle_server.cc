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

// Oracle stand-in speaking the framed protocol on stdin/stdout.
//
//   test_oracle_server --replay <transcript.bin>
//       Byte-level replay of a golden transcript; exits 3 on the first
//       request that differs from the recording.
//   test_oracle_server --linear [--channels C] [--image-size S] [--patch-size P]
//                      [--classes K] [--layers L] [--heads H] [--seed N]
//                      [--no-gradients] [--uniform] [--die-after N]
//       Softmax-of-linear scores (or 1/C with --uniform), image-dependent
//       attentions and gradients.

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "core/error.h"
#include "core/npy.h"
#include "core/oracle_client.h"
#include "core/transport.h"
#include "json.hpp"

namespace af = attnfilter;
using nlohmann::json;

namespace {

bool ReadFully(int fd, char* buf, std::size_t n) {
  while (n > 0) {
    const ssize_t r = ::read(fd, buf, n);
    if (r <= 0) return false;
    buf += r;
    n -= static_cast<std::size_t>(r);
  }
  return true;
}

bool WriteFully(int fd, const char* buf, std::size_t n) {
  while (n > 0) {
    const ssize_t w = ::write(fd, buf, n);
    if (w <= 0) return false;
    buf += w;
    n -= static_cast<std::size_t>(w);
  }
  return true;
}

std::uint64_t LengthPrefix(const std::string& s, std::size_t at) {
  std::uint64_t n = 0;
  for (int i = 7; i >= 0; --i) n = (n << 8) | static_cast<unsigned char>(s[at + i]);
  return n;
}

int Replay(const std::string& path) {
  const std::string t = af::ReadFileBytes(path);
  std::size_t pos = 0;
  while (pos < t.size()) {
    const char dir = t[pos++];
    const std::size_t len =
        pos + 8 <= t.size() ? std::min<std::size_t>(8 + LengthPrefix(t, pos), t.size() - pos) : t.size() - pos;
    const std::string frame = t.substr(pos, len);
    pos += len;
    if (dir == '>') {
      std::string got(frame.size(), '\0');
      if (!ReadFully(0, got.data(), got.size())) {
        std::cerr << "replay: client closed early\n";
        return 3;
      }
      if (got != frame) {
        std::cerr << "replay: request differs from transcript\n";
        return 3;
      }
    } else if (!WriteFully(1, frame.data(), frame.size())) {
      return 3;
    }
  }
  ::close(1);
  char c;
  while (::read(0, &c, 1) > 0) {
  }
  return 0;
}

struct LinearOracle {
  std::size_t channels = 3, size = 32, patch = 8, classes = 4, layers = 2, heads = 2;
  std::uint64_t seed = 0;
  bool gradients = true;
  bool uniform = false;

  std::size_t Side() const { return size / patch; }
  std::size_t Tokens() const { return Side() * Side() + 1; }
  std::size_t Dim() const { return channels * size * size; }

  std::vector<double> weights;       // classes x Dim
  std::vector<double> base_logits;   // L*H*T*T
  std::vector<std::vector<double>> base_grads;

  void Init() {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, 1.0);
    weights.resize(classes * Dim());
    for (double& w : weights) w = n(rng) / std::sqrt(static_cast<double>(Dim()));
    const std::size_t t = Tokens();
    base_logits.resize(layers * heads * t * t);
    for (double& v : base_logits) v = n(rng);
    base_grads.assign(classes, std::vector<double>(layers * heads * t * t));
    for (auto& g : base_grads) {
      for (double& v : g) v = n(rng);
    }
  }

  json Hello() const {
    return {{"type", "hello"},
            {"protocol", std::string(af::kProtocolName)},
            {"version", af::kProtocolVersion},
            {"model", "linear-test"},
            {"class_count", classes},
            {"layers", layers},
            {"heads", heads},
            {"tokens", Tokens()},
            {"input_shape", {channels, size, size}},
            {"mean", std::vector<double>(channels, 0.5)},
            {"std", std::vector<double>(channels, 0.25)}};
  }

  std::vector<float> Probabilities(const float* x) const {
    if (uniform) return std::vector<float>(classes, 1.0f / static_cast<float>(classes));
    std::vector<double> z(classes, 0.0);
    for (std::size_t k = 0; k < classes; ++k) {
      for (std::size_t i = 0; i < Dim(); ++i) z[k] += weights[k * Dim() + i] * x[i];
    }
    double peak = z[0];
    for (double v : z) peak = std::max(peak, v);
    double sum = 0.0;
    for (double& v : z) sum += (v = std::exp(v - peak));
    std::vector<float> p(classes);
    for (std::size_t k = 0; k < classes; ++k) p[k] = static_cast<float>(z[k] / sum);
    return p;
  }

  // Mean over channels and pixels of each patch; 0 for [CLS].
  std::vector<double> PatchMeans(const float* x) const {
    const std::size_t side = Side();
    std::vector<double> m(Tokens(), 0.0);
    for (std::size_t c = 0; c < channels; ++c) {
      for (std::size_t y = 0; y < size; ++y) {
        for (std::size_t xx = 0; xx < size; ++xx) {
          m[1 + (y / patch) * side + xx / patch] += x[(c * size + y) * size + xx];
        }
      }
    }
    for (std::size_t j = 1; j < m.size(); ++j) m[j] /= static_cast<double>(channels * patch * patch);
    return m;
  }

  af::FloatTensor Attentions(const float* x) const {
    const std::size_t t = Tokens();
    const std::vector<double> m = PatchMeans(x);
    af::FloatTensor a;
    a.shape = {layers, heads, t, t};
    a.values.resize(layers * heads * t * t);
    std::vector<double> row(t);
    for (std::size_t r = 0; r < layers * heads * t; ++r) {
      double peak = -INFINITY;
      for (std::size_t j = 0; j < t; ++j) {
        row[j] = base_logits[r * t + j] + m[j];
        peak = std::max(peak, row[j]);
      }
      double sum = 0.0;
      for (double& v : row) sum += (v = std::exp(v - peak));
      for (std::size_t j = 0; j < t; ++j) a.values[r * t + j] = static_cast<float>(row[j] / sum);
    }
    return a;
  }

  af::FloatTensor Gradients(const float* x, std::size_t c) const {
    const std::size_t t = Tokens();
    const std::vector<double> m = PatchMeans(x);
    af::FloatTensor g;
    g.shape = {layers, heads, t, t};
    g.values.resize(layers * heads * t * t);
    for (std::size_t i = 0; i < g.values.size(); ++i) {
      g.values[i] = static_cast<float>(base_grads[c][i] + 0.1 * m[i % t]);
    }
    return g;
  }
};

json ErrorHeader(std::uint64_t id, const std::string& code, const std::string& message) {
  return {{"type", "error"}, {"id", id}, {"code", code}, {"message", message}};
}

int ServeLinear(LinearOracle& o, long die_after) {
  o.Init();
  af::FdTransport io(0, 1);
  long served = 0;
  for (;;) {
    af::Frame req;
    try {
      req = af::ReadFrame(io, std::chrono::hours(1));
    } catch (const af::Error&) {
      return 0;  // client went away
    }
    if (die_after >= 0 && served++ >= die_after) std::_Exit(7);
    const auto id = req.header["id"].get<std::uint64_t>();
    const std::string type = req.header["type"];
    json reply;
    std::string payload;
    try {
      if (type == "hello") {
        reply = o.Hello();
      } else {
        const af::FloatTensor x = af::ParseNpy(req.payload, "request").tensor;
        const std::vector<std::size_t> one = {o.channels, o.size, o.size};
        const bool batch = x.shape.size() == 4;
        const std::size_t b = batch ? x.shape[0] : 1;
        const std::vector<std::size_t> item(x.shape.begin() + (batch ? 1 : 0), x.shape.end());
        if (item != one) throw std::runtime_error("input shape " + af::ShapeToString(x.shape));
        if (type == "score") {
          af::FloatTensor p;
          p.shape = batch ? std::vector<std::size_t>{b, o.classes}
                          : std::vector<std::size_t>{o.classes};
          for (std::size_t i = 0; i < b; ++i) {
            const auto pi = o.Probabilities(x.values.data() + i * o.Dim());
            p.values.insert(p.values.end(), pi.begin(), pi.end());
          }
          reply = {{"type", "score_result"}};
          payload = af::SerializeNpy(p);
        } else if (type == "attentions" && !batch) {
          reply = {{"type", "attentions_result"}};
          payload = af::SerializeNpy(o.Attentions(x.values.data()));
        } else if (type == "gradients" && !batch) {
          const auto c = req.header.at("class").get<std::int64_t>();
          if (!o.gradients || c < 0 || static_cast<std::size_t>(c) >= o.classes) {
            reply = ErrorHeader(id, "gradient_unavailable", "no gradient for class " + std::to_string(c));
          } else {
            reply = {{"type", "gradients_result"}};
            payload = af::SerializeNpy(o.Gradients(x.values.data(), static_cast<std::size_t>(c)));
          }
        } else {
          reply = ErrorHeader(id, "unsupported", "unsupported request '" + type + "'");
        }
      }
    } catch (const std::exception& e) {
      reply = ErrorHeader(id, "bad_request", e.what());
      payload.clear();
    }
    reply["id"] = id;
    io.WriteAll(af::EncodeFrame(reply, payload));
  }
}

}  // namespace

int main(int argc, char** argv) {
  LinearOracle o;
  long die_after = -1;
  std::string replay;
  bool linear = false;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    auto next = [&]() -> std::string {
      if (i + 1 >= argc) {
        std::cerr << "missing value for " << a << "\n";
        std::exit(2);
      }
      return argv[++i];
    };
    if (a == "--replay") replay = next();
    else if (a == "--linear") linear = true;
    else if (a == "--channels") o.channels = std::stoul(next());
    else if (a == "--image-size") o.size = std::stoul(next());
    else if (a == "--patch-size") o.patch = std::stoul(next());
    else if (a == "--classes") o.classes = std::stoul(next());
    else if (a == "--layers") o.layers = std::stoul(next());
    else if (a == "--heads") o.heads = std::stoul(next());
    else if (a == "--seed") o.seed = std::stoull(next());
    else if (a == "--no-gradients") o.gradients = false;
    else if (a == "--uniform") o.uniform = true;
    else if (a == "--die-after") die_after = std::stol(next());
    else {
      std::cerr << "unknown argument " << a << "\n";
      return 2;
    }
  }
  if (!replay.empty()) return Replay(replay);
  if (linear) return ServeLinear(o, die_after);
  std::cerr << "usage: test_oracle_server --replay FILE | --linear [options]\n";
  return 2;
}
