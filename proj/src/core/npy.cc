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

#include "core/npy.h"

#include <bit>
#include <cctype>
#include <cstring>
#include <fstream>
#include <sstream>

#include "core/error.h"

namespace attnfilter {
namespace {

static_assert(std::endian::native == std::endian::little,
              "NPY I/O assumes a little-endian host");

constexpr std::string_view kMagic = "\x93NUMPY";
constexpr std::size_t kArrayAlign = 64;
constexpr std::size_t kGrowthAxisMaxDigits = 21;

[[noreturn]] void FormatFail(std::string_view origin, const std::string& what) {
  std::string msg = "malformed NPY";
  if (!origin.empty()) msg += " '" + std::string(origin) + "'";
  Fail(ErrorCode::kFormat, msg + ": " + what);
}

// Minimal reader for the Python-literal dict numpy writes, e.g.
// {'descr': '<f4', 'fortran_order': False, 'shape': (2, 3), }
class HeaderParser {
 public:
  HeaderParser(std::string_view text, std::string_view origin)
      : text_(text), origin_(origin) {}

  void Parse(std::string* descr, bool* fortran_order,
             std::vector<std::size_t>* shape) {
    bool have_descr = false, have_order = false, have_shape = false;
    Expect('{');
    while (true) {
      SkipSpace();
      if (Peek() == '}') break;
      const std::string key = ParseString();
      Expect(':');
      if (key == "descr") {
        *descr = ParseString();
        have_descr = true;
      } else if (key == "fortran_order") {
        *fortran_order = ParseBool();
        have_order = true;
      } else if (key == "shape") {
        *shape = ParseShape();
        have_shape = true;
      } else {
        FormatFail(origin_, "unexpected header key '" + key + "'");
      }
      SkipSpace();
      if (Peek() == ',') {
        ++pos_;
        continue;
      }
      SkipSpace();
      if (Peek() != '}') FormatFail(origin_, "expected ',' or '}' in header");
    }
    if (!have_descr || !have_order || !have_shape) {
      FormatFail(origin_, "header lacks descr/fortran_order/shape");
    }
  }

 private:
  void SkipSpace() {
    while (pos_ < text_.size() &&
           std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
    }
  }
  char Peek() {
    if (pos_ >= text_.size()) FormatFail(origin_, "truncated header");
    return text_[pos_];
  }
  void Expect(char c) {
    SkipSpace();
    if (Peek() != c) {
      FormatFail(origin_, std::string("expected '") + c + "' in header");
    }
    ++pos_;
  }
  std::string ParseString() {
    SkipSpace();
    const char quote = Peek();
    if (quote != '\'' && quote != '"') FormatFail(origin_, "expected string");
    ++pos_;
    const std::size_t end = text_.find(quote, pos_);
    if (end == std::string_view::npos) FormatFail(origin_, "unterminated string");
    std::string out(text_.substr(pos_, end - pos_));
    pos_ = end + 1;
    return out;
  }
  bool ParseBool() {
    SkipSpace();
    if (text_.substr(pos_, 4) == "True") {
      pos_ += 4;
      return true;
    }
    if (text_.substr(pos_, 5) == "False") {
      pos_ += 5;
      return false;
    }
    FormatFail(origin_, "expected True/False");
  }
  std::vector<std::size_t> ParseShape() {
    Expect('(');
    std::vector<std::size_t> dims;
    while (true) {
      SkipSpace();
      if (Peek() == ')') {
        ++pos_;
        break;
      }
      if (!std::isdigit(static_cast<unsigned char>(Peek()))) {
        FormatFail(origin_, "bad shape entry");
      }
      std::size_t value = 0;
      while (pos_ < text_.size() &&
             std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        value = value * 10 + static_cast<std::size_t>(text_[pos_] - '0');
        ++pos_;
      }
      dims.push_back(value);
      SkipSpace();
      if (Peek() == ',') ++pos_;
    }
    return dims;
  }

  std::string_view text_;
  std::string_view origin_;
  std::size_t pos_ = 0;
};

}  // namespace

std::size_t FloatTensor::NumElements() const { return ShapeProduct(shape); }

std::size_t ShapeProduct(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

std::string ShapeToString(const std::vector<std::size_t>& shape) {
  std::string out = "(";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    out += std::to_string(shape[i]);
    if (shape.size() == 1 || i + 1 < shape.size()) out += ",";
    if (i + 1 < shape.size()) out += " ";
  }
  return out + ")";
}

NpyReadResult ParseNpy(std::string_view bytes, std::string_view origin) {
  if (bytes.size() < 10 || bytes.substr(0, 6) != kMagic) {
    FormatFail(origin, "bad magic");
  }
  const auto major = static_cast<unsigned char>(bytes[6]);
  std::size_t header_len = 0;
  std::size_t prefix = 0;
  if (major == 1) {
    header_len = static_cast<unsigned char>(bytes[8]) |
                 (static_cast<std::size_t>(static_cast<unsigned char>(bytes[9])) << 8);
    prefix = 10;
  } else if (major == 2) {
    if (bytes.size() < 12) FormatFail(origin, "truncated v2 preamble");
    std::uint32_t len = 0;
    std::memcpy(&len, bytes.data() + 8, 4);
    header_len = len;
    prefix = 12;
  } else {
    FormatFail(origin, "unsupported version " + std::to_string(major));
  }
  if (bytes.size() < prefix + header_len) FormatFail(origin, "truncated header");

  std::string descr;
  bool fortran_order = false;
  std::vector<std::size_t> shape;
  HeaderParser(bytes.substr(prefix, header_len), origin)
      .Parse(&descr, &fortran_order, &shape);
  if (fortran_order) FormatFail(origin, "fortran_order=True is not supported");

  std::size_t item = 0;
  NpyReadResult result;
  if (descr == "<f4") {
    item = 4;
    result.source_dtype = NpyDtype::kFloat32;
  } else if (descr == "<f8") {
    item = 8;
    result.source_dtype = NpyDtype::kFloat64;
  } else {
    std::string msg = "unsupported dtype '" + descr + "'";
    if (!origin.empty()) msg += " in '" + std::string(origin) + "'";
    Fail(ErrorCode::kDtype, msg + " (expected <f4 or <f8)");
  }

  const std::size_t count = ShapeProduct(shape);
  const std::string_view data = bytes.substr(prefix + header_len);
  if (data.size() != count * item) {
    FormatFail(origin, "payload holds " + std::to_string(data.size()) +
                           " bytes, shape " + ShapeToString(shape) + " needs " +
                           std::to_string(count * item));
  }
  result.tensor.shape = std::move(shape);
  result.tensor.values.resize(count);
  if (item == 4) {
    std::memcpy(result.tensor.values.data(), data.data(), count * 4);
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      double v;
      std::memcpy(&v, data.data() + i * 8, 8);
      result.tensor.values[i] = static_cast<float>(v);
    }
    std::string msg = "float64 tensor narrowed to float32";
    if (!origin.empty()) msg += " ('" + std::string(origin) + "')";
    Warn(msg);
  }
  return result;
}

std::string SerializeNpy(const FloatTensor& tensor) {
  if (tensor.values.size() != tensor.NumElements()) {
    Fail(ErrorCode::kShape, "tensor holds " +
                                std::to_string(tensor.values.size()) +
                                " values for shape " + ShapeToString(tensor.shape));
  }
  std::string header = "{'descr': '<f4', 'fortran_order': False, 'shape': " +
                       ShapeToString(tensor.shape) + ", }";
  if (!tensor.shape.empty()) {
    const std::size_t digits = std::to_string(tensor.shape.front()).size();
    header.append(kGrowthAxisMaxDigits - digits, ' ');
  }
  const std::size_t hlen = header.size() + 1;
  const std::size_t padlen = kArrayAlign - ((kMagic.size() + 2 + 2 + hlen) % kArrayAlign);
  const std::size_t total_header = hlen + padlen;
  if (total_header > 0xFFFF) Fail(ErrorCode::kFormat, "NPY header too long");

  std::string out;
  out.reserve(10 + total_header + tensor.values.size() * 4);
  out.append(kMagic);
  out.push_back('\x01');
  out.push_back('\x00');
  out.push_back(static_cast<char>(total_header & 0xFF));
  out.push_back(static_cast<char>((total_header >> 8) & 0xFF));
  out.append(header);
  out.append(padlen, ' ');
  out.push_back('\n');
  const std::size_t offset = out.size();
  out.resize(offset + tensor.values.size() * 4);
  if (!tensor.values.empty()) {
    std::memcpy(out.data() + offset, tensor.values.data(), tensor.values.size() * 4);
  }
  return out;
}

std::string ReadFileBytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorCode::kIo, "cannot open '" + path.string() + "'");
  in.seekg(0, std::ios::end);
  const std::streamoff size = in.tellg();
  in.seekg(0, std::ios::beg);
  std::string bytes(static_cast<std::size_t>(size), '\0');
  if (size > 0 && !in.read(bytes.data(), size)) {
    Fail(ErrorCode::kIo, "short read on '" + path.string() + "'");
  }
  return bytes;
}

void WriteFileBytes(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) Fail(ErrorCode::kIo, "cannot create '" + path.string() + "'");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) Fail(ErrorCode::kIo, "write failed on '" + path.string() + "'");
}

NpyReadResult ReadTensorWithDtype(const std::filesystem::path& path) {
  return ParseNpy(ReadFileBytes(path), path.string());
}

FloatTensor ReadTensor(const std::filesystem::path& path) {
  return ReadTensorWithDtype(path).tensor;
}

void WriteTensor(const FloatTensor& tensor, const std::filesystem::path& path) {
  WriteFileBytes(path, SerializeNpy(tensor));
}

}  // namespace attnfilter
