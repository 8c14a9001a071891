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

#ifndef ATTNFILTER_CORE_NPY_H_
#define ATTNFILTER_CORE_NPY_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace attnfilter {

// Dense row-major float32 tensor.
struct FloatTensor {
  std::vector<std::size_t> shape;
  std::vector<float> values;

  std::size_t NumElements() const;
  bool operator==(const FloatTensor&) const = default;
};

std::size_t ShapeProduct(const std::vector<std::size_t>& shape);
std::string ShapeToString(const std::vector<std::size_t>& shape);

// Element type found in the source container before conversion.
enum class NpyDtype { kFloat32, kFloat64 };

struct NpyReadResult {
  FloatTensor tensor;
  NpyDtype source_dtype = NpyDtype::kFloat32;
};

// Parses an NPY v1.0 (or v2.0) container. Accepts little-endian float32 and
// float64; float64 is narrowed to float32 and a warning is emitted.
// Throws Error(kFormat) on a malformed container, Error(kDtype) on any other
// element type.
NpyReadResult ParseNpy(std::string_view bytes, std::string_view origin = "");

// Serializes as NPY v1.0 '<f4', C order, with the header laid out exactly as
// numpy.save does (so files written here are byte-identical to numpy's).
std::string SerializeNpy(const FloatTensor& tensor);

FloatTensor ReadTensor(const std::filesystem::path& path);
NpyReadResult ReadTensorWithDtype(const std::filesystem::path& path);
void WriteTensor(const FloatTensor& tensor, const std::filesystem::path& path);

std::string ReadFileBytes(const std::filesystem::path& path);
void WriteFileBytes(const std::filesystem::path& path, std::string_view bytes);

}  // namespace attnfilter

#endif  // ATTNFILTER_CORE_NPY_H_
