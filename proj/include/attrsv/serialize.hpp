// attrsv/serialize.hpp

// Copyright 2026  The attrsv authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef ATTRSV_SERIALIZE_HPP
#define ATTRSV_SERIALIZE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "attrsv/common.hpp"

namespace attrsv {

std::string base64_encode(const std::vector<std::uint8_t> &bytes);
std::vector<std::uint8_t> base64_decode(const std::string &text);

// Little-endian 32-bit float packing for weight blobs and feature caches.
std::vector<std::uint8_t> pack_f32_le(const std::vector<double> &values);
std::vector<double> unpack_f32_le(const std::vector<std::uint8_t> &bytes);

// Little-endian 64-bit float packing for lossless model round-trips.
std::vector<std::uint8_t> pack_f64_le(const std::vector<double> &values);
std::vector<double> unpack_f64_le(const std::vector<std::uint8_t> &bytes);

// FNV-1a 64-bit, rendered as 16 hex digits.  Identifies schemas and config
// fingerprints; not a cryptographic hash.
std::uint64_t fnv1a64(const std::string &text);
std::string fnv1a64_hex(const std::string &text);

std::string read_text_file(const std::string &path);
void write_text_file(const std::string &path, const std::string &content);
std::vector<std::uint8_t> read_binary_file(const std::string &path);
void write_binary_file(const std::string &path, const std::vector<std::uint8_t> &bytes);

std::vector<double> to_std(const Vector &v);
Vector to_eigen(const std::vector<double> &v);

}  // namespace attrsv

#endif  // ATTRSV_SERIALIZE_HPP
