// Copyright 2026 The ncmdoa Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef NCMDOA_IO_UTIL_HPP_
#define NCMDOA_IO_UTIL_HPP_

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace ncmdoa {

// Writes go to a sibling temporary file that is renamed into place, so a
// reader never observes a half-written artifact.
void write_text_atomic(const std::filesystem::path& path,
                       const std::string& text);
void write_binary_atomic(const std::filesystem::path& path,
                         std::span<const double> values);

std::string read_text(const std::filesystem::path& path);
std::vector<double> read_binary(const std::filesystem::path& path);
// Parse failures raise kConfig, missing files kIo.
nlohmann::json read_json(const std::filesystem::path& path);

}  // namespace ncmdoa

#endif  // NCMDOA_IO_UTIL_HPP_
