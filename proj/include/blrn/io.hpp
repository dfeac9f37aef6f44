// Copyright 2026 The blrn Authors
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

#ifndef BLRN_IO_HPP_
#define BLRN_IO_HPP_

#include <cstdint>
#include <fstream>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace blrn {

/// Splits one CSV line on the delimiter. Fields must not contain the
/// delimiter themselves; none of the formats used here need quoting.
std::vector<std::string_view> split_fields(std::string_view line, char delim = ',');

std::string read_file(const std::string& path);  // throws Error(kIo)

/// Writes to "<path>.tmp-<pid>" and renames into place on commit, so an
/// interrupted run never leaves a partial file at the target path.
class AtomicFile {
 public:
  explicit AtomicFile(std::string path);
  ~AtomicFile();
  AtomicFile(const AtomicFile&) = delete;
  AtomicFile& operator=(const AtomicFile&) = delete;

  void write(std::string_view data);
  void commit();

 private:
  std::string path_;
  std::string tmp_path_;
  std::ofstream stream_;
  bool committed_ = false;
};

void write_file_atomic(const std::string& path, std::string_view data);

std::uint32_t crc32_bytes(std::string_view data);
std::uint32_t crc32_file(const std::string& path);  // throws Error(kIo)

/// Runs fn(i) for i in [0, n). With threads <= 1 this is a plain loop;
/// otherwise work is striped across worker threads. fn must be safe to call
/// concurrently for distinct i.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

/// Fixed-precision double formatting for deterministic CSV output.
std::string format_double(double v, int precision);

}  // namespace blrn

#endif  // BLRN_IO_HPP_
