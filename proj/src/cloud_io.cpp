// Copyright 2026 The dacsmc Authors
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

#include "dacsmc/cloud_io.hpp"

#include <array>
#include <bit>
#include <cstdio>
#include <cstring>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "dacsmc/error.hpp"

namespace dacsmc {
namespace {

static_assert(std::endian::native == std::endian::little, "cloud dumps assume a little-endian host");

constexpr std::array<char, 4> kMagic{'D', 'A', 'C', 'C'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  require(in.gcount() == static_cast<std::streamsize>(sizeof v), ErrorCode::kInvalidData, "truncated cloud dump");
  return v;
}

std::string number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

double to_double(const std::string& s) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size()) {
      return v;
    }
  } catch (const std::exception&) {
  }
  throw Error{ErrorCode::kInvalidData, "cloud CSV: not a number: '" + s + "'"};
}

}  // namespace

void write_cloud_binary(const ParticleCloud& cloud, std::ostream& out) {
  out.write(kMagic.data(), kMagic.size());
  put(out, kVersion);
  put(out, static_cast<std::uint32_t>(cloud.node()));
  put(out, cloud.log_mass());
  put(out, static_cast<std::uint64_t>(cloud.size()));
  put(out, static_cast<std::uint64_t>(cloud.width()));
  put(out, static_cast<std::uint8_t>(cloud.is_weighted() ? 1 : 0));
  if (cloud.is_weighted()) {
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      put(out, cloud.log_weight(i));
    }
  }
  const auto data = cloud.paths().data();
  out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size_bytes()));
  require(out.good(), ErrorCode::kIo, "failed to write cloud dump");
}

ParticleCloud read_cloud_binary(std::istream& in) {
  std::array<char, 4> magic{};
  in.read(magic.data(), magic.size());
  require(in.gcount() == 4 && magic == kMagic, ErrorCode::kInvalidData, "not a cloud dump (bad magic)");
  const auto version = get<std::uint32_t>(in);
  require(version == kVersion, ErrorCode::kInvalidData, "unsupported cloud dump version " + std::to_string(version));
  const auto node = get<std::uint32_t>(in);
  const auto log_mass = get<double>(in);
  const auto n = get<std::uint64_t>(in);
  const auto width = get<std::uint64_t>(in);
  const auto weighted = get<std::uint8_t>(in);
  require(width > 0 && n < (std::uint64_t{1} << 40) / width, ErrorCode::kInvalidData, "implausible cloud dimensions");
  std::vector<double> lw;
  if (weighted != 0) {
    lw.resize(n);
    for (auto& w : lw) {
      w = get<double>(in);
    }
  }
  PathMatrix paths{n, width};
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& x : paths.row(i)) {
      x = get<double>(in);
    }
  }
  return ParticleCloud{node, std::move(paths), log_mass, std::move(lw)};
}

void write_cloud_csv(const ParticleCloud& cloud, std::ostream& out) {
  out << "# dacsmc cloud node=" << cloud.node() << " log_mass=" << number(cloud.log_mass()) << " n=" << cloud.size()
      << " width=" << cloud.width() << "\n";
  out << "log_weight";
  for (std::size_t k = 0; k < cloud.width(); ++k) {
    out << ",x" << k;
  }
  out << "\n";
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    out << number(cloud.log_weight(i));
    for (const double x : cloud.path(i)) {
      out << "," << number(x);
    }
    out << "\n";
  }
  require(out.good(), ErrorCode::kIo, "failed to write cloud CSV");
}

ParticleCloud read_cloud_csv(std::istream& in) {
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), ErrorCode::kInvalidData, "empty cloud CSV");
  unsigned node = 0;
  char mass_text[64] = {};
  unsigned long long n = 0;
  unsigned long long width = 0;
  require(std::sscanf(line.c_str(), "# dacsmc cloud node=%u log_mass=%63s n=%llu width=%llu", &node, mass_text, &n,
                      &width) == 4,
          ErrorCode::kInvalidData, "bad cloud CSV preamble");
  std::getline(in, line);
  PathMatrix paths{n, width};
  std::vector<double> lw(n);
  for (std::size_t i = 0; i < n; ++i) {
    require(static_cast<bool>(std::getline(in, line)), ErrorCode::kInvalidData, "cloud CSV has too few rows");
    std::stringstream ss{line};
    std::string cell;
    std::getline(ss, cell, ',');
    lw[i] = to_double(cell);
    for (auto& x : paths.row(i)) {
      require(static_cast<bool>(std::getline(ss, cell, ',')), ErrorCode::kInvalidData, "cloud CSV row too short");
      x = to_double(cell);
    }
  }
  // Equal stored weights mean an unweighted cloud; keep it unweighted so log_scaled_weight stays exactly 0.
  bool equal = true;
  for (const double w : lw) {
    equal = equal && w == lw.front();
  }
  if (equal) {
    lw.clear();
  }
  return ParticleCloud{node, std::move(paths), to_double(mass_text), std::move(lw)};
}

}  // namespace dacsmc
