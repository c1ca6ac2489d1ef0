/*
 * Copyright 2026 The tsxai Authors.
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

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "tsxai/dataset.h"
#include "tsxai/errors.h"

namespace tsxai::dataset {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr char kCacheMagic[8] = {'T', 'S', 'X', 'S', 'M', 'P', '0', '1'};

static_assert(std::endian::native == std::endian::little,
              "sample cache I/O assumes a little-endian host");

std::string UnitFileName(int unit_id) {
  return "unit_" + std::to_string(unit_id) + ".csv";
}

template <typename T>
void WriteRaw(std::ofstream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T ReadRaw(std::ifstream& in, const std::string& path) {
  T value;
  if (!in.read(reinterpret_cast<char*>(&value), sizeof(T))) {
    throw ParseError(path + ": truncated sample cache");
  }
  return value;
}

}  // namespace

void WriteFleet(const std::string& dir, const std::vector<UnitHistory>& fleet,
                const FleetConfig& config, std::uint64_t seed) {
  fs::create_directories(dir);
  json units = json::array();
  char buf[40];
  for (const UnitHistory& unit : fleet) {
    const std::string name = UnitFileName(unit.unit_id);
    std::ofstream out(fs::path(dir) / name, std::ios::binary);
    if (!out) throw Error("cannot write " + name);
    out << "cycle";
    for (std::size_t f = 0; f < unit.channels.rows(); ++f) {
      out << ",channel_" << f;
    }
    out << '\n';
    for (std::size_t t = 0; t < unit.steps(); ++t) {
      std::snprintf(buf, sizeof(buf), "%.17g", unit.cycle[t]);
      out << buf;
      for (std::size_t f = 0; f < unit.channels.rows(); ++f) {
        std::snprintf(buf, sizeof(buf), ",%.17g", unit.channels(f, t));
        out << buf;
      }
      out << '\n';
    }
    units.push_back({{"unit_id", unit.unit_id},
                     {"tul", unit.total_useful_life},
                     {"steps", unit.steps()},
                     {"file", name}});
  }
  json manifest = {{"seed", seed}, {"config", config.ToJson()},
                   {"units", units}};
  std::ofstream out(fs::path(dir) / "fleet.json", std::ios::binary);
  out << manifest.dump(2) << '\n';
}

std::vector<UnitHistory> ReadFleet(const std::string& dir) {
  std::ifstream mf(fs::path(dir) / "fleet.json");
  if (!mf) throw Error("cannot open " + dir + "/fleet.json");
  json manifest;
  try {
    manifest = json::parse(mf);
  } catch (const json::exception& e) {
    throw ParseError(std::string("fleet manifest: ") + e.what());
  }
  std::vector<UnitHistory> fleet;
  for (const json& entry : manifest.at("units")) {
    UnitHistory unit;
    unit.unit_id = entry.at("unit_id").get<int>();
    unit.total_useful_life = entry.at("tul").get<double>();
    const std::string file = entry.at("file").get<std::string>();
    std::ifstream in(fs::path(dir) / file);
    if (!in) throw Error("cannot open " + file);
    std::string line;
    std::getline(in, line);
    std::size_t features = 0;
    for (char c : line) features += c == ',' ? 1 : 0;
    std::vector<std::vector<double>> columns(features);
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::stringstream ss(line);
      std::string cell;
      std::size_t col = 0;
      while (std::getline(ss, cell, ',')) {
        double v = 0.0;
        try {
          v = std::stod(cell);
        } catch (const std::exception&) {
          throw ParseError(file + ": bad number '" + cell + "'");
        }
        if (col == 0) {
          unit.cycle.push_back(v);
        } else if (col - 1 < features) {
          columns[col - 1].push_back(v);
        } else {
          throw ParseError(file + ": too many columns");
        }
        ++col;
      }
      if (col != features + 1) throw ParseError(file + ": ragged row");
    }
    unit.channels = Matrix(features, unit.cycle.size());
    for (std::size_t f = 0; f < features; ++f) {
      for (std::size_t t = 0; t < unit.cycle.size(); ++t) {
        unit.channels(f, t) = columns[f][t];
      }
    }
    fleet.push_back(std::move(unit));
  }
  return fleet;
}

void WriteSampleCache(const std::string& path,
                      const std::vector<Sample>& samples) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  const std::uint32_t features =
      samples.empty() ? 0 : static_cast<std::uint32_t>(samples[0].x.rows());
  const std::uint32_t length =
      samples.empty() ? 0 : static_cast<std::uint32_t>(samples[0].x.cols());
  out.write(kCacheMagic, sizeof(kCacheMagic));
  WriteRaw(out, features);
  WriteRaw(out, length);
  WriteRaw(out, static_cast<std::uint64_t>(samples.size()));
  for (const Sample& s : samples) {
    if (s.x.rows() != features || s.x.cols() != length) {
      throw ShapeError("sample cache requires equally shaped samples");
    }
    WriteRaw(out, s.y);
    WriteRaw(out, static_cast<double>(s.unit_id));
    WriteRaw(out, static_cast<double>(s.t_end));
    out.write(reinterpret_cast<const char*>(s.x.values().data()),
              static_cast<std::streamsize>(s.x.size() * sizeof(double)));
  }
  if (!out) throw Error("failed writing " + path);
}

std::vector<Sample> ReadSampleCache(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  char magic[8];
  if (!in.read(magic, sizeof(magic)) ||
      std::memcmp(magic, kCacheMagic, sizeof(magic)) != 0) {
    throw ParseError(path + ": not a sample cache");
  }
  const auto features = ReadRaw<std::uint32_t>(in, path);
  const auto length = ReadRaw<std::uint32_t>(in, path);
  const auto count = ReadRaw<std::uint64_t>(in, path);
  std::vector<Sample> samples;
  samples.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    Sample s;
    s.y = ReadRaw<double>(in, path);
    s.unit_id = static_cast<int>(ReadRaw<double>(in, path));
    s.t_end = static_cast<int>(ReadRaw<double>(in, path));
    std::vector<double> values(static_cast<std::size_t>(features) * length);
    if (!in.read(reinterpret_cast<char*>(values.data()),
                 static_cast<std::streamsize>(values.size() * sizeof(double)))) {
      throw ParseError(path + ": truncated sample cache");
    }
    s.x = Matrix(features, length, std::move(values));
    samples.push_back(std::move(s));
  }
  return samples;
}

}  // namespace tsxai::dataset
