// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ctqw Authors

#include "ctqw/parameters.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "ctqw/errors.hpp"

namespace ctqw {

void ParameterSet::add(std::string name, Tensor tensor) {
  for (const auto& e : entries_) {
    if (e.name == name) throw ContractViolation("duplicate parameter name " + name);
  }
  tensor.set_requires_grad(true);
  entries_.push_back({std::move(name), std::move(tensor)});
}

std::size_t ParameterSet::scalar_count() const {
  std::size_t total = 0;
  for (const auto& e : entries_) total += e.tensor.size();
  return total;
}

const Tensor& ParameterSet::at(const std::string& name) const {
  for (const auto& e : entries_) {
    if (e.name == name) return e.tensor;
  }
  throw ContractViolation("no parameter named " + name);
}

void ParameterSet::zero_grad() {
  for (auto& e : entries_) e.tensor.zero_grad();
}

void ParameterSet::scale_grad(double factor) {
  for (auto& e : entries_) {
    for (double& g : e.tensor.mutable_grad()) g *= factor;
  }
}

std::vector<double> ParameterSet::snapshot() const {
  std::vector<double> flat;
  flat.reserve(scalar_count());
  for (const auto& e : entries_) {
    auto v = e.tensor.values();
    flat.insert(flat.end(), v.begin(), v.end());
  }
  return flat;
}

void ParameterSet::restore(const std::vector<double>& flat) {
  if (flat.size() != scalar_count()) {
    throw ContractViolation("restore: snapshot holds " + std::to_string(flat.size()) +
                            " values, parameters need " + std::to_string(scalar_count()));
  }
  std::size_t offset = 0;
  for (auto& e : entries_) {
    auto v = e.tensor.mutable_values();
    std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(offset), v.size(), v.begin());
    offset += v.size();
  }
}

namespace {

constexpr std::array<char, 8> kMagic = {'C', 'T', 'Q', 'W', 'P', 'R', 'M', '\0'};

template <typename T>
void put(std::ostream& out, T value) {
  std::array<char, sizeof(T)> bytes;
  std::memcpy(bytes.data(), &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  out.write(bytes.data(), bytes.size());
}

template <typename T>
T get(std::istream& in, const std::filesystem::path& path) {
  std::array<char, sizeof(T)> bytes;
  if (!in.read(bytes.data(), bytes.size())) {
    throw DatasetError("checkpoint " + path.string() + " is truncated");
  }
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  T value;
  std::memcpy(&value, bytes.data(), sizeof(T));
  return value;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const ParameterSet& params) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DatasetError("cannot open " + path.string() + " for writing");
  out.write(kMagic.data(), kMagic.size());
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::uint64_t>(out, params.size());
  for (const auto& e : params.entries()) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(e.name.size()));
    out.write(e.name.data(), static_cast<std::streamsize>(e.name.size()));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(e.tensor.rank()));
    for (auto d : e.tensor.shape()) put<std::uint64_t>(out, d);
    for (double v : e.tensor.values()) put<double>(out, v);
  }
  if (!out) throw DatasetError("failed writing checkpoint " + path.string());
}

void load_checkpoint(const std::filesystem::path& path, ParameterSet& params) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DatasetError("cannot open checkpoint " + path.string());
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw DatasetError(path.string() + " is not a parameter checkpoint");
  const auto version = get<std::uint32_t>(in, path);
  if (version != kCheckpointVersion) {
    throw DatasetError("unsupported checkpoint version " + std::to_string(version));
  }
  const auto count = get<std::uint64_t>(in, path);
  if (count != params.size()) {
    throw ContractViolation("checkpoint holds " + std::to_string(count) + " parameters, model has " +
                            std::to_string(params.size()));
  }
  std::vector<std::vector<double>> staged(params.size());
  std::vector<bool> seen(params.size(), false);
  for (std::uint64_t p = 0; p < count; ++p) {
    const auto len = get<std::uint32_t>(in, path);
    std::string name(len, '\0');
    if (!in.read(name.data(), len)) throw DatasetError("checkpoint " + path.string() + " is truncated");
    const auto rank = get<std::uint32_t>(in, path);
    Shape shape(rank);
    for (auto& d : shape) d = get<std::uint64_t>(in, path);
    auto& entries = params.entries();
    auto it = std::find_if(entries.begin(), entries.end(),
                           [&](const NamedTensor& e) { return e.name == name; });
    if (it == entries.end()) throw ContractViolation("checkpoint parameter " + name + " unknown to model");
    if (it->tensor.shape() != shape) {
      throw ContractViolation("checkpoint parameter " + name + " has shape " + to_string(shape) +
                              ", model expects " + to_string(it->tensor.shape()));
    }
    const auto index = static_cast<std::size_t>(it - entries.begin());
    staged[index].resize(numel(shape));
    for (double& v : staged[index]) v = get<double>(in, path);
    seen[index] = true;
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!seen[i]) throw ContractViolation("checkpoint lacks parameter " + params.entries()[i].name);
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto v = params.entries()[i].tensor.mutable_values();
    std::copy(staged[i].begin(), staged[i].end(), v.begin());
  }
}

}  // namespace ctqw
