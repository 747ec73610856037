// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ctqw Authors

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ctqw/tensor.hpp"

namespace ctqw {

struct NamedTensor {
  std::string name;
  Tensor tensor;
};

/// Ordered collection of trainable tensors keyed by hierarchical names such
/// as "layers.1.qwgt.w_query". Entries share storage with the modules that
/// registered them.
class ParameterSet {
 public:
  void add(std::string name, Tensor tensor);

  std::size_t size() const { return entries_.size(); }
  std::size_t scalar_count() const;
  const std::vector<NamedTensor>& entries() const { return entries_; }
  std::vector<NamedTensor>& entries() { return entries_; }
  const Tensor& at(const std::string& name) const;

  void zero_grad();
  void scale_grad(double factor);

  // Flat copies of all values, in entry order.
  std::vector<double> snapshot() const;
  void restore(const std::vector<double>& flat);

 private:
  std::vector<NamedTensor> entries_;
};

/// Checkpoint file layout (all integers and doubles little-endian):
///   magic   8 bytes  "CTQWPRM\0"
///   version u32      (1)
///   count   u64
///   per parameter:
///     name_len u32, name bytes (UTF-8, no terminator)
///     rank u32, dims u64[rank]
///     values f64[prod(dims)], row-major
inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(const std::filesystem::path& path, const ParameterSet& params);

/// Loads values into `params` in place. Every stored name must exist in
/// `params` with the same shape and every parameter must be present.
void load_checkpoint(const std::filesystem::path& path, ParameterSet& params);

}  // namespace ctqw
