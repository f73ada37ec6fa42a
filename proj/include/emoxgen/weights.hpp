#pragma once

#include <map>
#include <string>

#include "emoxgen/tensor.hpp"

namespace emoxgen::num {

// EMOW1 weight container. Layout, all little-endian:
//   magic "EMOW1"
//   per entry: name length (u32), UTF-8 name, dtype tag (u8, 0 = f32),
//              ndim (u8), dims (u32 each), payload (row-major f32)
// Entries are written in ascending name order so exports are byte-stable.
void save_weights(const std::string& path, const std::map<std::string, Tensor<float>>& params);

std::map<std::string, Tensor<float>> load_weights(const std::string& path);

}  // namespace emoxgen::num
