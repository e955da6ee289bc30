#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

// IDX tensor files (the MNIST container format): big-endian 4-byte magic
// (0x00000803 for 3-D unsigned-byte images, 0x00000801 for 1-D labels),
// big-endian dimension sizes, then row-major unsigned bytes.

namespace fledge::io {

struct IdxData {
  std::vector<std::uint32_t> shape;
  std::vector<std::uint8_t> bytes;

  int count() const { return shape.empty() ? 0 : static_cast<int>(shape[0]); }
  std::size_t item_size() const;
};

IdxData load_idx(const std::string& path);
void save_idx(const std::string& path, const IdxData& data);

// Flattens item i to a real vector; scaled maps bytes to [0, 1].
Eigen::VectorXd idx_item(const IdxData& data, int index, bool scaled);

}  // namespace fledge::io
