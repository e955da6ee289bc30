#include "fledge/io/idx.hpp"

#include <fstream>
#include <stdexcept>

namespace fledge::io {

namespace {

constexpr std::uint32_t kImagesMagic = 0x00000803;
constexpr std::uint32_t kLabelsMagic = 0x00000801;

std::uint32_t read_u32_be(std::istream& in, const std::string& what) {
  unsigned char buf[4];
  if (!in.read(reinterpret_cast<char*>(buf), 4)) {
    throw std::runtime_error("idx: truncated file while reading " + what);
  }
  return (std::uint32_t(buf[0]) << 24) | (std::uint32_t(buf[1]) << 16) |
         (std::uint32_t(buf[2]) << 8) | std::uint32_t(buf[3]);
}

void write_u32_be(std::ostream& out, std::uint32_t v) {
  unsigned char buf[4] = {static_cast<unsigned char>(v >> 24),
                          static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v)};
  out.write(reinterpret_cast<const char*>(buf), 4);
}

}  // namespace

std::size_t IdxData::item_size() const {
  std::size_t size = 1;
  for (std::size_t i = 1; i < shape.size(); ++i) size *= shape[i];
  return size;
}

IdxData load_idx(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("idx: cannot open '" + path + "'");

  std::uint32_t magic = read_u32_be(in, "magic");
  std::size_t dims;
  if (magic == kImagesMagic) {
    dims = 3;
  } else if (magic == kLabelsMagic) {
    dims = 1;
  } else {
    throw std::runtime_error("idx: bad magic in '" + path + "'");
  }

  IdxData data;
  std::size_t total = 1;
  for (std::size_t d = 0; d < dims; ++d) {
    std::uint32_t size = read_u32_be(in, "dimension " + std::to_string(d));
    data.shape.push_back(size);
    if (size != 0 && total > (std::size_t(1) << 40) / size) {
      throw std::runtime_error("idx: dimension overflow in '" + path + "'");
    }
    total *= size;
  }

  data.bytes.resize(total);
  if (!in.read(reinterpret_cast<char*>(data.bytes.data()),
               static_cast<std::streamsize>(total))) {
    throw std::runtime_error("idx: truncated payload in '" + path + "'");
  }
  return data;
}

void save_idx(const std::string& path, const IdxData& data) {
  std::uint32_t magic;
  if (data.shape.size() == 3) {
    magic = kImagesMagic;
  } else if (data.shape.size() == 1) {
    magic = kLabelsMagic;
  } else {
    throw std::invalid_argument("idx: only 1-D label or 3-D image tensors are written");
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("idx: cannot write '" + path + "'");
  write_u32_be(out, magic);
  std::size_t total = 1;
  for (std::uint32_t s : data.shape) {
    write_u32_be(out, s);
    total *= s;
  }
  if (total != data.bytes.size()) {
    throw std::invalid_argument("idx: payload size does not match the shape");
  }
  out.write(reinterpret_cast<const char*>(data.bytes.data()),
            static_cast<std::streamsize>(data.bytes.size()));
}

Eigen::VectorXd idx_item(const IdxData& data, int index, bool scaled) {
  std::size_t size = data.item_size();
  Eigen::VectorXd out(static_cast<Eigen::Index>(size));
  const std::uint8_t* base = data.bytes.data() + std::size_t(index) * size;
  double scale = scaled ? 1.0 / 255.0 : 1.0;
  for (std::size_t i = 0; i < size; ++i) out[static_cast<Eigen::Index>(i)] = base[i] * scale;
  return out;
}

}  // namespace fledge::io
