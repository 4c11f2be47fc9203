#include "bsumkit/block_vector.hpp"

#include <string>

#include "bsumkit/errors.hpp"

namespace bsum {

namespace {

std::vector<Index> offsets_of(const std::vector<Index>& dims) {
  std::vector<Index> off(dims.size());
  Index acc = 0;
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (dims[i] <= 0) {
      throw DimensionError("block " + std::to_string(i) + " has non-positive dimension " +
                           std::to_string(dims[i]));
    }
    off[i] = acc;
    acc += dims[i];
  }
  return off;
}

Index sum_of(const std::vector<Index>& dims) {
  Index s = 0;
  for (Index d : dims) s += d;
  return s;
}

}  // namespace

BlockVector::BlockVector(std::vector<Index> dims)
    : dims_(std::move(dims)), offsets_(offsets_of(dims_)), flat_(VectorXd::Zero(sum_of(dims_))) {}

BlockVector::BlockVector(std::vector<Index> dims, VectorXd flat)
    : dims_(std::move(dims)), offsets_(offsets_of(dims_)), flat_(std::move(flat)) {
  if (flat_.size() != sum_of(dims_)) {
    throw DimensionError("flat vector has " + std::to_string(flat_.size()) +
                         " entries, block dimensions sum to " + std::to_string(sum_of(dims_)));
  }
}

BlockVector BlockVector::from_blocks(const std::vector<VectorXd>& blocks) {
  std::vector<Index> dims;
  dims.reserve(blocks.size());
  for (const auto& b : blocks) dims.push_back(b.size());
  BlockVector out(dims);
  for (std::size_t i = 0; i < blocks.size(); ++i) out.block(static_cast<Index>(i)) = blocks[i];
  return out;
}

void BlockVector::check_index(Index i) const {
  if (i < 0 || i >= num_blocks()) {
    throw DimensionError("block index " + std::to_string(i) + " out of range for " +
                         std::to_string(num_blocks()) + " blocks");
  }
}

Index BlockVector::dim(Index i) const {
  check_index(i);
  return dims_[static_cast<std::size_t>(i)];
}

Index BlockVector::offset(Index i) const {
  check_index(i);
  return offsets_[static_cast<std::size_t>(i)];
}

VectorXd::SegmentReturnType BlockVector::block(Index i) {
  check_index(i);
  return flat_.segment(offsets_[static_cast<std::size_t>(i)], dims_[static_cast<std::size_t>(i)]);
}

VectorXd::ConstSegmentReturnType BlockVector::block(Index i) const {
  check_index(i);
  return flat_.segment(offsets_[static_cast<std::size_t>(i)], dims_[static_cast<std::size_t>(i)]);
}

std::vector<VectorXd> BlockVector::unflatten() const {
  std::vector<VectorXd> out;
  out.reserve(dims_.size());
  for (Index i = 0; i < num_blocks(); ++i) out.emplace_back(block(i));
  return out;
}

BlockVector BlockVector::with_block(Index i, const VectorXd& v) const {
  if (v.size() != dim(i)) {
    throw DimensionError("block " + std::to_string(i) + " expects " + std::to_string(dim(i)) +
                         " entries, got " + std::to_string(v.size()));
  }
  BlockVector out = *this;
  out.block(i) = v;
  return out;
}

}  // namespace bsum
