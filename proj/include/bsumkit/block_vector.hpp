#pragma once

#include <vector>

#include <Eigen/Dense>

namespace bsum {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

// A real vector split into contiguous blocks. Storage is one flat vector so
// whole-vector arithmetic stays cheap.
class BlockVector {
 public:
  BlockVector() = default;
  explicit BlockVector(std::vector<Index> dims);
  BlockVector(std::vector<Index> dims, VectorXd flat);

  static BlockVector from_blocks(const std::vector<VectorXd>& blocks);

  Index num_blocks() const { return static_cast<Index>(dims_.size()); }
  Index dim(Index i) const;
  Index offset(Index i) const;
  Index total_dim() const { return flat_.size(); }
  const std::vector<Index>& dims() const { return dims_; }

  VectorXd::SegmentReturnType block(Index i);
  VectorXd::ConstSegmentReturnType block(Index i) const;

  const VectorXd& flat() const { return flat_; }
  VectorXd& flat() { return flat_; }

  std::vector<VectorXd> unflatten() const;
  BlockVector with_block(Index i, const VectorXd& v) const;

  bool same_shape(const BlockVector& other) const { return dims_ == other.dims_; }

 private:
  void check_index(Index i) const;

  std::vector<Index> dims_;
  std::vector<Index> offsets_;
  VectorXd flat_;
};

}  // namespace bsum
