#pragma once

#include <memory>

#include "fledge/io/idx.hpp"
#include "fledge/io/shard.hpp"
#include "fledge/sim/problem.hpp"

// 784 -> hidden (sigmoid) -> 10 (softmax) classifier with per-sample
// cross-entropy, the training problem behind the image-classification runs.

namespace fledge::io {

class MlpProblem : public sim::MlProblem {
 public:
  MlpProblem(const IdxData& images, const IdxData& labels, const ShardPlan& plan,
             int hidden = 128);

  int dimension() const override { return dim_; }
  int num_workers() const override { return static_cast<int>(inputs_.size()); }
  int num_samples(int worker) const override {
    return static_cast<int>(labels_[worker].size());
  }
  double sample_loss(const Eigen::VectorXd& x, int worker, int sample) const override;
  void sample_grad(const Eigen::VectorXd& x, int worker, int sample,
                   Eigen::VectorXd& out) const override;
  void batch_grad(const Eigen::VectorXd& x, int worker, std::span<const int> samples,
                  Eigen::VectorXd& out) const override;

  int hidden_units() const { return hidden_; }
  // Top-1 accuracy of model x on an unsharded evaluation set.
  double accuracy(const Eigen::VectorXd& x, const IdxData& images, const IdxData& labels) const;
  // Class probabilities for one input (softmax output).
  Eigen::VectorXd predict(const Eigen::VectorXd& x, const Eigen::VectorXd& input) const;

 private:
  int input_ = 0, hidden_ = 0, classes_ = 10, dim_ = 0;
  std::vector<Eigen::MatrixXd> inputs_;    // per worker, input x sample
  std::vector<std::vector<int>> labels_;   // per worker
};

// Synthetic ten-class image set in IDX layout: one Gaussian-blob prototype
// per class plus pixel noise. Stands in for a real digit corpus in tests and
// desk-scale runs.
struct GeneratedDataset {
  IdxData images;  // count x 28 x 28
  IdxData labels;  // count
};
GeneratedDataset generate_digit_dataset(int count, std::uint64_t seed);

}  // namespace fledge::io
