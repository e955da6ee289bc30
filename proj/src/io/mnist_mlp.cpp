#include "fledge/io/mnist_mlp.hpp"

#include <cmath>
#include <stdexcept>

#include "fledge/sim/rng.hpp"

namespace fledge::io {

namespace {

struct ParamView {
  Eigen::Map<const Eigen::MatrixXd> w1;  // input x hidden
  Eigen::Map<const Eigen::VectorXd> b1;
  Eigen::Map<const Eigen::MatrixXd> w2;  // hidden x classes
  Eigen::Map<const Eigen::VectorXd> b2;
};

ParamView view(const Eigen::VectorXd& x, int input, int hidden, int classes) {
  const double* p = x.data();
  return ParamView{
      {p, input, hidden},
      {p + std::size_t(input) * hidden, hidden},
      {p + std::size_t(input) * hidden + hidden, hidden, classes},
      {p + std::size_t(input) * hidden + hidden + std::size_t(hidden) * classes, classes}};
}

}  // namespace

MlpProblem::MlpProblem(const IdxData& images, const IdxData& labels, const ShardPlan& plan,
                       int hidden)
    : input_(static_cast<int>(images.item_size())), hidden_(hidden) {
  if (images.count() != labels.count()) {
    throw std::invalid_argument("mlp: image and label counts differ");
  }
  dim_ = input_ * hidden_ + hidden_ + hidden_ * classes_ + classes_;
  inputs_.resize(plan.num_workers);
  labels_.resize(plan.num_workers);
  for (int n = 0; n < plan.num_workers; ++n) {
    const auto& idx = plan.assignments[n];
    inputs_[n].resize(input_, static_cast<int>(idx.size()));
    labels_[n].reserve(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) {
      inputs_[n].col(static_cast<int>(i)) = idx_item(images, idx[i], /*scaled=*/true);
      int label = labels.bytes[idx[i]];
      if (label < 0 || label >= classes_) throw std::invalid_argument("mlp: label out of range");
      labels_[n].push_back(label);
    }
  }
}

double MlpProblem::sample_loss(const Eigen::VectorXd& x, int worker, int sample) const {
  ParamView p = view(x, input_, hidden_, classes_);
  Eigen::VectorXd a1 =
      (1.0 + (-(p.w1.transpose() * inputs_[worker].col(sample) + p.b1).array()).exp()).inverse();
  Eigen::VectorXd z2 = p.w2.transpose() * a1 + p.b2;
  double zmax = z2.maxCoeff();
  double lse = zmax + std::log((z2.array() - zmax).exp().sum());
  return lse - z2[labels_[worker][sample]];
}

void MlpProblem::sample_grad(const Eigen::VectorXd& x, int worker, int sample,
                             Eigen::VectorXd& out) const {
  int idx[1] = {sample};
  batch_grad(x, worker, std::span<const int>(idx, 1), out);
}

void MlpProblem::batch_grad(const Eigen::VectorXd& x, int worker, std::span<const int> samples,
                            Eigen::VectorXd& out) const {
  ParamView p = view(x, input_, hidden_, classes_);
  const int batch = static_cast<int>(samples.size());

  Eigen::MatrixXd in(input_, batch);
  for (int b = 0; b < batch; ++b) in.col(b) = inputs_[worker].col(samples[b]);

  Eigen::MatrixXd a1 = (p.w1.transpose() * in).colwise() + p.b1;
  a1 = (1.0 + (-a1.array()).exp()).inverse().matrix();  // sigmoid
  Eigen::MatrixXd z2 = (p.w2.transpose() * a1).colwise() + p.b2;
  // softmax - one_hot, column-wise
  Eigen::MatrixXd d2(classes_, batch);
  for (int b = 0; b < batch; ++b) {
    Eigen::VectorXd col = z2.col(b);
    double zmax = col.maxCoeff();
    Eigen::VectorXd e = (col.array() - zmax).exp();
    d2.col(b) = e / e.sum();
    d2(labels_[worker][samples[b]], b) -= 1.0;
  }
  Eigen::MatrixXd d1 =
      (p.w2 * d2).array() * (a1.array() * (1.0 - a1.array()));  // sigmoid derivative

  out.resize(dim_);
  double inv_b = 1.0 / batch;
  Eigen::Map<Eigen::MatrixXd>(out.data(), input_, hidden_) = in * d1.transpose() * inv_b;
  Eigen::Map<Eigen::VectorXd>(out.data() + std::size_t(input_) * hidden_, hidden_) =
      d1.rowwise().sum() * inv_b;
  Eigen::Map<Eigen::MatrixXd>(out.data() + std::size_t(input_) * hidden_ + hidden_, hidden_,
                              classes_) = a1 * d2.transpose() * inv_b;
  Eigen::Map<Eigen::VectorXd>(
      out.data() + std::size_t(input_) * hidden_ + hidden_ + std::size_t(hidden_) * classes_,
      classes_) = d2.rowwise().sum() * inv_b;
}

Eigen::VectorXd MlpProblem::predict(const Eigen::VectorXd& x, const Eigen::VectorXd& input) const {
  ParamView p = view(x, input_, hidden_, classes_);
  Eigen::VectorXd a1 = (1.0 + (-(p.w1.transpose() * input + p.b1).array()).exp()).inverse();
  Eigen::VectorXd z2 = p.w2.transpose() * a1 + p.b2;
  double zmax = z2.maxCoeff();
  Eigen::VectorXd e = (z2.array() - zmax).exp();
  return e / e.sum();
}

double MlpProblem::accuracy(const Eigen::VectorXd& x, const IdxData& images,
                            const IdxData& labels) const {
  int hits = 0;
  for (int i = 0; i < images.count(); ++i) {
    Eigen::VectorXd probs = predict(x, idx_item(images, i, true));
    Eigen::Index argmax;
    probs.maxCoeff(&argmax);
    if (static_cast<int>(argmax) == labels.bytes[i]) ++hits;
  }
  return static_cast<double>(hits) / images.count();
}

GeneratedDataset generate_digit_dataset(int count, std::uint64_t seed) {
  sim::Rng rng(sim::derive_seed(seed, sim::StreamPurpose::kProblemGen, 7));
  const int side = 28, pixels = side * side, classes = 10;

  // Class prototypes: two soft blobs at class-specific positions.
  std::vector<Eigen::VectorXd> prototypes(classes, Eigen::VectorXd::Zero(pixels));
  for (int c = 0; c < classes; ++c) {
    double angle = 2.0 * M_PI * c / classes;
    double cx1 = 14.0 + 7.0 * std::cos(angle), cy1 = 14.0 + 7.0 * std::sin(angle);
    double cx2 = 14.0 - 5.0 * std::sin(angle), cy2 = 14.0 + 5.0 * std::cos(angle);
    for (int yy = 0; yy < side; ++yy) {
      for (int xx = 0; xx < side; ++xx) {
        double d1 = ((xx - cx1) * (xx - cx1) + (yy - cy1) * (yy - cy1)) / 18.0;
        double d2 = ((xx - cx2) * (xx - cx2) + (yy - cy2) * (yy - cy2)) / 30.0;
        prototypes[c][yy * side + xx] = 200.0 * std::exp(-d1) + 150.0 * std::exp(-d2);
      }
    }
  }

  GeneratedDataset out;
  out.images.shape = {static_cast<std::uint32_t>(count), side, side};
  out.images.bytes.resize(std::size_t(count) * pixels);
  out.labels.shape = {static_cast<std::uint32_t>(count)};
  out.labels.bytes.resize(count);
  for (int i = 0; i < count; ++i) {
    int c = i % classes;
    out.labels.bytes[i] = static_cast<std::uint8_t>(c);
    for (int px = 0; px < pixels; ++px) {
      double v = prototypes[c][px] + 25.0 * rng.normal();
      out.images.bytes[std::size_t(i) * pixels + px] =
          static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
    }
  }
  return out;
}

}  // namespace fledge::io
