#include "tienet/ann.hpp"

#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "tienet/binary.hpp"
#include "tienet/error.hpp"
#include "tienet/field_io.hpp"
#include "tienet/seeds.hpp"

namespace tienet {

namespace {

void require_length(std::size_t got, std::size_t want, const char* what) {
  if (got != want) {
    throw Error(ErrorCode::ShapeMismatch, std::string(what) + ": expected length " +
                                              std::to_string(want) + ", got " +
                                              std::to_string(got));
  }
}

RowVector row(std::span<const double> v) {
  return Eigen::Map<const RowVector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

bool Network::all_finite() const {
  return w1.allFinite() && b1.allFinite() && w2.allFinite() && b2.allFinite();
}

bool Network::operator==(const Network& o) const {
  return w1.rows() == o.w1.rows() && w1.cols() == o.w1.cols() && w1 == o.w1 && b1 == o.b1 &&
         w2 == o.w2 && b2 == o.b2;
}

Network init_network(std::size_t inputs, std::size_t hidden) {
  if (inputs == 0 || hidden == 0) {
    throw Error(ErrorCode::InvalidArgument, "network sizes must be positive");
  }
  const auto m = static_cast<Eigen::Index>(inputs);
  const auto h = static_cast<Eigen::Index>(hidden);
  Network net;
  net.w1 = Matrix::Identity(m, h);
  net.b1 = RowVector::Zero(h);
  net.w2 = net.w1.transpose();
  net.b2 = RowVector::Zero(m);
  return net;
}

Matrix forward_batch(const Network& net, const Matrix& x) {
  require_length(static_cast<std::size_t>(x.cols()), net.inputs(), "forward");
  Matrix hidden = ((x * net.w1).rowwise() + net.b1).array().tanh().matrix();
  return (hidden * net.w2).rowwise() + net.b2;
}

std::vector<double> forward(const Network& net, std::span<const double> x) {
  require_length(x.size(), net.inputs(), "forward");
  for (double v : x) {
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFinite, "forward: non-finite input");
  }
  const Matrix y = forward_batch(net, row(x));
  return {y.data(), y.data() + y.size()};
}

double loss(std::span<const double> y, std::span<const double> target) {
  require_length(y.size(), target.size(), "loss");
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double d = target[i] - y[i];
    s += d * d;
  }
  return s;
}

BatchResult backward_batch(const Network& net, const Matrix& x, const Matrix& target) {
  require_length(static_cast<std::size_t>(x.cols()), net.inputs(), "backward");
  require_length(static_cast<std::size_t>(target.cols()), net.inputs(), "backward target");
  require_length(static_cast<std::size_t>(target.rows()), static_cast<std::size_t>(x.rows()),
                 "backward batch");
  const double count = static_cast<double>(x.rows());

  const Matrix hidden = ((x * net.w1).rowwise() + net.b1).array().tanh().matrix();
  const Matrix y = (hidden * net.w2).rowwise() + net.b2;
  const Matrix residual = y - target;

  BatchResult out;
  out.mean_loss = residual.squaredNorm() / count;

  // d(mean loss)/dy = 2 (y - t) / B
  const Matrix dy = (2.0 / count) * residual;
  out.grads.w2.noalias() = hidden.transpose() * dy;
  out.grads.b2 = dy.colwise().sum();
  Matrix dz = dy * net.w2.transpose();
  dz.array() *= 1.0 - hidden.array().square();
  out.grads.w1.noalias() = x.transpose() * dz;
  out.grads.b1 = dz.colwise().sum();
  return out;
}

Gradients backward(const Network& net, std::span<const double> x,
                   std::span<const double> target) {
  require_length(x.size(), net.inputs(), "backward");
  require_length(target.size(), net.inputs(), "backward target");
  return backward_batch(net, row(x), row(target)).grads;
}

void apply_update_in_place(Network& net, const Gradients& g, double rate) {
  if (g.w1.rows() != net.w1.rows() || g.w1.cols() != net.w1.cols() ||
      g.w2.rows() != net.w2.rows() || g.w2.cols() != net.w2.cols() ||
      g.b1.size() != net.b1.size() || g.b2.size() != net.b2.size()) {
    throw Error(ErrorCode::ShapeMismatch, "gradient shapes do not match the network");
  }
  net.w1 -= rate * g.w1;
  net.b1 -= rate * g.b1;
  net.w2 -= rate * g.w2;
  net.b2 -= rate * g.b2;
}

Network apply_update(const Network& net, const Gradients& grads, double rate) {
  Network out = net;
  apply_update_in_place(out, grads, rate);
  return out;
}

double TrainConfig::gradient_scale(std::size_t inputs) const {
  return reduction == CostReduction::PixelMean ? 1.0 / static_cast<double>(inputs) : 1.0;
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0) || epochs == 0 || batch_size == 0 || batch_count == 0) {
    throw Error(ErrorCode::Configuration,
                "learning rate, epochs, batch size and batch count must be positive");
  }
}

TrainResult train(Network net, std::span<const TrainingPair> pairs, const TrainConfig& cfg) {
  cfg.validate();
  if (pairs.size() != cfg.batch_size * cfg.batch_count) {
    throw Error(ErrorCode::Configuration,
                "training needs batch_size * batch_count = " +
                    std::to_string(cfg.batch_size * cfg.batch_count) + " pairs, got " +
                    std::to_string(pairs.size()));
  }
  const std::size_t m = net.inputs();
  for (const auto& p : pairs) {
    require_length(p.input.size(), m, "training input");
    require_length(p.target.size(), m, "training target");
  }

  TrainResult result;
  std::vector<std::size_t> order(pairs.size());
  const auto bs = static_cast<Eigen::Index>(cfg.batch_size);
  const auto cols = static_cast<Eigen::Index>(m);
  Matrix x(bs, cols), t(bs, cols);
  const double step_size = cfg.learning_rate * cfg.gradient_scale(m);

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(derive_seed(cfg.shuffle_seed, streams::shuffle, epoch));
    for (std::size_t i = order.size() - 1; i > 0; --i) {
      std::swap(order[i], order[rng() % (i + 1)]);
    }

    double epoch_loss = 0.0;
    for (std::size_t b = 0; b < cfg.batch_count; ++b) {
      for (Eigen::Index r = 0; r < bs; ++r) {
        const auto& p = pairs[order[b * cfg.batch_size + static_cast<std::size_t>(r)]];
        x.row(r) = row(p.input);
        t.row(r) = row(p.target);
      }
      const BatchResult step = backward_batch(net, x, t);
      if (!std::isfinite(step.mean_loss)) {
        throw Error(ErrorCode::Divergence,
                    "training diverged in epoch " + std::to_string(epoch) + ", batch " +
                        std::to_string(b) + "; lower the learning rate");
      }
      epoch_loss += step.mean_loss;
      apply_update_in_place(net, step.grads, step_size);
    }
    epoch_loss /= static_cast<double>(cfg.batch_count);
    if (!net.all_finite() || !std::isfinite(epoch_loss)) {
      throw Error(ErrorCode::Divergence, "training diverged after epoch " + std::to_string(epoch) +
                                             "; lower the learning rate");
    }
    result.loss_history.push_back(epoch_loss);
  }
  result.net = std::move(net);
  return result;
}

ScalarField adjust(const Network& net, const ScalarField& retrieved) {
  require_length(retrieved.count(), net.inputs(), "adjust");
  return ScalarField(retrieved.size(), retrieved.width(), forward(net, retrieved.values()));
}

namespace {
constexpr std::string_view kMagic = "ANN1";
}

std::vector<std::uint8_t> encode_ann1(const Network& net) {
  binary::Writer w;
  w.magic(kMagic);
  w.u32(static_cast<std::uint32_t>(net.inputs()));
  w.u32(static_cast<std::uint32_t>(net.hidden()));
  w.f64s({net.w1.data(), static_cast<std::size_t>(net.w1.size())});
  w.f64s({net.b1.data(), static_cast<std::size_t>(net.b1.size())});
  w.f64s({net.w2.data(), static_cast<std::size_t>(net.w2.size())});
  w.f64s({net.b2.data(), static_cast<std::size_t>(net.b2.size())});
  return w.take();
}

Network decode_ann1(const std::vector<std::uint8_t>& bytes) {
  binary::Reader r(bytes);
  r.expect_magic(kMagic);
  const auto m = static_cast<Eigen::Index>(r.u32());
  const auto h = static_cast<Eigen::Index>(r.u32());
  if (m == 0 || h == 0) throw Error(ErrorCode::Format, "ANN1 with zero-sized layer");
  if (r.remaining() != static_cast<std::size_t>(2 * m * h + m + h) * sizeof(double)) {
    throw Error(ErrorCode::Format, "ANN1 payload length does not match its header");
  }
  Network net;
  net.w1.resize(m, h);
  net.b1.resize(h);
  net.w2.resize(h, m);
  net.b2.resize(m);
  r.f64s({net.w1.data(), static_cast<std::size_t>(net.w1.size())});
  r.f64s({net.b1.data(), static_cast<std::size_t>(net.b1.size())});
  r.f64s({net.w2.data(), static_cast<std::size_t>(net.w2.size())});
  r.f64s({net.b2.data(), static_cast<std::size_t>(net.b2.size())});
  return net;
}

void save_network(const std::filesystem::path& path, const Network& net) {
  write_bytes(path, encode_ann1(net));
}

Network load_network(const std::filesystem::path& path) { return decode_ann1(read_bytes(path)); }

}  // namespace tienet
