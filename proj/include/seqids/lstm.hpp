#pragma once

// Single-layer unidirectional LSTM with a per-step softmax head, trained by
// backpropagation through time and Adam. Maps T x d observation windows to
// T rows of action probabilities.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <sstream>
#include <vector>

#include "seqids/rng.hpp"
#include "seqids/types.hpp"

namespace seqids {

struct LstmConfig {
  std::size_t input_dim = 1;
  std::size_t hidden_size = 32;
  std::size_t num_actions = kNumActions;
  std::size_t sequence_length = kWindowLength;
  double learning_rate = 1e-2;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-7;
  std::size_t epochs = 200;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;

  void validate() const {
    if (input_dim < 1) throw ConfigError("LSTM input_dim must be >= 1");
    if (hidden_size < 1) throw ConfigError("LSTM hidden_size must be >= 1");
    if (num_actions < 1) throw ConfigError("LSTM num_actions must be >= 1");
    if (sequence_length < 1) throw ConfigError("LSTM sequence_length must be >= 1");
    if (batch_size < 1) throw ConfigError("LSTM batch_size must be >= 1");
    if (!(learning_rate > 0.0)) throw ConfigError("LSTM learning_rate must be > 0");
  }
};

/// Gate blocks are stacked in the order input, forget, output, candidate.
struct LstmParameters {
  Eigen::MatrixXd w;  // 4H x d
  Eigen::MatrixXd u;  // 4H x H
  Eigen::VectorXd b;  // 4H
  Eigen::MatrixXd v;  // N x H
  Eigen::VectorXd c;  // N

  static LstmParameters zeros(std::size_t d, std::size_t h, std::size_t n) {
    const auto D = Eigen::Index(d), H = Eigen::Index(h), N = Eigen::Index(n);
    return {Eigen::MatrixXd::Zero(4 * H, D), Eigen::MatrixXd::Zero(4 * H, H),
            Eigen::VectorXd::Zero(4 * H), Eigen::MatrixXd::Zero(N, H), Eigen::VectorXd::Zero(N)};
  }

  // Uniform view over all tensors, used by the optimizer and gradient checks.
  template <typename F>
  void for_each(F&& f) {
    f(w.data(), w.size());
    f(u.data(), u.size());
    f(b.data(), b.size());
    f(v.data(), v.size());
    f(c.data(), c.size());
  }

  bool all_finite() const {
    return w.allFinite() && u.allFinite() && b.allFinite() && v.allFinite() && c.allFinite();
  }
};

struct LstmModel {
  LstmConfig config;
  LstmParameters params;
  std::vector<double> input_mean;
  std::vector<double> input_scale;
  // Mean cross-entropy over the training set at initialization ([0]) and
  // after every epoch.
  std::vector<double> loss_history;

  std::size_t hidden_size() const { return static_cast<std::size_t>(params.u.cols()); }
};

/// One training example: T x d raw observations and T action labels.
struct LabeledSeries {
  std::vector<std::vector<double>> inputs;
  std::vector<std::size_t> labels;
};

namespace detail {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Batched forward pass. Inputs: xs[t] is d x B. Keeps every intermediate
// needed by the backward pass.
struct LstmTape {
  std::vector<Eigen::MatrixXd> x, h, c, gi, gf, go, gg, tanh_c, probs;
};

inline void softmax_columns(Eigen::MatrixXd& logits) {
  for (Eigen::Index j = 0; j < logits.cols(); ++j) {
    auto col = logits.col(j);
    col.array() -= col.maxCoeff();
    col = col.array().exp().matrix();
    col /= col.sum();
  }
}

inline LstmTape lstm_run(const LstmParameters& p, const std::vector<Eigen::MatrixXd>& xs) {
  const Eigen::Index H = p.u.cols();
  const Eigen::Index B = xs.empty() ? 0 : xs[0].cols();
  LstmTape tape;
  tape.x = xs;
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(H, B), c = Eigen::MatrixXd::Zero(H, B);
  tape.h.push_back(h);
  tape.c.push_back(c);
  for (const auto& x : xs) {
    Eigen::MatrixXd z = p.w * x + p.u * h;
    z.colwise() += p.b;
    Eigen::MatrixXd i = z.topRows(H).unaryExpr(&sigmoid);
    Eigen::MatrixXd f = z.middleRows(H, H).unaryExpr(&sigmoid);
    Eigen::MatrixXd o = z.middleRows(2 * H, H).unaryExpr(&sigmoid);
    Eigen::MatrixXd g = z.bottomRows(H).array().tanh().matrix();
    c = f.cwiseProduct(c) + i.cwiseProduct(g);
    Eigen::MatrixXd tc = c.array().tanh().matrix();
    h = o.cwiseProduct(tc);
    Eigen::MatrixXd logits = p.v * h;
    logits.colwise() += p.c;
    softmax_columns(logits);
    tape.gi.push_back(std::move(i));
    tape.gf.push_back(std::move(f));
    tape.go.push_back(std::move(o));
    tape.gg.push_back(std::move(g));
    tape.tanh_c.push_back(std::move(tc));
    tape.h.push_back(h);
    tape.c.push_back(c);
    tape.probs.push_back(std::move(logits));
  }
  return tape;
}

}  // namespace detail

/// Mean per-step cross-entropy of a batch and its gradient. xs[t] is the
/// d x B input at step t; labels[b][t] is the target of sequence b.
inline double lstm_loss_and_gradient(const LstmParameters& p,
                                     const std::vector<Eigen::MatrixXd>& xs,
                                     const std::vector<std::vector<std::size_t>>& labels,
                                     LstmParameters* grad) {
  const auto T = xs.size();
  const Eigen::Index B = xs.empty() ? 0 : xs[0].cols();
  const Eigen::Index H = p.u.cols();
  const detail::LstmTape tape = detail::lstm_run(p, xs);
  const double norm = 1.0 / (double(B) * double(T));

  double loss = 0.0;
  for (std::size_t t = 0; t < T; ++t)
    for (Eigen::Index j = 0; j < B; ++j)
      loss -= std::log(std::max(tape.probs[t](Eigen::Index(labels[std::size_t(j)][t]), j), 1e-300));
  loss *= norm;
  if (!grad) return loss;

  *grad = LstmParameters::zeros(std::size_t(p.w.cols()), std::size_t(H), std::size_t(p.v.rows()));
  Eigen::MatrixXd dh_next = Eigen::MatrixXd::Zero(H, B), dc_next = Eigen::MatrixXd::Zero(H, B);
  Eigen::MatrixXd dz(4 * H, B);
  for (std::size_t tt = T; tt-- > 0;) {
    Eigen::MatrixXd dy = tape.probs[tt];
    for (Eigen::Index j = 0; j < B; ++j) dy(Eigen::Index(labels[std::size_t(j)][tt]), j) -= 1.0;
    dy *= norm;
    const Eigen::MatrixXd& h = tape.h[tt + 1];
    grad->v.noalias() += dy * h.transpose();
    grad->c += dy.rowwise().sum();

    Eigen::MatrixXd dh = p.v.transpose() * dy + dh_next;
    const auto& i = tape.gi[tt];
    const auto& f = tape.gf[tt];
    const auto& o = tape.go[tt];
    const auto& g = tape.gg[tt];
    const auto& tc = tape.tanh_c[tt];
    Eigen::MatrixXd dc =
        dh.cwiseProduct(o).cwiseProduct((1.0 - tc.array().square()).matrix()) + dc_next;
    dz.topRows(H) = dc.cwiseProduct(g).cwiseProduct(i.cwiseProduct((1.0 - i.array()).matrix()));
    dz.middleRows(H, H) =
        dc.cwiseProduct(tape.c[tt]).cwiseProduct(f.cwiseProduct((1.0 - f.array()).matrix()));
    dz.middleRows(2 * H, H) =
        dh.cwiseProduct(tc).cwiseProduct(o.cwiseProduct((1.0 - o.array()).matrix()));
    dz.bottomRows(H) = dc.cwiseProduct(i).cwiseProduct((1.0 - g.array().square()).matrix());

    grad->w.noalias() += dz * tape.x[tt].transpose();
    grad->u.noalias() += dz * tape.h[tt].transpose();
    grad->b += dz.rowwise().sum();
    dh_next = p.u.transpose() * dz;
    dc_next = dc.cwiseProduct(f);
  }
  return loss;
}

/// Packs standardized series into per-step d x B matrices.
inline std::vector<Eigen::MatrixXd> pack_batch(std::span<const std::vector<std::vector<double>>> series,
                                               std::size_t input_dim) {
  if (series.empty()) return {};
  const std::size_t T = series[0].size();
  std::vector<Eigen::MatrixXd> xs(T, Eigen::MatrixXd(Eigen::Index(input_dim), Eigen::Index(series.size())));
  for (std::size_t b = 0; b < series.size(); ++b) {
    if (series[b].size() != T) throw DataError("LSTM batch has sequences of different length");
    for (std::size_t t = 0; t < T; ++t) {
      if (series[b][t].size() != input_dim)
        throw DataError("LSTM input has " + std::to_string(series[b][t].size()) +
                        " attributes, expected " + std::to_string(input_dim));
      for (std::size_t k = 0; k < input_dim; ++k)
        xs[t](Eigen::Index(k), Eigen::Index(b)) = series[b][t][k];
    }
  }
  return xs;
}

inline std::vector<std::vector<double>> standardize_series(const LstmModel& model,
                                                           const std::vector<std::vector<double>>& raw) {
  std::vector<std::vector<double>> out(raw.size());
  for (std::size_t t = 0; t < raw.size(); ++t) {
    if (raw[t].size() != model.input_mean.size())
      throw DataError("LSTM input has " + std::to_string(raw[t].size()) + " attributes, expected " +
                      std::to_string(model.input_mean.size()));
    out[t].resize(raw[t].size());
    for (std::size_t k = 0; k < raw[t].size(); ++k)
      out[t][k] = (raw[t][k] - model.input_mean[k]) / model.input_scale[k];
  }
  return out;
}

/// Per-step action distribution (T x N) for a raw observation window.
inline Eigen::MatrixXd lstm_forward(const LstmModel& model,
                                    const std::vector<std::vector<double>>& window) {
  if (window.size() != model.config.sequence_length)
    throw DataError("LSTM expects windows of length " +
                    std::to_string(model.config.sequence_length) + ", got " +
                    std::to_string(window.size()));
  const auto z = standardize_series(model, window);
  const auto xs = pack_batch(std::span(&z, 1), model.config.input_dim);
  const auto tape = detail::lstm_run(model.params, xs);
  Eigen::MatrixXd out(Eigen::Index(window.size()), model.params.v.rows());
  for (std::size_t t = 0; t < window.size(); ++t) out.row(Eigen::Index(t)) = tape.probs[t].col(0).transpose();
  return out;
}

/// Per-step argmax of lstm_forward; ties go to the lowest action index.
inline ActionSequence lstm_predict_sequence(const LstmModel& model,
                                            const std::vector<std::vector<double>>& window) {
  const Eigen::MatrixXd probs = lstm_forward(model, window);
  ActionSequence out;
  for (Eigen::Index t = 0; t < probs.rows(); ++t) {
    Eigen::Index best = 0;
    for (Eigen::Index k = 1; k < probs.cols(); ++k)
      if (probs(t, k) > probs(t, best)) best = k;
    out.push_back(action_at(std::size_t(best)));
  }
  return out;
}

/// Glorot-uniform input and output weights, forget-gate bias 1.
inline LstmParameters init_lstm_parameters(const LstmConfig& config, Rng& rng) {
  auto p = LstmParameters::zeros(config.input_dim, config.hidden_size, config.num_actions);
  auto glorot = [&rng](Eigen::MatrixXd& m) {
    const double limit = std::sqrt(6.0 / double(m.rows() + m.cols()));
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = dist(rng);
  };
  glorot(p.w);
  glorot(p.u);
  glorot(p.v);
  const auto H = Eigen::Index(config.hidden_size);
  p.b.segment(H, H).setOnes();
  return p;
}

/// Trains on the given series with Adam over minibatch BPTT gradients and
/// returns the parameters after the final epoch.
inline LstmModel lstm_train(const LstmConfig& config, std::span<const LabeledSeries> data) {
  config.validate();
  if (data.empty()) throw DataError("lstm_train: empty training set");
  for (const auto& s : data) {
    if (s.inputs.size() != config.sequence_length || s.labels.size() != config.sequence_length)
      throw DataError("lstm_train: every series must have length " +
                      std::to_string(config.sequence_length));
    for (std::size_t l : s.labels)
      if (l >= config.num_actions) throw DataError("lstm_train: label out of range");
  }

  LstmModel model;
  model.config = config;
  const std::size_t d = config.input_dim;
  model.input_mean.assign(d, 0.0);
  model.input_scale.assign(d, 1.0);
  {
    double count = 0.0;
    std::vector<double> sq(d, 0.0);
    for (const auto& s : data)
      for (const auto& row : s.inputs) {
        if (row.size() != d) throw DataError("lstm_train: input dimension mismatch");
        for (std::size_t k = 0; k < d; ++k) model.input_mean[k] += row[k];
        count += 1.0;
      }
    for (auto& m : model.input_mean) m /= count;
    for (const auto& s : data)
      for (const auto& row : s.inputs)
        for (std::size_t k = 0; k < d; ++k)
          sq[k] += (row[k] - model.input_mean[k]) * (row[k] - model.input_mean[k]);
    for (std::size_t k = 0; k < d; ++k) {
      const double sd = std::sqrt(sq[k] / count);
      model.input_scale[k] = sd > 0.0 ? sd : 1.0;
    }
  }

  std::vector<std::vector<std::vector<double>>> inputs;
  std::vector<std::vector<std::size_t>> labels;
  for (const auto& s : data) {
    inputs.push_back(standardize_series(model, s.inputs));
    labels.push_back(s.labels);
  }

  Rng rng = make_stream(config.seed, StreamTag::Lstm);
  model.params = init_lstm_parameters(config, rng);
  const auto full_x = pack_batch(inputs, d);
  auto full_loss = [&] { return lstm_loss_and_gradient(model.params, full_x, labels, nullptr); };
  model.loss_history.push_back(full_loss());

  auto m1 = LstmParameters::zeros(d, config.hidden_size, config.num_actions);
  auto m2 = m1;
  LstmParameters grad;
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::size_t step = 0;

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      std::vector<std::vector<std::vector<double>>> bx;
      std::vector<std::vector<std::size_t>> by;
      for (std::size_t k = start; k < end; ++k) {
        bx.push_back(inputs[order[k]]);
        by.push_back(labels[order[k]]);
      }
      const double loss = lstm_loss_and_gradient(model.params, pack_batch(bx, d), by, &grad);
      if (!std::isfinite(loss)) {
        std::ostringstream msg;
        msg << "lstm_train: non-finite loss at epoch " << epoch + 1 << ", update " << step + 1;
        throw Error(msg.str());
      }
      ++step;
      const double bc1 = 1.0 - std::pow(config.beta1, double(step));
      const double bc2 = 1.0 - std::pow(config.beta2, double(step));
      // Walk the five tensors of params, grad and both moments in lockstep.
      std::vector<double*> gp, m1p, m2p;
      std::vector<Eigen::Index> sizes;
      grad.for_each([&](double* p, Eigen::Index n) { gp.push_back(p); sizes.push_back(n); });
      m1.for_each([&](double* p, Eigen::Index) { m1p.push_back(p); });
      m2.for_each([&](double* p, Eigen::Index) { m2p.push_back(p); });
      std::size_t k = 0;
      model.params.for_each([&](double* p, Eigen::Index n) {
        for (Eigen::Index j = 0; j < n; ++j) {
          const double g = gp[k][j];
          m1p[k][j] = config.beta1 * m1p[k][j] + (1.0 - config.beta1) * g;
          m2p[k][j] = config.beta2 * m2p[k][j] + (1.0 - config.beta2) * g * g;
          p[j] -= config.learning_rate * (m1p[k][j] / bc1) / (std::sqrt(m2p[k][j] / bc2) + config.epsilon);
        }
        ++k;
      });
    }
    const double epoch_loss = full_loss();
    if (!std::isfinite(epoch_loss) || !model.params.all_finite())
      throw Error("lstm_train: training diverged after epoch " + std::to_string(epoch + 1));
    model.loss_history.push_back(epoch_loss);
  }
  return model;
}

}  // namespace seqids
