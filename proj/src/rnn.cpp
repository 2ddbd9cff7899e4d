#include "simbench/rnn.hpp"

#include "simbench/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace simbench {

namespace {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline double sign_of(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

/// Forward caches for one layer over a whole sequence (rows = steps).
struct LayerTrace {
    Eigen::MatrixXd x;  // layer input
    Eigen::MatrixXd i, f, g, o, c, tc, h;
};

} // namespace

RnnModel::RnnModel(int input_size, int cell_dim, int num_layers, int horizon)
    : input_size_(input_size), cell_dim_(cell_dim), num_layers_(num_layers),
      horizon_(horizon) {
    if (input_size < 1 || cell_dim < 1 || num_layers < 1 || horizon < 1) {
        throw ParameterError("recurrent network dimensions must be >= 1");
    }
    Eigen::Index offset = 0;
    const Eigen::Index d = cell_dim;
    for (int l = 0; l < num_layers; ++l) {
        LayerOffsets lo;
        lo.in = (l == 0) ? input_size : cell_dim;
        lo.w = offset;
        offset += 4 * d * lo.in;
        lo.u = offset;
        offset += 4 * d * d;
        lo.b = offset;
        offset += 4 * d;
        lo.p = offset;
        offset += 3 * d;
        layers_.push_back(lo);
    }
    d_offset_ = offset;
    offset += static_cast<Eigen::Index>(horizon) * d;
    params_ = Eigen::VectorXd::Zero(offset);
}

void RnnModel::initialize(double init_std, Rng& rng) {
    for (Eigen::Index i = 0; i < params_.size(); ++i) {
        params_[i] = rng.normal(0.0, init_std);
    }
}

namespace {

template <typename Vec>
auto map_matrix(Vec& vec, Eigen::Index offset, Eigen::Index rows,
                Eigen::Index cols) {
    using Scalar = std::remove_pointer_t<decltype(vec.data())>;
    return Eigen::Map<Eigen::Matrix<std::remove_const_t<Scalar>, Eigen::Dynamic,
                                    Eigen::Dynamic>,
                      0>(vec.data() + offset, rows, cols);
}

} // namespace

Eigen::MatrixXd RnnModel::forward_sequence(const Eigen::MatrixXd& inputs) const {
    if (inputs.cols() != input_size_) {
        throw ParameterError("sequence input width mismatch");
    }
    const Eigen::Index steps = inputs.rows();
    const Eigen::Index d = cell_dim_;
    const auto D =
        Eigen::Map<const Eigen::MatrixXd>(params_.data() + d_offset_, horizon_, d);

    std::vector<Eigen::VectorXd> h(static_cast<std::size_t>(num_layers_),
                                   Eigen::VectorXd::Zero(d));
    std::vector<Eigen::VectorXd> c(static_cast<std::size_t>(num_layers_),
                                   Eigen::VectorXd::Zero(d));
    Eigen::MatrixXd outputs(steps, horizon_);

    for (Eigen::Index t = 0; t < steps; ++t) {
        Eigen::VectorXd z = inputs.row(t).transpose();
        for (int l = 0; l < num_layers_; ++l) {
            const LayerOffsets& lo = layers_[static_cast<std::size_t>(l)];
            const auto W = Eigen::Map<const Eigen::MatrixXd>(params_.data() + lo.w,
                                                             4 * d, lo.in);
            const auto U =
                Eigen::Map<const Eigen::MatrixXd>(params_.data() + lo.u, 4 * d, d);
            const auto b =
                Eigen::Map<const Eigen::VectorXd>(params_.data() + lo.b, 4 * d);
            const auto peep =
                Eigen::Map<const Eigen::VectorXd>(params_.data() + lo.p, 3 * d);

            Eigen::VectorXd pre = W * z + U * h[static_cast<std::size_t>(l)] + b;
            Eigen::VectorXd& cc = c[static_cast<std::size_t>(l)];
            Eigen::VectorXd gate_i(d), gate_f(d), gate_g(d), gate_o(d);
            for (Eigen::Index k = 0; k < d; ++k) {
                gate_i[k] = sigmoid(pre[k] + peep[k] * cc[k]);
                gate_f[k] = sigmoid(pre[d + k] + peep[d + k] * cc[k]);
                gate_g[k] = std::tanh(pre[2 * d + k]);
            }
            Eigen::VectorXd c_new =
                gate_f.cwiseProduct(cc) + gate_i.cwiseProduct(gate_g);
            for (Eigen::Index k = 0; k < d; ++k) {
                gate_o[k] = sigmoid(pre[3 * d + k] + peep[2 * d + k] * c_new[k]);
            }
            Eigen::VectorXd h_new =
                gate_o.cwiseProduct(c_new.array().tanh().matrix());
            cc = std::move(c_new);
            h[static_cast<std::size_t>(l)] = h_new;
            // residual addition from the second layer upward
            z = (l == 0) ? h_new : Eigen::VectorXd(h_new + z);
        }
        outputs.row(t) = (D * z).transpose();
    }
    return outputs;
}

Eigen::VectorXd RnnModel::forward_last(const Eigen::MatrixXd& inputs) const {
    const Eigen::MatrixXd outputs = forward_sequence(inputs);
    return outputs.row(outputs.rows() - 1).transpose();
}

double RnnModel::sequence_gradient(const Eigen::MatrixXd& inputs,
                                   const Eigen::MatrixXd& targets, double scale,
                                   Eigen::VectorXd& grad) const {
    const Eigen::Index steps = inputs.rows();
    const Eigen::Index d = cell_dim_;
    if (targets.rows() != steps || targets.cols() != horizon_) {
        throw ParameterError("sequence target shape mismatch");
    }
    const auto D =
        Eigen::Map<const Eigen::MatrixXd>(params_.data() + d_offset_, horizon_, d);

    // Forward pass with full caches.
    std::vector<LayerTrace> trace(static_cast<std::size_t>(num_layers_));
    for (int l = 0; l < num_layers_; ++l) {
        LayerTrace& tr = trace[static_cast<std::size_t>(l)];
        tr.x.resize(steps, layers_[static_cast<std::size_t>(l)].in);
        tr.i.resize(steps, d);
        tr.f.resize(steps, d);
        tr.g.resize(steps, d);
        tr.o.resize(steps, d);
        tr.c.resize(steps, d);
        tr.tc.resize(steps, d);
        tr.h.resize(steps, d);
    }
    Eigen::MatrixXd z_top(steps, d);
    Eigen::MatrixXd outputs(steps, horizon_);

    {
        std::vector<Eigen::VectorXd> h(static_cast<std::size_t>(num_layers_),
                                       Eigen::VectorXd::Zero(d));
        std::vector<Eigen::VectorXd> c(static_cast<std::size_t>(num_layers_),
                                       Eigen::VectorXd::Zero(d));
        for (Eigen::Index t = 0; t < steps; ++t) {
            Eigen::VectorXd z = inputs.row(t).transpose();
            for (int l = 0; l < num_layers_; ++l) {
                const LayerOffsets& lo = layers_[static_cast<std::size_t>(l)];
                LayerTrace& tr = trace[static_cast<std::size_t>(l)];
                const auto W = Eigen::Map<const Eigen::MatrixXd>(
                    params_.data() + lo.w, 4 * d, lo.in);
                const auto U = Eigen::Map<const Eigen::MatrixXd>(
                    params_.data() + lo.u, 4 * d, d);
                const auto b =
                    Eigen::Map<const Eigen::VectorXd>(params_.data() + lo.b, 4 * d);
                const auto peep =
                    Eigen::Map<const Eigen::VectorXd>(params_.data() + lo.p, 3 * d);

                tr.x.row(t) = z.transpose();
                Eigen::VectorXd pre =
                    W * z + U * h[static_cast<std::size_t>(l)] + b;
                Eigen::VectorXd& cc = c[static_cast<std::size_t>(l)];
                Eigen::VectorXd gate_i(d), gate_f(d), gate_g(d), gate_o(d);
                for (Eigen::Index k = 0; k < d; ++k) {
                    gate_i[k] = sigmoid(pre[k] + peep[k] * cc[k]);
                    gate_f[k] = sigmoid(pre[d + k] + peep[d + k] * cc[k]);
                    gate_g[k] = std::tanh(pre[2 * d + k]);
                }
                Eigen::VectorXd c_new =
                    gate_f.cwiseProduct(cc) + gate_i.cwiseProduct(gate_g);
                for (Eigen::Index k = 0; k < d; ++k) {
                    gate_o[k] = sigmoid(pre[3 * d + k] + peep[2 * d + k] * c_new[k]);
                }
                Eigen::VectorXd tc_new = c_new.array().tanh().matrix();
                Eigen::VectorXd h_new = gate_o.cwiseProduct(tc_new);

                tr.i.row(t) = gate_i.transpose();
                tr.f.row(t) = gate_f.transpose();
                tr.g.row(t) = gate_g.transpose();
                tr.o.row(t) = gate_o.transpose();
                tr.c.row(t) = c_new.transpose();
                tr.tc.row(t) = tc_new.transpose();
                tr.h.row(t) = h_new.transpose();

                cc = std::move(c_new);
                h[static_cast<std::size_t>(l)] = h_new;
                z = (l == 0) ? h_new : Eigen::VectorXd(h_new + z);
            }
            z_top.row(t) = z.transpose();
            outputs.row(t) = (D * z).transpose();
        }
    }

    double abs_sum = 0.0;
    Eigen::MatrixXd dout(steps, horizon_);
    for (Eigen::Index t = 0; t < steps; ++t) {
        for (Eigen::Index k = 0; k < horizon_; ++k) {
            const double err = outputs(t, k) - targets(t, k);
            abs_sum += std::abs(err);
            dout(t, k) = sign_of(err) * scale;
        }
    }

    // Backward pass through time and down the stack.
    auto dD = map_matrix(grad, d_offset_, horizon_, d);
    std::vector<Eigen::VectorXd> dh_time(static_cast<std::size_t>(num_layers_),
                                         Eigen::VectorXd::Zero(d));
    std::vector<Eigen::VectorXd> dc_time(static_cast<std::size_t>(num_layers_),
                                         Eigen::VectorXd::Zero(d));
    for (Eigen::Index t = steps - 1; t >= 0; --t) {
        dD.noalias() += dout.row(t).transpose() * z_top.row(t);
        Eigen::VectorXd dz = D.transpose() * dout.row(t).transpose();
        for (int l = num_layers_ - 1; l >= 0; --l) {
            const LayerOffsets& lo = layers_[static_cast<std::size_t>(l)];
            const LayerTrace& tr = trace[static_cast<std::size_t>(l)];
            const auto W = Eigen::Map<const Eigen::MatrixXd>(params_.data() + lo.w,
                                                             4 * d, lo.in);
            const auto U =
                Eigen::Map<const Eigen::MatrixXd>(params_.data() + lo.u, 4 * d, d);
            const auto peep =
                Eigen::Map<const Eigen::VectorXd>(params_.data() + lo.p, 3 * d);

            const Eigen::VectorXd gate_i = tr.i.row(t).transpose();
            const Eigen::VectorXd gate_f = tr.f.row(t).transpose();
            const Eigen::VectorXd gate_g = tr.g.row(t).transpose();
            const Eigen::VectorXd gate_o = tr.o.row(t).transpose();
            const Eigen::VectorXd c_now = tr.c.row(t).transpose();
            const Eigen::VectorXd tc_now = tr.tc.row(t).transpose();
            const Eigen::VectorXd c_prev =
                (t > 0) ? Eigen::VectorXd(tr.c.row(t - 1).transpose())
                        : Eigen::VectorXd(Eigen::VectorXd::Zero(d));
            const Eigen::VectorXd h_prev =
                (t > 0) ? Eigen::VectorXd(tr.h.row(t - 1).transpose())
                        : Eigen::VectorXd(Eigen::VectorXd::Zero(d));

            Eigen::VectorXd dh = dz + dh_time[static_cast<std::size_t>(l)];
            const Eigen::VectorXd& dc_in = dc_time[static_cast<std::size_t>(l)];

            Eigen::VectorXd do_pre(d), di_pre(d), df_pre(d), dg_pre(d), dc(d);
            for (Eigen::Index k = 0; k < d; ++k) {
                const double dok = dh[k] * tc_now[k];
                do_pre[k] = dok * gate_o[k] * (1.0 - gate_o[k]);
                dc[k] = dh[k] * gate_o[k] * (1.0 - tc_now[k] * tc_now[k]) +
                        dc_in[k] + peep[2 * d + k] * do_pre[k];
            }
            for (Eigen::Index k = 0; k < d; ++k) {
                const double dik = dc[k] * gate_g[k];
                di_pre[k] = dik * gate_i[k] * (1.0 - gate_i[k]);
                const double dfk = dc[k] * c_prev[k];
                df_pre[k] = dfk * gate_f[k] * (1.0 - gate_f[k]);
                const double dgk = dc[k] * gate_i[k];
                dg_pre[k] = dgk * (1.0 - gate_g[k] * gate_g[k]);
            }
            Eigen::VectorXd dpre(4 * d);
            dpre.segment(0, d) = di_pre;
            dpre.segment(d, d) = df_pre;
            dpre.segment(2 * d, d) = dg_pre;
            dpre.segment(3 * d, d) = do_pre;

            auto dW = map_matrix(grad, lo.w, 4 * d, lo.in);
            auto dU = map_matrix(grad, lo.u, 4 * d, d);
            dW.noalias() += dpre * tr.x.row(t);
            dU.noalias() += dpre * h_prev.transpose();
            Eigen::Map<Eigen::VectorXd>(grad.data() + lo.b, 4 * d) += dpre;
            auto dpeep = Eigen::Map<Eigen::VectorXd>(grad.data() + lo.p, 3 * d);
            for (Eigen::Index k = 0; k < d; ++k) {
                dpeep[k] += di_pre[k] * c_prev[k];
                dpeep[d + k] += df_pre[k] * c_prev[k];
                dpeep[2 * d + k] += do_pre[k] * c_now[k];
            }

            dh_time[static_cast<std::size_t>(l)] = U.transpose() * dpre;
            for (Eigen::Index k = 0; k < d; ++k) {
                dc_time[static_cast<std::size_t>(l)][k] =
                    dc[k] * gate_f[k] + peep[k] * di_pre[k] + peep[d + k] * df_pre[k];
            }

            Eigen::VectorXd dx = W.transpose() * dpre;
            if (l >= 1) {
                // input of layer l (>= 2 in 1-based terms) also feeds the
                // residual sum above it
                dz = dx + dz;
            } else {
                dz = dx; // gradient w.r.t. the raw window input, unused
            }
        }
    }
    return abs_sum;
}

double RnnModel::apply_l2(double l2, Eigen::VectorXd& grad) const {
    const Eigen::Index d = cell_dim_;
    double penalty = 0.0;
    auto add = [&](Eigen::Index offset, Eigen::Index count) {
        const auto w =
            Eigen::Map<const Eigen::VectorXd>(params_.data() + offset, count);
        penalty += w.squaredNorm();
        Eigen::Map<Eigen::VectorXd>(grad.data() + offset, count) += l2 * w;
    };
    for (const LayerOffsets& lo : layers_) {
        add(lo.w, 4 * d * lo.in);
        add(lo.u, 4 * d * d);
        add(lo.p, 3 * d); // peepholes are weights; biases carry no decay
    }
    add(d_offset_, static_cast<Eigen::Index>(horizon_) * d);
    return 0.5 * l2 * penalty;
}

double RnnModel::loss(const std::vector<SeriesSequence>& sequences,
                      double l2) const {
    double abs_sum = 0.0;
    long count = 0;
    for (const SeriesSequence& seq : sequences) {
        const Eigen::MatrixXd out = forward_sequence(seq.inputs);
        abs_sum += (out - seq.targets).cwiseAbs().sum();
        count += out.size();
    }
    if (count == 0) {
        throw ParameterError("no sequence elements to score");
    }
    double penalty = 0.0;
    const Eigen::Index d = cell_dim_;
    auto accumulate = [&](Eigen::Index offset, Eigen::Index n) {
        penalty +=
            Eigen::Map<const Eigen::VectorXd>(params_.data() + offset, n).squaredNorm();
    };
    for (const LayerOffsets& lo : layers_) {
        accumulate(lo.w, 4 * d * lo.in);
        accumulate(lo.u, 4 * d * d);
        accumulate(lo.p, 3 * d);
    }
    accumulate(d_offset_, static_cast<Eigen::Index>(horizon_) * d);
    return abs_sum / static_cast<double>(count) + 0.5 * l2 * penalty;
}

double RnnModel::loss_and_gradient(const std::vector<SeriesSequence>& sequences,
                                   double l2, Eigen::VectorXd& grad) const {
    grad = Eigen::VectorXd::Zero(params_.size());
    long count = 0;
    for (const SeriesSequence& seq : sequences) {
        count += seq.targets.size();
    }
    if (count == 0) {
        throw ParameterError("no sequence elements to score");
    }
    const double scale = 1.0 / static_cast<double>(count);
    double abs_sum = 0.0;
    for (const SeriesSequence& seq : sequences) {
        abs_sum += sequence_gradient(seq.inputs, seq.targets, scale, grad);
    }
    const double penalty = apply_l2(l2, grad);
    return abs_sum * scale + penalty;
}

std::vector<SeriesSequence> sequences_from_batch(const WindowBatch& batch) {
    if (batch.rows() == 0) {
        throw DataError("cannot build sequences from an empty window batch");
    }
    std::vector<std::vector<Eigen::Index>> by_series;
    for (Eigen::Index r = 0; r < batch.inputs.rows(); ++r) {
        const std::size_t s = static_cast<std::size_t>(batch.series_index[static_cast<std::size_t>(r)]);
        if (by_series.size() <= s) by_series.resize(s + 1);
        by_series[s].push_back(r);
    }
    std::vector<SeriesSequence> sequences;
    for (auto& rows : by_series) {
        if (rows.empty()) continue;
        std::sort(rows.begin(), rows.end(), [&](Eigen::Index a, Eigen::Index b) {
            return batch.window_index[static_cast<std::size_t>(a)] <
                   batch.window_index[static_cast<std::size_t>(b)];
        });
        SeriesSequence seq;
        seq.inputs.resize(static_cast<Eigen::Index>(rows.size()), batch.inputs.cols());
        seq.targets.resize(static_cast<Eigen::Index>(rows.size()), batch.targets.cols());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            seq.inputs.row(static_cast<Eigen::Index>(i)) = batch.inputs.row(rows[i]);
            seq.targets.row(static_cast<Eigen::Index>(i)) = batch.targets.row(rows[i]);
        }
        sequences.push_back(std::move(seq));
    }
    return sequences;
}

RnnModel fit_rnn(const std::vector<SeriesSequence>& sequences,
                 const RnnConfig& config, int horizon) {
    if (sequences.empty()) {
        throw DataError("cannot train a recurrent network without sequences");
    }
    const int input_size = static_cast<int>(sequences.front().inputs.cols());
    for (const SeriesSequence& seq : sequences) {
        if (seq.inputs.cols() != input_size || seq.targets.cols() != horizon ||
            seq.inputs.rows() != seq.targets.rows() || seq.inputs.rows() == 0) {
            throw ParameterError("inconsistent sequence shapes");
        }
    }
    const NnTrainingConfig& train = config.train;
    if (train.epochs < 1 || train.epoch_size < 1 || train.minibatch < 1) {
        throw ParameterError("epochs, epoch size, and minibatch must be >= 1");
    }

    RnnModel model(input_size, config.cell_dim, config.num_layers, horizon);
    Rng rng(train.seed);
    model.initialize(train.init_std, rng);
    AdamOptimizer adam(model.parameters().size(), train.learning_rate);

    std::vector<std::size_t> order(sequences.size());
    std::iota(order.begin(), order.end(), 0);
    const std::size_t mb =
        std::min<std::size_t>(static_cast<std::size_t>(train.minibatch),
                              sequences.size());

    Eigen::VectorXd grad(model.parameters().size());
    SeriesSequence noisy;
    for (int epoch = 0; epoch < train.epochs; ++epoch) {
        for (int rep = 0; rep < train.epoch_size; ++rep) {
            shuffle_in_place(order, rng);
            for (std::size_t start = 0; start < order.size(); start += mb) {
                const std::size_t count = std::min(mb, order.size() - start);
                grad.setZero();
                long elements = 0;
                for (std::size_t i = 0; i < count; ++i) {
                    elements += sequences[order[start + i]].targets.size();
                }
                const double scale = 1.0 / static_cast<double>(elements);
                double abs_sum = 0.0;
                for (std::size_t i = 0; i < count; ++i) {
                    const SeriesSequence& seq = sequences[order[start + i]];
                    noisy.inputs = seq.inputs;
                    for (Eigen::Index r = 0; r < noisy.inputs.rows(); ++r) {
                        for (Eigen::Index c0 = 0; c0 < noisy.inputs.cols(); ++c0) {
                            noisy.inputs(r, c0) +=
                                rng.normal(0.0, train.input_noise_std);
                        }
                    }
                    abs_sum += model.sequence_gradient(noisy.inputs, seq.targets,
                                                       scale, grad);
                }
                const double penalty = model.apply_l2(train.l2_lambda, grad);
                const double step_loss = abs_sum * scale + penalty;
                if (!std::isfinite(step_loss)) {
                    throw FitError("recurrent training diverged at epoch " +
                                   std::to_string(epoch));
                }
                clip_gradient_norm(grad, config.grad_clip_norm);
                adam.step(model.parameters(), grad);
            }
        }
        model.training_trace.push_back(model.loss(sequences, train.l2_lambda));
    }
    return model;
}

} // namespace simbench
