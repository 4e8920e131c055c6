#include "rffp/nn.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <string>

#include "rffp/errors.hpp"
#include "rffp/rng.hpp"

namespace rffp {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

struct Workspace {
    std::vector<double> x;            // scaled input, 2 x W
    std::vector<double> z1, a1;       // conv1 pre/post squaring, 8 x L1
    std::vector<double> z2, a2;       // conv2 pre/post ReLU, 16 x L2
    std::vector<double> pooled;       // 16
    std::vector<double> scores;       // C
    std::vector<double> dz1, da1, dz2;

    explicit Workspace(const CnnModel& m) {
        const int l1 = m.conv1_out_len(), l2 = m.conv2_out_len();
        x.resize(2 * m.input_width);
        z1.resize(CnnModel::kC1Out * l1);
        a1.resize(CnnModel::kC1Out * l1);
        z2.resize(CnnModel::kC2Out * l2);
        a2.resize(CnnModel::kC2Out * l2);
        pooled.resize(CnnModel::kC2Out);
        scores.resize(m.num_classes);
        dz1.resize(z1.size());
        da1.resize(a1.size());
        dz2.resize(z2.size());
    }
};

void forward_one(const CnnModel& m, const float* tensor, double input_scale, Workspace& ws) {
    const int W = m.input_width;
    const int l1 = m.conv1_out_len(), l2 = m.conv2_out_len();
    const double inv = 1.0 / input_scale;
    for (int i = 0; i < 2 * W; ++i) ws.x[i] = tensor[i] * inv;

    for (int c = 0; c < CnnModel::kC1Out; ++c) {
        for (int p = 0; p < l1; ++p) {
            const int off = p * CnnModel::kC1Stride;
            double acc = m.b1[c];
            for (int i = 0; i < CnnModel::kC1In; ++i) {
                const double* w = &m.w1[(c * CnnModel::kC1In + i) * CnnModel::kC1Kernel];
                const double* xi = &ws.x[i * W + off];
                for (int k = 0; k < CnnModel::kC1Kernel; ++k) acc += w[k] * xi[k];
            }
            ws.z1[c * l1 + p] = acc;
            ws.a1[c * l1 + p] = acc * acc;
        }
    }

    for (int d = 0; d < CnnModel::kC2Out; ++d) {
        for (int q = 0; q < l2; ++q) {
            const int off = q * CnnModel::kC2Stride;
            double acc = m.b2[d];
            for (int c = 0; c < CnnModel::kC2In; ++c) {
                const double* w = &m.w2[(d * CnnModel::kC2In + c) * CnnModel::kC2Kernel];
                const double* ac = &ws.a1[c * l1 + off];
                for (int k = 0; k < CnnModel::kC2Kernel; ++k) acc += w[k] * ac[k];
            }
            ws.z2[d * l2 + q] = acc;
            ws.a2[d * l2 + q] = acc > 0.0 ? acc : 0.0;
        }
    }

    for (int d = 0; d < CnnModel::kC2Out; ++d) {
        double acc = 0.0;
        for (int q = 0; q < l2; ++q) acc += ws.a2[d * l2 + q];
        ws.pooled[d] = acc / l2;
    }

    for (int j = 0; j < m.num_classes; ++j) {
        double acc = m.hb[j];
        const double* w = &m.hw[j * CnnModel::kC2Out];
        for (int d = 0; d < CnnModel::kC2Out; ++d) acc += w[d] * ws.pooled[d];
        ws.scores[j] = acc;
    }
}

// Accumulates d(mean loss)/d(params) for one example; dscores already carries
// the softmax-minus-onehot term scaled by 1/batch.
void backward_one(const CnnModel& m, const Workspace& ws, const std::vector<double>& dscores,
                  double* gw1, double* gb1, double* gw2, double* gb2, double* ghw,
                  double* ghb, Workspace& scratch) {
    const int W = m.input_width;
    const int l1 = m.conv1_out_len(), l2 = m.conv2_out_len();

    std::vector<double> dpooled(CnnModel::kC2Out, 0.0);
    for (int j = 0; j < m.num_classes; ++j) {
        ghb[j] += dscores[j];
        for (int d = 0; d < CnnModel::kC2Out; ++d) {
            ghw[j * CnnModel::kC2Out + d] += dscores[j] * ws.pooled[d];
            dpooled[d] += dscores[j] * m.hw[j * CnnModel::kC2Out + d];
        }
    }

    for (int d = 0; d < CnnModel::kC2Out; ++d) {
        const double da = dpooled[d] / l2;
        for (int q = 0; q < l2; ++q)
            scratch.dz2[d * l2 + q] = ws.z2[d * l2 + q] > 0.0 ? da : 0.0;
    }

    std::fill(scratch.da1.begin(), scratch.da1.end(), 0.0);
    for (int d = 0; d < CnnModel::kC2Out; ++d) {
        for (int q = 0; q < l2; ++q) {
            const double g = scratch.dz2[d * l2 + q];
            if (g == 0.0) continue;
            const int off = q * CnnModel::kC2Stride;
            gb2[d] += g;
            for (int c = 0; c < CnnModel::kC2In; ++c) {
                double* gw = &gw2[(d * CnnModel::kC2In + c) * CnnModel::kC2Kernel];
                const double* ac = &ws.a1[c * l1 + off];
                const double* w = &m.w2[(d * CnnModel::kC2In + c) * CnnModel::kC2Kernel];
                double* da = &scratch.da1[c * l1 + off];
                for (int k = 0; k < CnnModel::kC2Kernel; ++k) {
                    gw[k] += g * ac[k];
                    da[k] += g * w[k];
                }
            }
        }
    }

    for (int c = 0; c < CnnModel::kC1Out; ++c)
        for (int p = 0; p < l1; ++p)
            scratch.dz1[c * l1 + p] = scratch.da1[c * l1 + p] * 2.0 * ws.z1[c * l1 + p];

    for (int c = 0; c < CnnModel::kC1Out; ++c) {
        for (int p = 0; p < l1; ++p) {
            const double g = scratch.dz1[c * l1 + p];
            if (g == 0.0) continue;
            const int off = p * CnnModel::kC1Stride;
            gb1[c] += g;
            for (int i = 0; i < CnnModel::kC1In; ++i) {
                double* gw = &gw1[(c * CnnModel::kC1In + i) * CnnModel::kC1Kernel];
                const double* xi = &ws.x[i * W + off];
                for (int k = 0; k < CnnModel::kC1Kernel; ++k) gw[k] += g * xi[k];
            }
        }
    }
}

}  // namespace

void calibrate_cnn(CnnModel& m, const std::vector<const float*>& probe, double input_scale) {
    if (probe.empty()) throw DomainError("calibration probe must be nonempty");
    Workspace ws(m);
    double acc1 = 0.0;
    std::size_t n1 = 0;
    for (const float* x : probe) {
        forward_one(m, x, input_scale, ws);
        for (double v : ws.a1) acc1 += v * v;
        n1 += ws.a1.size();
    }
    const double r1 = std::pow(acc1 / static_cast<double>(n1), 0.25);
    if (r1 > 0.0 && std::isfinite(r1)) {
        for (double& w : m.w1) w /= r1;
        for (double& b : m.b1) b /= r1;
    }

    double acc2 = 0.0;
    std::size_t n2 = 0;
    for (const float* x : probe) {
        forward_one(m, x, input_scale, ws);
        for (double v : ws.a2) acc2 += v * v;
        n2 += ws.a2.size();
    }
    const double r2 = std::sqrt(acc2 / static_cast<double>(n2));
    if (r2 > 0.0 && std::isfinite(r2)) {
        for (double& w : m.w2) w /= r2;
        for (double& b : m.b2) b /= r2;
    }
}

CnnModel make_cnn(int num_classes, int input_width, std::uint64_t seed) {
    if (num_classes < 2) throw ConfigError("model needs at least 2 classes");
    CnnModel m;
    m.num_classes = num_classes;
    m.input_width = input_width;
    if (m.conv1_out_len() < CnnModel::kC2Kernel)
        throw ConfigError("input width " + std::to_string(input_width) +
                          " too small for the convolution stack");

    m.w1.assign(CnnModel::kC1Out * CnnModel::kC1In * CnnModel::kC1Kernel, 0.0);
    m.b1.assign(CnnModel::kC1Out, 0.0);
    const double r2 = 1.0 / std::sqrt(2.0);
    auto w1at = [&m](int c, int i, int k) -> double& {
        return m.w1[(c * CnnModel::kC1In + i) * CnnModel::kC1Kernel + k];
    };
    // Four quadrature atoms (I, Q, I+Q, I-Q) at tap offset 0, repeated at
    // offset 8, each spread over four taps.
    for (int base = 0; base < 2; ++base) {
        const int c0 = base * 4;
        const int t0 = base * 8;
        for (int tap = t0; tap < t0 + 4; ++tap) {
            w1at(c0 + 0, 0, tap) = 0.5;
            w1at(c0 + 1, 1, tap) = 0.5;
            w1at(c0 + 2, 0, tap) = 0.5 * r2;
            w1at(c0 + 2, 1, tap) = 0.5 * r2;
            w1at(c0 + 3, 0, tap) = 0.5 * r2;
            w1at(c0 + 3, 1, tap) = -0.5 * r2;
        }
    }

    Rng rng(mix_seed(seed, 0xC9Aull));
    const int fan2 = CnnModel::kC2In * CnnModel::kC2Kernel;
    const double b2lim = 1.0 / std::sqrt(static_cast<double>(fan2));
    m.w2.resize(CnnModel::kC2Out * fan2);
    for (double& w : m.w2) w = rng.uniform(-b2lim, b2lim);
    m.b2.resize(CnnModel::kC2Out);
    for (double& b : m.b2) b = rng.uniform(-b2lim, b2lim);

    const double hlim = 1.0 / std::sqrt(static_cast<double>(CnnModel::kC2Out));
    m.hw.resize(num_classes * CnnModel::kC2Out);
    for (double& w : m.hw) w = rng.uniform(-hlim, hlim);
    m.hb.resize(num_classes);
    for (double& b : m.hb) b = rng.uniform(-hlim, hlim);
    return m;
}

std::vector<double> cnn_forward(const CnnModel& model, const float* tensor,
                                double input_scale) {
    if (input_scale <= 0.0) throw DomainError("input_scale must be positive");
    Workspace ws(model);
    forward_one(model, tensor, input_scale, ws);
    return ws.scores;
}

std::vector<double> softmax(const std::vector<double>& scores) {
    const double m = *std::max_element(scores.begin(), scores.end());
    std::vector<double> out(scores.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        out[i] = std::exp(scores[i] - m);
        sum += out[i];
    }
    for (double& v : out) v /= sum;
    return out;
}

std::size_t cnn_param_count(const CnnModel& m) {
    return m.w1.size() + m.b1.size() + m.w2.size() + m.b2.size() + m.hw.size() + m.hb.size();
}

std::vector<double> cnn_get_params(const CnnModel& m) {
    std::vector<double> p;
    p.reserve(cnn_param_count(m));
    for (const auto* v : {&m.w1, &m.b1, &m.w2, &m.b2, &m.hw, &m.hb})
        p.insert(p.end(), v->begin(), v->end());
    return p;
}

void cnn_set_params(CnnModel& m, const std::vector<double>& params) {
    if (params.size() != cnn_param_count(m)) throw DomainError("parameter vector size mismatch");
    std::size_t off = 0;
    for (auto* v : {&m.w1, &m.b1, &m.w2, &m.b2, &m.hw, &m.hb}) {
        std::copy(params.begin() + static_cast<long>(off),
                  params.begin() + static_cast<long>(off + v->size()), v->begin());
        off += v->size();
    }
}

double cnn_loss_grad(const CnnModel& model, const std::vector<const float*>& inputs,
                     const std::vector<int>& labels, double input_scale,
                     std::vector<double>& grad) {
    if (inputs.empty() || inputs.size() != labels.size())
        throw DomainError("batch inputs and labels must be nonempty and aligned");
    grad.assign(cnn_param_count(model), 0.0);

    const std::size_t nw1 = model.w1.size(), nb1 = model.b1.size();
    const std::size_t nw2 = model.w2.size(), nb2 = model.b2.size();
    const std::size_t nhw = model.hw.size();
    double* gw1 = grad.data();
    double* gb1 = gw1 + nw1;
    double* gw2 = gb1 + nb1;
    double* gb2 = gw2 + nw2;
    double* ghw = gb2 + nb2;
    double* ghb = ghw + nhw;

    Workspace ws(model);
    Workspace scratch(model);
    const double invb = 1.0 / static_cast<double>(inputs.size());
    double loss = 0.0;
    std::vector<double> dscores(model.num_classes);
    for (std::size_t e = 0; e < inputs.size(); ++e) {
        const int y = labels[e];
        if (y < 0 || y >= model.num_classes)
            throw DataError("label " + std::to_string(y) + " outside [0, " +
                            std::to_string(model.num_classes) + ")");
        forward_one(model, inputs[e], input_scale, ws);
        const std::vector<double> probs = softmax(ws.scores);
        loss += -std::log(std::max(probs[y], 1e-300)) * invb;
        for (int j = 0; j < model.num_classes; ++j)
            dscores[j] = (probs[j] - (j == y ? 1.0 : 0.0)) * invb;
        backward_one(model, ws, dscores, gw1, gb1, gw2, gb2, ghw, ghb, scratch);
    }
    return loss;
}

TrainResult train_cnn(CnnModel& model, const std::vector<const float*>& inputs,
                      const std::vector<int>& labels, double input_scale,
                      const TrainHyper& hyper) {
    if (inputs.empty() || inputs.size() != labels.size())
        throw DomainError("training inputs and labels must be nonempty and aligned");
    if (hyper.epochs < 0 || hyper.batch < 1) throw ConfigError("bad training hyperparameters");

    const std::size_t n = inputs.size();
    std::vector<double> velocity(cnn_param_count(model), 0.0);
    std::vector<double> grad;
    Rng shuffle_rng(mix_seed(hyper.seed, 0x54AFull));
    std::vector<std::size_t> order(n);

    TrainResult result;
    for (int ep = 0; ep < hyper.epochs; ++ep) {
        double factor;
        if (ep < hyper.warmup_epochs) {
            factor = static_cast<double>(ep + 1) / hyper.warmup_epochs;
        } else {
            const int span = std::max(1, hyper.epochs - hyper.warmup_epochs);
            factor = 0.5 * (1.0 + std::cos(kPi * (ep - hyper.warmup_epochs) / span));
        }
        const double lr = hyper.learning_rate * factor;

        std::iota(order.begin(), order.end(), 0);
        shuffle_rng.shuffle(order);

        double epoch_loss = 0.0;
        std::size_t batches = 0;
        for (std::size_t i = 0; i < n; i += hyper.batch) {
            const std::size_t hi = std::min(n, i + hyper.batch);
            std::vector<const float*> bx;
            std::vector<int> by;
            bx.reserve(hi - i);
            by.reserve(hi - i);
            for (std::size_t j = i; j < hi; ++j) {
                bx.push_back(inputs[order[j]]);
                by.push_back(labels[order[j]]);
            }
            const double loss = cnn_loss_grad(model, bx, by, input_scale, grad);
            if (!std::isfinite(loss))
                throw TrainingError("loss diverged at epoch " + std::to_string(ep) +
                                    ", batch " + std::to_string(batches) +
                                    " (lr=" + std::to_string(lr) + ")");
            epoch_loss += loss;
            ++batches;

            double sq = 0.0;
            for (double g : grad) sq += g * g;
            const double total_norm = std::sqrt(sq);
            if (total_norm > hyper.clip_norm) {
                const double coef = hyper.clip_norm / (total_norm + 1e-6);
                for (double& g : grad) g *= coef;
            }

            std::vector<double> params = cnn_get_params(model);
            for (std::size_t p = 0; p < params.size(); ++p) {
                velocity[p] = hyper.momentum * velocity[p] + grad[p];
                params[p] -= lr * velocity[p];
            }
            cnn_set_params(model, params);
        }
        result.epoch_losses.push_back(batches ? epoch_loss / batches : 0.0);
    }

    std::size_t correct = 0;
    Workspace ws(model);
    for (std::size_t e = 0; e < n; ++e) {
        forward_one(model, inputs[e], input_scale, ws);
        int best = 0;
        for (int j = 1; j < model.num_classes; ++j)
            if (ws.scores[j] > ws.scores[best]) best = j;
        if (best == labels[e]) ++correct;
    }
    result.final_train_accuracy = static_cast<double>(correct) / n;
    return result;
}

}
