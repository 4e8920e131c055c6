#pragma once
// Compact 1-D CNN trained from scratch: conv(2->8, k16, s4) with a squaring
// nonlinearity, conv(8->16, k8, s4) with ReLU, global average pooling, and an
// affine head. The squaring stage mirrors the squaring CFO estimator: it
// folds the +/-1 chip modulation away so later layers see envelope structure.

#include <cstdint>
#include <vector>

namespace rffp {

struct CnnModel {
    static constexpr int kC1In = 2, kC1Out = 8, kC1Kernel = 16, kC1Stride = 4;
    static constexpr int kC2In = 8, kC2Out = 16, kC2Kernel = 8, kC2Stride = 4;

    int num_classes = 0;
    int input_width = 0;
    std::vector<double> w1, b1;  // conv1: [out][in][tap], flat
    std::vector<double> w2, b2;  // conv2: [out][in][tap], flat
    std::vector<double> hw, hb;  // head: [class][feature], flat

    int conv1_out_len() const { return (input_width - kC1Kernel) / kC1Stride + 1; }
    int conv2_out_len() const { return (conv1_out_len() - kC2Kernel) / kC2Stride + 1; }
};

struct TrainHyper {
    int epochs = 30;
    int batch = 16;
    double learning_rate = 0.1;
    double momentum = 0.9;
    int warmup_epochs = 3;  // linear ramp, then cosine decay
    double clip_norm = 1.0; // global gradient-norm ceiling
    std::uint64_t seed = 0;
};

struct TrainResult {
    std::vector<double> epoch_losses;
    double final_train_accuracy = 0.0;
};

// Conv1 starts as quadrature delta atoms (I, Q, and their sum/difference
// taps at two offsets) so the squaring stage begins on-axis; conv2 and the
// head draw from uniform(+/- 1/sqrt(fan_in)).
CnnModel make_cnn(int num_classes, int input_width, std::uint64_t seed);

// Raw class scores for one example (tensor laid out as in LabeledExample,
// values divided by input_scale).
std::vector<double> cnn_forward(const CnnModel& model, const float* tensor,
                                double input_scale);

std::vector<double> softmax(const std::vector<double>& scores);

// Mean cross-entropy over the batch plus its gradient in parameter order
// (w1, b1, w2, b2, hw, hb); the analytic side of the finite-difference check.
double cnn_loss_grad(const CnnModel& model, const std::vector<const float*>& inputs,
                     const std::vector<int>& labels, double input_scale,
                     std::vector<double>& grad);

std::size_t cnn_param_count(const CnnModel& model);
std::vector<double> cnn_get_params(const CnnModel& model);
void cnn_set_params(CnnModel& model, const std::vector<double>& params);

// Data-dependent rescale on a probe batch (typically the first 64 training
// examples): conv1 so the squared activations have unit mean square, then
// conv2 so the rectified activations do. Call once between make_cnn and
// train_cnn; the squaring stage otherwise starts the optimizer on a plateau.
void calibrate_cnn(CnnModel& model, const std::vector<const float*>& probe,
                   double input_scale);

// Mini-batch SGD with momentum: a linear learning-rate warmup into cosine
// decay and a global gradient-norm clip. Zero learning rate leaves the model
// untouched. Throws TrainingError when the loss leaves the finite range.
TrainResult train_cnn(CnnModel& model, const std::vector<const float*>& inputs,
                      const std::vector<int>& labels, double input_scale,
                      const TrainHyper& hyper);

}
