#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "qrf/common.hpp"

namespace qrf {

enum class Activation { kRectifier, kLogistic };
enum class Optimizer { kGradientDescent, kAdaptiveMoment };

// Fully-connected feed-forward binary classifier. Weights are stored
// row-major: weights[l] has shape (dims[l+1], dims[l]).
struct MlpModel {
  std::vector<int> layer_dims;                 // e.g. {256, 128, 64, 32, 16, 8, 1}
  std::vector<std::vector<double>> weights;    // per layer, row-major
  std::vector<std::vector<double>> biases;     // per layer
  Activation hidden_activation = Activation::kRectifier;

  std::size_t n_layers() const { return weights.size(); }
  std::size_t parameter_count() const;
  void validate() const;
};

struct TrainConfig {
  double learning_rate = 1e-3;
  int epochs = 150;
  int batch_size = 8;
  std::uint64_t seed = 0;
  Optimizer optimizer = Optimizer::kAdaptiveMoment;
  int patience = 0;  // 0 = no early stopping; otherwise stop after this many
                     // epochs without training-loss improvement
};

struct LabeledSample {
  std::vector<double> input;
  int label = 0;  // 0 = SPD1, 1 = SPD2
};

struct EvalReport {
  double accuracy = 0.0;
  std::array<std::array<int, 2>, 2> confusion{};  // [truth][prediction]
  std::vector<double> scores;

  int total() const {
    return confusion[0][0] + confusion[0][1] + confusion[1][0] + confusion[1][1];
  }
};

// Deterministic initialization: weights ~ N(0, 1/fan_in), biases zero.
MlpModel init_model(const std::vector<int>& layer_dims, std::uint64_t seed);

// Single forward pass; logistic output in (0, 1).
double forward(const MlpModel& model, const std::vector<double>& input);

// Minimizes binary cross-entropy by backpropagation. Deterministic given
// cfg.seed. Returns per-epoch mean training loss.
std::vector<double> train(MlpModel& model, const std::vector<LabeledSample>& dataset,
                          const TrainConfig& cfg);

// Analytic gradients vs central finite differences over every parameter;
// returns the max relative error.
double gradient_check(const MlpModel& model, const LabeledSample& sample, double step = 1e-5);

// Threshold 0.5 on the logistic score.
EvalReport evaluate(const MlpModel& model, const std::vector<LabeledSample>& testset);

// Structured-text model file; round-trip exact (17 significant digits).
void save_model(const MlpModel& model, const std::string& path);
MlpModel load_model(const std::string& path);

}  // namespace qrf
