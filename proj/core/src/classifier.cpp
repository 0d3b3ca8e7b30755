#include "qrf/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

namespace qrf {

namespace {

double logistic(double z) {
  // Split form avoids overflow for large |z|.
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double bce_loss(double score, int label) {
  const double eps = 1e-12;
  const double p = std::clamp(score, eps, 1.0 - eps);
  return label == 1 ? -std::log(p) : -std::log(1.0 - p);
}

struct ForwardTrace {
  std::vector<std::vector<double>> activations;  // activations[0] = input
  double score = 0.0;
};

ForwardTrace forward_trace(const MlpModel& m, const std::vector<double>& input) {
  ForwardTrace t;
  t.activations.reserve(m.n_layers() + 1);
  t.activations.push_back(input);
  for (std::size_t l = 0; l < m.n_layers(); ++l) {
    const int rows = m.layer_dims[l + 1];
    const int cols = m.layer_dims[l];
    const auto& prev = t.activations.back();
    std::vector<double> z(static_cast<std::size_t>(rows));
    for (int r = 0; r < rows; ++r) {
      double acc = m.biases[l][static_cast<std::size_t>(r)];
      const double* wrow = m.weights[l].data() + static_cast<std::size_t>(r) * cols;
      for (int c = 0; c < cols; ++c) acc += wrow[c] * prev[static_cast<std::size_t>(c)];
      z[static_cast<std::size_t>(r)] = acc;
    }
    const bool last = (l + 1 == m.n_layers());
    for (double& v : z) {
      if (last)
        v = logistic(v);
      else if (m.hidden_activation == Activation::kRectifier)
        v = std::max(0.0, v);
      else
        v = logistic(v);
    }
    t.activations.push_back(std::move(z));
  }
  t.score = t.activations.back()[0];
  return t;
}

struct Gradients {
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> biases;
};

Gradients zero_gradients(const MlpModel& m) {
  Gradients g;
  g.weights.resize(m.n_layers());
  g.biases.resize(m.n_layers());
  for (std::size_t l = 0; l < m.n_layers(); ++l) {
    g.weights[l].assign(m.weights[l].size(), 0.0);
    g.biases[l].assign(m.biases[l].size(), 0.0);
  }
  return g;
}

// Accumulates dBCE/dparams for one sample into g; returns the sample loss.
double backprop(const MlpModel& m, const LabeledSample& s, Gradients& g) {
  ForwardTrace t = forward_trace(m, s.input);
  // Logistic output + cross-entropy: delta at the output pre-activation.
  std::vector<double> delta{t.score - static_cast<double>(s.label)};

  for (std::size_t li = m.n_layers(); li-- > 0;) {
    const int rows = m.layer_dims[li + 1];
    const int cols = m.layer_dims[li];
    const auto& prev = t.activations[li];
    for (int r = 0; r < rows; ++r) {
      const double d = delta[static_cast<std::size_t>(r)];
      g.biases[li][static_cast<std::size_t>(r)] += d;
      double* grow = g.weights[li].data() + static_cast<std::size_t>(r) * cols;
      for (int c = 0; c < cols; ++c) grow[c] += d * prev[static_cast<std::size_t>(c)];
    }
    if (li == 0) break;
    std::vector<double> next_delta(static_cast<std::size_t>(cols), 0.0);
    for (int r = 0; r < rows; ++r) {
      const double d = delta[static_cast<std::size_t>(r)];
      const double* wrow = m.weights[li].data() + static_cast<std::size_t>(r) * cols;
      for (int c = 0; c < cols; ++c) next_delta[static_cast<std::size_t>(c)] += d * wrow[c];
    }
    // Through the hidden activation of layer li-1's output.
    for (int c = 0; c < cols; ++c) {
      const double a = prev[static_cast<std::size_t>(c)];
      if (m.hidden_activation == Activation::kRectifier) {
        if (a <= 0.0) next_delta[static_cast<std::size_t>(c)] = 0.0;
      } else {
        next_delta[static_cast<std::size_t>(c)] *= a * (1.0 - a);
      }
    }
    delta = std::move(next_delta);
  }
  return bce_loss(t.score, s.label);
}

}  // namespace

std::size_t MlpModel::parameter_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < n_layers(); ++l) n += weights[l].size() + biases[l].size();
  return n;
}

void MlpModel::validate() const {
  if (layer_dims.size() < 2) throw ValidationError("MlpModel: need at least input and output dims");
  if (layer_dims.back() != 1) throw ValidationError("MlpModel: output dim must be 1");
  if (weights.size() != layer_dims.size() - 1 || biases.size() != weights.size())
    throw ValidationError("MlpModel: layer count mismatch");
  for (std::size_t l = 0; l < weights.size(); ++l) {
    const std::size_t expect =
        static_cast<std::size_t>(layer_dims[l]) * static_cast<std::size_t>(layer_dims[l + 1]);
    if (weights[l].size() != expect)
      throw ValidationError("MlpModel: weight shape mismatch at layer " + std::to_string(l));
    if (biases[l].size() != static_cast<std::size_t>(layer_dims[l + 1]))
      throw ValidationError("MlpModel: bias shape mismatch at layer " + std::to_string(l));
  }
}

MlpModel init_model(const std::vector<int>& layer_dims, std::uint64_t seed) {
  if (layer_dims.size() < 2) throw ValidationError("init_model: need at least two dims");
  for (int d : layer_dims)
    if (d < 1) throw ValidationError("init_model: non-positive layer dim");
  if (layer_dims.back() != 1) throw ValidationError("init_model: output dim must be 1");

  MlpModel m;
  m.layer_dims = layer_dims;
  Rng rng(seed);
  for (std::size_t l = 0; l + 1 < layer_dims.size(); ++l) {
    const int rows = layer_dims[l + 1];
    const int cols = layer_dims[l];
    const double scale = 1.0 / std::sqrt(static_cast<double>(cols));
    std::vector<double> w(static_cast<std::size_t>(rows) * cols);
    for (double& v : w) v = scale * rng.gaussian();
    m.weights.push_back(std::move(w));
    m.biases.emplace_back(static_cast<std::size_t>(rows), 0.0);
  }
  return m;
}

double forward(const MlpModel& model, const std::vector<double>& input) {
  model.validate();
  if (static_cast<int>(input.size()) != model.layer_dims.front())
    throw ValidationError("forward: input length does not match first layer dim");
  return forward_trace(model, input).score;
}

std::vector<double> train(MlpModel& model, const std::vector<LabeledSample>& dataset,
                          const TrainConfig& cfg) {
  model.validate();
  if (dataset.empty()) throw ValidationError("train: empty dataset");
  if (cfg.learning_rate <= 0.0) throw ValidationError("train: learning_rate must be positive");
  if (cfg.epochs < 1) throw ValidationError("train: epochs must be >= 1");
  bool has0 = false, has1 = false;
  for (const auto& s : dataset) {
    if (s.label != 0 && s.label != 1) throw ValidationError("train: labels must be 0 or 1");
    if (static_cast<int>(s.input.size()) != model.layer_dims.front())
      throw ValidationError("train: sample length mismatch");
    (s.label == 0 ? has0 : has1) = true;
  }
  if (!has0 || !has1) throw ValidationError("train: dataset contains a single class");

  const int batch = std::max(1, cfg.batch_size);
  Rng rng(cfg.seed);

  // Adaptive-moment state, laid out like the gradients.
  Gradients m1 = zero_gradients(model), m2 = zero_gradients(model);
  const double beta1 = 0.9, beta2 = 0.999, adam_eps = 1e-8;
  long step = 0;

  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), 0);

  std::vector<double> history;
  history.reserve(static_cast<std::size_t>(cfg.epochs));
  double best_loss = std::numeric_limits<double>::infinity();
  int stall = 0;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    // Fisher-Yates from the named seed keeps runs bit-reproducible.
    for (std::size_t i = order.size(); i > 1; --i) {
      const std::size_t j = rng.uniform_int(i);
      std::swap(order[i - 1], order[j]);
    }
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(batch)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(batch));
      Gradients g = zero_gradients(model);
      for (std::size_t i = start; i < end; ++i)
        epoch_loss += backprop(model, dataset[order[i]], g);
      const double inv = 1.0 / static_cast<double>(end - start);
      ++step;
      for (std::size_t l = 0; l < model.n_layers(); ++l) {
        auto update = [&](std::vector<double>& params, std::vector<double>& grad,
                          std::vector<double>& mom1, std::vector<double>& mom2) {
          for (std::size_t k = 0; k < params.size(); ++k) {
            const double gk = grad[k] * inv;
            if (cfg.optimizer == Optimizer::kGradientDescent) {
              params[k] -= cfg.learning_rate * gk;
            } else {
              mom1[k] = beta1 * mom1[k] + (1.0 - beta1) * gk;
              mom2[k] = beta2 * mom2[k] + (1.0 - beta2) * gk * gk;
              const double mhat = mom1[k] / (1.0 - std::pow(beta1, static_cast<double>(step)));
              const double vhat = mom2[k] / (1.0 - std::pow(beta2, static_cast<double>(step)));
              params[k] -= cfg.learning_rate * mhat / (std::sqrt(vhat) + adam_eps);
            }
          }
        };
        update(model.weights[l], g.weights[l], m1.weights[l], m2.weights[l]);
        update(model.biases[l], g.biases[l], m1.biases[l], m2.biases[l]);
      }
    }
    epoch_loss /= static_cast<double>(dataset.size());
    history.push_back(epoch_loss);
    if (cfg.patience > 0) {
      if (epoch_loss < best_loss - 1e-12) {
        best_loss = epoch_loss;
        stall = 0;
      } else if (++stall >= cfg.patience) {
        break;
      }
    }
  }
  return history;
}

double gradient_check(const MlpModel& model, const LabeledSample& sample, double step) {
  model.validate();
  Gradients analytic = zero_gradients(model);
  backprop(model, sample, analytic);

  MlpModel probe = model;
  double max_rel = 0.0;
  auto check = [&](std::vector<double>& params, const std::vector<double>& grad) {
    for (std::size_t k = 0; k < params.size(); ++k) {
      const double saved = params[k];
      params[k] = saved + step;
      const double lp = bce_loss(forward_trace(probe, sample.input).score, sample.label);
      params[k] = saved - step;
      const double lm = bce_loss(forward_trace(probe, sample.input).score, sample.label);
      params[k] = saved;
      const double numeric = (lp - lm) / (2.0 * step);
      const double denom = std::max({std::abs(numeric), std::abs(grad[k]), 1e-8});
      max_rel = std::max(max_rel, std::abs(numeric - grad[k]) / denom);
    }
  };
  for (std::size_t l = 0; l < probe.n_layers(); ++l) {
    check(probe.weights[l], analytic.weights[l]);
    check(probe.biases[l], analytic.biases[l]);
  }
  return max_rel;
}

EvalReport evaluate(const MlpModel& model, const std::vector<LabeledSample>& testset) {
  model.validate();
  if (testset.empty()) throw ValidationError("evaluate: empty test set");
  EvalReport rep;
  rep.scores.reserve(testset.size());
  int correct = 0;
  for (const auto& s : testset) {
    if (s.label != 0 && s.label != 1) throw ValidationError("evaluate: labels must be 0 or 1");
    const double score = forward(model, s.input);
    rep.scores.push_back(score);
    const int pred = score >= 0.5 ? 1 : 0;
    rep.confusion[static_cast<std::size_t>(s.label)][static_cast<std::size_t>(pred)]++;
    if (pred == s.label) ++correct;
  }
  rep.accuracy = static_cast<double>(correct) / static_cast<double>(testset.size());
  return rep;
}

void save_model(const MlpModel& model, const std::string& path) {
  model.validate();
  std::ofstream out(path);
  if (!out) throw ValidationError("save_model: cannot open " + path);
  out << "qrf-mlp 1\n";
  out << "dims";
  for (int d : model.layer_dims) out << ' ' << d;
  out << "\nhidden " << (model.hidden_activation == Activation::kRectifier ? "rectifier" : "logistic")
      << "\noutput logistic\n";
  char buf[64];
  auto emit = [&](const std::vector<double>& v) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", v[i]);
      out << buf << ((i + 1) % 8 == 0 || i + 1 == v.size() ? '\n' : ' ');
    }
  };
  for (std::size_t l = 0; l < model.n_layers(); ++l) {
    out << "weights " << l << ' ' << model.weights[l].size() << '\n';
    emit(model.weights[l]);
    out << "biases " << l << ' ' << model.biases[l].size() << '\n';
    emit(model.biases[l]);
  }
  if (!out) throw ValidationError("save_model: write failure on " + path);
}

MlpModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("load_model: cannot open " + path);
  std::string magic;
  int version = 0;
  in >> magic >> version;
  if (magic != "qrf-mlp" || version != 1)
    throw ValidationError("load_model: not a qrf-mlp v1 file: " + path);

  MlpModel m;
  std::string key;
  in >> key;
  if (key != "dims") throw ValidationError("load_model: expected dims");
  std::string line;
  std::getline(in, line);
  std::istringstream dims(line);
  int d;
  while (dims >> d) m.layer_dims.push_back(d);

  std::string act;
  in >> key >> act;
  if (key != "hidden") throw ValidationError("load_model: expected hidden activation");
  m.hidden_activation = act == "rectifier" ? Activation::kRectifier : Activation::kLogistic;
  in >> key >> act;  // output logistic

  m.weights.resize(m.layer_dims.size() - 1);
  m.biases.resize(m.layer_dims.size() - 1);
  while (in >> key) {
    std::size_t l = 0, count = 0;
    in >> l >> count;
    if (l >= m.weights.size()) throw ValidationError("load_model: layer index out of range");
    std::vector<double> vals(count);
    for (auto& v : vals)
      if (!(in >> v)) throw ValidationError("load_model: truncated value block");
    if (key == "weights")
      m.weights[l] = std::move(vals);
    else if (key == "biases")
      m.biases[l] = std::move(vals);
    else
      throw ValidationError("load_model: unknown block '" + key + "'");
  }
  m.validate();
  return m;
}

}  // namespace qrf
