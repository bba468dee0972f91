// Loss surrogates and training loop for the color reference game. Minimizing
// total_loss maximizes the weighted objective
//   lambda_U * U - lambda_I * E[d(X, X_hat)] - lambda_C * I(X, C)
// with cross-entropy standing in for utility, MSE for distortion, and a KL
// term bounding the mutual information from above. lambda_C follows a linear
// annealing schedule across epochs.
#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ibsignal/agents.hpp"
#include "ibsignal/wcs.hpp"

namespace ibsignal {

struct TradeoffWeights {
    double lambda_u = 1.0;
    double lambda_i = 1.0;
    double lambda_c = 0.0;

    void validate() const;  // all >= 0, not all zero
};

// Linear ramp for lambda_C, clamped to [initial, final] outside the span.
struct AnnealSchedule {
    double initial = 0.0;
    double final = 3.0;
    int start_epoch = 100;
    int end_epoch = 500;

    double at(int epoch) const;
    void validate() const;  // final >= initial, end >= start >= 1
};

struct TrainConfig {
    AgentConfig agents;
    double lambda_u = 1.0;
    double lambda_i = 1.0;
    AnnealSchedule anneal;
    int epochs = 500;
    int batches_per_epoch = 50;
    int batch_size = 128;
    double learning_rate = 3e-4;
    std::uint64_t seed = 1;
    int eval_samples = 1000;   // Monte-Carlo draws per chip for q(c|x)
    int checkpoint_every = 25;

    void validate() const;
};

// Key-value text config, one `key = value` per line, '#' comments. Unknown
// keys are parse errors; missing keys keep their defaults.
TrainConfig load_train_config(const std::string& path);
void save_train_config(const std::string& path, const TrainConfig& config);

struct EpochRecord {
    int epoch = 0;
    double lambda_u = 0.0;
    double lambda_i = 0.0;
    double lambda_c = 0.0;
    double utility_acc = 0.0;      // mean listener accuracy over the epoch's batches
    double mse = 0.0;              // mean reconstruction MSE over the epoch's batches
    double kl_nats = 0.0;          // mean complexity_loss over all chips, end of epoch
    double complexity_bits = 0.0;  // plug-in I(X;C) over all chips, end of epoch
};

// ---- Loss surrogates (plain forms; the tape mirrors them bit for bit) ----

// Cross-entropy -log(max(p(target), 1e-12)).
double utility_loss(const Tensor& listener_probs, int target_position);
// Mean squared error over dimensions.
double informativeness_loss(const Tensor& x, const Tensor& x_hat);
// VQ-VIB: KL[N(mu, diag sigma^2) || N(0, I)] in nats. One-hot:
// KL[softmax(logits) || uniform], probabilities floored at 1e-12.
double complexity_loss(const CommOutcome& outcome, SpeakerKind kind);
// lambda_u * utility + lambda_i * informativeness + lambda_c * complexity + vq_aux.
double total_loss(const TradeoffWeights& weights, double utility, double informativeness,
                  double complexity, double vq_aux);

NodeId taped_utility_loss(Tape& tape, NodeId listener_probs, int target_position);
NodeId taped_informativeness_loss(Tape& tape, NodeId x, NodeId x_hat);
NodeId taped_complexity_loss(Tape& tape, const TapedCommOutcome& outcome, SpeakerKind kind);

// ---- Training loop ----

struct TrainResult {
    Agents agents;
    std::vector<EpochRecord> records;
};

// Called after each epoch with the record, the current agents and the
// Monte-Carlo naming system the record's complexity was estimated from.
using EpochCallback =
    std::function<void(const EpochRecord&, const Agents&, const NamingSystem&)>;

// Runs the reference game for config.epochs epochs of batches_per_epoch
// batches, updating all parameters with Adam. Deterministic given the config
// seed. Throws TrainingDiverged with epoch/batch/component diagnostics when a
// batch loss turns non-finite.
TrainResult train(const TrainConfig& config, const ChipTable& chips,
                  const EpochCallback& callback = {});

// CSV with header epoch,lambda_u,lambda_i,lambda_c,utility_acc,mse,kl_nats,complexity_bits.
void save_epochs_csv(const std::string& path, const std::vector<EpochRecord>& records);
std::vector<EpochRecord> load_epochs_csv(const std::string& path);

}  // namespace ibsignal
