#include "ibsignal/training.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

#include "ibsignal/adam.hpp"
#include "ibsignal/csvio.hpp"
#include "ibsignal/errors.hpp"
#include "ibsignal/metrics.hpp"

namespace ibsignal {

namespace {

constexpr double kProbFloor = 1e-12;

Tensor softmax_values(const Tensor& x) {
    Tensor y = x;
    double mx = y.data[0];
    for (double v : y.data) mx = std::max(mx, v);
    double total = 0.0;
    for (double& v : y.data) {
        v = std::exp(v - mx);
        total += v;
    }
    for (double& v : y.data) v /= total;
    return y;
}

double gaussian_unit_kl(const GaussianParams& params) {
    if (params.mu.size() != params.log_var.size())
        throw std::invalid_argument("complexity_loss: mu/log_var size mismatch");
    double acc = 0.0;
    for (int d = 0; d < params.mu.size(); ++d) {
        const double mu = params.mu.data[static_cast<size_t>(d)];
        const double lv = params.log_var.data[static_cast<size_t>(d)];
        double term = mu * mu + std::exp(lv);
        term = term - lv;
        term = term - 1.0;
        acc += term;
    }
    return acc * 0.5;
}

double softmax_uniform_kl(const Tensor& logits) {
    const Tensor p = softmax_values(logits);
    double acc = 0.0;
    for (double v : p.data) {
        const double q = std::max(v, kProbFloor);
        acc += q * std::log(q);
    }
    return acc + std::log(static_cast<double>(p.size()));
}

std::string short_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

void collect_mlp_nodes(const TapedMlp& mlp, std::vector<NodeId>& out) {
    for (size_t l = 0; l < mlp.weights.size(); ++l) {
        out.push_back(mlp.weights[l]);
        out.push_back(mlp.biases[l]);
    }
}

// Must mirror Agents::collect_params so gradients line up with parameters.
std::vector<NodeId> collect_param_nodes(const TapedAgents& taped, SpeakerKind kind) {
    std::vector<NodeId> out;
    collect_mlp_nodes(taped.speaker.encoder, out);
    if (kind == SpeakerKind::VqVib) out.push_back(taped.speaker.codebook);
    collect_mlp_nodes(taped.listener, out);
    collect_mlp_nodes(taped.decoder, out);
    return out;
}

NodeId accumulate(Tape& tape, NodeId acc, NodeId term) {
    return acc < 0 ? term : tape.add(acc, term);
}

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t");
    size_t b = s.find_last_not_of(" \t");
    if (a == std::string::npos) return "";
    return s.substr(a, b - a + 1);
}

std::vector<int> parse_hidden(const std::string& value, const std::string& path, long line) {
    std::vector<int> widths;
    for (const std::string& field : split_fields(value, ','))
        widths.push_back(static_cast<int>(parse_long(trim(field), path, line)));
    return widths;
}

}  // namespace

void TradeoffWeights::validate() const {
    if (lambda_u < 0 || lambda_i < 0 || lambda_c < 0)
        throw std::invalid_argument("tradeoff weights must be non-negative");
    if (lambda_u == 0 && lambda_i == 0 && lambda_c == 0)
        throw std::invalid_argument("tradeoff weights must not all be zero");
}

double AnnealSchedule::at(int epoch) const {
    if (epoch <= start_epoch) return initial;
    if (epoch >= end_epoch) return final;
    const double t = static_cast<double>(epoch - start_epoch) /
                     static_cast<double>(end_epoch - start_epoch);
    return initial + t * (final - initial);
}

void AnnealSchedule::validate() const {
    if (initial < 0 || final < initial)
        throw std::invalid_argument("anneal schedule must be non-decreasing and non-negative");
    if (start_epoch < 1 || end_epoch < start_epoch)
        throw std::invalid_argument("anneal schedule epochs must satisfy 1 <= start <= end");
}

void TrainConfig::validate() const {
    anneal.validate();
    TradeoffWeights{lambda_u, lambda_i, std::max(anneal.initial, anneal.final)}.validate();
    if (epochs < 1 || batches_per_epoch < 1 || batch_size < 1)
        throw std::invalid_argument("epochs, batches and batch size must be positive");
    if (learning_rate <= 0) throw std::invalid_argument("learning rate must be positive");
    if (eval_samples < 1) throw std::invalid_argument("eval_samples must be positive");
    if (checkpoint_every < 1) throw std::invalid_argument("checkpoint_every must be positive");
    if (agents.comm_dim < 1 || agents.codebook_size < 2)
        throw std::invalid_argument("agents need comm_dim >= 1 and at least 2 signals");
}

TrainConfig load_train_config(const std::string& path) {
    TrainConfig config;
    const std::string text = read_text_file(path);
    long line = 0;
    size_t pos = 0;
    while (pos <= text.size()) {
        size_t end = text.find('\n', pos);
        if (end == std::string::npos) end = text.size();
        std::string raw = text.substr(pos, end - pos);
        pos = end + 1;
        ++line;
        if (!raw.empty() && raw.back() == '\r') raw.pop_back();
        const std::string stripped = trim(raw);
        if (stripped.empty() || stripped[0] == '#') {
            if (pos > text.size()) break;
            continue;
        }
        const size_t eq = stripped.find('=');
        if (eq == std::string::npos) throw ParseError(path, line, "expected key = value");
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        if (key.empty() || value.empty()) throw ParseError(path, line, "expected key = value");

        if (key == "speaker") {
            try {
                config.agents.kind = parse_speaker_kind(value);
            } catch (const std::invalid_argument& e) {
                throw ParseError(path, line, e.what());
            }
        } else if (key == "comm_dim") {
            config.agents.comm_dim = static_cast<int>(parse_long(value, path, line));
        } else if (key == "codebook_size") {
            config.agents.codebook_size = static_cast<int>(parse_long(value, path, line));
        } else if (key == "hidden") {
            config.agents.hidden = parse_hidden(value, path, line);
        } else if (key == "lambda_u") {
            config.lambda_u = parse_double(value, path, line);
        } else if (key == "lambda_i") {
            config.lambda_i = parse_double(value, path, line);
        } else if (key == "lambda_c_initial") {
            config.anneal.initial = parse_double(value, path, line);
        } else if (key == "lambda_c_final") {
            config.anneal.final = parse_double(value, path, line);
        } else if (key == "anneal_start") {
            config.anneal.start_epoch = static_cast<int>(parse_long(value, path, line));
        } else if (key == "anneal_end") {
            config.anneal.end_epoch = static_cast<int>(parse_long(value, path, line));
        } else if (key == "epochs") {
            config.epochs = static_cast<int>(parse_long(value, path, line));
        } else if (key == "batches_per_epoch") {
            config.batches_per_epoch = static_cast<int>(parse_long(value, path, line));
        } else if (key == "batch_size") {
            config.batch_size = static_cast<int>(parse_long(value, path, line));
        } else if (key == "learning_rate") {
            config.learning_rate = parse_double(value, path, line);
        } else if (key == "seed") {
            config.seed = static_cast<std::uint64_t>(parse_long(value, path, line));
        } else if (key == "eval_samples") {
            config.eval_samples = static_cast<int>(parse_long(value, path, line));
        } else if (key == "checkpoint_every") {
            config.checkpoint_every = static_cast<int>(parse_long(value, path, line));
        } else {
            throw ParseError(path, line, "unknown config key '" + key + "'");
        }
        if (pos > text.size()) break;
    }
    return config;
}

void save_train_config(const std::string& path, const TrainConfig& config) {
    std::string out;
    out += "speaker = " + speaker_kind_name(config.agents.kind) + "\n";
    out += "comm_dim = " + std::to_string(config.agents.comm_dim) + "\n";
    out += "codebook_size = " + std::to_string(config.agents.codebook_size) + "\n";
    out += "hidden = ";
    for (size_t i = 0; i < config.agents.hidden.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(config.agents.hidden[i]);
    }
    out += "\n";
    out += "lambda_u = " + format_double(config.lambda_u) + "\n";
    out += "lambda_i = " + format_double(config.lambda_i) + "\n";
    out += "lambda_c_initial = " + format_double(config.anneal.initial) + "\n";
    out += "lambda_c_final = " + format_double(config.anneal.final) + "\n";
    out += "anneal_start = " + std::to_string(config.anneal.start_epoch) + "\n";
    out += "anneal_end = " + std::to_string(config.anneal.end_epoch) + "\n";
    out += "epochs = " + std::to_string(config.epochs) + "\n";
    out += "batches_per_epoch = " + std::to_string(config.batches_per_epoch) + "\n";
    out += "batch_size = " + std::to_string(config.batch_size) + "\n";
    out += "learning_rate = " + format_double(config.learning_rate) + "\n";
    out += "seed = " + std::to_string(config.seed) + "\n";
    out += "eval_samples = " + std::to_string(config.eval_samples) + "\n";
    out += "checkpoint_every = " + std::to_string(config.checkpoint_every) + "\n";
    write_text_file(path, out);
}

double utility_loss(const Tensor& listener_probs, int target_position) {
    if (target_position < 0 || target_position >= listener_probs.size())
        throw std::invalid_argument("utility_loss: target position out of range");
    const double p =
        std::max(listener_probs.data[static_cast<size_t>(target_position)], kProbFloor);
    return -std::log(p);
}

double informativeness_loss(const Tensor& x, const Tensor& x_hat) {
    if (x.shape != x_hat.shape)
        throw std::invalid_argument("informativeness_loss: shape mismatch " +
                                    shape_string(x.shape) + " vs " + shape_string(x_hat.shape));
    double acc = 0.0;
    for (int i = 0; i < x.size(); ++i) {
        const double d = x.data[static_cast<size_t>(i)] - x_hat.data[static_cast<size_t>(i)];
        acc += d * d;
    }
    return acc / static_cast<double>(x.size());
}

double complexity_loss(const CommOutcome& outcome, SpeakerKind kind) {
    if (kind == SpeakerKind::VqVib) return gaussian_unit_kl(outcome.params);
    return softmax_uniform_kl(outcome.logits);
}

double total_loss(const TradeoffWeights& weights, double utility, double informativeness,
                  double complexity, double vq_aux) {
    weights.validate();
    return weights.lambda_u * utility + weights.lambda_i * informativeness +
           weights.lambda_c * complexity + vq_aux;
}

NodeId taped_utility_loss(Tape& tape, NodeId listener_probs, int target_position) {
    const NodeId p = tape.clamp_min(tape.pick(listener_probs, target_position), kProbFloor);
    return tape.scale(tape.log_(p), -1.0);
}

NodeId taped_informativeness_loss(Tape& tape, NodeId x, NodeId x_hat) {
    return tape.mean(tape.square(tape.sub(x, x_hat)));
}

NodeId taped_complexity_loss(Tape& tape, const TapedCommOutcome& outcome, SpeakerKind kind) {
    if (kind == SpeakerKind::VqVib) {
        NodeId per_dim = tape.add(tape.square(outcome.mu), tape.exp_(outcome.log_var));
        per_dim = tape.sub(per_dim, outcome.log_var);
        per_dim = tape.add_scalar(per_dim, -1.0);
        return tape.scale(tape.sum(per_dim), 0.5);
    }
    const NodeId p = tape.clamp_min(tape.softmax(outcome.logits), kProbFloor);
    const NodeId plogp = tape.sum(tape.mul(p, tape.log_(p)));
    const int vocab = tape.value(outcome.logits).size();
    return tape.add_scalar(plogp, std::log(static_cast<double>(vocab)));
}

TrainResult train(const TrainConfig& config, const ChipTable& chips,
                  const EpochCallback& callback) {
    config.validate();
    if (chips.count() < 2) throw DegenerateInputError("train: need at least 2 chips");

    RandomSource root(config.seed, 0);
    RandomSource init_rng = root.split(1);
    RandomSource train_rng = root.split(2);
    RandomSource eval_base = root.split(3);

    Agents agents = Agents::init(config.agents, init_rng);
    const SpeakerKind kind = config.agents.kind;

    std::vector<Tensor*> params;
    agents.collect_params(params);
    AdamConfig adam_config;
    adam_config.step_size = config.learning_rate;
    AdamState adam = AdamState::init(params, adam_config);

    std::vector<EpochRecord> records;
    records.reserve(static_cast<size_t>(config.epochs));

    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        const double lambda_c = config.anneal.at(epoch);
        double correct = 0.0;
        double mse_sum = 0.0;

        for (int batch = 1; batch <= config.batches_per_epoch; ++batch) {
            Tape tape;
            TapedAgents taped = register_agents(tape, agents);
            const std::vector<NodeId> param_nodes = collect_param_nodes(taped, kind);

            auto check_finite = [&](NodeId id, const char* what) {
                for (double v : tape.value(id).data)
                    if (!std::isfinite(v))
                        throw TrainingDiverged("training diverged at epoch " +
                                               std::to_string(epoch) + " batch " +
                                               std::to_string(batch) + " (" + what +
                                               " non-finite)");
            };

            NodeId u_acc = -1, i_acc = -1, c_acc = -1, aux_acc = -1;
            for (int t = 0; t < config.batch_size; ++t) {
                const ReferenceTrial trial = sample_trial(chips, train_rng);
                const Tensor& target = chips.scaled_lab(chips.index_of_id(trial.target_id));
                const Tensor& distractor =
                    chips.scaled_lab(chips.index_of_id(trial.distractor_id));

                const NodeId x = tape.constant(target);
                const TapedCommOutcome spoken =
                    taped_speak(tape, taped.speaker, kind, x, train_rng);
                if (kind == SpeakerKind::OneHot) check_finite(spoken.logits, "speaker logits");
                const NodeId cand0 = tape.constant(trial.target_first ? target : distractor);
                const NodeId cand1 = tape.constant(trial.target_first ? distractor : target);
                const int position = trial.target_first ? 0 : 1;

                const NodeId probs = taped_listen(tape, taped.listener, spoken.c, cand0, cand1);
                check_finite(probs, "listener probabilities");
                u_acc = accumulate(tape, u_acc, taped_utility_loss(tape, probs, position));
                const NodeId x_hat = taped_reconstruct(tape, taped.decoder, spoken.c);
                i_acc = accumulate(tape, i_acc, taped_informativeness_loss(tape, x, x_hat));
                c_acc = accumulate(tape, c_acc, taped_complexity_loss(tape, spoken, kind));
                if (spoken.aux >= 0) aux_acc = accumulate(tape, aux_acc, spoken.aux);

                const double p_target =
                    tape.value(probs).data[static_cast<size_t>(position)];
                if (p_target > 0.5)
                    correct += 1.0;
                else if (p_target == 0.5)
                    correct += 0.5;
            }

            const double inv_batch = 1.0 / static_cast<double>(config.batch_size);
            const NodeId u_mean = tape.scale(u_acc, inv_batch);
            const NodeId i_mean = tape.scale(i_acc, inv_batch);
            const NodeId c_mean = tape.scale(c_acc, inv_batch);
            NodeId loss = tape.add(tape.add(tape.scale(u_mean, config.lambda_u),
                                            tape.scale(i_mean, config.lambda_i)),
                                   tape.scale(c_mean, lambda_c));
            if (aux_acc >= 0) loss = tape.add(loss, tape.scale(aux_acc, inv_batch));

            const double loss_value = tape.value(loss).data[0];
            if (!std::isfinite(loss_value))
                throw TrainingDiverged(
                    "training diverged at epoch " + std::to_string(epoch) + " batch " +
                    std::to_string(batch) + " (utility=" + short_num(tape.value(u_mean).data[0]) +
                    ", mse=" + short_num(tape.value(i_mean).data[0]) +
                    ", kl=" + short_num(tape.value(c_mean).data[0]) + ", aux=" +
                    short_num(aux_acc >= 0 ? tape.value(aux_acc).data[0] * inv_batch : 0.0) +
                    ")");
            mse_sum += tape.value(i_mean).data[0];

            tape.backward(loss);
            std::vector<const Tensor*> grads;
            grads.reserve(param_nodes.size());
            for (NodeId id : param_nodes) grads.push_back(&tape.grad(id));
            adam_step(params, grads, adam);
        }

        double kl_sum = 0.0;
        for (int i = 0; i < chips.count(); ++i) {
            const Tensor& x = chips.scaled_lab(i);
            if (kind == SpeakerKind::VqVib)
                kl_sum += gaussian_unit_kl(encode(agents.speaker, x));
            else
                kl_sum += softmax_uniform_kl(onehot_logits(agents.speaker, x));
        }

        RandomSource eval_rng = eval_base.split(static_cast<std::uint64_t>(epoch));
        const NamingSystem naming =
            agent_naming_system(agents.speaker, chips, config.eval_samples, eval_rng);

        EpochRecord record;
        record.epoch = epoch;
        record.lambda_u = config.lambda_u;
        record.lambda_i = config.lambda_i;
        record.lambda_c = lambda_c;
        record.utility_acc =
            correct / static_cast<double>(config.batches_per_epoch * config.batch_size);
        record.mse = mse_sum / static_cast<double>(config.batches_per_epoch);
        record.kl_nats = kl_sum / static_cast<double>(chips.count());
        record.complexity_bits = estimate_complexity(naming);
        records.push_back(record);
        if (callback) callback(record, agents, naming);
    }

    return TrainResult{std::move(agents), std::move(records)};
}

void save_epochs_csv(const std::string& path, const std::vector<EpochRecord>& records) {
    std::string out = "epoch,lambda_u,lambda_i,lambda_c,utility_acc,mse,kl_nats,complexity_bits\n";
    for (const EpochRecord& r : records) {
        out += std::to_string(r.epoch);
        out += "," + format_double(r.lambda_u);
        out += "," + format_double(r.lambda_i);
        out += "," + format_double(r.lambda_c);
        out += "," + format_double(r.utility_acc);
        out += "," + format_double(r.mse);
        out += "," + format_double(r.kl_nats);
        out += "," + format_double(r.complexity_bits);
        out += "\n";
    }
    write_text_file(path, out);
}

std::vector<EpochRecord> load_epochs_csv(const std::string& path) {
    const CsvTable table = read_csv(path);
    const std::vector<std::string> expected = {"epoch",       "lambda_u", "lambda_i",
                                               "lambda_c",    "utility_acc", "mse",
                                               "kl_nats",     "complexity_bits"};
    if (table.header != expected) throw DataError(path + ": unexpected epoch CSV header");
    std::vector<EpochRecord> records;
    long line = 1;
    for (const std::vector<std::string>& row : table.rows) {
        ++line;
        if (row.size() != expected.size())
            throw ParseError(path, line, "expected 8 fields");
        EpochRecord r;
        r.epoch = static_cast<int>(parse_long(row[0], path, line));
        r.lambda_u = parse_double(row[1], path, line);
        r.lambda_i = parse_double(row[2], path, line);
        r.lambda_c = parse_double(row[3], path, line);
        r.utility_acc = parse_double(row[4], path, line);
        r.mse = parse_double(row[5], path, line);
        r.kl_nats = parse_double(row[6], path, line);
        r.complexity_bits = parse_double(row[7], path, line);
        records.push_back(r);
    }
    return records;
}

}  // namespace ibsignal
