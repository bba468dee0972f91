#include "ibsignal/agents.hpp"

#include <cmath>
#include <stdexcept>

#include "ibsignal/errors.hpp"

namespace ibsignal {

namespace {

int argmax_lowest(const Tensor& v) {
    int best = 0;
    for (int i = 1; i < v.size(); ++i)
        if (v.data[static_cast<size_t>(i)] > v.data[static_cast<size_t>(best)]) best = i;
    return best;
}

double squared_distance(const double* a, const double* b, int n) {
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        const double d = a[i] - b[i];
        total += d * d;
    }
    return total;
}

// Same max-shifted algorithm as the tape's softmax, so plain evaluation and
// taped training agree bit for bit.
Tensor softmax_plain(const Tensor& x) {
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

double gumbel(RandomSource& rng) {
    double u = rng.uniform();
    while (u <= 0.0) u = rng.uniform();
    return -std::log(-std::log(u));
}

Tensor basis_vector(int size, int index) {
    Tensor v = Tensor::zeros({size});
    v.data[static_cast<size_t>(index)] = 1.0;
    return v;
}

std::vector<int> layer_sizes(int in, const std::vector<int>& hidden, int out) {
    std::vector<int> sizes;
    sizes.push_back(in);
    sizes.insert(sizes.end(), hidden.begin(), hidden.end());
    sizes.push_back(out);
    return sizes;
}

}  // namespace

std::string speaker_kind_name(SpeakerKind kind) {
    return kind == SpeakerKind::VqVib ? "vqvib" : "onehot";
}

SpeakerKind parse_speaker_kind(const std::string& name) {
    if (name == "vqvib") return SpeakerKind::VqVib;
    if (name == "onehot") return SpeakerKind::OneHot;
    throw DegenerateInputError("unknown speaker kind '" + name + "' (expected vqvib or onehot)");
}

Codebook Codebook::init(int k, int dim, RandomSource& rng) {
    if (k < 1 || dim < 1) throw DegenerateInputError("Codebook::init: k and dim must be positive");
    Codebook cb;
    cb.k = k;
    cb.dim = dim;
    cb.vectors = Tensor::zeros({k, dim});
    for (double& v : cb.vectors.data) v = 0.1 * rng.normal();
    return cb;
}

Tensor Codebook::vector_at(int index) const {
    if (index < 1 || index > k) throw std::invalid_argument("Codebook::vector_at: bad index");
    Tensor v = Tensor::zeros({dim});
    for (int d = 0; d < dim; ++d)
        v.data[static_cast<size_t>(d)] = vectors.data[static_cast<size_t>(index - 1) * dim + d];
    return v;
}

Speaker Speaker::init_vqvib(int comm_dim, int codebook_size, const std::vector<int>& hidden,
                            RandomSource& rng) {
    Speaker s;
    s.kind = SpeakerKind::VqVib;
    RandomSource enc_rng = rng.split(1);
    RandomSource cb_rng = rng.split(2);
    s.encoder = Mlp::init(layer_sizes(3, hidden, 2 * comm_dim), enc_rng);
    s.codebook = Codebook::init(codebook_size, comm_dim, cb_rng);
    return s;
}

Speaker Speaker::init_onehot(int vocab, const std::vector<int>& hidden, RandomSource& rng) {
    if (vocab < 1) throw DegenerateInputError("Speaker::init_onehot: vocab must be positive");
    Speaker s;
    s.kind = SpeakerKind::OneHot;
    RandomSource enc_rng = rng.split(1);
    s.encoder = Mlp::init(layer_sizes(3, hidden, vocab), enc_rng);
    return s;
}

int Speaker::signal_count() const {
    return kind == SpeakerKind::VqVib ? codebook.k : encoder.output_dim();
}

int Speaker::comm_dim() const {
    return kind == SpeakerKind::VqVib ? codebook.dim : encoder.output_dim();
}

void Speaker::collect_params(std::vector<Tensor*>& out) {
    encoder.collect_params(out);
    if (kind == SpeakerKind::VqVib) out.push_back(&codebook.vectors);
}

void Speaker::collect_params(const std::string& prefix,
                             std::vector<std::pair<std::string, Tensor*>>& out) {
    encoder.collect_params(prefix + ".encoder", out);
    if (kind == SpeakerKind::VqVib) out.emplace_back(prefix + ".codebook", &codebook.vectors);
}

Listener Listener::init(int comm_dim, const std::vector<int>& hidden, RandomSource& rng) {
    Listener l;
    l.scorer = Mlp::init(layer_sizes(comm_dim + 3, hidden, 1), rng);
    return l;
}

Decoder Decoder::init(int comm_dim, const std::vector<int>& hidden, RandomSource& rng) {
    Decoder d;
    d.net = Mlp::init(layer_sizes(comm_dim, hidden, 3), rng);
    return d;
}

Agents Agents::init(const AgentConfig& config, RandomSource& rng) {
    Agents agents;
    RandomSource speaker_rng = rng.split(1);
    RandomSource listener_rng = rng.split(2);
    RandomSource decoder_rng = rng.split(3);
    if (config.kind == SpeakerKind::VqVib)
        agents.speaker = Speaker::init_vqvib(config.comm_dim, config.codebook_size, config.hidden,
                                             speaker_rng);
    else
        agents.speaker = Speaker::init_onehot(config.codebook_size, config.hidden, speaker_rng);
    const int comm_dim = agents.speaker.comm_dim();
    agents.listener = Listener::init(comm_dim, config.hidden, listener_rng);
    agents.decoder = Decoder::init(comm_dim, config.hidden, decoder_rng);
    return agents;
}

void Agents::collect_params(std::vector<Tensor*>& out) {
    speaker.collect_params(out);
    listener.scorer.collect_params(out);
    decoder.net.collect_params(out);
}

void Agents::collect_params(std::vector<std::pair<std::string, Tensor*>>& out) {
    speaker.collect_params("speaker", out);
    listener.scorer.collect_params("listener.scorer", out);
    decoder.net.collect_params("decoder.net", out);
}

GaussianParams encode(const Speaker& speaker, const Tensor& x) {
    if (speaker.kind != SpeakerKind::VqVib)
        throw DegenerateInputError("encode: one-hot speakers have no Gaussian parameters");
    Tensor out = mlp_eval(speaker.encoder, x);
    const int dim = speaker.codebook.dim;
    GaussianParams p;
    p.mu = Tensor::zeros({dim});
    p.log_var = Tensor::zeros({dim});
    for (int d = 0; d < dim; ++d) {
        p.mu.data[static_cast<size_t>(d)] = out.data[static_cast<size_t>(d)];
        p.log_var.data[static_cast<size_t>(d)] = out.data[static_cast<size_t>(dim + d)];
    }
    return p;
}

Tensor onehot_logits(const Speaker& speaker, const Tensor& x) {
    if (speaker.kind != SpeakerKind::OneHot)
        throw DegenerateInputError("onehot_logits: speaker is not one-hot");
    return mlp_eval(speaker.encoder, x);
}

std::pair<int, Tensor> quantize(const Tensor& z, const Codebook& codebook) {
    if (codebook.k < 1) throw std::invalid_argument("quantize: empty codebook");
    if (z.size() != codebook.dim) throw std::invalid_argument("quantize: dimension mismatch");
    int best = 1;
    double best_dist = squared_distance(z.data.data(), codebook.vectors.data.data(), codebook.dim);
    for (int i = 2; i <= codebook.k; ++i) {
        const double dist = squared_distance(
            z.data.data(), codebook.vectors.data.data() + static_cast<size_t>(i - 1) * codebook.dim,
            codebook.dim);
        if (dist < best_dist) {
            best_dist = dist;
            best = i;
        }
    }
    return {best, codebook.vector_at(best)};
}

CommOutcome speak(const Speaker& speaker, const Tensor& x, RandomSource& rng) {
    CommOutcome outcome;
    if (speaker.kind == SpeakerKind::VqVib) {
        outcome.params = encode(speaker, x);
        const int dim = speaker.codebook.dim;
        outcome.z = Tensor::zeros({dim});
        for (int d = 0; d < dim; ++d) {
            const double sigma = std::exp(0.5 * outcome.params.log_var.data[static_cast<size_t>(d)]);
            outcome.z.data[static_cast<size_t>(d)] =
                outcome.params.mu.data[static_cast<size_t>(d)] + sigma * rng.normal();
        }
        auto [index, c] = quantize(outcome.z, speaker.codebook);
        outcome.index = index;
        outcome.c = std::move(c);
    } else {
        outcome.logits = onehot_logits(speaker, x);
        Tensor perturbed = outcome.logits;
        for (double& v : perturbed.data) v += gumbel(rng);
        outcome.index = argmax_lowest(perturbed) + 1;
        Tensor scaled = perturbed;
        for (double& v : scaled.data) v *= 1.0 / kGumbelTau;
        outcome.z = softmax_plain(scaled);
        outcome.c = basis_vector(outcome.logits.size(), outcome.index - 1);
    }
    return outcome;
}

Tensor listen(const Listener& listener, const Tensor& c, const Tensor& cand0,
              const Tensor& cand1) {
    Tensor in0 = Tensor::zeros({c.size() + cand0.size()});
    Tensor in1 = Tensor::zeros({c.size() + cand1.size()});
    for (int i = 0; i < c.size(); ++i) {
        in0.data[static_cast<size_t>(i)] = c.data[static_cast<size_t>(i)];
        in1.data[static_cast<size_t>(i)] = c.data[static_cast<size_t>(i)];
    }
    for (int i = 0; i < cand0.size(); ++i) {
        in0.data[static_cast<size_t>(c.size() + i)] = cand0.data[static_cast<size_t>(i)];
        in1.data[static_cast<size_t>(c.size() + i)] = cand1.data[static_cast<size_t>(i)];
    }
    Tensor scores = Tensor::vec({mlp_eval(listener.scorer, in0)(0), mlp_eval(listener.scorer, in1)(0)});
    return softmax_plain(scores);
}

Tensor reconstruct(const Decoder& decoder, const Tensor& c) { return mlp_eval(decoder.net, c); }

Tensor comm_distribution(const Speaker& speaker, const Tensor& x, int n_samples,
                         RandomSource& rng) {
    if (n_samples < 1) throw DegenerateInputError("comm_distribution: n_samples must be >= 1");
    if (speaker.kind == SpeakerKind::OneHot) return softmax_plain(onehot_logits(speaker, x));

    const GaussianParams params = encode(speaker, x);
    const int dim = speaker.codebook.dim;
    Tensor sigma = Tensor::zeros({dim});
    for (int d = 0; d < dim; ++d)
        sigma.data[static_cast<size_t>(d)] = std::exp(0.5 * params.log_var.data[static_cast<size_t>(d)]);

    std::vector<long> counts(static_cast<size_t>(speaker.codebook.k), 0);
    Tensor z = Tensor::zeros({dim});
    const double* cb = speaker.codebook.vectors.data.data();
    for (int s = 0; s < n_samples; ++s) {
        for (int d = 0; d < dim; ++d)
            z.data[static_cast<size_t>(d)] =
                params.mu.data[static_cast<size_t>(d)] + sigma.data[static_cast<size_t>(d)] * rng.normal();
        int best = 0;
        double best_dist = squared_distance(z.data.data(), cb, dim);
        for (int i = 1; i < speaker.codebook.k; ++i) {
            const double dist = squared_distance(z.data.data(), cb + static_cast<size_t>(i) * dim, dim);
            if (dist < best_dist) {
                best_dist = dist;
                best = i;
            }
        }
        counts[static_cast<size_t>(best)]++;
    }
    Tensor q = Tensor::zeros({speaker.codebook.k});
    for (int i = 0; i < speaker.codebook.k; ++i)
        q.data[static_cast<size_t>(i)] = static_cast<double>(counts[static_cast<size_t>(i)]) / n_samples;
    return q;
}

NamingSystem agent_naming_system(const Speaker& speaker, const ChipTable& chips, int n_samples,
                                 RandomSource& rng) {
    NamingSystem system = NamingSystem::uniform_prior(chips.count(), speaker.signal_count());
    for (int x = 0; x < chips.count(); ++x) {
        Tensor q = comm_distribution(speaker, chips.scaled_lab(x), n_samples, rng);
        for (int c = 0; c < system.signal_count; ++c) system.q_at(x, c) = q(c);
    }
    system.validate(1e-9);
    return system;
}

std::vector<Tensor> signal_embeddings(const Speaker& speaker) {
    std::vector<Tensor> embeddings;
    const int count = speaker.signal_count();
    embeddings.reserve(static_cast<size_t>(count));
    for (int i = 0; i < count; ++i) {
        if (speaker.kind == SpeakerKind::VqVib)
            embeddings.push_back(speaker.codebook.vector_at(i + 1));
        else
            embeddings.push_back(basis_vector(count, i));
    }
    return embeddings;
}

TapedAgents register_agents(Tape& tape, Agents& agents) {
    TapedAgents taped;
    taped.speaker.encoder = register_mlp(tape, agents.speaker.encoder);
    if (agents.speaker.kind == SpeakerKind::VqVib)
        taped.speaker.codebook = tape.leaf(agents.speaker.codebook.vectors);
    taped.listener = register_mlp(tape, agents.listener.scorer);
    taped.decoder = register_mlp(tape, agents.decoder.net);
    return taped;
}

TapedCommOutcome taped_speak(Tape& tape, const TapedSpeaker& speaker, SpeakerKind kind,
                             NodeId x, RandomSource& rng) {
    TapedCommOutcome outcome;
    NodeId enc = mlp_forward(tape, speaker.encoder, x);
    if (kind == SpeakerKind::VqVib) {
        const int k = tape.value(speaker.codebook).rows();
        const int dim = tape.value(speaker.codebook).cols();
        outcome.mu = tape.slice(enc, 0, dim);
        outcome.log_var = tape.slice(enc, dim, dim);
        outcome.z = gaussian_sample(tape, outcome.mu, outcome.log_var, rng);

        // Fetched only after the pushes above; node storage may reallocate.
        const Tensor& cb = tape.value(speaker.codebook);
        const Tensor& zv = tape.value(outcome.z);
        int best = 0;
        double best_dist = squared_distance(zv.data.data(), cb.data.data(), dim);
        for (int i = 1; i < k; ++i) {
            const double dist =
                squared_distance(zv.data.data(), cb.data.data() + static_cast<size_t>(i) * dim, dim);
            if (dist < best_dist) {
                best_dist = dist;
                best = i;
            }
        }
        outcome.index = best + 1;

        NodeId zeta = tape.row(speaker.codebook, best);
        outcome.c = tape.replace_value(outcome.z, tape.value(zeta));
        NodeId codebook_loss = tape.sum(tape.square(tape.sub(tape.stop_gradient(outcome.z), zeta)));
        NodeId commitment = tape.scale(
            tape.sum(tape.square(tape.sub(outcome.z, tape.stop_gradient(zeta)))), 0.25);
        outcome.aux = tape.add(codebook_loss, commitment);
    } else {
        outcome.logits = enc;
        const int vocab = tape.value(enc).size();
        Tensor g = Tensor::zeros({vocab});
        for (double& v : g.data) v = gumbel(rng);
        NodeId perturbed = tape.add(enc, tape.constant(g));
        outcome.index = argmax_lowest(tape.value(perturbed)) + 1;
        outcome.z = tape.softmax(tape.scale(perturbed, 1.0 / kGumbelTau));
        outcome.c = tape.replace_value(outcome.z, basis_vector(vocab, outcome.index - 1));
    }
    return outcome;
}

NodeId taped_listen(Tape& tape, const TapedMlp& scorer, NodeId c, NodeId cand0, NodeId cand1) {
    NodeId s0 = mlp_forward(tape, scorer, tape.concat(c, cand0));
    NodeId s1 = mlp_forward(tape, scorer, tape.concat(c, cand1));
    return tape.softmax(tape.concat(s0, s1));
}

NodeId taped_reconstruct(Tape& tape, const TapedMlp& decoder, NodeId c) {
    return mlp_forward(tape, decoder, c);
}

}  // namespace ibsignal
