// Speaker, listener and reconstruction decoder for the color reference game,
// with two discrete channels: VQ-VIB (Gaussian encoder quantized against a
// learned codebook) and a one-hot Gumbel-softmax baseline. Every operation
// has a taped form for training and a plain form for evaluation; both share
// the same kernels so values agree bit for bit.
#pragma once

#include <string>
#include <utility>
#include <vector>

#include "ibsignal/mlp.hpp"
#include "ibsignal/random.hpp"
#include "ibsignal/tape.hpp"
#include "ibsignal/tensor.hpp"
#include "ibsignal/wcs.hpp"

namespace ibsignal {

enum class SpeakerKind { VqVib, OneHot };

std::string speaker_kind_name(SpeakerKind kind);
SpeakerKind parse_speaker_kind(const std::string& name);  // "vqvib" | "onehot"

struct Codebook {
    int k = 0;
    int dim = 0;
    Tensor vectors;  // [k x dim], trainable

    // Entries i.i.d. N(0, 0.1^2).
    static Codebook init(int k, int dim, RandomSource& rng);
    Tensor vector_at(int index) const;  // 1-based
};

struct GaussianParams {
    Tensor mu;
    Tensor log_var;
};

// One emitted signal. For VQ-VIB, `index` is the 1-based codebook index, z
// the pre-quantization sample and params the encoder's Gaussian. For one-hot,
// `index` is the 1-based vocabulary index, z the relaxed softmax sample,
// params empty and logits the encoder output.
struct CommOutcome {
    Tensor c;
    int index = 0;
    Tensor z;
    GaussianParams params;
    Tensor logits;
};

struct Speaker {
    SpeakerKind kind = SpeakerKind::VqVib;
    Mlp encoder;  // 3 -> hidden -> 2*dim (VQ-VIB) or vocab logits (one-hot)
    Codebook codebook;

    static Speaker init_vqvib(int comm_dim, int codebook_size, const std::vector<int>& hidden,
                              RandomSource& rng);
    static Speaker init_onehot(int vocab, const std::vector<int>& hidden, RandomSource& rng);

    int signal_count() const;  // K or vocab
    int comm_dim() const;      // length of the c vector

    void collect_params(std::vector<Tensor*>& out);
    void collect_params(const std::string& prefix,
                        std::vector<std::pair<std::string, Tensor*>>& out);
};

struct Listener {
    Mlp scorer;  // (comm_dim + 3) -> hidden -> 1, shared across candidates

    static Listener init(int comm_dim, const std::vector<int>& hidden, RandomSource& rng);
};

struct Decoder {
    Mlp net;  // comm_dim -> hidden -> 3

    static Decoder init(int comm_dim, const std::vector<int>& hidden, RandomSource& rng);
};

struct AgentConfig {
    SpeakerKind kind = SpeakerKind::VqVib;
    int comm_dim = 2;
    int codebook_size = 20;  // K for VQ-VIB, vocabulary size for one-hot
    std::vector<int> hidden = {64, 64};
};

struct Agents {
    Speaker speaker;
    Listener listener;
    Decoder decoder;

    static Agents init(const AgentConfig& config, RandomSource& rng);

    void collect_params(std::vector<Tensor*>& out);
    void collect_params(std::vector<std::pair<std::string, Tensor*>>& out);
};

// ---- Plain evaluation path ----

// Gaussian encoder parameters; VQ-VIB speakers only.
GaussianParams encode(const Speaker& speaker, const Tensor& x);
// Vocabulary logits; one-hot speakers only.
Tensor onehot_logits(const Speaker& speaker, const Tensor& x);

// Nearest codebook vector by squared distance, ties to the lowest index.
// Returns (1-based index, that vector).
std::pair<int, Tensor> quantize(const Tensor& z, const Codebook& codebook);

// Gumbel-softmax temperature used during training; hard samples always.
constexpr double kGumbelTau = 1.0;

CommOutcome speak(const Speaker& speaker, const Tensor& x, RandomSource& rng);

// Probability over the two candidates; exactly permutation-equivariant.
Tensor listen(const Listener& listener, const Tensor& c, const Tensor& cand0,
              const Tensor& cand1);

Tensor reconstruct(const Decoder& decoder, const Tensor& c);

// q(c|x): Monte-Carlo over n_samples draws for VQ-VIB, exact softmax for
// one-hot (n_samples ignored there).
Tensor comm_distribution(const Speaker& speaker, const Tensor& x, int n_samples,
                         RandomSource& rng);

// Full q(c|x) table over all chips with a uniform prior.
NamingSystem agent_naming_system(const Speaker& speaker, const ChipTable& chips, int n_samples,
                                 RandomSource& rng);

// One embedding vector per signal: codebook rows for VQ-VIB, canonical basis
// vectors for one-hot.
std::vector<Tensor> signal_embeddings(const Speaker& speaker);

// ---- Taped training path ----

struct TapedSpeaker {
    TapedMlp encoder;
    NodeId codebook = -1;
};

struct TapedAgents {
    TapedSpeaker speaker;
    TapedMlp listener;
    TapedMlp decoder;
};

TapedAgents register_agents(Tape& tape, Agents& agents);

struct TapedCommOutcome {
    NodeId c = -1;
    int index = 0;
    NodeId z = -1;
    NodeId mu = -1;       // VQ-VIB only
    NodeId log_var = -1;  // VQ-VIB only
    NodeId logits = -1;   // one-hot only
    NodeId aux = -1;      // VQ-VAE codebook + commitment losses; -1 for one-hot
};

TapedCommOutcome taped_speak(Tape& tape, const TapedSpeaker& speaker, SpeakerKind kind,
                             NodeId x, RandomSource& rng);
NodeId taped_listen(Tape& tape, const TapedMlp& scorer, NodeId c, NodeId cand0, NodeId cand1);
NodeId taped_reconstruct(Tape& tape, const TapedMlp& decoder, NodeId c);

}  // namespace ibsignal
