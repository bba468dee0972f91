// Evaluation metrics over naming systems: plug-in mutual information, gNID
// between two systems, best-match search, mode maps over the chip grid, 2-D
// PCA of communication vectors, and the communication-distance versus
// color-distance correlation. All information quantities are base-2.
#pragma once

#include <string>
#include <vector>

#include "ibsignal/tensor.hpp"
#include "ibsignal/wcs.hpp"

namespace ibsignal {

// Plug-in I(X;C) in bits from q(c|x) and the system's prior; 0 log 0 = 0.
double estimate_complexity(const NamingSystem& system);

// gNID(W,V) = 1 - I(W;V) / max(I(W;W'), I(V;V')) with plug-in joints
// p(w,v) = sum_x p(x) q1(w|x) q2(v|x). Throws UndefinedResultError when both
// systems are constant (every MI term zero). The prior is taken from q1;
// both systems must cover the same chips.
double gnid(const NamingSystem& q1, const NamingSystem& q2);

struct AgentSystemRef {
    std::string run_id;
    int epoch = 0;
    const NamingSystem* system = nullptr;
};

struct MatchResult {
    int language_id = 0;
    double gnid_value = 0.0;
    std::string run_id;
    int epoch = 0;
};

// Minimizes gnid over the agent set; ties go to the earliest epoch.
MatchResult best_match(int language_id, const NamingSystem& language,
                       const std::vector<AgentSystemRef>& agents);

// Match table CSV (header language_id,best_agent_run,best_epoch,gnid).
void save_match_table_csv(const std::string& path, const std::vector<MatchResult>& results);

struct ModeMap {
    int signal_count = 0;
    std::vector<int> modal;         // per chip index: argmax_c q(c|x), ties to lowest id
    std::vector<bool> used;         // per signal: modal for at least one chip
    std::vector<Tensor> centroids;  // per signal: mean raw CIELAB of its modal chips
};

ModeMap mode_map(const NamingSystem& system, const ChipTable& chips);

// CSV rows (row,col,signal_id,L,a,b), one per chip, colored by centroid.
void save_mode_map_csv(const std::string& path, const ModeMap& map, const ChipTable& chips);

// Mean-centered projection onto the top-2 eigenvectors of the sample
// covariance (cyclic Jacobi). Sign convention: each eigenvector's first
// nonzero coordinate is positive. Needs >= 2 vectors of dim >= 2 with
// nonzero variance.
std::vector<Tensor> pca2(const std::vector<Tensor>& vectors);

// r^2 of regressing pairwise centroid color distance on pairwise embedding
// distance over unordered pairs of used signals. Zero variance in embedding
// distances gives 0; zero variance in color distances gives 1.
double comm_color_correlation(const NamingSystem& system, const ChipTable& chips,
                              const std::vector<Tensor>& embeddings);

}  // namespace ibsignal
