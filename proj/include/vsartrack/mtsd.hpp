#pragma once

// Multi-term decomposition of a video matrix D into a low-rank background L,
// a sparse shadow term X and a residual N = D - L - X.
//
// The rank / l0 constrained problem is relaxed to the penalized surrogate
//
//     tau * ||L||_*  +  lambda * ||X||_1  +  1/2 ||D - L - X||_F^2
//
// and minimized by exact alternating proximal steps (block coordinate
// descent), so the objective never increases between iterations.

#include "vsartrack/core.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <vector>

namespace vsartrack::mtsd {

enum class Polarity { DarkShadows, BrightShadows };

struct DecomposeParams {
    std::optional<double> tau;           // nuclear threshold; default_tau() when unset
    std::optional<double> lambda;        // sparsity threshold; default_lambda() when unset
    double tol = 1e-4;                   // relative change stopping tolerance
    int max_iter = 200;
    std::optional<std::size_t> window;   // frames per block; whole video when unset
    Polarity polarity = Polarity::DarkShadows;

    /// Throws std::invalid_argument when a field is out of range for a video
    /// of `frames` frames.
    void validate(std::size_t frames) const;
};

struct BlockReport {
    std::size_t first_frame = 0;  // 0-based column of the block in D
    std::size_t frames = 0;
    double tau = 0.0;
    double lambda = 0.0;
    int iterations = 0;
    bool converged = false;
    std::vector<double> objective;  // objective before iteration 1, then after each iteration
};

struct Decomposition {
    Eigen::MatrixXd L;
    Eigen::MatrixXd X;
    Eigen::MatrixXd N;
    int iterations = 0;      // max over blocks
    bool converged = false;  // all blocks converged
    std::vector<BlockReport> blocks;
};

/// Singular value thresholding: U * max(S - tau, 0) * V^T.
Eigen::MatrixXd svt(const Eigen::MatrixXd& m, double tau);

/// Elementwise soft threshold: sign(m) * max(|m| - lambda, 0).
Eigen::MatrixXd shrink(const Eigen::MatrixXd& m, double lambda);

double default_lambda(Eigen::Index rows, Eigen::Index cols);
double default_tau(const Eigen::MatrixXd& d);

double nuclear_norm(const Eigen::MatrixXd& m);

/// Penalized objective minimized by decompose_matrix(); N is taken as given.
double objective(const Eigen::MatrixXd& l, const Eigen::MatrixXd& x, const Eigen::MatrixXd& n, double tau,
                 double lambda);

/// Decomposes one Casorati block. Throws NumericalError on non-finite input.
BlockReport decompose_matrix(const Eigen::MatrixXd& d, double tau, double lambda, double tol, int max_iter,
                             Eigen::MatrixXd& l, Eigen::MatrixXd& x, Eigen::MatrixXd& n);

/// Decomposes casorati(stack), block by block when params.window < frames.
/// Blocks are independent and may run on up to `threads` workers.
Decomposition decompose(const FrameStack& stack, const DecomposeParams& params, unsigned threads = 1);

/// Shadow map per block: max(-X, 0) for dark shadows (max(X, 0) for bright),
/// divided by the block maximum; an all-zero block stays zero.
FrameStack enhance(const FrameStack& stack, const Decomposition& decomposition, Polarity polarity);

/// Stand-in for enhance() when decomposition is switched off: the raw frames
/// with dark shadows mapped to high values (1 - D), bright shadows unchanged.
FrameStack shadow_map_raw(const FrameStack& stack, Polarity polarity);

}  // namespace vsartrack::mtsd
