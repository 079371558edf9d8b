#include "vsartrack/mtsd.hpp"

#include "vsartrack/error.hpp"
#include "vsartrack/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace vsartrack::mtsd {

void DecomposeParams::validate(std::size_t frames) const {
    if (tau && !(*tau > 0.0)) throw std::invalid_argument("decompose: tau must be > 0");
    if (lambda && !(*lambda > 0.0)) throw std::invalid_argument("decompose: lambda must be > 0");
    if (!(tol > 0.0 && tol < 1.0)) throw std::invalid_argument("decompose: tol must lie in (0,1)");
    if (max_iter < 1) throw std::invalid_argument("decompose: max_iter must be >= 1");
    if (window && (*window < 1 || *window > frames))
        throw std::invalid_argument("decompose: window must lie in [1, " + std::to_string(frames) + "]");
}

namespace {

struct Thresholded {
    Eigen::MatrixXd matrix;
    double nuclear = 0.0;  // nuclear norm of `matrix`
};

Thresholded threshold_singular_values(const Eigen::MatrixXd& m, double tau) {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& s = svd.singularValues();
    Eigen::Index keep = 0;
    while (keep < s.size() && s(keep) > tau) ++keep;
    if (keep == 0) return {Eigen::MatrixXd::Zero(m.rows(), m.cols()), 0.0};
    const Eigen::VectorXd shrunk = (s.head(keep).array() - tau).matrix();
    return {svd.matrixU().leftCols(keep) * shrunk.asDiagonal() * svd.matrixV().leftCols(keep).transpose(),
            shrunk.sum()};
}

}  // namespace

Eigen::MatrixXd svt(const Eigen::MatrixXd& m, double tau) {
    if (tau < 0.0) throw std::invalid_argument("svt: tau must be >= 0");
    if (m.size() == 0 || tau == 0.0) return m;
    return threshold_singular_values(m, tau).matrix;
}

Eigen::MatrixXd shrink(const Eigen::MatrixXd& m, double lambda) {
    if (lambda < 0.0) throw std::invalid_argument("shrink: lambda must be >= 0");
    return m.unaryExpr([lambda](double v) {
        const double mag = std::abs(v) - lambda;
        if (mag <= 0.0) return 0.0;
        return v > 0.0 ? mag : -mag;
    });
}

double default_lambda(Eigen::Index rows, Eigen::Index cols) {
    return 3.0 / std::sqrt(static_cast<double>(std::max(rows, cols)));
}

double default_tau(const Eigen::MatrixXd& d) {
    if (d.size() == 0) return 1.0;
    Eigen::BDCSVD<Eigen::MatrixXd> svd(d);
    const double smax = svd.singularValues().size() > 0 ? svd.singularValues()(0) : 0.0;
    return smax > 0.0 ? 0.006 * smax : 1.0;
}

double nuclear_norm(const Eigen::MatrixXd& m) {
    if (m.size() == 0) return 0.0;
    Eigen::BDCSVD<Eigen::MatrixXd> svd(m);
    return svd.singularValues().sum();
}

double objective(const Eigen::MatrixXd& l, const Eigen::MatrixXd& x, const Eigen::MatrixXd& n, double tau,
                 double lambda) {
    return tau * nuclear_norm(l) + lambda * x.cwiseAbs().sum() + 0.5 * n.squaredNorm();
}

BlockReport decompose_matrix(const Eigen::MatrixXd& d, double tau, double lambda, double tol, int max_iter,
                             Eigen::MatrixXd& l, Eigen::MatrixXd& x, Eigen::MatrixXd& n) {
    if (!d.allFinite()) throw NumericalError("decompose: input contains non-finite samples");
    BlockReport report;
    report.tau = tau;
    report.lambda = lambda;
    l = Eigen::MatrixXd::Zero(d.rows(), d.cols());
    x = Eigen::MatrixXd::Zero(d.rows(), d.cols());
    n = d;

    const double dnorm = d.norm();
    report.objective.push_back(0.5 * d.squaredNorm());
    if (dnorm == 0.0) {
        report.converged = true;
        return report;
    }

    for (int it = 1; it <= max_iter; ++it) {
        // L-step: exact minimizer of tau*||L||_* + 1/2||D - X - L||^2.
        auto [l_next, nuclear] = threshold_singular_values(d - x, tau);

        // X-step: exact minimizer of lambda*||X||_1 + 1/2||D - L - X||^2.
        Eigen::MatrixXd x_next = shrink(d - l_next, lambda);

        const double change = ((l_next - l).norm() + (x_next - x).norm()) / dnorm;
        l = std::move(l_next);
        x = std::move(x_next);
        n = d - l - x;
        report.iterations = it;
        report.objective.push_back(tau * nuclear + lambda * x.cwiseAbs().sum() + 0.5 * n.squaredNorm());
        if (change < tol) {
            report.converged = true;
            break;
        }
    }
    return report;
}

Decomposition decompose(const FrameStack& stack, const DecomposeParams& params, unsigned threads) {
    params.validate(stack.frames());
    const Eigen::MatrixXd d = casorati(stack);
    if (!d.allFinite()) throw NumericalError("decompose: frame stack contains non-finite samples");

    const std::size_t total = stack.frames();
    const std::size_t window = params.window.value_or(total);
    const std::size_t n_blocks = (total + window - 1) / window;

    Decomposition out;
    out.L.resize(d.rows(), d.cols());
    out.X.resize(d.rows(), d.cols());
    out.N.resize(d.rows(), d.cols());
    out.blocks.resize(n_blocks);

    parallel_for(n_blocks, threads, [&](std::size_t b) {
        const auto first = static_cast<Eigen::Index>(b * window);
        const auto count = static_cast<Eigen::Index>(std::min(window, total - b * window));
        const Eigen::MatrixXd block = d.middleCols(first, count);
        const double tau = params.tau.value_or(default_tau(block));
        const double lambda = params.lambda.value_or(default_lambda(block.rows(), block.cols()));
        Eigen::MatrixXd l;
        Eigen::MatrixXd x;
        Eigen::MatrixXd n;
        BlockReport report = decompose_matrix(block, tau, lambda, params.tol, params.max_iter, l, x, n);
        report.first_frame = static_cast<std::size_t>(first);
        report.frames = static_cast<std::size_t>(count);
        // Distinct column ranges per block; no overlap between workers.
        out.L.middleCols(first, count) = l;
        out.X.middleCols(first, count) = x;
        out.N.middleCols(first, count) = n;
        out.blocks[b] = std::move(report);
    });

    out.converged = true;
    for (const auto& blk : out.blocks) {
        out.iterations = std::max(out.iterations, blk.iterations);
        out.converged = out.converged && blk.converged;
    }
    return out;
}

FrameStack enhance(const FrameStack& stack, const Decomposition& decomposition, Polarity polarity) {
    const Eigen::MatrixXd& x = decomposition.X;
    if (static_cast<std::size_t>(x.rows()) != stack.frame_size() || static_cast<std::size_t>(x.cols()) != stack.frames())
        throw std::invalid_argument("enhance: decomposition shape does not match the frame stack");

    const double sign = polarity == Polarity::DarkShadows ? -1.0 : 1.0;
    Eigen::MatrixXd e = (sign * x).cwiseMax(0.0);

    std::vector<std::pair<Eigen::Index, Eigen::Index>> ranges;
    for (const auto& blk : decomposition.blocks)
        ranges.emplace_back(static_cast<Eigen::Index>(blk.first_frame), static_cast<Eigen::Index>(blk.frames));
    if (ranges.empty()) ranges.emplace_back(0, e.cols());

    for (const auto& [first, count] : ranges) {
        auto block = e.middleCols(first, count);
        const double peak = block.size() > 0 ? block.maxCoeff() : 0.0;
        if (peak > 0.0)
            block /= peak;
        else
            block.setZero();
    }
    return from_casorati(e.cwiseMin(1.0), stack.rows(), stack.cols());
}

FrameStack shadow_map_raw(const FrameStack& stack, Polarity polarity) {
    if (polarity == Polarity::BrightShadows) return stack;
    std::vector<float> data(stack.data().size());
    std::transform(stack.data().begin(), stack.data().end(), data.begin(), [](float v) { return 1.0F - v; });
    return FrameStack(stack.frames(), stack.rows(), stack.cols(), std::move(data));
}

}  // namespace vsartrack::mtsd
