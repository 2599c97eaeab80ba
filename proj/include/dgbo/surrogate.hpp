#pragma once

#include "dgbo/types.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace dgbo {

/// Squared-exponential ARD kernel hyperparameters.
struct KernelParams {
    Vector lengthscales;
    double signal_variance = 1.0;
    double noise_variance = 0.0;

    std::size_t dim() const { return static_cast<std::size_t>(lengthscales.size()); }
    void validate() const;

    /// Packs to [log l_1 .. log l_d, log signal, log noise]. noise_variance
    /// must be positive to be packed.
    Vector to_log() const;
    static KernelParams from_log(const Vector& theta);
};

/// k(a, b) = signal_variance * exp(-1/2 sum_i ((a_i - b_i) / l_i)^2)
double kernel(const Vector& a, const Vector& b, const KernelParams& p);

struct FitSettings {
    /// Initializations scored by log marginal likelihood.
    int n_starts = 8;
    /// Best-scoring initializations that are then refined by L-BFGS.
    int n_refine = 2;
    int max_iterations = 60;
    double lengthscale_min = 1e-3;
    double lengthscale_max = 1e3;
    double signal_min = 1e-2;
    double signal_max = 1e2;
    double noise_min = 1e-8;
    double noise_max = 1e-1;
    std::uint64_t seed = 0;
    /// Previous solution; used as the first start when present.
    std::optional<KernelParams> warm_start;
    /// Additional starts evaluated on top of n_starts (clamped to bounds).
    std::vector<KernelParams> extra_starts;
};

struct LogLikelihood {
    double value = 0.0;
    /// d value / d log-hyperparameter, in KernelParams::to_log() order.
    Vector gradient;
};

struct Prediction {
    double mean = 0.0;
    /// Latent (noise-free) posterior variance, original target scale.
    double variance = 0.0;
};

/// Exact GP regression on box-normalized inputs with internally
/// standardized targets.
///
/// Immutable once built; prediction is read-only and safe to share across
/// threads.
class GpSurrogate {
public:
    GpSurrogate() = default;

    /// Conditions on (X, y) with fixed hyperparameters. X holds one point per
    /// row. Throws InvalidData for non-finite or mismatched inputs,
    /// NumericalFailure when the factorization fails at the largest jitter.
    static GpSurrogate condition(const Matrix& X, const Vector& y, const KernelParams& params);

    /// Maximizes the log marginal likelihood over hyperparameters by
    /// multi-start projected L-BFGS in log space, then conditions.
    static GpSurrogate fit(const Matrix& X, const Vector& y, const FitSettings& settings);

    Prediction predict(const Vector& x) const;
    /// Batched prediction; rows of X are query points.
    void predict(const Matrix& X, Vector& mean, Vector& variance) const;

    /// Log marginal likelihood of the standardized targets under the cached
    /// factorization, with its gradient in log-hyperparameter space.
    /// Throws InternalError on a surrogate that was never conditioned.
    LogLikelihood log_marginal_likelihood() const;

    const KernelParams& params() const { return params_; }
    std::size_t size() const { return static_cast<std::size_t>(X_.rows()); }
    std::size_t dim() const { return static_cast<std::size_t>(X_.cols()); }
    const Matrix& inputs() const { return X_; }
    double target_mean() const { return y_mean_; }
    double target_scale() const { return y_scale_; }
    /// Diagonal jitter that was needed for the factorization (0 if none).
    double jitter() const { return jitter_; }
    /// Lower-triangular factor of K + (noise + jitter) I in standardized units.
    const Matrix& cholesky_factor() const { return chol_; }
    /// The kernel matrix (with noise and jitter) the factor was built from.
    Matrix covariance() const;

private:
    Matrix X_;
    Vector y_std_;
    double y_mean_ = 0.0;
    double y_scale_ = 1.0;
    KernelParams params_;
    Matrix chol_;
    Vector alpha_;
    double jitter_ = 0.0;
    bool ready_ = false;
};

/// Log marginal likelihood of already standardized targets for arbitrary
/// hyperparameters, with gradient. Throws NumericalFailure when no jitter
/// level yields a valid factorization.
LogLikelihood log_marginal_likelihood(const Matrix& X, const Vector& y_standardized, const KernelParams& params);

}  // namespace dgbo
