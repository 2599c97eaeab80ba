#include "dgbo/surrogate.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numbers>
#include <random>
#include <string>

namespace dgbo {

void KernelParams::validate() const
{
    if (lengthscales.size() == 0) throw InvalidInput("kernel params: no lengthscales");
    for (Eigen::Index i = 0; i < lengthscales.size(); ++i) {
        if (!(lengthscales[i] > 0.0) || !std::isfinite(lengthscales[i])) {
            throw InvalidInput("kernel params: lengthscale " + std::to_string(i) + " must be positive");
        }
    }
    if (!(signal_variance > 0.0) || !std::isfinite(signal_variance)) {
        throw InvalidInput("kernel params: signal variance must be positive");
    }
    if (!(noise_variance >= 0.0) || !std::isfinite(noise_variance)) {
        throw InvalidInput("kernel params: noise variance must be non-negative");
    }
}

Vector KernelParams::to_log() const
{
    const auto d = lengthscales.size();
    Vector theta(d + 2);
    theta.head(d) = lengthscales.array().log().matrix();
    theta[d] = std::log(signal_variance);
    theta[d + 1] = std::log(noise_variance);
    return theta;
}

KernelParams KernelParams::from_log(const Vector& theta)
{
    const auto d = theta.size() - 2;
    KernelParams p;
    p.lengthscales = theta.head(d).array().exp().matrix();
    p.signal_variance = std::exp(theta[d]);
    p.noise_variance = std::exp(theta[d + 1]);
    return p;
}

double kernel(const Vector& a, const Vector& b, const KernelParams& p)
{
    if (a.size() != b.size() || a.size() != p.lengthscales.size()) {
        throw DimensionError("kernel: dimension mismatch between inputs and lengthscales");
    }
    const double r2 = ((a - b).array() / p.lengthscales.array()).square().sum();
    return p.signal_variance * std::exp(-0.5 * r2);
}

namespace {

constexpr double kJitterStart = 1e-10;
constexpr double kJitterMax = 1e-4;

Matrix kernel_matrix(const Matrix& X, const KernelParams& p)
{
    const Eigen::Index n = X.rows();
    const Matrix Xs = X.array().rowwise() / p.lengthscales.transpose().array();
    Matrix K(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        K(i, i) = p.signal_variance;
        for (Eigen::Index j = 0; j < i; ++j) {
            const double r2 = (Xs.row(i) - Xs.row(j)).squaredNorm();
            K(i, j) = K(j, i) = p.signal_variance * std::exp(-0.5 * r2);
        }
    }
    return K;
}

bool factor_ok(const Eigen::LLT<Matrix>& llt, double max_diag)
{
    if (llt.info() != Eigen::Success) return false;
    const Matrix& L = llt.matrixLLT();
    for (Eigen::Index i = 0; i < L.rows(); ++i) {
        const double p = L(i, i);
        if (!std::isfinite(p) || !(p * p > 1e-14 * max_diag)) return false;
    }
    return true;
}

struct Factorization {
    Eigen::LLT<Matrix> llt;
    double jitter = 0.0;
};

// Factors K + noise I, escalating a diagonal jitter from 1e-10 to 1e-4 times
// the signal variance by factors of ten.
Factorization factorize(Matrix K, const KernelParams& p)
{
    const Eigen::Index n = K.rows();
    K.diagonal().array() += p.noise_variance;
    const double max_diag = K.diagonal().maxCoeff();
    Factorization f;
    f.llt.compute(K);
    if (factor_ok(f.llt, max_diag)) return f;
    for (double rel = kJitterStart; rel <= kJitterMax * (1.0 + 1e-9); rel *= 10.0) {
        const double jitter = rel * p.signal_variance;
        Matrix Kj = K;
        Kj.diagonal().array() += jitter;
        f.llt.compute(Kj);
        if (factor_ok(f.llt, max_diag + jitter)) {
            f.jitter = jitter;
            return f;
        }
    }
    throw NumericalFailure("gp: covariance factorization failed at maximum jitter (n=" + std::to_string(n) + ")");
}

void check_data(const Matrix& X, const Vector& y)
{
    if (X.rows() != y.size()) {
        throw InvalidData("gp: " + std::to_string(X.rows()) + " inputs but " + std::to_string(y.size()) + " targets");
    }
    if (X.rows() == 0 || X.cols() == 0) throw InvalidData("gp: empty training set");
    if (!X.allFinite()) throw InvalidData("gp: non-finite training input");
    if (!y.allFinite()) throw InvalidData("gp: non-finite training target");
}

LogLikelihood lml_from_factor(const Matrix& X, const Vector& y, const KernelParams& p, const Matrix& Kf,
                              const Factorization& f, bool with_gradient)
{
    const Eigen::Index n = X.rows();
    const Eigen::Index d = X.cols();
    const Vector alpha = f.llt.solve(y);
    const Matrix& L = f.llt.matrixLLT();
    double log_det_half = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) log_det_half += std::log(L(i, i));

    LogLikelihood out;
    out.value = -0.5 * y.dot(alpha) - log_det_half - 0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
    if (!with_gradient) return out;

    // dL/dtheta = 1/2 tr((alpha alpha^T - K^-1) dK/dtheta)
    const Matrix Linv = L.triangularView<Eigen::Lower>().solve(Matrix::Identity(n, n));
    Matrix W = alpha * alpha.transpose();
    W.selfadjointView<Eigen::Lower>().rankUpdate(Linv.transpose(), -1.0);

    out.gradient = Vector::Zero(d + 2);
    const Vector inv_l2 = p.lengthscales.array().square().inverse().matrix();
    double g_signal = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        g_signal += 0.5 * W(i, i) * Kf(i, i);
        for (Eigen::Index j = 0; j < i; ++j) {
            const double w = W(i, j) * Kf(i, j);
            g_signal += w;
            for (Eigen::Index k = 0; k < d; ++k) {
                const double diff = X(i, k) - X(j, k);
                out.gradient[k] += w * diff * diff * inv_l2[k];
            }
        }
    }
    out.gradient[d] = g_signal;
    out.gradient[d + 1] = 0.5 * p.noise_variance * W.trace();
    return out;
}

struct Standardized {
    Vector y;
    double mean = 0.0;
    double scale = 1.0;
};

Standardized standardize(const Vector& y)
{
    Standardized s;
    s.mean = y.mean();
    const double var = (y.array() - s.mean).square().mean();
    const double sd = std::sqrt(var);
    s.scale = (sd > 1e-12 * std::max(1.0, std::abs(s.mean))) ? sd : 1.0;
    s.y = (y.array() - s.mean) / s.scale;
    return s;
}

// Projected L-BFGS minimization of `objective` within [lo, hi].
template <typename F>
double minimize_box(F&& objective, Vector& x, const Vector& lo, const Vector& hi, int max_iterations)
{
    constexpr std::size_t kMemory = 8;
    const Eigen::Index n = x.size();
    x = x.cwiseMax(lo).cwiseMin(hi);

    // grad == nullptr requests the value only.
    auto evaluate = [&](const Vector& at, Vector* grad) -> double {
        try {
            return objective(at, grad);
        } catch (const NumericalFailure&) {
            if (grad) *grad = Vector::Zero(n);
            return std::numeric_limits<double>::infinity();
        }
    };

    Vector g(n);
    double fx = evaluate(x, &g);
    if (!std::isfinite(fx)) return fx;

    std::deque<Vector> S, Y;
    std::deque<double> rho;

    auto projected = [&](const Vector& grad) {
        Vector pg = grad;
        for (Eigen::Index i = 0; i < n; ++i) {
            const bool at_lo = x[i] <= lo[i] && grad[i] > 0.0;
            const bool at_hi = x[i] >= hi[i] && grad[i] < 0.0;
            if (at_lo || at_hi) pg[i] = 0.0;
        }
        return pg;
    };

    for (int it = 0; it < max_iterations; ++it) {
        const Vector pg = projected(g);
        if (pg.lpNorm<Eigen::Infinity>() < 1e-6) break;

        // Two-loop recursion on the free variables.
        Vector q = pg;
        std::vector<double> a(S.size());
        for (std::size_t k = S.size(); k-- > 0;) {
            a[k] = rho[k] * S[k].dot(q);
            q -= a[k] * Y[k];
        }
        if (!S.empty()) q *= S.back().dot(Y.back()) / Y.back().squaredNorm();
        for (std::size_t k = 0; k < S.size(); ++k) {
            const double b = rho[k] * Y[k].dot(q);
            q += (a[k] - b) * S[k];
        }
        Vector dir = -q;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (pg[i] == 0.0) dir[i] = 0.0;
        }
        if (dir.dot(pg) >= 0.0) {
            S.clear();
            Y.clear();
            rho.clear();
            dir = -pg;
        }

        double step = S.empty() ? std::min(1.0, 1.0 / pg.norm()) : 1.0;
        Vector x_new(n), g_new(n);
        double f_new = fx;
        bool accepted = false;
        for (int ls = 0; ls < 40; ++ls) {
            x_new = (x + step * dir).cwiseMax(lo).cwiseMin(hi);
            const double decrease = g.dot(x_new - x);
            if (decrease >= 0.0) {
                step *= 0.5;
                continue;
            }
            f_new = evaluate(x_new, nullptr);
            if (std::isfinite(f_new) && f_new <= fx + 1e-4 * decrease) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;
        f_new = evaluate(x_new, &g_new);
        if (!std::isfinite(f_new)) break;

        const Vector s = x_new - x;
        const Vector yv = g_new - g;
        const double sy = s.dot(yv);
        if (sy > 1e-10 * s.norm() * yv.norm()) {
            S.push_back(s);
            Y.push_back(yv);
            rho.push_back(1.0 / sy);
            if (S.size() > kMemory) {
                S.pop_front();
                Y.pop_front();
                rho.pop_front();
            }
        }
        const double change = fx - f_new;
        x = x_new;
        g = g_new;
        fx = f_new;
        if (change < 1e-10 * std::max(1.0, std::abs(fx))) break;
    }
    return fx;
}

}  // namespace

LogLikelihood log_marginal_likelihood(const Matrix& X, const Vector& y_standardized, const KernelParams& params)
{
    check_data(X, y_standardized);
    params.validate();
    if (params.dim() != static_cast<std::size_t>(X.cols())) {
        throw DimensionError("gp: lengthscale count does not match input dimension");
    }
    const Matrix Kf = kernel_matrix(X, params);
    const Factorization f = factorize(Kf, params);
    return lml_from_factor(X, y_standardized, params, Kf, f, true);
}

GpSurrogate GpSurrogate::condition(const Matrix& X, const Vector& y, const KernelParams& params)
{
    check_data(X, y);
    params.validate();
    if (params.dim() != static_cast<std::size_t>(X.cols())) {
        throw DimensionError("gp: lengthscale count does not match input dimension");
    }
    GpSurrogate s;
    s.X_ = X;
    const Standardized st = standardize(y);
    s.y_std_ = st.y;
    s.y_mean_ = st.mean;
    s.y_scale_ = st.scale;
    s.params_ = params;
    const Factorization f = factorize(kernel_matrix(X, params), params);
    s.chol_ = f.llt.matrixL();
    s.alpha_ = f.llt.solve(s.y_std_);
    s.jitter_ = f.jitter;
    s.ready_ = true;
    return s;
}

GpSurrogate GpSurrogate::fit(const Matrix& X, const Vector& y, const FitSettings& settings)
{
    check_data(X, y);
    const auto d = X.cols();
    const Standardized st = standardize(y);

    Vector lo(d + 2), hi(d + 2);
    lo.head(d).setConstant(std::log(settings.lengthscale_min));
    hi.head(d).setConstant(std::log(settings.lengthscale_max));
    lo[d] = std::log(settings.signal_min);
    hi[d] = std::log(settings.signal_max);
    lo[d + 1] = std::log(settings.noise_min);
    hi[d + 1] = std::log(settings.noise_max);

    std::vector<Vector> starts;
    auto add_start = [&](const KernelParams& p) {
        if (p.dim() != static_cast<std::size_t>(d)) {
            throw DimensionError("gp fit: start lengthscale count does not match input dimension");
        }
        KernelParams q = p;
        q.noise_variance = std::max(q.noise_variance, settings.noise_min);
        starts.push_back(q.to_log().cwiseMax(lo).cwiseMin(hi));
    };
    if (settings.warm_start) {
        add_start(*settings.warm_start);
    } else {
        KernelParams p{Vector::Constant(d, 0.5), 1.0, 1e-4};
        add_start(p);
    }
    std::mt19937_64 rng(settings.seed);
    std::uniform_real_distribution<double> log_l(std::log(0.05), std::log(2.0));
    std::uniform_real_distribution<double> log_s(std::log(0.2), std::log(5.0));
    std::uniform_real_distribution<double> log_n(std::log(1e-6), std::log(1e-2));
    for (int s = 1; s < settings.n_starts; ++s) {
        Vector theta(d + 2);
        for (Eigen::Index i = 0; i < d; ++i) theta[i] = log_l(rng);
        theta[d] = log_s(rng);
        theta[d + 1] = log_n(rng);
        starts.push_back(theta.cwiseMax(lo).cwiseMin(hi));
    }
    for (const auto& p : settings.extra_starts) add_start(p);

    auto negative_lml = [&](const Vector& theta, Vector* grad) {
        const KernelParams p = KernelParams::from_log(theta);
        const Matrix Kf = kernel_matrix(X, p);
        const Factorization f = factorize(Kf, p);
        const LogLikelihood l = lml_from_factor(X, st.y, p, Kf, f, grad != nullptr);
        if (grad) *grad = -l.gradient;
        return -l.value;
    };

    // Score every start, then refine the best n_refine of them.
    std::vector<std::pair<double, std::size_t>> scored;
    for (std::size_t i = 0; i < starts.size(); ++i) {
        double value = std::numeric_limits<double>::infinity();
        try {
            const KernelParams p = KernelParams::from_log(starts[i]);
            const Matrix Kf = kernel_matrix(X, p);
            value = -lml_from_factor(X, st.y, p, Kf, factorize(Kf, p), false).value;
        } catch (const NumericalFailure&) {
        }
        scored.emplace_back(std::isfinite(value) ? value : std::numeric_limits<double>::infinity(), i);
    }
    std::stable_sort(scored.begin(), scored.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    const std::size_t n_refine = std::min<std::size_t>(std::max(settings.n_refine, 1), scored.size());

    double best = std::numeric_limits<double>::infinity();
    Vector best_theta;
    for (std::size_t r = 0; r < n_refine; ++r) {
        if (!std::isfinite(scored[r].first)) continue;
        Vector theta = starts[scored[r].second];
        const double value = minimize_box(negative_lml, theta, lo, hi, settings.max_iterations);
        if (value < best) {
            best = value;
            best_theta = theta;
        }
    }
    if (!std::isfinite(best)) {
        throw NumericalFailure("gp fit: no hyperparameter start produced a valid factorization");
    }
    return condition(X, y, KernelParams::from_log(best_theta));
}

void GpSurrogate::predict(const Matrix& Q, Vector& mean, Vector& variance) const
{
    if (!ready_) throw InternalError("gp: predict on an unconditioned surrogate");
    if (Q.cols() != X_.cols()) {
        throw DimensionError("gp predict: query dimension " + std::to_string(Q.cols()) + ", expected " +
                             std::to_string(X_.cols()));
    }
    const Eigen::Index m = Q.rows();
    const Eigen::Index n = X_.rows();
    const Eigen::RowVectorXd inv_l = params_.lengthscales.transpose().array().inverse().matrix();
    Matrix Ks(m, n);
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            const double r2 = ((Q.row(i) - X_.row(j)).array() * inv_l.array()).square().sum();
            Ks(i, j) = params_.signal_variance * std::exp(-0.5 * r2);
        }
    }
    mean = (Ks * alpha_).array() * y_scale_ + y_mean_;
    const Matrix V = chol_.triangularView<Eigen::Lower>().solve(Ks.transpose());
    variance.resize(m);
    const double scale2 = y_scale_ * y_scale_;
    for (Eigen::Index i = 0; i < m; ++i) {
        double v = params_.signal_variance - V.col(i).squaredNorm();
        if (v < 0.0) {
            if (v < -1e-10) {
                throw NumericalFailure("gp predict: negative posterior variance " + std::to_string(v));
            }
            v = 0.0;
        }
        variance[i] = v * scale2;
    }
}

Prediction GpSurrogate::predict(const Vector& x) const
{
    Vector mean, variance;
    predict(Matrix(x.transpose()), mean, variance);
    return {mean[0], variance[0]};
}

LogLikelihood GpSurrogate::log_marginal_likelihood() const
{
    if (!ready_) throw InternalError("gp: log marginal likelihood requested before conditioning");
    if (alpha_.size() != X_.rows() || chol_.rows() != X_.rows()) {
        throw InternalError("gp: cached factorization does not match training set");
    }
    const Matrix Kf = kernel_matrix(X_, params_);
    Factorization f;
    Matrix K = Kf;
    K.diagonal().array() += params_.noise_variance + jitter_;
    f.llt.compute(K);
    f.jitter = jitter_;
    KernelParams p = params_;
    return lml_from_factor(X_, y_std_, p, Kf, f, true);
}

Matrix GpSurrogate::covariance() const
{
    if (!ready_) throw InternalError("gp: covariance requested before conditioning");
    Matrix K = kernel_matrix(X_, params_);
    K.diagonal().array() += params_.noise_variance + jitter_;
    return K;
}

}  // namespace dgbo
