#include "dgbo/acquisition.hpp"

#include <boost/random/sobol.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

namespace dgbo {

std::string to_string(ScheduleKind kind)
{
    switch (kind) {
    case ScheduleKind::constant:
        return "constant";
    case ScheduleKind::reverse_linear:
        return "reverse_linear";
    }
    return "unknown";
}

ScheduleKind schedule_kind_from_string(const std::string& name)
{
    if (name == "constant") return ScheduleKind::constant;
    if (name == "reverse_linear") return ScheduleKind::reverse_linear;
    throw InvalidInput("unknown schedule kind '" + name + "'");
}

void AnnealingSchedule::validate() const
{
    if (!(beta0 >= 0.0) || !std::isfinite(beta0)) throw InvalidInput("schedule: beta0 must be non-negative");
    if (!(c >= 0.0) || !std::isfinite(c)) throw InvalidInput("schedule: c must be non-negative");
}

double AnnealingSchedule::beta(std::size_t t) const
{
    if (kind == ScheduleKind::constant) return beta0;
    return beta0 + c * static_cast<double>(t);
}

double ucb(double mean, double variance, double beta)
{
    if (variance < 0.0) throw InvalidInput("ucb: negative variance");
    if (beta < 0.0) throw InvalidInput("ucb: negative beta");
    return mean + std::sqrt(beta) * std::sqrt(variance);
}

bool dominates(const Objectives2& a, const Objectives2& b)
{
    return a[0] <= b[0] && a[1] <= b[1] && (a[0] < b[0] || a[1] < b[1]);
}

ParetoFront::ParetoFront(const std::vector<Objectives2>& candidates)
{
    for (const auto& p : candidates) insert(p);
}

bool ParetoFront::insert(const Objectives2& p)
{
    if (!std::isfinite(p[0]) || !std::isfinite(p[1])) throw InvalidInput("pareto front: non-finite point");
    for (const auto& q : points_) {
        if (q[0] <= p[0] && q[1] <= p[1]) return false;
    }
    std::erase_if(points_, [&](const Objectives2& q) { return dominates(p, q); });
    const auto pos = std::lower_bound(points_.begin(), points_.end(), p,
                                      [](const Objectives2& a, const Objectives2& b) { return a[0] < b[0]; });
    points_.insert(pos, p);
    return true;
}

double ParetoFront::hypervolume(const Objectives2& ref) const
{
    std::vector<Objectives2> inside;
    for (const auto& p : points_) {
        if (p[0] < ref[0] && p[1] < ref[1]) inside.push_back(p);
    }
    double hv = 0.0;
    for (std::size_t i = 0; i < inside.size(); ++i) {
        const double next = (i + 1 < inside.size()) ? inside[i + 1][0] : ref[0];
        hv += (next - inside[i][0]) * (ref[1] - inside[i][1]);
    }
    return hv;
}

namespace {

// E[(z - Y)^+] for Y ~ N(mu, sigma^2).
double expected_shortfall(double z, double mu, double sigma)
{
    if (sigma <= 0.0) return std::max(z - mu, 0.0);
    const double u = (z - mu) / sigma;
    const double cdf = 0.5 * std::erfc(-u / std::sqrt(2.0));
    const double pdf = std::exp(-0.5 * u * u) / std::sqrt(2.0 * std::numbers::pi);
    return (z - mu) * cdf + sigma * pdf;
}

}  // namespace

double ehvi_2d(const ParetoFront& front, const Objectives2& ref, const Objectives2& mean, const Objectives2& stddev)
{
    if (stddev[0] < 0.0 || stddev[1] < 0.0) throw InvalidInput("ehvi: negative standard deviation");
    for (const auto& p : front.points()) {
        if (p[0] > ref[0] || p[1] > ref[1]) {
            throw InvalidReferencePoint("ehvi: reference point is not dominated by every front point");
        }
    }
    const auto& pts = front.points();
    const std::size_t k = pts.size();
    double total = 0.0;
    double psi_prev = 0.0;  // psi_1(a_0 = -inf)
    for (std::size_t i = 0; i <= k; ++i) {
        const double a_next = (i < k) ? pts[i][0] : ref[0];
        const double b = (i == 0) ? ref[1] : pts[i - 1][1];
        const double psi_next = expected_shortfall(a_next, mean[0], stddev[0]);
        const double width = psi_next - psi_prev;
        if (width > 0.0) total += width * expected_shortfall(b, mean[1], stddev[1]);
        psi_prev = psi_next;
    }
    return std::max(total, 0.0);
}

Matrix sobol_candidates(const Box& box, std::size_t count, std::mt19937_64& rng)
{
    const std::size_t d = box.dim();
    boost::random::sobol engine(d);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Vector shift(d);
    for (std::size_t j = 0; j < d; ++j) shift[static_cast<Eigen::Index>(j)] = unit(rng);

    const double scale = 1.0 / (static_cast<double>(engine.max()) + 1.0);
    Matrix out(count, d);
    for (std::size_t i = 0; i < count; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            double u = static_cast<double>(engine()) * scale + shift[static_cast<Eigen::Index>(j)];
            u -= std::floor(u);
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                box.lower[static_cast<Eigen::Index>(j)] + u * (box.upper[static_cast<Eigen::Index>(j)] -
                                                               box.lower[static_cast<Eigen::Index>(j)]);
        }
    }
    return out;
}

namespace {

double sanitize(double v) { return std::isnan(v) ? -std::numeric_limits<double>::infinity() : v; }

}  // namespace

Vector maximize_acquisition(const AcquisitionFunction& acquisition, const Box& box, std::mt19937_64& rng,
                            const MaximizerSettings& settings)
{
    box.validate();
    const std::size_t budget = std::max<std::size_t>(settings.budget, 1);
    const Matrix candidates = sobol_candidates(box, budget, rng);
    const Vector values = acquisition(candidates).unaryExpr(&sanitize);

    std::vector<std::size_t> order(budget);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return values[static_cast<Eigen::Index>(a)] > values[static_cast<Eigen::Index>(b)];
    });

    Vector best = candidates.row(static_cast<Eigen::Index>(order[0])).transpose();
    double best_value = values[static_cast<Eigen::Index>(order[0])];

    const std::size_t starts = std::min(settings.refine_starts, budget);
    const Eigen::Index d = static_cast<Eigen::Index>(box.dim());
    for (std::size_t s = 0; s < starts; ++s) {
        Vector x = candidates.row(static_cast<Eigen::Index>(order[s])).transpose();
        double fx = values[static_cast<Eigen::Index>(order[s])];
        Vector step = settings.initial_step * box.width();
        for (std::size_t sweep = 0; sweep < settings.sweeps; ++sweep) {
            for (Eigen::Index j = 0; j < d; ++j) {
                Matrix trial(2, d);
                trial.row(0) = x.transpose();
                trial.row(1) = x.transpose();
                trial(0, j) = std::min(x[j] + step[j], box.upper[j]);
                trial(1, j) = std::max(x[j] - step[j], box.lower[j]);
                const Vector tv = acquisition(trial).unaryExpr(&sanitize);
                const Eigen::Index pick = (tv[1] > tv[0]) ? 1 : 0;
                if (tv[pick] > fx) {
                    fx = tv[pick];
                    x = trial.row(pick).transpose();
                }
            }
            step *= 0.5;
        }
        if (fx > best_value) {
            best_value = fx;
            best = x;
        }
    }
    return best;
}

}  // namespace dgbo
