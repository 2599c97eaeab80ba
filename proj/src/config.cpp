#include "dgbo/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace dgbo {

using nlohmann::json;

namespace {

// Typed access to one JSON object with its dotted path for diagnostics.
class Node {
public:
    Node(const json& value, std::string path) : value_(value), path_(std::move(path))
    {
        if (!value_.is_object()) fail("expected an object");
    }

    [[noreturn]] void fail(const std::string& what) const
    {
        throw ConfigError((path_.empty() ? std::string("config") : path_) + ": " + what);
    }

    std::string child(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    void allow_only(std::initializer_list<const char*> keys) const
    {
        const std::set<std::string> allowed(keys.begin(), keys.end());
        for (const auto& [key, _] : value_.items()) {
            if (!allowed.count(key)) throw ConfigError(child(key) + ": unknown key");
        }
    }

    bool has(const std::string& key) const { return value_.contains(key) && !value_.at(key).is_null(); }

    const json& at(const std::string& key) const
    {
        if (!has(key)) throw ConfigError(child(key) + ": required field is missing");
        return value_.at(key);
    }

    Node object(const std::string& key) const { return Node(at(key), child(key)); }

    double number(const std::string& key) const
    {
        const json& v = at(key);
        if (!v.is_number()) throw ConfigError(child(key) + ": expected a number");
        return v.get<double>();
    }

    double number(const std::string& key, double fallback) const { return has(key) ? number(key) : fallback; }

    std::uint64_t unsigned_int(const std::string& key) const
    {
        const json& v = at(key);
        if (v.is_number_unsigned()) return v.get<std::uint64_t>();
        if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
        throw ConfigError(child(key) + ": expected a non-negative integer");
    }

    std::uint64_t unsigned_int(const std::string& key, std::uint64_t fallback) const
    {
        return has(key) ? unsigned_int(key) : fallback;
    }

    std::size_t count(const std::string& key, std::size_t fallback) const
    {
        return static_cast<std::size_t>(unsigned_int(key, fallback));
    }

    std::string string(const std::string& key, const std::string& fallback) const
    {
        if (!has(key)) return fallback;
        const json& v = at(key);
        if (!v.is_string()) throw ConfigError(child(key) + ": expected a string");
        return v.get<std::string>();
    }

    // A scalar broadcast to `n` entries, or an array of exactly `n` numbers.
    Vector vector(const std::string& key, std::size_t n) const
    {
        const json& v = at(key);
        if (v.is_number()) return Vector::Constant(static_cast<Eigen::Index>(n), v.get<double>());
        if (!v.is_array()) throw ConfigError(child(key) + ": expected a number or an array of numbers");
        if (v.size() != n) {
            throw ConfigError(child(key) + ": expected " + std::to_string(n) + " entries, got " +
                              std::to_string(v.size()));
        }
        Vector out(static_cast<Eigen::Index>(n));
        for (std::size_t i = 0; i < n; ++i) {
            if (!v[i].is_number()) throw ConfigError(child(key) + "[" + std::to_string(i) + "]: expected a number");
            out[static_cast<Eigen::Index>(i)] = v[i].get<double>();
        }
        return out;
    }

    std::vector<std::size_t> indices(const std::string& key) const
    {
        const json& v = at(key);
        if (!v.is_array()) throw ConfigError(child(key) + ": expected an array of indices");
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!v[i].is_number_integer() || v[i].get<std::int64_t>() < 0) {
                throw ConfigError(child(key) + "[" + std::to_string(i) + "]: expected a non-negative integer");
            }
            out.push_back(v[i].get<std::size_t>());
        }
        return out;
    }

    std::vector<KnobPair> pairs(const std::string& key) const
    {
        const json& v = at(key);
        if (!v.is_array()) throw ConfigError(child(key) + ": expected an array of [delay, ref] index pairs");
        std::vector<KnobPair> out;
        for (std::size_t i = 0; i < v.size(); ++i) {
            const json& p = v[i];
            const bool ok = p.is_array() && p.size() == 2 && p[0].is_number_integer() && p[1].is_number_integer() &&
                            p[0].get<std::int64_t>() >= 0 && p[1].get<std::int64_t>() >= 0;
            if (!ok) throw ConfigError(child(key) + "[" + std::to_string(i) + "]: expected [delay, ref] indices");
            out.push_back({p[0].get<std::size_t>(), p[1].get<std::size_t>()});
        }
        return out;
    }

    const std::string& path() const { return path_; }

private:
    const json& value_;
    std::string path_;
};

// Runs `check`, rethrowing library validation errors as ConfigError under `path`.
template <typename F>
void checked(const std::string& path, F&& check)
{
    try {
        check();
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        std::string what = e.what();
        if (what.rfind(path + ": ", 0) == 0) what.erase(0, path.size() + 2);
        throw ConfigError(path + ": " + what);
    }
}

DriftModel parse_noise(const Node& n)
{
    n.allow_only({"rate_um_per_eval", "drift_nm_per_min", "seconds_per_eval", "jitter_rms_um", "seed"});
    DriftModel m;
    m.jitter_rms_um = n.number("jitter_rms_um", m.jitter_rms_um);
    m.seed = n.unsigned_int("seed", 0);
    const bool cadence = n.has("drift_nm_per_min") || n.has("seconds_per_eval");
    if (cadence && n.has("rate_um_per_eval")) {
        n.fail("give either rate_um_per_eval or drift_nm_per_min with seconds_per_eval, not both");
    }
    if (cadence) {
        checked(n.path(), [&] {
            m = DriftModel::from_cadence(n.number("drift_nm_per_min"), n.number("seconds_per_eval"), m.jitter_rms_um,
                                         m.seed);
        });
    } else {
        m.rate_um_per_eval = n.number("rate_um_per_eval", m.rate_um_per_eval);
    }
    return m;
}

SimulatorConfig parse_simulator(const Node& n)
{
    n.allow_only({"dim", "pairs", "box", "theta_star", "gated_axes", "darwin_widths", "gate_order", "diff_weights",
                  "common_weights", "peak_intensity", "bpe_target", "periodic_period", "noise"});
    const SimulatorConfig base = SimulatorConfig::defaults();
    SimulatorConfig c = base;
    c.dim = n.count("dim", base.dim);
    if (c.dim == 0) throw ConfigError(n.child("dim") + ": must be positive");
    const bool default_dim = c.dim == base.dim;

    if (n.has("pairs")) {
        c.pairs = n.pairs("pairs");
    } else if (!default_dim) {
        if (c.dim % 2 != 0) throw ConfigError(n.child("pairs") + ": required when dim is odd");
        c.pairs.clear();
        for (std::size_t i = 0; i + 1 < c.dim; i += 2) c.pairs.push_back({i, i + 1});
    }

    const Node box = n.object("box");
    box.allow_only({"lower", "upper"});
    checked(box.path(), [&] { c.box = Box(box.vector("lower", c.dim), box.vector("upper", c.dim)); });

    if (n.has("theta_star")) {
        c.theta_star = n.vector("theta_star", c.dim);
    } else if (!default_dim) {
        throw ConfigError(n.child("theta_star") + ": required field is missing");
    }

    if (n.has("gated_axes")) {
        c.gated_axes = n.indices("gated_axes");
    } else if (!default_dim || n.has("pairs")) {
        c.gated_axes.clear();
        for (const auto& p : c.pairs) c.gated_axes.push_back(p.delay_index);
    }
    const std::size_t gates = c.gated_axes.size();
    const std::size_t npairs = c.pairs.size();
    c.darwin_widths = n.has("darwin_widths") ? n.vector("darwin_widths", gates)
                                             : Vector::Constant(static_cast<Eigen::Index>(gates), base.darwin_widths[0]);
    c.diff_weights = n.has("diff_weights") ? n.vector("diff_weights", npairs)
                                           : Vector::Constant(static_cast<Eigen::Index>(npairs), base.diff_weights[0]);
    c.common_weights = n.has("common_weights") ? n.vector("common_weights", npairs)
                                               : Vector::Zero(static_cast<Eigen::Index>(npairs));
    c.gate_order = n.number("gate_order", base.gate_order);
    c.peak_intensity = n.number("peak_intensity", base.peak_intensity);
    c.bpe_target = n.number("bpe_target", base.bpe_target);
    c.periodic_period = n.number("periodic_period", base.periodic_period);
    if (n.has("noise")) c.noise = parse_noise(n.object("noise"));

    checked(n.path(), [&] { c.validate(); });
    return c;
}

NormalizationBounds parse_normalization(const Node& n, const NormalizationBounds& defaults)
{
    n.allow_only({"e_min", "e_max", "i_min", "i_max"});
    NormalizationBounds b;
    b.e_min = n.number("e_min", defaults.e_min);
    b.e_max = n.number("e_max", defaults.e_max);
    b.i_min = n.number("i_min", defaults.i_min);
    b.i_max = n.number("i_max", defaults.i_max);
    checked(n.path(), [&] { b.validate(); });
    return b;
}

AnnealingSchedule parse_schedule(const Node& n)
{
    n.allow_only({"kind", "beta0", "c"});
    AnnealingSchedule s;
    checked(n.child("kind"), [&] { s.kind = schedule_kind_from_string(n.string("kind", "")); });
    s.beta0 = n.number("beta0", 1.0);
    s.c = n.number("c", s.kind == ScheduleKind::reverse_linear ? 0.01 : 0.0);
    checked(n.path(), [&] { s.validate(); });
    return s;
}

void parse_turbo(const Node& n, TurboSettings& t)
{
    n.allow_only({"length_init", "length_min", "length_max", "success_tolerance", "failure_tolerance",
                  "improvement_tolerance"});
    t.length_init = n.number("length_init", t.length_init);
    t.length_min = n.number("length_min", t.length_min);
    t.length_max = n.number("length_max", t.length_max);
    t.success_tolerance = static_cast<int>(n.count("success_tolerance", static_cast<std::size_t>(t.success_tolerance)));
    t.failure_tolerance = static_cast<int>(n.count("failure_tolerance", static_cast<std::size_t>(t.failure_tolerance)));
    t.improvement_tolerance = n.number("improvement_tolerance", t.improvement_tolerance);
    if (!(t.length_min > 0.0 && t.length_min <= t.length_init && t.length_init <= t.length_max)) {
        n.fail("need 0 < length_min <= length_init <= length_max");
    }
    if (t.success_tolerance < 1) throw ConfigError(n.child("success_tolerance") + ": must be at least 1");
    if (!(t.improvement_tolerance >= 0.0)) throw ConfigError(n.child("improvement_tolerance") + ": must be >= 0");
}

void parse_fit(const Node& n, FitSettings& f)
{
    n.allow_only({"n_starts", "n_refine", "max_iterations"});
    f.n_starts = static_cast<int>(n.count("n_starts", static_cast<std::size_t>(f.n_starts)));
    f.n_refine = static_cast<int>(n.count("n_refine", static_cast<std::size_t>(f.n_refine)));
    f.max_iterations = static_cast<int>(n.count("max_iterations", static_cast<std::size_t>(f.max_iterations)));
    if (f.n_starts < 1) throw ConfigError(n.child("n_starts") + ": must be at least 1");
    if (f.n_refine < 1) throw ConfigError(n.child("n_refine") + ": must be at least 1");
}

void parse_acquisition(const Node& n, MaximizerSettings& m)
{
    n.allow_only({"budget", "refine_starts", "sweeps", "initial_step"});
    m.budget = n.count("budget", m.budget);
    m.refine_starts = n.count("refine_starts", m.refine_starts);
    m.sweeps = n.count("sweeps", m.sweeps);
    m.initial_step = n.number("initial_step", m.initial_step);
    if (m.budget < 1) throw ConfigError(n.child("budget") + ": must be at least 1");
    if (!(m.initial_step > 0.0)) throw ConfigError(n.child("initial_step") + ": must be positive");
}

AlgorithmEntry parse_algorithm(const json& v, const std::string& path, const SimulatorConfig& sim)
{
    if (v.is_string()) {
        AlgorithmKind kind;
        checked(path, [&] { kind = algorithm_kind_from_string(v.get<std::string>()); });
        return default_algorithms({kind}, sim, 4, 150).front();
    }
    const Node n(v, path);
    n.allow_only({"kind", "label", "schedule", "pairs", "turbo", "fit", "acquisition"});
    AlgorithmKind kind;
    checked(n.child("kind"), [&] { kind = algorithm_kind_from_string(n.string("kind", "")); });
    AlgorithmEntry e = default_algorithms({kind}, sim, 4, 150).front();
    e.label = n.string("label", e.label);
    if (n.has("schedule")) e.spec.schedule = parse_schedule(n.object("schedule"));
    if (n.has("pairs")) {
        const bool uses_transform = kind == AlgorithmKind::domain_guided || kind == AlgorithmKind::transform_only;
        if (!uses_transform) throw ConfigError(n.child("pairs") + ": " + to_string(kind) + " takes no transform");
        checked(n.child("pairs"), [&] { e.spec.transform = PairedTransform(sim.dim, n.pairs("pairs")); });
    }
    if (n.has("turbo")) parse_turbo(n.object("turbo"), e.spec.turbo);
    if (n.has("fit")) parse_fit(n.object("fit"), e.spec.fit);
    if (n.has("acquisition")) parse_acquisition(n.object("acquisition"), e.spec.acquisition);
    return e;
}

json vector_json(const Vector& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

json pairs_json(const std::vector<KnobPair>& pairs)
{
    json out = json::array();
    for (const auto& p : pairs) out.push_back({p.delay_index, p.ref_index});
    return out;
}

}  // namespace

NormalizationBounds default_normalization(const SimulatorConfig& sim)
{
    return {0.0, max_error_over_box(sim), 0.0, sim.peak_intensity};
}

std::vector<AlgorithmEntry> default_algorithms(const std::vector<AlgorithmKind>& kinds, const SimulatorConfig& sim,
                                               std::size_t n_init, std::size_t budget)
{
    std::vector<AlgorithmEntry> out;
    for (AlgorithmKind k : kinds) {
        AlgorithmEntry e{to_string(k), OptimizerSpec::for_kind(k, PairedTransform(sim.dim, sim.pairs), 0)};
        e.spec.n_init = n_init;
        e.spec.budget = budget;
        out.push_back(std::move(e));
    }
    return out;
}

void CampaignConfig::validate() const
{
    checked("simulator", [&] { simulator.validate(); });
    checked("normalization", [&] { normalization.validate(); });
    if (n_trials < 1) throw ConfigError("campaign.n_trials: must be at least 1");
    if (n_init < 2) throw ConfigError("campaign.n_init: must be at least 2");
    if (!(n_init < budget)) throw ConfigError("campaign.budget: must exceed n_init");
    if (algorithms.empty()) throw ConfigError("algorithms: at least one algorithm is required");
    std::set<std::string> labels;
    for (const auto& a : algorithms) {
        if (a.label.empty()) throw ConfigError("algorithms: empty label");
        if (a.label.find_first_of("/\\") != std::string::npos) {
            throw ConfigError("algorithms: label '" + a.label + "' must not contain path separators");
        }
        if (!labels.insert(a.label).second) throw ConfigError("algorithms: duplicate label '" + a.label + "'");
        if (a.spec.n_init != n_init || a.spec.budget != budget) {
            throw ConfigError("algorithms: '" + a.label + "' disagrees with campaign budget or n_init");
        }
        if (a.spec.transform && a.spec.transform->dim() != simulator.dim) {
            throw ConfigError("algorithms: '" + a.label + "' transform dimension differs from the simulator");
        }
        a.spec.validate();
    }
}

CampaignConfig parse_config(const json& doc)
{
    const Node root(doc, "");
    root.allow_only({"simulator", "algorithms", "campaign", "normalization"});

    CampaignConfig cfg;
    cfg.simulator = parse_simulator(root.object("simulator"));

    if (root.has("campaign")) {
        const Node c = root.object("campaign");
        c.allow_only({"n_trials", "budget", "n_init", "master_seed", "output_dir", "jobs"});
        cfg.n_trials = c.count("n_trials", cfg.n_trials);
        cfg.budget = c.count("budget", cfg.budget);
        cfg.n_init = c.count("n_init", cfg.n_init);
        cfg.master_seed = c.unsigned_int("master_seed", cfg.master_seed);
        cfg.output_dir = c.string("output_dir", cfg.output_dir.string());
        cfg.jobs = c.count("jobs", cfg.jobs);
    }

    const NormalizationBounds defaults = default_normalization(cfg.simulator);
    cfg.normalization =
        root.has("normalization") ? parse_normalization(root.object("normalization"), defaults) : defaults;

    if (root.has("algorithms")) {
        const json& list = root.at("algorithms");
        if (!list.is_array()) throw ConfigError("algorithms: expected an array");
        for (std::size_t i = 0; i < list.size(); ++i) {
            cfg.algorithms.push_back(parse_algorithm(list[i], "algorithms[" + std::to_string(i) + "]", cfg.simulator));
        }
    } else {
        cfg.algorithms = default_algorithms(all_algorithm_kinds(), cfg.simulator, cfg.n_init, cfg.budget);
    }
    for (auto& a : cfg.algorithms) {
        a.spec.n_init = cfg.n_init;
        a.spec.budget = cfg.budget;
    }
    cfg.validate();
    return cfg;
}

CampaignConfig parse_config_text(const std::string& text)
{
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        std::size_t line = 1, column = 1;
        const std::size_t end = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
        for (std::size_t i = 0; i < end; ++i) {
            if (text[i] == '\n') {
                ++line;
                column = 1;
            } else {
                ++column;
            }
        }
        throw ConfigError("syntax error at line " + std::to_string(line) + ", column " + std::to_string(column) +
                          ": " + e.what());
    }
    return parse_config(doc);
}

CampaignConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw IoError("cannot read config file '" + path.string() + "'");
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config_text(text.str());
}

json to_json(const CampaignConfig& cfg)
{
    const SimulatorConfig& s = cfg.simulator;
    json sim = {
        {"dim", s.dim},
        {"pairs", pairs_json(s.pairs)},
        {"box", {{"lower", vector_json(s.box.lower)}, {"upper", vector_json(s.box.upper)}}},
        {"theta_star", vector_json(s.theta_star)},
        {"gated_axes", s.gated_axes},
        {"darwin_widths", vector_json(s.darwin_widths)},
        {"gate_order", s.gate_order},
        {"diff_weights", vector_json(s.diff_weights)},
        {"common_weights", vector_json(s.common_weights)},
        {"peak_intensity", s.peak_intensity},
        {"bpe_target", s.bpe_target},
        {"periodic_period", s.periodic_period},
    };
    if (s.noise) {
        sim["noise"] = {{"rate_um_per_eval", s.noise->rate_um_per_eval},
                        {"jitter_rms_um", s.noise->jitter_rms_um},
                        {"seed", s.noise->seed}};
    }

    json algorithms = json::array();
    for (const auto& a : cfg.algorithms) {
        const OptimizerSpec& sp = a.spec;
        json entry = {
            {"kind", to_string(sp.kind)},
            {"label", a.label},
            {"schedule", {{"kind", to_string(sp.schedule.kind)}, {"beta0", sp.schedule.beta0}, {"c", sp.schedule.c}}},
            {"fit", {{"n_starts", sp.fit.n_starts}, {"n_refine", sp.fit.n_refine}, {"max_iterations", sp.fit.max_iterations}}},
            {"acquisition",
             {{"budget", sp.acquisition.budget},
              {"refine_starts", sp.acquisition.refine_starts},
              {"sweeps", sp.acquisition.sweeps},
              {"initial_step", sp.acquisition.initial_step}}},
        };
        if (sp.transform) entry["pairs"] = pairs_json(sp.transform->pairs());
        if (sp.kind == AlgorithmKind::turbo) {
            entry["turbo"] = {{"length_init", sp.turbo.length_init},
                              {"length_min", sp.turbo.length_min},
                              {"length_max", sp.turbo.length_max},
                              {"success_tolerance", sp.turbo.success_tolerance},
                              {"failure_tolerance", sp.turbo.failure_tolerance},
                              {"improvement_tolerance", sp.turbo.improvement_tolerance}};
        }
        algorithms.push_back(std::move(entry));
    }

    return {
        {"simulator", std::move(sim)},
        {"algorithms", std::move(algorithms)},
        {"campaign",
         {{"n_trials", cfg.n_trials},
          {"budget", cfg.budget},
          {"n_init", cfg.n_init},
          {"master_seed", cfg.master_seed},
          {"output_dir", cfg.output_dir.string()},
          {"jobs", cfg.jobs}}},
        {"normalization",
         {{"e_min", cfg.normalization.e_min},
          {"e_max", cfg.normalization.e_max},
          {"i_min", cfg.normalization.i_min},
          {"i_max", cfg.normalization.i_max}}},
    };
}

}  // namespace dgbo
