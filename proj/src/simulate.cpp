#include "mixdiss/simulate.hpp"

#include "mixdiss/errors.hpp"
#include "mixdiss/interconnect.hpp"
#include "mixdiss/json_io.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace mixdiss {

double phi(double x, double alpha) { return x >= 0.0 ? x : -alpha * x; }

void PwlSystem::validate() const {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw PreconditionFailure("alpha must lie in (0, 1)");
    }
}

StorageConfig StorageConfig::make(double alpha, double eps_s1, double delta) {
    return {eps_s1, delta, (1.0 - alpha * alpha) / (1.0 + alpha)};
}

void StorageConfig::validate(double alpha) const {
    const double expected = (1.0 - alpha * alpha) / (1.0 + alpha);
    if (std::abs(k - expected) > 1e-12 * (1.0 + std::abs(expected))) {
        throw ConfigMismatch("k = " + format_double(k) + " does not match alpha (expected " + format_double(expected) + ")");
    }
    if (!(delta >= 0.0 && delta < k)) {
        throw ConfigMismatch("delta must satisfy 0 <= delta < k");
    }
    if (!(eps_s1 > 0.0 && eps_s1 < 1.0)) {
        throw ConfigMismatch("eps_s1 must lie in (0, 1)");
    }
}

// ---------------------------------------------------------------------------

namespace {

// Uniform [0, 1) from the top 53 bits; identical on every platform, unlike
// std::uniform_real_distribution.
double uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

constexpr int kComponents = 8;
constexpr double kRamp = 0.1;

}  // namespace

const char* to_string(InputSignal::Kind k) {
    switch (k) {
        case InputSignal::Kind::ExpDecay: return "EXP_DECAY";
        case InputSignal::Kind::WindowedSine: return "WINDOWED_SINE";
        case InputSignal::Kind::RandomBandlimited: return "RANDOM_BANDLIMITED";
        case InputSignal::Kind::PiecewiseConst: return "PIECEWISE_CONST";
    }
    return "?";
}

InputSignal InputSignal::exp_decay(double sign, double rate, double amplitude, double horizon) {
    if (!(rate > 0.0)) throw PreconditionFailure("decay rate must be positive");
    InputSignal s;
    s.kind_ = Kind::ExpDecay;
    s.p1_ = sign >= 0.0 ? 1.0 : -1.0;
    s.p2_ = rate;
    s.amplitude_ = amplitude;
    s.horizon_ = horizon;
    return s;
}

InputSignal InputSignal::windowed_sine(double omega, double window, double amplitude, double horizon) {
    if (!(window > 0.0 && window <= horizon)) throw PreconditionFailure("sine window must lie in (0, horizon]");
    InputSignal s;
    s.kind_ = Kind::WindowedSine;
    s.p1_ = omega;
    s.p2_ = window;
    s.amplitude_ = amplitude;
    s.horizon_ = horizon;
    return s;
}

InputSignal InputSignal::random_bandlimited(std::uint64_t seed, double cutoff, double amplitude, double horizon) {
    if (!(cutoff > 0.0)) throw PreconditionFailure("cutoff must be positive");
    InputSignal s;
    s.kind_ = Kind::RandomBandlimited;
    s.p1_ = cutoff;
    s.seed_ = seed;
    s.amplitude_ = amplitude;
    s.horizon_ = horizon;
    std::mt19937_64 rng(seed);
    double total = 0.0;
    for (int i = 0; i < kComponents; ++i) {
        s.freq_.push_back(cutoff * (1.0 - uniform(rng)));
        s.phase_.push_back(2.0 * std::numbers::pi * uniform(rng));
        s.weight_.push_back(2.0 * uniform(rng) - 1.0);
        total += std::abs(s.weight_.back());
    }
    if (total > 0.0) {
        for (double& w : s.weight_) w /= total;
    }
    return s;
}

InputSignal InputSignal::piecewise_const(std::uint64_t seed, double amplitude, double horizon) {
    InputSignal s;
    s.kind_ = Kind::PiecewiseConst;
    s.seed_ = seed;
    s.amplitude_ = amplitude;
    s.horizon_ = horizon;
    std::mt19937_64 rng(seed);
    const int segments = std::max(1, static_cast<int>(std::floor(horizon / 2.0)));
    for (int i = 0; i < segments; ++i) s.weight_.push_back(2.0 * uniform(rng) - 1.0);
    return s;
}

InputSignal InputSignal::zero(double horizon) { return exp_decay(1.0, 1.0, 0.0, horizon); }

double InputSignal::operator()(double t) const {
    if (t < 0.0 || amplitude_ == 0.0) return 0.0;
    switch (kind_) {
        case Kind::ExpDecay:
            return amplitude_ * p1_ * std::exp(-p2_ * t);
        case Kind::WindowedSine: {
            const double w = p2_;
            if (t >= w) return 0.0;
            const double taper = 0.1 * w;
            double win = 1.0;
            if (t < taper) {
                win = 0.5 * (1.0 - std::cos(std::numbers::pi * t / taper));
            } else if (t > w - taper) {
                win = 0.5 * (1.0 - std::cos(std::numbers::pi * (w - t) / taper));
            }
            return amplitude_ * win * std::sin(p1_ * t);
        }
        case Kind::RandomBandlimited: {
            const double span = 0.5 * horizon_;
            if (t >= span) return 0.0;
            const double hann = std::pow(std::sin(std::numbers::pi * t / span), 2);
            double v = 0.0;
            for (std::size_t i = 0; i < freq_.size(); ++i) v += weight_[i] * std::sin(freq_[i] * t + phase_[i]);
            return amplitude_ * hann * v;
        }
        case Kind::PiecewiseConst: {
            // Levels joined by raised-cosine ramps of kRamp seconds, starting and ending at 0.
            const auto i = static_cast<std::size_t>(std::floor(t));
            const double level = i < weight_.size() ? weight_[i] : 0.0;
            const double prev = i > 0 && i - 1 < weight_.size() ? weight_[i - 1] : 0.0;
            const double s = t - std::floor(t);
            if (s >= kRamp) return amplitude_ * level;
            const double blend = 0.5 * (1.0 - std::cos(std::numbers::pi * s / kRamp));
            return amplitude_ * (prev + (level - prev) * blend);
        }
    }
    return 0.0;
}

std::string InputSignal::label() const {
    std::string s = to_string(kind_);
    switch (kind_) {
        case Kind::ExpDecay: return s + (p1_ > 0 ? "_pos_" : "_neg_") + format_double(p2_);
        case Kind::WindowedSine: return s + "_" + format_double(p1_);
        case Kind::RandomBandlimited:
        case Kind::PiecewiseConst: return s + "_seed" + std::to_string(seed_);
    }
    return s;
}

nlohmann::json InputSignal::to_json() const {
    nlohmann::json j{{"kind", to_string(kind_)}, {"amplitude", amplitude_}, {"horizon", horizon_}};
    switch (kind_) {
        case Kind::ExpDecay:
            j["sign"] = p1_;
            j["rate"] = p2_;
            break;
        case Kind::WindowedSine:
            j["omega"] = p1_;
            j["window"] = p2_;
            break;
        case Kind::RandomBandlimited:
            j["seed"] = seed_;
            j["cutoff"] = p1_;
            break;
        case Kind::PiecewiseConst:
            j["seed"] = seed_;
            break;
    }
    return j;
}

InputSignal InputSignal::from_json(const nlohmann::json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    const double amp = j.value("amplitude", 1.0);
    const double horizon = j.value("horizon", 40.0);
    if (kind == "EXP_DECAY") return exp_decay(j.value("sign", 1.0), j.value("rate", 1.0), amp, horizon);
    if (kind == "WINDOWED_SINE") {
        return windowed_sine(j.at("omega").get<double>(), j.value("window", 0.5 * horizon), amp, horizon);
    }
    if (kind == "RANDOM_BANDLIMITED") {
        return random_bandlimited(j.at("seed").get<std::uint64_t>(), j.value("cutoff", 2.0), amp, horizon);
    }
    if (kind == "PIECEWISE_CONST") return piecewise_const(j.at("seed").get<std::uint64_t>(), amp, horizon);
    throw ParseError("unknown input kind " + kind);
}

// ---------------------------------------------------------------------------

namespace {

std::size_t step_count(double horizon, double step) {
    if (!(step > 0.0) || !std::isfinite(step)) throw PreconditionFailure("step must be positive");
    if (step > kMaxStep) throw StepTooLarge("step " + format_double(step) + " exceeds " + format_double(kMaxStep));
    if (!(horizon > 0.0)) throw PreconditionFailure("horizon must be positive");
    const double n = std::ceil(horizon / step - 1e-9);
    if (n > 1e7) throw PreconditionFailure("horizon/step exceeds 1e7");
    return static_cast<std::size_t>(n);
}

// Classical RK4 on xdot = f(t, x); `record(i, t, x)` stores sample i.
template <class F, class R>
void rk4(Eigen::Index n, std::size_t steps, double h, F&& f, R&& record) {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    for (std::size_t i = 0;; ++i) {
        const double t = static_cast<double>(i) * h;
        record(i, t, x);
        if (i == steps) break;
        const Eigen::VectorXd k1 = f(t, x);
        const Eigen::VectorXd k2 = f(t + 0.5 * h, x + 0.5 * h * k1);
        const Eigen::VectorXd k3 = f(t + 0.5 * h, x + 0.5 * h * k2);
        const Eigen::VectorXd k4 = f(t + h, x + h * k3);
        x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
}

Trajectory allocate(std::size_t steps, Eigen::Index n) {
    Trajectory tr;
    tr.t.resize(steps + 1);
    tr.u.resize(steps + 1);
    tr.y.resize(steps + 1);
    tr.x.resize(static_cast<Eigen::Index>(steps + 1), n);
    tr.xdot.resize(static_cast<Eigen::Index>(steps + 1), n);
    return tr;
}

}  // namespace

Trajectory simulate_pwl(const PwlSystem& sys, const InputSignal& input, double step) {
    sys.validate();
    const std::size_t steps = step_count(input.horizon(), step);
    Trajectory tr = allocate(steps, 1);
    const auto f = [&](double t, const Eigen::VectorXd& x) {
        return Eigen::VectorXd::Constant(1, -x(0) + input(t));
    };
    rk4(1, steps, step, f, [&](std::size_t i, double t, const Eigen::VectorXd& x) {
        const auto r = static_cast<Eigen::Index>(i);
        tr.t[i] = t;
        tr.u[i] = input(t);
        tr.y[i] = phi(x(0), sys.alpha);
        tr.x(r, 0) = x(0);
        tr.xdot(r, 0) = -x(0) + tr.u[i];
    });
    return tr;
}

Trajectory simulate_lti(const StateSpace& sys, const InputSignal& input, double step) {
    const std::size_t steps = step_count(input.horizon(), step);
    const Eigen::Index n = sys.order();
    Trajectory tr = allocate(steps, n);
    const auto f = [&](double t, const Eigen::VectorXd& x) -> Eigen::VectorXd { return sys.A * x + sys.B * input(t); };
    rk4(n, steps, step, f, [&](std::size_t i, double t, const Eigen::VectorXd& x) {
        const auto r = static_cast<Eigen::Index>(i);
        const double u = input(t);
        tr.t[i] = t;
        tr.u[i] = u;
        tr.y[i] = (n > 0 ? sys.C.dot(x) : 0.0) + sys.D * u;
        if (n > 0) {
            tr.x.row(r) = x.transpose();
            tr.xdot.row(r) = (sys.A * x + sys.B * u).transpose();
        }
    });
    return tr;
}

FeedbackRun simulate_feedback(const PwlSystem& sys1,
                              const StateSpace& sys2,
                              const InputSignal& w1,
                              const InputSignal& w2,
                              double step) {
    sys1.validate();
    const double horizon = std::max(w1.horizon(), w2.horizon());
    const std::size_t steps = step_count(horizon, step);
    const Eigen::Index n2 = sys2.order();

    struct Signals {
        double u1, y1, u2, y2;
    };
    const auto signals = [&](double t, const Eigen::VectorXd& z) {
        Signals s{};
        s.y1 = phi(z(0), sys1.alpha);
        s.u2 = s.y1 + w2(t);
        s.y2 = (n2 > 0 ? sys2.C.dot(z.tail(n2)) : 0.0) + sys2.D * s.u2;
        s.u1 = w1(t) - s.y2;
        return s;
    };
    const auto f = [&](double t, const Eigen::VectorXd& z) {
        const Signals s = signals(t, z);
        Eigen::VectorXd dz(1 + n2);
        dz(0) = -z(0) + s.u1;
        if (n2 > 0) dz.tail(n2) = sys2.A * z.tail(n2) + sys2.B * s.u2;
        return dz;
    };

    FeedbackRun run;
    run.sys1 = allocate(steps, 1);
    run.sys2 = allocate(steps, n2);
    run.w1.resize(steps + 1);
    run.w2.resize(steps + 1);
    rk4(1 + n2, steps, step, f, [&](std::size_t i, double t, const Eigen::VectorXd& z) {
        const auto r = static_cast<Eigen::Index>(i);
        const Signals s = signals(t, z);
        const Eigen::VectorXd dz = f(t, z);
        run.w1[i] = w1(t);
        run.w2[i] = w2(t);
        run.sys1.t[i] = run.sys2.t[i] = t;
        run.sys1.u[i] = s.u1;
        run.sys1.y[i] = s.y1;
        run.sys1.x(r, 0) = z(0);
        run.sys1.xdot(r, 0) = dz(0);
        run.sys2.u[i] = s.u2;
        run.sys2.y[i] = s.y2;
        if (n2 > 0) {
            run.sys2.x.row(r) = z.tail(n2).transpose();
            run.sys2.xdot.row(r) = dz.tail(n2).transpose();
        }
    });
    return run;
}

// ---------------------------------------------------------------------------

bool StorageMargins::ok() const {
    const double floor = -1e-9 * scale;
    return min_s1 >= floor && min_s2 >= floor && min_s3 >= floor;
}

namespace {

void require_scalar_pwl(const Trajectory& traj, const PwlSystem& sys) {
    sys.validate();
    traj.validate();
    if (traj.states() != 1) {
        throw DimensionMismatch("the piecewise-linear system has one state");
    }
}

}  // namespace

StorageMargins check_storage_inequalities(const Trajectory& traj, const PwlSystem& sys, const StorageConfig& cfg) {
    require_scalar_pwl(traj, sys);
    cfg.validate(sys.alpha);
    const double a = sys.alpha;
    const double e = cfg.eps_s1;
    StorageMargins m;
    const std::size_t n = traj.samples();
    m.s1.resize(n);
    m.s2.resize(n);
    m.s3.resize(n);
    double peak = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        const double x = traj.x(r, 0);
        const double xd = traj.xdot(r, 0);
        const double u = traj.u[i];
        const double y = traj.y[i];
        const double p = phi(x, a);
        peak = std::max({peak, u * u, y * y, x * x, xd * xd});
        m.s1[i] = ((e - 1.0) / e * y * y + u * u / e - p * x) - 2.0 * x * xd / e;
        m.s2[i] = (-y * y + cfg.delta * u * y + a * u * u + cfg.k * p * x - cfg.delta * p * (xd + x)) - 2.0 * a * x * xd;
        m.s3[i] = (u * y - p * x) - p * xd;
    }
    m.scale = 1.0 + peak;
    m.min_s1 = *std::min_element(m.s1.begin(), m.s1.end());
    m.min_s2 = *std::min_element(m.s2.begin(), m.s2.end());
    m.min_s3 = *std::min_element(m.s3.begin(), m.s3.end());
    for (double v : m.s3) m.max_abs_s3 = std::max(m.max_abs_s3, std::abs(v));
    return m;
}

DichotomyResult check_dichotomy(const Trajectory& traj, const PwlSystem& sys, const StorageConfig& cfg) {
    require_scalar_pwl(traj, sys);
    cfg.validate(sys.alpha);
    require_decay(traj);
    const std::size_t n = traj.samples();
    std::vector<double> fu(n), fv(n), fuy(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        const double x = traj.x(r, 0);
        const double p = phi(x, sys.alpha);
        fu[i] = cfg.k * p * x - cfg.delta * p * (traj.xdot(r, 0) + x);
        fv[i] = -p * x;
        fuy[i] = traj.u[i] * traj.y[i];
    }
    DichotomyResult d;
    d.int_u = trapezoid(traj.t, fu);
    d.int_v = trapezoid(traj.t, fv);
    d.int_phi_x = -d.int_v;
    d.int_uy = trapezoid(traj.t, fuy);
    d.tol = 1e-6 * (1.0 + input_energy(traj));
    d.dichotomy_ok = d.int_u <= d.tol || d.int_v <= d.tol;
    if (d.int_v >= 0.0) {
        const double cap = (cfg.k - cfg.delta) * d.int_phi_x;
        d.chain_ok = d.int_u <= cap + d.tol && cap <= d.tol;
    } else {
        d.chain_ok = true;
    }
    return d;
}

double empirical_gain(const std::vector<FeedbackRun>& runs) {
    if (runs.empty()) throw PreconditionFailure("empty batch");
    double g = 0.0;
    for (const auto& r : runs) {
        const auto& t = r.sys1.t;
        std::vector<double> yy(t.size()), ww(t.size());
        for (std::size_t i = 0; i < t.size(); ++i) {
            yy[i] = r.sys1.y[i] * r.sys1.y[i] + r.sys2.y[i] * r.sys2.y[i];
            ww[i] = r.w1[i] * r.w1[i] + r.w2[i] * r.w2[i];
        }
        const double wn = trapezoid(t, ww);
        if (!(wn > 0.0)) throw PreconditionFailure("zero exogenous input");
        g = std::max(g, std::sqrt(trapezoid(t, yy) / wn));
    }
    return g;
}

double empirical_gain(const Trajectory& traj) {
    const double un = input_energy(traj);
    if (!(un > 0.0)) throw PreconditionFailure("zero input");
    std::vector<double> yy(traj.samples());
    for (std::size_t i = 0; i < yy.size(); ++i) yy[i] = traj.y[i] * traj.y[i];
    return std::sqrt(trapezoid(traj.t, yy) / un);
}

// ---------------------------------------------------------------------------

namespace {

std::vector<InputSignal> expand_inputs(const nlohmann::json& list, double horizon) {
    if (!list.is_array() || list.empty()) {
        throw ParseError("config needs a non-empty \"inputs\" array");
    }
    std::vector<InputSignal> out;
    for (nlohmann::json e : list) {
        if (!e.contains("horizon")) e["horizon"] = horizon;
        if (e.contains("seed_count")) {
            const auto first = e.value("seed_start", std::uint64_t{0});
            const auto count = e.at("seed_count").get<std::uint64_t>();
            e.erase("seed_count");
            e.erase("seed_start");
            for (std::uint64_t s = first; s < first + count; ++s) {
                e["seed"] = s;
                out.push_back(InputSignal::from_json(e));
            }
        } else {
            out.push_back(InputSignal::from_json(e));
        }
    }
    return out;
}

bool wants(const std::vector<std::string>& checks, const char* c) {
    return std::find(checks.begin(), checks.end(), c) != checks.end();
}

}  // namespace

CampaignResult run_campaign(const nlohmann::json& cfg) {
    CampaignResult res;
    SystemDescriptor sys;
    std::vector<InputSignal> inputs;
    std::vector<std::string> checks;
    double step = kDefaultStep;
    double eps_s1 = 0.5;
    double delta = 0.0;
    std::optional<StateSpace> loop;
    std::optional<SupplySpec> spec;
    std::optional<double> gain_bound;
    bool write_csv = false;
    try {
        sys = system_from_json(cfg.at("system"));
        const double horizon = cfg.value("horizon", 40.0);
        step = cfg.value("step", kDefaultStep);
        inputs = expand_inputs(cfg.at("inputs"), horizon);
        checks = cfg.value("checks", std::vector<std::string>{});
        if (cfg.contains("storage")) {
            eps_s1 = cfg["storage"].value("eps_s1", eps_s1);
            delta = cfg["storage"].value("delta", delta);
        }
        if (cfg.contains("feedback")) {
            const SystemDescriptor fb = system_from_json(cfg["feedback"]);
            if (fb.kind != SystemDescriptor::Kind::Lti || sys.kind != SystemDescriptor::Kind::Pwl) {
                throw ParseError("feedback runs pair a PWL \"system\" with an LTI \"feedback\" system");
            }
            loop = fb.lti;
        }
        if (cfg.contains("spec")) spec = spec_from_json(cfg["spec"]);
        if (cfg.contains("gain_bound")) gain_bound = cfg["gain_bound"].get<double>();
        write_csv = cfg.value("write_csv", false);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("config: ") + e.what());
    }
    const bool pwl = sys.kind == SystemDescriptor::Kind::Pwl;
    if (!spec && pwl) spec = pwl_supply(sys.alpha, delta);
    for (const auto& c : checks) {
        static const std::vector<std::string> known{"storage", "dichotomy", "classification", "gain", "bounded"};
        if (!wants(known, c.c_str())) throw ParseError("unknown check " + c);
        if ((c == "storage" || c == "dichotomy") && (!pwl || loop)) {
            throw ParseError("check " + c + " needs an open-loop PWL system");
        }
        if (c == "classification" && (!spec || loop)) throw ParseError("classification needs a spec and an open-loop run");
    }
    const StorageConfig storage = pwl ? StorageConfig::make(sys.alpha, eps_s1, delta) : StorageConfig{};
    if (wants(checks, "storage") || wants(checks, "dichotomy")) storage.validate(sys.alpha);

    nlohmann::json runs = nlohmann::json::array();
    std::vector<FeedbackRun> loop_runs;
    for (const auto& in : inputs) {
        nlohmann::json r{{"input", in.to_json()}, {"label", in.label()}};
        bool passed = true;
        try {
            if (loop) {
                FeedbackRun fr = simulate_feedback({sys.alpha}, *loop, in, InputSignal::zero(in.horizon()), step);
                const double peak = std::max(fr.sys1.x.cwiseAbs().maxCoeff(),
                                             fr.sys2.x.size() ? fr.sys2.x.cwiseAbs().maxCoeff() : 0.0);
                const bool bounded = std::isfinite(peak) && check_decay(fr.sys1).decayed;
                r["peak_state"] = json_number(peak);
                r["bounded"] = bounded;
                if (wants(checks, "bounded")) passed = passed && bounded;
                if (in.amplitude() != 0.0) {
                    r["gain"] = empirical_gain(std::vector<FeedbackRun>{fr});
                }
                if (write_csv) {
                    res.trajectories.emplace_back(in.label() + "_sys1", fr.sys1);
                    res.trajectories.emplace_back(in.label() + "_sys2", fr.sys2);
                }
                loop_runs.push_back(std::move(fr));
            } else {
                const Trajectory tr = pwl ? simulate_pwl({sys.alpha}, in, step) : simulate_lti(sys.lti, in, step);
                if (wants(checks, "storage")) {
                    const StorageMargins m = check_storage_inequalities(tr, {sys.alpha}, storage);
                    r["storage"] = {{"min_s1", m.min_s1}, {"min_s2", m.min_s2}, {"min_s3", m.min_s3},
                                    {"scale", m.scale}, {"ok", m.ok()}};
                    passed = passed && m.ok();
                }
                if (wants(checks, "dichotomy")) {
                    const DichotomyResult d = check_dichotomy(tr, {sys.alpha}, storage);
                    r["dichotomy"] = {{"int_u", d.int_u}, {"int_v", d.int_v}, {"tol", d.tol},
                                      {"dichotomy_ok", d.dichotomy_ok}, {"chain_ok", d.chain_ok}};
                    passed = passed && d.dichotomy_ok && d.chain_ok;
                }
                if (wants(checks, "classification")) {
                    const Classification c = classify_trajectory(tr, *spec);
                    r["classification"] = {{"branch", to_string(c.branch)}, {"theta_integral", c.theta_integral},
                                           {"pi_integral", c.pi_integral}, {"psi_integral", c.psi_integral},
                                           {"tol", c.tol}};
                    passed = passed && c.branch != Branch::Neither;
                }
                if (wants(checks, "gain") && in.amplitude() != 0.0) r["gain"] = empirical_gain(tr);
                if (write_csv) res.trajectories.emplace_back(in.label(), tr);
            }
        } catch (const Error& e) {
            r["error"] = e.what();
            passed = false;
        }
        r["passed"] = passed;
        res.all_passed = res.all_passed && passed;
        runs.push_back(std::move(r));
    }

    nlohmann::json summary{{"system", to_json(sys)},
                           {"step", step},
                           {"checks", checks},
                           {"runs", runs},
                           {"tolerances",
                            {{"storage", "margin >= -1e-9 * (1 + max(u^2, y^2, x^2, xdot^2))"},
                             {"dichotomy", "1e-6 * (1 + ||u||^2)"},
                             {"classification", "1e-6 * (1 + ||u||^2)"},
                             {"decay_rel", kDefaultDecayRel}}}};
    if (pwl) summary["storage_config"] = {{"eps_s1", storage.eps_s1}, {"delta", storage.delta}, {"k", storage.k}};
    if (spec) summary["spec"] = to_json(*spec);
    if (loop) {
        summary["feedback"] = to_json(SystemDescriptor{SystemDescriptor::Kind::Lti, "", *loop, 0.0});
        std::vector<FeedbackRun> nonzero;
        for (auto& fr : loop_runs) {
            if (std::any_of(fr.w1.begin(), fr.w1.end(), [](double v) { return v != 0.0; })) {
                nonzero.push_back(std::move(fr));
            }
        }
        if (!nonzero.empty()) {
            const double g = empirical_gain(nonzero);
            summary["empirical_gain"] = g;
            if (gain_bound) {
                const bool ok = g <= *gain_bound;
                summary["gain_bound"] = *gain_bound;
                summary["gain_within_bound"] = ok;
                if (wants(checks, "gain")) res.all_passed = res.all_passed && ok;
            }
        }
    }
    summary["passed"] = res.all_passed;
    res.summary = std::move(summary);
    return res;
}

}  // namespace mixdiss
