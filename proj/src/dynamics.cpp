#include "ptwell/dynamics.hpp"

#include <cmath>
#include <sstream>

#include "ptwell/errors.hpp"
#include "ptwell/rk45.hpp"

namespace ptwell {

void RunConfig::validate() const {
    std::vector<std::string> problems;
    if (n_total < 1) problems.push_back("n_total must be >= 1");
    if (j <= 0.0) problems.push_back("j must be positive");
    if (gamma < 0.0) problems.push_back("gamma must be non-negative");
    if (gamma > j) problems.push_back("gamma exceeds j");
    if (u < 0.0) problems.push_back("u must be non-negative");
    if (d < 0.0) problems.push_back("d must be non-negative");
    if (n <= 0.0) problems.push_back("n must be positive");
    if (n1_0 < 0.0 || n4_0 < 0.0) problems.push_back("reservoir occupations must be non-negative");
    if (std::abs(n1_0 + n4_0 + 2.0 * n - n_total) > 1e-9)
        problems.push_back("occupation split n1_0 + n4_0 + 2n must equal n_total");
    if (dt_initial <= 0.0) problems.push_back("dt_initial must be positive");
    if (t_max < 0.0) problems.push_back("t_max must be non-negative");
    if (sample_interval <= 0.0) problems.push_back("sample_interval must be positive");
    if (collapse_current_factor <= 0.0) problems.push_back("collapse_current_factor must be positive");
    if (collapse_control_factor <= 0.0) problems.push_back("collapse_control_factor must be positive");
    if (degeneracy_factor <= 0.0) problems.push_back("degeneracy_factor must be positive");
    if (integrator_tol <= 0.0) problems.push_back("integrator_tol must be positive");
    if (!problems.empty()) {
        std::ostringstream os;
        os << "invalid run configuration:";
        for (const auto& p : problems) os << "\n  - " << p;
        throw ConfigError(os.str());
    }
}

std::string to_string(Termination t) {
    switch (t) {
        case Termination::Completed: return "completed";
        case Termination::Collapsed: return "collapsed";
        case Termination::Degenerate: return "degenerate";
        case Termination::Error: return "error";
    }
    return "unknown";
}

namespace {

constexpr int kInnerWells[2] = {1, 2};

std::vector<Complex> inner_sigma2(const ManyBodyState& state) {
    std::vector<Complex> out;
    out.reserve(16);
    for (int k : kInnerWells)
        for (int l : kInnerWells)
            for (int m : kInnerWells)
                for (int n : kInnerWells)
                    out.push_back(two_particle_element(state, k, l, m, n));
    return out;
}

/// The feedback loop evaluated without hard thresholds; classification of
/// collapse vs degeneracy happens at step endpoints.
class ControlledFlow {
public:
    explicit ControlledFlow(const RunConfig& config)
        : config_(config), thresholds_(config.thresholds()) {}

    ControlParams raw_controls(const DensityMoments& moments, double t) const {
        if (config_.gamma != 0.0) {
            const double jt12 = moments.current(0, 1);
            const double jt34 = moments.current(2, 3);
            if (jt12 == 0.0 || jt34 == 0.0)
                throw CollapseDetected("reduced current vanished", t);
        }
        ControlParams p = evaluate_controls_raw(moments, config_.gamma, config_.j, config_.u);
        if (!p.finite())
            throw CollapseDetected("control law produced non-finite values", t);
        return p;
    }

    Vector rhs(double t, const Vector& c) const {
        ManyBodyState state(basis_, c);
        const DensityMoments moments = DensityMoments::compute(state);
        ControlParams p = raw_controls(moments, t);
        check_degeneracy(moments, p, t);
        ManyBodyState h_psi = apply_hamiltonian(state, p);
        return Complex(0.0, -1.0) * h_psi.amplitudes;
    }

    void check_degeneracy(const DensityMoments& moments, const ControlParams& p, double t) const {
        if (config_.gamma == 0.0) return;
        const LinearSystemCoeffs c =
            coefficient_assembly(moments, p.j12, p.j34, config_.j, config_.u);
        if (!onsite_system_degenerate(c, thresholds_.degeneracy_factor)) return;
        const double jt_min =
            std::min(std::abs(moments.current(0, 1)), std::abs(moments.current(2, 3)));
        if (jt_min < 100.0 * thresholds_.collapse_current)
            throw CollapseDetected("degenerate system at vanishing current", t);
        throw PureStateDegeneracy("onsite-energy system is rank deficient", t);
    }

    /// True when a reduced current has reached the collapse floor, including
    /// sign flips; both currents start positive.
    bool current_floor(const DensityMoments& moments) const {
        if (config_.gamma == 0.0) return false;
        return moments.current(0, 1) <= thresholds_.collapse_current ||
               moments.current(2, 3) <= thresholds_.collapse_current;
    }

    /// True once any control has left the physical range; used to classify an
    /// integrator stall as a collapse rather than a numerical failure.
    bool controls_runaway(const ControlParams& p) const {
        const double ctrl = config_.collapse_control_factor * config_.j;
        return control_diverged(p.j12, ctrl) || control_diverged(p.j34, ctrl) ||
               control_diverged(p.eps1, ctrl) || control_diverged(p.eps4, ctrl);
    }

    void set_basis(std::shared_ptr<const FockBasis> basis) { basis_ = std::move(basis); }
    const std::shared_ptr<const FockBasis>& basis() const { return basis_; }

private:
    static bool control_diverged(double value, double threshold) {
        return !std::isfinite(value) || std::abs(value) > threshold;
    }

    RunConfig config_;
    ControlThresholds thresholds_;
    std::shared_ptr<const FockBasis> basis_;
};

Sample make_sample(double t, const ManyBodyState& state, const ControlParams& controls,
                   const DensityMoments& moments, double norm) {
    Sample s;
    s.t = t;
    s.controls = controls;
    s.first_order = derive_first_order(moments.sigma1);
    s.inner_sigma2 = inner_sigma2(state);
    s.norm = norm;
    return s;
}

}  // namespace

ControlParams step_controlled(ManyBodyState& state, double& t, double& dt,
                              const RunConfig& config) {
    ControlledFlow flow(config);
    flow.set_basis(state.basis);
    const DensityMoments start_moments = DensityMoments::compute(state);
    const ControlParams used =
        evaluate_controls(start_moments, config.gamma, config.j, config.u, config.thresholds());
    Rk45<Vector> stepper([&flow](double tt, const Vector& c) { return flow.rhs(tt, c); },
                         config.integrator_tol);
    t = stepper.step(t, state.amplitudes, dt, t + dt);
    state.normalize();
    return used;
}

RunRecord run(const RunConfig& config) {
    config.validate();
    RunRecord record;
    record.config = config;

    auto basis = build_basis(config.n_total, 4);
    const TwoModeTarget target =
        target_from(config.gamma, config.j, config.n, config.u * (config.n_total - 1));
    const MeanFieldSeed seed = MeanFieldSeed::from_target(target, config.n1_0, config.n4_0);

    ManyBodyState state = product_state(seed.psi, basis);
    if (config.d > 0.0) {
        state = perturb(state, {config.d, config.seed, config.complex_perturbation});
        auto [projected, residuals] = project_constraints(state, target);
        state = std::move(projected);
        record.initial_residuals = residuals;
    } else {
        record.initial_residuals = constraint_residuals(single_particle_matrix(state), target);
    }
    {
        const Matrix sigma1 = single_particle_matrix(state);
        record.initial_purity2 = purity(sigma1, {1, 2});
        record.initial_purity4 = purity(sigma1, {0, 1, 2, 3});
    }

    ControlledFlow flow(config);
    flow.set_basis(basis);
    Rk45<Vector> stepper([&flow](double tt, const Vector& c) { return flow.rhs(tt, c); },
                         config.integrator_tol);

    double t = 0.0;
    double dt = config.dt_initial;
    double last_norm = 1.0;
    long next_sample = 0;

    auto record_sample = [&](double ts, const ManyBodyState& s, const DensityMoments& m,
                             const ControlParams& p) {
        record.samples.push_back(make_sample(ts, s, p, m, last_norm));
    };

    try {
        // Initial sample; for pure inputs the control law degenerates here.
        {
            const DensityMoments m0 = DensityMoments::compute(state);
            const ControlParams p0 = flow.raw_controls(m0, 0.0);
            flow.check_degeneracy(m0, p0, 0.0);
            record_sample(0.0, state, m0, p0);
            next_sample = 1;
        }

        while (t < config.t_max - 1e-12) {
            const double t_limit =
                std::min(config.t_max, static_cast<double>(next_sample) * config.sample_interval);
            while (t < t_limit - 1e-12) {
                const Vector before = state.amplitudes;
                const double t_before = t;
                bool step_failed = false;
                try {
                    t = stepper.step(t, state.amplitudes, dt, t_limit);
                } catch (const CollapseDetected&) {
                    // A stage ran into the singular feedback; shrink the step
                    // to localize the stall time.
                    step_failed = true;
                }
                const double drift = step_failed ? 0.0 : std::abs(state.norm() - 1.0);
                if (step_failed || drift > 0.5e-9) {
                    state.amplitudes = before;
                    t = t_before;
                    dt *= 0.25;
                    if (dt < 1e-13) {
                        // The flow cannot be advanced any further. With the
                        // feedback in runaway this is the collapse time.
                        const DensityMoments m = DensityMoments::compute(state);
                        const ControlParams p = evaluate_controls_raw(
                            m, config.gamma, config.j, config.u);
                        if (flow.current_floor(m) || flow.controls_runaway(p))
                            throw CollapseDetected("integration stalled at diverging feedback",
                                                   t);
                        throw std::runtime_error(
                            "integrator stalled outside the collapse regime");
                    }
                    continue;
                }
                record.max_norm_drift = std::max(record.max_norm_drift, drift);
                last_norm = state.norm();
                state.normalize();

                const DensityMoments m = DensityMoments::compute(state);
                if (flow.current_floor(m))
                    throw CollapseDetected("reduced current reached the collapse floor", t);
            }
            const DensityMoments m = DensityMoments::compute(state);
            const ControlParams p = flow.raw_controls(m, t);
            flow.check_degeneracy(m, p, t);
            record_sample(t, state, m, p);
            ++next_sample;
        }

        record.termination = Termination::Completed;
        record.termination_time = t;
    } catch (const PureStateDegeneracy& e) {
        record.termination = Termination::Degenerate;
        record.termination_time = e.time;
        record.error_message = e.what();
    } catch (const CollapseDetected& e) {
        record.termination = Termination::Collapsed;
        record.termination_time = e.time;
        record.error_message = e.what();
        // Terminal sample: the last reachable state, with the control values
        // the feedback law demands there.
        const DensityMoments m = DensityMoments::compute(state);
        const ControlParams p = evaluate_controls_raw(m, config.gamma, config.j, config.u);
        last_norm = state.norm();
        record_sample(e.time, state, m, p);
    } catch (const std::exception& e) {
        record.termination = Termination::Error;
        record.termination_time = t;
        record.error_message = e.what();
    }
    return record;
}

}  // namespace ptwell
