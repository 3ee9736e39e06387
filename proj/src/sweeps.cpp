#include "magnon/sweeps.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <thread>

namespace magnon {

std::string to_string(SweepParameter p) {
    switch (p) {
        case SweepParameter::lambda_q: return "lambda_q";
        case SweepParameter::kappa_a: return "kappa_a";
        case SweepParameter::kappa_m: return "kappa_m";
        case SweepParameter::gamma_q: return "gamma_q";
    }
    return "unknown";
}

SweepParameter sweep_parameter_from_string(const std::string& name) {
    for (auto p : {SweepParameter::lambda_q, SweepParameter::kappa_a, SweepParameter::kappa_m,
                   SweepParameter::gamma_q}) {
        if (to_string(p) == name) return p;
    }
    throw ParameterError("unknown sweep parameter '" + name +
                         "' (expected lambda_q, kappa_a, kappa_m or gamma_q)");
}

double parameter_value(const PhysicalParams& params, SweepParameter p) {
    switch (p) {
        case SweepParameter::lambda_q: return params.lambda_q;
        case SweepParameter::kappa_a: return params.kappa_a.at(0);
        case SweepParameter::kappa_m: return params.kappa_m.at(0);
        case SweepParameter::gamma_q: return params.gamma_q;
    }
    return 0.0;
}

PhysicalParams with_parameter(const PhysicalParams& params, SweepParameter p, double value) {
    PhysicalParams out = params;
    switch (p) {
        case SweepParameter::lambda_q: out.lambda_q = value; break;
        case SweepParameter::kappa_a: std::fill(out.kappa_a.begin(), out.kappa_a.end(), value); break;
        case SweepParameter::kappa_m: std::fill(out.kappa_m.begin(), out.kappa_m.end(), value); break;
        case SweepParameter::gamma_q: out.gamma_q = value; break;
    }
    return out;
}

void SweepSpec::validate() const {
    if (points < 2) throw ParameterError("a sweep needs at least 2 points");
    if (!std::isfinite(from) || !std::isfinite(to)) throw ParameterError("sweep range must be finite");
    if (parameter != SweepParameter::lambda_q && (from < 0.0 || to < 0.0)) {
        throw ParameterError("rate sweeps must stay non-negative");
    }
    if (n < 2) throw ParameterError("sweeps need n >= 2");
}

std::vector<double> SweepSpec::grid() const {
    std::vector<double> g(points);
    for (std::size_t i = 0; i < points; ++i) {
        g[i] = from + (to - from) * static_cast<double>(i) / static_cast<double>(points - 1);
    }
    return g;
}

std::pair<double, double> default_range(const PhysicalParams& base, SweepParameter p) {
    const double v = parameter_value(base, p);
    return {0.5 * v, 1.5 * v};
}

ProtocolSchedule protocol_for(const PhysicalParams& params, std::size_t n, bool equalize) {
    if (n == 2) return two_magnon_bell_schedule(params);
    if (!equalize) throw ParameterError("n >= 3 protocols without equalize need an explicit qubit duration");
    return n_magnon_schedule(params, n, true);
}

SweepResult run_sweep(const SweepSpec& spec) {
    spec.validate();
    const PhysicalParams base = spec.base.with_magnons(spec.n);
    const auto grid = spec.grid();

    std::optional<ProtocolSchedule> frozen;
    if (!spec.recompute_durations) frozen = protocol_for(base, spec.n, spec.equalize);

    struct Outcome {
        double fidelity{};
        std::string error;
    };
    std::vector<Outcome> outcomes(grid.size());

    auto evaluate = [&](std::size_t i) {
        try {
            const PhysicalParams p = with_parameter(base, spec.parameter, grid[i]);
            p.validate();
            ProtocolSchedule s;
            if (frozen) {
                p.check_far_detuning();
                s = *frozen;
                s.params = p;
            } else {
                s = protocol_for(p, spec.n, spec.equalize);
            }
            outcomes[i].fidelity = execute(s, spec.execution).fidelity;
        } catch (const std::exception& e) {
            outcomes[i].error = e.what();
        }
    };

    const unsigned workers = std::max(1u, std::min<unsigned>(spec.threads, static_cast<unsigned>(grid.size())));
    if (workers == 1) {
        for (std::size_t i = 0; i < grid.size(); ++i) evaluate(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < grid.size(); i = next++) evaluate(i);
            });
        }
    }

    SweepResult r;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (outcomes[i].error.empty()) {
            r.values.push_back(grid[i]);
            r.fidelities.push_back(outcomes[i].fidelity);
        } else {
            r.skipped.push_back({i, grid[i], outcomes[i].error});
        }
    }

    const StepControl& step = spec.execution.step;
    r.metadata = {
        {"parameter", to_string(spec.parameter)},
        {"from", format_csv_number(spec.from)},
        {"to", format_csv_number(spec.to)},
        {"points", std::to_string(spec.points)},
        {"n", std::to_string(spec.n)},
        {"engine", to_string(spec.execution.engine)},
        {"durations", spec.recompute_durations ? "recomputed" : "frozen"},
        {"integrator_step",
         step.fixed_step ? format_csv_number(*step.fixed_step) + " ns"
                         : "auto (" + format_csv_number(step.points_per_radian) + " points/rad, >= " +
                               std::to_string(step.min_steps) + " steps/segment)"},
        {"skipped", std::to_string(r.skipped.size())},
    };
    return r;
}

ProbabilityTrace probability_trace(std::size_t n, double lambda_eff, double t_max, std::size_t samples) {
    if (n < 2) throw ParameterError("probability_trace requires n >= 2");
    if (samples < 2) throw ParameterError("probability_trace needs at least 2 samples");
    if (!(t_max > 0.0)) throw ParameterError("t_max must be positive");
    ProbabilityTrace tr{n, {}, std::vector<std::vector<double>>(n)};
    tr.times.reserve(samples);
    for (std::size_t i = 0; i < samples; ++i) {
        const double t = t_max * static_cast<double>(i) / static_cast<double>(samples - 1);
        const auto c = analytic_coefficients(n, lambda_eff, t);
        tr.times.push_back(t);
        for (std::size_t k = 0; k < n; ++k) tr.columns[k].push_back(std::norm(c[k]));
    }
    return tr;
}

std::string format_csv_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

void write_sweep_csv(std::ostream& out, const SweepResult& result, SweepParameter p) {
    const std::string unit = p == SweepParameter::lambda_q ? "_rad_per_ns" : "_per_ns";
    out << to_string(p) << unit << ",fidelity\n";
    for (std::size_t i = 0; i < result.values.size(); ++i) {
        out << format_csv_number(result.values[i]) << ',' << format_csv_number(result.fidelities[i]) << '\n';
    }
}

void write_trace_csv(std::ostream& out, const ProbabilityTrace& trace) {
    out << "t_ns";
    for (std::size_t k = 1; k <= trace.n; ++k) out << ",P" << k;
    out << '\n';
    for (std::size_t i = 0; i < trace.times.size(); ++i) {
        out << format_csv_number(trace.times[i]);
        for (const auto& col : trace.columns) out << ',' << format_csv_number(col[i]);
        out << '\n';
    }
}

}  // namespace magnon
