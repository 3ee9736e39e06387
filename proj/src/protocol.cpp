#include "magnon/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <sstream>

namespace magnon {

using std::numbers::pi;

double ProtocolSchedule::total_duration() const {
    double t = 0.0;
    for (const auto& s : segments) t += s.duration;
    return t;
}

double ProtocolSchedule::qubit_segment_duration() const {
    for (const auto& s : segments) {
        if (s.config.qubit_cavity_active) return s.duration;
    }
    throw ScheduleError("schedule has no qubit-coupled segment");
}

void ProtocolSchedule::validate() const {
    if (segments.empty()) throw ScheduleError("schedule has no segments");
    if (params.n_magnons() != n_magnons) {
        throw ScheduleError("schedule parameters disagree on the number of magnons");
    }
    std::size_t qubit_segments = 0;
    for (const auto& s : segments) {
        if (!(s.duration > 0.0) || !std::isfinite(s.duration)) {
            throw ScheduleError("segment durations must be positive");
        }
        if (s.config.magnon_detuning.size() != n_magnons) {
            throw ScheduleError("segment detuning list has the wrong length");
        }
        if (s.config.qubit_cavity_active) ++qubit_segments;
    }
    if (qubit_segments != 1) {
        throw ScheduleError("schedule must contain exactly one qubit-coupled segment");
    }
}

namespace {

SegmentConfig resonant(std::size_t n_magnons, std::initializer_list<std::size_t> magnons) {
    auto c = SegmentConfig::all_decoupled(n_magnons);
    for (std::size_t k : magnons) c.magnon_detuning.at(k) = 0.0;
    return c;
}

SegmentConfig qubit_exchange(std::size_t n_magnons) {
    auto c = SegmentConfig::all_decoupled(n_magnons);
    c.qubit_cavity_active = true;
    return c;
}

}  // namespace

ProtocolSchedule two_magnon_bell_schedule(const PhysicalParams& input) {
    const PhysicalParams params = input.with_magnons(2);
    params.validate();
    params.check_far_detuning();

    ProtocolSchedule s{ProtocolKind::two_magnon_bell, 2, params, {}};
    s.segments.push_back({resonant(2, {0}), pi / (4.0 * params.lambda_m[0]),
                          "magnon 1 half swap with cavity 1"});
    s.segments.push_back({qubit_exchange(2), pi / (2.0 * params.effective_coupling()),
                          "cavity 1 -> cavity 2 via virtual qubit photons"});
    s.segments.push_back({resonant(2, {1}), pi / (2.0 * params.lambda_m[1]),
                          "cavity 2 full swap into magnon 2"});
    s.validate();
    return s;
}

ProtocolSchedule n_magnon_schedule(const PhysicalParams& input, std::size_t n, bool equalize,
                                   std::optional<double> qubit_duration, SwapMode swap) {
    if (n < 2) throw ParameterError("n_magnon_schedule requires n >= 2");
    const PhysicalParams params = input.with_magnons(n);
    params.validate();
    params.check_far_detuning();

    double exchange = 0.0;
    if (equalize) {
        if (qubit_duration) {
            throw ParameterError("qubit duration is derived when equalize is set");
        }
        const auto t = isoprobability_time(n, params.effective_coupling());
        if (!t) {
            throw IsoprobabilityUnattainable("isoprobability entanglement does not exist for n = " +
                                             std::to_string(n));
        }
        exchange = *t;
    } else {
        if (!qubit_duration || !(*qubit_duration > 0.0)) {
            throw ParameterError("a positive qubit segment duration is required when equalize is off");
        }
        exchange = *qubit_duration;
    }

    ProtocolSchedule s{ProtocolKind::n_magnon, n, params, {}};
    s.segments.push_back({resonant(n, {0}), pi / (2.0 * params.lambda_m[0]),
                          "magnon 1 full swap into cavity 1"});
    s.segments.push_back({qubit_exchange(n), exchange, "N-cavity exchange via virtual qubit photons"});

    const bool equal = std::all_of(params.lambda_m.begin(), params.lambda_m.end(),
                                   [&](double l) { return l == params.lambda_m[0]; });
    if (swap == SwapMode::simultaneous && !equal) {
        throw ParameterError("simultaneous final swaps need equal magnon couplings");
    }
    const bool together = swap == SwapMode::simultaneous || (swap == SwapMode::automatic && equal);
    if (together) {
        auto c = SegmentConfig::all_decoupled(n);
        std::fill(c.magnon_detuning.begin(), c.magnon_detuning.end(), 0.0);
        s.segments.push_back({c, pi / (2.0 * params.lambda_m[0]), "all cavities swap into their magnons"});
    } else {
        for (std::size_t k = 0; k < n; ++k) {
            s.segments.push_back({resonant(n, {k}), pi / (2.0 * params.lambda_m[k]),
                                  "cavity " + std::to_string(k + 1) + " full swap into magnon " +
                                      std::to_string(k + 1)});
        }
    }
    s.validate();
    return s;
}

std::vector<cplx> analytic_coefficients(std::size_t n, double lambda_eff, double t) {
    if (n < 2) throw ParameterError("analytic_coefficients requires n >= 2");
    const double nn = static_cast<double>(n);
    const cplx phase = std::polar(1.0, nn * lambda_eff * t);
    std::vector<cplx> c(n, (phase - 1.0) / nn);
    c[0] = (phase + (nn - 1.0)) / nn;
    return c;
}

std::optional<double> isoprobability_time(std::size_t n, double lambda_eff) {
    if (n < 2) throw ParameterError("isoprobability_time requires n >= 2");
    const double nn = static_cast<double>(n);
    const double c = (2.0 - nn) / 2.0;
    if (std::abs(c) > 1.0) return std::nullopt;
    return std::acos(c) / (nn * lambda_eff);
}

QuantumState TargetState::ket() const {
    Vector psi = Vector::Zero(static_cast<Eigen::Index>(layout->total_dim()));
    for (std::size_t k = 0; k < coefficients.size(); ++k) {
        const auto idx = basis_ket(layout, {{magnon_label(k + 1), 1}}).ket();
        psi += coefficients[k] * idx;
    }
    return QuantumState::from_ket(layout, std::move(psi));
}

TargetState n_magnon_target(const LayoutPtr& layout, std::size_t n, double lambda_eff,
                            double qubit_segment_duration) {
    if (layout->n_magnons() != n) throw ParameterError("target layout has the wrong number of magnons");
    auto c = analytic_coefficients(n, lambda_eff, qubit_segment_duration);
    for (auto& x : c) x = -x;
    return {layout, std::move(c)};
}

TargetState bell_target(const LayoutPtr& layout) {
    if (layout->n_magnons() != 2) throw ParameterError("Bell target needs two magnons");
    const double r = 1.0 / std::numbers::sqrt2;
    return {layout, {r, r}};
}

TargetState target_state(const LayoutPtr& layout, const ProtocolSchedule& schedule) {
    if (schedule.kind == ProtocolKind::two_magnon_bell) return bell_target(layout);
    return n_magnon_target(layout, schedule.n_magnons, schedule.params.effective_coupling(),
                           schedule.qubit_segment_duration());
}

QuantumState initial_state(const LayoutPtr& layout) {
    return basis_ket(layout, {{magnon_label(1), 1}});
}

double phase_insensitive_fidelity(const QuantumState& state, const QuantumState& target) {
    const Vector mag = target.ket().cwiseAbs().cast<cplx>();
    double f = 0.0;
    if (state.is_ket()) {
        const Vector amp = state.ket().cwiseAbs().cast<cplx>();
        f = std::norm(mag.dot(amp));
    } else {
        const Matrix abs_rho = state.density().cwiseAbs().cast<cplx>();
        f = mag.dot(abs_rho * mag).real();
    }
    return std::clamp(f, 0.0, 1.0);
}

double qubit_excited_population(const SystemLayout& layout, const std::vector<double>& populations) {
    const std::size_t stride = layout.stride(layout.qubit_index());
    double p = 0.0;
    for (std::size_t i = 0; i < populations.size(); ++i) {
        if ((i / stride) % 2 == 1) p += populations[i];
    }
    return p;
}

ProtocolRun execute(const ProtocolSchedule& schedule, const ExecuteOptions& options) {
    schedule.validate();
    const auto layout = build_layout(schedule.n_magnons, options.boson_truncation);
    const PhysicalParams& params = schedule.params;
    const TargetState target = target_state(layout, schedule);
    const QuantumState target_ket = target.ket();

    QuantumState state = initial_state(layout);
    if (options.engine == Engine::lindblad) state = state.to_density();
    const CollapseSet collapse =
        options.engine == Engine::lindblad ? standard_collapse_set(layout, params) : CollapseSet{};

    std::optional<SimulationResult> total;
    double t = 0.0;
    for (const auto& seg : schedule.segments) {
        SegmentConfig cfg = seg.config;
        cfg.include_residual_qm = cfg.include_residual_qm || options.include_residual_qm;
        if (options.idle_detuning) {
            for (auto& d : cfg.magnon_detuning) {
                if (!d) d = *options.idle_detuning;
            }
        }

        HarmonicHamiltonian h;
        if (options.engine == Engine::ideal_effective && cfg.qubit_cavity_active) {
            SegmentConfig rest = cfg;
            rest.qubit_cavity_active = false;
            h = full_hamiltonian(layout, params, rest);
            h.static_part += build_effective_hamiltonian(layout, params, schedule.n_magnons).entries;
        } else {
            h = full_hamiltonian(layout, params, cfg);
        }

        EvolveOptions eo;
        eo.start_time = t;
        eo.clock_origin = options.clock == PhaseClock::global ? 0.0 : t;
        eo.step = options.step;
        eo.target = target_ket;

        SimulationResult part = options.engine == Engine::lindblad
                                    ? evolve_lindblad(state, h, collapse, seg.duration, eo)
                                    : evolve_ket(state, h, seg.duration, eo);
        state = part.final_state;
        t += seg.duration;
        if (total) {
            total->append(part);
        } else {
            total = std::move(part);
        }
    }

    ProtocolRun run{*total, target, fidelity(state, target_ket), phase_insensitive_fidelity(state, target_ket),
                    0.0, 0.0};
    for (const auto& pops : run.result.populations) {
        run.max_qubit_excited = std::max(run.max_qubit_excited, qubit_excited_population(*layout, pops));
    }
    run.final_qubit_excited = qubit_excited_population(*layout, state.populations());
    return run;
}

namespace {

std::string format_number(double v) {
    std::ostringstream os;
    os << std::setprecision(std::numeric_limits<double>::max_digits10) << v;
    return os.str();
}

double parse_number(const std::string& s, std::size_t line) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != s.size() || s.empty()) {
        throw ScheduleError("line " + std::to_string(line) + ": '" + s + "' is not a number");
    }
    return v;
}

std::string kind_name(ProtocolKind k) {
    return k == ProtocolKind::two_magnon_bell ? "two-magnon-bell" : "n-magnon";
}

}  // namespace

std::string schedule_to_text(const ProtocolSchedule& schedule) {
    std::ostringstream os;
    os << "protocol=" << kind_name(schedule.kind) << " n=" << schedule.n_magnons << '\n';
    for (const auto& seg : schedule.segments) {
        os << "segment detunings_mhz=";
        for (std::size_t k = 0; k < seg.config.magnon_detuning.size(); ++k) {
            if (k) os << ',';
            const auto& d = seg.config.magnon_detuning[k];
            os << (d ? format_number(to_mhz(*d)) : std::string("DECOUPLED"));
        }
        os << " qubit=" << (seg.config.qubit_cavity_active ? "on" : "off");
        os << " residual_qm=" << (seg.config.include_residual_qm ? "on" : "off");
        os << " duration_ns=" << format_number(seg.duration);
        os << " | " << seg.description << '\n';
    }
    return os.str();
}

ProtocolSchedule schedule_from_text(const std::string& text, const PhysicalParams& params) {
    std::istringstream in(text);
    std::string raw;
    std::size_t line_no = 0;
    std::optional<ProtocolSchedule> s;

    auto on_off = [](const std::string& v, std::size_t line) {
        if (v == "on") return true;
        if (v == "off") return false;
        throw ScheduleError("line " + std::to_string(line) + ": expected on/off, got '" + v + "'");
    };

    while (std::getline(in, raw)) {
        ++line_no;
        std::string description;
        if (auto bar = raw.find(" | "); bar != std::string::npos) {
            description = raw.substr(bar + 3);
            raw.resize(bar);
        }
        std::istringstream fields(raw);
        std::string head;
        if (!(fields >> head) || head.starts_with("#")) continue;

        std::vector<std::pair<std::string, std::string>> kv;
        auto add = [&](const std::string& tok) {
            const auto eq = tok.find('=');
            if (eq == std::string::npos) {
                throw ScheduleError("line " + std::to_string(line_no) + ": expected key=value, got '" + tok + "'");
            }
            kv.emplace_back(tok.substr(0, eq), tok.substr(eq + 1));
        };

        if (head.starts_with("protocol=")) {
            add(head);
            for (std::string tok; fields >> tok;) add(tok);
            ProtocolSchedule sched;
            for (const auto& [k, v] : kv) {
                if (k == "protocol") {
                    if (v == "two-magnon-bell") sched.kind = ProtocolKind::two_magnon_bell;
                    else if (v == "n-magnon") sched.kind = ProtocolKind::n_magnon;
                    else throw ScheduleError("line " + std::to_string(line_no) + ": unknown protocol '" + v + "'");
                } else if (k == "n") {
                    sched.n_magnons = static_cast<std::size_t>(parse_number(v, line_no));
                } else {
                    throw ScheduleError("line " + std::to_string(line_no) + ": unknown key '" + k + "'");
                }
            }
            if (sched.n_magnons == 0) throw ScheduleError("header must give n >= 1");
            sched.params = params.with_magnons(sched.n_magnons);
            s = std::move(sched);
            continue;
        }
        if (head != "segment") {
            throw ScheduleError("line " + std::to_string(line_no) + ": unexpected '" + head + "'");
        }
        if (!s) throw ScheduleError("line " + std::to_string(line_no) + ": segment before header");
        for (std::string tok; fields >> tok;) add(tok);

        Segment seg;
        seg.description = description;
        bool have_duration = false;
        bool have_detunings = false;
        for (const auto& [k, v] : kv) {
            if (k == "detunings_mhz") {
                std::istringstream list(v);
                for (std::string item; std::getline(list, item, ',');) {
                    if (item == "DECOUPLED") seg.config.magnon_detuning.emplace_back(std::nullopt);
                    else seg.config.magnon_detuning.emplace_back(from_mhz(parse_number(item, line_no)));
                }
                have_detunings = true;
            } else if (k == "qubit") {
                seg.config.qubit_cavity_active = on_off(v, line_no);
            } else if (k == "residual_qm") {
                seg.config.include_residual_qm = on_off(v, line_no);
            } else if (k == "duration_ns") {
                seg.duration = parse_number(v, line_no);
                have_duration = true;
            } else {
                throw ScheduleError("line " + std::to_string(line_no) + ": unknown key '" + k + "'");
            }
        }
        if (!have_duration || !have_detunings) {
            throw ScheduleError("line " + std::to_string(line_no) + ": segment needs detunings_mhz and duration_ns");
        }
        s->segments.push_back(std::move(seg));
    }
    if (!s) throw ScheduleError("schedule text has no protocol header");
    s->validate();
    return *s;
}

std::string to_string(Engine engine) {
    switch (engine) {
        case Engine::ideal_effective: return "ideal-effective";
        case Engine::full_unitary: return "full-unitary";
        case Engine::lindblad: return "lindblad";
    }
    return "unknown";
}

Engine engine_from_string(const std::string& name) {
    if (name == "ideal-effective") return Engine::ideal_effective;
    if (name == "full-unitary") return Engine::full_unitary;
    if (name == "lindblad") return Engine::lindblad;
    throw ParameterError("unknown engine '" + name + "' (expected ideal-effective, full-unitary or lindblad)");
}

}  // namespace magnon
