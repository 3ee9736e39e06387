#include "magnon/dynamics.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>

namespace magnon {

namespace {

// Coordinate-list operator; the products below stream whole columns, which is
// several times faster than Eigen's generic sparse * dense for ladder operators.
struct Sparse {
    std::vector<Eigen::Index> rows;
    std::vector<Eigen::Index> cols;
    std::vector<cplx> values;

    std::size_t nonZeros() const noexcept { return values.size(); }

    // out += scale * A * in
    void add_left(const Matrix& in, Matrix& out, cplx scale = 1.0) const {
        const Eigen::Index n = in.cols();
        const Eigen::Index ld_in = in.rows();
        const Eigen::Index ld_out = out.rows();
        const cplx* src = in.data();
        cplx* dst = out.data();
        for (Eigen::Index j = 0; j < n; ++j) {
            const cplx* col_in = src + j * ld_in;
            cplx* col_out = dst + j * ld_out;
            for (std::size_t k = 0; k < values.size(); ++k) {
                col_out[rows[k]] += scale * values[k] * col_in[cols[k]];
            }
        }
    }

    // out += scale * in * A^dag
    void add_right_adjoint(const Matrix& in, Matrix& out, cplx scale = 1.0) const {
        for (std::size_t k = 0; k < values.size(); ++k) {
            out.col(rows[k]) += (scale * std::conj(values[k])) * in.col(cols[k]);
        }
    }
};

Sparse to_sparse(const Matrix& m) {
    Sparse s;
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            if (m(r, c) != cplx{}) {
                s.rows.push_back(r);
                s.cols.push_back(c);
                s.values.push_back(m(r, c));
            }
        }
    }
    return s;
}

// Basis states kept during integration; position maps full -> reduced index (-1 if dropped).
struct Support {
    std::vector<Eigen::Index> kept;
    std::vector<Eigen::Index> position;

    Eigen::Index size() const noexcept { return static_cast<Eigen::Index>(kept.size()); }
    bool is_full() const noexcept { return kept.size() == position.size(); }

    static Support all(Eigen::Index dim) {
        Support s;
        for (Eigen::Index i = 0; i < dim; ++i) {
            s.kept.push_back(i);
            s.position.push_back(i);
        }
        return s;
    }
};

// Closure of the seed indices under "column j feeds row i" for every operator.
Support reachable(Eigen::Index dim, const std::vector<Eigen::Index>& seed,
                  const std::vector<const Sparse*>& operators) {
    std::vector<std::vector<Eigen::Index>> edges(static_cast<std::size_t>(dim));
    for (const Sparse* op : operators) {
        for (std::size_t k = 0; k < op->values.size(); ++k) {
            edges[static_cast<std::size_t>(op->cols[k])].push_back(op->rows[k]);
        }
    }
    std::vector<bool> seen(static_cast<std::size_t>(dim), false);
    std::vector<Eigen::Index> queue;
    for (Eigen::Index i : seed) {
        if (!seen[static_cast<std::size_t>(i)]) {
            seen[static_cast<std::size_t>(i)] = true;
            queue.push_back(i);
        }
    }
    for (std::size_t head = 0; head < queue.size(); ++head) {
        for (Eigen::Index next : edges[static_cast<std::size_t>(queue[head])]) {
            if (!seen[static_cast<std::size_t>(next)]) {
                seen[static_cast<std::size_t>(next)] = true;
                queue.push_back(next);
            }
        }
    }
    Support s;
    s.position.assign(static_cast<std::size_t>(dim), -1);
    for (Eigen::Index i = 0; i < dim; ++i) {
        if (seen[static_cast<std::size_t>(i)]) {
            s.position[static_cast<std::size_t>(i)] = static_cast<Eigen::Index>(s.kept.size());
            s.kept.push_back(i);
        }
    }
    return s;
}

Sparse restrict_to(const Sparse& op, const Support& support) {
    if (support.is_full()) return op;
    Sparse out;
    for (std::size_t k = 0; k < op.values.size(); ++k) {
        const Eigen::Index r = support.position[static_cast<std::size_t>(op.rows[k])];
        const Eigen::Index c = support.position[static_cast<std::size_t>(op.cols[k])];
        if (r >= 0 && c >= 0) {
            out.rows.push_back(r);
            out.cols.push_back(c);
            out.values.push_back(op.values[k]);
        }
    }
    return out;
}

std::vector<Eigen::Index> initial_support(const QuantumState& state) {
    std::vector<Eigen::Index> idx;
    if (state.is_ket()) {
        const Vector& psi = state.ket();
        for (Eigen::Index i = 0; i < psi.size(); ++i) {
            if (psi(i) != cplx{}) idx.push_back(i);
        }
    } else {
        const Matrix& rho = state.density();
        for (Eigen::Index i = 0; i < rho.rows(); ++i) {
            if ((rho.row(i).array() != cplx{}).any()) idx.push_back(i);
        }
    }
    return idx;
}

// Writes H(t) * in into out (out is resized as needed, never aliased with in).
class Generator {
public:
    virtual ~Generator() = default;
    virtual void apply(double t, const Matrix& in, Matrix& out) const = 0;
    // Sparsity patterns for support reduction; empty when unknown.
    virtual std::vector<const Sparse*> patterns() const { return {}; }
    virtual void restrict(const Support&) {}
    double scale{0.0};  // fastest angular rate, used for step planning
};

// static_part + sum_k (B_k e^{i w_k t} + B_k^dag e^{-i w_k t})
class SparseGenerator final : public Generator {
public:
    explicit SparseGenerator(const HarmonicHamiltonian& h) : static_(to_sparse(h.static_part)) {
        for (const auto& term : h.terms) {
            terms_.push_back({to_sparse(term.coupling), to_sparse(term.coupling.adjoint()), term.frequency});
        }
        scale = std::max(h.max_frequency(), h.norm_bound());
    }

    explicit SparseGenerator(const OperatorMatrix& h) : static_(to_sparse(h.entries)) {
        std::vector<double> rows(static_cast<std::size_t>(h.entries.rows()), 0.0);
        for (std::size_t k = 0; k < static_.values.size(); ++k) {
            rows[static_cast<std::size_t>(static_.rows[k])] += std::abs(static_.values[k]);
        }
        scale = rows.empty() ? 0.0 : *std::max_element(rows.begin(), rows.end());
    }

    void apply(double t, const Matrix& in, Matrix& out) const override {
        out.setZero(in.rows(), in.cols());
        static_.add_left(in, out);
        for (const auto& term : terms_) {
            const cplx phase = std::polar(1.0, term.frequency * t);
            term.forward.add_left(in, out, phase);
            term.backward.add_left(in, out, std::conj(phase));
        }
    }

    std::vector<const Sparse*> patterns() const override {
        std::vector<const Sparse*> p{&static_};
        for (const auto& term : terms_) {
            p.push_back(&term.forward);
            p.push_back(&term.backward);
        }
        return p;
    }

    void restrict(const Support& support) override {
        static_ = restrict_to(static_, support);
        for (auto& term : terms_) {
            term.forward = restrict_to(term.forward, support);
            term.backward = restrict_to(term.backward, support);
        }
    }

private:
    struct Term {
        Sparse forward;
        Sparse backward;
        double frequency;
    };
    Sparse static_;
    std::vector<Term> terms_;
};

class CallableGenerator final : public Generator {
public:
    explicit CallableGenerator(HamiltonianFn fn) : fn_(std::move(fn)) {}
    void apply(double t, const Matrix& in, Matrix& out) const override { out.noalias() = fn_(t).entries * in; }

private:
    HamiltonianFn fn_;
};

// Classical fourth-order Runge-Kutta with reusable stage buffers.
class Rk4 {
public:
    Rk4(Eigen::Index rows, Eigen::Index cols)
        : k1_(rows, cols), k2_(rows, cols), k3_(rows, cols), k4_(rows, cols), stage_(rows, cols) {}

    // derivative(t, y, dy) must write dy/dt into dy.
    template <class F>
    void step(F&& derivative, double t, double h, Matrix& y) {
        derivative(t, y, k1_);
        stage_ = y + (0.5 * h) * k1_;
        derivative(t + 0.5 * h, stage_, k2_);
        stage_ = y + (0.5 * h) * k2_;
        derivative(t + 0.5 * h, stage_, k3_);
        stage_ = y + h * k3_;
        derivative(t + h, stage_, k4_);
        y += (h / 6.0) * (k1_ + 2.0 * k2_ + 2.0 * k3_ + k4_);
    }

private:
    Matrix k1_, k2_, k3_, k4_, stage_;
};

std::unique_ptr<Generator> make_generator(const HamiltonianSource& source) {
    return std::visit(
        [](const auto& h) -> std::unique_ptr<Generator> {
            using T = std::decay_t<decltype(h)>;
            if constexpr (std::is_same_v<T, HamiltonianFn>) {
                return std::make_unique<CallableGenerator>(h);
            } else {
                return std::make_unique<SparseGenerator>(h);
            }
        },
        source);
}

void check_layout(const QuantumState& state, const HamiltonianSource& source) {
    const LayoutPtr* layout = nullptr;
    if (auto* h = std::get_if<HarmonicHamiltonian>(&source)) layout = &h->layout;
    if (auto* h = std::get_if<OperatorMatrix>(&source)) layout = &h->layout;
    if (layout && *layout && !(**layout == *state.layout())) {
        throw IntegrationError("Hamiltonian and state belong to different layouts");
    }
}

double min_eig(const Matrix& rho) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(rho, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff();
}

// Samples are reported on the full basis even when integration runs on a subset.
struct Recorder {
    SimulationResult* result;
    const Support* support;
    std::optional<Vector> target;  // restricted to the support

    std::vector<double> spread(const auto& reduced_pops) const {
        std::vector<double> pops(support->position.size(), 0.0);
        for (Eigen::Index k = 0; k < support->size(); ++k) {
            pops[static_cast<std::size_t>(support->kept[static_cast<std::size_t>(k)])] = reduced_pops(k);
        }
        return pops;
    }

    void record_ket(double t, const Matrix& psi) {
        result->times.push_back(t);
        result->populations.push_back(spread(psi.col(0).cwiseAbs2()));
        result->weights.push_back(psi.squaredNorm());
        if (target) result->fidelity_series.push_back(std::norm(target->dot(psi.col(0))));
    }

    void record_density(double t, const Matrix& rho) {
        result->times.push_back(t);
        result->populations.push_back(spread(rho.diagonal().real()));
        result->weights.push_back(rho.trace().real());
        if (target) result->fidelity_series.push_back(target->dot(rho * *target).real());
    }
};

Support choose_support(const QuantumState& state, const Generator& gen, const StepControl& control,
                       std::vector<const Sparse*> extra = {}) {
    const auto dim = static_cast<Eigen::Index>(state.dim());
    auto patterns = gen.patterns();
    if (!control.reduce_support || patterns.empty()) return Support::all(dim);
    patterns.insert(patterns.end(), extra.begin(), extra.end());
    return reachable(dim, initial_support(state), patterns);
}

std::optional<Vector> restricted_target(const std::optional<QuantumState>& target, const Support& support) {
    if (!target) return std::nullopt;
    const Vector& full = target->ket();
    Vector out(support.size());
    for (Eigen::Index k = 0; k < support.size(); ++k) out(k) = full(support.kept[static_cast<std::size_t>(k)]);
    return out;
}

std::size_t record_stride(std::size_t steps, const StepControl& control) {
    if (control.max_records == 0) return steps;
    return std::max<std::size_t>(1, (steps + control.max_records - 1) / control.max_records);
}

void require_duration(double duration) {
    if (!(duration > 0.0) || !std::isfinite(duration)) {
        throw IntegrationError("duration must be positive and finite");
    }
}

}  // namespace

StepPlan plan_steps(double duration, double max_frequency, const StepControl& control) {
    require_duration(duration);
    double h = 0.0;
    if (control.fixed_step) {
        if (!(*control.fixed_step > 0.0)) throw IntegrationError("fixed step must be positive");
        h = *control.fixed_step;
    } else {
        h = duration / static_cast<double>(std::max<std::size_t>(control.min_steps, 1));
        if (max_frequency > 0.0) {
            h = std::min(h, 1.0 / (control.points_per_radian * max_frequency));
        }
    }
    const auto steps = static_cast<std::size_t>(std::ceil(duration / h - 1e-9));
    const std::size_t n = std::max<std::size_t>(steps, 1);
    return {n, duration / static_cast<double>(n)};
}

CollapseSet standard_collapse_set(const LayoutPtr& layout, const PhysicalParams& params) {
    params.validate();
    if (layout->n_magnons() != params.n_magnons()) {
        throw ParameterError("layout and parameters disagree on the number of magnons");
    }
    CollapseSet set;
    for (std::size_t k = 1; k <= params.n_magnons(); ++k) {
        if (params.kappa_m[k - 1] > 0.0) {
            set.push_back({annihilation(layout, magnon_label(k)), params.kappa_m[k - 1], magnon_label(k)});
        }
    }
    for (std::size_t k = 1; k <= params.n_magnons(); ++k) {
        if (params.kappa_a[k - 1] > 0.0) {
            set.push_back({annihilation(layout, cavity_label(k)), params.kappa_a[k - 1], cavity_label(k)});
        }
    }
    if (params.gamma_q > 0.0) {
        set.push_back({qubit_ops(layout).lower, params.gamma_q, qubit_label});
    }
    return set;
}

void SimulationResult::append(const SimulationResult& later) {
    const std::size_t skip = times.empty() ? 0 : 1;
    auto join = [skip](auto& into, const auto& from) {
        if (from.size() > skip) into.insert(into.end(), from.begin() + static_cast<std::ptrdiff_t>(skip), from.end());
    };
    join(times, later.times);
    join(populations, later.populations);
    join(weights, later.weights);
    join(fidelity_series, later.fidelity_series);
    min_eigenvalue = std::min(min_eigenvalue, later.min_eigenvalue);
    steps_taken += later.steps_taken;
    integrated_dim = std::max(integrated_dim, later.integrated_dim);
    step_size = std::max(step_size, later.step_size);
    final_state = later.final_state;
}

SimulationResult evolve_ket(const QuantumState& state, const HamiltonianSource& hamiltonian,
                            double duration, const EvolveOptions& options) {
    if (!state.is_ket()) throw IntegrationError("evolve_ket requires a ket");
    check_layout(state, hamiltonian);
    if (options.target && !options.target->is_ket()) throw IntegrationError("target must be a ket");

    const auto gen = make_generator(hamiltonian);
    const StepPlan plan = plan_steps(duration, gen->scale, options.step);
    const double h = plan.step;
    const std::size_t stride = record_stride(plan.steps, options.step);
    const cplx minus_i{0.0, -1.0};

    const Support support = choose_support(state, *gen, options.step);
    gen->restrict(support);
    const Eigen::Index dim = support.size();

    SimulationResult result{{}, {}, {}, {}, 0.0, plan.steps, static_cast<std::size_t>(dim), h, state};
    Recorder rec{&result, &support, restricted_target(options.target, support)};

    Matrix psi(dim, 1);
    for (Eigen::Index k = 0; k < dim; ++k) psi(k, 0) = state.ket()(support.kept[static_cast<std::size_t>(k)]);
    const double initial = psi.squaredNorm();
    auto rhs = [&](double t, const Matrix& y, Matrix& dy) {
        gen->apply(t - options.clock_origin, y, dy);
        dy *= minus_i;
    };
    Rk4 rk(psi.rows(), psi.cols());

    rec.record_ket(options.start_time, psi);
    for (std::size_t s = 0; s < plan.steps; ++s) {
        const double t = options.start_time + static_cast<double>(s) * h;
        rk.step(rhs, t, h, psi);

        const bool last = s + 1 == plan.steps;
        if (last || (s + 1) % stride == 0) {
            const double drift = std::abs(psi.squaredNorm() - initial);
            if (!(drift <= options.step.norm_tolerance)) {
                std::ostringstream os;
                os << "norm drift " << drift << " exceeds " << options.step.norm_tolerance
                   << " at t = " << t + h << " ns (step " << h << " ns)";
                throw IntegrationError(os.str());
            }
            rec.record_ket(last ? options.start_time + duration : t + h, psi);
        }
    }
    Vector full = Vector::Zero(static_cast<Eigen::Index>(state.dim()));
    for (Eigen::Index k = 0; k < dim; ++k) full(support.kept[static_cast<std::size_t>(k)]) = psi(k, 0);
    result.final_state = QuantumState::from_ket(state.layout(), std::move(full));
    return result;
}

SimulationResult evolve_lindblad(const QuantumState& state, const HamiltonianSource& hamiltonian,
                                 const CollapseSet& collapse, double duration,
                                 const EvolveOptions& options) {
    check_layout(state, hamiltonian);
    if (options.target && !options.target->is_ket()) throw IntegrationError("target must be a ket");

    const auto gen = make_generator(hamiltonian);
    const auto full_dim = static_cast<Eigen::Index>(state.dim());

    std::vector<Sparse> ops;
    std::vector<double> rates;
    Matrix k_dense = Matrix::Zero(full_dim, full_dim);
    double rate_scale = 0.0;
    for (const auto& c : collapse) {
        if (c.rate < 0.0) throw ParameterError("collapse rates must be non-negative");
        if (!(*c.op.layout == *state.layout())) {
            throw IntegrationError("collapse operator belongs to a different layout");
        }
        if (c.rate == 0.0) continue;
        ops.push_back(to_sparse(c.op.entries));
        rates.push_back(c.rate);
        k_dense += c.rate * sparse_product(c.op.entries.adjoint(), c.op.entries);
        rate_scale += c.rate;
    }
    Sparse half_k = to_sparse(0.5 * k_dense);

    std::vector<const Sparse*> extra{&half_k};
    for (const auto& op : ops) extra.push_back(&op);
    const Support support = choose_support(state, *gen, options.step, extra);
    gen->restrict(support);
    half_k = restrict_to(half_k, support);
    struct Channel {
        Sparse op;
        double rate;
    };
    std::vector<Channel> channels;
    for (std::size_t i = 0; i < ops.size(); ++i) channels.push_back({restrict_to(ops[i], support), rates[i]});
    const bool dissipative = !channels.empty();
    const Eigen::Index dim = support.size();

    const StepPlan plan = plan_steps(duration, std::max(gen->scale, rate_scale), options.step);
    const double h = plan.step;
    const std::size_t stride = record_stride(plan.steps, options.step);
    const cplx minus_i{0.0, -1.0};

    SimulationResult result{{}, {}, {}, {}, 0.0, plan.steps, static_cast<std::size_t>(dim), h, state};
    Recorder rec{&result, &support, restricted_target(options.target, support)};

    Matrix rho(dim, dim);
    {
        const Matrix full = state.as_density();
        for (Eigen::Index c = 0; c < dim; ++c) {
            for (Eigen::Index r = 0; r < dim; ++r) {
                rho(r, c) = full(support.kept[static_cast<std::size_t>(r)], support.kept[static_cast<std::size_t>(c)]);
            }
        }
    }
    const double initial = rho.trace().real();

    // d rho/dt = M + M^dag + sum_k rate_k X_k rho X_k^dag,  M = (-i H - K/2) rho
    Matrix m(dim, dim);
    Matrix xr(dim, dim);
    Matrix scratch(dim, dim);
    auto rhs = [&](double t, const Matrix& r, Matrix& out) {
        gen->apply(t - options.clock_origin, r, m);
        m *= minus_i;
        if (dissipative) half_k.add_left(r, m, -1.0);
        out = m + m.adjoint();
        for (const auto& ch : channels) {
            xr.setZero();
            ch.op.add_left(r, xr);
            ch.op.add_right_adjoint(xr, out, ch.rate);
        }
    };
    Rk4 rk(dim, dim);

    auto check = [&](double t) {
        const double drift = std::abs(rho.trace().real() - initial);
        if (!(drift <= options.step.trace_tolerance)) {
            std::ostringstream os;
            os << "trace drift " << drift << " exceeds " << options.step.trace_tolerance << " at t = " << t
               << " ns";
            throw IntegrationError(os.str());
        }
        if (options.step.check_positivity) {
            const double lo = min_eig(rho);
            result.min_eigenvalue = std::min(result.min_eigenvalue, lo);
            if (lo < options.step.positivity_floor) {
                std::ostringstream os;
                os << "density matrix eigenvalue " << lo << " below " << options.step.positivity_floor
                   << " at t = " << t << " ns; reduce the step (" << h << " ns)";
                throw PositivityError(os.str());
            }
        }
    };

    // dropped basis states contribute exact zero eigenvalues
    if (options.step.check_positivity) result.min_eigenvalue = std::min(0.0, min_eig(rho));
    rec.record_density(options.start_time, rho);
    for (std::size_t s = 0; s < plan.steps; ++s) {
        const double t = options.start_time + static_cast<double>(s) * h;
        rk.step(rhs, t, h, rho);
        scratch = rho.adjoint();
        rho = 0.5 * (rho + scratch);

        const bool last = s + 1 == plan.steps;
        if (last || (s + 1) % stride == 0) {
            const double tr = last ? options.start_time + duration : t + h;
            check(tr);
            rec.record_density(tr, rho);
        }
    }
    Matrix full = Matrix::Zero(full_dim, full_dim);
    for (Eigen::Index c = 0; c < dim; ++c) {
        for (Eigen::Index r = 0; r < dim; ++r) {
            full(support.kept[static_cast<std::size_t>(r)], support.kept[static_cast<std::size_t>(c)]) = rho(r, c);
        }
    }
    result.final_state = QuantumState::from_density(state.layout(), std::move(full));
    return result;
}

double fidelity(const QuantumState& rho, const QuantumState& target) {
    if (!(*rho.layout() == *target.layout())) {
        throw StateError("fidelity: states belong to different layouts");
    }
    const Vector& phi = target.ket();
    double f = 0.0;
    if (rho.is_ket()) {
        f = std::norm(phi.dot(rho.ket()));
    } else {
        f = phi.dot(rho.density() * phi).real();
    }
    return std::clamp(f, 0.0, 1.0);
}

}  // namespace magnon
