#include "magnon/hilbert.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace magnon {

SystemLayout::SystemLayout(std::vector<Subsystem> subsystems) : subsystems_(std::move(subsystems)) {
    if (subsystems_.empty()) {
        throw LayoutError("layout must contain at least one subsystem");
    }
    std::set<std::string> seen;
    std::size_t qubits = 0;
    for (const auto& s : subsystems_) {
        if (s.local_dim < 2) {
            throw LayoutError("subsystem '" + s.label + "' has local dimension < 2");
        }
        if (!seen.insert(s.label).second) {
            throw LayoutError("duplicate subsystem label '" + s.label + "'");
        }
        if (s.kind == SubsystemKind::qubit) {
            if (s.local_dim != 2) {
                throw LayoutError("qubit '" + s.label + "' must have local dimension 2");
            }
            ++qubits;
        } else if (s.label.starts_with("m")) {
            ++n_magnons_;
        }
    }
    if (qubits != 1) {
        throw LayoutError("layout must contain exactly one qubit");
    }
    strides_.assign(subsystems_.size(), 1);
    for (std::size_t k = subsystems_.size(); k-- > 0;) {
        strides_[k] = total_dim_;
        total_dim_ *= subsystems_[k].local_dim;
    }
}

std::size_t SystemLayout::index_of(const std::string& label) const {
    for (std::size_t k = 0; k < subsystems_.size(); ++k) {
        if (subsystems_[k].label == label) return k;
    }
    throw LayoutError("unknown subsystem label '" + label + "'");
}

bool SystemLayout::contains(const std::string& label) const noexcept {
    return std::any_of(subsystems_.begin(), subsystems_.end(),
                       [&](const Subsystem& s) { return s.label == label; });
}

std::size_t SystemLayout::qubit_index() const {
    for (std::size_t k = 0; k < subsystems_.size(); ++k) {
        if (subsystems_[k].kind == SubsystemKind::qubit) return k;
    }
    throw LayoutError("layout has no qubit");
}

std::vector<std::size_t> SystemLayout::digits(std::size_t basis_index) const {
    std::vector<std::size_t> out(subsystems_.size());
    for (std::size_t k = 0; k < subsystems_.size(); ++k) {
        out[k] = (basis_index / strides_[k]) % subsystems_[k].local_dim;
    }
    return out;
}

std::size_t SystemLayout::flat_index(const std::vector<std::size_t>& digits) const {
    if (digits.size() != subsystems_.size()) {
        throw LayoutError("digit count does not match layout");
    }
    std::size_t idx = 0;
    for (std::size_t k = 0; k < digits.size(); ++k) {
        if (digits[k] >= subsystems_[k].local_dim) {
            throw LayoutError("occupation of '" + subsystems_[k].label + "' exceeds truncation");
        }
        idx += digits[k] * strides_[k];
    }
    return idx;
}

std::string SystemLayout::basis_label(std::size_t basis_index) const {
    const auto d = digits(basis_index);
    std::ostringstream os;
    for (std::size_t k = 0; k < d.size(); ++k) {
        if (k) os << ',';
        os << subsystems_[k].label << '=';
        if (subsystems_[k].kind == SubsystemKind::qubit) {
            os << (d[k] ? 'e' : 'g');
        } else {
            os << d[k];
        }
    }
    return os.str();
}

bool SystemLayout::operator==(const SystemLayout& other) const {
    if (subsystems_.size() != other.subsystems_.size()) return false;
    for (std::size_t k = 0; k < subsystems_.size(); ++k) {
        const auto& a = subsystems_[k];
        const auto& b = other.subsystems_[k];
        if (a.label != b.label || a.kind != b.kind || a.local_dim != b.local_dim) return false;
    }
    return true;
}

std::string magnon_label(std::size_t n) { return "m" + std::to_string(n); }
std::string cavity_label(std::size_t n) { return "a" + std::to_string(n); }

LayoutPtr build_layout(std::size_t n_magnons, std::size_t boson_truncation) {
    if (n_magnons == 0) {
        throw LayoutError("n_magnons must be at least 1");
    }
    if (boson_truncation < 2) {
        throw LayoutError("boson_truncation must be at least 2");
    }
    std::vector<Subsystem> subs;
    subs.reserve(2 * n_magnons + 1);
    for (std::size_t n = 1; n <= n_magnons; ++n) {
        subs.push_back({magnon_label(n), SubsystemKind::boson, boson_truncation});
    }
    for (std::size_t n = 1; n <= n_magnons; ++n) {
        subs.push_back({cavity_label(n), SubsystemKind::boson, boson_truncation});
    }
    subs.push_back({qubit_label, SubsystemKind::qubit, 2});
    return std::make_shared<const SystemLayout>(std::move(subs));
}

namespace {

void require_same_layout(const OperatorMatrix& lhs, const OperatorMatrix& rhs) {
    if (lhs.layout != rhs.layout && !(*lhs.layout == *rhs.layout)) {
        throw LayoutError("operators belong to different layouts");
    }
}

}  // namespace

Matrix sparse_product(const Matrix& lhs, const Matrix& rhs) {
    using Sparse = Eigen::SparseMatrix<cplx>;
    const Sparse a = lhs.sparseView();
    const Sparse b = rhs.sparseView();
    return Matrix(a * b);
}

OperatorMatrix operator+(const OperatorMatrix& lhs, const OperatorMatrix& rhs) {
    require_same_layout(lhs, rhs);
    return {lhs.layout, lhs.entries + rhs.entries};
}

OperatorMatrix operator-(const OperatorMatrix& lhs, const OperatorMatrix& rhs) {
    require_same_layout(lhs, rhs);
    return {lhs.layout, lhs.entries - rhs.entries};
}

OperatorMatrix operator*(const OperatorMatrix& lhs, const OperatorMatrix& rhs) {
    require_same_layout(lhs, rhs);
    return {lhs.layout, sparse_product(lhs.entries, rhs.entries)};
}

OperatorMatrix operator*(cplx scale, const OperatorMatrix& op) {
    return {op.layout, scale * op.entries};
}

OperatorMatrix zero_operator(const LayoutPtr& layout) {
    const auto n = static_cast<Eigen::Index>(layout->total_dim());
    return {layout, Matrix::Zero(n, n)};
}

OperatorMatrix identity_operator(const LayoutPtr& layout) {
    const auto n = static_cast<Eigen::Index>(layout->total_dim());
    return {layout, Matrix::Identity(n, n)};
}

OperatorMatrix commutator(const OperatorMatrix& lhs, const OperatorMatrix& rhs) {
    require_same_layout(lhs, rhs);
    return {lhs.layout, sparse_product(lhs.entries, rhs.entries) - sparse_product(rhs.entries, lhs.entries)};
}

double max_norm(const Matrix& m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

bool is_hermitian(const OperatorMatrix& op, double tol) {
    return max_norm(op.entries - op.entries.adjoint()) <= tol;
}

OperatorMatrix embed(const LayoutPtr& layout, std::size_t subsystem, const Matrix& local) {
    const auto& sub = layout->subsystems().at(subsystem);
    const auto ld = static_cast<Eigen::Index>(sub.local_dim);
    if (local.rows() != ld || local.cols() != ld) {
        throw LayoutError("local operator dimension does not match subsystem '" + sub.label + "'");
    }
    OperatorMatrix out = zero_operator(layout);
    const std::size_t stride = layout->stride(subsystem);
    const std::size_t dim = layout->total_dim();
    for (std::size_t col = 0; col < dim; ++col) {
        const auto d = static_cast<Eigen::Index>((col / stride) % sub.local_dim);
        const std::size_t base = col - static_cast<std::size_t>(d) * stride;
        for (Eigen::Index r = 0; r < ld; ++r) {
            const cplx v = local(r, d);
            if (v != cplx{}) {
                out.entries(static_cast<Eigen::Index>(base + static_cast<std::size_t>(r) * stride),
                            static_cast<Eigen::Index>(col)) = v;
            }
        }
    }
    return out;
}

OperatorMatrix annihilation(const LayoutPtr& layout, const std::string& label) {
    const std::size_t k = layout->index_of(label);
    const auto& sub = layout->subsystems()[k];
    if (sub.kind != SubsystemKind::boson) {
        throw LayoutError("'" + label + "' is not a bosonic mode");
    }
    const auto ld = static_cast<Eigen::Index>(sub.local_dim);
    Matrix a = Matrix::Zero(ld, ld);
    for (Eigen::Index n = 1; n < ld; ++n) {
        a(n - 1, n) = std::sqrt(static_cast<double>(n));
    }
    return embed(layout, k, a);
}

OperatorMatrix number_operator(const LayoutPtr& layout, const std::string& label) {
    const auto a = annihilation(layout, label);
    return a.adjoint() * a;
}

QubitOperators qubit_ops(const LayoutPtr& layout) {
    const std::size_t k = layout->qubit_index();
    Matrix lower = Matrix::Zero(2, 2);
    lower(0, 1) = 1.0;
    Matrix sz = Matrix::Zero(2, 2);
    sz(0, 0) = -1.0;
    sz(1, 1) = 1.0;
    Matrix ee = Matrix::Zero(2, 2);
    ee(1, 1) = 1.0;
    return {embed(layout, k, lower), embed(layout, k, lower.adjoint()), embed(layout, k, sz),
            embed(layout, k, ee)};
}

OperatorMatrix total_excitation_operator(const LayoutPtr& layout) {
    OperatorMatrix total = zero_operator(layout);
    for (const auto& s : layout->subsystems()) {
        if (s.kind == SubsystemKind::boson) {
            total = total + number_operator(layout, s.label);
        }
    }
    return total + qubit_ops(layout).excited;
}

QuantumState::QuantumState(LayoutPtr layout, Kind kind, Vector ket, Matrix rho)
    : layout_(std::move(layout)), kind_(kind), ket_(std::move(ket)), rho_(std::move(rho)) {}

QuantumState QuantumState::from_ket(LayoutPtr layout, Vector amplitudes) {
    if (static_cast<std::size_t>(amplitudes.size()) != layout->total_dim()) {
        throw StateError("ket length does not match layout dimension");
    }
    return QuantumState(std::move(layout), Kind::ket, std::move(amplitudes), Matrix{});
}

QuantumState QuantumState::from_density(LayoutPtr layout, Matrix rho) {
    const auto n = static_cast<Eigen::Index>(layout->total_dim());
    if (rho.rows() != n || rho.cols() != n) {
        throw StateError("density matrix shape does not match layout dimension");
    }
    return QuantumState(std::move(layout), Kind::density, Vector{}, std::move(rho));
}

const Vector& QuantumState::ket() const {
    if (kind_ != Kind::ket) throw StateError("state is a density matrix, not a ket");
    return ket_;
}

const Matrix& QuantumState::density() const {
    if (kind_ != Kind::density) throw StateError("state is a ket, not a density matrix");
    return rho_;
}

Matrix QuantumState::as_density() const {
    return kind_ == Kind::ket ? Matrix(ket_ * ket_.adjoint()) : rho_;
}

double QuantumState::weight() const {
    return kind_ == Kind::ket ? ket_.squaredNorm() : rho_.trace().real();
}

std::vector<double> QuantumState::populations() const {
    std::vector<double> p(dim());
    for (std::size_t i = 0; i < p.size(); ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        p[i] = kind_ == Kind::ket ? std::norm(ket_(ii)) : rho_(ii, ii).real();
    }
    return p;
}

double QuantumState::expectation(const OperatorMatrix& op) const {
    if (kind_ == Kind::ket) {
        return ket_.dot(op.entries * ket_).real();
    }
    return (op.entries * rho_).trace().real();
}

double QuantumState::min_eigenvalue() const {
    if (kind_ == Kind::ket) return 0.0;
    const Matrix herm = 0.5 * (rho_ + rho_.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> solver(herm, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff();
}

void QuantumState::validate(double norm_tol, double herm_tol, double eig_floor) const {
    if (kind_ == Kind::ket) {
        if (std::abs(ket_.norm() - 1.0) > norm_tol) {
            throw StateError("ket is not normalised");
        }
        return;
    }
    if (max_norm(rho_ - rho_.adjoint()) > herm_tol) {
        throw StateError("density matrix is not Hermitian");
    }
    if (std::abs(rho_.trace().real() - 1.0) > norm_tol) {
        throw StateError("density matrix trace differs from 1");
    }
    if (min_eigenvalue() < eig_floor) {
        throw StateError("density matrix has a negative eigenvalue");
    }
}

QuantumState basis_ket(const LayoutPtr& layout, const std::map<std::string, std::size_t>& occupations) {
    std::vector<std::size_t> digits(layout->size(), 0);
    for (const auto& [label, occ] : occupations) {
        const std::size_t k = layout->index_of(label);
        if (occ >= layout->subsystems()[k].local_dim) {
            throw StateError("occupation " + std::to_string(occ) + " of '" + label +
                             "' exceeds truncation");
        }
        digits[k] = occ;
    }
    Vector psi = Vector::Zero(static_cast<Eigen::Index>(layout->total_dim()));
    psi(static_cast<Eigen::Index>(layout->flat_index(digits))) = 1.0;
    return QuantumState::from_ket(layout, std::move(psi));
}

Matrix partial_trace_keep(const QuantumState& state, std::size_t subsystem) {
    const auto& layout = *state.layout();
    const std::size_t ld = layout.subsystems().at(subsystem).local_dim;
    const std::size_t stride = layout.stride(subsystem);
    const Matrix rho = state.as_density();
    Matrix out = Matrix::Zero(static_cast<Eigen::Index>(ld), static_cast<Eigen::Index>(ld));
    for (std::size_t i = 0; i < layout.total_dim(); ++i) {
        const std::size_t di = (i / stride) % ld;
        const std::size_t rest = i - di * stride;
        for (std::size_t dj = 0; dj < ld; ++dj) {
            const std::size_t j = rest + dj * stride;
            out(static_cast<Eigen::Index>(di), static_cast<Eigen::Index>(dj)) +=
                rho(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        }
    }
    return out;
}

Matrix reduce_operator(const OperatorMatrix& op, std::size_t subsystem) {
    const auto& layout = *op.layout;
    const std::size_t ld = layout.subsystems().at(subsystem).local_dim;
    const std::size_t stride = layout.stride(subsystem);
    Matrix out = Matrix::Zero(static_cast<Eigen::Index>(ld), static_cast<Eigen::Index>(ld));
    for (std::size_t i = 0; i < layout.total_dim(); ++i) {
        const std::size_t di = (i / stride) % ld;
        const std::size_t rest = i - di * stride;
        for (std::size_t dj = 0; dj < ld; ++dj) {
            const std::size_t j = rest + dj * stride;
            out(static_cast<Eigen::Index>(di), static_cast<Eigen::Index>(dj)) +=
                op.entries(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        }
    }
    return out / static_cast<double>(layout.total_dim() / ld);
}

}  // namespace magnon
