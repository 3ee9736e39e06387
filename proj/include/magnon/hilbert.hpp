// hilbert.hpp: tensor-product Hilbert space of truncated bosonic modes and one qubit.
//
// Canonical subsystem order: magnons m1..mN, cavities a1..aN, qubit q.
// The first subsystem is the most significant digit of a basis index, so for
// N = 2 at truncation 2 the ket |1 0 0 0 g> sits at index 16.
// Qubit local states: 0 = |g>, 1 = |e>.

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace magnon {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

class LayoutError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

enum class SubsystemKind { boson, qubit };

struct Subsystem {
    std::string label;
    SubsystemKind kind;
    std::size_t local_dim;
};

class SystemLayout {
public:
    explicit SystemLayout(std::vector<Subsystem> subsystems);

    const std::vector<Subsystem>& subsystems() const noexcept { return subsystems_; }
    std::size_t total_dim() const noexcept { return total_dim_; }
    std::size_t size() const noexcept { return subsystems_.size(); }

    // Index of the subsystem with this label; throws LayoutError if absent.
    std::size_t index_of(const std::string& label) const;
    bool contains(const std::string& label) const noexcept;
    const Subsystem& at(const std::string& label) const { return subsystems_[index_of(label)]; }

    std::size_t qubit_index() const;
    std::size_t n_magnons() const noexcept { return n_magnons_; }

    // Stride of a subsystem's digit within the flat basis index.
    std::size_t stride(std::size_t subsystem) const noexcept { return strides_[subsystem]; }

    std::vector<std::size_t> digits(std::size_t basis_index) const;
    std::size_t flat_index(const std::vector<std::size_t>& digits) const;

    // Human-readable ket label, e.g. "m1=1,m2=0,a1=0,a2=0,q=g".
    std::string basis_label(std::size_t basis_index) const;

    bool operator==(const SystemLayout& other) const;

private:
    std::vector<Subsystem> subsystems_;
    std::vector<std::size_t> strides_;
    std::size_t total_dim_{1};
    std::size_t n_magnons_{0};
};

using LayoutPtr = std::shared_ptr<const SystemLayout>;

std::string magnon_label(std::size_t n);   // 1-based: "m1"
std::string cavity_label(std::size_t n);   // 1-based: "a1"
inline const std::string qubit_label = "q";

// N magnons, N cavities, one qubit; bosonic modes truncated at boson_truncation levels.
LayoutPtr build_layout(std::size_t n_magnons, std::size_t boson_truncation);

struct OperatorMatrix {
    LayoutPtr layout;
    Matrix entries;

    std::size_t dim() const noexcept { return static_cast<std::size_t>(entries.rows()); }

    OperatorMatrix adjoint() const { return {layout, entries.adjoint()}; }
};

// Product of two mostly-zero matrices, computed through sparse storage.
Matrix sparse_product(const Matrix& lhs, const Matrix& rhs);

OperatorMatrix operator+(const OperatorMatrix& lhs, const OperatorMatrix& rhs);
OperatorMatrix operator-(const OperatorMatrix& lhs, const OperatorMatrix& rhs);
OperatorMatrix operator*(const OperatorMatrix& lhs, const OperatorMatrix& rhs);
OperatorMatrix operator*(cplx scale, const OperatorMatrix& op);

OperatorMatrix zero_operator(const LayoutPtr& layout);
OperatorMatrix identity_operator(const LayoutPtr& layout);
OperatorMatrix commutator(const OperatorMatrix& lhs, const OperatorMatrix& rhs);

double max_norm(const Matrix& m);
bool is_hermitian(const OperatorMatrix& op, double tol = 1e-12);

// Lift a local operator acting on one subsystem to the full space.
OperatorMatrix embed(const LayoutPtr& layout, std::size_t subsystem, const Matrix& local);

// Truncated lowering operator on a bosonic subsystem.
OperatorMatrix annihilation(const LayoutPtr& layout, const std::string& label);
inline OperatorMatrix creation(const LayoutPtr& layout, const std::string& label) {
    return annihilation(layout, label).adjoint();
}
OperatorMatrix number_operator(const LayoutPtr& layout, const std::string& label);

struct QubitOperators {
    OperatorMatrix lower;   // |g><e|
    OperatorMatrix raise;   // |e><g|
    OperatorMatrix sigma_z; // |e><e| - |g><g|
    OperatorMatrix excited; // |e><e|
};

QubitOperators qubit_ops(const LayoutPtr& layout);

// Sum of magnon and cavity number operators plus the qubit excitation.
OperatorMatrix total_excitation_operator(const LayoutPtr& layout);

class StateError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class QuantumState {
public:
    enum class Kind { ket, density };

    static QuantumState from_ket(LayoutPtr layout, Vector amplitudes);
    static QuantumState from_density(LayoutPtr layout, Matrix rho);

    Kind kind() const noexcept { return kind_; }
    bool is_ket() const noexcept { return kind_ == Kind::ket; }
    const LayoutPtr& layout() const noexcept { return layout_; }
    std::size_t dim() const noexcept { return layout_->total_dim(); }

    const Vector& ket() const;
    const Matrix& density() const;

    // Projector for a ket, the stored matrix for a density.
    Matrix as_density() const;
    QuantumState to_density() const { return from_density(layout_, as_density()); }

    // Squared norm for a ket, trace for a density.
    double weight() const;
    std::vector<double> populations() const;
    double expectation(const OperatorMatrix& op) const;
    double min_eigenvalue() const;

    // Checks the representation invariants at the given tolerances.
    void validate(double norm_tol = 1e-10, double herm_tol = 1e-12,
                  double eig_floor = -1e-8) const;

private:
    QuantumState(LayoutPtr layout, Kind kind, Vector ket, Matrix rho);

    LayoutPtr layout_;
    Kind kind_;
    Vector ket_;
    Matrix rho_;
};

// Product basis ket; labels not listed are in vacuum / |g>.
// Qubit occupation: 0 = g, 1 = e.
QuantumState basis_ket(const LayoutPtr& layout, const std::map<std::string, std::size_t>& occupations);

// Reduced density matrix of one subsystem.
Matrix partial_trace_keep(const QuantumState& state, std::size_t subsystem);

// Partial trace of an operator onto one subsystem, normalised by the traced dimension.
Matrix reduce_operator(const OperatorMatrix& op, std::size_t subsystem);

}  // namespace magnon
