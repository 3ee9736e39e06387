#include "magnon/dynamics.hpp"
#include "magnon/hamiltonian.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace magnon;

namespace {

std::size_t idx(const LayoutPtr& l, const std::map<std::string, std::size_t>& occ) {
    const Vector v = basis_ket(l, occ).ket();
    Eigen::Index i;
    v.cwiseAbs().maxCoeff(&i);
    return static_cast<std::size_t>(i);
}

// H(t) assembled from Kronecker products for N = 2, truncation d.
oracle::Mat reference_h(const PhysicalParams& p, int d, std::optional<double> d1, std::optional<double> d2,
                        bool qubit, double t) {
    const std::vector<int> dims{d, d, d, d, 2};
    const oracle::Mat b = oracle::lowering(d);
    oracle::Mat s = oracle::Mat::Zero(2, 2);
    s(0, 1) = 1.0;
    const oracle::Mat m1 = oracle::single(dims, 0, b), m2 = oracle::single(dims, 1, b);
    const oracle::Mat a1 = oracle::single(dims, 2, b), a2 = oracle::single(dims, 3, b);
    const oracle::Mat sp = oracle::single(dims, 4, s).adjoint();
    oracle::Mat h = oracle::Mat::Zero(m1.rows(), m1.cols());
    auto add = [&](const oracle::Mat& x, double w) {
        const oracle::Mat term = std::polar(1.0, w * t) * x;
        h += term + term.adjoint();
    };
    if (d1) add(p.lambda_m[0] * a1 * m1.adjoint(), *d1);
    if (d2) add(p.lambda_m[1] * a2 * m2.adjoint(), *d2);
    if (qubit) {
        add(p.lambda_q * a1 * sp, p.qubit_detuning());
        add(p.lambda_q * a2 * sp, p.qubit_detuning());
    }
    return h;
}

}  // namespace

TEST(Units, Conversions) {
    EXPECT_NEAR(from_ghz(1.0), 2.0 * std::numbers::pi, 1e-15);
    EXPECT_NEAR(from_mhz(1000.0), from_ghz(1.0), 1e-15);
    EXPECT_NEAR(to_mhz(from_mhz(15.3)), 15.3, 1e-12);
    EXPECT_NEAR(rate_from_mhz(1.35, RateConvention::linear), 1.35e-3, 1e-18);
    EXPECT_NEAR(rate_from_mhz(1.35, RateConvention::angular), from_mhz(1.35), 1e-18);
}

TEST(Params, Defaults) {
    const auto p = PhysicalParams::defaults(2);
    EXPECT_NEAR(to_mhz(p.omega_q), 7920.0, 1e-9);
    EXPECT_NEAR(to_mhz(p.omega_a), 6980.0, 1e-9);
    EXPECT_NEAR(to_mhz(p.lambda_q), 83.2, 1e-12);
    ASSERT_EQ(p.n_magnons(), 2u);
    EXPECT_NEAR(to_mhz(p.lambda_m[1]), 15.3, 1e-12);
    EXPECT_NEAR(p.kappa_m[0], 1.06e-3, 1e-15);
    EXPECT_NEAR(p.kappa_a[1], 1.35e-3, 1e-15);
    EXPECT_NEAR(p.gamma_q, 1.2e-3, 1e-15);
    const auto ang = PhysicalParams::defaults(2, RateConvention::angular);
    EXPECT_NEAR(ang.gamma_q, from_mhz(1.2), 1e-15);
    EXPECT_NO_THROW(p.check_far_detuning());
}

TEST(Params, EffectiveCoupling) {
    const auto p = PhysicalParams::defaults(2);
    EXPECT_NEAR(to_mhz(p.effective_coupling()), 83.2 * 83.2 / 940.0, 1e-9);
    EXPECT_NEAR(to_mhz(p.effective_coupling()), 7.364, 1e-3);
}

TEST(Params, Validation) {
    auto p = PhysicalParams::defaults(2);
    p.gamma_q = -1e-3;
    EXPECT_THROW(p.validate(), ParameterError);
    p = PhysicalParams::defaults(2);
    p.kappa_a.pop_back();
    EXPECT_THROW(p.validate(), ParameterError);
    p = PhysicalParams::defaults(2);
    p.omega_q = from_ghz(7.0);
    EXPECT_THROW(p.check_far_detuning(), FarDetuningError);
    p.omega_q = from_ghz(6.0);
    EXPECT_THROW(p.check_far_detuning(), FarDetuningError);
    const auto p3 = PhysicalParams::defaults(1).with_magnons(3);
    EXPECT_EQ(p3.n_magnons(), 3u);
    EXPECT_EQ(p3.kappa_m.size(), 3u);
}

TEST(MagnonFrequency, FromField) {
    const auto p = PhysicalParams::defaults(1);
    EXPECT_EQ(magnon_frequency_from_field(0.0, p), 0.0);
    EXPECT_NEAR(magnon_frequency_from_field(0.25, p), from_ghz(7.0), 1e-12);
    EXPECT_NEAR(magnon_frequency_from_field(1.0, p), from_ghz(28.0), 1e-12);
    EXPECT_THROW(magnon_frequency_from_field(-0.1, p), ParameterError);
}

TEST(FullHamiltonian, AllDecoupledIsZero) {
    const auto p = PhysicalParams::defaults(2);
    const auto l = build_layout(2, 2);
    EXPECT_EQ(max_norm(build_full_hamiltonian(l, p, SegmentConfig::all_decoupled(2), 3.0).entries), 0.0);
}

TEST(FullHamiltonian, ResonantSwapElement) {
    const auto p = PhysicalParams::defaults(2);
    const auto l = build_layout(2, 2);
    SegmentConfig cfg{{0.0, std::nullopt}, false, false};
    for (double t : {0.0, 1.7, 40.0}) {
        const Matrix h = build_full_hamiltonian(l, p, cfg, t).entries;
        EXPECT_NEAR(std::abs(h(idx(l, {{"a1", 1}}), idx(l, {{"m1", 1}})) - p.lambda_m[0]), 0.0, 1e-15);
        EXPECT_NEAR(h(idx(l, {{"a1", 1}}), idx(l, {{"m1", 1}})).imag(), 0.0, 1e-15);
        EXPECT_EQ(h(idx(l, {{"a2", 1}}), idx(l, {{"m2", 1}})), cplx(0.0));
    }
}

TEST(FullHamiltonian, QubitElementAtZero) {
    const auto p = PhysicalParams::defaults(2);
    const auto l = build_layout(2, 2);
    SegmentConfig cfg{{std::nullopt, std::nullopt}, true, false};
    const Matrix h = build_full_hamiltonian(l, p, cfg, 0.0).entries;
    EXPECT_NEAR(std::abs(h(idx(l, {{"q", 1}}), idx(l, {{"a1", 1}})) - p.lambda_q), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(h(idx(l, {{"q", 1}}), idx(l, {{"a2", 1}})) - p.lambda_q), 0.0, 1e-15);
}

TEST(FullHamiltonian, MatchesKroneckerOracle) {
    const auto p = PhysicalParams::defaults(2);
    for (int d : {2, 3}) {
        const auto l = build_layout(2, static_cast<std::size_t>(d));
        const std::optional<double> d1 = 0.0, d2 = from_mhz(40.0);
        SegmentConfig cfg{{d1, d2}, true, false};
        for (double t : {0.0, 0.11, 2.5, 77.7}) {
            const Matrix h = build_full_hamiltonian(l, p, cfg, t).entries;
            EXPECT_LT((h - reference_h(p, d, d1, d2, true, t)).cwiseAbs().maxCoeff(), 1e-12);
            EXPECT_TRUE(is_hermitian({l, h}));
        }
    }
}

TEST(FullHamiltonian, ResidualCouplingAndWarning) {
    const auto p = PhysicalParams::defaults(2);
    const auto l = build_layout(2, 2);
    SegmentConfig cfg{{std::nullopt, std::nullopt}, false, true};
    const Matrix h = build_full_hamiltonian(l, p, cfg, 0.0).entries;
    const double g = p.lambda_q * p.lambda_m[0] / p.qubit_detuning();
    EXPECT_NEAR(std::abs(h(idx(l, {{"q", 1}}), idx(l, {{"m1", 1}}))), g, 1e-15);
    EXPECT_FALSE(full_hamiltonian(l, p, cfg).resonance_warning);
    SegmentConfig both{{0.0, std::nullopt}, true, false};
    EXPECT_TRUE(full_hamiltonian(l, p, both).resonance_warning);
    EXPECT_THROW(full_hamiltonian(build_layout(3, 2), p, cfg), ParameterError);
}

TEST(EffectiveHamiltonian, Elements) {
    const auto p = PhysicalParams::defaults(2);
    const auto l = build_layout(2, 2);
    const Matrix h = build_effective_hamiltonian(l, p, 2).entries;
    const double lt = p.effective_coupling();
    EXPECT_NEAR((h(idx(l, {{"a2", 1}}), idx(l, {{"a1", 1}})) - cplx(-lt)).real(), 0.0, 1e-15);
    EXPECT_NEAR(h(idx(l, {{"a2", 1}}), idx(l, {{"a1", 1}})).imag(), 0.0, 1e-15);
    EXPECT_NEAR(h(idx(l, {{"a1", 1}}), idx(l, {{"a1", 1}})).real(), -lt, 1e-15);
    EXPECT_EQ(h(0, 0), cplx(0.0));
    EXPECT_NEAR(h(idx(l, {{"q", 1}}), idx(l, {{"q", 1}})).real(), 2.0 * lt, 1e-15);
    EXPECT_TRUE(is_hermitian({l, h}));
}

TEST(EffectiveHamiltonian, ConservedQuantities) {
    for (std::size_t n : {2u, 3u, 4u}) {
        const auto p = PhysicalParams::defaults(n);
        const auto l = build_layout(n, 2);
        const auto h = build_effective_hamiltonian(l, p, n);
        EXPECT_EQ(max_norm(commutator(h, qubit_ops(l).sigma_z).entries), 0.0);
        auto photons = zero_operator(l);
        for (std::size_t k = 1; k <= n; ++k) photons = photons + number_operator(l, cavity_label(k));
        EXPECT_LT(max_norm(commutator(h, photons).entries), 1e-12);
        EXPECT_LT(max_norm(commutator(h, total_excitation_operator(l)).entries), 1e-12);
    }
}

TEST(EffectiveHamiltonian, GuardRejects) {
    auto p = PhysicalParams::defaults(2);
    p.omega_q = from_ghz(7.0);
    EXPECT_THROW(build_effective_hamiltonian(build_layout(2, 2), p, 2), FarDetuningError);
}

TEST(EffectiveHamiltonian, GSectorDiagonalization) {
    // 2x2 g-sector block in {|10>, |01>}: -lt [[1,1],[1,1]]
    const auto p = PhysicalParams::defaults(2);
    const double lt = p.effective_coupling();
    oracle::Mat block(2, 2);
    block << -lt, -lt, -lt, -lt;
    Eigen::SelfAdjointEigenSolver<oracle::Mat> es(block);
    EXPECT_NEAR(es.eigenvalues()(0), -2.0 * lt, 1e-15);
    EXPECT_NEAR(es.eigenvalues()(1), 0.0, 1e-15);
}

// Full dynamics approaches the dispersive model as Delta0 grows at fixed lambda~.
TEST(EffectiveHamiltonian, FullModelConvergesWithDetuning) {
    const auto base = PhysicalParams::defaults(2);
    const double lt = base.effective_coupling();
    const auto l = build_layout(2, 2);
    const auto psi0 = basis_ket(l, {{"a1", 1}});
    const double period = std::numbers::pi / lt;
    const std::size_t a1 = idx(l, {{"a1", 1}}), a2 = idx(l, {{"a2", 1}});

    std::vector<double> errors;
    for (double scale : {1.0, 2.0, 4.0}) {
        PhysicalParams p = base;
        p.omega_q = p.omega_a + scale * base.qubit_detuning();
        p.lambda_q = std::sqrt(lt * p.qubit_detuning());
        const auto full = full_hamiltonian(l, p, SegmentConfig{{std::nullopt, std::nullopt}, true, false});
        const auto eff = build_effective_hamiltonian(l, p, 2);
        EvolveOptions eo;
        eo.step.max_records = 400;
        eo.step.fixed_step = plan_steps(period, std::max(full.max_frequency(), full.norm_bound()), eo.step).step;
        const auto rf = evolve_ket(psi0, full, period, eo);
        const auto re = evolve_ket(psi0, eff, period, eo);
        ASSERT_EQ(rf.times.size(), re.times.size());
        double worst = 0.0;
        for (std::size_t s = 0; s < rf.times.size(); ++s) {
            for (std::size_t i : {a1, a2}) {
                worst = std::max(worst, std::abs(rf.populations[s][i] - re.populations[s][i]));
            }
        }
        errors.push_back(worst);
        EXPECT_LT(worst, 4.0 * p.lambda_q / p.qubit_detuning());
    }
    EXPECT_GT(errors[0], errors[1]);
    EXPECT_GT(errors[1], errors[2]);
}
