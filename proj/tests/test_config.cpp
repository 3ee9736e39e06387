#include "magnon/config.hpp"

#include <gtest/gtest.h>

using namespace magnon;

namespace {

std::size_t error_line(const std::string& text) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.line();
    }
    ADD_FAILURE() << "no ConfigError for:\n" << text;
    return 0;
}

}  // namespace

TEST(Config, EmptyGivesDefaults) {
    const auto cfg = parse_config("");
    const auto d = PhysicalParams::defaults(2);
    EXPECT_EQ(cfg.n, 2u);
    EXPECT_EQ(cfg.engine, Engine::lindblad);
    EXPECT_EQ(cfg.truncation, 2u);
    EXPECT_EQ(cfg.params.omega_q, d.omega_q);
    EXPECT_EQ(cfg.params.omega_a, d.omega_a);
    EXPECT_EQ(cfg.params.lambda_q, d.lambda_q);
    EXPECT_EQ(cfg.params.lambda_m, d.lambda_m);
    EXPECT_EQ(cfg.params.kappa_a, d.kappa_a);
    EXPECT_EQ(cfg.params.kappa_m, d.kappa_m);
    EXPECT_EQ(cfg.params.gamma_q, d.gamma_q);
    EXPECT_FALSE(cfg.step.has_value());
    EXPECT_EQ(cfg.schedule().kind, ProtocolKind::two_magnon_bell);
}

TEST(Config, ParsesKeys) {
    const auto cfg = parse_config(R"(# three magnons
n = 3
engine = full-unitary
omega_q_ghz = 8.0     # qubit
lambda_q_mhz = 80
lambda_m2_mhz = 14.0
lambda_m_mhz = 15.0
kappa_a_mhz = 2
gamma_q_mhz = 0
step_ns = 0.01
truncation = 3
residual_qm = on
phase_clock = reset
idle_detuning_ghz = 1
swap_mode = sequential
output = out.txt
)");
    EXPECT_EQ(cfg.n, 3u);
    EXPECT_EQ(cfg.engine, Engine::full_unitary);
    EXPECT_DOUBLE_EQ(cfg.params.omega_q, from_ghz(8.0));
    EXPECT_DOUBLE_EQ(cfg.params.lambda_q, from_mhz(80.0));
    EXPECT_DOUBLE_EQ(cfg.params.lambda_m[0], from_mhz(15.0));
    EXPECT_DOUBLE_EQ(cfg.params.lambda_m[1], from_mhz(14.0));
    EXPECT_DOUBLE_EQ(cfg.params.lambda_m[2], from_mhz(15.0));
    EXPECT_EQ(cfg.params.kappa_a, std::vector<double>(3, 2e-3));
    EXPECT_EQ(cfg.params.gamma_q, 0.0);
    EXPECT_EQ(cfg.step, 0.01);
    EXPECT_EQ(cfg.truncation, 3u);
    EXPECT_TRUE(cfg.residual_qm);
    EXPECT_EQ(cfg.clock, PhaseClock::segment_reset);
    EXPECT_DOUBLE_EQ(*cfg.idle_detuning, from_ghz(1.0));
    EXPECT_EQ(cfg.swap, SwapMode::sequential);
    EXPECT_EQ(cfg.output, "out.txt");

    const auto opts = cfg.execute_options();
    EXPECT_EQ(opts.boson_truncation, 3u);
    EXPECT_TRUE(opts.include_residual_qm);
    EXPECT_EQ(opts.step.fixed_step, 0.01);
    EXPECT_EQ(cfg.schedule().segments.size(), 5u);
}

TEST(Config, RateConvention) {
    const auto lin = parse_config("kappa_m_mhz = 2");
    const auto ang = parse_config("rate_convention = angular\nkappa_m_mhz = 2");
    EXPECT_DOUBLE_EQ(lin.params.kappa_m[0], 2e-3);
    EXPECT_DOUBLE_EQ(ang.params.kappa_m[0], from_mhz(2.0));
    EXPECT_DOUBLE_EQ(ang.params.gamma_q, from_mhz(1.2));
}

TEST(Config, UnequalizedNeedsDuration) {
    auto cfg = parse_config("n = 3\nequalize = false\nqubit_duration_ns = 20");
    EXPECT_EQ(cfg.schedule().qubit_segment_duration(), 20.0);
    cfg = parse_config("n = 2\nequalize = no\nqubit_duration_ns = 20");
    EXPECT_EQ(cfg.schedule().kind, ProtocolKind::n_magnon);
}

TEST(Config, ErrorsCarryLineNumbers) {
    EXPECT_EQ(error_line("n = 2\ngamma_q_mhz = -1\n"), 2u);
    EXPECT_EQ(error_line("\n\nfoo_mhz = 1\n"), 3u);
    EXPECT_EQ(error_line("lambda_q = 80\n"), 1u);
    EXPECT_EQ(error_line("n = 2\nlambda_q_khz = 80\n"), 2u);
    EXPECT_EQ(error_line("step_ghz = 1\n"), 1u);
    EXPECT_EQ(error_line("n = 2\n\nlambda_q_mhz = eighty\n"), 3u);
    EXPECT_EQ(error_line("n = 2.5\n"), 1u);
    EXPECT_EQ(error_line("n = 1\n"), 1u);
    EXPECT_EQ(error_line("just some words\n"), 1u);
    EXPECT_EQ(error_line("engine = exact\n"), 1u);
    EXPECT_EQ(error_line("equalize = maybe\n"), 1u);
    EXPECT_EQ(error_line("phase_clock = local\n"), 1u);
    EXPECT_EQ(error_line("n = 2\nlambda_m3_mhz = 1\n"), 2u);
    EXPECT_EQ(error_line("step_ns = 0\n"), 1u);
    EXPECT_EQ(error_line("truncation = 1\n"), 1u);
    EXPECT_EQ(error_line("lambda_q_mhz =\n"), 1u);
}

TEST(Config, FarDetuningGuardForEffectiveEngine) {
    const std::string text = "engine = ideal-effective\nomega_q_ghz = 7.0\nomega_a_ghz = 6.98\n";
    EXPECT_EQ(error_line(text), 3u);
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("0.24"), std::string::npos) << e.what();
    }
    // other engines defer the guard to the schedule builders
    const auto cfg = parse_config("omega_q_ghz = 7.0\nomega_a_ghz = 6.98\n");
    EXPECT_THROW(cfg.schedule(), FarDetuningError);
}

TEST(Config, FinalizeResizes) {
    auto cfg = parse_config("kappa_m_mhz = 3");
    cfg.n = 4;
    finalize_config(cfg);
    EXPECT_EQ(cfg.params.kappa_m, std::vector<double>(4, 3e-3));
    cfg.n = 1;
    EXPECT_THROW(finalize_config(cfg), ConfigError);
}
