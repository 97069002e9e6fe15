/*
 Copyright 2026 The adptrack Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/
#include "support.hpp"

#include "adptrack/oracle.hpp"

#include <gtest/gtest.h>

#include <set>

using namespace adptrack;
using namespace adptrack::testing;
using adp::ActorState;
using adp::CriticState;

namespace {

const Matrix kTheta = Matrix::Constant(1, 1, -1.0);

CriticState critic(double w, double gamma = 1.0)
{
    return {scalar(w), Matrix::Constant(1, 1, gamma)};
}

ActorState actor(double w) { return {scalar(w)}; }

ConcatState at(double e, double xd = 2.0) { return {scalar(e), scalar(xd)}; }

/// Exactly parameterized two-state LQ tracking setup.
struct TwoState {
    scenarios::PlantDefinition def = scenarios::twostate_lq(-0.5, -0.5, 1.0, vec({0.0, 1.0}));
    adp::Controller ctrl;
    Matrix theta;
    Vector W;

    TwoState()
    {
        def.problem.cost = CostSpec::quadratic(Matrix::Identity(2, 2), Matrix::Ones(1, 1));
        ctrl = adp::Controller(def.problem.known(), sysid::IdentifierBasis::pass_through(2, true),
                               adp::ValueBasis::error_quadratic(2), adp::AdpGains{});
        theta = scenarios::linear_theta(*def.A, true);
        const auto sol = oracle::solve_are({*def.A, *def.B, Matrix::Identity(2, 2), Matrix::Ones(1, 1)});
        W = oracle::ideal_quadratic_weights(sol.P, ctrl.basis);
    }
};

} // namespace

TEST(Policy, ScalarExamples)
{
    const auto ctrl = scalar_controller();
    EXPECT_EQ(adp::policy(ctrl, at(1.0), actor(0.0))(0), 0.0);
    EXPECT_EQ(adp::policy(ctrl, at(0.0), actor(0.7))(0), 0.0);
    EXPECT_NEAR(adp::policy(ctrl, at(1.0), actor(kPStar))(0), -0.41421356237309515, 1e-12);
}

TEST(DesiredInputEstimate, ScalarExamples)
{
    const auto ctrl = scalar_controller();
    EXPECT_DOUBLE_EQ(adp::desired_input_estimate(ctrl, scalar(2.0), kTheta)(0), 2.0);
    EXPECT_DOUBLE_EQ(adp::desired_input_estimate(ctrl, scalar(2.0), Matrix::Zero(1, 1))(0), 0.0);
}

TEST(DesiredInputEstimate, ExactWeightsGiveSteadyStateControl)
{
    TwoState s;
    std::mt19937_64 rng(2);
    for (int i = 0; i < 50; ++i) {
        const Vector xd = random_vector(rng, 2, -2.0, 2.0);
        const Vector est = adp::desired_input_estimate(s.ctrl, xd, s.theta);
        EXPECT_LT((est - steady_state_control(s.def.problem, xd)).norm(), 1e-12);
    }
}

TEST(DesiredInputEstimate, ZeroWeightsGivePseudoinverseOfVelocity)
{
    TwoState s;
    const Vector xd = vec({0.5, -1.0});
    const Vector expect = pseudoinverse(s.def.problem.plant.g(xd)) * s.def.problem.desired.h_d(xd);
    EXPECT_LT((adp::desired_input_estimate(s.ctrl, xd, Matrix::Zero(3, 2)) - expect).norm(), 1e-15);
}

TEST(AppliedControl, ScalarExamples)
{
    const auto ctrl = scalar_controller();
    EXPECT_NEAR(adp::applied_control(ctrl, at(1.0), actor(kPStar), kTheta)(0), 1.5857864376269049,
                1e-12);
    EXPECT_DOUBLE_EQ(adp::applied_control(ctrl, at(0.0), actor(3.0), kTheta)(0), 2.0);
    EXPECT_EQ(adp::applied_control(ctrl, at(1.0), actor(0.0), Matrix::Zero(1, 1))(0), 0.0);
}

TEST(ExtrapolationDynamics, ScalarExample)
{
    const auto ext = adp::extrapolation_dynamics(scalar_controller(), at(1.0), kTheta);
    EXPECT_DOUBLE_EQ(ext.F_theta(0), -1.0);
    EXPECT_DOUBLE_EQ(ext.F_theta(1), 0.0);
    EXPECT_EQ(ext.F_1.norm(), 0.0);
}

TEST(ExtrapolationDynamics, SumsToConcatDynamicsUnderExactWeights)
{
    TwoState s;
    std::mt19937_64 rng(31);
    for (int i = 0; i < 100; ++i) {
        const ConcatState z(random_vector(rng, 2, -2.0, 2.0), random_vector(rng, 2, -2.0, 2.0));
        const auto ext = adp::extrapolation_dynamics(s.ctrl, z, s.theta);
        const auto cd = concat_dynamics(s.def.problem, z);
        EXPECT_LT((ext.F_theta + ext.F_1 - cd.F).norm(), 1e-12);
    }
}

TEST(BellmanError, IdealWeightsSatisfyHjb)
{
    const auto ctrl = scalar_controller();
    for (double e = -3.0; e <= 3.0; e += 0.5) {
        const auto be = adp::bellman_error(ctrl, at(e), kTheta, critic(kPStar), actor(kPStar));
        EXPECT_NEAR(be.delta, 0.0, 1e-12) << "e=" << e;
    }
}

TEST(BellmanError, ZeroWeights)
{
    const auto be = adp::bellman_error(scalar_controller(), at(1.0), Matrix::Zero(1, 1), critic(0.0),
                                       actor(0.0));
    EXPECT_EQ(be.omega(0), 0.0);
    EXPECT_DOUBLE_EQ(be.delta, 1.0);
}

TEST(BellmanError, HandEvaluatedExample)
{
    const auto be = adp::bellman_error(scalar_controller(), at(1.0), kTheta, critic(0.0),
                                       actor(kPStar));
    EXPECT_NEAR(be.omega(0), -2.0 * std::sqrt(2.0), 1e-12);
    EXPECT_NEAR(be.rho, 9.0, 1e-12);
    EXPECT_NEAR(be.delta, 1.0 + kPStar * kPStar, 1e-12);
    EXPECT_NEAR(be.delta, 1.17157, 1e-5);
    EXPECT_NEAR(be.G_sigma(0, 0), 4.0, 1e-15);
}

TEST(BellmanError, TwoStateHjbAtOracleWeights)
{
    TwoState s;
    std::mt19937_64 rng(8);
    for (int i = 0; i < 100; ++i) {
        const ConcatState z(random_vector(rng, 2, -2.0, 2.0), random_vector(rng, 2, -2.0, 2.0));
        const auto be = adp::bellman_error(s.ctrl, z, s.theta, {s.W, Matrix::Identity(3, 3)}, {s.W});
        EXPECT_NEAR(be.delta, 0.0, 1e-10);
    }
}

TEST(BellmanError, RhoAtLeastOne)
{
    TwoState s;
    std::mt19937_64 rng(12);
    for (int i = 0; i < 200; ++i) {
        const ConcatState z(random_vector(rng, 2, -3.0, 3.0), random_vector(rng, 2, -3.0, 3.0));
        const Matrix A = random_matrix(rng, 3, 3);
        const CriticState c{random_vector(rng, 3), A * A.transpose()};
        const auto be = adp::bellman_error(s.ctrl, z, random_matrix(rng, 3, 2), c, {random_vector(rng, 3)});
        EXPECT_GE(be.rho, 1.0);
    }
}

TEST(BellmanError, ErrorIdentityInWeightErrors)
{
    // delta = -omega' Wc~ - W' grad F_theta(theta~) + 1/4 Wa~' G_sigma Wa~.
    TwoState s;
    std::mt19937_64 rng(17);
    for (int i = 0; i < 200; ++i) {
        const ConcatState z(random_vector(rng, 2, -2.0, 2.0), random_vector(rng, 2, -2.0, 2.0));
        const Vector wc = s.W + random_vector(rng, 3);
        const Vector wa = s.W + random_vector(rng, 3);
        const Matrix th = s.theta + random_matrix(rng, 3, 2, -0.5, 0.5);
        const auto be = adp::bellman_error(s.ctrl, z, th, {wc, Matrix::Identity(3, 3)}, {wa});
        const Vector wc_t = s.W - wc;
        const Vector wa_t = s.W - wa;
        const auto f_tilde = adp::extrapolation_dynamics(s.ctrl, z, s.theta - th).F_theta;
        const Matrix grad = s.ctrl.basis.grad(z.zeta());
        const double rhs = -be.omega.dot(wc_t) - s.W.dot(grad * f_tilde)
                           + 0.25 * wa_t.dot(be.G_sigma * wa_t);
        EXPECT_NEAR(be.delta, rhs, 1e-9);
    }
}

TEST(CriticDot, Examples)
{
    adp::AdpGains g;
    g.eta_c1 = 1.0;
    g.eta_c2 = 0.0;
    const auto ctrl = scalar_controller(g);
    adp::GridEvals ev;
    ev.at_state = adp::bellman_error(ctrl, at(1.0), kTheta, critic(0.0), actor(kPStar));
    EXPECT_NEAR(adp::critic_dot(critic(0.0), g, ev)(0), 0.36818, 1e-5);
    EXPECT_NEAR(adp::critic_dot(critic(0.0), g, ev)(0), 2.0 * std::sqrt(2.0) / 9.0 * (1.0 + kPStar * kPStar),
                1e-12);

    g.eta_c2 = 1.0;
    adp::GridEvals ideal;
    ideal.at_state = adp::bellman_error(ctrl, at(1.0), kTheta, critic(kPStar), actor(kPStar));
    for (double e : {-1.0, 0.5, 2.0}) {
        ideal.at_points.push_back(adp::bellman_error(ctrl, at(e), kTheta, critic(kPStar), actor(kPStar)));
    }
    EXPECT_NEAR(adp::critic_dot(critic(kPStar), g, ideal)(0), 0.0, 1e-12);

    adp::GridEvals flat;
    flat.at_state = adp::bellman_error(ctrl, at(0.0), kTheta, critic(0.3), actor(0.3));
    flat.at_points = {flat.at_state, flat.at_state};
    EXPECT_EQ(adp::critic_dot(critic(0.3), g, flat)(0), 0.0);
}

TEST(GammaDot, Examples)
{
    adp::AdpGains g;
    g.beta = 0.1;
    g.eta_c1 = 1.0;
    g.Gamma_bar = 1.0;
    EXPECT_NEAR(adp::gamma_dot(Matrix::Ones(1, 1), g, scalar(-2.0 * std::sqrt(2.0)), 9.0)(0, 0),
                0.1 - 8.0 / 81.0, 1e-15);
    EXPECT_NEAR(adp::gamma_dot(Matrix::Ones(1, 1), g, scalar(-2.0 * std::sqrt(2.0)), 9.0)(0, 0),
                0.0012346, 1e-7);
    EXPECT_EQ(adp::gamma_dot(Matrix::Constant(1, 1, 1.5), g, scalar(1.0), 2.0)(0, 0), 0.0);
    const Matrix G = 0.5 * Matrix::Identity(2, 2);
    EXPECT_LT((adp::gamma_dot(G, g, Vector::Zero(2), 1.0) - 0.1 * G).norm(), 1e-15);
}

TEST(GammaDot, SymmetricForSymmetricInput)
{
    adp::AdpGains g;
    g.beta = 0.3;
    g.Gamma_bar = 100.0;
    std::mt19937_64 rng(5);
    for (int i = 0; i < 50; ++i) {
        const Matrix A = random_matrix(rng, 3, 3);
        const Matrix G = A * A.transpose();
        const Matrix d = adp::gamma_dot(G, g, random_vector(rng, 3), 1.0 + uniform(rng, 0.0, 3.0));
        EXPECT_LT((d - d.transpose()).norm(), 1e-12);
    }
}

TEST(ActorDot, Examples)
{
    adp::AdpGains g;
    g.eta_a1 = 1.0;
    g.eta_a2 = 0.1;
    g.eta_c1 = 1.0;
    g.eta_c2 = 0.0;
    const auto ctrl = scalar_controller(g);
    adp::GridEvals ev;
    ev.at_state = adp::bellman_error(ctrl, at(1.0), kTheta, critic(0.0), actor(kPStar));
    const double v = adp::actor_dot(actor(kPStar), critic(0.0), g, ev)(0);
    EXPECT_NEAR(v, -1.1 * kPStar, 1e-12);
    EXPECT_NEAR(v, -0.45563, 1e-5);

    adp::GridEvals zero;
    zero.at_state = adp::bellman_error(ctrl, at(1.0), kTheta, critic(0.0), actor(0.0));
    EXPECT_EQ(adp::actor_dot(actor(0.0), critic(0.0), g, zero)(0), 0.0);

    g.eta_a2 = 0.0;
    adp::GridEvals flat;
    flat.at_state = adp::bellman_error(ctrl, at(0.0), kTheta, critic(0.4), actor(0.4));
    flat.at_points = {flat.at_state};
    EXPECT_EQ(adp::actor_dot(actor(0.4), critic(0.4), g, flat)(0), 0.0);
}

TEST(ActorDot, CrossTermMatchesHandFormula)
{
    adp::AdpGains g;
    g.eta_a1 = 0.0;
    g.eta_a2 = 0.0;
    g.eta_c1 = 0.7;
    g.eta_c2 = 1.3;
    const auto ctrl = scalar_controller(g);
    adp::GridEvals ev;
    ev.at_state = adp::bellman_error(ctrl, at(1.0), kTheta, critic(0.2), actor(0.5));
    for (double e : {-1.0, 0.5}) {
        ev.at_points.push_back(adp::bellman_error(ctrl, at(e), kTheta, critic(0.2), actor(0.5)));
    }
    double expect = g.eta_c1 * ev.at_state.G_sigma(0, 0) * 0.5 * ev.at_state.omega(0) * 0.2
                    / (4.0 * ev.at_state.rho);
    for (const auto& p : ev.at_points) {
        expect += g.eta_c2 * p.G_sigma(0, 0) * 0.5 * p.omega(0) * 0.2 / (4.0 * 2.0 * p.rho);
    }
    EXPECT_NEAR(adp::actor_dot(actor(0.5), critic(0.2), g, ev)(0), expect, 1e-14);
}

TEST(MakeGrid, Examples)
{
    adp::GridConfig cfg;
    cfg.N = 5;
    cfg.bounds = {{-1.0, 1.0}};
    const auto g5 = adp::make_grid(cfg);
    ASSERT_EQ(g5.N(), 5u);
    const double expect[] = {-1.0, -0.5, 0.0, 0.5, 1.0};
    for (std::size_t i = 0; i < 5; ++i) {
        EXPECT_DOUBLE_EQ(g5.points[i](0), expect[i]);
    }

    cfg.N = 1;
    const auto g1 = adp::make_grid(cfg);
    ASSERT_EQ(g1.N(), 1u);
    EXPECT_EQ(g1.points[0](0), 0.0);

    cfg.N = 9;
    cfg.bounds = {{-1.0, 1.0}, {0.0, 2.0}};
    const auto g9 = adp::make_grid(cfg);
    ASSERT_EQ(g9.N(), 9u);
    std::set<std::pair<double, double>> seen;
    for (const auto& p : g9.points) {
        seen.insert({p(0), p(1)});
    }
    for (double a : {-1.0, 0.0, 1.0}) {
        for (double b : {0.0, 1.0, 2.0}) {
            EXPECT_TRUE(seen.count({a, b})) << a << "," << b;
        }
    }
}

TEST(MakeGrid, Errors)
{
    adp::GridConfig cfg;
    cfg.N = 4;
    EXPECT_THROW(adp::make_grid(cfg), ConfigError);
    cfg.bounds = {{-1.0, 1.0}, {-1.0, 1.0}};
    cfg.N = 5;
    EXPECT_THROW(adp::make_grid(cfg), ConfigError);
    cfg.N = 0;
    EXPECT_THROW(adp::make_grid(cfg), ConfigError);
}

TEST(MakeGrid, HaltonIsDeterministicAndInsideBox)
{
    adp::GridConfig cfg;
    cfg.N = 20;
    cfg.bounds = {{-2.0, 1.0}, {0.5, 0.75}};
    cfg.layout = adp::GridLayout::halton;
    cfg.seed = 4;
    const auto a = adp::make_grid(cfg);
    const auto b = adp::make_grid(cfg);
    ASSERT_EQ(a.N(), 20u);
    for (std::size_t i = 0; i < a.N(); ++i) {
        EXPECT_EQ(a.points[i], b.points[i]);
        EXPECT_GE(a.points[i](0), -2.0);
        EXPECT_LE(a.points[i](0), 1.0);
        EXPECT_GE(a.points[i](1), 0.5);
        EXPECT_LE(a.points[i](1), 0.75);
    }
    EXPECT_DOUBLE_EQ(adp::halton_point(1, 2)(0), 0.5);
    EXPECT_DOUBLE_EQ(adp::halton_point(1, 2)(1), 1.0 / 3.0);
}

TEST(MakeGrid, StrategiesPairStatesDifferently)
{
    adp::GridConfig cfg;
    cfg.N = 3;
    cfg.bounds = {{-1.0, 1.0}};
    const auto tracking = adp::make_grid(cfg);
    const auto zs = tracking.states(scalar(2.0));
    EXPECT_EQ(zs[0].x_d(0), 2.0);
    EXPECT_EQ(zs[2].e(0), 1.0);

    cfg.N = 4;
    cfg.bounds = {{-1.0, 1.0}, {0.0, 3.0}};
    cfg.strategy = adp::GridStrategy::fixed_zeta;
    const auto fixed = adp::make_grid(cfg);
    const auto zf = fixed.states(scalar(2.0));
    EXPECT_EQ(zf[1].e(0), -1.0);
    EXPECT_EQ(zf[1].x_d(0), 3.0);
}

TEST(Cbar, Examples)
{
    EXPECT_EQ(adp::cbar({}), 0.0);

    adp::BellmanEval z;
    z.omega = Vector::Zero(2);
    EXPECT_EQ(adp::cbar({z, z}), 0.0);

    adp::BellmanEval one;
    one.omega = scalar(-2.0 * std::sqrt(2.0));
    one.rho = 9.0;
    EXPECT_NEAR(adp::cbar({one}), 8.0 / 9.0, 1e-15);

    adp::BellmanEval a;
    a.omega = vec({1.0, 0.0});
    adp::BellmanEval b;
    b.omega = vec({0.0, 1.0});
    EXPECT_DOUBLE_EQ(adp::cbar({a, b}), 0.5);
}

TEST(MuEquivalent, Examples)
{
    const auto ctrl = scalar_controller();
    EXPECT_DOUBLE_EQ(adp::mu_equivalent(ctrl, at(1.0), actor(0.3), kTheta, kTheta)(0),
                     adp::policy(ctrl, at(1.0), actor(0.3))(0));
    const Matrix half = Matrix::Constant(1, 1, -0.5);
    for (double e : {-2.0, 0.0, 1.0, 5.0}) {
        EXPECT_DOUBLE_EQ(adp::mu_equivalent(ctrl, at(e), actor(0.0), kTheta, half)(0), -1.0);
    }
}

TEST(MuEquivalent, ReproducesErrorVelocity)
{
    // e' under applied control equals F + G mu_equivalent in the error block.
    TwoState s;
    std::mt19937_64 rng(44);
    for (int i = 0; i < 100; ++i) {
        const ConcatState z(random_vector(rng, 2, -2.0, 2.0), random_vector(rng, 2, -2.0, 2.0));
        const ActorState a{random_vector(rng, 3)};
        const Matrix th = s.theta + random_matrix(rng, 3, 2, -0.5, 0.5);
        const Vector x = z.x();
        const Vector u = adp::applied_control(s.ctrl, z, a, th);
        const auto& pl = s.def.problem.plant;
        const Vector e_dot = pl.f(x) + pl.g(x) * u - s.def.problem.desired.h_d(z.x_d);
        const auto cd = concat_dynamics(s.def.problem, z);
        const Vector mu = adp::mu_equivalent(s.ctrl, z, a, s.theta, th);
        EXPECT_LT((e_dot - (cd.F.head(2) + cd.G.topRows(2) * mu)).norm(), 1e-12);
    }
}

TEST(ValueBasis, GradientMatchesFiniteDifferences)
{
    const auto check = [](const adp::ValueBasis& b, Eigen::Index n, std::uint64_t seed) {
        std::mt19937_64 rng(seed);
        for (int i = 0; i < 100; ++i) {
            const Vector z = random_vector(rng, 2 * n, -2.0, 2.0);
            const Matrix g = b.grad(z);
            Matrix fd(b.size(), 2 * n);
            for (Eigen::Index k = 0; k < 2 * n; ++k) {
                const double h = 1e-6 * std::max(1.0, std::abs(z(k)));
                Vector zp = z;
                Vector zm = z;
                zp(k) += h;
                zm(k) -= h;
                fd.col(k) = (b.sigma(zp) - b.sigma(zm)) / (2.0 * h);
            }
            const double scale = std::max(1.0, g.cwiseAbs().maxCoeff());
            EXPECT_LE((g - fd).cwiseAbs().maxCoeff() / scale, 1e-6);
        }
    };
    check(adp::ValueBasis::error_quadratic(1), 1, 1);
    check(adp::ValueBasis::error_quadratic(2), 2, 2);
    check(adp::ValueBasis::zeta_polynomial_default(2), 2, 3);
}

TEST(ValueBasis, ErrorQuadraticVanishesAtZeroError)
{
    const auto b = adp::ValueBasis::error_quadratic(2);
    EXPECT_EQ(b.size(), 3);
    EXPECT_EQ(b.sigma(vec({0.0, 0.0, 1.5, -2.0})).norm(), 0.0);
    EXPECT_EQ(b.sigma(vec({1.0, 2.0, 0.0, 0.0})), vec({1.0, 2.0, 4.0}));
}
