// Copyright (c) 2026 dbnet developers.
// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"

using dbnet::Network;
using dbnet::Rational;
using Catch::Matchers::WithinAbs;

TEST_CASE("Delta series of the 4x4 example vanishes exactly for (s1, s2)") {
    auto gen = dbnet::build_generator(helpers::example4_network());
    auto n = dbnet::steady_state(gen);
    auto series = dbnet::delta_series(gen, n, 0, 1);
    REQUIRE(series.exact);
    REQUIRE(series.exact->size() == 3);
    for (const auto& d : *series.exact) CHECK(d == 0);
    CHECK_THAT(series.ratio_constant, WithinAbs(1.0, 1e-12));
    CHECK_THROWS_AS(dbnet::delta_series(gen, n, 1, 1), dbnet::ValidationError);
}

TEST_CASE("Delta series of the 5x5 example vanishes exactly for (s1, s2)") {
    auto gen = dbnet::build_generator(helpers::remark5_network());
    auto n = dbnet::steady_state(gen);
    auto series = dbnet::delta_series(gen, n, 0, 1);
    REQUIRE(series.exact);
    REQUIRE(series.exact->size() == 4);
    for (const auto& d : *series.exact) CHECK(d == 0);
    CHECK(dbnet::check_pdb(gen, n, 0, 1).holds);
}

TEST_CASE("detailed balance implies pathwise balance for every pair") {
    helpers::RngStream rng(51, 0);
    for (int trial = 0; trial < 20; ++trial) {
        int n = 3 + static_cast<int>(rng.below(4));
        auto gen = helpers::random_db_generator(n, rng, trial % 2 == 0);
        auto ss = dbnet::steady_state(gen);
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) CHECK(dbnet::check_pdb(gen, ss, i, j).holds);
    }
}

TEST_CASE("a circulating three-cycle fails pathwise balance") {
    helpers::RngStream rng(52, 0);
    auto gen = helpers::random_cycle_generator(3, rng, /*db=*/false);
    auto n = dbnet::steady_state(gen);
    auto rep = dbnet::check_pdb(gen, n, 0, 1);
    CHECK_FALSE(rep.holds);
    REQUIRE(rep.first_failing_n);
    CHECK(*rep.first_failing_n >= 1);
}

TEST_CASE("pathwise balance of the 4x4 example survives symmetric bumps but not "
          "the path perturbation") {
    // bumping the one asymmetric rate keeps the s1<->s2 exchange symmetry, so
    // the pair stays pathwise balanced
    Network net = helpers::example4_network();
    net.rates[{3, 2}] = Rational(2) + Rational(1, 1000);
    auto gen = dbnet::build_generator(net);
    auto n = dbnet::steady_state(gen);
    CHECK(dbnet::check_pdb(gen, n, 0, 1).holds);

    // the DB-preserving perturbation along s1,(s1,s3),s3,(s3,s4),s4,(s4,s2),s2
    // is what breaks it, per the instability construction
    auto base = dbnet::build_generator(helpers::example4_network());
    auto base_n = dbnet::steady_state(base);
    dbnet::PathCertificate cert;
    cert.vertices = {0, 2, 3, 1};
    cert.through_edge = {2, 3};
    auto pert = dbnet::path_perturbation(base_n, cert, {2, 3}, 1e-3);
    auto perturbed = dbnet::perturbed_generator(base, pert.matrix);
    auto pn = dbnet::steady_state(perturbed);
    CHECK_FALSE(dbnet::check_pdb(perturbed, pn, 0, 1).holds);
}

TEST_CASE("pathwise symmetry of the symmetrized matrix tracks check_pdb") {
    auto gen = dbnet::build_generator(helpers::example4_network());
    auto n = dbnet::steady_state(gen);
    auto b = dbnet::symmetrize(gen, n);
    CHECK(dbnet::check_pathwise_symmetry(b, 0, 1) == dbnet::check_pdb(gen, n, 0, 1).holds);
    CHECK(dbnet::check_pathwise_symmetry(b, 0, 2) == dbnet::check_pdb(gen, n, 0, 2).holds);
    CHECK_FALSE(dbnet::check_pdb(gen, n, 0, 2).holds);

    // any symmetric matrix is pathwise symmetric for all pairs
    helpers::RngStream rng(53, 0);
    auto db_gen = helpers::random_db_generator(4, rng);
    auto db_n = dbnet::steady_state(db_gen);
    auto db_b = dbnet::symmetrize(db_gen, db_n);
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j) CHECK(dbnet::check_pathwise_symmetry(db_b, i, j));
}

TEST_CASE("walk sums reproduce single entries and the hand-enumerated 2x2 case") {
    auto gen = dbnet::generator_from_rates(2, {{{0, 1}, 1.0}, {{1, 0}, 2.0}});
    // A = [[-1, 2], [1, -2]]
    auto w1 = dbnet::walk_sum_oracle(gen, 0, 1, 1);
    CHECK(w1.value == 1.0);  // A(1,0)
    // walks 1->1->2 and 1->2->2: (-1)(1) + (1)(-2) = -3
    auto w2 = dbnet::walk_sum_oracle(gen, 0, 1, 2);
    CHECK(w2.value == -3.0);

    auto gen4 = dbnet::build_generator(helpers::example4_network());
    auto w3 = dbnet::walk_sum_oracle(gen4, 0, 1, 3);
    std::vector<double> e1(4, 0.0);
    e1[0] = 1.0;
    CHECK_THAT(w3.value, WithinAbs(dbnet::matrix_power_apply(gen4, 3, e1)[1], 1e-12));

    CHECK_THROWS_AS(dbnet::walk_sum_oracle(gen4, 0, 1, 9), dbnet::ValidationError);
}

TEST_CASE("walk sums equal rational matrix power entries exactly") {
    helpers::RngStream rng(54, 0);
    for (int trial = 0; trial < 10; ++trial) {
        int n = 2 + static_cast<int>(rng.below(4));
        Network net;
        for (int v = 0; v < n; ++v) net.states.push_back("s" + std::to_string(v));
        for (const auto& [a, b] : helpers::random_connected_edges(n, rng)) {
            net.rates[{a, b}] = helpers::random_rational(rng);
            if (rng.next_open() < 0.85) net.rates[{b, a}] = helpers::random_rational(rng);
        }
        auto gen = dbnet::build_generator(net);
        for (int p = 1; p <= 4; ++p)
            for (int from = 0; from < n; ++from) {
                std::vector<Rational> e(n, Rational(0));
                e[from] = 1;
                auto power = dbnet::matrix_power_apply_exact(*gen.exact, p, e);
                for (int to = 0; to < n; ++to) {
                    auto walk = dbnet::walk_sum_oracle(gen, from, to, p);
                    REQUIRE(walk.exact);
                    CHECK(*walk.exact == power[to]);
                }
            }
    }
}

TEST_CASE("response ratios are constant exactly when the pair is pathwise balanced") {
    std::vector<double> grid{0.1, 0.5, 1.0, 2.0, 5.0};

    auto gen4 = dbnet::build_generator(helpers::example4_network());
    auto n4 = dbnet::steady_state(gen4);
    auto ratio = dbnet::response_ratio_test(gen4, 0, 1, grid);
    CHECK(ratio.constant);
    CHECK_THAT(ratio.fitted_c, WithinAbs(1.0, dbnet::tol::ratio));

    helpers::RngStream rng(55, 0);
    auto db_gen = helpers::random_db_generator(4, rng);
    auto db_n = dbnet::steady_state(db_gen);
    auto db_ratio = dbnet::response_ratio_test(db_gen, 1, 3, grid);
    CHECK(db_ratio.constant);
    CHECK_THAT(db_ratio.fitted_c / (db_n.values[3] / db_n.values[1]), WithinAbs(1.0, dbnet::tol::ratio));

    auto cyc = helpers::random_cycle_generator(3, rng, /*db=*/false);
    CHECK_FALSE(dbnet::response_ratio_test(cyc, 0, 1, grid).constant);

    CHECK_THROWS_AS(dbnet::response_ratio_test(gen4, 0, 1, {0.5}), dbnet::ValidationError);
}

TEST_CASE("pathwise balance matches ratio constancy on random generators") {
    helpers::RngStream rng(56, 0);
    std::vector<double> grid{0.1, 0.5, 1.0, 2.0, 5.0};
    for (int trial = 0; trial < 20; ++trial) {
        int n = 3 + static_cast<int>(rng.below(3));  // L <= 5
        auto gen = trial % 2 ? helpers::random_db_generator(n, rng)
                             : helpers::random_generator(n, rng, /*complete=*/true);
        auto ss = dbnet::steady_state(gen);
        bool pdb = dbnet::check_pdb(gen, ss, 0, 1).holds;
        bool constant = dbnet::response_ratio_test(gen, 0, 1, grid).constant;
        CHECK(pdb == constant);
        // and PDB is equivalent to pathwise symmetry of the rescaled matrix
        CHECK(pdb == dbnet::check_pathwise_symmetry(dbnet::symmetrize(gen, ss), 0, 1));
    }
}

TEST_CASE("cycle graphs: pathwise balance of an adjacent pair equals detailed balance") {
    helpers::RngStream rng(57, 0);
    for (int trial = 0; trial < 30; ++trial) {
        int n = 3 + static_cast<int>(rng.below(4));  // L in 3..6
        auto gen = helpers::random_cycle_generator(n, rng, trial % 2 == 0);
        auto ss = dbnet::steady_state(gen);
        CHECK(dbnet::check_pdb(gen, ss, 0, 1).holds ==
              dbnet::check_detailed_balance(gen, ss).satisfied);
    }
}

TEST_CASE("vanishing Delta up to L-1 forces vanishing higher orders") {
    // Cayley-Hamilton truncation: check Delta_L and Delta_{L+1} directly.
    auto check_higher = [](const dbnet::Generator& gen, int i, int j) {
        auto n = dbnet::steady_state(gen);
        REQUIRE(dbnet::check_pdb(gen, n, i, j).holds);
        const double norm_a = dbnet::inf_norm(gen.a);
        std::vector<double> ei(gen.dim, 0.0), ej(gen.dim, 0.0);
        ei[i] = 1.0;
        ej[j] = 1.0;
        double scale = n.values[i];
        for (int p = 1; p <= gen.dim + 1; ++p) {
            ei = gen.a.apply(ei);
            ej = gen.a.apply(ej);
            scale *= std::max(norm_a, 1.0);
            if (p >= gen.dim)
                CHECK(std::fabs(n.values[i] * ei[j] - n.values[j] * ej[i]) <=
                      dbnet::tol::pdb * scale);
        }
    };
    check_higher(dbnet::build_generator(helpers::example4_network()), 0, 1);
    helpers::RngStream rng(58, 0);
    check_higher(helpers::random_db_generator(5, rng), 1, 4);
    check_higher(dbnet::build_generator(helpers::exchange_symmetric_pdb_network(5, rng)), 0, 1);
}

TEST_CASE("responses converge to the steady state at long times") {
    helpers::RngStream rng(59, 0);
    auto gen = helpers::random_generator(4, rng, /*complete=*/true);
    auto n = dbnet::steady_state(gen);
    auto prop = dbnet::propagate(gen, 200.0);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) CHECK_THAT(prop.matrix(j, i), WithinAbs(n.values[j], 1e-8));
}
