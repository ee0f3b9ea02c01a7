#include <doctest.h>

#include <cmath>
#include <set>

#include "fixtures.hpp"
#include "mdm/datagen.hpp"
#include "mdm/represent.hpp"

using namespace mdm;

TEST_CASE("nested collections come out as chains") {
    GeneratorConfig cfg;
    cfg.n = 5;
    cfg.m = 3;
    cfg.seed = 1;
    cfg.collection = CollectionKind::Nested;
    auto chain = gen_collection(cfg);
    REQUIRE(chain.size() == 3);
    CHECK(collection_structure(chain) == CollectionStructure::Nested);
    CHECK(chain[0].size() < chain[1].size());
    CHECK(chain[1].size() < chain[2].size());

    cfg.m = 5; // only n-1 = 4 distinct prefix sizes exist
    CHECK_THROWS_AS(gen_collection(cfg), Error);
}

TEST_CASE("laminar collections verify structurally") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        GeneratorConfig cfg;
        cfg.n = 8;
        cfg.m = 5;
        cfg.seed = seed;
        cfg.collection = CollectionKind::Laminar;
        auto family = gen_collection(cfg);
        REQUIRE(family.size() == 5);
        CHECK(collection_structure(family) != CollectionStructure::General);
        for (const auto& s : family) CHECK(s.size() >= 2);
    }
}

TEST_CASE("random collections are distinct and within the size range") {
    GeneratorConfig cfg;
    cfg.n = 7;
    cfg.m = 20;
    cfg.seed = 3;
    auto sets = gen_collection(cfg);
    std::set<std::vector<int>> seen(sets.begin(), sets.end());
    CHECK(seen.size() == sets.size());
    for (const auto& s : sets) {
        CHECK(s.size() >= 2);
        CHECK(s.size() <= 3);
    }
    cfg.m = 100;
    cfg.max_size = 2; // only C(7,2) = 21 pairs exist
    CHECK_THROWS_AS(gen_collection(cfg), Error);
}

TEST_CASE("explicit MNL probabilities") {
    ChoiceDataset even = gen_mnl(2, {{1, 2}}, {0.0, 0.7, 0.7});
    CHECK(even.prob(1, 0) == doctest::Approx(0.5));

    ChoiceDataset skew = gen_mnl(2, {{1, 2}}, {0.0, std::log(2.0), 0.0});
    CHECK(skew.prob(1, 0) == doctest::Approx(2.0 / 3));
    CHECK(skew.prob(2, 0) == doctest::Approx(1.0 / 3));

    GeneratorConfig cfg;
    cfg.n = 6;
    cfg.m = 10;
    cfg.seed = 9;
    auto collection = gen_collection(cfg);
    ChoiceDataset data = gen_mnl_random(6, collection, 42);
    CHECK(validate(data).empty());
    CHECK(check_mnl(data).has_value());
    CHECK(check_mdm(data).has_value());
}

TEST_CASE("distinct-weight constructions") {
    auto pow2 = gen_mnl_distinct(3, DistinctVariant::PowersOfTwo);
    CHECK(std::exp(pow2[1]) == doctest::Approx(2.0));
    CHECK(std::exp(pow2[2]) == doctest::Approx(4.0));
    CHECK(std::exp(pow2[3]) == doctest::Approx(8.0));

    auto prod = gen_mnl_distinct(3, DistinctVariant::Product);
    CHECK(std::exp(prod[1]) == doctest::Approx(2.0));
    CHECK(std::exp(prod[2]) == doctest::Approx(4.0));
    CHECK(std::exp(prod[3]) == doctest::Approx(24.0));

    CHECK_THROWS_AS(gen_mnl_distinct(13, DistinctVariant::Product), Error);

    // All 2^6 subset sums of (2,4,...,64) are distinct.
    auto nu6 = gen_mnl_distinct(6, DistinctVariant::PowersOfTwo);
    std::set<long long> sums;
    for (int mask = 0; mask < 64; ++mask) {
        long long total = 0;
        for (int k = 0; k < 6; ++k) {
            if ((mask >> k) & 1) total += std::llround(std::exp(nu6[k + 1]));
        }
        CHECK(sums.insert(total).second);
    }
}

TEST_CASE("perturbation is the identity at alpha or sigma zero") {
    auto data = fixtures::nonconvex_x();
    CHECK(perturb(data, 0.0, 0.05, 7).probs() == data.probs());
    CHECK(perturb(data, 1.0, 0.0, 7).probs() == data.probs());
}

TEST_CASE("perturbed rows stay normalized and masks nest across alpha") {
    GeneratorConfig cfg;
    cfg.n = 7;
    cfg.m = 15;
    cfg.seed = 21;
    auto collection = gen_collection(cfg);
    ChoiceDataset data = gen_mnl_random(7, collection, 21);
    ChoiceDataset lo = perturb(data, 0.25, 0.01, 5);
    ChoiceDataset hi = perturb(data, 0.75, 0.01, 5);
    CHECK(validate(lo).empty());
    CHECK(validate(hi).empty());
    // Entries left untouched at the higher alpha are untouched at the lower.
    for (int s = 0; s < data.num_assortments(); ++s) {
        for (std::size_t k = 0; k < data.probs()[s].size(); ++k) {
            if (hi.probs()[s][k] == data.probs()[s][k]) {
                CHECK(lo.probs()[s][k] == data.probs()[s][k]);
            }
        }
    }
}

TEST_CASE("assortment solver reproduces MNL under iid exponentials") {
    MarginalSpec spec;
    spec.nu = {0.0, 0.0, 0.0};
    spec.marginals.resize(3);
    for (auto& m : spec.marginals) m.cdf = ExponentialCdf{1.0};
    auto even = solve_mdm_assortment(spec, {1, 2});
    CHECK(even[0] == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(even[1] == doctest::Approx(0.5).epsilon(1e-9));

    spec.nu = {0.0, std::log(2.0), 0.0};
    auto skew = solve_mdm_assortment(spec, {1, 2});
    CHECK(skew[0] == doctest::Approx(2.0 / 3).epsilon(1e-9));
    CHECK(skew[1] == doctest::Approx(1.0 / 3).epsilon(1e-9));
}

TEST_CASE("assortment solver output is a probability vector") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        GeneratorConfig cfg;
        cfg.n = 6;
        cfg.m = 8;
        cfg.seed = seed;
        auto collection = gen_collection(cfg);
        MdmInstance inst = gen_mdm(6, collection, {1.0, 4.0},
                                   [&] {
                                       Grouping g;
                                       g.assignment = {0, 1, 1, 1, 2, 2, 2};
                                       g.num_groups = 2;
                                       return g;
                                   }(),
                                   seed);
        CHECK(validate(inst.dataset).empty());
        for (int s = 0; s < inst.dataset.num_assortments(); ++s) {
            double sum = 0.0;
            for (double p : inst.dataset.probs()[s]) {
                CHECK(p >= 0.0);
                CHECK(p <= 1.0);
                sum += p;
            }
            CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
        }
        // Ground truth passes both checks with its own grouping.
        CHECK(check_mdm(inst.dataset).has_value());
        CHECK(check_gmdm(inst.dataset, inst.grouping).has_value());
    }
}

TEST_CASE("choice mass is nonincreasing in the multiplier") {
    MarginalSpec spec;
    spec.nu = {0.0, 0.3, 0.9, 0.1};
    spec.marginals.resize(4);
    spec.marginals[1].cdf = ExponentialCdf{1.0};
    spec.marginals[2].cdf = ExponentialCdf{2.5};
    spec.marginals[3].cdf = PiecewiseLinearCdf{{0.0, 0.4, 1.1}, {0.0, 0.6, 1.0}};
    auto mass = [&](double t) {
        double total = 0.0;
        for (int i = 1; i <= 3; ++i) {
            total += std::max(0.0, 1.0 - spec.marginals[i].eval(t - spec.nu[i]));
        }
        return total;
    };
    double prev = mass(-1.0);
    for (double t = -0.9; t < 4.0; t += 0.1) {
        const double cur = mass(t);
        CHECK(cur <= prev + 1e-12);
        prev = cur;
    }
}

TEST_CASE("kendall tau distances") {
    CHECK(kendall_tau({1, 2, 3}, {1, 2, 3}) == 0);
    CHECK(kendall_tau({1, 2, 3}, {3, 2, 1}) == 3);
    CHECK(kendall_tau({1, 2, 3}, {3, 1}) == 1);
    CHECK(kendall_tau({1, 2}, {3, 4}) == 0);
}

TEST_CASE("split seeds differ across indices") {
    std::set<std::uint64_t> seen;
    for (std::uint64_t k = 0; k < 1000; ++k) seen.insert(split_seed(42, k));
    CHECK(seen.size() == 1000);
}
