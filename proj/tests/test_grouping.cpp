#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "fixtures.hpp"
#include "mdm/datagen.hpp"
#include "mdm/grouping.hpp"
#include "mdm/represent.hpp"

using namespace mdm;

namespace {

MdmInstance two_group_instance(int n, int m, std::uint64_t seed) {
    GeneratorConfig cfg;
    cfg.n = n;
    cfg.m = m;
    cfg.seed = seed;
    auto collection = gen_collection(cfg);
    Grouping truth;
    truth.assignment.assign(n + 1, 0);
    truth.num_groups = 2;
    for (int i = 1; i <= n; ++i) truth.assignment[i] = i <= n / 2 ? 1 : 2;
    MdmInstance inst = gen_mdm(n, collection, {1.0, 4.0}, truth, seed);
    return inst;
}

ChoiceDataset relabel(const ChoiceDataset& data, const std::vector<int>& perm) {
    std::vector<std::vector<int>> assortments;
    std::vector<std::vector<double>> probs;
    for (int s = 0; s < data.num_assortments(); ++s) {
        std::vector<std::pair<int, double>> entries;
        for (std::size_t k = 0; k < data.assortment(s).size(); ++k) {
            entries.push_back({perm[data.assortment(s)[k]], data.probs()[s][k]});
        }
        std::sort(entries.begin(), entries.end());
        std::vector<int> a;
        std::vector<double> p;
        for (auto& [id, prob] : entries) {
            a.push_back(id);
            p.push_back(prob);
        }
        assortments.push_back(std::move(a));
        probs.push_back(std::move(p));
    }
    return ChoiceDataset(data.n_products(), std::move(assortments), std::move(probs));
}

} // namespace

TEST_CASE("self distance is zero by convention") {
    auto inst = two_group_instance(6, 12, 3);
    CHECK(pairwise_distance(inst.dataset, 2, 2) == 0.0);
}

TEST_CASE("within-group distances vanish and cross-group distances do not") {
    auto inst = two_group_instance(6, 14, 11);
    REQUIRE(check_mdm(inst.dataset).has_value());
    // Products 1..3 share one marginal, 4..6 the other.
    const double within = pairwise_distance(inst.dataset, 1, 2);
    const double cross = pairwise_distance(inst.dataset, 1, 5);
    CHECK(within <= 1e-6);
    CHECK(cross > 1e-3);
}

TEST_CASE("the distance is symmetric") {
    auto inst = two_group_instance(5, 10, 19);
    for (int i = 1; i <= 5; ++i) {
        for (int j = i + 1; j <= 5; ++j) {
            CHECK(pairwise_distance(inst.dataset, i, j) ==
                  doctest::Approx(pairwise_distance(inst.dataset, j, i)).epsilon(1e-7));
        }
    }
}

TEST_CASE("distance matrix respects product relabeling") {
    auto inst = two_group_instance(5, 10, 23);
    DistanceMatrix base = compute_distance_matrix(inst.dataset, 1);

    std::vector<int> perm = {0, 3, 1, 5, 2, 4}; // old id -> new id
    ChoiceDataset shuffled = relabel(inst.dataset, perm);
    DistanceMatrix moved = compute_distance_matrix(shuffled, 1);
    for (int i = 1; i <= 5; ++i) {
        for (int j = 1; j <= 5; ++j) {
            CHECK(moved.at(perm[i], perm[j]) == doctest::Approx(base.at(i, j)).epsilon(1e-6));
        }
    }
}

TEST_CASE("serial and parallel distance kernels agree exactly") {
    auto inst = two_group_instance(6, 12, 29);
    DistanceMatrix serial = compute_distance_matrix(inst.dataset, 1);
    DistanceMatrix parallel = compute_distance_matrix(inst.dataset, 0);
    CHECK(serial.values == parallel.values);
}

TEST_CASE("grouping identification recovers a planted two-group truth") {
    int hits = 0;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        auto inst = two_group_instance(6, 40, seed + 100);
        GroupingResult found = identify_grouping(inst.dataset, 4, 0, seed);
        const double acc = grouping_accuracy(found.grouping, inst.grouping);
        if (acc >= 0.99) ++hits;
    }
    CHECK(hits >= 4);
}

TEST_CASE("identical marginals collapse to one group") {
    GeneratorConfig cfg;
    cfg.n = 5;
    cfg.m = 12;
    cfg.seed = 7;
    auto collection = gen_collection(cfg);
    MdmInstance inst = gen_mdm(5, collection, {1.0}, Grouping::single_group(5), 7);
    GroupingResult found = identify_grouping(inst.dataset, 4, 0, 7);
    CHECK(found.grouping.num_groups == 1);
    for (double inertia : found.inertia) CHECK(inertia <= 1e-6);
}

TEST_CASE("two products split exactly when their marginals differ") {
    GeneratorConfig cfg;
    cfg.n = 2;
    cfg.m = 3;
    cfg.seed = 13;
    cfg.max_size = 2;
    // Only one distinct pair exists over n=2; build assortments manually over n=3
    // with the pair {1,2} plus fillers so several assortments exist.
    auto inst_same = gen_mdm(2, {{1, 2}}, {1.0}, Grouping::single_group(2), 13);
    GroupingResult same = identify_grouping(inst_same.dataset, 2, 1, 13);
    CHECK(same.grouping.num_groups == 1);
}

TEST_CASE("v-measure matches its defining cases") {
    Grouping a = Grouping::singletons(4);
    Grouping b = Grouping::singletons(4);
    CHECK(grouping_accuracy(a, b) == doctest::Approx(1.0));

    CHECK(grouping_accuracy(Grouping::singletons(4), Grouping::single_group(4)) ==
          doctest::Approx(0.0));

    Grouping truth;
    truth.assignment = {0, 1, 1, 2, 2};
    truth.num_groups = 2;
    Grouping flipped;
    flipped.assignment = {0, 2, 2, 1, 1};
    flipped.num_groups = 2;
    CHECK(grouping_accuracy(flipped, truth) == doctest::Approx(1.0));

    Grouping partial;
    partial.assignment = {0, 1, 1, 1, 2};
    partial.num_groups = 2;
    const double v = grouping_accuracy(partial, truth);
    CHECK(v > 0.0);
    CHECK(v < 1.0);
}

TEST_CASE("the grouping tool rejects non-representable data") {
    CHECK_THROWS_AS(compute_distance_matrix(fixtures::rum_not_mdm_n3(), 1), Error);
}
