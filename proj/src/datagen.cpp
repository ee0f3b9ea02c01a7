#include "mdm/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "mdm/solver.hpp"

namespace mdm {

std::uint64_t split_seed(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

namespace {

// Number of subsets of {1..n} with size in [lo,hi], saturating at 2^62.
std::uint64_t count_subsets(int n, int lo, int hi) {
    const std::uint64_t cap = 1ULL << 62;
    std::uint64_t total = 0;
    for (int k = lo; k <= hi && k <= n; ++k) {
        std::uint64_t c = 1;
        for (int j = 0; j < k; ++j) {
            if (c > cap / (n - j)) return cap;
            c = c * (n - j) / (j + 1);
        }
        if (total > cap - c) return cap;
        total += c;
    }
    return total;
}

std::vector<int> sample_subset(int n, int size, std::mt19937_64& rng) {
    std::vector<int> ids(n);
    std::iota(ids.begin(), ids.end(), 1);
    std::shuffle(ids.begin(), ids.end(), rng);
    ids.resize(size);
    std::sort(ids.begin(), ids.end());
    return ids;
}

} // namespace

std::vector<std::vector<int>> gen_collection(const GeneratorConfig& config) {
    const int n = config.n;
    const int m = config.m;
    if (n < 2 || m < 1) throw Error(ErrorCode::InfeasibleConfig, "need n >= 2 and m >= 1");
    std::mt19937_64 rng(split_seed(config.seed, 0));

    if (config.collection == CollectionKind::Nested) {
        if (m > n - 1) {
            throw Error(ErrorCode::InfeasibleConfig, "a nested chain admits at most n-1 assortments");
        }
        std::vector<int> sizes(n - 1);
        std::iota(sizes.begin(), sizes.end(), 2);
        std::shuffle(sizes.begin(), sizes.end(), rng);
        sizes.resize(m);
        std::sort(sizes.begin(), sizes.end());
        std::vector<int> order(n);
        std::iota(order.begin(), order.end(), 1);
        std::shuffle(order.begin(), order.end(), rng);
        std::vector<std::vector<int>> out;
        for (int size : sizes) {
            std::vector<int> s(order.begin(), order.begin() + size);
            std::sort(s.begin(), s.end());
            out.push_back(std::move(s));
        }
        return out;
    }

    if (config.collection == CollectionKind::Laminar) {
        // Binary splits of a shuffled product list; every internal node is a
        // candidate set and any subfamily of nodes stays laminar.
        std::vector<int> order(n);
        std::iota(order.begin(), order.end(), 1);
        std::shuffle(order.begin(), order.end(), rng);
        std::vector<std::vector<int>> nodes;
        std::vector<std::pair<int, int>> stack{{0, n}}; // [begin,end)
        while (!stack.empty()) {
            auto [b, e] = stack.back();
            stack.pop_back();
            if (e - b < 2) continue;
            std::vector<int> s(order.begin() + b, order.begin() + e);
            std::sort(s.begin(), s.end());
            nodes.push_back(std::move(s));
            if (e - b == 2) continue;
            std::uniform_int_distribution<int> cut(b + 1, e - 1);
            const int c = cut(rng);
            stack.push_back({b, c});
            stack.push_back({c, e});
        }
        if (m > static_cast<int>(nodes.size())) {
            throw Error(ErrorCode::InfeasibleConfig, "laminar tree has too few internal nodes");
        }
        std::shuffle(nodes.begin(), nodes.end(), rng);
        nodes.resize(m);
        return nodes;
    }

    // Random distinct assortments, by Bernoulli inclusion or a size range.
    const int lo = std::max(2, config.min_size);
    const int hi = std::min(n, std::max(lo, config.max_size));
    if (config.inclusion_prob <= 0.0 &&
        count_subsets(n, lo, hi) < static_cast<std::uint64_t>(m)) {
        throw Error(ErrorCode::InfeasibleConfig, "not enough distinct assortments of the requested sizes");
    }
    std::set<std::vector<int>> seen;
    std::vector<std::vector<int>> out;
    std::int64_t attempts = 0;
    const std::int64_t attempt_cap = 2000LL * m + 10000;
    while (static_cast<int>(out.size()) < m) {
        if (++attempts > attempt_cap) {
            throw Error(ErrorCode::InfeasibleConfig, "assortment sampling did not reach m distinct sets");
        }
        std::vector<int> s;
        if (config.inclusion_prob > 0.0) {
            std::bernoulli_distribution inc(config.inclusion_prob);
            for (int i = 1; i <= n; ++i) {
                if (inc(rng)) s.push_back(i);
            }
            if (static_cast<int>(s.size()) < 2) continue;
        } else {
            std::uniform_int_distribution<int> size_dist(lo, hi);
            s = sample_subset(n, size_dist(rng), rng);
        }
        if (seen.insert(s).second) out.push_back(std::move(s));
    }
    return out;
}

ChoiceDataset gen_mnl(int n, const std::vector<std::vector<int>>& collection,
                      const std::vector<double>& nu) {
    std::vector<std::vector<double>> probs;
    for (const auto& s : collection) {
        double denom = 0.0;
        for (int j : s) denom += std::exp(nu[j]);
        std::vector<double> row;
        for (int i : s) row.push_back(std::exp(nu[i]) / denom);
        probs.push_back(std::move(row));
    }
    return ChoiceDataset(n, collection, std::move(probs));
}

ChoiceDataset gen_mnl_random(int n, const std::vector<std::vector<int>>& collection,
                             std::uint64_t seed) {
    std::mt19937_64 rng(split_seed(seed, 1));
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<double> nu(n + 1, 0.0);
    for (int i = 1; i <= n; ++i) nu[i] = gauss(rng);
    return gen_mnl(n, collection, nu);
}

std::vector<double> gen_mnl_distinct(int n, DistinctVariant variant) {
    if (n < 2) throw Error(ErrorCode::InfeasibleConfig, "need n >= 2");
    std::vector<double> nu(n + 1, 0.0);
    if (variant == DistinctVariant::PowersOfTwo) {
        if (n > 60) throw Error(ErrorCode::OverflowRisk, "2^k weights overflow past n = 60");
        for (int i = 1; i <= n; ++i) nu[i] = i * std::log(2.0);
        return nu;
    }
    if (n > 12) throw Error(ErrorCode::OverflowRisk, "product-form weights grow doubly exponentially");
    // x_1 = 2, x_{k+1} = x_k * (x_1 + ... + x_k), tracked in log space.
    std::vector<double> log_x = {std::log(2.0)};
    double log_sum = log_x[0];
    for (int k = 2; k <= n; ++k) {
        log_x.push_back(log_x.back() + log_sum);
        const double a = std::max(log_sum, log_x.back());
        const double b = std::min(log_sum, log_x.back());
        log_sum = a + std::log1p(std::exp(b - a));
    }
    for (int i = 1; i <= n; ++i) nu[i] = log_x[i - 1];
    return nu;
}

ChoiceDataset perturb(const ChoiceDataset& data, double alpha, double sigma, std::uint64_t seed) {
    require_valid(data);
    std::vector<std::vector<double>> probs = data.probs();
    for (int s = 0; s < data.num_assortments(); ++s) {
        std::mt19937_64 rng(split_seed(seed, static_cast<std::uint64_t>(s)));
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        std::normal_distribution<double> gauss(0.0, 1.0);
        auto& row = probs[s];
        double sum = 0.0;
        for (double& p : row) {
            // Both draws happen regardless of the mask so a larger alpha
            // perturbs a superset of the entries under the same seed.
            const double u = unif(rng);
            const double g = gauss(rng);
            if (u < alpha && sigma > 0.0) p = std::clamp(p * (1.0 + sigma * g), 0.0, 1.0);
            sum += p;
        }
        if (sum <= kProbZeroTol) {
            row = data.probs()[s];
            continue;
        }
        for (double& p : row) p /= sum;
    }
    return data.with_probs(std::move(probs));
}

namespace {

double choice_mass(const MarginalSpec& spec, const std::vector<int>& S, double t) {
    double total = 0.0;
    for (int i : S) {
        total += std::max(0.0, 1.0 - spec.marginals[i].eval(t - spec.nu[i]));
    }
    return total;
}

} // namespace

std::vector<double> solve_mdm_assortment(const MarginalSpec& spec, const std::vector<int>& S) {
    if (S.size() < 2) throw Error(ErrorCode::InvalidDataset, "assortments need at least 2 products");
    for (int i : S) {
        if (i < 1 || i > spec.n_products()) {
            throw Error(ErrorCode::InvalidDataset, "product id outside the marginal spec");
        }
    }

    double lo = kInf;
    double hi = -kInf;
    bool unbounded_right = false;
    for (int i : S) {
        lo = std::min(lo, spec.nu[i] + spec.marginals[i].support_left());
        const double r = spec.marginals[i].support_right();
        if (std::isfinite(r)) {
            hi = std::max(hi, spec.nu[i] + r);
        } else {
            unbounded_right = true;
        }
    }
    if (unbounded_right) {
        double width = 1.0;
        hi = std::max(hi, lo) + width;
        int guard = 0;
        while (choice_mass(spec, S, hi) >= 1.0) {
            if (++guard > 200) {
                throw Error(ErrorCode::BisectionBracketFailure, "no bracketing interval found");
            }
            width *= 2.0;
            hi += width;
        }
    } else {
        hi += 1.0;
    }
    if (!(choice_mass(spec, S, lo) >= 1.0 - 1e-12)) {
        throw Error(ErrorCode::BisectionBracketFailure, "mass at the left bracket is below 1");
    }

    double mid = lo;
    for (int iter = 0; iter < 200; ++iter) {
        mid = 0.5 * (lo + hi);
        const double mass = choice_mass(spec, S, mid);
        if (std::abs(mass - 1.0) <= 1e-10) break;
        if (mass > 1.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    std::vector<double> out;
    for (int i : S) {
        out.push_back(std::max(0.0, 1.0 - spec.marginals[i].eval(mid - spec.nu[i])));
    }
    return out;
}

Marginal uniform_marginal(double half_width) {
    Marginal m;
    m.cdf = PiecewiseLinearCdf{{-half_width, half_width}, {0.0, 1.0}};
    return m;
}

MdmInstance gen_mdm(int n, const std::vector<std::vector<int>>& collection,
                    const std::vector<Marginal>& group_marginals, const Grouping& grouping,
                    std::uint64_t seed) {
    require_valid(grouping, n);
    if (static_cast<int>(group_marginals.size()) < grouping.num_groups) {
        throw Error(ErrorCode::InfeasibleConfig, "need one marginal per group");
    }
    std::mt19937_64 rng(split_seed(seed, 2));
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    MdmInstance inst;
    inst.grouping = grouping;
    inst.spec.nu.assign(n + 1, 0.0);
    inst.spec.marginals.resize(n + 1);
    inst.spec.marginals[0].cdf = ExponentialCdf{1.0};
    for (int i = 1; i <= n; ++i) {
        inst.spec.nu[i] = unif(rng);
        inst.spec.marginals[i] = group_marginals[grouping.group_of(i) - 1];
    }
    std::vector<std::vector<double>> probs;
    for (const auto& s : collection) {
        probs.push_back(solve_mdm_assortment(inst.spec, s));
    }
    inst.dataset = ChoiceDataset(n, collection, std::move(probs));
    return inst;
}

MdmInstance gen_mdm(int n, const std::vector<std::vector<int>>& collection,
                    const std::vector<double>& group_rates, const Grouping& grouping,
                    std::uint64_t seed) {
    std::vector<Marginal> marginals;
    for (double rate : group_rates) {
        Marginal m;
        m.cdf = ExponentialCdf{rate};
        marginals.push_back(m);
    }
    return gen_mdm(n, collection, marginals, grouping, seed);
}

int kendall_tau(const std::vector<int>& a, const std::vector<int>& b) {
    std::vector<std::pair<int, int>> common; // (position in a, position in b)
    for (std::size_t i = 0; i < a.size(); ++i) {
        auto it = std::find(b.begin(), b.end(), a[i]);
        if (it != b.end()) {
            common.push_back({static_cast<int>(i), static_cast<int>(it - b.begin())});
        }
    }
    int discordant = 0;
    for (std::size_t u = 0; u < common.size(); ++u) {
        for (std::size_t v = u + 1; v < common.size(); ++v) {
            const bool a_order = common[u].first < common[v].first;
            const bool b_order = common[u].second < common[v].second;
            if (a_order != b_order) ++discordant;
        }
    }
    return discordant;
}

} // namespace mdm
