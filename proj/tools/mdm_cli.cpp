#include <chrono>
#include <random>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "mdm/core.hpp"
#include "mdm/datagen.hpp"
#include "mdm/experiments.hpp"
#include "mdm/grouping.hpp"
#include "mdm/limit.hpp"
#include "mdm/parallel.hpp"
#include "mdm/predict.hpp"
#include "mdm/represent.hpp"

namespace {

using namespace mdm;

void write_output(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text << std::endl;
    } else {
        std::ofstream out(out_path);
        if (!out) throw Error(ErrorCode::Io, "cannot write " + out_path);
        out << text;
        if (!text.empty() && text.back() != '\n') out << '\n';
    }
}

std::vector<int> parse_id_list(const std::string& text) {
    std::vector<int> out;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (!tok.empty()) out.push_back(std::stoi(tok));
    }
    std::sort(out.begin(), out.end());
    return out;
}

Grouping load_grouping(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return grouping_from_json(buf.str());
}

int cmd_check(const std::string& dataset_path, const std::string& model,
              const std::string& grouping_path, const std::string& engine,
              const std::string& out_path) {
    ChoiceDataset data = load_dataset(dataset_path);
    auto violations = validate(data);
    if (!violations.empty()) {
        std::cerr << "invalid dataset: " << violations.front().message << "\n";
        return 2;
    }

    bool representable = false;
    std::string payload;
    if (model == "mdm") {
        auto cert = check_mdm(data, engine == "lp" ? CheckEngine::Lp : CheckEngine::Graph);
        representable = cert.has_value();
        if (cert) payload = to_json(*cert, data);
    } else if (model == "gmdm" || model == "apu") {
        Grouping g = model == "apu" || grouping_path.empty()
                         ? Grouping::single_group(data.n_products())
                         : load_grouping(grouping_path);
        auto cert = check_gmdm(data, g);
        representable = cert.has_value();
        if (cert) payload = to_json(*cert, data);
    } else if (model == "mnl") {
        auto nu = check_mnl(data);
        representable = nu.has_value();
        if (nu) {
            nlohmann::json j;
            j["nu"] = std::vector<double>(nu->begin() + 1, nu->end());
            payload = j.dump(2);
        }
    } else if (model == "regular") {
        representable = check_regular(data);
    } else if (model == "rum") {
        representable = check_rum(data);
    } else {
        std::cerr << "unknown model: " << model << "\n";
        return 2;
    }

    nlohmann::json j;
    j["model"] = model;
    j["representable"] = representable;
    if (!payload.empty()) j["certificate"] = nlohmann::json::parse(payload);
    write_output(j.dump(2), out_path);
    return representable ? 0 : 1;
}

int cmd_predict(const std::string& dataset_path, const std::string& assortment,
                const std::string& revenues, const std::string& mode,
                const std::string& grouping_path, const std::string& method,
                const std::string& out_path) {
    PredictionQuery q;
    q.dataset = load_dataset(dataset_path);
    q.new_assortment = parse_id_list(assortment);
    const int n = q.dataset.n_products();
    if (revenues.empty()) {
        q.revenues.assign(n + 1, 1.0);
        q.revenues[0] = 0.0;
    } else {
        std::stringstream ss(revenues);
        std::string tok;
        q.revenues.assign(1, 0.0);
        while (std::getline(ss, tok, ',')) q.revenues.push_back(std::stod(tok));
        if (static_cast<int>(q.revenues.size()) != n + 1) {
            throw Error(ErrorCode::InvalidDataset, "need one revenue per product");
        }
    }
    if (method == "milp") q.method = PredictMethod::GeneralMilp;
    else if (method == "nested") q.method = PredictMethod::NestedEnum;
    else if (method == "structured") q.method = PredictMethod::StructuredLp;

    PredictionResult res;
    if (mode == "gmdm") {
        q.grouping = grouping_path.empty() ? Grouping::single_group(n) : load_grouping(grouping_path);
        res = predict_interval_gmdm(q);
    } else {
        res = predict_interval(q);
    }
    write_output(to_json(res, q.new_assortment), out_path);
    return 0;
}

int cmd_fit(const std::string& dataset_path, const std::string& model,
            const std::string& grouping_path, const std::string& method, double delta,
            const std::string& out_path) {
    ChoiceDataset data = load_dataset(dataset_path);
    LimitOptions opts;
    if (method == "milp") opts.method = LimitMethod::Milp;
    else if (method == "enum") opts.method = LimitMethod::RankingEnum;
    else if (method == "structured") opts.method = LimitMethod::StructuredLp;

    LimitResult res;
    if (model == "gmdm" || model == "apu") {
        Grouping g = model == "apu" || grouping_path.empty()
                         ? Grouping::single_group(data.n_products())
                         : load_grouping(grouping_path);
        res = limit_gmdm(data, g, {}, opts);
    } else if (model == "rum") {
        res = limit_rum(data);
    } else if (model == "mnl") {
        MnlFit fit = fit_mnl_mle(data);
        nlohmann::json j;
        j["loss"] = fit.loss;
        j["log_likelihood"] = fit.log_likelihood;
        j["nu"] = std::vector<double>(fit.nu.begin() + 1, fit.nu.end());
        j["fitted"] = fit.fitted_probs;
        write_output(j.dump(2), out_path);
        return 0;
    } else {
        res = limit_mdm(data, {}, opts);
    }

    nlohmann::json j = nlohmann::json::parse(to_json(res, data));
    if (delta > 0.0 && model == "mdm") {
        DeltaOptimal rec = recover_delta_optimal(data, res, delta);
        j["recovered"] = rec.probs;
        j["recovered_margin"] = rec.margin;
        j["recovered_loss"] = rec.loss;
    }
    write_output(j.dump(2), out_path);
    return 0;
}

int cmd_group(const std::string& dataset_path, int k_max, int threads, std::uint64_t seed,
              const std::string& out_path, const std::string& curve_path) {
    ChoiceDataset data = load_dataset(dataset_path);
    const int limit = k_max > 0 ? k_max : std::min(data.n_products(), 5);
    GroupingResult res = identify_grouping(data, limit, threads, seed);
    write_output(to_json(res.grouping), out_path);
    std::ostringstream curve;
    curve << "k,inertia\n";
    for (std::size_t k = 0; k < res.inertia.size(); ++k) {
        char buf[40];
        std::snprintf(buf, sizeof(buf), "%.10g", res.inertia[k]);
        curve << (k + 1) << ',' << buf << '\n';
    }
    if (!curve_path.empty()) {
        std::ofstream out(curve_path);
        out << curve.str();
    } else {
        std::cout << curve.str();
    }
    return 0;
}

int cmd_gen(int n, int m, const std::string& kind, int min_size, int max_size,
            const std::string& model, int k_groups, const std::string& rates_text, double alpha,
            double sigma, std::uint64_t seed, const std::string& out_path,
            const std::string& truth_path) {
    GeneratorConfig cfg;
    cfg.n = n;
    cfg.m = m;
    cfg.min_size = min_size;
    cfg.max_size = max_size;
    cfg.seed = seed;
    if (kind == "nested") cfg.collection = CollectionKind::Nested;
    else if (kind == "laminar") cfg.collection = CollectionKind::Laminar;
    auto collection = gen_collection(cfg);

    nlohmann::json truth;
    ChoiceDataset data;
    if (model == "mnl") {
        data = gen_mnl_random(n, collection, seed);
        truth["model"] = "mnl";
    } else if (model == "uniform") {
        std::vector<std::vector<double>> probs;
        std::mt19937_64 rng(split_seed(seed, 3));
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        for (const auto& s : collection) {
            std::vector<double> row(s.size());
            double sum = 0.0;
            for (double& p : row) {
                p = unif(rng) + 1e-9;
                sum += p;
            }
            for (double& p : row) p /= sum;
            probs.push_back(std::move(row));
        }
        data = ChoiceDataset(n, collection, std::move(probs));
        truth["model"] = "uniform";
    } else {
        std::vector<double> rates;
        if (!rates_text.empty()) {
            std::stringstream ss(rates_text);
            std::string tok;
            while (std::getline(ss, tok, ',')) rates.push_back(std::stod(tok));
        }
        Grouping grouping;
        if (k_groups <= 1) {
            grouping = Grouping::single_group(n);
        } else if (k_groups >= n) {
            grouping = Grouping::singletons(n);
        } else {
            grouping.assignment.assign(n + 1, 0);
            grouping.num_groups = k_groups;
            for (int i = 1; i <= n; ++i) grouping.assignment[i] = 1 + (i - 1) % k_groups;
        }
        while (static_cast<int>(rates.size()) < grouping.num_groups) {
            rates.push_back(rates.empty() ? 1.0 : rates.back() * 4.0);
        }
        MdmInstance inst = gen_mdm(n, collection, rates, grouping, seed);
        data = inst.dataset;
        truth["model"] = "mdm";
        truth["grouping"] = nlohmann::json::parse(to_json(inst.grouping));
        truth["marginals"] = nlohmann::json::parse(to_json(inst.spec));
    }
    if (alpha > 0.0 && sigma > 0.0) {
        data = perturb(data, alpha, sigma, seed);
        truth["alpha"] = alpha;
        truth["sigma"] = sigma;
    }
    write_output(to_json(data), out_path);
    if (!truth_path.empty()) {
        std::ofstream out(truth_path);
        out << truth.dump(2) << '\n';
    }
    return 0;
}

int cmd_bench_kernels(std::uint64_t seed, const std::string& out_path) {
    std::ostringstream csv;
    csv << "kernel,threads,ms\n";
    auto time_it = [&](const char* name, int threads, auto&& fn) {
        const auto start = std::chrono::steady_clock::now();
        fn(threads);
        const double ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
                .count();
        char buf[40];
        std::snprintf(buf, sizeof(buf), "%.3f", ms);
        csv << name << ',' << threads << ',' << buf << '\n';
    };

    GeneratorConfig cfg;
    cfg.n = 7;
    cfg.m = 40;
    cfg.seed = seed;
    auto collection = gen_collection(cfg);
    Grouping truth;
    truth.assignment.assign(cfg.n + 1, 0);
    truth.num_groups = 2;
    for (int i = 1; i <= cfg.n; ++i) truth.assignment[i] = i <= cfg.n / 2 ? 1 : 2;
    MdmInstance inst = gen_mdm(cfg.n, collection, {1.0, 4.0}, truth, seed);

    // Pairwise-distance matrix: serial reference vs OpenMP.
    for (int threads : {1, 0}) {
        time_it("distance_matrix", threads,
                [&](int t) { compute_distance_matrix(inst.dataset, t); });
    }

    // Ranking enumeration on a general 6-assortment instance.
    GeneratorConfig small = cfg;
    small.m = 6;
    small.seed = split_seed(seed, 1);
    auto small_collection = gen_collection(small);
    ChoiceDataset noisy =
        perturb(gen_mnl_random(small.n, small_collection, small.seed), 1.0, 0.05, small.seed);
    for (int threads : {1, 0}) {
        time_it("ranking_enum", threads,
                [&](int t) { limit_ranking_enum(noisy, {}, t); });
    }

    // Batch representability checking over replications.
    for (int threads : {1, 0}) {
        time_it("rep_power_cells", threads, [&](int t) {
            ExperimentSpec spec;
            spec.base = cfg;
            spec.base.m = 20;
            spec.replications = 40;
            spec.threads = t;
            run_rep_power(spec, {0.5});
        });
    }
    write_output(csv.str(), out_path);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Marginal distribution model toolkit"};
    app.require_subcommand(1);

    std::uint64_t seed = 0;
    double tol = 1e-9;
    std::string out_path;
    std::string method = "auto";
    app.add_option("--seed", seed, "master random seed");
    app.add_option("--tol", tol, "probability equality tolerance (reporting only)");
    app.add_option("--out", out_path, "output path (default stdout)");
    app.add_option("--method", method, "solver method: auto|milp|nested|structured|enum");

    auto* check = app.add_subcommand("check", "representability checks");
    std::string dataset_path, model = "mdm", grouping_path, engine = "graph";
    check->add_option("dataset", dataset_path, "dataset JSON")->required();
    check->add_option("--model", model, "mdm|gmdm|apu|mnl|regular|rum");
    check->add_option("--grouping", grouping_path, "grouping JSON for gmdm");
    check->add_option("--engine", engine, "mdm engine: graph|lp");

    auto* predict = app.add_subcommand("predict", "interval prediction for an unseen assortment");
    std::string assortment, revenues, mode = "mdm";
    predict->add_option("dataset", dataset_path, "dataset JSON")->required();
    predict->add_option("--assortment", assortment, "comma-separated product ids")->required();
    predict->add_option("--revenues", revenues, "comma-separated per-product revenues");
    predict->add_option("--mode", mode, "mdm|gmdm");
    predict->add_option("--grouping", grouping_path, "grouping JSON for gmdm");

    auto* fit = app.add_subcommand("fit", "best-fit estimation");
    double delta = 0.0;
    fit->add_option("dataset", dataset_path, "dataset JSON")->required();
    fit->add_option("--model", model, "mdm|gmdm|apu|mnl|rum");
    fit->add_option("--grouping", grouping_path, "grouping JSON for gmdm");
    fit->add_option("--delta", delta, "also recover a delta-optimal representable assignment");

    auto* group = app.add_subcommand("group", "identify a product grouping");
    int k_max = 0, threads = 0;
    group->add_option("dataset", dataset_path, "dataset JSON")->required();
    group->add_option("--kmax", k_max, "largest cluster count to scan");
    group->add_option("--threads", threads, "threads for the distance kernels (1 = serial)");
    std::string curve_path;
    group->add_option("--curve-out", curve_path, "inertia curve CSV path");

    auto* gen = app.add_subcommand("gen", "synthetic instance generation");
    int n = 7, m = 20, min_size = 2, max_size = 3, k_groups = 0;
    std::string kind = "random", gen_model = "mnl", rates_text, truth_path;
    double alpha = 0.0, sigma = 0.0;
    gen->add_option("--n", n, "number of products");
    gen->add_option("--m", m, "number of assortments");
    gen->add_option("--kind", kind, "random|nested|laminar");
    gen->add_option("--min-size", min_size, "smallest assortment size");
    gen->add_option("--max-size", max_size, "largest assortment size");
    gen->add_option("--model", gen_model, "mnl|mdm|uniform");
    gen->add_option("--groups", k_groups, "number of marginal groups for mdm");
    gen->add_option("--rates", rates_text, "comma-separated exponential rates per group");
    gen->add_option("--alpha", alpha, "perturbed entry fraction");
    gen->add_option("--sigma", sigma, "perturbation noise scale");
    gen->add_option("--truth-out", truth_path, "ground-truth sidecar path");

    auto* bench = app.add_subcommand("bench", "kernel benchmarks and experiment harness");
    std::string bench_name;
    int reps = 0;
    bench->add_option("name", bench_name,
                      "kernels|rep_power|rep_vs_rum|prediction|limit_compare|"
                      "grouping_effect|grouping_recovery")
        ->required();
    bench->add_option("--reps", reps, "replications per cell");
    bench->add_option("--threads", threads, "worker threads (1 = serial)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(check)) {
            return cmd_check(dataset_path, model, grouping_path, engine, out_path);
        }
        if (app.got_subcommand(predict)) {
            return cmd_predict(dataset_path, assortment, revenues, mode, grouping_path, method,
                               out_path);
        }
        if (app.got_subcommand(fit)) {
            return cmd_fit(dataset_path, model, grouping_path, method, delta, out_path);
        }
        if (app.got_subcommand(group)) {
            return cmd_group(dataset_path, k_max, threads, seed, out_path, curve_path);
        }
        if (app.got_subcommand(gen)) {
            return cmd_gen(n, m, kind, min_size, max_size, gen_model, k_groups, rates_text, alpha,
                           sigma, seed, out_path, truth_path);
        }
        if (app.got_subcommand(bench)) {
            if (bench_name == "kernels") return cmd_bench_kernels(seed, out_path);
            ExperimentId id;
            if (!experiment_id_from_string(bench_name, id)) {
                std::cerr << "unknown benchmark: " << bench_name << "\n";
                return 2;
            }
            ExperimentSpec spec;
            spec.id = id;
            spec.base.seed = seed;
            spec.threads = threads;
            if (reps > 0) spec.replications = reps;
            else spec.replications = 100;
            write_output(run_experiment_csv(spec), out_path);
            return 0;
        }
    } catch (const mdm::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
