#include "ecdl/cli.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "ecdl/clustering.hpp"
#include "ecdl/ensemble.hpp"
#include "ecdl/error.hpp"
#include "ecdl/evaluation.hpp"
#include "ecdl/inference.hpp"
#include "ecdl/io.hpp"
#include "ecdl/parallel.hpp"
#include "ecdl/simulation.hpp"

namespace ecdl::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CommonOptions {
    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> workers;
    bool strict = false;
};

// Reads typed keys from a JSON object and rejects keys nobody asked for.
class ConfigReader {
public:
    explicit ConfigReader(json object) : object_(std::move(object)) {
        if (!object_.is_object()) throw Error(ErrorCode::ConfigError, "config must be a JSON object");
    }

    template <class T>
    T get(const std::string& key, T fallback) {
        seen_.insert(key);
        if (!object_.contains(key) || object_[key].is_null()) return fallback;
        return convert<T>(key);
    }

    template <class T>
    std::optional<T> optional(const std::string& key) {
        seen_.insert(key);
        if (!object_.contains(key) || object_[key].is_null()) return std::nullopt;
        return convert<T>(key);
    }

    template <class T>
    T required(const std::string& key) {
        seen_.insert(key);
        if (!object_.contains(key) || object_[key].is_null()) {
            throw Error(ErrorCode::ConfigError, "missing required key '" + key + "'");
        }
        return convert<T>(key);
    }

    void reject_unknown() const {
        for (const auto& item : object_.items()) {
            if (!seen_.count(item.key())) throw Error(ErrorCode::ConfigError, "unknown key '" + item.key() + "'");
        }
    }

private:
    template <class T>
    T convert(const std::string& key) {
        const json& value = object_[key];
        if constexpr (std::is_same_v<T, bool>) {
            if (!value.is_boolean()) throw type_error(key, "boolean");
        } else if constexpr (std::is_integral_v<T>) {
            if (!value.is_number_integer()) throw type_error(key, "integer");
            if constexpr (std::is_unsigned_v<T>) {
                if (value.is_number_integer() && !value.is_number_unsigned()) throw type_error(key, "non-negative integer");
            }
        } else if constexpr (std::is_floating_point_v<T>) {
            if (!value.is_number()) throw type_error(key, "number");
        } else if constexpr (std::is_same_v<T, std::string>) {
            if (!value.is_string()) throw type_error(key, "string");
        }
        try {
            return value.get<T>();
        } catch (const json::exception&) {
            throw type_error(key, "a different type");
        }
    }

    static Error type_error(const std::string& key, const std::string& expected) {
        return Error(ErrorCode::ConfigError, "key '" + key + "': expected " + expected);
    }

    json object_;
    std::set<std::string> seen_;
};

json read_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::ConfigError, path.string() + ": " + e.what());
    }
}

void write_json(const fs::path& path, const json& value) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
    out << value.dump(2) << '\n';
    if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

void prepare_out_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw Error(ErrorCode::IoError, "cannot create output directory " + dir.string());
}

fs::path resolve_relative(const fs::path& base_file, const std::string& path) {
    const fs::path candidate(path);
    return candidate.is_absolute() ? candidate : base_file.parent_path() / candidate;
}

unsigned resolve_workers(const CommonOptions& options, std::optional<unsigned> from_config) {
    if (options.workers) return std::max(1u, *options.workers);
    if (from_config) return std::max(1u, *from_config);
    if (const char* env = std::getenv("ECDL_WORKERS")) {
        try {
            const long value = std::stol(env);
            if (value >= 1) return static_cast<unsigned>(value);
        } catch (const std::exception&) {
        }
        throw Error(ErrorCode::ConfigError, "ECDL_WORKERS must be a positive integer");
    }
    return default_workers();
}

std::vector<Index> indices_where(std::span<const char> mask) {
    std::vector<Index> out;
    for (std::size_t j = 0; j < mask.size(); ++j)
        if (mask[j]) out.push_back(static_cast<Index>(j));
    return out;
}

// ---- simulate -----------------------------------------------------------

int cmd_simulate(const CommonOptions& options) {
    const fs::path config_path(options.config_path);
    ConfigReader config(read_json(config_path));
    const auto model = config.get<std::string>("model", "1d");
    json effective;
    SimulatedInstance sim;

    if (model == "1d") {
        Sim1DSpec spec;
        spec.n = config.get<Index>("n", spec.n);
        spec.p = config.get<Index>("p", spec.p);
        spec.rho = config.get<double>("rho", spec.rho);
        spec.support_size = config.get<Index>("support_size", spec.support_size);
        spec.weight = config.get<double>("weight", spec.weight);
        spec.sigma_star = config.get<double>("sigma_star", spec.sigma_star);
        spec.target_snr = config.optional<double>("target_snr");
        spec.seed = options.seed.value_or(config.get<std::uint64_t>("seed", spec.seed));
        config.reject_unknown();
        spec.validate();
        effective = {{"model", "1d"},          {"n", spec.n},
                     {"p", spec.p},            {"rho", spec.rho},
                     {"support_size", spec.support_size},
                     {"weight", spec.weight},  {"sigma_star", spec.sigma_star},
                     {"target_snr", spec.target_snr ? json(*spec.target_snr) : json(nullptr)},
                     {"seed", spec.seed}};
        sim = generate_1d(spec);
    } else if (model == "3d") {
        Sim3DSpec spec;
        spec.edge_length = config.get<Index>("edge_length", spec.edge_length);
        spec.n = config.get<Index>("n", spec.n);
        spec.roi_width = config.get<Index>("roi_width", spec.roi_width);
        spec.sigma_smooth = config.get<double>("sigma_smooth", spec.sigma_smooth);
        spec.sigma_star = config.get<double>("sigma_star", spec.sigma_star);
        spec.target_snr = config.optional<double>("target_snr");
        spec.neutral_margin = config.get<Index>("neutral_margin", spec.neutral_margin);
        spec.normalize_columns = config.get<bool>("normalize_columns", spec.normalize_columns);
        spec.weight = config.get<double>("weight", spec.weight);
        spec.seed = options.seed.value_or(config.get<std::uint64_t>("seed", spec.seed));
        config.reject_unknown();
        spec.validate();
        effective = {{"model", "3d"},
                     {"edge_length", spec.edge_length},
                     {"n", spec.n},
                     {"roi_width", spec.roi_width},
                     {"sigma_smooth", spec.sigma_smooth},
                     {"sigma_star", spec.sigma_star},
                     {"target_snr", spec.target_snr ? json(*spec.target_snr) : json(nullptr)},
                     {"neutral_margin", spec.neutral_margin},
                     {"normalize_columns", spec.normalize_columns},
                     {"weight", spec.weight},
                     {"seed", spec.seed}};
        sim = generate_3d(spec);
    } else {
        throw Error(ErrorCode::ConfigError, "key 'model': expected \"1d\" or \"3d\", got \"" + model + "\"");
    }

    const fs::path out(options.out_dir);
    prepare_out_dir(out);
    write_matrix(out / "X.f64", sim.model.design);
    write_vector(out / "y.f64", sim.model.response);
    write_vector(out / "w_star.f64", sim.truth.w_star);
    write_vector(out / "noise.f64", sim.model.noise);

    const double snr = sim.truth.realized_snr;
    json truth = {{"model", model},
                  {"rows", sim.model.design.rows()},
                  {"cols", sim.model.design.cols()},
                  {"shape", sim.truth.shape},
                  {"layout", "row-major"},
                  {"support", sim.truth.support},
                  {"neutral", indices_where(sim.truth.neutral_mask)},
                  {"sigma_star", sim.truth.sigma_star},
                  {"realized_snr", std::isfinite(snr) ? json(snr) : json(nullptr)},
                  {"seed", effective["seed"]},
                  {"spec", effective}};
    write_json(out / "ground_truth.json", truth);
    write_json(out / "config.json", effective);
    std::cout << "realized SNR_y = " << (std::isfinite(snr) ? std::to_string(snr) : std::string("inf")) << '\n';
    return kOk;
}

// ---- infer --------------------------------------------------------------

int cmd_infer(const CommonOptions& options) {
    const fs::path config_path(options.config_path);
    ConfigReader config(read_json(config_path));
    const auto design_path = config.required<std::string>("design");
    const auto response_path = config.required<std::string>("response");
    const auto method = config.get<std::string>("method", "ecdl");
    auto shape = config.optional<std::vector<Index>>("shape");
    const auto metadata_path = config.optional<std::string>("ground_truth");
    const auto n_clusters = config.get<Index>("n_clusters", 500);
    const auto repetitions = config.get<Index>("repetitions", 25);
    const auto fraction = config.get<double>("subsample_fraction", 0.7);
    const auto alpha = config.get<double>("alpha", 0.05);
    const auto kappa = config.get<double>("kappa", 1.0);
    const auto kappa_nodewise = config.get<double>("kappa_nodewise", 1.0);
    const auto tolerance = config.get<double>("tolerance", 1e-6);
    const auto max_iterations = config.get<int>("max_iterations", 10000);
    const auto seed = options.seed.value_or(config.get<std::uint64_t>("seed", 0));
    const auto config_workers = config.optional<unsigned>("workers");
    config.reject_unknown();

    if (method != "dl" && method != "cdl" && method != "ecdl") {
        throw Error(ErrorCode::ConfigError, "key 'method': expected dl, cdl or ecdl, got \"" + method + "\"");
    }
    require(kappa > 0.0, ErrorCode::ConfigError, "key 'kappa': must be > 0");
    require(kappa_nodewise > 0.0, ErrorCode::ConfigError, "key 'kappa_nodewise': must be > 0");
    require(repetitions >= 1, ErrorCode::ConfigError, "key 'repetitions': must be >= 1");
    if (!shape && metadata_path) {
        const json truth = read_json(resolve_relative(config_path, *metadata_path));
        if (truth.contains("shape")) shape = truth["shape"].get<std::vector<Index>>();
    }
    if (method != "dl" && !shape) {
        throw Error(ErrorCode::ConfigError, "key 'shape': required for method " + method +
                                                " (or point 'ground_truth' at simulation metadata)");
    }
    const unsigned workers = resolve_workers(options, config_workers);

    const Matrix x = load_matrix(resolve_relative(config_path, design_path));
    const Vector y = load_vector(resolve_relative(config_path, response_path));
    if (y.size() != x.rows()) {
        throw Error(ErrorCode::ConfigError, "response length " + std::to_string(y.size()) + " != design rows " +
                                                std::to_string(x.rows()));
    }

    DlConfig dl;
    dl.solver.tolerance = tolerance;
    dl.solver.max_iterations = max_iterations;
    dl.solver.lambda_rule = UniversalLambda{kappa};
    dl.solver.strict = options.strict;
    dl.nodewise_lambda = UniversalLambda{kappa_nodewise};
    dl.alpha = alpha;
    dl.workers = workers;
    try {
        dl.validate();
    } catch (const Error& e) {
        throw Error(ErrorCode::ConfigError, e.what());
    }

    json effective = {{"design", design_path},
                      {"response", response_path},
                      {"method", method},
                      {"shape", shape ? json(*shape) : json(nullptr)},
                      {"n_clusters", n_clusters},
                      {"repetitions", repetitions},
                      {"subsample_fraction", fraction},
                      {"alpha", alpha},
                      {"kappa", kappa},
                      {"kappa_nodewise", kappa_nodewise},
                      {"tolerance", tolerance},
                      {"max_iterations", max_iterations},
                      {"seed", seed},
                      {"workers", workers},
                      {"strict", options.strict}};

    const fs::path out(options.out_dir);
    prepare_out_dir(out);
    json summary = {{"method", method}, {"n", x.rows()}, {"p", x.cols()}, {"workers", workers}};
    const auto start = std::chrono::steady_clock::now();

    if (method == "dl") {
        const DLResult result = desparsified_lasso(x, y, dl);
        write_vector(out / "pvalues.f64", result.p_values);
        write_vector(out / "zscores.f64", result.z_scores);
        write_vector(out / "ci_lower.f64", result.ci_lower);
        write_vector(out / "ci_upper.f64", result.ci_upper);
        write_vector(out / "estimates.f64", result.w_hat);
        summary["sigma_hat"] = result.sigma_hat;
        summary["converged"] = result.all_converged;
    } else {
        Index p_check = 1;
        for (const Index extent : *shape) p_check *= extent;
        if (p_check != x.cols()) {
            throw Error(ErrorCode::ConfigError, "key 'shape': product " + std::to_string(p_check) +
                                                    " != design columns " + std::to_string(x.cols()));
        }
        const ConnectivityGraph graph = grid_connectivity(*shape);
        CdlConfig cdl;
        cdl.n_clusters = n_clusters;
        cdl.subsample_fraction = fraction;
        cdl.dl = dl;
        cdl.seed = seed;
        try {
            cdl.validate(x.cols());
        } catch (const Error& e) {
            throw Error(ErrorCode::ConfigError, std::string("key 'n_clusters' or 'subsample_fraction': ") + e.what());
        }
        if (method == "cdl") {
            const CdlResult result = cdl_infer(x, y, graph, cdl);
            write_vector(out / "pvalues.f64", result.p_values);
            write_vector(out / "zscores.f64", result.z_scores);
            write_vector(out / "ci_lower.f64", result.ci_lower);
            write_vector(out / "ci_upper.f64", result.ci_upper);
            Vector labels(x.cols());
            for (Index j = 0; j < x.cols(); ++j) labels[j] = static_cast<double>(result.labeling.labels[j]);
            write_vector(out / "labels.f64", labels);
            summary["sigma_hat"] = result.cluster_result.sigma_hat;
            summary["converged"] = result.cluster_result.all_converged;
        } else {
            const EcdlResult result = ecdl_infer(x, y, graph, cdl, repetitions, workers);
            write_vector(out / "pvalues.f64", result.aggregated_p);
            write_vector(out / "zscores.f64", result.consensus_z);
            write_matrix(out / "per_repetition_pvalues.f64", result.per_repetition.values);
            write_matrix(out / "per_repetition_signs.f64", result.per_repetition.signs);
            summary["repetitions"] = result.repetitions;
        }
    }

    summary["wall_time_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_json(out / "result.json", summary);
    write_json(out / "config.json", effective);
    return kOk;
}

// ---- evaluate -----------------------------------------------------------

int cmd_evaluate(const CommonOptions& options) {
    const fs::path config_path(options.config_path);
    ConfigReader config(read_json(config_path));
    const auto results = config.required<std::vector<std::string>>("results");
    const auto truth_path = config.required<std::string>("ground_truth");
    const auto threshold = config.get<double>("threshold", 3.0);
    const auto min_precision = config.get<double>("min_precision", 0.9);
    config.reject_unknown();
    require(!results.empty(), ErrorCode::ConfigError, "key 'results': needs at least one result directory");

    const json truth = read_json(resolve_relative(config_path, truth_path));
    Index p = 0;
    std::vector<Index> support, neutral;
    try {
        p = truth.at("cols").get<Index>();
        support = truth.at("support").get<std::vector<Index>>();
        neutral = truth.value("neutral", std::vector<Index>{});
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ConfigError, "ground truth: " + std::string(e.what()));
    }
    std::vector<char> in_support(static_cast<std::size_t>(p), 0), neutral_mask(static_cast<std::size_t>(p), 0);
    for (const Index j : support) in_support.at(j) = 1;
    for (const Index j : neutral) neutral_mask.at(j) = 1;

    std::vector<DetectionReport> reports;
    std::vector<Vector> maps;
    json runs = json::array();
    std::ostringstream pr_csv, det_csv;
    pr_csv << "result,threshold,precision,recall\n";
    det_csv << "result,detected,true_positives,false_positives,neutral_hits,recall_at_precision\n";
    pr_csv.precision(17);
    det_csv.precision(17);

    for (const auto& result : results) {
        const fs::path dir = resolve_relative(config_path, result);
        const Vector z = load_vector(dir / "zscores.f64");
        if (z.size() != p) {
            throw Error(ErrorCode::ConfigError, "result " + result + " has " + std::to_string(z.size()) +
                                                    " features, ground truth has " + std::to_string(p));
        }
        reports.push_back(detect(z, in_support, neutral_mask, threshold));
        const PrCurve curve = precision_recall(z.cwiseAbs(), in_support, neutral_mask);
        const double recall = curve.recall_at_precision(min_precision);
        for (const auto& point : curve.points) {
            pr_csv << result << ',' << point.threshold << ',' << point.precision << ',' << point.recall << '\n';
        }
        const auto& report = reports.back();
        det_csv << result << ',' << report.detected.size() << ',' << report.true_positives << ','
                << report.false_positives << ',' << report.neutral_hits << ',' << recall << '\n';
        runs.push_back({{"result", result},
                        {"detected", report.detected.size()},
                        {"true_positives", report.true_positives},
                        {"false_positives", report.false_positives},
                        {"neutral_hits", report.neutral_hits},
                        {"recall_at_precision", recall}});
        maps.push_back(z);
    }

    const FwerEstimate fwer = fwer_estimate(reports);
    json metrics = {{"threshold", threshold},
                    {"min_precision", min_precision},
                    {"fwer",
                     {{"estimate", fwer.estimate},
                      {"ci_lower", fwer.ci_lower},
                      {"ci_upper", fwer.ci_upper},
                      {"runs", fwer.runs},
                      {"runs_with_false_positive", fwer.runs_with_false_positive}}},
                    {"runs", runs}};
    if (maps.size() >= 2) {
        const StabilityReport stability = stability_suite(maps, threshold);
        auto summary_json = [](const Summary& s) { return json{{"median", s.median}, {"q25", s.q25}, {"q75", s.q75}}; };
        metrics["stability"] = {{"correlation", summary_json(stability.correlation)},
                                {"jaccard", summary_json(stability.jaccard)},
                                {"pairs", stability.jaccards.size()}};
    }

    const fs::path out(options.out_dir);
    prepare_out_dir(out);
    write_json(out / "metrics.json", metrics);
    for (const auto& [name, body] : {std::pair{"precision_recall.csv", pr_csv.str()}, {"detections.csv", det_csv.str()}}) {
        std::ofstream file(out / name, std::ios::trunc);
        if (!(file << body)) throw Error(ErrorCode::IoError, "cannot write " + (out / name).string());
    }
    write_json(out / "config.json", {{"results", results},
                                     {"ground_truth", truth_path},
                                     {"threshold", threshold},
                                     {"min_precision", min_precision}});
    std::cout << "FWER = " << fwer.estimate << " over " << fwer.runs << " run(s)\n";
    return kOk;
}

int exit_code_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::ConfigError:
        case ErrorCode::SpecError:
        case ErrorCode::InvalidArgument:
        case ErrorCode::InvalidClusterCount:
        case ErrorCode::DimensionError:
        case ErrorCode::SubsampleTooSmall:
            return kConfigError;
        case ErrorCode::IoError:
        case ErrorCode::FormatError:
            return kIoError;
        case ErrorCode::NotConverged:
            return kNotConverged;
        default:
            return kFailure;
    }
}

}  // namespace

int run(int argc, const char* const* argv) {
    CLI::App app{"Ensemble of clustered desparsified Lasso: simulate, infer, evaluate"};
    app.require_subcommand(1);

    CommonOptions options;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", options.config_path, "JSON configuration file")->required();
        sub->add_option("--out", options.out_dir, "Output directory")->required();
        sub->add_option("--seed", options.seed, "Override the configured seed");
        sub->add_option("--workers", options.workers, "Worker threads (default: ECDL_WORKERS or all cores)");
        sub->add_flag("--strict", options.strict, "Fail with exit code 4 when a Lasso fit does not converge");
    };
    auto* simulate = app.add_subcommand("simulate", "Generate a synthetic 1-D or 3-D instance");
    auto* infer = app.add_subcommand("infer", "Run dl, cdl or ecdl inference");
    auto* evaluate = app.add_subcommand("evaluate", "Score inference results against ground truth");
    for (auto* sub : {simulate, infer, evaluate}) add_common(sub);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kConfigError;
    }

    try {
        if (simulate->parsed()) return cmd_simulate(options);
        if (infer->parsed()) return cmd_infer(options);
        return cmd_evaluate(options);
    } catch (const Error& e) {
        std::cerr << "ecdl: " << e.what() << '\n';
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        std::cerr << "ecdl: " << e.what() << '\n';
        return kFailure;
    }
}

}  // namespace ecdl::cli
