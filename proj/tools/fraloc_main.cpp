#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "fraloc/csv.hpp"
#include "fraloc/harness.hpp"

namespace fs = std::filesystem;

namespace {

struct CommonOpts {
    std::string config_path;
    std::string out_dir = "out";
    std::optional<std::uint64_t> seed;
    std::optional<double> noise;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool with_noise = true) {
    cmd->add_option("--config", opts.config_path, "flat key=value config file");
    cmd->add_option("--out", opts.out_dir, "output directory")->capture_default_str();
    cmd->add_option("--seed", opts.seed, "seed override");
    if (with_noise) cmd->add_option("--noise", opts.noise, "noise amplitude override (siemens)");
}

fraloc::Config load_config(const CommonOpts& opts) {
    if (opts.config_path.empty()) return fraloc::Config::parse_string("", "<defaults>");
    return fraloc::Config::parse_file(opts.config_path);
}

fraloc::ExperimentPlan load_plan(const CommonOpts& opts) {
    fraloc::ExperimentPlan plan = fraloc::plan_from_config(load_config(opts));
    if (opts.seed) plan.seed = *opts.seed;
    if (opts.noise) plan.noise_amplitude = *opts.noise;
    return plan;
}

void print_split(const char* name, const fraloc::EvaluationSplit& split) {
    if (split.items.empty()) {
        std::printf("%s: no items\n", name);
        return;
    }
    std::printf("%s: accuracy %g (%zu items)\n", name, split.accuracy, split.items.size());
    std::printf("%s metrics: %s", name,
                fraloc::metrics::to_kv(split.section_metrics).c_str());
}

int cmd_simulate(const CommonOpts& opts) {
    const fraloc::Config config = load_config(opts);
    fraloc::WindingModel model = fraloc::model_from_config(config);
    const fraloc::FrequencyGrid grid = fraloc::grid_from_config(config);
    std::string name = "healthy.csv";
    if (config.has("fault.section")) {
        const fraloc::FaultSpec fault = fraloc::fault_from_config(config);
        model = fraloc::inject_fault(model, fault);
        char buf[64];
        std::snprintf(buf, sizeof(buf), "curve_s%d_d%gmm.csv", fault.section, fault.depth_mm);
        name = buf;
    }
    const fraloc::FrequencyResponse fr = fraloc::frequency_response(model, grid);
    fs::create_directories(opts.out_dir);
    const std::string path = (fs::path(opts.out_dir) / name).string();
    fraloc::write_curve_csv(fr, path);
    std::printf("wrote %s (%lld points)\n", path.c_str(), static_cast<long long>(grid.size()));
    return 0;
}

int cmd_build_dataset(const CommonOpts& opts) {
    const fraloc::ExperimentPlan plan = load_plan(opts);
    const auto [train, test] = fraloc::build_dataset(plan);
    fraloc::save_dataset_dir(train, test, opts.out_dir);
    std::printf("wrote dataset to %s (train %zu, test %zu items)\n", opts.out_dir.c_str(),
                train.items.size(), test.items.size());
    return 0;
}

int cmd_train(const CommonOpts& opts, const std::string& dataset_dir) {
    const auto [train_ds, test_ds] = fraloc::load_dataset_dir(dataset_dir);
    const fraloc::Config config = load_config(opts);
    fraloc::ExperimentPlan defaults = fraloc::plan_from_config(config);
    fraloc::TrainConfig tc = defaults.training;
    tc.seed = opts.seed.value_or(defaults.seed);

    const fraloc::TrainResult result = fraloc::train(train_ds, tc);
    fs::create_directories(opts.out_dir);
    fraloc::save_checkpoint(result.model, (fs::path(opts.out_dir) / "checkpoint.bin").string());
    fraloc::write_train_log_csv(result.log,
                                (fs::path(opts.out_dir) / "training_log.csv").string());
    std::printf("trained %ld epochs, final loss %g%s\n", result.epochs, result.final_loss,
                result.converged ? "" : " (warning: epoch cap reached without convergence)");
    std::printf("wrote %s/checkpoint.bin and %s/training_log.csv\n", opts.out_dir.c_str(),
                opts.out_dir.c_str());
    return 0;
}

int cmd_evaluate(const CommonOpts& opts, const std::string& checkpoint_path,
                 const std::string& dataset_dir) {
    const fraloc::Classifier model = fraloc::load_checkpoint(checkpoint_path);
    const auto [train_ds, test_ds] = fraloc::load_dataset_dir(dataset_dir);
    print_split("train", fraloc::evaluate_dataset(model, train_ds));
    print_split("test", fraloc::evaluate_dataset(model, test_ds));
    return 0;
}

int cmd_run_experiment(const CommonOpts& opts) {
    const fraloc::ExperimentPlan plan = load_plan(opts);
    const fraloc::ExperimentReport report = fraloc::run_experiment(plan, opts.out_dir);
    if (report.training_failed) {
        std::fprintf(stderr, "experiment failed: %s\n", report.failure.c_str());
        std::fprintf(stderr, "failure report written to %s/report.txt\n", opts.out_dir.c_str());
        return 2;
    }
    std::printf("converged=%d epochs=%ld final_loss=%g\n", report.converged ? 1 : 0,
                report.epochs, report.final_loss);
    print_split("train", report.train);
    print_split("test", report.test);
    std::printf("artifacts in %s (report.txt, checkpoint.bin, curves, dataset)\n",
                opts.out_dir.c_str());
    return 0;
}

int cmd_locate(const std::string& checkpoint_path, const std::string& curve_path) {
    const fraloc::LocateResult result = fraloc::locate(checkpoint_path, curve_path);
    std::printf("section=%d\n", result.section);
    std::string probs;
    for (Eigen::Index i = 0; i < result.probabilities.size(); ++i) {
        if (i) probs += ' ';
        probs += fraloc::format_g17(result.probabilities[i]);
    }
    std::printf("probabilities=%s\n", probs.c_str());
    std::printf("low_confidence=%d\n", result.low_confidence ? 1 : 0);
    return 0;
}

int cmd_export_curves(const CommonOpts& opts) {
    const fraloc::ExperimentPlan plan = load_plan(opts);
    std::vector<double> depths = plan.train_depths_mm;
    depths.insert(depths.end(), plan.test_depths_mm.begin(), plan.test_depths_mm.end());
    const fraloc::FrequencyGrid grid =
        fraloc::log_spaced_grid(plan.grid_f_min_hz, plan.grid_f_max_hz, plan.grid_points);
    fraloc::export_curves(plan.model, grid, plan.sections, depths, opts.out_dir);
    std::printf("wrote healthy + %zu catalog curves to %s\n",
                plan.sections.size() * depths.size(), opts.out_dir.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"RD fault localization in a sectioned winding: ladder-network FRA simulation "
                 "+ LSTM section classifier"};
    app.require_subcommand(1);

    CommonOpts opts;
    std::string dataset_dir, checkpoint_path, curve_path;

    auto* simulate = app.add_subcommand("simulate", "model + fault -> curve CSV");
    add_common(simulate, opts, false);

    auto* build = app.add_subcommand("build-dataset", "plan -> dataset directory");
    add_common(build, opts);

    auto* train = app.add_subcommand("train", "dataset -> checkpoint + training log");
    add_common(train, opts, false);
    train->add_option("--dataset", dataset_dir, "dataset directory")->required();

    auto* evaluate = app.add_subcommand("evaluate", "checkpoint + dataset -> report");
    add_common(evaluate, opts, false);
    evaluate->add_option("--checkpoint", checkpoint_path, "checkpoint file")->required();
    evaluate->add_option("--dataset", dataset_dir, "dataset directory")->required();

    auto* runexp = app.add_subcommand("run-experiment", "plan -> full protocol artifacts");
    add_common(runexp, opts);

    auto* locate = app.add_subcommand("locate", "checkpoint + curve -> predicted section");
    locate->add_option("--checkpoint", checkpoint_path, "checkpoint file")->required();
    locate->add_option("--curve", curve_path, "curve CSV file")->required();

    auto* exportc = app.add_subcommand("export-curves", "healthy + fault catalog curves");
    add_common(exportc, opts, false);

    try {
        app.parse(argc, argv);
        if (simulate->parsed()) return cmd_simulate(opts);
        if (build->parsed()) return cmd_build_dataset(opts);
        if (train->parsed()) return cmd_train(opts, dataset_dir);
        if (evaluate->parsed()) return cmd_evaluate(opts, checkpoint_path, dataset_dir);
        if (runexp->parsed()) return cmd_run_experiment(opts);
        if (locate->parsed()) return cmd_locate(checkpoint_path, curve_path);
        if (exportc->parsed()) return cmd_export_curves(opts);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const fraloc::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return e.kind() == fraloc::ErrorKind::Validation ? 1 : 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
