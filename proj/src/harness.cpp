#include "fraloc/harness.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <sstream>

#include "fraloc/csv.hpp"
#include "fraloc/encoding.hpp"
#include "fraloc/rng.hpp"

namespace fraloc {

namespace fs = std::filesystem;

void ExperimentPlan::validate() const {
    if (sections.empty()) throw_validation("invalid plan: no sections");
    for (const int s : sections) {
        if (s < 1) throw_validation("invalid plan: section indices are 1-based");
    }
    for (const double d : train_depths_mm) {
        if (!(d >= 0.0)) throw_validation("invalid plan: negative train depth");
    }
    for (const double d : test_depths_mm) {
        if (!(d >= 0.0)) throw_validation("invalid plan: negative test depth");
    }
    for (const double d : test_depths_mm) {
        if (std::find(train_depths_mm.begin(), train_depths_mm.end(), d) !=
            train_depths_mm.end()) {
            std::ostringstream oss;
            oss << "invalid plan: train and test depth sets overlap (depth " << d << " mm)";
            throw_validation(oss.str());
        }
    }
    if (train_depths_mm.empty()) throw_validation("invalid plan: no training depths");
    if (!(noise_amplitude >= 0.0)) throw_validation("invalid plan: negative noise amplitude");
    if (encode_steps < 2) throw_validation("invalid plan: encoding needs at least 2 steps");
}

std::uint64_t fnv1a64(const void* data, std::size_t size) {
    const auto* bytes = static_cast<const std::uint8_t*>(data);
    std::uint64_t hash = 14695981039346656037ULL;
    for (std::size_t i = 0; i < size; ++i) {
        hash ^= bytes[i];
        hash *= 1099511628211ULL;
    }
    return hash;
}

namespace {

std::string hex16(std::uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string join_g17(const Eigen::VectorXd& values) {
    std::string out;
    for (Eigen::Index i = 0; i < values.size(); ++i) {
        if (i) out += ' ';
        out += format_g17(values[i]);
    }
    return out;
}

template <class T>
std::string join(const std::vector<T>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ' ';
        if constexpr (std::is_same_v<T, double>) {
            out += format_g17(values[i]);
        } else {
            out += std::to_string(values[i]);
        }
    }
    return out;
}

}  // namespace

std::string plan_to_config_string(const ExperimentPlan& plan) {
    std::ostringstream oss;
    oss << "plan.sections = " << join(plan.sections) << '\n';
    oss << "plan.train_depths_mm = " << join(plan.train_depths_mm) << '\n';
    oss << "plan.test_depths_mm = " << join(plan.test_depths_mm) << '\n';
    oss << "grid.f_min_hz = " << format_g17(plan.grid_f_min_hz) << '\n';
    oss << "grid.f_max_hz = " << format_g17(plan.grid_f_max_hz) << '\n';
    oss << "grid.n_points = " << plan.grid_points << '\n';
    oss << "encoding.n_steps = " << plan.encode_steps << '\n';
    oss << "train.hidden_size = " << plan.training.hidden_size << '\n';
    oss << "train.learning_rate = " << format_g17(plan.training.adam.learning_rate) << '\n';
    oss << "train.beta1 = " << format_g17(plan.training.adam.beta1) << '\n';
    oss << "train.beta2 = " << format_g17(plan.training.adam.beta2) << '\n';
    oss << "train.epsilon = " << format_g17(plan.training.adam.epsilon) << '\n';
    oss << "train.loss_threshold = " << format_g17(plan.training.loss_threshold) << '\n';
    oss << "train.max_epochs = " << plan.training.max_epochs << '\n';
    oss << "seed = " << plan.seed << '\n';
    oss << "noise.amplitude = " << format_g17(plan.noise_amplitude) << '\n';
    oss << "model.n_sections = " << plan.model.n_sections() << '\n';
    oss << "model.series_inductance_h = " << join_g17(plan.model.series_inductance) << '\n';
    oss << "model.series_resistance_ohm = " << join_g17(plan.model.series_resistance) << '\n';
    oss << "model.series_capacitance_f = " << join_g17(plan.model.series_capacitance) << '\n';
    oss << "model.ground_capacitance_f = " << join_g17(plan.model.ground_capacitance) << '\n';
    oss << "model.measurement_resistance_ohm = " << format_g17(plan.model.measurement_resistance)
        << '\n';
    return oss.str();
}

WindingModel model_from_config(const Config& config) {
    const WindingModel defaults = default_model();
    const auto n = static_cast<Eigen::Index>(
        config.get_int("model.n_sections", defaults.n_sections()));
    if (n < 1) throw_validation("model.n_sections must be at least 1");

    auto per_section = [&](const std::string& key, double fallback) {
        Eigen::VectorXd out(n);
        if (!config.has(key)) {
            out.setConstant(fallback);
            return out;
        }
        const auto values = config.get_doubles(key);
        if (values.size() == 1) {
            out.setConstant(values[0]);
        } else if (static_cast<Eigen::Index>(values.size()) == n) {
            for (Eigen::Index k = 0; k < n; ++k) out[k] = values[static_cast<std::size_t>(k)];
        } else {
            throw_validation("config key '" + key + "' must have 1 or n_sections entries");
        }
        return out;
    };

    WindingModel model;
    model.series_inductance = per_section("model.series_inductance_h", 2e-3);
    model.series_resistance = per_section("model.series_resistance_ohm", 5.0);
    model.series_capacitance = per_section("model.series_capacitance_f", 200e-12);
    model.ground_capacitance = per_section("model.ground_capacitance_f", 1e-9);
    model.measurement_resistance =
        config.get_double("model.measurement_resistance_ohm", defaults.measurement_resistance);
    model.validate();
    return model;
}

FaultSpec fault_from_config(const Config& config) {
    FaultSpec fault;
    fault.section = static_cast<int>(config.get_int("fault.section"));
    fault.depth_mm = config.get_double("fault.depth_mm");
    return fault;
}

FrequencyGrid grid_from_config(const Config& config) {
    return log_spaced_grid(config.get_double("grid.f_min_hz", kDefaultFreqMinHz),
                           config.get_double("grid.f_max_hz", kDefaultFreqMaxHz),
                           config.get_int("grid.n_points", kDefaultGridPoints));
}

ExperimentPlan plan_from_config(const Config& config) {
    ExperimentPlan plan;
    plan.sections = config.get_ints("plan.sections", plan.sections);
    plan.train_depths_mm = config.get_doubles("plan.train_depths_mm", plan.train_depths_mm);
    plan.test_depths_mm = config.get_doubles("plan.test_depths_mm", plan.test_depths_mm);
    plan.model = model_from_config(config);
    plan.grid_f_min_hz = config.get_double("grid.f_min_hz", plan.grid_f_min_hz);
    plan.grid_f_max_hz = config.get_double("grid.f_max_hz", plan.grid_f_max_hz);
    plan.grid_points = config.get_int("grid.n_points", plan.grid_points);
    plan.encode_steps = config.get_int("encoding.n_steps", plan.encode_steps);
    plan.training.hidden_size = config.get_int("train.hidden_size", plan.training.hidden_size);
    plan.training.adam.learning_rate =
        config.get_double("train.learning_rate", plan.training.adam.learning_rate);
    plan.training.adam.beta1 = config.get_double("train.beta1", plan.training.adam.beta1);
    plan.training.adam.beta2 = config.get_double("train.beta2", plan.training.adam.beta2);
    plan.training.adam.epsilon = config.get_double("train.epsilon", plan.training.adam.epsilon);
    plan.training.loss_threshold =
        config.get_double("train.loss_threshold", plan.training.loss_threshold);
    plan.training.max_epochs = config.get_int("train.max_epochs", plan.training.max_epochs);
    plan.seed = config.get_u64("seed", plan.seed);
    plan.noise_amplitude = config.get_double("noise.amplitude", plan.noise_amplitude);
    return plan;
}

namespace {

struct RawItem {
    Eigen::VectorXd log_steps;
    int section;
    double depth_mm;
    bool floored;
};

std::vector<RawItem> simulate_split(const ExperimentPlan& plan, const FrequencyGrid& grid,
                                    const EncodingSpec& spec, const std::vector<double>& depths,
                                    Rng& noise_rng) {
    std::vector<RawItem> items;
    items.reserve(plan.sections.size() * depths.size());
    for (const int section : plan.sections) {
        for (const double depth : depths) {
            const WindingModel faulted = inject_fault(plan.model, {section, depth});
            FrequencyResponse fr = frequency_response(faulted, grid);
            if (plan.noise_amplitude > 0.0) {
                for (Eigen::Index i = 0; i < fr.magnitude.size(); ++i) {
                    fr.magnitude[i] = std::max(
                        0.0, fr.magnitude[i] + plan.noise_amplitude * noise_rng.normal());
                }
            }
            RawItem item;
            item.section = section;
            item.depth_mm = depth;
            item.log_steps = resample_log_curve(fr, spec, &item.floored);
            items.push_back(std::move(item));
        }
    }
    return items;
}

LabeledDataset normalize_split(const std::vector<RawItem>& raw, int n_sections,
                               const EncodingSpec& spec, const NormConstants& norm) {
    LabeledDataset ds;
    ds.n_sections = n_sections;
    ds.encoding = spec;
    ds.norm = norm;
    ds.items.reserve(raw.size());
    for (const auto& item : raw) {
        LabeledItem out;
        out.sequence.steps = (item.log_steps.array() - norm.mean) / norm.std_dev;
        out.sequence.floored = item.floored;
        out.section = item.section;
        out.depth_mm = item.depth_mm;
        ds.items.push_back(std::move(out));
    }
    return ds;
}

}  // namespace

std::pair<LabeledDataset, LabeledDataset> build_dataset(const ExperimentPlan& plan) {
    plan.validate();
    plan.model.validate();
    const FrequencyGrid grid =
        log_spaced_grid(plan.grid_f_min_hz, plan.grid_f_max_hz, plan.grid_points);
    const EncodingSpec spec{plan.encode_steps, plan.grid_f_min_hz, plan.grid_f_max_hz};

    // Noise draws come from a stream derived from the plan seed, decoupled
    // from the parameter-initialization stream.
    Rng noise_rng(plan.seed + 0x9E3779B97F4A7C15ULL);
    const auto raw_train = simulate_split(plan, grid, spec, plan.train_depths_mm, noise_rng);
    const auto raw_test = simulate_split(plan, grid, spec, plan.test_depths_mm, noise_rng);

    std::vector<Eigen::VectorXd> train_encodings;
    train_encodings.reserve(raw_train.size());
    for (const auto& item : raw_train) train_encodings.push_back(item.log_steps);
    const NormConstants norm = fit_norm_constants(train_encodings);

    const int n_sections = static_cast<int>(plan.model.n_sections());
    return {normalize_split(raw_train, n_sections, spec, norm),
            normalize_split(raw_test, n_sections, spec, norm)};
}

namespace {

metrics::Metrics section_index_metrics(const std::vector<ItemEval>& items) {
    metrics::Metrics out;
    if (items.empty()) return out;
    Eigen::VectorXd truth(static_cast<Eigen::Index>(items.size()));
    Eigen::VectorXd predicted(static_cast<Eigen::Index>(items.size()));
    for (std::size_t i = 0; i < items.size(); ++i) {
        truth[static_cast<Eigen::Index>(i)] = items[i].true_section;
        predicted[static_cast<Eigen::Index>(i)] = items[i].predicted_section;
    }
    metrics::PairedSeries<double> series{truth, predicted};
    if (items.size() >= 2) return metrics::evaluate(series);
    out.mse = metrics::mse(series);
    out.rmse = std::sqrt(out.mse);
    return out;
}

}  // namespace

EvaluationSplit evaluate_dataset(const Classifier& model, const LabeledDataset& dataset) {
    EvaluationSplit split;
    if (dataset.items.empty()) return split;
    dataset.validate();
    if (dataset.encoding.n_steps != model.encoding.n_steps)
        throw_validation("evaluate: dataset encoding length differs from the checkpoint");
    if (dataset.norm.mean != model.norm.mean || dataset.norm.std_dev != model.norm.std_dev)
        throw_validation("evaluate: dataset normalization constants differ from the checkpoint");

    std::size_t matches = 0;
    split.items.reserve(dataset.items.size());
    for (const auto& item : dataset.items) {
        const Prediction pred = predict(model, item.sequence);
        if (pred.section == item.section) ++matches;
        split.items.push_back({item.section, pred.section, pred.probabilities, item.depth_mm});
    }
    split.accuracy = static_cast<double>(matches) / static_cast<double>(dataset.items.size());
    split.section_metrics = section_index_metrics(split.items);
    return split;
}

namespace {

void append_split(std::ostringstream& oss, const char* name, const EvaluationSplit& split) {
    oss << '[' << name << "]\n";
    oss << "items=" << split.items.size() << '\n';
    for (std::size_t i = 0; i < split.items.size(); ++i) {
        const ItemEval& item = split.items[i];
        oss << "item=" << i + 1 << " true=" << item.true_section
            << " pred=" << item.predicted_section << " depth_mm=" << format_g17(item.depth_mm)
            << " p=" << join_g17(item.probabilities) << '\n';
    }
    if (!split.items.empty()) {
        oss << "accuracy=" << format_g17(split.accuracy) << '\n';
        oss << metrics::to_kv(split.section_metrics);
    }
}

}  // namespace

std::string report_to_string(const ExperimentReport& report) {
    std::ostringstream oss;
    oss << "plan_hash=" << hex16(report.plan_hash) << '\n';
    oss << "seed=" << report.seed << '\n';
    if (report.training_failed) {
        oss << "training_failed=1\n";
        oss << "failure=" << report.failure << '\n';
        return oss.str();
    }
    oss << "checkpoint_hash=" << hex16(report.checkpoint_hash) << '\n';
    oss << "converged=" << (report.converged ? 1 : 0) << '\n';
    oss << "epochs=" << report.epochs << '\n';
    oss << "final_loss=" << format_g17(report.final_loss) << '\n';
    append_split(oss, "train", report.train);
    append_split(oss, "test", report.test);
    return oss.str();
}

void export_curves(const WindingModel& model, const FrequencyGrid& grid,
                   const std::vector<int>& sections, const std::vector<double>& depths_mm,
                   const std::string& out_dir) {
    fs::create_directories(out_dir);
    const FrequencyResponse healthy = frequency_response(model, grid);
    write_curve_csv(healthy, (fs::path(out_dir) / "healthy.csv").string());
    for (const int section : sections) {
        for (const double depth : depths_mm) {
            const FrequencyResponse fr = frequency_response(inject_fault(model, {section, depth}), grid);
            char name[64];
            std::snprintf(name, sizeof(name), "curve_s%d_d%gmm.csv", section, depth);
            write_curve_csv(fr, (fs::path(out_dir) / name).string());
        }
    }
}

ExperimentReport run_experiment(const ExperimentPlan& plan, const std::string& out_dir) {
    plan.validate();
    fs::create_directories(out_dir);
    const std::string plan_text = plan_to_config_string(plan);
    write_text_file((fs::path(out_dir) / "plan.txt").string(), plan_text);

    ExperimentReport report;
    report.plan_hash = fnv1a64(plan_text.data(), plan_text.size());
    report.seed = plan.seed;

    auto [train_ds, test_ds] = build_dataset(plan);
    save_dataset_dir(train_ds, test_ds, out_dir);

    std::vector<double> all_depths = plan.train_depths_mm;
    all_depths.insert(all_depths.end(), plan.test_depths_mm.begin(), plan.test_depths_mm.end());
    const FrequencyGrid grid =
        log_spaced_grid(plan.grid_f_min_hz, plan.grid_f_max_hz, plan.grid_points);
    export_curves(plan.model, grid, plan.sections, all_depths, out_dir);

    TrainConfig config = plan.training;
    config.seed = plan.seed;
    TrainResult trained;
    try {
        trained = train(train_ds, config);
    } catch (const Error& err) {
        if (err.kind() != ErrorKind::Numerical) throw;
        report.training_failed = true;
        report.failure = err.what();
        write_text_file((fs::path(out_dir) / "report.txt").string(), report_to_string(report));
        return report;
    }

    write_train_log_csv(trained.log, (fs::path(out_dir) / "training_log.csv").string());
    const auto checkpoint_bytes = serialize_checkpoint(trained.model);
    report.checkpoint_hash = fnv1a64(checkpoint_bytes.data(), checkpoint_bytes.size());
    save_checkpoint(trained.model, (fs::path(out_dir) / "checkpoint.bin").string());

    report.converged = trained.converged;
    report.epochs = trained.epochs;
    report.final_loss = trained.final_loss;
    report.train = evaluate_dataset(trained.model, train_ds);
    report.test = evaluate_dataset(trained.model, test_ds);
    write_text_file((fs::path(out_dir) / "report.txt").string(), report_to_string(report));
    return report;
}

LocateResult locate_curve(const Classifier& model, const FrequencyResponse& curve) {
    const EncodedSequence seq = encode_curve(curve, model.encoding, model.norm);
    const Prediction pred = predict(model, seq);
    LocateResult result;
    result.section = pred.section;
    result.probabilities = pred.probabilities;
    result.low_confidence = pred.probabilities.maxCoeff() < 0.5;
    return result;
}

LocateResult locate(const std::string& checkpoint_path, const std::string& curve_csv_path) {
    const Classifier model = load_checkpoint(checkpoint_path);
    const FrequencyResponse curve = read_curve_csv(curve_csv_path);
    return locate_curve(model, curve);
}

// --- dataset directory ---

namespace {

std::string dataset_csv(const LabeledDataset& ds) {
    std::string out = "section,depth_mm";
    for (Eigen::Index i = 0; i < ds.encoding.n_steps; ++i) {
        out += ",x" + std::to_string(i);
    }
    out += '\n';
    for (const auto& item : ds.items) {
        out += std::to_string(item.section);
        out += ',';
        out += format_g17(item.depth_mm);
        for (Eigen::Index i = 0; i < item.sequence.steps.size(); ++i) {
            out += ',';
            out += format_g17(item.sequence.steps[i]);
        }
        out += '\n';
    }
    return out;
}

std::vector<LabeledItem> parse_dataset_csv(const std::string& text, const std::string& name,
                                           Eigen::Index n_steps) {
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    std::vector<LabeledItem> items;
    if (!std::getline(in, line)) throw_validation(name + ":1: empty dataset file");
    ++line_no;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::size_t start = 0;
        while (true) {
            const auto comma = line.find(',', start);
            if (comma == std::string::npos) {
                fields.push_back(line.substr(start));
                break;
            }
            fields.push_back(line.substr(start, comma - start));
            start = comma + 1;
        }
        if (static_cast<Eigen::Index>(fields.size()) != n_steps + 2) {
            std::ostringstream oss;
            oss << name << ":" << line_no << ": expected " << n_steps + 2 << " fields, got "
                << fields.size();
            throw_validation(oss.str());
        }
        LabeledItem item;
        char* end = nullptr;
        item.section = static_cast<int>(std::strtol(fields[0].c_str(), &end, 10));
        if (end == fields[0].c_str() || *end != '\0') {
            std::ostringstream oss;
            oss << name << ":" << line_no << ": bad section field '" << fields[0] << "'";
            throw_validation(oss.str());
        }
        item.depth_mm = std::strtod(fields[1].c_str(), nullptr);
        item.sequence.steps.resize(n_steps);
        for (Eigen::Index i = 0; i < n_steps; ++i) {
            const std::string& f = fields[static_cast<std::size_t>(i) + 2];
            end = nullptr;
            item.sequence.steps[i] = std::strtod(f.c_str(), &end);
            if (end == f.c_str() || *end != '\0') {
                std::ostringstream oss;
                oss << name << ":" << line_no << ": bad value '" << f << "'";
                throw_validation(oss.str());
            }
        }
        items.push_back(std::move(item));
    }
    return items;
}

}  // namespace

void save_dataset_dir(const LabeledDataset& train, const LabeledDataset& test,
                      const std::string& dir) {
    fs::create_directories(dir);
    std::ostringstream meta;
    meta << "dataset.n_sections = " << train.n_sections << '\n';
    meta << "dataset.n_steps = " << train.encoding.n_steps << '\n';
    meta << "dataset.f_min_hz = " << format_g17(train.encoding.f_min_hz) << '\n';
    meta << "dataset.f_max_hz = " << format_g17(train.encoding.f_max_hz) << '\n';
    meta << "dataset.norm_mean = " << format_g17(train.norm.mean) << '\n';
    meta << "dataset.norm_std = " << format_g17(train.norm.std_dev) << '\n';
    write_text_file((fs::path(dir) / "dataset.txt").string(), meta.str());
    write_text_file((fs::path(dir) / "train.csv").string(), dataset_csv(train));
    write_text_file((fs::path(dir) / "test.csv").string(), dataset_csv(test));
}

std::pair<LabeledDataset, LabeledDataset> load_dataset_dir(const std::string& dir) {
    const Config meta = Config::parse_file((fs::path(dir) / "dataset.txt").string());
    LabeledDataset train;
    train.n_sections = static_cast<int>(meta.get_int("dataset.n_sections"));
    train.encoding.n_steps = meta.get_int("dataset.n_steps");
    train.encoding.f_min_hz = meta.get_double("dataset.f_min_hz");
    train.encoding.f_max_hz = meta.get_double("dataset.f_max_hz");
    train.norm.mean = meta.get_double("dataset.norm_mean");
    train.norm.std_dev = meta.get_double("dataset.norm_std");
    LabeledDataset test = train;
    const std::string train_path = (fs::path(dir) / "train.csv").string();
    const std::string test_path = (fs::path(dir) / "test.csv").string();
    train.items = parse_dataset_csv(read_text_file(train_path), train_path, train.encoding.n_steps);
    test.items = parse_dataset_csv(read_text_file(test_path), test_path, test.encoding.n_steps);
    return {std::move(train), std::move(test)};
}

}  // namespace fraloc
