#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "fraloc/classifier.hpp"
#include "fraloc/config.hpp"
#include "fraloc/metrics.hpp"
#include "fraloc/winding.hpp"

namespace fraloc {

/// Fault-catalog experiment: simulate every (section, depth) curve, train on
/// the train depths, hold out the test depths.
struct ExperimentPlan {
    std::vector<int> sections = {1, 2, 3, 4};
    std::vector<double> train_depths_mm = {9.0, 12.0};
    std::vector<double> test_depths_mm = {6.0};
    WindingModel model = default_model();
    double grid_f_min_hz = kDefaultFreqMinHz;
    double grid_f_max_hz = kDefaultFreqMaxHz;
    Eigen::Index grid_points = kDefaultGridPoints;
    Eigen::Index encode_steps = 200;
    TrainConfig training;             ///< .seed is overridden by plan seed
    std::uint64_t seed = 42;
    double noise_amplitude = 0.0;     ///< additive Gaussian sigma on magnitudes, siemens

    /// Throws invalid-plan errors: empty sections, negative depths,
    /// overlapping train/test depth sets.
    void validate() const;
};

struct ItemEval {
    int true_section = 0;
    int predicted_section = 0;
    Eigen::VectorXd probabilities;
    double depth_mm = 0.0;
};

/// Evaluation of one dataset split against a trained classifier.
struct EvaluationSplit {
    std::vector<ItemEval> items;
    double accuracy = 1.0;  ///< fraction of exact matches (vacuously 1 when empty)
    metrics::Metrics section_metrics;  ///< R/MSE/RMSE over (true, predicted) indices
};

/// Full run-experiment outcome with provenance. A training divergence does
/// not throw out of run_experiment; it surfaces here as training_failed with
/// the diverging epoch in the failure message.
struct ExperimentReport {
    EvaluationSplit train;
    EvaluationSplit test;
    std::uint64_t plan_hash = 0;
    std::uint64_t checkpoint_hash = 0;
    std::uint64_t seed = 0;
    bool converged = false;
    long epochs = 0;
    double final_loss = 0.0;
    bool training_failed = false;
    std::string failure;
};

struct LocateResult {
    int section = 0;
    Eigen::VectorXd probabilities;
    bool low_confidence = false;  ///< max probability < 0.5
};

/// FNV-1a 64-bit over a byte string; provenance hash for plans/checkpoints.
std::uint64_t fnv1a64(const void* data, std::size_t size);

/// Canonical flat key-value rendering of a plan. Its fnv1a64 is the plan hash.
std::string plan_to_config_string(const ExperimentPlan& plan);

/// Reads the plan keys (plan.*, grid.*, encoding.*, train.*, noise.*, seed,
/// model.*) from a config, filling unspecified fields with defaults.
ExperimentPlan plan_from_config(const Config& config);

/// Reads model.* keys; scalar entries broadcast across n_sections.
WindingModel model_from_config(const Config& config);
FaultSpec fault_from_config(const Config& config);
FrequencyGrid grid_from_config(const Config& config);

/// Simulates, encodes, and labels the plan's fault catalog. Normalization
/// constants come from the training split only. Optional seeded Gaussian
/// noise is applied to curve magnitudes before encoding.
std::pair<LabeledDataset, LabeledDataset> build_dataset(const ExperimentPlan& plan);

/// Per-item predictions, accuracy, and Eqs-style metrics over section indices.
EvaluationSplit evaluate_dataset(const Classifier& model, const LabeledDataset& dataset);

/// End-to-end protocol: build datasets, train, evaluate train and held-out
/// test splits, and write every artifact (curves, dataset, training log,
/// checkpoint, report) under out_dir.
ExperimentReport run_experiment(const ExperimentPlan& plan, const std::string& out_dir);

/// Encodes a curve file with a checkpoint's frozen constants and predicts.
LocateResult locate(const std::string& checkpoint_path, const std::string& curve_csv_path);
LocateResult locate_curve(const Classifier& model, const FrequencyResponse& curve);

/// Deterministic text rendering of the report (written as report.txt).
std::string report_to_string(const ExperimentReport& report);

// Dataset directory layout: dataset.txt (meta) + train.csv + test.csv.
void save_dataset_dir(const LabeledDataset& train, const LabeledDataset& test,
                      const std::string& dir);
std::pair<LabeledDataset, LabeledDataset> load_dataset_dir(const std::string& dir);

/// Healthy curve plus the full {6, 9, 12} mm catalog, written as CSVs.
void export_curves(const WindingModel& model, const FrequencyGrid& grid,
                   const std::vector<int>& sections, const std::vector<double>& depths_mm,
                   const std::string& out_dir);

}  // namespace fraloc
