#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

#include "fraloc/encoding.hpp"
#include "fraloc/lstm.hpp"

namespace fraloc {

/// Softmax localization head over winding sections.
struct ClassifierHead {
    Eigen::MatrixXd weight;  ///< n_sections x hidden
    Eigen::VectorXd bias;    ///< n_sections

    Eigen::Index n_classes() const { return bias.size(); }
};

struct LabeledItem {
    EncodedSequence sequence;
    int section = 1;        ///< 1-based true section
    double depth_mm = 0.0;  ///< severity tag, not a training target
};

struct LabeledDataset {
    std::vector<LabeledItem> items;
    int n_sections = 4;
    EncodingSpec encoding;
    NormConstants norm;  ///< fitted on training items only

    void validate() const;
};

/// Frozen trained model: gate parameters, head, and the encoding window the
/// checkpoint was trained with.
struct Classifier {
    lstm::Params<double> params;
    ClassifierHead head;
    EncodingSpec encoding;
    NormConstants norm;
};

struct Prediction {
    int section = 1;  ///< argmax class, ties broken toward the lowest index
    Eigen::VectorXd probabilities;
};

/// Numerically stable softmax; output sums to 1 within 1e-12.
Eigen::VectorXd softmax(const Eigen::VectorXd& logits);

/// Runs the sequence through the LSTM and the head. Throws a shape error if
/// the sequence length differs from the classifier's encoding length.
Prediction predict(const Classifier& model, const EncodedSequence& sequence);

struct TrainConfig {
    Eigen::Index hidden_size = 16;
    lstm::AdamConfig adam;
    double loss_threshold = 1e-4;  ///< stop when mean cross-entropy drops below
    long max_epochs = 5000;
    std::uint64_t seed = 42;
};

struct TrainLogEntry {
    long epoch = 0;
    double loss = 0.0;
    double train_accuracy = 0.0;
};

struct TrainResult {
    Classifier model;
    std::vector<TrainLogEntry> log;
    bool converged = false;  ///< false = epoch cap reached (warning, not an error)
    long epochs = 0;
    double final_loss = 0.0;
};

/// Full-batch training: minimizes mean cross-entropy with the adaptive-moment
/// optimizer until loss < config.loss_threshold or the epoch cap. Deterministic
/// under a fixed seed. Throws a training-divergence error (naming the epoch)
/// if the loss turns non-finite.
TrainResult train(const LabeledDataset& dataset, const TrainConfig& config);

// --- checkpoint (versioned flat binary, little-endian f64 tensors) ---

std::vector<std::uint8_t> serialize_checkpoint(const Classifier& model);
Classifier deserialize_checkpoint(const std::vector<std::uint8_t>& bytes);
void save_checkpoint(const Classifier& model, const std::string& path);
Classifier load_checkpoint(const std::string& path);

}  // namespace fraloc
