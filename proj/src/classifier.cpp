#include "fraloc/classifier.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace fraloc {

void LabeledDataset::validate() const {
    if (n_sections < 1) throw_validation("dataset: n_sections must be positive");
    if (items.empty()) throw_validation("dataset: no items");
    for (const auto& item : items) {
        if (item.sequence.steps.size() != encoding.n_steps)
            throw_validation("dataset: sequence length differs from encoding n_steps");
        if (item.section < 1 || item.section > n_sections) {
            std::ostringstream oss;
            oss << "dataset: label " << item.section << " outside [1, " << n_sections << "]";
            throw_validation(oss.str());
        }
        if (!item.sequence.steps.allFinite())
            throw_validation("dataset: non-finite encoded value");
    }
}

Eigen::VectorXd softmax(const Eigen::VectorXd& logits) {
    const double z_max = logits.maxCoeff();
    Eigen::VectorXd p = (logits.array() - z_max).exp();
    p /= p.sum();
    return p;
}

namespace {

int argmax_lowest(const Eigen::VectorXd& v) {
    int best = 0;
    for (int i = 1; i < v.size(); ++i) {
        if (v[i] > v[best]) best = i;
    }
    return best;
}

std::vector<lstm::Vector<double>> to_input_sequence(const EncodedSequence& seq) {
    std::vector<lstm::Vector<double>> xs(seq.steps.size());
    for (Eigen::Index t = 0; t < seq.steps.size(); ++t) {
        xs[t] = lstm::Vector<double>::Constant(1, seq.steps[t]);
    }
    return xs;
}

}  // namespace

Prediction predict(const Classifier& model, const EncodedSequence& sequence) {
    if (sequence.steps.size() != model.encoding.n_steps)
        throw_validation("predict shape error: sequence length does not match the checkpoint");
    auto [state, tape] = lstm::sequence_forward(model.params, to_input_sequence(sequence));
    const Eigen::VectorXd logits = model.head.weight * state.h + model.head.bias;
    Prediction pred;
    pred.probabilities = softmax(logits);
    pred.section = argmax_lowest(pred.probabilities) + 1;
    return pred;
}

TrainResult train(const LabeledDataset& dataset, const TrainConfig& config) {
    dataset.validate();
    if (config.hidden_size < 1) throw_validation("train: hidden_size must be positive");
    if (!(config.adam.learning_rate > 0.0)) throw_validation("train: learning rate must be positive");

    const Eigen::Index hidden = config.hidden_size;
    const int n_classes = dataset.n_sections;
    const auto n_items = static_cast<Eigen::Index>(dataset.items.size());

    Rng rng(config.seed);
    lstm::Params<double> params = lstm::init_params<double>(1, hidden, rng);
    ClassifierHead head;
    head.weight.resize(n_classes, hidden);
    const double head_bound = 4.0 / std::sqrt(static_cast<double>(hidden));
    for (Eigen::Index r = 0; r < head.weight.rows(); ++r)
        for (Eigen::Index c = 0; c < head.weight.cols(); ++c)
            head.weight(r, c) = rng.uniform(-head_bound, head_bound);
    head.bias = Eigen::VectorXd::Zero(n_classes);

    auto opt = lstm::AdamState<double>::zeros_like(params);
    Eigen::MatrixXd m_hw = Eigen::MatrixXd::Zero(n_classes, hidden);
    Eigen::MatrixXd v_hw = Eigen::MatrixXd::Zero(n_classes, hidden);
    Eigen::MatrixXd vm_hw = Eigen::MatrixXd::Zero(n_classes, hidden);
    Eigen::VectorXd m_hb = Eigen::VectorXd::Zero(n_classes);
    Eigen::VectorXd v_hb = Eigen::VectorXd::Zero(n_classes);
    Eigen::VectorXd vm_hb = Eigen::VectorXd::Zero(n_classes);

    std::vector<std::vector<lstm::Vector<double>>> inputs;
    inputs.reserve(dataset.items.size());
    for (const auto& item : dataset.items) inputs.push_back(to_input_sequence(item.sequence));

    TrainResult result;
    result.log.reserve(static_cast<std::size_t>(config.max_epochs));

    for (long epoch = 1; epoch <= config.max_epochs; ++epoch) {
        lstm::Params<double> grads = lstm::Params<double>::zeros(1, hidden);
        Eigen::MatrixXd g_hw = Eigen::MatrixXd::Zero(n_classes, hidden);
        Eigen::VectorXd g_hb = Eigen::VectorXd::Zero(n_classes);
        double loss_sum = 0.0;
        Eigen::Index correct = 0;

        for (Eigen::Index idx = 0; idx < n_items; ++idx) {
            const LabeledItem& item = dataset.items[static_cast<std::size_t>(idx)];
            auto [state, tape] = lstm::sequence_forward(params, inputs[static_cast<std::size_t>(idx)]);
            const Eigen::VectorXd logits = head.weight * state.h + head.bias;
            const int label = item.section - 1;

            const double z_max = logits.maxCoeff();
            const double lse = z_max + std::log((logits.array() - z_max).exp().sum());
            loss_sum += lse - logits[label];
            if (argmax_lowest(logits) == label) ++correct;

            Eigen::VectorXd dlogits = (logits.array() - lse).exp();
            dlogits[label] -= 1.0;
            dlogits /= static_cast<double>(n_items);

            g_hw.noalias() += dlogits * state.h.transpose();
            g_hb += dlogits;
            const lstm::Vector<double> grad_h = head.weight.transpose() * dlogits;
            const auto item_grads = lstm::sequence_backward(params, tape, grad_h);
            grads.w_f += item_grads.w_f;
            grads.b_f += item_grads.b_f;
            grads.w_i += item_grads.w_i;
            grads.b_i += item_grads.b_i;
            grads.w_g += item_grads.w_g;
            grads.b_g += item_grads.b_g;
            grads.w_o += item_grads.w_o;
            grads.b_o += item_grads.b_o;
        }

        const double loss = loss_sum / static_cast<double>(n_items);
        if (!std::isfinite(loss)) {
            std::ostringstream oss;
            oss << "training divergence: non-finite loss at epoch " << epoch;
            throw_numerical(oss.str());
        }
        const double accuracy = static_cast<double>(correct) / static_cast<double>(n_items);
        result.log.push_back({epoch, loss, accuracy});
        result.epochs = epoch;
        result.final_loss = loss;
        if (loss < config.loss_threshold) {
            result.converged = true;
            break;
        }

        lstm::adam_step(params, grads, opt, config.adam);
        lstm::adam_update(head.weight, g_hw, m_hw, v_hw, vm_hw, opt.step, config.adam);
        lstm::adam_update(head.bias, g_hb, m_hb, v_hb, vm_hb, opt.step, config.adam);
    }

    result.model = Classifier{std::move(params), std::move(head), dataset.encoding, dataset.norm};
    return result;
}

// --- checkpoint serialization ---

namespace {

constexpr char kMagic[8] = {'F', 'R', 'A', 'L', 'O', 'C', 'N', 'N'};
constexpr std::uint32_t kVersion = 1;

void append_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void append_f64(std::vector<std::uint8_t>& out, double d) {
    const auto bits = std::bit_cast<std::uint64_t>(d);
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
}

// Row-major element order regardless of Eigen's storage order.
template <class Derived>
void append_tensor(std::vector<std::uint8_t>& out, const Eigen::MatrixBase<Derived>& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) append_f64(out, m(r, c));
}

class Reader {
public:
    Reader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
        pos_ += 4;
        return v;
    }

    double f64() {
        need(8);
        std::uint64_t bits = 0;
        for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(bytes_[pos_ + i]) << (8 * i);
        pos_ += 8;
        return std::bit_cast<double>(bits);
    }

    template <class Derived>
    void tensor(Eigen::MatrixBase<Derived>& m) {
        for (Eigen::Index r = 0; r < m.rows(); ++r)
            for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = f64();
    }

    void raw(void* dst, std::size_t n) {
        need(n);
        std::memcpy(dst, bytes_.data() + pos_, n);
        pos_ += n;
    }

    bool exhausted() const { return pos_ == bytes_.size(); }

private:
    void need(std::size_t n) const {
        if (pos_ + n > bytes_.size()) throw_validation("checkpoint: truncated file");
    }

    const std::vector<std::uint8_t>& bytes_;
    std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> serialize_checkpoint(const Classifier& model) {
    std::vector<std::uint8_t> out;
    out.insert(out.end(), kMagic, kMagic + sizeof(kMagic));
    append_u32(out, kVersion);
    append_u32(out, static_cast<std::uint32_t>(model.params.input_size()));
    append_u32(out, static_cast<std::uint32_t>(model.params.hidden_size()));
    append_u32(out, static_cast<std::uint32_t>(model.head.n_classes()));
    append_u32(out, static_cast<std::uint32_t>(model.encoding.n_steps));
    append_f64(out, model.encoding.f_min_hz);
    append_f64(out, model.encoding.f_max_hz);
    append_f64(out, model.norm.mean);
    append_f64(out, model.norm.std_dev);
    lstm::visit_tensors(model.params, [&](const auto& t) { append_tensor(out, t); });
    append_tensor(out, model.head.weight);
    append_tensor(out, model.head.bias);
    return out;
}

Classifier deserialize_checkpoint(const std::vector<std::uint8_t>& bytes) {
    Reader reader(bytes);
    char magic[8];
    reader.raw(magic, sizeof(magic));
    if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw_validation("checkpoint: bad magic (not a checkpoint file)");
    const std::uint32_t version = reader.u32();
    if (version != kVersion) {
        std::ostringstream oss;
        oss << "checkpoint: unsupported format version " << version;
        throw_validation(oss.str());
    }
    const auto input = static_cast<Eigen::Index>(reader.u32());
    const auto hidden = static_cast<Eigen::Index>(reader.u32());
    const auto classes = static_cast<Eigen::Index>(reader.u32());
    const auto n_steps = static_cast<Eigen::Index>(reader.u32());
    if (input < 1 || hidden < 1 || classes < 1 || n_steps < 2)
        throw_validation("checkpoint: invalid dimensions");

    Classifier model;
    model.encoding.n_steps = n_steps;
    model.encoding.f_min_hz = reader.f64();
    model.encoding.f_max_hz = reader.f64();
    model.norm.mean = reader.f64();
    model.norm.std_dev = reader.f64();
    model.params = lstm::Params<double>::zeros(input, hidden);
    lstm::visit_tensors(model.params, [&](auto& t) { reader.tensor(t); });
    model.head.weight.resize(classes, hidden);
    model.head.bias.resize(classes);
    reader.tensor(model.head.weight);
    reader.tensor(model.head.bias);
    if (!reader.exhausted()) throw_validation("checkpoint: trailing bytes");
    return model;
}

void save_checkpoint(const Classifier& model, const std::string& path) {
    const auto bytes = serialize_checkpoint(model);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw_validation("cannot open checkpoint for writing: " + path);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw_validation("failed writing checkpoint: " + path);
}

Classifier load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw_validation("cannot open checkpoint: " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return deserialize_checkpoint(bytes);
}

}  // namespace fraloc
