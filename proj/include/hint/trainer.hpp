#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "hint/augment.hpp"
#include "hint/model.hpp"
#include "hint/objectives.hpp"
#include "hint/teacher.hpp"

namespace hint {

enum class TrainMode { pretrain, finetune, finetune_aux };

const char* train_mode_name(TrainMode m);
TrainMode train_mode_from_name(const std::string& s);

struct TrainConfig {
    double learning_rate = 3e-5;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-6;
    int batch_size = 4;  // human documents per step; negatives come on top
    int max_steps = 100;
    uint64_t seed = 1;
    int negatives_per_human = 1;
    TrainMode mode = TrainMode::pretrain;
    int k_target = 10;  // framing: input sentence + up to this many target sentences
    int log_every = 10;
    ObjectiveConfig objective;

    void validate() const;
};

struct TrainData {
    std::vector<SegmentedDocument> segs;
    std::vector<std::string> ids;
};

// Framing: a document with an explicit input keeps it; an unconditional
// multi-sentence document takes its first sentence as the input and the
// following sentences as the target. Targets are clipped to k_target
// sentences and truncated to fit max_len at a sentence boundary.
TrainData frame_documents(const std::vector<Document>& docs, const Vocab& vocab, int k_target,
                          int max_len);

struct TrainResult {
    std::vector<LossBreakdown> log;  // one entry per step
    long first_step = 0;
};

class Trainer {
public:
    Trainer(Model& model, const TrainConfig& cfg);

    // Runs `steps` additional optimization steps. Emits one JSONL record per
    // log_every steps to loss_log when given. Throws on non-finite loss.
    TrainResult train(const TrainData& data, const SimilarityOracle& teacher, int steps,
                      std::ostream* loss_log = nullptr);

    long step() const { return step_; }
    const TrainConfig& config() const { return cfg_; }
    Model& model() { return *model_; }

    // Checkpoint: <prefix>.bin tensor blob (params + Adam moments) and
    // <prefix>.json manifest. Reload + continue is bit-identical to an
    // uninterrupted run.
    void save(const std::string& prefix) const;
    void restore(const std::string& prefix);

private:
    std::vector<TrainingSample> assemble_batch(const TrainData& data, long step) const;

    Model* model_;
    TrainConfig cfg_;
    Parameters adam_m_, adam_v_;
    long step_ = 0;
    uint64_t rng_state_ = 0;
};

// Reads the model config out of a checkpoint manifest so callers can build
// the Model before calling Trainer::restore.
ModelConfig checkpoint_model_config(const std::string& prefix);
uint64_t checkpoint_seed(const std::string& prefix);

struct GradCheckCoord {
    std::string tensor;
    int row = 0, col = 0;
    double analytic = 0.0, fd = 0.0, rel_err = 0.0;
};

struct GradCheckLossReport {
    std::string loss;
    double max_rel_err = 0.0;
    int coords = 0;
    std::vector<GradCheckCoord> failures;
};

struct GradCheckReport {
    bool pass = true;
    double max_rel_err = 0.0;
    std::vector<GradCheckLossReport> per_loss;
};

// Central differences (step 1e-5) against analytic gradients for each of the
// three losses and their combination, on >= min_coords coordinates spread
// over every parameter tensor. A coordinate passes when
// |a - fd| <= 1e-4 * max(|a|,|fd|) + 1e-8.
GradCheckReport gradient_check(Model& model, const std::vector<TrainingSample>& batch,
                               const SimilarityOracle& teacher, const ObjectiveConfig& cfg,
                               int min_coords, uint64_t seed);

}  // namespace hint
