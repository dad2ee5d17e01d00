#pragma once

#include <vector>

#include "hint/corpus.hpp"
#include "hint/model.hpp"
#include "hint/rng.hpp"

namespace hint {

struct DecodeConfig {
    double top_p = 0.9;
    double temperature = 0.7;
    int max_new_tokens = 96;
    int max_sentences = 10;
    uint64_t seed = 1;

    void validate() const;
};

// logits / tau, in place
void apply_temperature(std::vector<double>& logits, double tau);

// Keep the smallest prefix of tokens, sorted by descending probability with
// ties broken by ascending token id, whose cumulative mass reaches p; zero
// the rest and renormalize.
void nucleus_filter(std::vector<double>& probs, double p);

// Autoregressive sampling: temperature, softmax, nucleus filter, sample.
// After a SEN the next token is forced to DIS; DIS is otherwise unsampleable
// and SEN cannot open a sentence; BOS is never emitted. Stops on EOS,
// max_new_tokens, or max_sentences completed DIS markers. The returned list
// excludes the leading BOS.
std::vector<int> generate(const std::vector<int>& input_tokens, const Model& model,
                          const DecodeConfig& cfg, Rng& rng);

// Remove PAD/BOS/EOS/SEN/DIS, order preserved.
std::vector<int> strip_special(const std::vector<int>& ids);

}  // namespace hint
