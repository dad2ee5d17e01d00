#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hint/corpus.hpp"
#include "hint/rng.hpp"
#include "hint/teacher.hpp"

namespace hint {

enum class SampleKind { human, shuffled, repeated, substituted };

const char* sample_kind_name(SampleKind k);
SampleKind sample_kind_from_name(const std::string& s);

struct TrainingSample {
    AugmentedSequence seq;
    std::vector<std::vector<int>> sentences;  // presented order
    std::vector<int> input_tokens;
    SampleKind kind = SampleKind::human;
    std::string source_id;
    // presented position -> original position; identity except for shuffled
    std::vector<int> original_order;
};

TrainingSample make_human(const SegmentedDocument& seg, const std::string& source_id);

// Uniform non-identity permutation of the sentences (identity is redrawn).
TrainingSample make_shuffled(const SegmentedDocument& seg, const std::string& source_id, Rng& rng);

// A uniformly chosen sentence gets a verbatim copy inserted right after it.
TrainingSample make_repeated(const SegmentedDocument& seg, const std::string& source_id, Rng& rng);

// A uniformly chosen sentence is replaced by one drawn from another document.
TrainingSample make_substituted(const SegmentedDocument& seg, const std::string& source_id,
                                const std::vector<SegmentedDocument>& corpus,
                                const std::vector<std::string>& corpus_ids, Rng& rng);

// Kind drawn uniformly from the three; infeasible kinds are redrawn among the rest.
TrainingSample sample_negative(const SegmentedDocument& seg, const std::string& source_id,
                               const std::vector<SegmentedDocument>& corpus,
                               const std::vector<std::string>& corpus_ids, Rng& rng);

// o_ij for presented pairs i<j: 1 if presented sentence i originally preceded j.
std::vector<std::vector<int>> order_labels(const TrainingSample& s);

// Drops trailing sentences until the augmented sequence fits max_len,
// remapping original_order to ranks so it stays a permutation. Repeated
// samples can lose their duplicate this way; the kind is kept (only the
// similarity loss applies to it either way).
TrainingSample truncate_sample(const TrainingSample& s, int max_len);

enum class Aspect { repetition, relatedness, negation, causal, temporal };

const char* aspect_name(Aspect a);
std::optional<Aspect> aspect_from_name(const std::string& s);

enum class Polarity { coherent, incoherent };

struct ProbeExample {
    Aspect aspect = Aspect::repetition;
    Polarity polarity = Polarity::coherent;
    AugmentedSequence seq;
    std::vector<std::vector<int>> sentences;
    std::string source_id;
};

struct Lexicons {
    std::vector<int> negation;              // token ids
    std::vector<int> causal_connectives;
    std::vector<std::pair<int, int>> causal_antonyms;
    std::vector<int> temporal_connectives;
    std::vector<std::pair<int, int>> temporal_antonyms;
    std::vector<int> stopwords;

    bool is_stopword(int id) const;
};

// Built-in defaults: not/never/unable; so/because with reason<->result;
// then/before/after with before<->after; plus a small stopword list.
// Entries missing from the vocabulary are dropped.
Lexicons default_lexicons(const Vocab& vocab);

// Plain-text resource files in dir: negation.txt, causal_connectives.txt,
// causal_antonyms.txt, temporal_connectives.txt, temporal_antonyms.txt,
// stopwords.txt. One entry per line; antonym pairs as "a<TAB>b".
Lexicons load_lexicons(const std::string& dir, const Vocab& vocab);

// Swap the two clauses adjacent to the first usable occurrence of a
// connective: in-sentence "A conn B" becomes "B conn A"; a sentence-initial
// connective exchanges the previous sentence with the remainder. Returns
// false when no occurrence is usable.
bool reverse_around_connective(std::vector<std::vector<int>>& sentences,
                               const std::vector<int>& connectives);

// Replace the first occurrence of either word of any antonym pair with its
// partner. Returns false when no pair word occurs.
bool swap_antonym(std::vector<std::vector<int>>& sentences,
                  const std::vector<std::pair<int, int>>& pairs);

struct ProbeBuildResult {
    std::vector<ProbeExample> probes;
    bool empty_warning = false;  // aspect matched no corpus text
};

struct ProbeConfig {
    double relatedness_threshold = 0.55;  // oracle scale, [0,1]
};

ProbeBuildResult build_probe_set(const std::vector<SegmentedDocument>& corpus,
                                 const std::vector<std::string>& corpus_ids, Aspect aspect,
                                 const SimilarityOracle& oracle, const Lexicons& lex,
                                 const Vocab& vocab, const ProbeConfig& cfg, Rng& rng);

// JSONL with fields "aspect", "polarity", "source_id", "tokens" (space-joined).
void save_probes_jsonl(const std::vector<ProbeExample>& probes, const Vocab& vocab,
                       const std::string& path);
std::vector<ProbeExample> load_probes_jsonl(const std::string& path, const Vocab& vocab);

}  // namespace hint
