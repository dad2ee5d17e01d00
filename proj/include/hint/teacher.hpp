#pragma once

#include <memory>
#include <string>
#include <vector>

#include "hint/corpus.hpp"

namespace hint {

// Unit-norm sentence embedding from whatever teacher backs the oracle.
using SentenceEmbedding = std::vector<double>;

class SimilarityOracle {
public:
    virtual ~SimilarityOracle() = default;
    virtual SentenceEmbedding embed(const std::vector<int>& sentence) const = 0;
    virtual std::string name() const = 0;
};

// Built-in deterministic teacher: every vocabulary id hashes to a fixed
// pseudo-random unit vector, a sentence embeds as the renormalized mean of
// its token vectors (bag of words). Stands in for an external sentence
// encoder at desk scale.
class HashedOracle : public SimilarityOracle {
public:
    explicit HashedOracle(uint64_t seed, int dim = 64) : seed_(seed), dim_(dim) {}
    SentenceEmbedding embed(const std::vector<int>& sentence) const override;
    std::string name() const override { return "hashed"; }
    int dim() const { return dim_; }

private:
    SentenceEmbedding token_vector(int id) const;
    uint64_t seed_;
    int dim_;
};

// Sidecar file of precomputed embeddings: lines "key<TAB>floats...", where
// key is the lowercase space-joined sentence. Unknown sentences are an error.
class ExternalFileOracle : public SimilarityOracle {
public:
    ExternalFileOracle(const std::string& path, const Vocab& vocab);
    SentenceEmbedding embed(const std::vector<int>& sentence) const override;
    std::string name() const override { return "external:" + path_; }

private:
    std::string path_;
    const Vocab* vocab_;
    int dim_ = 0;
    std::unordered_map<std::string, SentenceEmbedding> table_;
};

// (cos + 1) / 2, clamped to [0,1]; computed once so it is exactly symmetric.
double golden_similarity(const std::vector<int>& a, const std::vector<int>& b,
                         const SimilarityOracle& oracle);

double cosine(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace hint
