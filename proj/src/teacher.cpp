#include "hint/teacher.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "hint/rng.hpp"

namespace hint {

namespace {

double norm(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

void normalize(std::vector<double>& v) {
    const double n = norm(v);
    if (n <= 0.0) throw std::runtime_error("zero-norm embedding");
    for (double& x : v) x /= n;
}

}  // namespace

SentenceEmbedding HashedOracle::token_vector(int id) const {
    Rng rng(derive_seed(seed_, "teacher-token", static_cast<uint64_t>(id)));
    SentenceEmbedding v(static_cast<size_t>(dim_));
    for (double& x : v) x = rng.gaussian();
    normalize(v);
    return v;
}

SentenceEmbedding HashedOracle::embed(const std::vector<int>& sentence) const {
    if (sentence.empty()) throw std::runtime_error("empty sentence");
    // accumulate in sorted id order so permutations give bit-identical sums
    std::vector<int> ids = sentence;
    std::sort(ids.begin(), ids.end());
    SentenceEmbedding acc(static_cast<size_t>(dim_), 0.0);
    for (int id : ids) {
        SentenceEmbedding t = token_vector(id);
        for (int j = 0; j < dim_; ++j) acc[j] += t[j];
    }
    for (double& x : acc) x /= static_cast<double>(ids.size());
    if (norm(acc) < 1e-12) return token_vector(sentence[0]);  // degenerate mean
    normalize(acc);
    return acc;
}

ExternalFileOracle::ExternalFileOracle(const std::string& path, const Vocab& vocab)
    : path_(path), vocab_(&vocab) {
    std::ifstream in(path);
    if (!in.is_open()) throw std::runtime_error("cannot open oracle file: " + path);
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const size_t tab = line.find('\t');
        if (tab == std::string::npos)
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": missing TAB");
        std::string key = line.substr(0, tab);
        std::istringstream rest(line.substr(tab + 1));
        SentenceEmbedding v;
        double x;
        while (rest >> x) v.push_back(x);
        if (v.empty())
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": empty vector");
        if (dim_ == 0) dim_ = static_cast<int>(v.size());
        if (static_cast<int>(v.size()) != dim_)
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": inconsistent dimension");
        normalize(v);
        table_[key] = std::move(v);
    }
}

SentenceEmbedding ExternalFileOracle::embed(const std::vector<int>& sentence) const {
    if (sentence.empty()) throw std::runtime_error("empty sentence");
    std::string key;
    for (int id : sentence) {
        if (!key.empty()) key.push_back(' ');
        key += vocab_->decode(id);
    }
    auto it = table_.find(key);
    if (it == table_.end()) throw std::runtime_error("unknown sentence in external oracle: " + key);
    return it->second;
}

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    const double d = std::sqrt(na) * std::sqrt(nb);
    if (d <= 0.0) throw std::runtime_error("zero vector in cosine");
    return dot / d;
}

double golden_similarity(const std::vector<int>& a, const std::vector<int>& b,
                         const SimilarityOracle& oracle) {
    const double c = cosine(oracle.embed(a), oracle.embed(b));
    double t = (c + 1.0) / 2.0;
    if (t < 0.0) t = 0.0;
    if (t > 1.0) t = 1.0;
    return t;
}

}  // namespace hint
