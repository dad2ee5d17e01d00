#pragma once

#include <cstdint>
#include <vector>

#include "hint/corpus.hpp"

namespace hint {

// Template-grammar story corpus: each document is 4-6 sentences following a
// fixed event schema (setup, action, consequence, coda) over a ~300-word
// vocabulary, with the first sentence as the input and the rest as the
// target. Fully determined by (num_docs, seed); per-document randomness is
// derived from the document index.
std::vector<Document> make_synthetic_corpus(int num_docs, uint64_t seed);

}  // namespace hint
