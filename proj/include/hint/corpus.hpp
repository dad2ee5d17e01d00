#pragma once

#include <string>
#include <unordered_map>
#include <vector>

namespace hint {

// Reserved token ids, fixed in this order.
enum SpecialId : int {
    PAD = 0,
    UNK = 1,
    BOS = 2,
    EOS = 3,
    SEN = 4,  // sentence marker, appended after every sentence
    DIS = 5,  // discourse marker, follows each sentence marker
};
constexpr int kNumReserved = 6;

const char* special_name(int id);

struct Vocab {
    std::unordered_map<std::string, int> token_to_id;
    std::vector<std::string> id_to_token;  // index 0..5 are the reserved names

    int size() const { return static_cast<int>(id_to_token.size()); }
    int encode(const std::string& token) const;
    const std::string& decode(int id) const { return id_to_token[id]; }
    bool is_reserved(int id) { return id >= 0 && id < kNumReserved; }
};

struct Document {
    std::string id;
    std::string input_text;   // may be empty (unconditional mode)
    std::string target_text;  // must yield at least one sentence
};

struct SegmentedDocument {
    std::vector<int> input_tokens;
    std::vector<std::vector<int>> sentences;  // K sentences, each non-empty
};

// [BOS, Y1.., SEN, DIS, Y2.., SEN, DIS, ..., EOS] plus position bookkeeping.
struct AugmentedSequence {
    std::vector<int> ids;
    std::vector<int> sen_positions;                   // K indices into ids
    std::vector<int> dis_positions;                   // K indices, each sen+1
    std::vector<std::pair<int, int>> sentence_spans;  // [start,end) per sentence
    int num_sentences() const { return static_cast<int>(sen_positions.size()); }
};

// Boundary after '.', '!' or '?' (optionally followed by closing quotes) when
// followed by whitespace; unterminated tail forms the last sentence. No
// abbreviation handling: "Mr. Smith" splits after "Mr." by design.
std::vector<std::string> split_sentences(const std::string& text);

// Whitespace tokens after ASCII case folding; punctuation stays attached.
std::vector<std::string> tokenize(const std::string& text);

// Tokens with frequency >= min_freq get ids 6..V-1 in descending frequency,
// ties broken lexicographically. Counts both input and target text.
Vocab build_vocab(const std::vector<Document>& corpus, int min_freq);

SegmentedDocument encode_document(const Document& doc, const Vocab& vocab);

AugmentedSequence insert_special_tokens(const SegmentedDocument& seg);

// Drops trailing whole sentences until the augmented length fits max_len;
// if even one sentence cannot fit, its tail tokens are cut (it keeps >= 1).
SegmentedDocument truncate_to_fit(const SegmentedDocument& seg, int max_len);

int augmented_length(const SegmentedDocument& seg);

std::string decode_tokens(const std::vector<int>& ids, const Vocab& vocab);

// JSONL: one object per line with string fields "id", "input", "target".
std::vector<Document> load_corpus_jsonl(const std::string& path);
void save_corpus_jsonl(const std::vector<Document>& docs, const std::string& path);

// One token per line, line number = id - 6, after a 6-line reserved header.
void save_vocab(const Vocab& vocab, const std::string& path);
Vocab load_vocab(const std::string& path);

}  // namespace hint
