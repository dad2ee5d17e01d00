#include "hint/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace hint {

const char* special_name(int id) {
    static const char* names[kNumReserved] = {"<pad>", "<unk>", "<bos>", "<eos>", "<sen>", "<dis>"};
    return names[id];
}

int Vocab::encode(const std::string& token) const {
    auto it = token_to_id.find(token);
    return it == token_to_id.end() ? UNK : it->second;
}

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

bool is_terminal(char c) { return c == '.' || c == '!' || c == '?'; }

bool is_closing_quote(char c) { return c == '"' || c == '\''; }

std::string collapse_ws(const std::string& s) {
    std::string out;
    bool in_space = true;
    for (char c : s) {
        if (is_space(c)) {
            in_space = true;
        } else {
            if (in_space && !out.empty()) out.push_back(' ');
            out.push_back(c);
            in_space = false;
        }
    }
    return out;
}

}  // namespace

std::vector<std::string> split_sentences(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    const size_t n = text.size();
    size_t i = 0;
    while (i < n) {
        char c = text[i];
        cur.push_back(c);
        if (is_terminal(c)) {
            size_t j = i + 1;
            while (j < n && is_closing_quote(text[j])) {
                cur.push_back(text[j]);
                ++j;
            }
            if (j >= n || is_space(text[j])) {
                std::string s = collapse_ws(cur);
                if (!s.empty()) out.push_back(s);
                cur.clear();
            }
            i = j;
        } else {
            ++i;
        }
    }
    std::string tail = collapse_ws(cur);
    if (!tail.empty()) out.push_back(tail);
    return out;
}

std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : text) {
        if (is_space(c)) {
            if (!cur.empty()) {
                out.push_back(cur);
                cur.clear();
            }
        } else {
            cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

Vocab build_vocab(const std::vector<Document>& corpus, int min_freq) {
    if (corpus.empty()) throw std::runtime_error("empty corpus");
    std::map<std::string, long> freq;
    for (const Document& d : corpus) {
        for (const std::string& t : tokenize(d.input_text)) ++freq[t];
        for (const std::string& t : tokenize(d.target_text)) ++freq[t];
    }
    // never let a literal reserved name into the open vocabulary
    for (int i = 0; i < kNumReserved; ++i) freq.erase(special_name(i));

    std::vector<std::pair<std::string, long>> kept;
    for (const auto& [tok, f] : freq)
        if (f >= min_freq) kept.emplace_back(tok, f);
    if (kept.empty()) throw std::runtime_error("empty vocabulary");

    std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });

    Vocab v;
    for (int i = 0; i < kNumReserved; ++i) v.id_to_token.push_back(special_name(i));
    for (const auto& [tok, f] : kept) {
        v.token_to_id[tok] = static_cast<int>(v.id_to_token.size());
        v.id_to_token.push_back(tok);
    }
    return v;
}

SegmentedDocument encode_document(const Document& doc, const Vocab& vocab) {
    SegmentedDocument seg;
    for (const std::string& t : tokenize(doc.input_text)) seg.input_tokens.push_back(vocab.encode(t));
    for (const std::string& s : split_sentences(doc.target_text)) {
        std::vector<int> ids;
        for (const std::string& t : tokenize(s)) ids.push_back(vocab.encode(t));
        if (!ids.empty()) seg.sentences.push_back(std::move(ids));
    }
    if (seg.sentences.empty()) throw std::runtime_error("empty target");
    return seg;
}

AugmentedSequence insert_special_tokens(const SegmentedDocument& seg) {
    AugmentedSequence aug;
    aug.ids.push_back(BOS);
    for (const auto& sent : seg.sentences) {
        const int start = static_cast<int>(aug.ids.size());
        aug.ids.insert(aug.ids.end(), sent.begin(), sent.end());
        aug.sentence_spans.emplace_back(start, static_cast<int>(aug.ids.size()));
        aug.sen_positions.push_back(static_cast<int>(aug.ids.size()));
        aug.ids.push_back(SEN);
        aug.dis_positions.push_back(static_cast<int>(aug.ids.size()));
        aug.ids.push_back(DIS);
    }
    aug.ids.push_back(EOS);
    return aug;
}

int augmented_length(const SegmentedDocument& seg) {
    int n = 2 + 2 * static_cast<int>(seg.sentences.size());
    for (const auto& s : seg.sentences) n += static_cast<int>(s.size());
    return n;
}

SegmentedDocument truncate_to_fit(const SegmentedDocument& seg, int max_len) {
    SegmentedDocument out = seg;
    while (out.sentences.size() > 1 && augmented_length(out) > max_len) out.sentences.pop_back();
    if (augmented_length(out) > max_len) {
        // single sentence still too long: cut its tail, keep at least one token
        int budget = max_len - 4;  // BOS, SEN, DIS, EOS
        if (budget < 1) budget = 1;
        auto& s = out.sentences[0];
        if (static_cast<int>(s.size()) > budget) s.resize(static_cast<size_t>(budget));
    }
    return out;
}

std::string decode_tokens(const std::vector<int>& ids, const Vocab& vocab) {
    std::string out;
    for (int id : ids) {
        if (!out.empty()) out.push_back(' ');
        out += vocab.decode(id);
    }
    return out;
}

std::vector<Document> load_corpus_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in.is_open()) throw std::runtime_error("cannot open corpus file: " + path);
    std::vector<Document> docs;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const std::exception& e) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": bad JSON: " + e.what());
        }
        Document d;
        d.id = j.value("id", "");
        d.input_text = j.value("input", "");
        d.target_text = j.value("target", "");
        if (d.id.empty()) d.id = "line" + std::to_string(lineno);
        if (d.target_text.empty())
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": empty target");
        docs.push_back(std::move(d));
    }
    return docs;
}

void save_corpus_jsonl(const std::vector<Document>& docs, const std::string& path) {
    std::ofstream out(path);
    if (!out.is_open()) throw std::runtime_error("cannot write corpus file: " + path);
    for (const Document& d : docs) {
        nlohmann::json j;
        j["id"] = d.id;
        j["input"] = d.input_text;
        j["target"] = d.target_text;
        out << j.dump() << "\n";
    }
}

void save_vocab(const Vocab& vocab, const std::string& path) {
    std::ofstream out(path);
    if (!out.is_open()) throw std::runtime_error("cannot write vocab file: " + path);
    for (const std::string& t : vocab.id_to_token) out << t << "\n";
}

Vocab load_vocab(const std::string& path) {
    std::ifstream in(path);
    if (!in.is_open()) throw std::runtime_error("cannot open vocab file: " + path);
    Vocab v;
    std::string line;
    int id = 0;
    while (std::getline(in, line)) {
        if (id < kNumReserved) {
            if (line != special_name(id))
                throw std::runtime_error("vocab file " + path + ": bad reserved header at line " +
                                         std::to_string(id + 1));
        } else {
            v.token_to_id[line] = id;
        }
        v.id_to_token.push_back(line);
        ++id;
    }
    if (id < kNumReserved) throw std::runtime_error("vocab file " + path + ": truncated header");
    return v;
}

}  // namespace hint
