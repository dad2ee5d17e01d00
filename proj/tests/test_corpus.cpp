#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <fstream>

#include "hint/corpus.hpp"
#include "hint/rng.hpp"

using namespace hint;

TEST_CASE("split_sentences: terminal marks, unterminated tail, abbreviations") {
    CHECK(split_sentences("He ran. She hid!") == std::vector<std::string>{"He ran.", "She hid!"});
    CHECK(split_sentences("Wait") == std::vector<std::string>{"Wait"});
    // the boundary rule is applied literally; "Mr." ends a sentence
    CHECK(split_sentences("Mr. Smith left. He smiled.") ==
          std::vector<std::string>{"Mr.", "Smith left.", "He smiled."});
    CHECK(split_sentences("").empty());
    CHECK(split_sentences("   \t\n ").empty());
    CHECK(split_sentences("He said \"stop.\" She did.") ==
          std::vector<std::string>{"He said \"stop.\"", "She did."});
    CHECK(split_sentences("a?! b.") == std::vector<std::string>{"a?!", "b."});
    CHECK(split_sentences("one  two.   three") == std::vector<std::string>{"one two.", "three"});
}

TEST_CASE("build_vocab: frequency order, threshold, lexical tie break") {
    {
        std::vector<Document> c = {{"d", "", "a a b"}};
        Vocab v = build_vocab(c, 1);
        CHECK(v.size() == kNumReserved + 2);
        CHECK(v.encode("a") == 6);
        CHECK(v.encode("b") == 7);
    }
    {
        std::vector<Document> c = {{"d", "", "a a b"}};
        Vocab v = build_vocab(c, 2);
        CHECK(v.size() == kNumReserved + 1);
        CHECK(v.encode("a") == 6);
        CHECK(v.encode("b") == UNK);
    }
    {
        std::vector<Document> c = {{"d1", "", "x y"}, {"d2", "", "y z"}};
        Vocab v = build_vocab(c, 1);
        CHECK(v.encode("y") == 6);
        CHECK(v.encode("x") == 7);
        CHECK(v.encode("z") == 8);
    }
    std::vector<Document> rare = {{"d", "", "q q"}};
    CHECK_THROWS_WITH(build_vocab(rare, 3), "empty vocabulary");
}

TEST_CASE("build_vocab never admits reserved names; case folds") {
    std::vector<Document> c = {{"d", "", "<sen> The THE the"}};
    Vocab v = build_vocab(c, 1);
    CHECK(v.encode("the") == 6);
    CHECK(v.encode("<sen>") == UNK);
}

TEST_CASE("encode_document: attached punctuation, OOV, unconditional input") {
    std::vector<Document> c = {{"d", "", "a b. c."}};
    Vocab v = build_vocab(c, 1);
    Document doc{"x", "", "a b. c."};
    SegmentedDocument seg = encode_document(doc, v);
    REQUIRE(seg.sentences.size() == 2);
    CHECK(seg.sentences[0] == std::vector<int>{v.encode("a"), v.encode("b.")});
    CHECK(seg.sentences[1] == std::vector<int>{v.encode("c.")});
    CHECK(seg.input_tokens.empty());

    Document oov{"y", "", "qqq"};
    SegmentedDocument seg2 = encode_document(oov, v);
    CHECK(seg2.sentences[0] == std::vector<int>{UNK});

    Document empty{"z", "", "   "};
    CHECK_THROWS_WITH(encode_document(empty, v), "empty target");
}

TEST_CASE("insert_special_tokens layout and bookkeeping") {
    SegmentedDocument seg;
    const int a = 6, b = 7, c = 8;
    seg.sentences = {{a, b}, {c}};
    AugmentedSequence aug = insert_special_tokens(seg);
    CHECK(aug.ids == std::vector<int>{BOS, a, b, SEN, DIS, c, SEN, DIS, EOS});
    CHECK(aug.sen_positions == std::vector<int>{3, 6});
    CHECK(aug.dis_positions == std::vector<int>{4, 7});
    CHECK(aug.sentence_spans == std::vector<std::pair<int, int>>{{1, 3}, {5, 6}});

    SegmentedDocument one;
    one.sentences = {{a}};
    CHECK(insert_special_tokens(one).ids.size() == 5);
}

TEST_CASE("augmented length identity and layout invariants hold on random docs") {
    Rng rng(123);
    for (int trial = 0; trial < 50; ++trial) {
        SegmentedDocument seg;
        const int k = 1 + static_cast<int>(rng.below(6));
        int expect = 2 + 2 * k;
        for (int i = 0; i < k; ++i) {
            std::vector<int> sent;
            const int len = 1 + static_cast<int>(rng.below(7));
            expect += len;
            for (int j = 0; j < len; ++j) sent.push_back(kNumReserved + static_cast<int>(rng.below(50)));
            seg.sentences.push_back(sent);
        }
        AugmentedSequence aug = insert_special_tokens(seg);
        CHECK(static_cast<int>(aug.ids.size()) == expect);
        REQUIRE(aug.sen_positions.size() == static_cast<size_t>(k));
        for (int i = 0; i < k; ++i) CHECK(aug.sen_positions[i] + 1 == aug.dis_positions[i]);
        // stripping specials recovers the concatenated sentences in order
        std::vector<int> flat, stripped;
        for (const auto& s : seg.sentences) flat.insert(flat.end(), s.begin(), s.end());
        for (int id : aug.ids)
            if (id >= kNumReserved) stripped.push_back(id);
        CHECK(flat == stripped);
        // purity: identical input gives identical output
        AugmentedSequence again = insert_special_tokens(seg);
        CHECK(again.ids == aug.ids);
    }
}

TEST_CASE("round trip differs only in whitespace and case") {
    std::vector<Document> c = {{"d", "", "The cat SAT. the cat ran!"}};
    Vocab v = build_vocab(c, 1);
    Document doc{"x", "", "The  cat\tSAT.  the cat ran!"};
    SegmentedDocument seg = encode_document(doc, v);
    std::string flat;
    for (const auto& s : seg.sentences) {
        if (!flat.empty()) flat.push_back(' ');
        flat += decode_tokens(s, v);
    }
    CHECK(flat == "the cat sat. the cat ran!");
}

TEST_CASE("truncation drops whole sentences, never splits mid-sentence") {
    SegmentedDocument seg;
    seg.sentences = {{6, 7, 8}, {9, 10}, {11, 12, 13, 14}};
    // full length = 2 + 9 + 6 = 17
    SegmentedDocument cut = truncate_to_fit(seg, 13);
    CHECK(cut.sentences.size() == 2);
    CHECK(augmented_length(cut) == 11);
    SegmentedDocument tiny = truncate_to_fit(seg, 6);
    REQUIRE(tiny.sentences.size() == 1);
    CHECK(augmented_length(tiny) <= 6);
    CHECK(!tiny.sentences[0].empty());
}

TEST_CASE("corpus and vocab files round trip") {
    const std::string cpath = "test_corpus_tmp.jsonl";
    const std::string vpath = "test_vocab_tmp.txt";
    std::vector<Document> docs = {{"a", "in text", "out text."}, {"b", "", "solo."}};
    save_corpus_jsonl(docs, cpath);
    auto loaded = load_corpus_jsonl(cpath);
    REQUIRE(loaded.size() == 2);
    CHECK(loaded[0].id == "a");
    CHECK(loaded[0].input_text == "in text");
    CHECK(loaded[1].target_text == "solo.");

    Vocab v = build_vocab(docs, 1);
    save_vocab(v, vpath);
    Vocab v2 = load_vocab(vpath);
    CHECK(v2.size() == v.size());
    CHECK(v2.encode("solo.") == v.encode("solo."));
    CHECK(v2.decode(0) == std::string("<pad>"));

    std::remove(cpath.c_str());
    std::remove(vpath.c_str());
}

TEST_CASE("malformed corpus lines carry the line number") {
    const std::string path = "test_corpus_bad.jsonl";
    {
        std::ofstream out(path);
        out << "{\"id\":\"ok\",\"input\":\"\",\"target\":\"t.\"}\n";
        out << "not json\n";
    }
    CHECK_THROWS(load_corpus_jsonl(path));
    std::remove(path.c_str());
}
