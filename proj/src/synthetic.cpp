#include "hint/synthetic.hpp"

#include <string>

#include "hint/rng.hpp"

namespace hint {

namespace {

const std::vector<std::string> kNames = {
    "mira", "theo", "anna", "felix", "rosa", "ivan", "lena", "omar", "petra", "simon",
    "tara", "viktor", "wanda", "yusuf", "zoe", "carl", "edith", "bruno", "nadia", "piotr"};

const std::vector<std::string> kPlaces = {
    "market", "harbor", "garden", "library", "bakery", "station", "meadow", "workshop",
    "cottage", "bridge", "orchard", "mill", "village", "shore", "stable", "cellar",
    "tower", "square"};

const std::vector<std::string> kObjects = {
    "lantern", "basket", "ladder", "kettle", "compass", "blanket", "wagon", "fiddle",
    "anchor", "barrel", "candle", "saddle", "spade", "locket", "parcel", "net",
    "bucket", "bellows", "loom", "chest"};

const std::vector<std::string> kAdjectives = {
    "old", "heavy", "bright", "dusty", "crooked", "quiet", "golden", "narrow", "cold",
    "warm", "shiny", "wooden", "faded", "little", "broken", "sturdy", "pale", "smooth"};

const std::vector<std::string> kVerbs = {
    "carry", "mend", "polish", "borrow", "gather", "measure", "trade", "paint",
    "stack", "haul", "examine", "wrap", "sharpen", "deliver", "untangle", "oil"};

const std::vector<std::string> kVerbsPast = {
    "carried", "mended", "polished", "borrowed", "gathered", "measured", "traded",
    "painted", "stacked", "hauled", "examined", "wrapped", "sharpened", "delivered",
    "untangled", "oiled"};

const std::vector<std::string> kEmotions = {
    "proud", "tired", "cheerful", "uneasy", "relieved", "hopeful", "curious",
    "grateful", "calm", "restless", "pleased", "weary"};

const std::vector<std::string> kAnimals = {
    "sparrow", "goat", "rabbit", "heron", "fox", "beetle", "pony", "crow", "duck",
    "cat", "hound", "mouse", "magpie", "lamb"};

const std::vector<std::string> kFoods = {
    "bread", "cheese", "apples", "honey", "soup", "plums", "cider", "pie", "oats",
    "berries", "tea", "jam", "figs", "stew"};

const std::vector<std::string> kTimes = {
    "morning", "evening", "noon", "dawn", "dusk", "spring", "autumn", "winter"};

struct Slots {
    // thread A: the protagonist and their object
    std::string name, place, object, adj, adj2, verb, verbpast, emotion, emotion2;
    // thread B: a neighbor with an animal and some food
    std::string name2, place2, animal, food;
    std::string time;
};

std::string pick(const std::vector<std::string>& v, Rng& rng) {
    return v[rng.below(static_cast<uint32_t>(v.size()))];
}

std::string fill(const std::string& tpl, const Slots& s) {
    std::string out;
    size_t i = 0;
    while (i < tpl.size()) {
        if (tpl[i] == '<') {
            const size_t end = tpl.find('>', i);
            const std::string key = tpl.substr(i + 1, end - i - 1);
            if (key == "name") out += s.name;
            else if (key == "name2") out += s.name2;
            else if (key == "place") out += s.place;
            else if (key == "place2") out += s.place2;
            else if (key == "object") out += s.object;
            else if (key == "adj") out += s.adj;
            else if (key == "adj2") out += s.adj2;
            else if (key == "verb") out += s.verb;
            else if (key == "verbpast") out += s.verbpast;
            else if (key == "emotion") out += s.emotion;
            else if (key == "emotion2") out += s.emotion2;
            else if (key == "animal") out += s.animal;
            else if (key == "food") out += s.food;
            else if (key == "time") out += s.time;
            i = end + 1;
        } else {
            out.push_back(tpl[i]);
            ++i;
        }
    }
    return out;
}

// Two lexical threads interleave through the schema. Template index 0 of the
// action and consequence pools forms a "chained" pair sharing most content
// words, so within-document pairwise overlap spans a wide, predictable range.
const std::vector<std::string> kSetupA = {
    "one <time> <name> walked to the <place>.",
    "<name> had a <adj> <object>.",
    "<name> kept the <adj> <object> near the <place>.",
    "the <place> was <adj2> that <time>.",
};

const std::vector<std::string> kSetupB = {
    "a <animal> sat by the <place2>.",
    "<name2> brought <food> to the <place2>.",
    "the <animal> of <name2> liked <food>.",
    "one <time> a <animal> found <food> at the <place2>.",
};

const std::vector<std::string> kActionA = {
    "then <name> began to <verb> the <adj> <object>.",
    "<name> tried to <verb> the <object> but it did not work.",
    "before noon <name> <verbpast> the <object> again.",
    "then the <adj> <object> slipped at the <place>.",
    "<name> could not <verb> it alone.",
};

const std::vector<std::string> kActionB = {
    "then the <animal> ate the <food> by the <place2>.",
    "<name2> fed the <animal> some <food>.",
    "then <name2> watched the <animal> near the <place2>.",
    "the <animal> would not leave the <food>.",
};

const std::vector<std::string> kConsequenceA = {
    "so <name> could <verb> the <adj> <object> at last.",
    "because the <object> was <adj> , <name> felt <emotion>.",
    "so the <object> looked <adj2> again.",
    "because of that , <name> left the <place>.",
};

const std::vector<std::string> kConsequenceB = {
    "so the <animal> napped beside the <food> at the <place2>.",
    "because the <food> was gone , the <animal> felt <emotion>.",
    "so <name2> shared the <food> with the <animal>.",
};

const std::vector<std::string> kCodaA = {
    "after that , <name> never forgot the <adj> <object>.",
    "after that , <name> felt <emotion2>.",
    "finally <name> thanked <name2>.",
    "then <name> went home and rested.",
    "finally the <time> ended.",
};

const std::vector<std::string> kCodaB = {
    "after that , the <animal> slept near the <place2>.",
    "finally the <place2> was quiet.",
    "then the <animal> napped beside the <food>.",
};

}  // namespace

std::vector<Document> make_synthetic_corpus(int num_docs, uint64_t seed) {
    std::vector<Document> docs;
    docs.reserve(static_cast<size_t>(num_docs));
    for (int d = 0; d < num_docs; ++d) {
        Rng rng(derive_seed(seed, "synthetic-doc", static_cast<uint64_t>(d)));
        Slots s;
        s.name = pick(kNames, rng);
        do {
            s.name2 = pick(kNames, rng);
        } while (s.name2 == s.name);
        s.place = pick(kPlaces, rng);
        do {
            s.place2 = pick(kPlaces, rng);
        } while (s.place2 == s.place);
        s.object = pick(kObjects, rng);
        s.adj = pick(kAdjectives, rng);
        do {
            s.adj2 = pick(kAdjectives, rng);
        } while (s.adj2 == s.adj);
        const uint32_t vi = rng.below(static_cast<uint32_t>(kVerbs.size()));
        s.verb = kVerbs[vi];
        s.verbpast = kVerbsPast[vi];
        s.emotion = pick(kEmotions, rng);
        s.emotion2 = pick(kEmotions, rng);
        s.animal = pick(kAnimals, rng);
        s.food = pick(kFoods, rng);
        s.time = pick(kTimes, rng);

        const int total = 4 + static_cast<int>(rng.below(3));  // 4..6 sentences
        int setups = 1, actions = 1;
        if (total == 5) (rng.below(2) == 0 ? setups : actions) += 1;
        if (total == 6) {
            setups = 2;
            actions = 2;
        }

        // thread per phase slot; both threads appear in every document
        std::vector<std::string> sentences;
        auto pick_phase = [&](const std::vector<std::string>& a, const std::vector<std::string>& b,
                              bool thread_b) { return fill(pick(thread_b ? b : a, rng), s); };
        std::vector<bool> threads;
        for (int i = 0; i < total; ++i) threads.push_back(rng.below(2) == 1);
        bool has_a = false, has_b = false;
        for (bool t : threads) (t ? has_b : has_a) = true;
        if (!has_a) threads[rng.below(static_cast<uint32_t>(total))] = false;
        if (!has_b) threads[rng.below(static_cast<uint32_t>(total))] = true;

        int slot = 0;
        for (int i = 0; i < setups; ++i) sentences.push_back(pick_phase(kSetupA, kSetupB, threads[slot++]));
        const int first_action_slot = slot;
        const int cons_slot = first_action_slot + actions;
        const bool chain = threads[static_cast<size_t>(cons_slot)] == threads[static_cast<size_t>(first_action_slot)] &&
                           rng.below(2) == 0;
        for (int i = 0; i < actions; ++i) {
            const bool tb = threads[slot++];
            if (chain && i == 0)
                sentences.push_back(fill(tb ? kActionB[0] : kActionA[0], s));
            else
                sentences.push_back(pick_phase(kActionA, kActionB, tb));
        }
        {
            const bool tb = threads[slot++];
            if (chain)
                sentences.push_back(fill(tb ? kConsequenceB[0] : kConsequenceA[0], s));
            else
                sentences.push_back(pick_phase(kConsequenceA, kConsequenceB, tb));
        }
        sentences.push_back(pick_phase(kCodaA, kCodaB, threads[slot++]));

        Document doc;
        doc.id = "synth" + std::to_string(d);
        doc.input_text = sentences.front();
        std::string target;
        for (size_t i = 1; i < sentences.size(); ++i) {
            if (i > 1) target.push_back(' ');
            target += sentences[i];
        }
        doc.target_text = target;
        docs.push_back(std::move(doc));
    }
    return docs;
}

}  // namespace hint
