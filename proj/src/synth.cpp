#include "hvv/synth.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "hvv/errors.hpp"
#include "hvv/rng.hpp"

namespace hvv {

namespace synth {

const std::array<std::vector<std::string>, 3>& ocr_cues() {
    static const std::array<std::vector<std::string>, 3> cues = {
        std::vector<std::string>{"heroic", "brave", "selfless"},
        std::vector<std::string>{"corrupt", "crooked", "sinister"},
        std::vector<std::string>{"suffering", "helpless", "abandoned"}};
    return cues;
}

const std::array<std::string, 3>& caption_cues() {
    static const std::array<std::string, 3> cues = {"celebrated", "condemned", "mourned"};
    return cues;
}

const std::array<std::string, kNumRoles>& dump_tails() {
    static const std::array<std::string, kNumRoles> tails = {"laurel", "serpent", "ashes",
                                                             "pebble"};
    return tails;
}

}  // namespace synth

namespace {

const std::vector<std::string>& fillers() {
    static const std::vector<std::string> pool = {
        "lockdown", "vaccine", "election", "debate",  "rally",   "policy", "market",
        "school",   "hospital", "border",  "economy", "drivers", "taxes",  "media",
        "press",    "budget",  "bridge",   "river",   "garden",  "street", "office",
        "signal",   "poster",  "slogan",   "banner",  "crowd",   "stage",  "camera"};
    return pool;
}

const std::vector<std::string>& entities() {
    static const std::vector<std::string> pool = {
        "alex turner",   "jordan lee",   "sam rivera",   "casey morgan", "taylor brooks",
        "robin shaw",    "jamie cole",   "drew patel",   "morgan reyes", "riley fox",
        "cameron ross",  "avery stone",  "quinn harper", "dana wolfe",   "skyler beck",
        "reese lang",    "parker hale",  "emerson gray", "finley marsh", "rowan pierce"};
    return pool;
}

// role shares matching the published dataset summary
const std::array<double, kNumRoles>& covid_shares() {
    static const std::array<double, kNumRoles> s = {200.0 / 4419.0, 747.0 / 4419.0,
                                                    407.0 / 4419.0, 3065.0 / 4419.0};
    return s;
}

const std::array<double, kNumRoles>& uspolitics_shares() {
    static const std::array<double, kNumRoles> s = {288.0 / 5715.0, 1641.0 / 5715.0,
                                                    544.0 / 5715.0, 3242.0 / 5715.0};
    return s;
}

constexpr int kImagePoolPerRole = 12;
constexpr int kNeutralImagePool = 24;

struct Slot {
    RoleLabel role;
    std::string split;
    bool graph_cued;
};

}  // namespace

std::vector<long> largest_remainder(const std::vector<double>& shares, long n) {
    std::vector<long> out(shares.size(), 0);
    std::vector<std::pair<double, std::size_t>> rema;
    long assigned = 0;
    for (std::size_t i = 0; i < shares.size(); ++i) {
        const double exact = shares[i] * static_cast<double>(n);
        out[i] = static_cast<long>(std::floor(exact));
        assigned += out[i];
        rema.push_back({exact - std::floor(exact), i});
    }
    std::stable_sort(rema.begin(), rema.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (long k = 0; k < n - assigned; ++k) out[rema[static_cast<std::size_t>(k) % rema.size()].second] += 1;
    return out;
}

SynthCorpus make_synth_corpus(const SynthOptions& opts) {
    if (opts.sizes.empty() || opts.sizes.size() > 2) {
        throw ValidationError("synth: sizes must have one or two entries");
    }
    for (long n : opts.sizes) {
        if (n < 1) throw ValidationError("synth: sizes must be positive");
    }

    SynthCorpus corpus;

    // generic filler knowledge, including sub-threshold triples that the
    // weight filter must drop
    for (std::size_t i = 0; i < 12; ++i) {
        const auto& f = fillers()[i];
        corpus.triples.push_back({f, "RelatedTo", "common " + f, 2.2 + 0.1 * static_cast<double>(i)});
        corpus.triples.push_back({f, "RelatedTo", "junk " + f, 1.0});
    }

    std::vector<std::pair<std::string, std::array<double, kNumRoles>>> domains;
    if (opts.sizes.size() == 1) {
        domains.push_back({"synthetic", covid_shares()});
    } else {
        domains.push_back({"covid19", covid_shares()});
        domains.push_back({"uspolitics", uspolitics_shares()});
    }

    long global_index = 0;
    for (std::size_t di = 0; di < domains.size(); ++di) {
        const auto& [domain, shares] = domains[di];
        const long n = opts.sizes[di];
        const auto role_counts =
            largest_remainder(std::vector<double>(shares.begin(), shares.end()), n);

        std::vector<Slot> slots;
        slots.reserve(static_cast<std::size_t>(n));
        for (int role = 0; role < kNumRoles; ++role) {
            const auto split_counts =
                largest_remainder({0.8, 0.1, 0.1}, role_counts[static_cast<std::size_t>(role)]);
            const char* split_names[3] = {"train", "val", "test"};
            for (int s = 0; s < 3; ++s) {
                const long m = split_counts[static_cast<std::size_t>(s)];
                const long graph_cued =
                    static_cast<long>(std::floor(synth::kGraphCueFraction * static_cast<double>(m) + 0.5));
                for (long j = 0; j < m; ++j) {
                    slots.push_back({static_cast<RoleLabel>(role), split_names[s], j < graph_cued});
                }
            }
        }
        Rng order_rng(mix64(opts.seed, 0x736c6f7473ULL + di));
        order_rng.shuffle(slots);

        for (const auto& slot : slots) {
            Rng rng(mix64(opts.seed, 0x696e7374ULL + static_cast<std::uint64_t>(global_index)));
            MemeInstance inst;
            inst.id = domain + "_" + std::to_string(global_index);
            inst.domain = domain;
            inst.split = slot.split;
            inst.role = slot.role;
            inst.entity = entities()[rng.below(entities().size())];
            const auto& f = fillers();
            const std::string f1 = f[rng.below(f.size())];
            const std::string f2 = f[rng.below(f.size())];
            const std::string f3 = f[rng.below(f.size())];
            const std::string f4 = f[rng.below(f.size())];
            inst.face_labels = {inst.entity};
            const int role_idx = static_cast<int>(slot.role);
            if (slot.graph_cued) {
                const std::string nonce = "zq" + std::to_string(global_index);
                inst.ocr_text = "the " + f1 + " " + f2 + " of the " + nonce + " in the " + f4;
                inst.caption = "the " + f3 + " near the " + f4;
                inst.image_ref = "img_misc_" + std::to_string(rng.below(kNeutralImagePool));
                corpus.triples.push_back(
                    {nonce, "RelatedTo", synth::dump_tails()[static_cast<std::size_t>(role_idx)], 2.5});
                corpus.triples.push_back({nonce, "RelatedTo", "dust", 1.5});
            } else if (slot.role == RoleLabel::Other) {
                inst.ocr_text = "the " + f1 + " " + f2 + " with " + inst.entity + " at the " + f4;
                inst.caption = inst.entity + " seen by the " + f3;
                inst.image_ref =
                    "img_other_" + std::to_string(rng.below(kImagePoolPerRole));
            } else {
                const auto& cues = synth::ocr_cues()[static_cast<std::size_t>(role_idx)];
                const std::string cue = cues[rng.below(cues.size())];
                inst.ocr_text = "the " + cue + " " + inst.entity + " at the " + f1 + " " + f2;
                inst.caption = inst.entity + " is " +
                               synth::caption_cues()[static_cast<std::size_t>(role_idx)] +
                               " by the " + f3;
                inst.image_ref = "img_" + std::string(role_name(slot.role)) + "_" +
                                 std::to_string(rng.below(kImagePoolPerRole));
            }
            corpus.instances.push_back(std::move(inst));
            ++global_index;
        }
    }
    return corpus;
}

void write_synth_corpus(const std::string& dir, const SynthCorpus& corpus) {
    std::filesystem::create_directories(dir);
    const auto corpus_path = std::filesystem::path(dir) / "corpus.jsonl";
    save_dataset(corpus_path.string(), corpus.instances);
    const auto edges_path = std::filesystem::path(dir) / "edges.tsv";
    std::ofstream out(edges_path);
    if (!out) throw IoError("cannot write edge dump: " + edges_path.string());
    out.precision(17);
    for (const auto& t : corpus.triples) {
        out << t.head << '\t' << t.relation << '\t' << t.tail << '\t' << t.weight << "\n";
    }
}

}  // namespace hvv
