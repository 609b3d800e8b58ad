#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "hvv/dataset.hpp"
#include "hvv/knowledge.hpp"

namespace hvv {

// Planted-rule synthetic corpus. The gold role is a deterministic function of
// injected cues: a role adjective in the OCR text plus a confirming caption
// token for most instances, and for a fixed fraction a nonce noun whose role
// is reachable only by following the bundled edge dump to a role tail node.
// Image ids are drawn from per-role pools on directly-cued instances and from
// a neutral pool on dump-cued ones.
namespace synth {

// OCR cue adjectives per role (hero, villain, victim); "other" carries none.
const std::array<std::vector<std::string>, 3>& ocr_cues();
// caption confirmation tokens per role (hero, villain, victim)
const std::array<std::string, 3>& caption_cues();
// dump tail tokens, one per role including other
const std::array<std::string, kNumRoles>& dump_tails();

// fraction of every (role, split) bucket whose cue is dump-only
constexpr double kGraphCueFraction = 0.3;

}  // namespace synth

struct SynthOptions {
    // one entry: a single "synthetic" domain; two entries: covid19 and
    // uspolitics domains with their respective role proportions
    std::vector<long> sizes = {2600};
    std::uint64_t seed = 7;
};

struct SynthCorpus {
    std::vector<MemeInstance> instances;
    std::vector<EdgeTriple> triples;
};

SynthCorpus make_synth_corpus(const SynthOptions& opts);

// Writes corpus.jsonl and edges.tsv into dir (created if missing).
void write_synth_corpus(const std::string& dir, const SynthCorpus& corpus);

// Largest-remainder rounding of n * share_i; deterministic, sums to n.
std::vector<long> largest_remainder(const std::vector<double>& shares, long n);

}  // namespace hvv
