#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hvv/tensor.hpp"

namespace hvv {

// Lowercases and splits on whitespace.
std::vector<std::string> tokenize(const std::string& text);

// Deterministic hash-based stand-in for a pretrained text encoder: the same
// token string maps to the same frozen embedding across runs and platforms
// for a fixed seed. Emitted matrices never require gradients.
class SyntheticTextEncoder {
public:
    static constexpr const char* kSep = "<sep>";
    static constexpr const char* kAgg = "<agg>";
    static constexpr const char* kPad = "<pad>";

    SyntheticTextEncoder(std::uint64_t seed, int embed_dim, int max_len);

    // Segments are joined with SEP (empty segments skipped), truncated or
    // padded to max_len rows.
    TensorPtr encode_text(const std::string& ocr, const std::string& entity,
                          const std::string& caption,
                          const std::vector<std::string>& face_labels) const;

    // One embedding row for a single token.
    std::vector<double> token_embedding(const std::string& token) const;

    // Mean of token embeddings over the text; PAD embedding for empty text.
    std::vector<double> text_embedding(const std::string& text) const;

    int dim() const { return dim_; }
    int max_len() const { return len_; }

private:
    std::uint64_t seed_;
    int dim_;
    int len_;
};

// Deterministic stand-in for a pretrained patch-based image encoder.
class SyntheticVisionEncoder {
public:
    SyntheticVisionEncoder(std::uint64_t seed, int patches, int patch_dim);

    // If image_ref names an existing file it is parsed as CSV of
    // patches x patch_dim floats; otherwise the id is hashed into a
    // deterministic pseudo-embedding matrix.
    TensorPtr encode_image(const std::string& image_ref) const;

    int patches() const { return patches_; }
    int patch_dim() const { return dim_; }

private:
    std::uint64_t seed_;
    int patches_;
    int dim_;
};

}  // namespace hvv
