#include "hvv/encoders.hpp"

#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "hvv/errors.hpp"
#include "hvv/rng.hpp"

namespace hvv {

namespace {

constexpr double kSqrt3 = 1.7320508075688772935;  // uniform [-sqrt3, sqrt3) has variance 1

// One pseudo-random unit-variance value per (key, dim).
double hash_value(std::uint64_t key, int dim) {
    std::uint64_t s = key + 0x632be59bd9b4e019ULL * static_cast<std::uint64_t>(dim + 1);
    const std::uint64_t x = splitmix64(s);
    const double u = static_cast<double>(x >> 11) * 0x1.0p-53;
    return (2.0 * u - 1.0) * kSqrt3;
}

std::uint64_t token_key(const std::string& token, std::uint64_t seed, std::uint64_t salt) {
    return mix64(fnv1a64(token), mix64(seed, salt));
}

}  // namespace

std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : text) {
        if (std::isspace(static_cast<unsigned char>(ch))) {
            if (!cur.empty()) {
                out.push_back(cur);
                cur.clear();
            }
        } else {
            cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

SyntheticTextEncoder::SyntheticTextEncoder(std::uint64_t seed, int embed_dim, int max_len)
    : seed_(seed), dim_(embed_dim), len_(max_len) {
    if (embed_dim < 1 || max_len < 1) {
        throw ConfigError("text encoder: embed_dim and max_len must be positive");
    }
}

std::vector<double> SyntheticTextEncoder::token_embedding(const std::string& token) const {
    const std::uint64_t key = token_key(token, seed_, 0x7465787400000000ULL);
    std::vector<double> row(static_cast<std::size_t>(dim_));
    for (int j = 0; j < dim_; ++j) row[static_cast<std::size_t>(j)] = hash_value(key, j);
    return row;
}

std::vector<double> SyntheticTextEncoder::text_embedding(const std::string& text) const {
    const auto tokens = tokenize(text);
    if (tokens.empty()) return token_embedding(kPad);
    std::vector<double> mean(static_cast<std::size_t>(dim_), 0.0);
    for (const auto& tok : tokens) {
        const auto row = token_embedding(tok);
        for (int j = 0; j < dim_; ++j) mean[static_cast<std::size_t>(j)] += row[static_cast<std::size_t>(j)];
    }
    for (double& v : mean) v /= static_cast<double>(tokens.size());
    return mean;
}

TensorPtr SyntheticTextEncoder::encode_text(const std::string& ocr, const std::string& entity,
                                            const std::string& caption,
                                            const std::vector<std::string>& face_labels) const {
    // segment order: OCR, entity, caption, face labels
    std::vector<std::vector<std::string>> segments;
    segments.push_back(tokenize(ocr));
    segments.push_back(tokenize(entity));
    segments.push_back(tokenize(caption));
    {
        std::string joined;
        for (const auto& lab : face_labels) {
            if (!joined.empty()) joined += ' ';
            joined += lab;
        }
        segments.push_back(tokenize(joined));
    }
    std::vector<std::string> tokens;
    for (const auto& seg : segments) {
        if (seg.empty()) continue;
        if (!tokens.empty()) tokens.push_back(kSep);
        tokens.insert(tokens.end(), seg.begin(), seg.end());
    }
    auto out = Tensor2D::make(len_, dim_);
    for (int i = 0; i < len_; ++i) {
        const std::string& tok =
            i < static_cast<int>(tokens.size()) ? tokens[static_cast<std::size_t>(i)] : kPad;
        const auto row = token_embedding(tok);
        for (int j = 0; j < dim_; ++j) out->at(i, j) = row[static_cast<std::size_t>(j)];
    }
    return out;
}

SyntheticVisionEncoder::SyntheticVisionEncoder(std::uint64_t seed, int patches, int patch_dim)
    : seed_(seed), patches_(patches), dim_(patch_dim) {
    if (patches < 1 || patch_dim < 1) {
        throw ConfigError("vision encoder: patches and patch_dim must be positive");
    }
}

TensorPtr SyntheticVisionEncoder::encode_image(const std::string& image_ref) const {
    if (!image_ref.empty() && std::filesystem::exists(image_ref) &&
        std::filesystem::is_regular_file(image_ref)) {
        std::ifstream in(image_ref);
        if (!in) throw IoError("cannot read image feature file: " + image_ref);
        auto out = Tensor2D::make(patches_, dim_);
        std::string line;
        int row = 0;
        while (std::getline(in, line)) {
            if (line.empty() && in.peek() == EOF) break;
            if (row >= patches_) {
                throw FormatError(image_ref + ": row " + std::to_string(row + 1) +
                                  ": expected exactly " + std::to_string(patches_) + " rows");
            }
            std::stringstream ss(line);
            std::string cell;
            int col = 0;
            while (std::getline(ss, cell, ',')) {
                if (col >= dim_) {
                    throw FormatError(image_ref + ": row " + std::to_string(row + 1) + ", col " +
                                      std::to_string(col + 1) + ": expected " +
                                      std::to_string(dim_) + " columns");
                }
                try {
                    std::size_t used = 0;
                    out->at(row, col) = std::stod(cell, &used);
                    while (used < cell.size() &&
                           std::isspace(static_cast<unsigned char>(cell[used])))
                        ++used;
                    if (used != cell.size()) throw std::invalid_argument(cell);
                } catch (const std::exception&) {
                    throw FormatError(image_ref + ": row " + std::to_string(row + 1) + ", col " +
                                      std::to_string(col + 1) + ": not a number: '" + cell + "'");
                }
                ++col;
            }
            if (col != dim_) {
                throw FormatError(image_ref + ": row " + std::to_string(row + 1) + ": got " +
                                  std::to_string(col) + " columns, expected " +
                                  std::to_string(dim_));
            }
            ++row;
        }
        if (row != patches_) {
            throw FormatError(image_ref + ": got " + std::to_string(row) + " rows, expected " +
                              std::to_string(patches_));
        }
        return out;
    }
    auto out = Tensor2D::make(patches_, dim_);
    for (int i = 0; i < patches_; ++i) {
        const std::uint64_t key =
            mix64(token_key(image_ref, seed_, 0x696d616765000000ULL), static_cast<std::uint64_t>(i));
        for (int j = 0; j < dim_; ++j) out->at(i, j) = hash_value(key, j);
    }
    return out;
}

}  // namespace hvv
