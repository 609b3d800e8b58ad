#pragma once

#include <cstdint>
#include <string>

#include "hvv/otke.hpp"

namespace hvv {

enum class FusionMode { Otk, Cat };

// Architecture hyperparameters and module toggles. Shapes are validated at
// model construction time, never at forward time.
struct ModelConfig {
    int l = 32;        // text length
    int d = 64;        // text embed dim
    int l_m = 16;      // image patches
    int d_m = 64;      // patch dim
    int d_prime = 32;  // reduced dim
    int d_g = 32;      // graph feature dim
    int p = 32;        // OTKE reference count
    double epsilon = 0.1;
    int iterations = 30;  // Sinkhorn rounds
    KernelKind kernel = KernelKind::Linear;
    double sigma = 1.0;
    FusionMode fusion = FusionMode::Otk;
    bool use_caption = true;
    bool use_face_labels = true;
    bool use_commonsense = true;
    bool use_vision = true;
    int max_neighbors = 5;

    void validate() const;
    OtkeConfig otke() const;
    std::string to_text() const;  // flat key = value lines
};

struct TrainConfig {
    double lr = 1e-4;
    double weight_decay = 1e-5;
    int batch_size = 8;
    int epochs = 15;
    std::uint64_t seed = 0;
    int early_stop_patience = 3;  // on val macro-F1
    bool class_weighting = false;

    void validate() const;
};

struct Config {
    ModelConfig model;
    TrainConfig train;
};

// Parses flat `key = value` lines; '#' starts a comment; unknown keys are
// rejected. Errors carry the 1-based line number.
Config parse_config_text(const std::string& text);
Config load_config(const std::string& path);

// Parses into an existing config (used for checkpoint-embedded model text).
void apply_config_line(Config& cfg, const std::string& line, int lineno);

}  // namespace hvv
