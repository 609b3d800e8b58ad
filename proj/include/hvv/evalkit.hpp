#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "hvv/dataset.hpp"

namespace hvv {

// Per-class and macro precision/recall/F1, accuracy and the confusion matrix.
// Zero-denominator metrics are 0 by convention.
struct EvalReport {
    std::array<double, kNumRoles> precision{};
    std::array<double, kNumRoles> recall{};
    std::array<double, kNumRoles> f1{};
    std::array<long, kNumRoles> support{};
    double macro_precision = 0.0;
    double macro_recall = 0.0;
    double macro_f1 = 0.0;
    double accuracy = 0.0;
    long total = 0;
    std::array<std::array<long, kNumRoles>, kNumRoles> confusion{};  // [gold][pred]

    std::string to_json() const;
    std::string to_text() const;
    std::string confusion_csv() const;
};

EvalReport score(const std::vector<RoleLabel>& gold, const std::vector<RoleLabel>& pred);

struct BootstrapResult {
    double observed_delta = 0.0;  // macro-F1(B) - macro-F1(A) on the full set
    double p_value = 1.0;
    int resample_size = 0;
    int simulations = 0;
    std::uint64_t seed = 0;

    std::string to_json() const;
};

// One-sided bootstrap: p = (#simulations where F1_B <= F1_A) / S, with B the
// system claimed better. Each simulation draws N indices with replacement
// from an RNG stream derived from (seed, simulation index).
BootstrapResult bootstrap_test(const std::vector<RoleLabel>& gold,
                               const std::vector<RoleLabel>& pred_a,
                               const std::vector<RoleLabel>& pred_b, int resample_size,
                               int simulations, std::uint64_t seed);

struct Prediction {
    std::string id;
    std::string entity;
    RoleLabel role = RoleLabel::Other;
    std::array<double, kNumRoles> probs{};
};

// JSONL of {id, entity, role, probs}. Errors carry line numbers.
std::vector<Prediction> load_predictions(const std::string& path);
void save_predictions(const std::string& path, const std::vector<Prediction>& preds);

struct EntityRow {
    std::string entity;
    long support = 0;
    std::array<long, kNumRoles> gold_counts{};
    long correct = 0;
    double recall = 0.0;  // correct / support
};

// Instances joined with predictions on (id, entity); instances without a
// prediction are excluded. Sorted by support descending (ties: entity name).
std::vector<EntityRow> entity_report(const std::vector<MemeInstance>& instances,
                                     const std::vector<Prediction>& preds, int top_k = -1);

struct DomainStats {
    std::string domain;
    long memes = 0;  // unique meme ids
    std::array<long, kNumRoles> role_counts{};
    long total = 0;  // entity references
    std::array<long, 3> split_counts{};  // train, val, test
};

struct DatasetStats {
    std::vector<DomainStats> domains;
    long total = 0;
    std::array<long, 3> split_counts{};

    std::string to_text() const;
    std::string to_json() const;
};

DatasetStats dataset_stats(const std::vector<MemeInstance>& instances);

}  // namespace hvv
