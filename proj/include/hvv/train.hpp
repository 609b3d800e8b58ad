#pragma once

#include <string>
#include <vector>

#include "hvv/model.hpp"
#include "hvv/optimizer.hpp"

namespace hvv {

struct EpochLog {
    int epoch = 0;
    double train_loss = 0.0;
    double val_macro_f1 = 0.0;
    double val_accuracy = 0.0;

    std::string to_json() const;
};

struct TrainResult {
    std::vector<EpochLog> logs;
    int best_epoch = 0;  // 0 means initial parameters
    EvalReport best_val_report;
    bool has_val_report = false;
};

// Mini-batch cross-entropy with Adam, deterministic given the seed: per-epoch
// shuffles come from (seed, epoch). Early-stops on val macro-F1 and restores
// the best epoch's parameters. Aborts with a NumericError naming the
// epoch/batch if the loss turns non-finite.
TrainResult train_model(RoleClassifier& model, const std::vector<MemeInstance>& train_set,
                        const std::vector<MemeInstance>& val_set, const TrainConfig& cfg,
                        const EdgeDump& dump);

// Scores predictions of prepared instances (used for val evaluation).
EvalReport evaluate_prepared(const RoleClassifier& model,
                             const std::vector<PreparedInstance>& instances);

}  // namespace hvv
