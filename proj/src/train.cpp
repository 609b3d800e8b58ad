#include "hvv/train.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "hvv/errors.hpp"
#include "hvv/rng.hpp"

namespace hvv {

std::string EpochLog::to_json() const {
    nlohmann::json j;
    j["epoch"] = epoch;
    j["train_loss"] = train_loss;
    j["val_macro_f1"] = val_macro_f1;
    j["val_accuracy"] = val_accuracy;
    return j.dump();
}

EvalReport evaluate_prepared(const RoleClassifier& model,
                             const std::vector<PreparedInstance>& instances) {
    std::vector<RoleLabel> gold, pred;
    gold.reserve(instances.size());
    pred.reserve(instances.size());
    for (const auto& inst : instances) {
        if (!inst.role) throw ValidationError("evaluate: instance '" + inst.id + "' has no gold role");
        gold.push_back(*inst.role);
        pred.push_back(model.predict_one(inst).role);
    }
    return score(gold, pred);
}

TrainResult train_model(RoleClassifier& model, const std::vector<MemeInstance>& train_set,
                        const std::vector<MemeInstance>& val_set, const TrainConfig& cfg,
                        const EdgeDump& dump) {
    cfg.validate();
    if (train_set.empty() || val_set.empty()) {
        throw ValidationError("train: train and val splits must be non-empty");
    }
    const auto train_prep = model.prepare_all(train_set, dump);
    const auto val_prep = model.prepare_all(val_set, dump);
    for (const auto& inst : train_prep) {
        if (!inst.role) throw ValidationError("train: instance '" + inst.id + "' has no gold role");
    }

    std::vector<double> class_weights;
    if (cfg.class_weighting) {
        std::array<long, kNumRoles> counts{};
        for (const auto& inst : train_prep) counts[static_cast<std::size_t>(*inst.role)] += 1;
        class_weights.resize(kNumRoles);
        for (int c = 0; c < kNumRoles; ++c) {
            class_weights[static_cast<std::size_t>(c)] =
                counts[static_cast<std::size_t>(c)] > 0
                    ? static_cast<double>(train_prep.size()) /
                          (kNumRoles * static_cast<double>(counts[static_cast<std::size_t>(c)]))
                    : 0.0;
        }
    }

    auto params = model.parameters();
    auto state = AdamState::init(params);
    AdamConfig adam;
    adam.lr = cfg.lr;
    adam.weight_decay = cfg.weight_decay;

    TrainResult result;
    double best_f1 = -std::numeric_limits<double>::infinity();
    std::vector<std::vector<double>> best_values;
    best_values.reserve(params.size());
    for (const auto& p : params) best_values.push_back(p->values);

    long step = 0;
    int stale_epochs = 0;
    std::vector<std::size_t> order(train_prep.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        Rng shuffle_rng(mix64(cfg.seed, static_cast<std::uint64_t>(epoch)));
        shuffle_rng.shuffle(order);
        double loss_sum = 0.0;
        long loss_count = 0;
        int batch_index = 0;
        for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t end =
                std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
            Tape tape;
            std::vector<TensorPtr> logit_rows;
            std::vector<int> labels;
            logit_rows.reserve(end - start);
            for (std::size_t k = start; k < end; ++k) {
                const auto& inst = train_prep[order[k]];
                logit_rows.push_back(model.forward(tape, inst));
                labels.push_back(static_cast<int>(*inst.role));
            }
            auto logits = logit_rows.size() > 1 ? tape.concat(logit_rows, ConcatAxis::Rows)
                                                : logit_rows[0];
            auto loss = tape.cross_entropy(logits, labels, class_weights);
            const double loss_value = loss->at(0, 0);
            if (!std::isfinite(loss_value)) {
                throw NumericError("train: loss diverged at epoch " + std::to_string(epoch) +
                                   ", batch " + std::to_string(batch_index));
            }
            model.zero_grad();
            tape.backward(loss);
            ++step;
            adam_step(params, state, adam, step);
            loss_sum += loss_value * static_cast<double>(end - start);
            loss_count += static_cast<long>(end - start);
            ++batch_index;
        }

        const auto val_report = evaluate_prepared(model, val_prep);
        EpochLog log;
        log.epoch = epoch;
        log.train_loss = loss_sum / static_cast<double>(loss_count);
        log.val_macro_f1 = val_report.macro_f1;
        log.val_accuracy = val_report.accuracy;
        result.logs.push_back(log);

        if (val_report.macro_f1 > best_f1) {
            best_f1 = val_report.macro_f1;
            result.best_epoch = epoch;
            result.best_val_report = val_report;
            result.has_val_report = true;
            for (std::size_t i = 0; i < params.size(); ++i) best_values[i] = params[i]->values;
            stale_epochs = 0;
        } else {
            ++stale_epochs;
            if (stale_epochs >= cfg.early_stop_patience) break;
        }
    }

    for (std::size_t i = 0; i < params.size(); ++i) params[i]->values = best_values[i];
    if (!result.has_val_report && !val_prep.empty()) {
        result.best_val_report = evaluate_prepared(model, val_prep);
        result.has_val_report = true;
    }
    return result;
}

}  // namespace hvv
