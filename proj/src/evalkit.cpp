#include "hvv/evalkit.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "hvv/errors.hpp"
#include "hvv/rng.hpp"

namespace hvv {

using nlohmann::json;

namespace {

double safe_div(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

double f1_from(double p, double r) { return (p + r) == 0.0 ? 0.0 : 2.0 * p * r / (p + r); }

}  // namespace

EvalReport score(const std::vector<RoleLabel>& gold, const std::vector<RoleLabel>& pred) {
    if (gold.size() != pred.size()) {
        throw ValidationError("score: gold has " + std::to_string(gold.size()) +
                              " labels, predictions have " + std::to_string(pred.size()));
    }
    if (gold.empty()) throw ValidationError("score: needs at least one label");
    EvalReport r;
    r.total = static_cast<long>(gold.size());
    for (std::size_t i = 0; i < gold.size(); ++i) {
        r.confusion[static_cast<std::size_t>(gold[i])][static_cast<std::size_t>(pred[i])] += 1;
    }
    long correct = 0;
    for (int c = 0; c < kNumRoles; ++c) {
        long tp = r.confusion[c][c];
        long gold_c = 0, pred_c = 0;
        for (int k = 0; k < kNumRoles; ++k) {
            gold_c += r.confusion[c][k];
            pred_c += r.confusion[k][c];
        }
        r.support[c] = gold_c;
        r.precision[c] = safe_div(static_cast<double>(tp), static_cast<double>(pred_c));
        r.recall[c] = safe_div(static_cast<double>(tp), static_cast<double>(gold_c));
        r.f1[c] = f1_from(r.precision[c], r.recall[c]);
        correct += tp;
    }
    for (int c = 0; c < kNumRoles; ++c) {
        r.macro_precision += r.precision[c] / kNumRoles;
        r.macro_recall += r.recall[c] / kNumRoles;
        r.macro_f1 += r.f1[c] / kNumRoles;
    }
    r.accuracy = static_cast<double>(correct) / static_cast<double>(r.total);
    return r;
}

std::string EvalReport::to_json() const {
    json j;
    j["accuracy"] = accuracy;
    j["total"] = total;
    j["macro"] = {{"precision", macro_precision}, {"recall", macro_recall}, {"f1", macro_f1}};
    j["per_class"] = json::array();
    for (int c = 0; c < kNumRoles; ++c) {
        j["per_class"].push_back({{"label", role_name(static_cast<RoleLabel>(c))},
                                  {"precision", precision[c]},
                                  {"recall", recall[c]},
                                  {"f1", f1[c]},
                                  {"support", support[c]}});
    }
    j["confusion"] = json::array();
    for (int g = 0; g < kNumRoles; ++g) {
        json row = json::array();
        for (int p = 0; p < kNumRoles; ++p) row.push_back(confusion[g][p]);
        j["confusion"].push_back(row);
    }
    return j.dump(2);
}

std::string EvalReport::to_text() const {
    std::ostringstream out;
    out << std::fixed << std::setprecision(3);
    out << std::left << std::setw(10) << "class" << std::right << std::setw(8) << "prec"
        << std::setw(8) << "rec" << std::setw(8) << "f1" << std::setw(10) << "support" << "\n";
    for (int c = 0; c < kNumRoles; ++c) {
        out << std::left << std::setw(10) << role_name(static_cast<RoleLabel>(c)) << std::right
            << std::setw(8) << precision[c] << std::setw(8) << recall[c] << std::setw(8) << f1[c]
            << std::setw(10) << support[c] << "\n";
    }
    out << std::left << std::setw(10) << "macro" << std::right << std::setw(8) << macro_precision
        << std::setw(8) << macro_recall << std::setw(8) << macro_f1 << std::setw(10) << total
        << "\n";
    out << "accuracy " << accuracy << "\n";
    return out.str();
}

std::string EvalReport::confusion_csv() const {
    std::ostringstream out;
    out << "gold\\pred";
    for (int p = 0; p < kNumRoles; ++p) out << "," << role_name(static_cast<RoleLabel>(p));
    out << "\n";
    for (int g = 0; g < kNumRoles; ++g) {
        out << role_name(static_cast<RoleLabel>(g));
        for (int p = 0; p < kNumRoles; ++p) out << "," << confusion[g][p];
        out << "\n";
    }
    return out.str();
}

namespace {

// macro-F1 tallied directly; avoids building a full report per resample
double macro_f1_of(const std::vector<RoleLabel>& gold, const std::vector<RoleLabel>& pred,
                   const std::vector<std::size_t>& idx) {
    long conf[kNumRoles][kNumRoles] = {};
    for (const std::size_t i : idx) {
        conf[static_cast<int>(gold[i])][static_cast<int>(pred[i])] += 1;
    }
    double macro = 0.0;
    for (int c = 0; c < kNumRoles; ++c) {
        long tp = conf[c][c];
        long gold_c = 0, pred_c = 0;
        for (int k = 0; k < kNumRoles; ++k) {
            gold_c += conf[c][k];
            pred_c += conf[k][c];
        }
        const double p = safe_div(static_cast<double>(tp), static_cast<double>(pred_c));
        const double r = safe_div(static_cast<double>(tp), static_cast<double>(gold_c));
        macro += f1_from(p, r) / kNumRoles;
    }
    return macro;
}

}  // namespace

BootstrapResult bootstrap_test(const std::vector<RoleLabel>& gold,
                               const std::vector<RoleLabel>& pred_a,
                               const std::vector<RoleLabel>& pred_b, int resample_size,
                               int simulations, std::uint64_t seed) {
    if (gold.empty()) throw ValidationError("bootstrap_test: empty inputs");
    if (gold.size() != pred_a.size() || gold.size() != pred_b.size()) {
        throw ValidationError("bootstrap_test: prediction lengths do not match gold");
    }
    if (resample_size < 1 || simulations < 1) {
        throw ValidationError("bootstrap_test: resample size and simulations must be >= 1");
    }
    BootstrapResult result;
    result.resample_size = resample_size;
    result.simulations = simulations;
    result.seed = seed;
    {
        std::vector<std::size_t> all(gold.size());
        for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
        result.observed_delta = macro_f1_of(gold, pred_b, all) - macro_f1_of(gold, pred_a, all);
    }
    long worse_or_equal = 0;
    std::vector<std::size_t> idx(static_cast<std::size_t>(resample_size));
    for (int s = 0; s < simulations; ++s) {
        Rng rng(mix64(seed, static_cast<std::uint64_t>(s)));
        for (auto& i : idx) i = static_cast<std::size_t>(rng.below(gold.size()));
        const double fa = macro_f1_of(gold, pred_a, idx);
        const double fb = macro_f1_of(gold, pred_b, idx);
        if (fb <= fa) ++worse_or_equal;
    }
    result.p_value = static_cast<double>(worse_or_equal) / static_cast<double>(simulations);
    return result;
}

std::string BootstrapResult::to_json() const {
    json j;
    j["observed_delta"] = observed_delta;
    j["p_value"] = p_value;
    j["resample_size"] = resample_size;
    j["simulations"] = simulations;
    j["seed"] = seed;
    return j.dump(2);
}

std::vector<Prediction> load_predictions(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read predictions: " + path);
    std::vector<Prediction> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw FormatError("line " + std::to_string(lineno) + ": invalid JSON: " + e.what());
        }
        Prediction p;
        if (!j.contains("id") || !j.contains("entity") || !j.contains("role")) {
            throw FormatError("line " + std::to_string(lineno) +
                              ": prediction needs id, entity and role");
        }
        p.id = j["id"].get<std::string>();
        p.entity = j["entity"].get<std::string>();
        try {
            p.role = role_from_name(j["role"].get<std::string>());
        } catch (const ValidationError& e) {
            throw FormatError("line " + std::to_string(lineno) + ": " + e.what());
        }
        if (j.contains("probs")) {
            const auto& probs = j["probs"];
            if (!probs.is_array() || probs.size() != kNumRoles) {
                throw FormatError("line " + std::to_string(lineno) + ": probs must have " +
                                  std::to_string(kNumRoles) + " entries");
            }
            for (int c = 0; c < kNumRoles; ++c) p.probs[c] = probs[c].get<double>();
        }
        out.push_back(std::move(p));
    }
    return out;
}

void save_predictions(const std::string& path, const std::vector<Prediction>& preds) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write predictions: " + path);
    for (const auto& p : preds) {
        json j;
        j["id"] = p.id;
        j["entity"] = p.entity;
        j["role"] = role_name(p.role);
        j["probs"] = p.probs;
        out << j.dump() << "\n";
    }
}

std::vector<EntityRow> entity_report(const std::vector<MemeInstance>& instances,
                                     const std::vector<Prediction>& preds, int top_k) {
    std::map<std::pair<std::string, std::string>, RoleLabel> pred_by_key;
    for (const auto& p : preds) pred_by_key[{p.id, p.entity}] = p.role;
    std::map<std::string, EntityRow> rows;
    for (const auto& inst : instances) {
        if (!inst.role) continue;
        auto it = pred_by_key.find({inst.id, inst.entity});
        if (it == pred_by_key.end()) continue;  // entity absent from preds
        auto& row = rows[inst.entity];
        row.entity = inst.entity;
        row.support += 1;
        row.gold_counts[static_cast<std::size_t>(*inst.role)] += 1;
        if (it->second == *inst.role) row.correct += 1;
    }
    std::vector<EntityRow> out;
    out.reserve(rows.size());
    for (auto& [_, row] : rows) {
        row.recall = row.support > 0 ? static_cast<double>(row.correct) / row.support : 0.0;
        out.push_back(row);
    }
    std::sort(out.begin(), out.end(), [](const EntityRow& a, const EntityRow& b) {
        if (a.support != b.support) return a.support > b.support;
        return a.entity < b.entity;
    });
    if (top_k >= 0 && static_cast<std::size_t>(top_k) < out.size()) out.resize(static_cast<std::size_t>(top_k));
    return out;
}

DatasetStats dataset_stats(const std::vector<MemeInstance>& instances) {
    DatasetStats stats;
    std::map<std::string, DomainStats> by_domain;
    std::map<std::string, std::set<std::string>> meme_ids;
    auto split_index = [](const std::string& s) { return s == "train" ? 0 : s == "val" ? 1 : 2; };
    for (const auto& inst : instances) {
        auto& d = by_domain[inst.domain];
        d.domain = inst.domain;
        meme_ids[inst.domain].insert(inst.id);
        if (inst.role) d.role_counts[static_cast<std::size_t>(*inst.role)] += 1;
        d.total += 1;
        d.split_counts[static_cast<std::size_t>(split_index(inst.split))] += 1;
        stats.total += 1;
        stats.split_counts[static_cast<std::size_t>(split_index(inst.split))] += 1;
    }
    for (auto& [domain, d] : by_domain) {
        d.memes = static_cast<long>(meme_ids[domain].size());
        stats.domains.push_back(d);
    }
    return stats;
}

std::string DatasetStats::to_text() const {
    std::ostringstream out;
    out << std::left << std::setw(12) << "domain" << std::right << std::setw(8) << "memes"
        << std::setw(8) << "hero" << std::setw(9) << "villain" << std::setw(8) << "victim"
        << std::setw(8) << "other" << std::setw(8) << "total" << "\n";
    std::array<long, kNumRoles> totals{};
    long memes = 0;
    for (const auto& d : domains) {
        out << std::left << std::setw(12) << d.domain << std::right << std::setw(8) << d.memes
            << std::setw(8) << d.role_counts[0] << std::setw(9) << d.role_counts[1]
            << std::setw(8) << d.role_counts[2] << std::setw(8) << d.role_counts[3]
            << std::setw(8) << d.total << "\n";
        for (int c = 0; c < kNumRoles; ++c) totals[c] += d.role_counts[c];
        memes += d.memes;
    }
    out << std::left << std::setw(12) << "all" << std::right << std::setw(8) << memes
        << std::setw(8) << totals[0] << std::setw(9) << totals[1] << std::setw(8) << totals[2]
        << std::setw(8) << totals[3] << std::setw(8) << total << "\n";
    if (total > 0) {
        out << std::fixed << std::setprecision(1);
        out << "split ratio: train " << 100.0 * split_counts[0] / total << "% / val "
            << 100.0 * split_counts[1] / total << "% / test " << 100.0 * split_counts[2] / total
            << "%\n";
    }
    return out.str();
}

std::string DatasetStats::to_json() const {
    json j;
    j["domains"] = json::array();
    for (const auto& d : domains) {
        j["domains"].push_back({{"domain", d.domain},
                                {"memes", d.memes},
                                {"hero", d.role_counts[0]},
                                {"villain", d.role_counts[1]},
                                {"victim", d.role_counts[2]},
                                {"other", d.role_counts[3]},
                                {"total", d.total},
                                {"train", d.split_counts[0]},
                                {"val", d.split_counts[1]},
                                {"test", d.split_counts[2]}});
    }
    j["total"] = total;
    j["split"] = {{"train", split_counts[0]}, {"val", split_counts[1]}, {"test", split_counts[2]}};
    return j.dump(2);
}

}  // namespace hvv
