#include "hvv/selftest.hpp"

#include <array>
#include <cmath>

#include "hvv/attention.hpp"
#include "hvv/errors.hpp"
#include "hvv/evalkit.hpp"
#include "hvv/gradcheck.hpp"
#include "hvv/model.hpp"
#include "hvv/otke.hpp"
#include "hvv/rng.hpp"
#include "hvv/synth.hpp"

namespace hvv {

namespace {

TensorPtr random_tensor(int rows, int cols, Rng& rng, bool requires_grad, double scale = 1.0) {
    auto t = Tensor2D::make(rows, cols, requires_grad);
    for (double& v : t->values) v = rng.normal() * scale;
    return t;
}

// Scalar objective that keeps every output entry relevant: a fixed random
// weighting of the op output. A plain sum would zero out softmax-like rows.
TensorPtr weighted_sum(Tape& tape, const TensorPtr& out, const TensorPtr& w) {
    return tape.sum_all(tape.hadamard(out, w));
}

struct OpCheck {
    std::string name;
    double error;
};

}  // namespace

const std::vector<std::string>& grad_checked_ops() {
    static const std::vector<std::string> ops = {
        "matmul",        "transpose",      "add",           "affine",
        "hadamard",      "cdiv",           "exp",           "tanh",
        "relu",          "row_softmax",    "logsumexp_rows", "row_sum",
        "add_row_broadcast", "add_col_broadcast", "concat_rows", "concat_cols",
        "pool_mean",     "pool_max",       "dense",         "cross_entropy",
        "reduce_attend", "sinkhorn",       "otke_pool",     "fuse",
        "gcn_embed"};
    return ops;
}

double op_grad_check(const std::string& op, std::uint64_t seed) {
    Rng rng(mix64(seed, fnv1a64(op)));
    const double h = 1e-5;

    if (op == "matmul") {
        auto a = random_tensor(3, 4, rng, true);
        auto b = random_tensor(4, 2, rng, true);
        auto w = random_tensor(3, 2, rng, false);
        return finite_diff_check(
            [&](Tape& t) { return weighted_sum(t, t.matmul(a, b), w); }, {a, b}, h);
    }
    if (op == "transpose") {
        auto a = random_tensor(3, 5, rng, true);
        auto w = random_tensor(5, 3, rng, false);
        return finite_diff_check(
            [&](Tape& t) { return weighted_sum(t, t.transpose(a), w); }, {a}, h);
    }
    if (op == "add") {
        auto a = random_tensor(4, 3, rng, true);
        auto b = random_tensor(4, 3, rng, true);
        auto w = random_tensor(4, 3, rng, false);
        return finite_diff_check([&](Tape& t) { return weighted_sum(t, t.add(a, b), w); }, {a, b},
                                 h);
    }
    if (op == "affine") {
        auto a = random_tensor(4, 3, rng, true);
        auto w = random_tensor(4, 3, rng, false);
        return finite_diff_check(
            [&](Tape& t) { return weighted_sum(t, t.affine(a, -1.7, 0.4), w); }, {a}, h);
    }
    if (op == "hadamard") {
        auto a = random_tensor(4, 3, rng, true);
        auto b = random_tensor(4, 3, rng, true);
        auto w = random_tensor(4, 3, rng, false);
        return finite_diff_check(
            [&](Tape& t) { return weighted_sum(t, t.hadamard(a, b), w); }, {a, b}, h);
    }
    if (op == "cdiv") {
        auto a = random_tensor(4, 3, rng, true);
        for (double& v : a->values) v = 1.5 + std::abs(v);  // keep away from zero
        auto w = random_tensor(4, 3, rng, false);
        return finite_diff_check(
            [&](Tape& t) { return weighted_sum(t, t.cdiv(0.8, a), w); }, {a}, h);
    }
    if (op == "exp") {
        auto a = random_tensor(4, 3, rng, true, 0.5);
        auto w = random_tensor(4, 3, rng, false);
        return finite_diff_check([&](Tape& t) { return weighted_sum(t, t.exp(a), w); }, {a}, h);
    }
    if (op == "tanh") {
        auto a = random_tensor(4, 3, rng, true);
        auto w = random_tensor(4, 3, rng, false);
        return finite_diff_check([&](Tape& t) { return weighted_sum(t, t.tanh(a), w); }, {a}, h);
    }
    if (op == "relu") {
        auto a = random_tensor(4, 3, rng, true);
        for (double& v : a->values) {
            if (std::abs(v) < 1e-3) v += 0.1;  // keep off the kink
        }
        auto w = random_tensor(4, 3, rng, false);
        return finite_diff_check([&](Tape& t) { return weighted_sum(t, t.relu(a), w); }, {a}, h);
    }
    if (op == "row_softmax") {
        auto a = random_tensor(4, 5, rng, true);
        auto w = random_tensor(4, 5, rng, false);
        return finite_diff_check(
            [&](Tape& t) { return weighted_sum(t, t.row_softmax(a), w); }, {a}, h);
    }
    if (op == "logsumexp_rows") {
        auto a = random_tensor(4, 5, rng, true);
        auto w = random_tensor(4, 1, rng, false);
        return finite_diff_check(
            [&](Tape& t) { return weighted_sum(t, t.logsumexp_rows(a), w); }, {a}, h);
    }
    if (op == "row_sum") {
        auto a = random_tensor(4, 5, rng, true);
        auto w = random_tensor(4, 1, rng, false);
        return finite_diff_check(
            [&](Tape& t) { return weighted_sum(t, t.row_sum(a), w); }, {a}, h);
    }
    if (op == "add_row_broadcast") {
        auto a = random_tensor(4, 3, rng, true);
        auto b = random_tensor(1, 3, rng, true);
        auto w = random_tensor(4, 3, rng, false);
        return finite_diff_check(
            [&](Tape& t) { return weighted_sum(t, t.add_row_broadcast(a, b), w); }, {a, b}, h);
    }
    if (op == "add_col_broadcast") {
        auto a = random_tensor(4, 3, rng, true);
        auto b = random_tensor(4, 1, rng, true);
        auto w = random_tensor(4, 3, rng, false);
        return finite_diff_check(
            [&](Tape& t) { return weighted_sum(t, t.add_col_broadcast(a, b), w); }, {a, b}, h);
    }
    if (op == "concat_rows") {
        auto a = random_tensor(2, 3, rng, true);
        auto b = random_tensor(4, 3, rng, true);
        auto w = random_tensor(6, 3, rng, false);
        return finite_diff_check(
            [&](Tape& t) { return weighted_sum(t, t.concat({a, b}, ConcatAxis::Rows), w); },
            {a, b}, h);
    }
    if (op == "concat_cols") {
        auto a = random_tensor(3, 2, rng, true);
        auto b = random_tensor(3, 4, rng, true);
        auto w = random_tensor(3, 6, rng, false);
        return finite_diff_check(
            [&](Tape& t) { return weighted_sum(t, t.concat({a, b}, ConcatAxis::Cols), w); },
            {a, b}, h);
    }
    if (op == "pool_mean") {
        auto a = random_tensor(5, 4, rng, true);
        auto w = random_tensor(1, 4, rng, false);
        return finite_diff_check(
            [&](Tape& t) { return weighted_sum(t, t.pool(a, PoolMode::MeanRows), w); }, {a}, h);
    }
    if (op == "pool_max") {
        auto a = random_tensor(5, 4, rng, true);
        auto w = random_tensor(1, 4, rng, false);
        return finite_diff_check(
            [&](Tape& t) { return weighted_sum(t, t.pool(a, PoolMode::MaxRows), w); }, {a}, h);
    }
    if (op == "dense") {
        auto x = random_tensor(4, 6, rng, true);
        auto wt = random_tensor(6, 3, rng, true);
        auto b = random_tensor(1, 3, rng, true);
        auto w = random_tensor(4, 3, rng, false);
        return finite_diff_check(
            [&](Tape& t) { return weighted_sum(t, t.dense(x, wt, b, Activation::Tanh), w); },
            {x, wt, b}, h);
    }
    if (op == "cross_entropy") {
        auto logits = random_tensor(5, kNumRoles, rng, true);
        std::vector<int> labels;
        for (int i = 0; i < 5; ++i) labels.push_back(static_cast<int>(rng.below(kNumRoles)));
        return finite_diff_check(
            [&](Tape& t) { return t.cross_entropy(logits, labels); }, {logits}, h);
    }
    if (op == "reduce_attend") {
        AttnTransform attn(6, 3, rng);
        auto x = random_tensor(5, 6, rng, true);
        auto w = random_tensor(5, 3, rng, false);
        return finite_diff_check(
            [&](Tape& t) { return weighted_sum(t, attn.reduce_attend(t, x), w); },
            {x, attn.weight(), attn.bias()}, h);
    }
    if (op == "sinkhorn") {
        auto cost = random_tensor(5, 4, rng, true);
        auto w = random_tensor(5, 4, rng, false);
        return finite_diff_check(
            [&](Tape& t) {
                auto plan = sinkhorn(t, cost, 0.1, 25);
                return weighted_sum(t, plan.T, w);
            },
            {cost}, h);
    }
    if (op == "otke_pool") {
        Rng ref_rng(mix64(seed, 0x7265667331ULL));
        ReferenceSet refs(4, 3, ref_rng);
        OtkeConfig cfg;
        cfg.p = 4;
        cfg.max_iterations = 25;
        auto x = random_tensor(6, 3, rng, true, 0.7);
        auto w = random_tensor(4, 3, rng, false);
        return finite_diff_check(
            [&](Tape& t) { return weighted_sum(t, otke_pool(t, x, refs, cfg), w); },
            {x, refs.z}, h);
    }
    if (op == "fuse") {
        Rng ref_rng(mix64(seed, 0x7265667332ULL));
        ReferenceSet refs(5, 3, ref_rng);
        OtkeConfig cfg;
        cfg.p = 5;
        cfg.max_iterations = 25;
        auto a = random_tensor(4, 3, rng, true, 0.7);
        auto b = random_tensor(3, 3, rng, true, 0.7);
        auto w = random_tensor(5, 3, rng, false);
        return finite_diff_check(
            [&](Tape& t) { return weighted_sum(t, fuse(t, a, b, refs, cfg), w); },
            {a, b, refs.z}, h);
    }
    if (op == "gcn_embed") {
        Rng layer_rng(mix64(seed, 0x67636e00ULL));
        GcnLayer l1(4, 4, layer_rng);
        GcnLayer l2(4, 3, layer_rng);
        EdgeDump dump;
        dump.triples.push_back({"mask", "RelatedTo", "face covering", 2.5});
        auto graph = build_graph({"mask", "virus"}, {"street"}, "alex", dump, 5);
        auto feats = random_tensor(graph.node_count(), 4, rng, true, 0.7);
        auto w = random_tensor(1, 3, rng, false);
        return finite_diff_check(
            [&](Tape& t) { return weighted_sum(t, gcn_embed(t, graph, feats, l1, l2), w); },
            {feats, l1.weight, l2.weight}, h);
    }
    throw ValidationError("unknown grad-checked op: " + op);
}

double model_grad_check(std::uint64_t seed) {
    ModelConfig cfg;
    cfg.l = 6;
    cfg.d = 8;
    cfg.l_m = 4;
    cfg.d_m = 8;
    cfg.d_prime = 4;
    cfg.d_g = 4;
    cfg.p = 6;
    cfg.iterations = 12;
    RoleClassifier model(cfg, seed);

    EdgeDump dump;
    dump.triples.push_back({"zq1", "RelatedTo", "laurel", 2.5});
    dump.triples.push_back({"vaccine", "RelatedTo", "medicine", 3.0});
    MemeInstance inst;
    inst.id = "fixture";
    inst.domain = "synthetic";
    inst.split = "train";
    inst.ocr_text = "the brave alex turner of the zq1 near a vaccine";
    inst.caption = "alex turner is celebrated by the crowd";
    inst.face_labels = {"alex turner"};
    inst.image_ref = "img_hero_1";
    inst.entity = "alex turner";
    inst.role = RoleLabel::Hero;
    const auto prep = model.prepare(inst, dump);

    const std::vector<int> labels = {static_cast<int>(*inst.role)};
    return finite_diff_check(
        [&](Tape& t) { return t.cross_entropy(model.forward(t, prep), labels); },
        model.parameters(), 1e-5);
}

std::vector<SelfTestResult> run_selftests() {
    std::vector<SelfTestResult> results;

    {
        SelfTestResult r;
        r.suite = "gradient checks (primitive ops)";
        r.tolerance = 1e-4;
        double worst = 0.0;
        for (const auto& op : grad_checked_ops()) {
            for (std::uint64_t seed = 1; seed <= 3; ++seed) {
                worst = std::max(worst, op_grad_check(op, seed));
            }
        }
        r.max_error = worst;
        r.passed = worst < r.tolerance;
        results.push_back(r);
    }
    {
        SelfTestResult r;
        r.suite = "gradient check (full forward)";
        r.tolerance = 1e-3;
        double worst = 0.0;
        for (std::uint64_t seed = 1; seed <= 3; ++seed) {
            worst = std::max(worst, model_grad_check(seed));
        }
        r.max_error = worst;
        r.passed = worst < r.tolerance;
        results.push_back(r);
    }
    {
        SelfTestResult r;
        r.suite = "sinkhorn marginals";
        r.tolerance = 1e-6;
        double worst = 0.0;
        const std::array<double, 3> epsilons = {0.05, 0.1, 1.0};
        Rng rng(20240817);
        for (int trial = 0; trial < 60; ++trial) {
            const int n = 1 + static_cast<int>(rng.below(16));
            const int p = 1 + static_cast<int>(rng.below(16));
            auto cost = random_tensor(n, p, rng, false);
            Tape tape;
            const auto plan =
                sinkhorn(tape, cost, epsilons[static_cast<std::size_t>(trial % 3)], 4000);
            worst = std::max(worst, marginal_violation(*plan.T));
        }
        r.max_error = worst;
        r.passed = worst < r.tolerance;
        results.push_back(r);
    }
    {
        SelfTestResult r;
        r.suite = "metric oracle";
        r.tolerance = 0.0;
        double worst = 0.0;
        Rng rng(424242);
        for (int trial = 0; trial < 1000; ++trial) {
            const std::size_t n = 1 + rng.below(40);
            std::vector<RoleLabel> gold(n), pred(n);
            for (std::size_t i = 0; i < n; ++i) {
                gold[i] = static_cast<RoleLabel>(rng.below(kNumRoles));
                pred[i] = static_cast<RoleLabel>(rng.below(kNumRoles));
            }
            const auto report = score(gold, pred);
            // independent tally straight from the definitions
            double macro_f1 = 0.0;
            long correct = 0;
            for (int c = 0; c < kNumRoles; ++c) {
                long tp = 0, fp = 0, fn = 0;
                for (std::size_t i = 0; i < n; ++i) {
                    const bool g = gold[i] == static_cast<RoleLabel>(c);
                    const bool p = pred[i] == static_cast<RoleLabel>(c);
                    if (g && p) ++tp;
                    if (!g && p) ++fp;
                    if (g && !p) ++fn;
                }
                const double prec = tp + fp == 0 ? 0.0 : static_cast<double>(tp) / (tp + fp);
                const double rec = tp + fn == 0 ? 0.0 : static_cast<double>(tp) / (tp + fn);
                const double f1 = prec + rec == 0.0 ? 0.0 : 2.0 * prec * rec / (prec + rec);
                macro_f1 += f1 / kNumRoles;
            }
            for (std::size_t i = 0; i < n; ++i) {
                if (gold[i] == pred[i]) ++correct;
            }
            const double acc = static_cast<double>(correct) / static_cast<double>(n);
            worst = std::max(worst, std::abs(report.macro_f1 - macro_f1));
            worst = std::max(worst, std::abs(report.accuracy - acc));
        }
        r.max_error = worst;
        r.passed = worst <= r.tolerance;
        results.push_back(r);
    }
    return results;
}

}  // namespace hvv
