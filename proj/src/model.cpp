#include "hvv/model.hpp"

#include <cmath>

#include "hvv/errors.hpp"
#include "hvv/rng.hpp"

namespace hvv {

namespace {

TensorPtr dense_init(int rows, int cols, Rng& rng) {
    auto w = Tensor2D::make(rows, cols, true);
    const double scale = 1.0 / std::sqrt(static_cast<double>(rows));
    for (double& v : w->values) v = rng.normal() * scale;
    return w;
}

TensorPtr bias_init(int cols) { return Tensor2D::make(1, cols, true); }

}  // namespace

RoleClassifier::RoleClassifier(const ModelConfig& cfg, std::uint64_t seed)
    : cfg_(cfg),
      text_enc_(mix64(seed, 0x74657874ULL), cfg.d, cfg.l),
      vision_enc_(mix64(seed, 0x696d6167ULL), cfg.l_m, cfg.d_m) {
    cfg_.validate();
    Rng rng(mix64(seed, 0x6d6f64656cULL));

    auto track = [&](const std::string& name, const TensorPtr& t) {
        params_.emplace_back(name, t);
    };

    int fusion_in = cfg_.d;
    if (cfg_.use_vision) {
        text_attn_.emplace(cfg_.d, cfg_.d_prime, rng);
        track("text_attn.w", text_attn_->weight());
        track("text_attn.b", text_attn_->bias());
        vision_attn_.emplace(cfg_.d_m, cfg_.d_prime, rng);
        track("vision_attn.w", vision_attn_->weight());
        track("vision_attn.b", vision_attn_->bias());
        if (cfg_.fusion == FusionMode::Otk) {
            vision_refs_.emplace(cfg_.p, cfg_.d_prime, rng);
            track("vision_refs", vision_refs_->z);
        } else {
            vision_cat_w_ = dense_init(2 * cfg_.d_prime, cfg_.d_prime, rng);
            vision_cat_b_ = bias_init(cfg_.d_prime);
            track("vision_cat.w", vision_cat_w_);
            track("vision_cat.b", vision_cat_b_);
        }
        fusion_in += cfg_.d_prime;
    }
    if (cfg_.use_commonsense) {
        graph_attn_.emplace(cfg_.d, cfg_.d_prime, rng);
        track("graph_attn.w", graph_attn_->weight());
        track("graph_attn.b", graph_attn_->bias());
        node_proj_w_ = dense_init(cfg_.d, cfg_.d_g, rng);
        node_proj_b_ = bias_init(cfg_.d_g);
        track("node_proj.w", node_proj_w_);
        track("node_proj.b", node_proj_b_);
        gcn1_ = GcnLayer(cfg_.d_g, cfg_.d_g, rng);
        gcn2_ = GcnLayer(cfg_.d_g, cfg_.d_prime, rng);
        track("gcn1.w", gcn1_.weight);
        track("gcn2.w", gcn2_.weight);
        if (cfg_.fusion == FusionMode::Otk) {
            graph_refs_.emplace(cfg_.p, cfg_.d_prime, rng);
            track("graph_refs", graph_refs_->z);
        } else {
            graph_cat_w_ = dense_init(2 * cfg_.d_prime, cfg_.d_prime, rng);
            graph_cat_b_ = bias_init(cfg_.d_prime);
            track("graph_cat.w", graph_cat_w_);
            track("graph_cat.b", graph_cat_b_);
        }
        fusion_in += cfg_.d_prime;
    }
    fusion_w_ = dense_init(fusion_in, cfg_.d, rng);
    fusion_b_ = bias_init(cfg_.d);
    track("fusion_reduce.w", fusion_w_);
    track("fusion_reduce.b", fusion_b_);
    classifier_w_ = dense_init(cfg_.d, kNumRoles, rng);
    classifier_b_ = bias_init(kNumRoles);
    track("classifier.w", classifier_w_);
    track("classifier.b", classifier_b_);
}

std::vector<TensorPtr> RoleClassifier::parameters() const {
    std::vector<TensorPtr> out;
    out.reserve(params_.size());
    for (const auto& [_, t] : params_) out.push_back(t);
    return out;
}

long RoleClassifier::parameter_count() const {
    long n = 0;
    for (const auto& [_, t] : params_) n += static_cast<long>(t->size());
    return n;
}

void RoleClassifier::zero_grad() const {
    for (const auto& [_, t] : params_) t->zero_grad();
}

PreparedInstance RoleClassifier::prepare(const MemeInstance& inst, const EdgeDump& dump) const {
    PreparedInstance prep;
    prep.id = inst.id;
    prep.entity = inst.entity;
    prep.role = inst.role;
    const std::string caption = cfg_.use_caption ? inst.caption : std::string();
    const std::vector<std::string> faces =
        cfg_.use_face_labels ? inst.face_labels : std::vector<std::string>();
    prep.text = text_enc_.encode_text(inst.ocr_text, inst.entity, caption, faces);
    if (cfg_.use_vision) prep.image = vision_enc_.encode_image(inst.image_ref);
    if (cfg_.use_commonsense) {
        const auto ocr_chunks = inst.ocr_chunks_override
                                    ? *inst.ocr_chunks_override
                                    : extract_noun_chunks(tokenize(inst.ocr_text));
        const auto caption_chunks =
            cfg_.use_caption
                ? (inst.caption_chunks_override ? *inst.caption_chunks_override
                                                : extract_noun_chunks(tokenize(inst.caption)))
                : std::vector<std::string>();
        prep.graph = build_graph(ocr_chunks, caption_chunks, inst.entity, dump, cfg_.max_neighbors);
        prep.node_embed = node_features(prep.graph, text_enc_);
    }
    return prep;
}

std::vector<PreparedInstance> RoleClassifier::prepare_all(
    const std::vector<MemeInstance>& instances, const EdgeDump& dump) const {
    std::vector<PreparedInstance> out;
    out.reserve(instances.size());
    for (const auto& inst : instances) out.push_back(prepare(inst, dump));
    return out;
}

TensorPtr RoleClassifier::cat_fuse(Tape& tape, const TensorPtr& a, const TensorPtr& b,
                                   const TensorPtr& w, const TensorPtr& bias) const {
    auto pooled = tape.pool(b, PoolMode::MeanRows);
    auto tiled = tape.matmul(Tensor2D::full(a->rows, 1, 1.0), pooled);
    auto joined = tape.concat({a, tiled}, ConcatAxis::Cols);
    return tape.dense(joined, w, bias, Activation::Tanh);
}

TensorPtr RoleClassifier::forward(Tape& tape, const PreparedInstance& inst,
                                  Diagnostics* diag) const {
    const auto otke_cfg = cfg_.otke();
    std::vector<TensorPtr> branches = {inst.text};
    if (cfg_.use_vision) {
        auto zt = text_attn_->reduce_attend(tape, inst.text, diag ? &diag->text_attn : nullptr);
        auto em = vision_attn_->reduce_attend(tape, inst.image, diag ? &diag->vision_attn : nullptr);
        TensorPtr zm;
        if (cfg_.fusion == FusionMode::Otk) {
            zm = fuse(tape, zt, em, *vision_refs_, otke_cfg, diag ? &diag->vision_plan : nullptr);
        } else {
            zm = cat_fuse(tape, zt, em, vision_cat_w_, vision_cat_b_);
        }
        branches.push_back(zm);
    }
    if (cfg_.use_commonsense) {
        auto zg = graph_attn_->reduce_attend(tape, inst.text,
                                             diag ? &diag->graph_text_attn : nullptr);
        auto feats = tape.dense(inst.node_embed, node_proj_w_, node_proj_b_, Activation::Tanh);
        auto eg = gcn_embed(tape, inst.graph, feats, gcn1_, gcn2_);
        TensorPtr zc;
        if (cfg_.fusion == FusionMode::Otk) {
            zc = fuse(tape, zg, eg, *graph_refs_, otke_cfg, diag ? &diag->graph_plan : nullptr);
        } else {
            zc = cat_fuse(tape, zg, eg, graph_cat_w_, graph_cat_b_);
        }
        branches.push_back(zc);
    }
    auto fused = branches.size() > 1 ? tape.concat(branches, ConcatAxis::Cols) : branches[0];
    auto reduced = tape.dense(fused, fusion_w_, fusion_b_, Activation::Tanh);
    auto attended = self_attend(tape, reduced, diag ? &diag->fusion_attn : nullptr);
    auto pooled = tape.pool(attended, PoolMode::MeanRows);
    return tape.dense(pooled, classifier_w_, classifier_b_, Activation::None);
}

Prediction RoleClassifier::predict_one(const PreparedInstance& inst) const {
    Tape tape;
    auto logits = forward(tape, inst);
    Prediction pred;
    pred.id = inst.id;
    pred.entity = inst.entity;
    const auto probs = softmax_row(logits->values);
    int best = 0;
    for (int c = 1; c < kNumRoles; ++c) {
        if (probs[static_cast<std::size_t>(c)] > probs[static_cast<std::size_t>(best)]) best = c;
    }
    pred.role = static_cast<RoleLabel>(best);
    for (int c = 0; c < kNumRoles; ++c) pred.probs[static_cast<std::size_t>(c)] = probs[static_cast<std::size_t>(c)];
    return pred;
}

std::vector<Prediction> RoleClassifier::predict(const std::vector<MemeInstance>& instances,
                                                const EdgeDump& dump) const {
    std::vector<Prediction> out;
    out.reserve(instances.size());
    for (const auto& inst : instances) out.push_back(predict_one(prepare(inst, dump)));
    return out;
}

void load_parameters(RoleClassifier& model,
                     const std::vector<std::pair<std::string, TensorPtr>>& params) {
    if (params.size() != model.params_.size()) {
        throw FormatError("checkpoint has " + std::to_string(params.size()) +
                          " parameters, model expects " + std::to_string(model.params_.size()));
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
        const auto& [name, src] = params[i];
        auto& [expected_name, dst] = model.params_[i];
        if (name != expected_name) {
            throw FormatError("checkpoint parameter '" + name + "' does not match model '" +
                              expected_name + "'");
        }
        if (src->rows != dst->rows || src->cols != dst->cols) {
            throw FormatError("checkpoint parameter '" + name + "' has shape " +
                              src->shape_str() + ", model expects " + dst->shape_str());
        }
        dst->values = src->values;
        dst->zero_grad();
    }
}

}  // namespace hvv
