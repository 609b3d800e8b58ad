#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hvv/attention.hpp"
#include "hvv/config.hpp"
#include "hvv/dataset.hpp"
#include "hvv/encoders.hpp"
#include "hvv/evalkit.hpp"
#include "hvv/knowledge.hpp"
#include "hvv/otke.hpp"
#include "hvv/tensor.hpp"

namespace hvv {

// Forward-pass byproducts for inspection dumps.
struct Diagnostics {
    TensorPtr text_attn;        // attention over the reduced text rows, vision branch
    TensorPtr vision_attn;      // attention over the reduced image patches
    TensorPtr graph_text_attn;  // attention over the reduced text rows, commonsense branch
    TensorPtr fusion_attn;      // attention inside the fusion module
    TransportPlan vision_plan;
    TransportPlan graph_plan;
};

// Frozen per-instance inputs: encodings and the commonsense graph are pure
// functions of the instance and can be computed once.
struct PreparedInstance {
    std::string id;
    std::string entity;
    std::optional<RoleLabel> role;
    TensorPtr text;        // l x d
    TensorPtr image;       // l_m x d_m, null when the vision branch is off
    CommonsenseGraph graph;
    TensorPtr node_embed;  // |V| x d, null when the commonsense branch is off
};

// The per-entity role classifier: text encoding fused with the vision and
// commonsense branches through transport-based pooling (or plain
// concatenation in the CAT ablation), then reduced, self-attended, pooled
// and classified into the four roles.
class RoleClassifier {
public:
    RoleClassifier(const ModelConfig& cfg, std::uint64_t seed);

    const ModelConfig& config() const { return cfg_; }

    // Stable construction order; names are unique.
    const std::vector<std::pair<std::string, TensorPtr>>& named_parameters() const {
        return params_;
    }
    std::vector<TensorPtr> parameters() const;
    long parameter_count() const;
    void zero_grad() const;

    PreparedInstance prepare(const MemeInstance& inst, const EdgeDump& dump) const;
    std::vector<PreparedInstance> prepare_all(const std::vector<MemeInstance>& instances,
                                              const EdgeDump& dump) const;

    // logits: 1 x 4
    TensorPtr forward(Tape& tape, const PreparedInstance& inst,
                      Diagnostics* diag = nullptr) const;

    // argmax with ties broken toward the lowest class index
    Prediction predict_one(const PreparedInstance& inst) const;
    std::vector<Prediction> predict(const std::vector<MemeInstance>& instances,
                                    const EdgeDump& dump) const;

    const SyntheticTextEncoder& text_encoder() const { return text_enc_; }
    const SyntheticVisionEncoder& vision_encoder() const { return vision_enc_; }

private:
    ModelConfig cfg_;
    SyntheticTextEncoder text_enc_;
    SyntheticVisionEncoder vision_enc_;

    // vision branch
    std::optional<AttnTransform> text_attn_;
    std::optional<AttnTransform> vision_attn_;
    std::optional<ReferenceSet> vision_refs_;
    TensorPtr vision_cat_w_, vision_cat_b_;

    // commonsense branch
    std::optional<AttnTransform> graph_attn_;
    TensorPtr node_proj_w_, node_proj_b_;
    GcnLayer gcn1_, gcn2_;
    std::optional<ReferenceSet> graph_refs_;
    TensorPtr graph_cat_w_, graph_cat_b_;

    // fusion + classifier
    TensorPtr fusion_w_, fusion_b_;
    TensorPtr classifier_w_, classifier_b_;

    std::vector<std::pair<std::string, TensorPtr>> params_;

    TensorPtr cat_fuse(Tape& tape, const TensorPtr& a, const TensorPtr& b, const TensorPtr& w,
                       const TensorPtr& bias) const;

    friend void load_parameters(RoleClassifier& model,
                                const std::vector<std::pair<std::string, TensorPtr>>& params);
};

// Overwrites model parameters from (name, tensor) pairs in order, checking
// names and shapes.
void load_parameters(RoleClassifier& model,
                     const std::vector<std::pair<std::string, TensorPtr>>& params);

}  // namespace hvv
