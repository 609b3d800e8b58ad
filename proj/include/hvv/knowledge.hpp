#pragma once

#include <string>
#include <vector>

#include "hvv/encoders.hpp"
#include "hvv/tensor.hpp"

namespace hvv {

struct EdgeTriple {
    std::string head;
    std::string relation;
    std::string tail;
    double weight = 0.0;
};

// Knowledge edges loaded from a TSV dump (head, relation, tail, weight).
struct EdgeDump {
    std::vector<EdgeTriple> triples;
    int skipped_lines = 0;
};

enum class NodeKind { OcrChunk, CaptionChunk, Commonsense, Entity, Aggregator };

struct GraphNode {
    int id = 0;
    NodeKind kind = NodeKind::OcrChunk;
    std::string text;
};

// Entity-centric graph over noun chunks, matched knowledge tails, the entity
// node and one aggregator node. Adjacency is symmetric with a zero diagonal.
struct CommonsenseGraph {
    std::vector<GraphNode> nodes;
    std::vector<std::pair<int, int>> edges;  // i < j, insertion order
    TensorPtr adjacency;                     // |V| x |V|, 0/1

    int node_count() const { return static_cast<int>(nodes.size()); }
};

const char* node_kind_name(NodeKind kind);

// Maximal runs of non-stopword tokens of length >= 2 characters, joined by
// single spaces.
std::vector<std::string> extract_noun_chunks(const std::vector<std::string>& tokens);

bool is_stopword(const std::string& token);

EdgeDump load_edge_dump(const std::string& path);

// Construction rules: OCR chunks form a clique; caption chunks form a clique;
// the aggregator connects to every chunk; the entity node connects to the
// aggregator and to chunks equal to the entity (case-insensitive); each chunk
// pulls in dump tails with head == chunk and weight > 2, top max_neighbors by
// weight (ties broken lexicographically on the tail).
CommonsenseGraph build_graph(const std::vector<std::string>& ocr_chunks,
                             const std::vector<std::string>& caption_chunks,
                             const std::string& entity, const EdgeDump& dump, int max_neighbors);

struct GcnLayer {
    TensorPtr weight;  // in x out, trainable

    GcnLayer(int in, int out, Rng& rng);
    GcnLayer() = default;
};

// Symmetric-normalized adjacency with self-loops: D^-1/2 (A+I) D^-1/2.
TensorPtr gcn_norm_adjacency(const CommonsenseGraph& graph);

// Two rounds of graph convolution (relu after the first) followed by a
// column-wise max over nodes; returns 1 x out_dim.
TensorPtr gcn_embed(Tape& tape, const CommonsenseGraph& graph, const TensorPtr& node_features,
                    const GcnLayer& layer1, const GcnLayer& layer2);

// Per node, the mean of synthetic token embeddings of its text; the
// aggregator uses its reserved token. Output is |V| x encoder.dim(), frozen.
TensorPtr node_features(const CommonsenseGraph& graph, const SyntheticTextEncoder& encoder);

// JSON debug dump: {"nodes": [{id, kind, text}], "edges": [[i, j]]}.
std::string graph_to_json(const CommonsenseGraph& graph);

}  // namespace hvv
