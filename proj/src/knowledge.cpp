#include "hvv/knowledge.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "hvv/errors.hpp"

namespace hvv {

namespace {

const std::unordered_set<std::string>& stopwords() {
    static const std::unordered_set<std::string> words = {
        "a",       "about",   "above",    "after",   "again",      "against", "all",
        "am",      "an",      "and",      "any",     "are",        "as",      "at",
        "be",      "because", "been",     "before",  "being",      "below",   "between",
        "both",    "but",     "by",       "can",     "did",        "do",      "does",
        "doing",   "down",    "during",   "each",    "few",        "for",     "from",
        "further", "had",     "has",      "have",    "having",     "he",      "her",
        "here",    "hers",    "herself",  "him",     "himself",    "his",     "how",
        "i",       "if",      "in",       "into",    "is",         "it",      "its",
        "itself",  "just",    "me",       "more",    "most",       "my",      "myself",
        "no",      "nor",     "not",      "now",     "of",         "off",     "on",
        "once",    "only",    "or",       "other",   "our",        "ours",    "ourselves",
        "out",     "over",    "own",      "same",    "she",        "should",  "so",
        "some",    "such",    "than",     "that",    "the",        "their",   "theirs",
        "them",    "themselves", "then",  "there",   "these",      "they",    "this",
        "those",   "through", "to",       "too",     "under",      "until",   "up",
        "very",    "was",     "we",       "were",    "what",       "when",    "where",
        "which",   "while",   "who",      "whom",    "why",        "will",    "with",
        "you",     "your",    "yours",    "yourself", "yourselves"};
    return words;
}

std::string lower(const std::string& s) {
    std::string out = s;
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

}  // namespace

bool is_stopword(const std::string& token) { return stopwords().count(token) > 0; }

const char* node_kind_name(NodeKind kind) {
    switch (kind) {
        case NodeKind::OcrChunk: return "ocr_chunk";
        case NodeKind::CaptionChunk: return "caption_chunk";
        case NodeKind::Commonsense: return "commonsense";
        case NodeKind::Entity: return "entity";
        case NodeKind::Aggregator: return "aggregator";
    }
    return "unknown";
}

std::vector<std::string> extract_noun_chunks(const std::vector<std::string>& tokens) {
    std::vector<std::string> chunks;
    std::string run;
    auto flush = [&] {
        if (!run.empty()) {
            chunks.push_back(run);
            run.clear();
        }
    };
    for (const auto& tok : tokens) {
        if (tok.size() < 2 || is_stopword(tok)) {
            flush();
            continue;
        }
        if (!run.empty()) run += ' ';
        run += tok;
    }
    flush();
    return chunks;
}

EdgeDump load_edge_dump(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read edge dump: " + path);
    EdgeDump dump;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::size_t start = 0;
        while (true) {
            const std::size_t tab = line.find('\t', start);
            if (tab == std::string::npos) {
                fields.push_back(line.substr(start));
                break;
            }
            fields.push_back(line.substr(start, tab - start));
            start = tab + 1;
        }
        if (fields.size() != 4 || fields[0].empty() || fields[2].empty()) {
            ++dump.skipped_lines;
            continue;
        }
        double weight = 0.0;
        try {
            std::size_t used = 0;
            weight = std::stod(fields[3], &used);
            if (used != fields[3].size() || !std::isfinite(weight)) {
                ++dump.skipped_lines;
                continue;
            }
        } catch (const std::exception&) {
            ++dump.skipped_lines;
            continue;
        }
        dump.triples.push_back({lower(fields[0]), fields[1], lower(fields[2]), weight});
    }
    return dump;
}

CommonsenseGraph build_graph(const std::vector<std::string>& ocr_chunks,
                             const std::vector<std::string>& caption_chunks,
                             const std::string& entity, const EdgeDump& dump,
                             int max_neighbors) {
    if (entity.empty()) throw ValidationError("build_graph: entity must be non-empty");

    CommonsenseGraph graph;
    std::unordered_map<std::string, int> by_text;
    auto add_node = [&](const std::string& text, NodeKind kind) -> int {
        auto it = by_text.find(text);
        if (it != by_text.end()) return it->second;  // first kind wins
        const int id = graph.node_count();
        graph.nodes.push_back({id, kind, text});
        by_text.emplace(text, id);
        return id;
    };

    std::vector<int> ocr_ids, caption_ids;
    for (const auto& c : ocr_chunks) ocr_ids.push_back(add_node(lower(c), NodeKind::OcrChunk));
    for (const auto& c : caption_chunks)
        caption_ids.push_back(add_node(lower(c), NodeKind::CaptionChunk));

    // distinct chunk ids in node order
    std::vector<int> chunk_ids;
    for (const auto& node : graph.nodes) chunk_ids.push_back(node.id);

    std::set<std::pair<int, int>> seen;
    auto add_edge = [&](int i, int j) {
        if (i == j) return;
        const auto key = std::minmax(i, j);
        if (seen.insert({key.first, key.second}).second) {
            graph.edges.push_back({key.first, key.second});
        }
    };

    // index dump heads once
    std::unordered_map<std::string, std::vector<const EdgeTriple*>> by_head;
    for (const auto& t : dump.triples) by_head[t.head].push_back(&t);

    // (v) commonsense nodes per chunk, selected before entity/aggregator so
    // they appear ahead of them in node order; edges recorded later to keep
    // the documented edge ordering.
    std::vector<std::pair<int, int>> commonsense_edges;
    for (const int cid : chunk_ids) {
        auto it = by_head.find(graph.nodes[static_cast<std::size_t>(cid)].text);
        if (it == by_head.end()) continue;
        std::vector<const EdgeTriple*> cands;
        for (const auto* t : it->second) {
            if (t->weight > 2.0) cands.push_back(t);
        }
        std::stable_sort(cands.begin(), cands.end(), [](const EdgeTriple* a, const EdgeTriple* b) {
            if (a->weight != b->weight) return a->weight > b->weight;
            return a->tail < b->tail;
        });
        int taken = 0;
        std::unordered_set<std::string> taken_tails;
        for (const auto* t : cands) {
            if (taken >= max_neighbors) break;
            if (t->tail == graph.nodes[static_cast<std::size_t>(cid)].text) continue;
            if (!taken_tails.insert(t->tail).second) continue;
            const int nid = add_node(t->tail, NodeKind::Commonsense);
            commonsense_edges.push_back({cid, nid});
            ++taken;
        }
    }

    // entity and aggregator are always distinct nodes, even when a chunk
    // carries the same text
    auto force_add_node = [&](const std::string& text, NodeKind kind) -> int {
        const int id = graph.node_count();
        graph.nodes.push_back({id, kind, text});
        return id;
    };
    const int entity_id = force_add_node(lower(entity), NodeKind::Entity);
    const int agg_id = force_add_node(SyntheticTextEncoder::kAgg, NodeKind::Aggregator);

    // (i) OCR clique
    for (std::size_t i = 0; i < ocr_ids.size(); ++i)
        for (std::size_t j = i + 1; j < ocr_ids.size(); ++j) add_edge(ocr_ids[i], ocr_ids[j]);
    // (ii) caption clique
    for (std::size_t i = 0; i < caption_ids.size(); ++i)
        for (std::size_t j = i + 1; j < caption_ids.size(); ++j)
            add_edge(caption_ids[i], caption_ids[j]);
    // (iii) aggregator to every chunk node
    for (const int cid : chunk_ids) add_edge(agg_id, cid);
    // (iv) entity to aggregator and to matching chunks
    add_edge(entity_id, agg_id);
    const std::string entity_lower = lower(entity);
    for (const int cid : chunk_ids) {
        if (graph.nodes[static_cast<std::size_t>(cid)].text == entity_lower) {
            add_edge(entity_id, cid);
        }
    }
    // (v) chunk-commonsense edges
    for (const auto& e : commonsense_edges) add_edge(e.first, e.second);

    const int n = graph.node_count();
    graph.adjacency = Tensor2D::make(n, n);
    for (const auto& e : graph.edges) {
        graph.adjacency->at(e.first, e.second) = 1.0;
        graph.adjacency->at(e.second, e.first) = 1.0;
    }
    return graph;
}

GcnLayer::GcnLayer(int in, int out, Rng& rng) {
    weight = Tensor2D::make(in, out, true);
    const double scale = 1.0 / std::sqrt(static_cast<double>(in));
    for (double& v : weight->values) v = rng.normal() * scale;
}

TensorPtr gcn_norm_adjacency(const CommonsenseGraph& graph) {
    const int n = graph.node_count();
    auto norm = Tensor2D::make(n, n);
    std::vector<double> deg(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double a = (i == j) ? 1.0 : graph.adjacency->at(i, j);
            deg[static_cast<std::size_t>(i)] += a;
        }
    }
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double a = (i == j) ? 1.0 : graph.adjacency->at(i, j);
            if (a != 0.0) {
                norm->at(i, j) = a / std::sqrt(deg[static_cast<std::size_t>(i)] *
                                               deg[static_cast<std::size_t>(j)]);
            }
        }
    }
    return norm;
}

TensorPtr gcn_embed(Tape& tape, const CommonsenseGraph& graph, const TensorPtr& node_features,
                    const GcnLayer& layer1, const GcnLayer& layer2) {
    if (node_features->rows != graph.node_count()) {
        throw DimError("gcn_embed: feature rows " + node_features->shape_str() +
                       " do not match node count " + std::to_string(graph.node_count()));
    }
    auto norm = gcn_norm_adjacency(graph);
    auto h1 = tape.relu(tape.matmul(tape.matmul(norm, node_features), layer1.weight));
    auto h2 = tape.matmul(tape.matmul(norm, h1), layer2.weight);
    return tape.pool(h2, PoolMode::MaxRows);
}

TensorPtr node_features(const CommonsenseGraph& graph, const SyntheticTextEncoder& encoder) {
    auto out = Tensor2D::make(graph.node_count(), encoder.dim());
    for (const auto& node : graph.nodes) {
        const auto row = node.kind == NodeKind::Aggregator
                             ? encoder.token_embedding(SyntheticTextEncoder::kAgg)
                             : encoder.text_embedding(node.text);
        for (int j = 0; j < encoder.dim(); ++j) out->at(node.id, j) = row[static_cast<std::size_t>(j)];
    }
    return out;
}

std::string graph_to_json(const CommonsenseGraph& graph) {
    nlohmann::json j;
    j["nodes"] = nlohmann::json::array();
    for (const auto& node : graph.nodes) {
        j["nodes"].push_back({{"id", node.id}, {"kind", node_kind_name(node.kind)}, {"text", node.text}});
    }
    j["edges"] = nlohmann::json::array();
    for (const auto& e : graph.edges) {
        j["edges"].push_back({e.first, e.second});
    }
    return j.dump(2);
}

}  // namespace hvv
