#include "hvv/dataset.hpp"

#include <fstream>
#include <set>

#include <json.hpp>

#include "hvv/errors.hpp"

namespace hvv {

using nlohmann::json;

const char* role_name(RoleLabel role) {
    switch (role) {
        case RoleLabel::Hero: return "hero";
        case RoleLabel::Villain: return "villain";
        case RoleLabel::Victim: return "victim";
        case RoleLabel::Other: return "other";
    }
    return "other";
}

RoleLabel role_from_name(const std::string& name) {
    if (name == "hero") return RoleLabel::Hero;
    if (name == "villain") return RoleLabel::Villain;
    if (name == "victim") return RoleLabel::Victim;
    if (name == "other") return RoleLabel::Other;
    throw ValidationError("unknown role: '" + name + "'");
}

namespace {

bool valid_domain(const std::string& d) {
    return d == "covid19" || d == "uspolitics" || d == "synthetic";
}

bool valid_split(const std::string& s) { return s == "train" || s == "val" || s == "test"; }

std::vector<std::string> string_array(const json& j, const char* field, int line) {
    std::vector<std::string> out;
    if (!j.is_array()) {
        throw FormatError("line " + std::to_string(line) + ": '" + field +
                          "' must be an array of strings");
    }
    for (const auto& v : j) {
        if (!v.is_string()) {
            throw FormatError("line " + std::to_string(line) + ": '" + field +
                              "' must be an array of strings");
        }
        out.push_back(v.get<std::string>());
    }
    return out;
}

}  // namespace

std::vector<MemeInstance> load_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read dataset: " + path);
    std::vector<MemeInstance> out;
    std::set<std::pair<std::string, std::string>> seen;  // (split, id+entity)
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
        if (!j.is_object()) {
            throw FormatError("line " + std::to_string(lineno) + ": expected a JSON object");
        }
        MemeInstance inst;
        auto need_string = [&](const char* field) -> std::string {
            if (!j.contains(field) || !j[field].is_string()) {
                throw FormatError("line " + std::to_string(lineno) + ": missing string field '" +
                                  field + "'");
            }
            return j[field].get<std::string>();
        };
        inst.id = need_string("id");
        inst.domain = need_string("domain");
        if (!valid_domain(inst.domain)) {
            throw FormatError("line " + std::to_string(lineno) + ": unknown domain '" +
                              inst.domain + "'");
        }
        inst.split = need_string("split");
        if (!valid_split(inst.split)) {
            throw FormatError("line " + std::to_string(lineno) + ": unknown split '" +
                              inst.split + "'");
        }
        inst.entity = need_string("entity");
        if (inst.entity.empty()) {
            throw FormatError("line " + std::to_string(lineno) + ": entity must be non-empty");
        }
        if (j.contains("ocr_text")) inst.ocr_text = need_string("ocr_text");
        if (j.contains("caption")) inst.caption = need_string("caption");
        if (j.contains("image_ref")) inst.image_ref = need_string("image_ref");
        if (j.contains("face_labels")) {
            inst.face_labels = string_array(j["face_labels"], "face_labels", lineno);
        }
        if (j.contains("role") && !j["role"].is_null()) {
            if (!j["role"].is_string()) {
                throw FormatError("line " + std::to_string(lineno) + ": 'role' must be a string");
            }
            try {
                inst.role = role_from_name(j["role"].get<std::string>());
            } catch (const ValidationError& e) {
                throw FormatError("line " + std::to_string(lineno) + ": " + e.what());
            }
        }
        if ((inst.split == "train" || inst.split == "val") && !inst.role.has_value()) {
            throw FormatError("line " + std::to_string(lineno) +
                              ": role is required for train/val instances");
        }
        if (j.contains("ocr_chunks")) {
            inst.ocr_chunks_override = string_array(j["ocr_chunks"], "ocr_chunks", lineno);
        }
        if (j.contains("caption_chunks")) {
            inst.caption_chunks_override =
                string_array(j["caption_chunks"], "caption_chunks", lineno);
        }
        const auto key = std::make_pair(inst.split, inst.id + "\x1f" + inst.entity);
        if (!seen.insert(key).second) {
            throw FormatError("line " + std::to_string(lineno) + ": duplicate (id, entity) ('" +
                              inst.id + "', '" + inst.entity + "') within split '" + inst.split +
                              "'");
        }
        out.push_back(std::move(inst));
    }
    return out;
}

void save_dataset(const std::string& path, const std::vector<MemeInstance>& instances) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write dataset: " + path);
    for (const auto& inst : instances) {
        json j;
        j["id"] = inst.id;
        j["domain"] = inst.domain;
        j["split"] = inst.split;
        j["ocr_text"] = inst.ocr_text;
        j["caption"] = inst.caption;
        j["face_labels"] = inst.face_labels;
        j["image_ref"] = inst.image_ref;
        j["entity"] = inst.entity;
        if (inst.role) j["role"] = role_name(*inst.role);
        if (inst.ocr_chunks_override) j["ocr_chunks"] = *inst.ocr_chunks_override;
        if (inst.caption_chunks_override) j["caption_chunks"] = *inst.caption_chunks_override;
        out << j.dump() << "\n";
    }
}

std::vector<MemeInstance> filter_split(const std::vector<MemeInstance>& all,
                                       const std::string& split) {
    std::vector<MemeInstance> out;
    for (const auto& inst : all) {
        if (inst.split == split) out.push_back(inst);
    }
    return out;
}

}  // namespace hvv
