#pragma once

#include <optional>
#include <string>
#include <vector>

namespace hvv {

enum class RoleLabel : int { Hero = 0, Villain = 1, Victim = 2, Other = 3 };

constexpr int kNumRoles = 4;

const char* role_name(RoleLabel role);
RoleLabel role_from_name(const std::string& name);

// One (meme, entity) classification unit.
struct MemeInstance {
    std::string id;
    std::string domain;  // covid19 | uspolitics | synthetic
    std::string split;   // train | val | test
    std::string ocr_text;
    std::string caption;
    std::vector<std::string> face_labels;
    std::string image_ref;
    std::string entity;
    std::optional<RoleLabel> role;  // gold; optional at predict time
    std::optional<std::vector<std::string>> ocr_chunks_override;
    std::optional<std::vector<std::string>> caption_chunks_override;
};

// Parses a JSONL dataset. Errors carry the 1-based line number. Enforces:
// valid domain/split/role enums, non-empty entity, role present for
// train/val, and (id, entity) unique within a split.
std::vector<MemeInstance> load_dataset(const std::string& path);

void save_dataset(const std::string& path, const std::vector<MemeInstance>& instances);

std::vector<MemeInstance> filter_split(const std::vector<MemeInstance>& all,
                                       const std::string& split);

}  // namespace hvv
