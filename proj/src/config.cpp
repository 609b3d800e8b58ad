#include "hvv/config.hpp"

#include <fstream>
#include <sstream>

#include "hvv/errors.hpp"

namespace hvv {

void ModelConfig::validate() const {
    auto positive = [](int v, const char* name) {
        if (v < 1) throw ConfigError(std::string("model config: ") + name + " must be >= 1");
    };
    positive(l, "l");
    positive(d, "d");
    positive(l_m, "l_m");
    positive(d_m, "d_m");
    positive(d_prime, "d_prime");
    positive(d_g, "d_g");
    positive(p, "p");
    positive(iterations, "iterations");
    positive(max_neighbors, "max_neighbors");
    if (epsilon <= 0.0) throw ConfigError("model config: epsilon must be > 0");
    if (kernel == KernelKind::Gaussian && sigma <= 0.0) {
        throw ConfigError("model config: sigma must be > 0 for the gaussian kernel");
    }
    if (fusion == FusionMode::Otk && (use_vision || use_commonsense) && p != l) {
        throw ConfigError("model config: fused branch outputs are concatenated with the text "
                          "features row-wise, so p must equal l (got p=" +
                          std::to_string(p) + ", l=" + std::to_string(l) + ")");
    }
}

OtkeConfig ModelConfig::otke() const {
    OtkeConfig cfg;
    cfg.epsilon = epsilon;
    cfg.max_iterations = iterations;
    cfg.kernel = kernel;
    cfg.sigma = sigma;
    cfg.p = p;
    return cfg;
}

void TrainConfig::validate() const {
    if (lr <= 0.0) throw ConfigError("train config: lr must be > 0");
    if (weight_decay < 0.0) throw ConfigError("train config: weight_decay must be >= 0");
    if (batch_size < 1) throw ConfigError("train config: batch_size must be >= 1");
    if (epochs < 0) throw ConfigError("train config: epochs must be >= 0");
    if (early_stop_patience < 1) throw ConfigError("train config: early_stop_patience must be >= 1");
}

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

int parse_int(const std::string& v, int lineno) {
    try {
        std::size_t used = 0;
        const int out = std::stoi(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return out;
    } catch (const std::exception&) {
        throw ConfigError("line " + std::to_string(lineno) + ": expected an integer, got '" + v +
                          "'");
    }
}

double parse_double(const std::string& v, int lineno) {
    try {
        std::size_t used = 0;
        const double out = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return out;
    } catch (const std::exception&) {
        throw ConfigError("line " + std::to_string(lineno) + ": expected a number, got '" + v +
                          "'");
    }
}

bool parse_bool(const std::string& v, int lineno) {
    if (v == "true") return true;
    if (v == "false") return false;
    throw ConfigError("line " + std::to_string(lineno) + ": expected true/false, got '" + v + "'");
}

std::uint64_t parse_u64(const std::string& v, int lineno) {
    try {
        std::size_t used = 0;
        const unsigned long long out = std::stoull(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return static_cast<std::uint64_t>(out);
    } catch (const std::exception&) {
        throw ConfigError("line " + std::to_string(lineno) +
                          ": expected a non-negative integer, got '" + v + "'");
    }
}

}  // namespace

void apply_config_line(Config& cfg, const std::string& raw, int lineno) {
    std::string line = raw;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) return;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
        throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
        throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
    }

    auto& m = cfg.model;
    auto& t = cfg.train;
    if (key == "l") m.l = parse_int(value, lineno);
    else if (key == "d") m.d = parse_int(value, lineno);
    else if (key == "l_m") m.l_m = parse_int(value, lineno);
    else if (key == "d_m") m.d_m = parse_int(value, lineno);
    else if (key == "d_prime") m.d_prime = parse_int(value, lineno);
    else if (key == "d_g") m.d_g = parse_int(value, lineno);
    else if (key == "p") m.p = parse_int(value, lineno);
    else if (key == "epsilon") m.epsilon = parse_double(value, lineno);
    else if (key == "iterations") m.iterations = parse_int(value, lineno);
    else if (key == "kernel") {
        if (value == "linear") m.kernel = KernelKind::Linear;
        else if (value == "gaussian") m.kernel = KernelKind::Gaussian;
        else throw ConfigError("line " + std::to_string(lineno) + ": kernel must be linear or gaussian");
    } else if (key == "sigma") m.sigma = parse_double(value, lineno);
    else if (key == "fusion") {
        if (value == "otk") m.fusion = FusionMode::Otk;
        else if (value == "cat") m.fusion = FusionMode::Cat;
        else throw ConfigError("line " + std::to_string(lineno) + ": fusion must be otk or cat");
    } else if (key == "use_caption") m.use_caption = parse_bool(value, lineno);
    else if (key == "use_face_labels") m.use_face_labels = parse_bool(value, lineno);
    else if (key == "use_commonsense") m.use_commonsense = parse_bool(value, lineno);
    else if (key == "use_vision") m.use_vision = parse_bool(value, lineno);
    else if (key == "max_neighbors") m.max_neighbors = parse_int(value, lineno);
    else if (key == "lr") t.lr = parse_double(value, lineno);
    else if (key == "weight_decay") t.weight_decay = parse_double(value, lineno);
    else if (key == "batch_size") t.batch_size = parse_int(value, lineno);
    else if (key == "epochs") t.epochs = parse_int(value, lineno);
    else if (key == "seed") t.seed = parse_u64(value, lineno);
    else if (key == "early_stop_patience") t.early_stop_patience = parse_int(value, lineno);
    else if (key == "class_weighting") t.class_weighting = parse_bool(value, lineno);
    else {
        throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
}

Config parse_config_text(const std::string& text) {
    Config cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        apply_config_line(cfg, line, lineno);
    }
    cfg.model.validate();
    cfg.train.validate();
    return cfg;
}

Config load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read config: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

namespace {

const char* kernel_name(KernelKind k) { return k == KernelKind::Linear ? "linear" : "gaussian"; }
const char* fusion_name(FusionMode f) { return f == FusionMode::Otk ? "otk" : "cat"; }
const char* bool_name(bool b) { return b ? "true" : "false"; }

}  // namespace

std::string ModelConfig::to_text() const {
    std::ostringstream out;
    out.precision(17);
    out << "l = " << l << "\n";
    out << "d = " << d << "\n";
    out << "l_m = " << l_m << "\n";
    out << "d_m = " << d_m << "\n";
    out << "d_prime = " << d_prime << "\n";
    out << "d_g = " << d_g << "\n";
    out << "p = " << p << "\n";
    out << "epsilon = " << epsilon << "\n";
    out << "iterations = " << iterations << "\n";
    out << "kernel = " << kernel_name(kernel) << "\n";
    out << "sigma = " << sigma << "\n";
    out << "fusion = " << fusion_name(fusion) << "\n";
    out << "use_caption = " << bool_name(use_caption) << "\n";
    out << "use_face_labels = " << bool_name(use_face_labels) << "\n";
    out << "use_commonsense = " << bool_name(use_commonsense) << "\n";
    out << "use_vision = " << bool_name(use_vision) << "\n";
    out << "max_neighbors = " << max_neighbors << "\n";
    return out.str();
}

}  // namespace hvv
