#include "hvv/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "hvv/errors.hpp"

namespace hvv {

namespace {

constexpr char kMagic[8] = {'H', 'V', 'V', 'R', 'O', 'L', 'E', '1'};
constexpr std::uint32_t kVersion = 1;

void write_u32(std::ostream& out, std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t read_u32(std::istream& in) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4)) throw FormatError("truncated checkpoint");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
}

void write_doubles(std::ostream& out, const std::vector<double>& vals) {
    for (double d : vals) {
        std::uint64_t bits;
        std::memcpy(&bits, &d, 8);
        unsigned char b[8];
        for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xff);
        out.write(reinterpret_cast<const char*>(b), 8);
    }
}

void read_doubles(std::istream& in, std::vector<double>& vals) {
    for (double& d : vals) {
        unsigned char b[8];
        if (!in.read(reinterpret_cast<char*>(b), 8)) throw FormatError("truncated checkpoint");
        std::uint64_t bits = 0;
        for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
        std::memcpy(&d, &bits, 8);
    }
}

}  // namespace

void save_checkpoint(const std::string& path, const RoleClassifier& model) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write checkpoint: " + path);
    out.write(kMagic, sizeof(kMagic));
    write_u32(out, kVersion);
    const std::string cfg = model.config().to_text();
    write_u32(out, static_cast<std::uint32_t>(cfg.size()));
    out.write(cfg.data(), static_cast<std::streamsize>(cfg.size()));
    const auto& params = model.named_parameters();
    write_u32(out, static_cast<std::uint32_t>(params.size()));
    for (const auto& [name, t] : params) {
        write_u32(out, static_cast<std::uint32_t>(name.size()));
        out.write(name.data(), static_cast<std::streamsize>(name.size()));
        write_u32(out, static_cast<std::uint32_t>(t->rows));
        write_u32(out, static_cast<std::uint32_t>(t->cols));
        write_doubles(out, t->values);
    }
    if (!out) throw IoError("failed while writing checkpoint: " + path);
}

RoleClassifier load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read checkpoint: " + path);
    char magic[8];
    if (!in.read(magic, sizeof(magic))) throw FormatError("truncated checkpoint");
    if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
        throw FormatError("not a checkpoint file (bad magic): " + path);
    }
    const std::uint32_t version = read_u32(in);
    if (version != kVersion) {
        throw FormatError("unsupported checkpoint version " + std::to_string(version));
    }
    const std::uint32_t cfg_len = read_u32(in);
    std::string cfg_text(cfg_len, '\0');
    if (!in.read(cfg_text.data(), cfg_len)) throw FormatError("truncated checkpoint");
    const Config cfg = parse_config_text(cfg_text);

    const std::uint32_t nparams = read_u32(in);
    std::vector<std::pair<std::string, TensorPtr>> params;
    params.reserve(nparams);
    for (std::uint32_t i = 0; i < nparams; ++i) {
        const std::uint32_t name_len = read_u32(in);
        std::string name(name_len, '\0');
        if (!in.read(name.data(), name_len)) throw FormatError("truncated checkpoint");
        const int rows = static_cast<int>(read_u32(in));
        const int cols = static_cast<int>(read_u32(in));
        if (rows < 1 || cols < 1 || static_cast<long>(rows) * cols > (1L << 30)) {
            throw FormatError("checkpoint parameter '" + name + "' has implausible shape");
        }
        auto t = Tensor2D::make(rows, cols, true);
        read_doubles(in, t->values);
        params.emplace_back(std::move(name), std::move(t));
    }
    RoleClassifier model(cfg.model, 0);
    load_parameters(model, params);
    return model;
}

}  // namespace hvv
