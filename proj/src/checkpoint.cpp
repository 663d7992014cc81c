#include "cstab/checkpoint.hpp"

#include <cstring>
#include <filesystem>
#include <fstream>

#include "cstab/hash.hpp"

namespace cstab {

namespace {
constexpr char kMagic[8] = {'C', 'S', 'T', 'C', 'K', 'P', 'T', '1'};

void write_u32(std::ostream& os, uint32_t v) {
    unsigned char buf[4];
    for (int i = 0; i < 4; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
    os.write(reinterpret_cast<const char*>(buf), 4);
}
uint32_t read_u32(std::istream& is) {
    unsigned char buf[4];
    is.read(reinterpret_cast<char*>(buf), 4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(buf[i]) << (8 * i);
    return v;
}
void write_f64(std::ostream& os, double d) {
    uint64_t bits;
    std::memcpy(&bits, &d, 8);
    unsigned char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(bits >> (8 * i));
    os.write(reinterpret_cast<const char*>(buf), 8);
}
double read_f64(std::istream& is) {
    unsigned char buf[8];
    is.read(reinterpret_cast<char*>(buf), 8);
    uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<uint64_t>(buf[i]) << (8 * i);
    double d;
    std::memcpy(&d, &bits, 8);
    return d;
}
}  // namespace

void save_checkpoint(const ToyTransformer& model, const std::string& path) {
    const std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("checkpoint: cannot open '" + path + "' for writing");
    os.write(kMagic, 8);
    const ModelConfig& cfg = model.config();
    write_u32(os, 1);  // version
    write_u32(os, static_cast<uint32_t>(cfg.layers));
    write_u32(os, static_cast<uint32_t>(cfg.heads));
    write_u32(os, static_cast<uint32_t>(cfg.d_model));
    write_u32(os, static_cast<uint32_t>(cfg.d_ff));
    write_u32(os, static_cast<uint32_t>(cfg.vocab));
    write_u32(os, static_cast<uint32_t>(cfg.context));
    for (const Tensor* t : model.parameters()) {
        for (double v : t->flat()) write_f64(os, v);
    }
    if (!os) throw Error("checkpoint: write failed for '" + path + "'");
}

ToyTransformer load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error("checkpoint: cannot open '" + path + "'");
    char magic[8];
    is.read(magic, 8);
    if (!is || std::memcmp(magic, kMagic, 8) != 0) {
        throw Error("checkpoint: bad magic in '" + path + "'");
    }
    const uint32_t version = read_u32(is);
    if (version != 1) {
        throw Error("checkpoint: unsupported version " + std::to_string(version));
    }
    ModelConfig cfg;
    cfg.layers = static_cast<int>(read_u32(is));
    cfg.heads = static_cast<int>(read_u32(is));
    cfg.d_model = static_cast<int>(read_u32(is));
    cfg.d_ff = static_cast<int>(read_u32(is));
    cfg.vocab = static_cast<int>(read_u32(is));
    cfg.context = static_cast<int>(read_u32(is));
    ToyTransformer model(cfg);
    for (Tensor* t : model.parameters()) {
        for (double& v : t->flat()) v = read_f64(is);
    }
    if (!is) throw Error("checkpoint: truncated file '" + path + "'");
    char extra;
    if (is.read(&extra, 1)) throw Error("checkpoint: trailing bytes in '" + path + "'");
    return model;
}

uint64_t file_hash(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error("file_hash: cannot open '" + path + "'");
    Fnv1a h;
    char buf[4096];
    while (is.read(buf, sizeof(buf)) || is.gcount() > 0) {
        h.update(buf, static_cast<std::size_t>(is.gcount()));
        if (!is) break;
    }
    return h.digest();
}

}  // namespace cstab
