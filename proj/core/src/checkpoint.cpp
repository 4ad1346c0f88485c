#include "lightpath/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace lightpath {

namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoint writer assumes a little-endian host");

void write_u32(std::ostream& out, std::uint32_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

void write_u64(std::ostream& out, std::uint64_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

std::uint32_t read_u32(std::istream& in) {
    std::uint32_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
    if (!in) throw std::runtime_error("checkpoint: truncated file");
    return v;
}

std::uint64_t read_u64(std::istream& in) {
    std::uint64_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
    if (!in) throw std::runtime_error("checkpoint: truncated file");
    return v;
}

} // namespace

void save_checkpoint(const std::string& file, const nlohmann::json& config,
                     const ParameterSet& params) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write checkpoint: " + file);
    out.write("LPCK", 4);
    write_u32(out, kCheckpointVersion);
    const std::string cfg = config.dump();
    write_u32(out, static_cast<std::uint32_t>(cfg.size()));
    out.write(cfg.data(), static_cast<std::streamsize>(cfg.size()));
    for (std::size_t i = 0; i < params.size(); ++i) {
        const std::string& name = params.name(i);
        const Tensor& t = params.value(i);
        write_u32(out, static_cast<std::uint32_t>(name.size()));
        out.write(name.data(), static_cast<std::streamsize>(name.size()));
        write_u32(out, static_cast<std::uint32_t>(t.shape().size()));
        for (std::size_t d : t.shape()) write_u64(out, d);
        out.write(reinterpret_cast<const char*>(t.data()),
                  static_cast<std::streamsize>(t.size() * sizeof(double)));
    }
    if (!out) throw std::runtime_error("checkpoint write failed: " + file);
}

Checkpoint load_checkpoint(const std::string& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open checkpoint: " + file);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "LPCK", 4) != 0) {
        throw std::runtime_error("checkpoint: bad magic");
    }
    const std::uint32_t version = read_u32(in);
    if (version != kCheckpointVersion) {
        throw std::runtime_error("checkpoint: unsupported version " + std::to_string(version));
    }
    const std::uint32_t cfg_len = read_u32(in);
    std::string cfg(cfg_len, '\0');
    in.read(cfg.data(), cfg_len);
    if (!in) throw std::runtime_error("checkpoint: truncated config");

    Checkpoint ck;
    ck.config = nlohmann::json::parse(cfg);
    while (true) {
        std::uint32_t name_len = 0;
        in.read(reinterpret_cast<char*>(&name_len), sizeof(name_len));
        if (in.gcount() == 0 && in.eof()) break;
        if (in.gcount() != static_cast<std::streamsize>(sizeof(name_len))) {
            throw std::runtime_error("checkpoint: truncated parameter header");
        }
        std::string name(name_len, '\0');
        in.read(name.data(), name_len);
        if (!in) throw std::runtime_error("checkpoint: truncated parameter name");
        const std::uint32_t rank = read_u32(in);
        std::vector<std::size_t> shape(rank);
        std::size_t count = 1;
        for (std::uint32_t d = 0; d < rank; ++d) {
            shape[d] = static_cast<std::size_t>(read_u64(in));
            count *= shape[d];
        }
        std::vector<double> data(count);
        in.read(reinterpret_cast<char*>(data.data()),
                static_cast<std::streamsize>(count * sizeof(double)));
        if (!in) throw std::runtime_error("checkpoint: truncated parameter data");
        ck.params.add(std::move(name), Tensor(std::move(shape), std::move(data)));
    }
    return ck;
}

} // namespace lightpath
