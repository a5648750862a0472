#include "checkpoint.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>

#include <nlohmann/json.hpp>

#include "errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint serialization assumes a little-endian host");

namespace hfm {

namespace {

constexpr char kMagic[4] = {'H', 'F', 'M', 'C'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::string& out, T v) {
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    out.append(buf, sizeof(T));
}

template <typename T>
T take(const std::string& in, std::size_t& off, const std::string& path) {
    if (off + sizeof(T) > in.size())
        throw_io(path + ": checkpoint truncated");
    T v;
    std::memcpy(&v, in.data() + off, sizeof(T));
    off += sizeof(T);
    return v;
}

} // namespace

void save_checkpoint(const Checkpoint& ck, const std::string& path) {
    ck.arch.validate();
    ck.flow.validate();
    if (ck.params.data.size() != ck.arch.param_count())
        throw_invalid("checkpoint parameter vector does not match the "
                      "architecture");
    if (ck.norm.spatial_dim != ck.arch.spatial_dim)
        throw_invalid("checkpoint normalization dimension does not match the "
                      "architecture");

    std::string buf;
    buf.reserve(128 + ck.params.data.size() * sizeof(double));
    buf.append(kMagic, 4);
    put<std::uint32_t>(buf, kVersion);
    put<std::int32_t>(buf, ck.arch.spatial_dim);
    put<std::int32_t>(buf, ck.arch.hidden_layers);
    put<std::int32_t>(buf, ck.arch.hidden_width);
    put<std::uint32_t>(buf, static_cast<std::uint32_t>(ck.arch.activation));
    for (double s : ck.norm.scale) put<double>(buf, s);
    for (double s : ck.norm.shift) put<double>(buf, s);
    put<std::uint32_t>(buf, ck.flow.re_trainable ? 1 : 0);
    put<std::uint32_t>(buf, ck.flow.pec_trainable ? 1 : 0);
    put<double>(buf, ck.flow.re);
    put<double>(buf, ck.flow.pec);
    put<std::uint64_t>(buf, ck.params.data.size());
    for (double p : ck.params.data) put<double>(buf, p);

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw_io("cannot open '" + path + "' for writing");
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out.flush()) throw_io("failed writing '" + path + "'");

    nlohmann::json j;
    j["format_version"] = kVersion;
    j["spatial_dim"] = ck.arch.spatial_dim;
    j["hidden_layers"] = ck.arch.hidden_layers;
    j["hidden_width"] = ck.arch.hidden_width;
    j["activation"] =
        ck.arch.activation == Activation::Sin ? "sin" : "tanh";
    j["norm_scale"] = ck.norm.scale;
    j["norm_shift"] = ck.norm.shift;
    j["re"] = ck.flow.re;
    j["pec"] = std::isfinite(ck.flow.pec) ? nlohmann::json(ck.flow.pec)
                                          : nlohmann::json(nullptr);
    j["re_trainable"] = ck.flow.re_trainable;
    j["pec_trainable"] = ck.flow.pec_trainable;
    j["param_count"] = ck.params.data.size();
    const std::string meta_path = path + ".json";
    std::ofstream mout(meta_path, std::ios::binary | std::ios::trunc);
    if (!mout) throw_io("cannot open '" + meta_path + "' for writing");
    mout << j.dump(2) << '\n';
    if (!mout.flush()) throw_io("failed writing '" + meta_path + "'");
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw_io("cannot open checkpoint '" + path + "'");
    std::string buf((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());

    std::size_t off = 0;
    if (buf.size() < 8 || std::memcmp(buf.data(), kMagic, 4) != 0)
        throw_io(path + ": not a checkpoint file (bad magic)");
    off = 4;
    const auto version = take<std::uint32_t>(buf, off, path);
    if (version != kVersion)
        throw_io(path + ": unsupported checkpoint format version " +
                 std::to_string(version));

    Checkpoint ck;
    ck.arch.spatial_dim = take<std::int32_t>(buf, off, path);
    ck.arch.hidden_layers = take<std::int32_t>(buf, off, path);
    ck.arch.hidden_width = take<std::int32_t>(buf, off, path);
    const auto act = take<std::uint32_t>(buf, off, path);
    if (act > 1) throw_io(path + ": unknown activation tag");
    ck.arch.activation = static_cast<Activation>(act);
    try {
        ck.arch.validate();
    } catch (const Error& e) {
        throw_io(path + ": invalid architecture in checkpoint: " + e.what());
    }
    ck.norm.spatial_dim = ck.arch.spatial_dim;
    for (double& s : ck.norm.scale) s = take<double>(buf, off, path);
    for (double& s : ck.norm.shift) s = take<double>(buf, off, path);
    ck.flow.re_trainable = take<std::uint32_t>(buf, off, path) != 0;
    ck.flow.pec_trainable = take<std::uint32_t>(buf, off, path) != 0;
    ck.flow.re = take<double>(buf, off, path);
    ck.flow.pec = take<double>(buf, off, path);
    const auto count = take<std::uint64_t>(buf, off, path);
    if (count != ck.arch.param_count())
        throw_io(path + ": parameter count " + std::to_string(count) +
                 " does not match the stored architecture (expected " +
                 std::to_string(ck.arch.param_count()) + ")");
    if (off + count * sizeof(double) != buf.size())
        throw_io(path + ": checkpoint size does not match its header");
    ck.params.data.resize(count);
    std::memcpy(ck.params.data.data(), buf.data() + off,
                count * sizeof(double));
    for (double p : ck.params.data)
        if (!std::isfinite(p))
            throw_io(path + ": checkpoint contains non-finite parameters");
    try {
        ck.flow.validate();
    } catch (const Error& e) {
        throw_io(path + ": invalid flow parameters in checkpoint: " +
                 e.what());
    }
    return ck;
}

} // namespace hfm
