#include "stockgan/nn/checkpoint.hpp"

#include "stockgan/errors.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

namespace stockgan::nn {

namespace {

template <typename T>
void put(std::string& out, T value) {
    char buf[sizeof(T)];
    std::memcpy(buf, &value, sizeof(T));
    out.append(buf, sizeof(T));
}

template <typename T>
T get(const std::string& bytes, std::size_t& pos) {
    if (pos + sizeof(T) > bytes.size()) throw FormatError("checkpoint truncated");
    T value;
    std::memcpy(&value, bytes.data() + pos, sizeof(T));
    pos += sizeof(T);
    return value;
}

} // namespace

std::string encode_checkpoint(const Checkpoint& checkpoint) {
    nlohmann::json header;
    header["metadata"] = checkpoint.metadata;
    header["tensors"] = nlohmann::json::array();
    std::size_t offset = 0;
    for (const auto& [name, m] : checkpoint.params.entries()) {
        header["tensors"].push_back({{"name", name}, {"rows", m.rows()}, {"cols", m.cols()}, {"offset", offset}});
        offset += static_cast<std::size_t>(m.size()) * sizeof(double);
    }
    const std::string text = header.dump();

    std::string out(kCheckpointMagic, sizeof(kCheckpointMagic));
    put<std::uint32_t>(out, kCheckpointVersion);
    put<std::uint64_t>(out, text.size());
    out += text;
    for (const auto& [name, m] : checkpoint.params.entries()) {
        out.append(reinterpret_cast<const char*>(m.data()), static_cast<std::size_t>(m.size()) * sizeof(double));
    }
    return out;
}

Checkpoint decode_checkpoint(const std::string& bytes) {
    if (bytes.size() < sizeof(kCheckpointMagic) ||
        std::memcmp(bytes.data(), kCheckpointMagic, sizeof(kCheckpointMagic)) != 0) {
        throw FormatError("not a checkpoint file (bad magic)");
    }
    std::size_t pos = sizeof(kCheckpointMagic);
    const auto version = get<std::uint32_t>(bytes, pos);
    if (version != kCheckpointVersion) {
        throw FormatError("unsupported checkpoint version " + std::to_string(version));
    }
    const auto header_len = get<std::uint64_t>(bytes, pos);
    if (pos + header_len > bytes.size()) throw FormatError("checkpoint truncated");
    nlohmann::json header;
    try {
        header = nlohmann::json::parse(bytes.substr(pos, header_len));
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("checkpoint header: ") + e.what());
    }
    pos += header_len;

    Checkpoint out;
    out.metadata = header.value("metadata", nlohmann::json::object());
    const std::size_t payload = pos;
    for (const auto& t : header.at("tensors")) {
        const auto rows = t.at("rows").get<Eigen::Index>();
        const auto cols = t.at("cols").get<Eigen::Index>();
        const auto offset = t.at("offset").get<std::size_t>();
        const std::size_t n = static_cast<std::size_t>(rows * cols) * sizeof(double);
        if (payload + offset + n > bytes.size()) throw FormatError("checkpoint truncated");
        Matrix m(rows, cols);
        std::memcpy(m.data(), bytes.data() + payload + offset, n);
        check_finite(m, "checkpoint tensor " + t.at("name").get<std::string>());
        out.params.add(t.at("name").get<std::string>(), std::move(m));
    }
    return out;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    const std::string bytes = encode_checkpoint(checkpoint);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return decode_checkpoint(buf.str());
}

} // namespace stockgan::nn
