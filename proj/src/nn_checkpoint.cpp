#include "ccfir/nn/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <vector>

namespace ccfir::nn {

namespace {

constexpr char kMagic[8] = {'C', 'C', 'F', 'I', 'R', 'N', 'E', 'T'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::vector<unsigned char>& buf, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

void put_f64(std::vector<unsigned char>& buf, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    for (int i = 0; i < 8; ++i) buf.push_back(static_cast<unsigned char>(bits >> (8 * i)));
}

struct Reader {
    const std::vector<unsigned char>& buf;
    std::size_t pos = 0;

    std::uint32_t u32() {
        if (pos + 4 > buf.size()) throw CheckpointChecksumError("checkpoint truncated");
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(buf[pos++]) << (8 * i);
        return v;
    }
    double f64() {
        if (pos + 8 > buf.size()) throw CheckpointChecksumError("checkpoint truncated");
        std::uint64_t bits = 0;
        for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(buf[pos++]) << (8 * i);
        double v;
        std::memcpy(&v, &bits, 8);
        return v;
    }
};

void put_matrix(std::vector<unsigned char>& buf, const Eigen::MatrixXd& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) put_f64(buf, m(r, c));
}

void get_matrix(Reader& rd, Eigen::MatrixXd& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = rd.f64();
}

void put_vector(std::vector<unsigned char>& buf, const Eigen::VectorXd& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) put_f64(buf, v(i));
}

void get_vector(Reader& rd, Eigen::VectorXd& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = rd.f64();
}

}  // namespace

std::uint32_t crc32(const unsigned char* data, std::size_t len) {
    static std::uint32_t table[256];
    static bool init = false;
    if (!init) {
        for (std::uint32_t i = 0; i < 256; ++i) {
            std::uint32_t c = i;
            for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xedb88320u ^ (c >> 1) : c >> 1;
            table[i] = c;
        }
        init = true;
    }
    std::uint32_t c = 0xffffffffu;
    for (std::size_t i = 0; i < len; ++i) c = table[(c ^ data[i]) & 0xffu] ^ (c >> 8);
    return c ^ 0xffffffffu;
}

void save_checkpoint(const std::string& path, const LayerStack& stack) {
    std::vector<unsigned char> buf;
    buf.insert(buf.end(), kMagic, kMagic + 8);
    put_u32(buf, kVersion);
    put_u32(buf, static_cast<std::uint32_t>(stack.layers.size()));
    put_u32(buf, static_cast<std::uint32_t>(stack.channels()));
    put_u32(buf, static_cast<std::uint32_t>(stack.kernel_len()));
    put_u32(buf, static_cast<std::uint32_t>(stack.outputs()));
    put_u32(buf, static_cast<std::uint32_t>(stack.inputs()));
    put_u32(buf, stack.layers.empty()
                     ? 0u
                     : static_cast<std::uint32_t>(stack.layers[0].activation));

    put_matrix(buf, stack.expansion);
    for (const auto& layer : stack.layers) {
        put_matrix(buf, layer.kernels);
        put_vector(buf, layer.gamma);
    }
    put_matrix(buf, stack.projection);
    for (const auto& layer : stack.layers) {
        put_vector(buf, layer.running_mean);
        put_vector(buf, layer.running_var);
    }
    put_u32(buf, crc32(buf.data(), buf.size()));

    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out.write(reinterpret_cast<const char*>(buf.data()),
              static_cast<std::streamsize>(buf.size()));
}

LayerStack load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::vector<unsigned char> buf((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
    if (buf.size() < 12 || std::memcmp(buf.data(), kMagic, 8) != 0)
        throw CheckpointVersionError("not a checkpoint file: " + path);

    Reader rd{buf, 8};
    const std::uint32_t version = rd.u32();
    if (version != kVersion)
        throw CheckpointVersionError("unsupported checkpoint version " +
                                     std::to_string(version));
    if (buf.size() < 4)
        throw CheckpointChecksumError("checkpoint truncated");
    const std::size_t body = buf.size() - 4;
    Reader trailer{buf, body};
    if (trailer.u32() != crc32(buf.data(), body))
        throw CheckpointChecksumError("checkpoint checksum mismatch: " + path);

    const std::uint32_t n_layers = rd.u32();
    const std::uint32_t channels = rd.u32();
    const std::uint32_t kernel_len = rd.u32();
    const std::uint32_t outputs = rd.u32();
    const std::uint32_t inputs = rd.u32();
    const auto activation = static_cast<Activation>(rd.u32());

    LayerStack stack;
    stack.training = false;
    stack.expansion.resize(channels, inputs);
    get_matrix(rd, stack.expansion);
    stack.layers.resize(n_layers);
    for (auto& layer : stack.layers) {
        layer.kernels.resize(channels, kernel_len);
        layer.gamma.resize(channels);
        layer.activation = activation;
        get_matrix(rd, layer.kernels);
        get_vector(rd, layer.gamma);
    }
    stack.projection.resize(outputs, channels);
    get_matrix(rd, stack.projection);
    for (auto& layer : stack.layers) {
        layer.running_mean.resize(channels);
        layer.running_var.resize(channels);
        get_vector(rd, layer.running_mean);
        get_vector(rd, layer.running_var);
    }
    if (rd.pos != body)
        throw CheckpointChecksumError("checkpoint has trailing bytes: " + path);
    return stack;
}

}  // namespace ccfir::nn
