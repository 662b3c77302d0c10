#include "corn/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace corn {

namespace {

constexpr char kMagic[8] = {'C', 'O', 'R', 'N', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void write_pod(std::ostream& out, const T& value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
void read_pod(std::istream& in, T& value) {
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!in) throw std::runtime_error("checkpoint truncated");
}

template <typename T>
void write_array(std::ostream& out, const std::vector<T>& values) {
    write_pod(out, static_cast<std::uint64_t>(values.size()));
    out.write(reinterpret_cast<const char*>(values.data()),
              static_cast<std::streamsize>(values.size() * sizeof(T)));
}

template <typename T>
std::vector<T> read_array(std::istream& in) {
    std::uint64_t count = 0;
    read_pod(in, count);
    std::vector<T> values(count);
    in.read(reinterpret_cast<char*>(values.data()),
            static_cast<std::streamsize>(count * sizeof(T)));
    if (!in) throw std::runtime_error("checkpoint truncated");
    return values;
}

}  // namespace

void save_checkpoint(const std::string& path, MlpModel<float>& model,
                     const std::vector<double>& mean, const std::vector<double>& stddev) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("could not write checkpoint " + path);

    const auto& config = model.config();
    out.write(kMagic, sizeof(kMagic));
    write_pod(out, kVersion);
    write_pod(out, static_cast<std::uint32_t>(config.head));
    write_pod(out, static_cast<std::int32_t>(config.num_ranks));
    write_pod(out, static_cast<std::uint64_t>(config.input_dim));
    write_pod(out, static_cast<std::uint64_t>(config.seed));
    write_pod(out, static_cast<double>(config.leaky_slope));
    write_pod(out, static_cast<double>(config.dropout_p));
    write_pod(out, static_cast<std::uint32_t>(config.hidden_dims.size()));
    for (const std::size_t h : config.hidden_dims) {
        write_pod(out, static_cast<std::uint64_t>(h));
    }
    write_array(out, mean);
    write_array(out, stddev);

    const auto params = model.parameters();
    write_pod(out, static_cast<std::uint32_t>(params.size()));
    for (const auto& p : params) {
        write_pod(out, static_cast<std::uint64_t>(p.rows()));
        write_pod(out, static_cast<std::uint64_t>(p.cols()));
        write_array(out, p.values());
    }
    if (!out) throw std::runtime_error("failed writing checkpoint " + path);
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("could not open checkpoint " + path);

    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
        throw std::runtime_error(path + " is not a model checkpoint");
    }
    std::uint32_t version = 0;
    read_pod(in, version);
    if (version != kVersion) {
        throw std::runtime_error("unsupported checkpoint version " + std::to_string(version));
    }

    MlpConfig<float> config;
    std::uint32_t head = 0;
    std::int32_t num_ranks = 0;
    std::uint64_t input_dim = 0, seed = 0;
    double slope = 0.0, dropout = 0.0;
    read_pod(in, head);
    read_pod(in, num_ranks);
    read_pod(in, input_dim);
    read_pod(in, seed);
    read_pod(in, slope);
    read_pod(in, dropout);
    config.head = static_cast<HeadKind>(head);
    config.num_ranks = num_ranks;
    config.input_dim = input_dim;
    config.seed = seed;
    config.leaky_slope = static_cast<float>(slope);
    config.dropout_p = static_cast<float>(dropout);
    std::uint32_t hidden_count = 0;
    read_pod(in, hidden_count);
    for (std::uint32_t i = 0; i < hidden_count; ++i) {
        std::uint64_t h = 0;
        read_pod(in, h);
        config.hidden_dims.push_back(h);
    }

    LoadedCheckpoint loaded{MlpModel<float>::init(config), {}, {}};
    loaded.mean = read_array<double>(in);
    loaded.stddev = read_array<double>(in);

    std::uint32_t param_count = 0;
    read_pod(in, param_count);
    auto params = loaded.model.parameters();
    if (param_count != params.size()) {
        throw std::runtime_error("checkpoint parameter count mismatch");
    }
    std::vector<std::vector<float>> snapshot;
    for (std::uint32_t i = 0; i < param_count; ++i) {
        std::uint64_t rows = 0, cols = 0;
        read_pod(in, rows);
        read_pod(in, cols);
        if (rows != params[i].rows() || cols != params[i].cols()) {
            throw std::runtime_error("checkpoint parameter shape mismatch");
        }
        snapshot.push_back(read_array<float>(in));
    }
    loaded.model.restore_parameters(snapshot);
    return loaded;
}

}  // namespace corn
