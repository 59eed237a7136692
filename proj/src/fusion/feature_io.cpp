#include "cgft/fusion/feature_io.hpp"

#include "cgft/common/error.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace cgft::fusion {

namespace {

constexpr std::array<char, 8> kFeatureMagic{'C', 'G', 'F', 'T', 'F', 'E', 'A', 'T'};
constexpr std::array<char, 8> kLabelMagic{'C', 'G', 'F', 'T', 'L', 'B', 'L', 'S'};

// Guards against absurd headers before allocating.
constexpr std::uint64_t kMaxElements = std::uint64_t{1} << 34;

template <typename T>
void put_le(std::ostream& out, T value) {
    std::array<unsigned char, sizeof(T)> bytes{};
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        bytes[i] = static_cast<unsigned char>((value >> (8 * i)) & 0xFF);
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), bytes.size());
}

template <typename T>
T get_le(std::istream& in, const char* what) {
    std::array<unsigned char, sizeof(T)> bytes{};
    if (!in.read(reinterpret_cast<char*>(bytes.data()), bytes.size())) {
        throw DataError(std::string("truncated file while reading ") + what);
    }
    T value = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        value |= static_cast<T>(bytes[i]) << (8 * i);
    }
    return value;
}

void expect_magic(std::istream& in, const std::array<char, 8>& magic) {
    std::array<char, 8> got{};
    if (!in.read(got.data(), got.size()) || got != magic) {
        throw DataError("bad magic: expected '" + std::string(magic.data(), magic.size()) + "'");
    }
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw DataError("cannot open '" + path.string() + "' for writing");
    }
    return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open '" + path.string() + "'");
    }
    return in;
}

} // namespace

void write_features(std::ostream& out, const FeatureMatrix& features) {
    out.write(kFeatureMagic.data(), kFeatureMagic.size());
    put_le<std::uint32_t>(out, kFeatureFormatVersion);
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(features.model_id().size()));
    out.write(features.model_id().data(), static_cast<std::streamsize>(features.model_id().size()));
    put_le<std::uint64_t>(out, features.rows());
    put_le<std::uint64_t>(out, features.cols());
    for (double v : features.values()) {
        put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
    }
    if (!out) {
        throw DataError("failed writing feature matrix");
    }
}

FeatureMatrix read_features(std::istream& in) {
    expect_magic(in, kFeatureMagic);
    const auto version = get_le<std::uint32_t>(in, "version");
    if (version != kFeatureFormatVersion) {
        throw DataError("unsupported feature format version " + std::to_string(version));
    }
    const auto id_len = get_le<std::uint32_t>(in, "model id length");
    if (id_len > 4096) {
        throw DataError("model id length " + std::to_string(id_len) + " is implausible");
    }
    std::string model_id(id_len, '\0');
    if (!in.read(model_id.data(), id_len)) {
        throw DataError("truncated file while reading model id");
    }
    const auto rows = get_le<std::uint64_t>(in, "n_samples");
    const auto cols = get_le<std::uint64_t>(in, "n_dims");
    if (rows == 0 || cols == 0 || rows > kMaxElements / cols) {
        throw DataError("feature file has invalid shape " + std::to_string(rows) + "x" + std::to_string(cols));
    }
    std::vector<double> values(rows * cols);
    for (auto& v : values) {
        v = static_cast<double>(std::bit_cast<float>(get_le<std::uint32_t>(in, "feature values")));
    }
    return FeatureMatrix(std::move(model_id), rows, cols, std::move(values));
}

void write_features(const std::filesystem::path& path, const FeatureMatrix& features) {
    auto out = open_out(path);
    write_features(out, features);
}

FeatureMatrix read_features(const std::filesystem::path& path) {
    auto in = open_in(path);
    return read_features(in);
}

void write_labels(std::ostream& out, const LabelVector& labels) {
    out.write(kLabelMagic.data(), kLabelMagic.size());
    put_le<std::uint64_t>(out, labels.size());
    for (auto y : labels) {
        put_le<std::uint32_t>(out, y);
    }
    if (!out) {
        throw DataError("failed writing labels");
    }
}

LabelVector read_labels(std::istream& in) {
    expect_magic(in, kLabelMagic);
    const auto n = get_le<std::uint64_t>(in, "label count");
    if (n > kMaxElements) {
        throw DataError("label count " + std::to_string(n) + " is implausible");
    }
    LabelVector labels(n);
    for (auto& y : labels) {
        y = get_le<std::uint32_t>(in, "labels");
    }
    return labels;
}

void write_labels(const std::filesystem::path& path, const LabelVector& labels) {
    auto out = open_out(path);
    write_labels(out, labels);
}

LabelVector read_labels(const std::filesystem::path& path) {
    auto in = open_in(path);
    return read_labels(in);
}

} // namespace cgft::fusion
