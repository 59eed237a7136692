#pragma once

#include "cgft/fusion/matrix.hpp"

#include <filesystem>
#include <iosfwd>

namespace cgft::fusion {

/// Binary feature file, little-endian:
///   "CGFTFEAT" | u32 version | u32 id length | id bytes | u64 n_samples |
///   u64 n_dims | n_samples*n_dims float32, row-major
inline constexpr std::uint32_t kFeatureFormatVersion = 1;

/// Binary labels file, little-endian: "CGFTLBLS" | u64 n | n x u32
void write_features(std::ostream& out, const FeatureMatrix& features);
FeatureMatrix read_features(std::istream& in);
void write_features(const std::filesystem::path& path, const FeatureMatrix& features);
FeatureMatrix read_features(const std::filesystem::path& path);

void write_labels(std::ostream& out, const LabelVector& labels);
LabelVector read_labels(std::istream& in);
void write_labels(const std::filesystem::path& path, const LabelVector& labels);
LabelVector read_labels(const std::filesystem::path& path);

} // namespace cgft::fusion
