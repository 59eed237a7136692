#pragma once

#include "cgft/fusion/matrix.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace cgft::dataset {

enum class Split { unassigned, train, validation, test };

std::string to_string(Split split);
/// Throws DataError for anything but "unassigned", "train", "validation", "test".
Split parse_split(const std::string& text);

/// Categories that look alike and are recognized as one class; the patient
/// picks the actual member afterwards.
struct MergeGroup {
    std::string name;
    std::vector<std::string> members;

    friend bool operator==(const MergeGroup&, const MergeGroup&) = default;
};

struct SampleRecord {
    std::string id;
    std::string category;
    Split split = Split::unassigned;
    std::optional<std::string> image_path;

    friend bool operator==(const SampleRecord&, const SampleRecord&) = default;
};

struct DatasetManifest {
    std::vector<std::string> categories;
    std::vector<MergeGroup> merge_groups;
    std::vector<SampleRecord> samples;

    /// Checks unique category names and sample ids, known categories in
    /// samples and groups, and disjoint groups. Throws DataError pointing at
    /// the offending record.
    void validate() const;

    /// Throws NotFound for unknown names.
    [[nodiscard]] std::uint32_t category_index(const std::string& name) const;

    friend bool operator==(const DatasetManifest&, const DatasetManifest&) = default;
};

/// UTF-8 JSON object with `categories`, `merge_groups` and `samples`.
DatasetManifest parse_manifest(const std::string& text);
std::string manifest_to_string(const DatasetManifest& manifest);
DatasetManifest load_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const DatasetManifest& manifest);

/// Original category index -> merged class index, plus the member names
/// offered for disambiguation. Unmerged categories become singleton classes
/// named after themselves; merged classes take the position of their first
/// member in category order.
struct MergedLabelMap {
    std::vector<std::uint32_t> original_to_merged;
    std::vector<std::string> merged_names;
    std::vector<std::vector<std::string>> members;

    static MergedLabelMap from_manifest(const DatasetManifest& manifest);
    static MergedLabelMap identity(const std::vector<std::string>& categories);

    [[nodiscard]] std::size_t n_original() const noexcept { return original_to_merged.size(); }
    [[nodiscard]] std::size_t n_merged() const noexcept { return merged_names.size(); }
    [[nodiscard]] bool is_group(std::size_t merged) const { return members.at(merged).size() > 1; }

    /// Surjectivity and shape checks; throws DataError.
    void validate() const;

    friend bool operator==(const MergedLabelMap&, const MergedLabelMap&) = default;
};

/// Throws InvalidArgument for labels outside the map's domain.
fusion::LabelVector apply_merge(const fusion::LabelVector& labels, const MergedLabelMap& map);

/// Category index of every sample, in manifest order.
fusion::LabelVector original_labels(const DatasetManifest& manifest);

struct SplitRatios {
    double train = 0.6;
    double validation = 0.2;
    double test = 0.2;
};

/// Stratified by merged class and deterministic given the seed. Each class
/// gets round(n*ratio) validation and test samples (at least one each) and
/// the rest go to training.
///
/// Throws InvalidArgument for non-positive ratios or a sum away from 1, and
/// DataError naming any class with fewer than three samples.
DatasetManifest split_dataset(const DatasetManifest& manifest, const SplitRatios& ratios, std::uint64_t seed);

/// Sample positions assigned to `split`, in manifest order.
std::vector<std::size_t> indices_of(const DatasetManifest& manifest, Split split);

} // namespace cgft::dataset
