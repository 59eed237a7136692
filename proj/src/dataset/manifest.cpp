#include "cgft/dataset/manifest.hpp"

#include "cgft/common/error.hpp"
#include "cgft/common/rng.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace cgft::dataset {

using nlohmann::json;
using nlohmann::ordered_json;

std::string to_string(Split split) {
    switch (split) {
    case Split::train:
        return "train";
    case Split::validation:
        return "validation";
    case Split::test:
        return "test";
    case Split::unassigned:
        break;
    }
    return "unassigned";
}

Split parse_split(const std::string& text) {
    if (text == "train") {
        return Split::train;
    }
    if (text == "validation") {
        return Split::validation;
    }
    if (text == "test") {
        return Split::test;
    }
    if (text == "unassigned") {
        return Split::unassigned;
    }
    throw DataError("unknown split '" + text + "'");
}

void DatasetManifest::validate() const {
    std::set<std::string> names;
    for (std::size_t i = 0; i < categories.size(); ++i) {
        if (categories[i].empty()) {
            throw DataError("categories[" + std::to_string(i) + "]: empty name");
        }
        if (!names.insert(categories[i]).second) {
            throw DataError("categories[" + std::to_string(i) + "]: duplicate category '" + categories[i] + "'");
        }
    }
    std::map<std::string, std::size_t> grouped;
    std::set<std::string> group_names;
    for (std::size_t g = 0; g < merge_groups.size(); ++g) {
        const auto& group = merge_groups[g];
        const std::string where = "merge_groups[" + std::to_string(g) + "]";
        if (group.name.empty() || group.members.empty()) {
            throw DataError(where + ": a group needs a name and at least one member");
        }
        if (!group_names.insert(group.name).second) {
            throw DataError(where + ": duplicate group name '" + group.name + "'");
        }
        for (const auto& member : group.members) {
            if (!names.contains(member)) {
                throw DataError(where + ": unknown category '" + member + "'");
            }
            auto [it, inserted] = grouped.emplace(member, g);
            if (!inserted) {
                throw DataError(where + ": category '" + member + "' already belongs to merge_groups[" +
                                std::to_string(it->second) + "]");
            }
        }
    }
    // Merged class names must stay distinct from surviving singleton names.
    for (const auto& group : merge_groups) {
        if (names.contains(group.name) && !grouped.contains(group.name)) {
            throw DataError("merge group name '" + group.name + "' collides with an unmerged category");
        }
    }
    std::set<std::string> ids;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& s = samples[i];
        const std::string where = "samples[" + std::to_string(i) + "] ('" + s.id + "')";
        if (s.id.empty()) {
            throw DataError("samples[" + std::to_string(i) + "]: empty id");
        }
        if (!ids.insert(s.id).second) {
            throw DataError(where + ": duplicate sample id");
        }
        if (!names.contains(s.category)) {
            throw DataError(where + ": unknown category '" + s.category + "'");
        }
    }
}

std::uint32_t DatasetManifest::category_index(const std::string& name) const {
    for (std::size_t i = 0; i < categories.size(); ++i) {
        if (categories[i] == name) {
            return static_cast<std::uint32_t>(i);
        }
    }
    throw NotFound("unknown category '" + name + "'");
}

namespace {

template <typename T>
T field(const json& j, const char* key, const std::string& where) {
    if (!j.is_object() || !j.contains(key)) {
        throw DataError(where + ": missing field '" + key + "'");
    }
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw DataError(where + ": field '" + key + "' has the wrong type");
    }
}

} // namespace

DatasetManifest parse_manifest(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw DataError(std::string("manifest is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) {
        throw DataError("manifest must be a JSON object");
    }
    DatasetManifest m;
    m.categories = field<std::vector<std::string>>(doc, "categories", "manifest");
    if (doc.contains("merge_groups")) {
        const auto& groups = doc.at("merge_groups");
        if (!groups.is_array()) {
            throw DataError("manifest: 'merge_groups' must be an array");
        }
        for (std::size_t g = 0; g < groups.size(); ++g) {
            const std::string where = "merge_groups[" + std::to_string(g) + "]";
            m.merge_groups.push_back({field<std::string>(groups[g], "name", where),
                                      field<std::vector<std::string>>(groups[g], "members", where)});
        }
    }
    const auto samples = doc.contains("samples") ? doc.at("samples") : json::array();
    if (!samples.is_array()) {
        throw DataError("manifest: 'samples' must be an array");
    }
    m.samples.reserve(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const std::string where = "samples[" + std::to_string(i) + "]";
        SampleRecord s;
        s.id = field<std::string>(samples[i], "id", where);
        s.category = field<std::string>(samples[i], "category", where);
        try {
            s.split = parse_split(field<std::string>(samples[i], "split", where));
        } catch (const DataError& e) {
            throw DataError(where + ": " + e.what());
        }
        if (samples[i].contains("image_path") && !samples[i].at("image_path").is_null()) {
            s.image_path = field<std::string>(samples[i], "image_path", where);
        }
        m.samples.push_back(std::move(s));
    }
    m.validate();
    return m;
}

std::string manifest_to_string(const DatasetManifest& manifest) {
    ordered_json doc;
    doc["categories"] = manifest.categories;
    doc["merge_groups"] = ordered_json::array();
    for (const auto& g : manifest.merge_groups) {
        ordered_json group;
        group["name"] = g.name;
        group["members"] = g.members;
        doc["merge_groups"].push_back(std::move(group));
    }
    doc["samples"] = ordered_json::array();
    for (const auto& s : manifest.samples) {
        ordered_json rec;
        rec["id"] = s.id;
        rec["category"] = s.category;
        rec["split"] = to_string(s.split);
        if (s.image_path) {
            rec["image_path"] = *s.image_path;
        }
        doc["samples"].push_back(std::move(rec));
    }
    return doc.dump(2) + "\n";
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open manifest '" + path.string() + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return parse_manifest(buf.str());
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

void write_manifest(const std::filesystem::path& path, const DatasetManifest& manifest) {
    manifest.validate();
    std::ofstream out(path, std::ios::trunc);
    out << manifest_to_string(manifest);
    if (!out) {
        throw DataError("cannot write manifest '" + path.string() + "'");
    }
}

MergedLabelMap MergedLabelMap::from_manifest(const DatasetManifest& manifest) {
    manifest.validate();
    std::map<std::string, std::size_t> group_of;
    for (std::size_t g = 0; g < manifest.merge_groups.size(); ++g) {
        for (const auto& member : manifest.merge_groups[g].members) {
            group_of[member] = g;
        }
    }
    MergedLabelMap map;
    std::map<std::size_t, std::uint32_t> group_index;
    for (const auto& name : manifest.categories) {
        auto it = group_of.find(name);
        if (it == group_of.end()) {
            map.original_to_merged.push_back(static_cast<std::uint32_t>(map.merged_names.size()));
            map.merged_names.push_back(name);
            map.members.push_back({name});
            continue;
        }
        auto [pos, inserted] = group_index.emplace(it->second, static_cast<std::uint32_t>(map.merged_names.size()));
        if (inserted) {
            const auto& group = manifest.merge_groups[it->second];
            map.merged_names.push_back(group.name);
            map.members.push_back(group.members);
        }
        map.original_to_merged.push_back(pos->second);
    }
    return map;
}

MergedLabelMap MergedLabelMap::identity(const std::vector<std::string>& categories) {
    DatasetManifest m;
    m.categories = categories;
    return from_manifest(m);
}

void MergedLabelMap::validate() const {
    if (merged_names.size() != members.size()) {
        throw DataError("merge map: names and member lists differ in length");
    }
    std::vector<bool> hit(merged_names.size(), false);
    for (auto m : original_to_merged) {
        if (m >= merged_names.size()) {
            throw DataError("merge map: target index " + std::to_string(m) + " out of range");
        }
        hit[m] = true;
    }
    for (std::size_t i = 0; i < hit.size(); ++i) {
        if (!hit[i] || members[i].empty()) {
            throw DataError("merge map: merged class " + std::to_string(i) + " has no member");
        }
    }
}

fusion::LabelVector apply_merge(const fusion::LabelVector& labels, const MergedLabelMap& map) {
    fusion::LabelVector out(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] >= map.n_original()) {
            throw InvalidArgument("label " + std::to_string(labels[i]) + " at sample " + std::to_string(i) +
                                  " is outside the merge map's domain");
        }
        out[i] = map.original_to_merged[labels[i]];
    }
    return out;
}

fusion::LabelVector original_labels(const DatasetManifest& manifest) {
    std::map<std::string, std::uint32_t> index;
    for (std::size_t i = 0; i < manifest.categories.size(); ++i) {
        index[manifest.categories[i]] = static_cast<std::uint32_t>(i);
    }
    fusion::LabelVector out;
    out.reserve(manifest.samples.size());
    for (const auto& s : manifest.samples) {
        auto it = index.find(s.category);
        if (it == index.end()) {
            throw DataError("sample '" + s.id + "' has unknown category '" + s.category + "'");
        }
        out.push_back(it->second);
    }
    return out;
}

DatasetManifest split_dataset(const DatasetManifest& manifest, const SplitRatios& ratios, std::uint64_t seed) {
    if (!(ratios.train > 0.0) || !(ratios.validation > 0.0) || !(ratios.test > 0.0)) {
        throw InvalidArgument("split ratios must all be positive");
    }
    if (std::abs(ratios.train + ratios.validation + ratios.test - 1.0) > 1e-9) {
        throw InvalidArgument("split ratios must sum to 1");
    }
    const auto map = MergedLabelMap::from_manifest(manifest);
    const auto merged = apply_merge(original_labels(manifest), map);

    std::vector<std::vector<std::size_t>> by_class(map.n_merged());
    for (std::size_t i = 0; i < merged.size(); ++i) {
        by_class[merged[i]].push_back(i);
    }
    DatasetManifest out = manifest;
    Rng rng(seed);
    for (std::size_t c = 0; c < by_class.size(); ++c) {
        auto& members = by_class[c];
        const std::size_t n = members.size();
        if (n < 3) {
            throw DataError("class '" + map.merged_names[c] + "' has " + std::to_string(n) +
                            " samples; at least 3 are needed to populate every split");
        }
        auto share = [n](double r) {
            return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(static_cast<double>(n) * r)));
        };
        std::size_t n_val = share(ratios.validation);
        std::size_t n_test = share(ratios.test);
        while (n_val + n_test >= n) {
            (n_val >= n_test ? n_val : n_test) -= 1;
        }
        rng.shuffle(std::span<std::size_t>(members));
        for (std::size_t k = 0; k < n; ++k) {
            Split s = Split::train;
            if (k < n_val) {
                s = Split::validation;
            } else if (k < n_val + n_test) {
                s = Split::test;
            }
            out.samples[members[k]].split = s;
        }
    }
    return out;
}

std::vector<std::size_t> indices_of(const DatasetManifest& manifest, Split split) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < manifest.samples.size(); ++i) {
        if (manifest.samples[i].split == split) {
            out.push_back(i);
        }
    }
    return out;
}

} // namespace cgft::dataset
