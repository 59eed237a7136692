#include "cgft/tracker/journal.hpp"

#include "cgft/common/error.hpp"

#include <algorithm>
#include <sstream>

namespace cgft::tracker {

namespace fs = std::filesystem;

namespace {

constexpr Journal::Store kStores[] = {Journal::Store::patients, Journal::Store::readings, Journal::Store::meals};

} // namespace

Journal::Journal(fs::path data_dir) : data_dir_(std::move(data_dir)) {
    if (!persistent()) {
        return;
    }
    std::error_code ec;
    for (const auto* sub : {"db1_readings", "db2_meals", "db3_training"}) {
        fs::create_directories(data_dir_ / sub, ec);
        if (ec) {
            throw StorageError("cannot create '" + (data_dir_ / sub).string() + "': " + ec.message());
        }
    }
}

fs::path Journal::log_path(Store store) const {
    switch (store) {
    case Store::patients:
        return data_dir_ / "patients.log";
    case Store::readings:
        return data_dir_ / "db1_readings" / "readings.log";
    case Store::meals:
        return data_dir_ / "db2_meals" / "meals.log";
    }
    return {};
}

fs::path Journal::bundle_path() const {
    return data_dir_ / "db3_training" / "bundle.json";
}

std::vector<Journal::Record> Journal::replay() {
    std::vector<Record> records;
    if (!persistent()) {
        return records;
    }
    for (auto store : kStores) {
        const auto path = log_path(store);
        std::ifstream in(path, std::ios::binary);
        if (!in) {
            continue;
        }
        std::stringstream buffer;
        buffer << in.rdbuf();
        const std::string text = buffer.str();
        in.close();

        std::size_t pos = 0;
        std::size_t line_no = 0;
        while (pos < text.size()) {
            ++line_no;
            const auto nl = text.find('\n', pos);
            const bool last = nl == std::string::npos || nl + 1 == text.size();
            const auto line = text.substr(pos, nl == std::string::npos ? std::string::npos : nl - pos);
            Record rec;
            bool ok = nl != std::string::npos;
            if (ok) {
                try {
                    const auto j = nlohmann::json::parse(line);
                    rec.lsn = j.at("lsn").get<std::uint64_t>();
                    rec.type = j.at("type").get<std::string>();
                    rec.data = j.at("data");
                    rec.store = store;
                } catch (const nlohmann::json::exception&) {
                    ok = false;
                }
            }
            if (!ok) {
                if (!last) {
                    throw StorageError("corrupt record at " + path.string() + ":" + std::to_string(line_no));
                }
                std::error_code ec;
                fs::resize_file(path, pos, ec);
                if (ec) {
                    throw StorageError("cannot truncate torn record in " + path.string() + ": " + ec.message());
                }
                break;
            }
            records.push_back(std::move(rec));
            pos = nl + 1;
        }
    }
    std::stable_sort(records.begin(), records.end(), [](const Record& a, const Record& b) { return a.lsn < b.lsn; });
    for (std::size_t i = 1; i < records.size(); ++i) {
        if (records[i].lsn == records[i - 1].lsn) {
            throw StorageError("duplicate lsn " + std::to_string(records[i].lsn) + " in journal");
        }
    }
    if (!records.empty()) {
        next_lsn_ = records.back().lsn + 1;
    }
    return records;
}

std::ofstream& Journal::stream(Store store) {
    auto& out = store == Store::patients ? patients_ : store == Store::readings ? readings_ : meals_;
    if (!out.is_open()) {
        out.open(log_path(store), std::ios::binary | std::ios::app);
        if (!out) {
            throw StorageError("cannot open " + log_path(store).string() + " for appending");
        }
    }
    return out;
}

std::uint64_t Journal::append(Store store, const std::string& type, const nlohmann::json& data) {
    const auto lsn = next_lsn_;
    if (persistent()) {
        nlohmann::json line{{"lsn", lsn}, {"type", type}, {"data", data}};
        auto& out = stream(store);
        out << line.dump() << '\n';
        out.flush();
        if (!out) {
            out.close();
            throw StorageError("write to " + log_path(store).string() + " failed");
        }
    }
    ++next_lsn_;
    return lsn;
}

} // namespace cgft::tracker
