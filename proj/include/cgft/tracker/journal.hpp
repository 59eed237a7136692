#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace cgft::tracker {

/// Append-only JSON-lines logs, one per logical store, under one data
/// directory:
///
///   patients.log                 profiles and device links
///   db1_readings/readings.log    glucose readings
///   db2_meals/meals.log          meal events and confirmations
///   db3_training/bundle.json     deployed recognizer bundle
///
/// Every record carries a sequence number (lsn) shared by all logs, so
/// replay restores the original interleaving. Each line is
/// {"lsn":N,"type":T,"data":D}.
class Journal {
  public:
    enum class Store { patients, readings, meals };

    struct Record {
        std::uint64_t lsn = 0;
        Store store = Store::patients;
        std::string type;
        nlohmann::json data;
    };

    /// An empty path gives an in-memory journal that records nothing.
    /// Creates the directory layout. Throws StorageError.
    explicit Journal(std::filesystem::path data_dir);

    Journal(const Journal&) = delete;
    Journal& operator=(const Journal&) = delete;

    /// Every record of every log in lsn order. An incomplete last line (a
    /// write torn by a crash) is dropped and cut from the file; any other
    /// unreadable line throws StorageError. Sets next_lsn() past the last
    /// record. Call once, before the first append.
    std::vector<Record> replay();

    /// Writes and flushes one record; returns its lsn. Throws StorageError,
    /// in which case the lsn is not consumed.
    std::uint64_t append(Store store, const std::string& type, const nlohmann::json& data);

    [[nodiscard]] bool persistent() const noexcept { return !data_dir_.empty(); }
    [[nodiscard]] std::uint64_t next_lsn() const noexcept { return next_lsn_; }
    [[nodiscard]] const std::filesystem::path& data_dir() const noexcept { return data_dir_; }
    [[nodiscard]] std::filesystem::path log_path(Store store) const;
    [[nodiscard]] std::filesystem::path bundle_path() const;

  private:
    std::ofstream& stream(Store store);

    std::filesystem::path data_dir_;
    std::uint64_t next_lsn_ = 1;
    std::ofstream patients_;
    std::ofstream readings_;
    std::ofstream meals_;
};

} // namespace cgft::tracker
