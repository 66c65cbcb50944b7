#ifndef JACKSTRAW_CHECKPOINT_HPP
#define JACKSTRAW_CHECKPOINT_HPP

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "error.hpp"

namespace jackstraw {

/// Resumable state of a permute-s run: the null statistics of iterations
/// 0..completed-1, laid out s per iteration.
struct Checkpoint {
    std::string input_digest;
    std::string config_digest;
    std::int64_t s = 0;
    std::int64_t b = 0;
    std::int64_t completed = 0;
    std::vector<double> null_pool;
};

inline constexpr const char* kCheckpointFormat = "jackstraw-checkpoint/1";

namespace detail {

// JSON has no infinity; perfect-fit statistics are stored as the string "inf".
inline nlohmann::json encode_stat(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

inline double decode_stat(const nlohmann::json& v) {
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        if (s == "inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
        fail(ErrorKind::Parse, "checkpoint: unexpected value '" + s + "'");
    }
    return v.get<double>();
}

} // namespace detail

inline void write_checkpoint(const std::filesystem::path& path, const Checkpoint& cp) {
    nlohmann::json j;
    j["format"] = kCheckpointFormat;
    j["input_digest"] = cp.input_digest;
    j["config_digest"] = cp.config_digest;
    j["s"] = cp.s;
    j["b"] = cp.b;
    j["completed"] = cp.completed;
    auto& pool = j["null_pool"] = nlohmann::json::array();
    for (double v : cp.null_pool) pool.push_back(detail::encode_stat(v));

    // Write-then-rename so an interrupted write never leaves a torn snapshot.
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp);
        if (!out) fail(ErrorKind::InvalidConfig, "cannot write checkpoint " + tmp.string());
        out << j.dump();
    }
    std::filesystem::rename(tmp, path);
}

inline std::optional<Checkpoint> read_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) return std::nullopt;
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::Parse, "checkpoint " + path.string() + ": " + e.what());
    }
    if (j.value("format", "") != kCheckpointFormat) {
        fail(ErrorKind::Parse, "checkpoint " + path.string() + ": unknown format");
    }
    Checkpoint cp;
    cp.input_digest = j.at("input_digest").get<std::string>();
    cp.config_digest = j.at("config_digest").get<std::string>();
    cp.s = j.at("s").get<std::int64_t>();
    cp.b = j.at("b").get<std::int64_t>();
    cp.completed = j.at("completed").get<std::int64_t>();
    for (const auto& v : j.at("null_pool")) cp.null_pool.push_back(detail::decode_stat(v));
    if (static_cast<std::int64_t>(cp.null_pool.size()) != cp.s * cp.completed) {
        fail(ErrorKind::Parse, "checkpoint " + path.string() + ": null pool size does not match iteration count");
    }
    return cp;
}

} // namespace jackstraw

#endif
