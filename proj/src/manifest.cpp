#include "policymc/manifest.hpp"

#include <ctime>
#include <sstream>

#include "policymc/errors.hpp"
#include "policymc/io_util.hpp"

namespace policymc {

std::string iso_utc_now() {
    std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_manifest(const RunManifest& m, const std::string& path) {
    std::ostringstream os;
    os << "tool_version = " << m.tool_version << "\n";
    os << "command_line = " << m.command_line << "\n";
    os << "config_hash = " << m.config_hash << "\n";
    os << "model_hash = " << m.model_hash << "\n";
    os << "checkpoint_hash = " << m.checkpoint_hash << "\n";
    os << "seed = " << m.seed << "\n";
    os << "started_at = " << m.started_at << "\n";
    os << "finished_at = " << m.finished_at << "\n";
    write_file_atomic(path, os.str());
}

RunManifest read_manifest(const std::string& path) {
    std::istringstream in(read_file(path));
    RunManifest m;
    std::string line;
    while (std::getline(in, line)) {
        auto eq = line.find(" = ");
        if (eq == std::string::npos) continue;
        std::string key = line.substr(0, eq);
        std::string value = line.substr(eq + 3);
        if (key == "tool_version") m.tool_version = value;
        else if (key == "command_line") m.command_line = value;
        else if (key == "config_hash") m.config_hash = value;
        else if (key == "model_hash") m.model_hash = value;
        else if (key == "checkpoint_hash") m.checkpoint_hash = value;
        else if (key == "seed") m.seed = std::stoull(value);
        else if (key == "started_at") m.started_at = value;
        else if (key == "finished_at") m.finished_at = value;
        else throw ModelError("manifest " + path + ": unknown key '" + key + "'");
    }
    return m;
}

} // namespace policymc
