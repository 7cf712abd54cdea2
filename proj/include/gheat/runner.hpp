#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace gheat::runner {

struct Check {
    std::string module;
    std::string name;
    std::string scenario;
    double statistic = 0.0;
    double bound = 0.0;
    double stderr_ = 0.0;
    bool pass = false;
};

struct RunResult {
    std::vector<Check> checks;
    nlohmann::json summary;
    bool config_error = false;
    bool all_passed() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return true;
    }
};

// Known commands, in full-suite execution order.
const std::vector<std::string>& commands();

nlohmann::json default_config(const std::string& command);

// Validates the config (unknown keys rejected), runs the command, writes the
// run summary and CSV artifacts into output_dir.
RunResult run(const nlohmann::json& config, std::ostream& log);

// Exit status convention: 0 all checks pass, 1 check failure, 2 config error.
int exit_code(const RunResult& result);

}  // namespace gheat::runner
