#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mfsg/config.hpp"

namespace mfsg {

inline constexpr int kSummarySchemaVersion = 1;

struct CommandOptions {
    bool force = false;                  // run spectra despite failed checks
    std::optional<std::string> out_dir;  // overrides output_dir
};

const std::vector<std::string>& command_names();

/// Runs one command and returns its exit code: 0 success, 2 config error,
/// 3 condition-check failure, 4 numeric failure. Results go to `out`,
/// diagnostics to `err`.
int run_command(const std::string& command, const RunConfig& config, const CommandOptions& options, std::ostream& out,
                std::ostream& err);

}  // namespace mfsg
