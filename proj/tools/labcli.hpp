#pragma once

#include <optional>
#include <string>
#include <vector>

namespace groklab::cli {

// Exit codes: 0 clean, 1 invalid input, 2 partial (some grid points or
// members failed), 3 verification failure.
enum ExitCode { kClean = 0, kInvalid = 1, kPartial = 2, kVerifyFailed = 3 };

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    std::optional<std::string> output_dir;
    bool force = false;
};

int cmd_ts_theory(const std::string& config_path, const Overrides& ov);
int cmd_mod_theory(const std::string& config_path, const Overrides& ov);
int cmd_scan(const std::string& config_path, const Overrides& ov);
int cmd_sample(const std::string& config_path, const Overrides& ov);
int cmd_verify(const std::string& config_path, const Overrides& ov);
int cmd_resume(const std::string& checkpoint_path, long until_step, const Overrides& ov);

// Parses + schema-validates a config file; throws std::invalid_argument
// naming the offending field. Exposed for tests.
void validate_config_file(const std::string& config_path);

}  // namespace groklab::cli
