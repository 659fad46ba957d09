#pragma once

#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace selfadj::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitInternal = 3;

/// Invalid configuration; the message names the offending key.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Effective config of a subcommand: built-in defaults, then the preset,
/// then the JSON config file, then flags. Unknown keys throw ConfigError.
/// `flags` maps key -> raw flag text.
nlohmann::json resolve_config(const std::string& command, const std::string& preset, bool full_scale,
                              const nlohmann::json& file, const std::vector<std::pair<std::string, std::string>>& flags);

/// Names accepted by --paper-preset and the subcommand each belongs to.
std::string preset_command(const std::string& preset);

/// Entry point: parses argv, runs the subcommand, returns the exit status.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int dispatch(int argc, char** argv);

}  // namespace selfadj::cli
