#pragma once

#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ueglab {

/// A documented configuration key of a command.
struct KeySpec {
  std::string key;
  std::string default_value;  // "" = unset, "auto" = derived at resolution
  std::string help;
};

/// Commands: scan, entropy, madelung, fit.
const std::vector<std::string>& command_names();
/// Throws invalid_argument for an unknown command.
const std::vector<KeySpec>& command_keys(std::string_view command);

/// Flat key = value settings for one command. Later assignments win; each
/// value remembers where it came from ("file:line" or "command line") so
/// errors can point at it.
class RunConfig {
 public:
  explicit RunConfig(std::string command);

  const std::string& command() const { return command_; }

  /// Reads "key = value" lines; '#' starts a comment, blank lines are
  /// skipped. Unknown keys and malformed lines raise parse_error naming the
  /// source and line.
  void load(std::istream& in, const std::string& source);
  void load_file(const std::string& path);
  void set(const std::string& key, const std::string& value, const std::string& origin = "command line");

  std::optional<std::string> value(const std::string& key) const;
  std::string origin(const std::string& key) const;
  /// Every documented key with its effective value (defaults filled in).
  std::map<std::string, std::string> effective() const;

 private:
  struct Entry {
    std::string value;
    std::string origin;
  };
  std::string command_;
  std::map<std::string, Entry> entries_;
};

struct RunOutcome {
  std::vector<std::string> outputs;  // files written, relative to the output directory
  std::vector<std::string> warnings;
  std::vector<std::string> flags;
  bool flagged() const { return !flags.empty(); }
};

using ProgressSink = std::function<void(const std::string&)>;

/// Executes the command, writing its CSV files and manifest.json into
/// `out_dir` (created if missing). All files are written after computation
/// completes.
RunOutcome execute(const RunConfig& config, const std::string& out_dir, const ProgressSink& progress = {});

/// Rebuilds the configuration recorded in a manifest.
RunConfig config_from_manifest(const std::string& manifest_path);

}  // namespace ueglab
