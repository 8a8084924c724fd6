#pragma once

// Command implementations behind the `devaware` executable. Each returns the
// process exit code: 0 success, 1 invalid input (validation, malformed model,
// error response, failed equivalence gate), 2 I/O or transport failure.

#include <atomic>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "devaware/runtime.hpp"

namespace devaware::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 1;
inline constexpr int kExitIo = 2;

/// Path of the PSM written by `transform` for a given input model.
std::filesystem::path psm_path_for(const std::filesystem::path& model_path, const std::filesystem::path& out_dir);

int cmd_transform(const std::filesystem::path& model_path, const std::filesystem::path& out_dir, std::ostream& out,
                  std::ostream& err);

int cmd_generate(const std::filesystem::path& psm_path, const std::filesystem::path& out_dir, std::ostream& out,
                 std::ostream& err);

struct SimulateOptions {
  std::filesystem::path psm;
  std::filesystem::path icm_dir;
  std::filesystem::path fixtures;
  /// Directory holding `.schema` descriptors; defaults to the PSM's directory.
  std::optional<std::filesystem::path> schemas_dir;
  /// `HOST:PORT`; when absent, requests are read one per line from stdin.
  std::optional<std::string> tcp;
};

/// Builds the service host described by the artifacts. Throws on
/// inconsistent or unreadable artifacts.
std::unique_ptr<ServiceHost> load_service(const SimulateOptions& opts);

/// Formats one request log line: `<op> <DEVICE> -> <schema>`.
std::string format_request_log(const RequestLog& entry);

/// `stop` is polled in TCP mode; `on_listening` receives the bound port.
int cmd_simulate(const SimulateOptions& opts, std::istream& in, std::ostream& out, std::ostream& err,
                 const std::atomic<bool>* stop = nullptr, const std::function<void(uint16_t)>& on_listening = {});

struct InvokeOptions {
  std::string addr;
  std::string op;
  std::vector<std::string> args;  ///< `name=value`
  std::optional<std::string> device;  ///< `cldc` or `cdc`
  std::optional<std::filesystem::path> prefs;
  std::optional<std::filesystem::path> profile;
};

int cmd_invoke(const InvokeOptions& opts, std::ostream& out, std::ostream& err);

int cmd_bench(const std::optional<std::filesystem::path>& config_path, const std::filesystem::path& out_path,
              std::ostream& out, std::ostream& err);

int cmd_render(const std::filesystem::path& response_path, const std::filesystem::path& profile_path,
               const std::optional<std::filesystem::path>& prefs_path, std::ostream& out, std::ostream& err);

/// Parses the command line and dispatches.
int run(int argc, char** argv);

}  // namespace devaware::cli
