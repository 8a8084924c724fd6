#pragma once

// Interceptor generation. One InterceptorSpec is produced per device-aware
// operation of a PSM and rendered as an `.icm` manifest, a `key: value` text
// file with a fixed field order:
//
//   aspect_name: Aspect_<package>_<Class>_<operation>
//   pointcut_name: PC_<Class>_<operation>
//   package: <package>
//   target_class: <Class>
//   operation: <operation>
//   input_params: (<name>: <Type>, ...)
//   extended_type: <T>_Extended
//   base_type: <T>_Base
//   advice: around
//   device_branch: if device == CLDC then convertToBase
//
// The runtime interprets the manifest: intercept execution of the target
// operation, read the device from the request context, proceed to obtain the
// Extended record and convert it to Base when the device is CLDC.

#include <filesystem>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "devaware/pim2psm.hpp"

namespace devaware {

inline constexpr std::string_view kAdviceAround = "around";
inline constexpr std::string_view kCldcBranch = "if device == CLDC then convertToBase";

struct InterceptorSpec {
  std::string aspect_name;
  std::string pointcut_name;
  std::string package;
  std::string target_class;
  std::string operation;
  std::vector<std::pair<std::string, std::string>> input_params;
  std::string extended_type;
  std::string base_type;
  std::string advice{kAdviceAround};
  std::string device_branch{kCldcBranch};

  bool operator==(const InterceptorSpec&) const = default;
};

struct GeneratedArtifact {
  std::filesystem::path path;  ///< relative to the output directory
  std::string text;
};

class CodegenError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string aspect_name_for(std::string_view package, std::string_view cls, std::string_view operation);
std::string pointcut_name_for(std::string_view cls, std::string_view operation);

std::vector<InterceptorSpec> generate_interceptors(const PsmModel& psm);

GeneratedArtifact render_interceptor(const InterceptorSpec& spec);

/// Parses a rendered manifest. Throws CodegenError on malformed input.
InterceptorSpec parse_interceptor(std::string_view text);

/// Writes `<package>/<aspect_name>.icm` for each spec under `out_dir` and
/// returns the written paths in generation order.
std::vector<std::filesystem::path> write_artifacts(const std::vector<InterceptorSpec>& specs,
                                                   const std::filesystem::path& out_dir);

/// Loads every `.icm` file below `dir`, sorted by path.
std::vector<InterceptorSpec> load_manifests(const std::filesystem::path& dir);

}  // namespace devaware
