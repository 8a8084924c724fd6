#pragma once

// The four device-awareness strategies run against the same fixture service,
// the qualitative comparison matrix, and the timing bench.
//
//   MultiParameter  device passed as an extra body argument `deviceType`
//   SoapHeader      device in the IDENTIFICATION/DEVICE header (interceptor)
//   MultiOperation  `<op>` for full results, `<op>_cldc` for mobile ones
//   Facade          a per-device facade service that calls the real service
//                   over a second round trip and adapts its result

#include <array>
#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "devaware/service.hpp"
#include "devaware/transport.hpp"

namespace devaware {

enum class Strategy { MultiParameter, SoapHeader, MultiOperation, Facade };

inline constexpr std::array<Strategy, 4> kAllStrategies = {Strategy::MultiParameter, Strategy::SoapHeader,
                                                           Strategy::MultiOperation, Strategy::Facade};

std::string_view to_string(Strategy s);
std::optional<Strategy> strategy_from_string(std::string_view name);

/// Cell of the comparison matrix. `Dual` is the "0/1" value: not consistent in
/// appearance, consistent with respect to the header.
enum class Mark { Zero, One, Dual };

std::string_view to_string(Mark m);

struct QualityRow {
  Strategy strategy;
  Mark transparency;
  Mark consistency;
  Mark non_duplicity;
  Mark client_awareness;
  Mark non_intrusiveness;

  bool operator==(const QualityRow&) const = default;
};

using QualityMatrix = std::array<QualityRow, 4>;

QualityMatrix quality_matrix();
std::string format_quality_matrix(const QualityMatrix& m);

enum class TransportKind { InProc, Tcp };

std::string_view to_string(TransportKind t);

inline constexpr std::string_view kDeviceTypeArg = "deviceType";
inline constexpr std::string_view kCldcOperationSuffix = "_cldc";

/// Hosts one service per strategy (plus the backend behind the facades) and
/// the client-side transports that reach them.
class StrategyHarness {
 public:
  StrategyHarness(std::vector<DeviceAwareOperation> ops, TransportKind kind);
  ~StrategyHarness();

  StrategyHarness(const StrategyHarness&) = delete;
  StrategyHarness& operator=(const StrategyHarness&) = delete;

  /// Throws ServiceError for error responses, TransportError for transport
  /// failures, std::invalid_argument for an operation the harness does not
  /// host.
  Record invoke_via(Strategy strategy, DeviceClass device, std::string_view operation, const FieldList& args);

  /// Round trips across every transport, including facade-to-backend hops.
  uint64_t total_hops() const;
  void reset_hops();

  const std::vector<DeviceAwareOperation>& operations() const { return ops_; }

 private:
  struct Impl;
  std::vector<DeviceAwareOperation> ops_;
  std::unique_ptr<Impl> impl_;
};

/// Expected payload computed straight from a fixture row: the full row in
/// schema order, or the base subset for CLDC callers.
Record oracle_payload(const DeviceAwareOperation& op, const FieldList& row, DeviceClass device);

struct EquivalenceMismatch {
  Strategy strategy;
  DeviceClass device;
  std::string key;
  std::string detail;
};

/// Runs every strategy over every fixture row for each device and compares
/// against the oracle.
std::vector<EquivalenceMismatch> check_equivalence(StrategyHarness& harness, const FixtureTable& fixtures,
                                                   const std::vector<DeviceClass>& devices);

struct BenchConfig {
  std::vector<uint64_t> invocation_counts{100, 1000, 10000};
  int repetitions = 5;
  /// Probability that an invocation is issued by a CLDC device.
  double device_mix = 0.5;
  TransportKind transport = TransportKind::InProc;
  uint64_t warmup_invocations = 1000;
  uint64_t seed = 42;

  /// Throws std::invalid_argument.
  void check() const;

  bool operator==(const BenchConfig&) const = default;
};

BenchConfig parse_bench_config(std::string_view json_text);

struct BenchSample {
  Strategy strategy;
  uint64_t count;
  int repetition;
  uint64_t total_ns;

  bool operator==(const BenchSample&) const = default;
};

struct BenchSummary {
  Strategy strategy;
  uint64_t count;
  int repetitions;
  double mean_total_ns;
  double mean_ns_per_invocation;
  double stddev_ns_per_invocation;
};

struct BenchReport {
  BenchConfig config;
  std::vector<BenchSample> samples;
  bool partial = false;
  std::string error;

  std::vector<BenchSummary> summarize() const;
  std::optional<BenchSummary> summary(Strategy s, uint64_t count) const;
};

/// Workload keys are drawn from `fixtures`; each invocation targets one of
/// `ops` round-robin.
BenchReport run_bench(const BenchConfig& cfg, const std::vector<DeviceAwareOperation>& ops,
                      const FixtureTable& fixtures);

struct TimingCheck {
  uint64_t count;
  double facade_ns;
  double soap_header_ns;
  double multi_parameter_ns;
  bool facade_slower;
  /// |header - multi_parameter| <= tolerance * min(header, multi_parameter)
  bool header_close_to_multi_parameter;
};

/// Ordering and similarity checks for every count >= `min_count`.
std::vector<TimingCheck> check_timing(const BenchReport& report, uint64_t min_count = 1000, double tolerance = 0.25);

/// Writes the JSON report at `path` and a CSV mirror next to it (same stem,
/// `.csv`). Returns the CSV path.
std::filesystem::path export_report(const BenchReport& report, const std::filesystem::path& path);
BenchReport load_report(const std::filesystem::path& path);

std::string report_to_json(const BenchReport& report);
BenchReport report_from_json(std::string_view text);

}  // namespace devaware
