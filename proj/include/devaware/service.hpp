#pragma once

// Assembles a device-aware service from generated artifacts: interceptor
// manifests, record schemas and a fixture table standing in for business data.

#include <filesystem>
#include <string>
#include <vector>

#include "devaware/runtime.hpp"

namespace devaware {

/// Rows of a fixture table; each row holds every Extended field.
struct FixtureTable {
  std::vector<FieldList> rows;
};

/// Parses a JSON array of flat objects. Numbers and booleans are kept in their
/// JSON spelling.
FixtureTable parse_fixtures(std::string_view json_text);
FixtureTable load_fixtures(const std::filesystem::path& path);

/// Looks up the row whose `key_field` equals the argument of the same name and
/// returns it in schema order.
Producer table_producer(FixtureTable table, RecordSchema schema, std::string key_field);

struct DeviceAwareOperation {
  InterceptorSpec spec;
  RecordSchema schema;
  Producer producer;
};

/// Pairs each manifest with the schema named by its extended type and a
/// producer keyed on the operation's first input parameter.
std::vector<DeviceAwareOperation> assemble_operations(const std::vector<InterceptorSpec>& specs,
                                                     const std::vector<RecordSchema>& schemas,
                                                     const FixtureTable& fixtures);

/// Registers each operation with its interceptor active.
void register_device_aware(ServiceHost& host, const std::vector<DeviceAwareOperation>& ops);

/// The bookstore case study: model text, fixture rows and the assembled
/// device-aware operations (transform + generate run in memory).
namespace case_study {
std::string_view model_text();
const FixtureTable& fixtures();
std::vector<DeviceAwareOperation> operations();
}  // namespace case_study

}  // namespace devaware
