#pragma once

// In-process service host. Requests are decoded, the device header becomes a
// request-scoped context, the operation is dispatched and, for bindings that
// carry an interceptor, the Extended result is projected to its Base form
// when the caller is a CLDC device.

#include <atomic>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include "devaware/codegen.hpp"
#include "devaware/envelope.hpp"
#include "devaware/pim2psm.hpp"

namespace devaware {

struct RecordSchema {
  std::string name;
  /// (field name, primitive type name) in record order.
  std::vector<std::pair<std::string, std::string>> fields;
  /// Subset of field names, in record order.
  std::vector<std::string> base_fields;
  std::string base_name;

  bool has_field(std::string_view field) const;
  /// Throws std::invalid_argument when base_fields is not an ordered subset.
  void check() const;

  bool operator==(const RecordSchema&) const = default;
};

struct Record {
  std::string schema;
  FieldList values;

  const std::string* get(std::string_view field) const;
  bool operator==(const Record&) const = default;
};

struct RequestContext {
  DeviceClass device = DeviceClass::UNSPECIFIED;
  uint64_t request_id = 0;
};

/// Wire-level error codes carried in `<error code="..">`.
namespace error_code {
inline constexpr std::string_view kMalformedRequest = "malformed-request";
inline constexpr std::string_view kUnknownOperation = "unknown-operation";
inline constexpr std::string_view kArgMismatch = "arg-mismatch";
inline constexpr std::string_view kInternalError = "internal-error";
}  // namespace error_code

class ServiceError : public std::runtime_error {
 public:
  ServiceError(std::string_view code, const std::string& message) : std::runtime_error(message), code_(code) {}
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

class RegistrationError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Produces the full (Extended) record for the given call arguments.
using Producer = std::function<Record(const FieldList& args)>;

struct OperationBinding {
  std::string operation;
  std::vector<std::string> params;
  Producer producer;
  RecordSchema schema;
  std::optional<InterceptorSpec> interceptor;
};

/// Keeps exactly the base fields in schema order under the base schema name.
/// Throws ServiceError(internal-error) if a base field is missing.
Record project_to_base(const Record& rec, const RecordSchema& schema);

/// Around-advice: proceed, then convert to Base for CLDC callers.
Record apply_interceptor(const RequestContext& ctx, const InterceptorSpec& spec, const RecordSchema& schema,
                         const std::function<Record()>& produce);

struct RequestLog {
  std::string operation;
  DeviceClass device = DeviceClass::UNSPECIFIED;
  std::string result;  ///< schema name, or `error:<code>`
};

class ServiceHost {
 public:
  /// Lower-level handler for bindings that adapt results themselves.
  using Handler = std::function<Record(const RequestContext&, const FieldList& args)>;

  void register_operation(OperationBinding binding);
  void register_handler(std::string operation, std::vector<std::string> params, Handler handler);

  bool has_operation(std::string_view operation) const;

  /// Never throws for bad input; failures come back as error documents.
  std::string handle_request(std::string_view raw) const;

  /// Dispatches a decoded call. Throws ServiceError.
  Record dispatch(const RequestContext& ctx, const Call& call) const;

  void set_request_log(std::function<void(const RequestLog&)> sink) { log_ = std::move(sink); }

 private:
  struct Entry {
    std::vector<std::string> params;
    Handler handler;
  };

  void insert(std::string operation, Entry entry);

  mutable std::shared_mutex mu_;
  std::map<std::string, Entry, std::less<>> entries_;
  mutable std::atomic<uint64_t> next_request_id_{1};
  std::function<void(const RequestLog&)> log_;
};

Envelope make_fault(std::string_view code, const std::string& message);

/// Schema of the Extended record for a split: base attributes, then the
/// remaining attributes.
RecordSchema schema_for_split(const PimModel& psm, const SplitRecord& split);

// `.schema` descriptor files:
//
//   schema <ExtendedName>
//   base <BaseName>
//   field <name>: <Type> [base]
//   ...
std::string render_schema(const RecordSchema& schema);
RecordSchema parse_schema(std::string_view text);
/// Loads every `.schema` file in `dir` (non-recursive), sorted by path.
std::vector<RecordSchema> load_schemas(const std::filesystem::path& dir);

}  // namespace devaware
