#pragma once

// SOAP-subset wire format. Canonical documents carry no optional whitespace:
//
//   <soap:Envelope><soap:Header><IDENTIFICATION><DEVICE>CLDC</DEVICE></IDENTIFICATION></soap:Header>
//   <soap:Body><call op="getBookInfo"><arg name="ISBN">123</arg></call></soap:Body></soap:Envelope>
//
// (shown wrapped; the encoding is a single line). The Header element is
// omitted entirely when no device is declared. Response bodies are
// `<response schema=".."><field name="..">..</field>...</response>` and
// failures are `<error code="..">message</error>`.

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace devaware {

enum class DeviceClass { CLDC, CDC, UNSPECIFIED };

std::string_view to_string(DeviceClass d);
/// Accepts the wire tags `CLDC` and `CDC` only.
std::optional<DeviceClass> device_from_tag(std::string_view tag);

using FieldList = std::vector<std::pair<std::string, std::string>>;

struct DeviceHeader {
  DeviceClass device = DeviceClass::CLDC;
  bool operator==(const DeviceHeader&) const = default;
};

struct Call {
  std::string operation;
  FieldList args;
  bool operator==(const Call&) const = default;
};

struct Response {
  std::string schema_name;
  FieldList fields;
  bool operator==(const Response&) const = default;
};

struct Fault {
  std::string code;
  std::string message;
  bool operator==(const Fault&) const = default;
};

struct Envelope {
  std::optional<DeviceHeader> header;
  std::variant<Call, Response, Fault> body;

  bool operator==(const Envelope&) const = default;
};

class DecodeError : public std::runtime_error {
 public:
  enum class Code { Malformed, UnknownBodyElement, UnknownDeviceTag, InvalidStructure };

  DecodeError(Code code, size_t offset, const std::string& message);
  Code code() const { return code_; }
  size_t offset() const { return offset_; }

 private:
  Code code_;
  size_t offset_;
};

class EncodeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Throws EncodeError for an UNSPECIFIED header device or duplicate names.
std::string encode_envelope(const Envelope& env);
Envelope decode_envelope(std::string_view bytes);
DeviceClass extract_device(const Envelope& env);

}  // namespace devaware
