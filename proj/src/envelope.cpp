#include "devaware/envelope.hpp"

#include <set>

#include "devaware/xml.hpp"

namespace devaware {

std::string_view to_string(DeviceClass d) {
  switch (d) {
    case DeviceClass::CLDC: return "CLDC";
    case DeviceClass::CDC: return "CDC";
    case DeviceClass::UNSPECIFIED: return "UNSPECIFIED";
  }
  return "?";
}

std::optional<DeviceClass> device_from_tag(std::string_view tag) {
  if (tag == "CLDC") return DeviceClass::CLDC;
  if (tag == "CDC") return DeviceClass::CDC;
  return std::nullopt;
}

DecodeError::DecodeError(Code code, size_t offset, const std::string& message)
    : std::runtime_error("offset " + std::to_string(offset) + ": " + message), code_(code), offset_(offset) {}

namespace {

void check_unique(const FieldList& list, const char* what) {
  std::set<std::string_view> seen;
  for (const auto& [name, value] : list)
    if (!seen.insert(name).second) throw EncodeError(std::string("duplicate ") + what + " '" + name + "'");
}

void encode_fields(std::string& out, const FieldList& list, std::string_view tag) {
  for (const auto& [name, value] : list) {
    out.append("<").append(tag).append(" name=\"").append(xml::escape_attribute(name)).append("\">");
    out.append(xml::escape_text(value));
    out.append("</").append(tag).append(">");
  }
}

}  // namespace

std::string encode_envelope(const Envelope& env) {
  std::string out = "<soap:Envelope>";
  if (env.header) {
    if (env.header->device == DeviceClass::UNSPECIFIED)
      throw EncodeError("UNSPECIFIED device cannot be serialized in a header");
    out += "<soap:Header><IDENTIFICATION><DEVICE>";
    out += to_string(env.header->device);
    out += "</DEVICE></IDENTIFICATION></soap:Header>";
  }
  out += "<soap:Body>";
  if (const auto* call = std::get_if<Call>(&env.body)) {
    check_unique(call->args, "argument");
    out += "<call op=\"" + xml::escape_attribute(call->operation) + "\">";
    encode_fields(out, call->args, "arg");
    out += "</call>";
  } else if (const auto* resp = std::get_if<Response>(&env.body)) {
    check_unique(resp->fields, "field");
    out += "<response schema=\"" + xml::escape_attribute(resp->schema_name) + "\">";
    encode_fields(out, resp->fields, "field");
    out += "</response>";
  } else {
    const auto& fault = std::get<Fault>(env.body);
    out += "<error code=\"" + xml::escape_attribute(fault.code) + "\">" + xml::escape_text(fault.message) + "</error>";
  }
  out += "</soap:Body></soap:Envelope>";
  return out;
}

namespace {

using Code = DecodeError::Code;

[[noreturn]] void structure_error(const xml::Element& at, const std::string& message) {
  throw DecodeError(Code::InvalidStructure, at.offset, message);
}

void require_container(const xml::Element& el) {
  if (!el.text_is_blank()) structure_error(el, "unexpected text in <" + el.name + ">");
}

const std::string& required_attribute(const xml::Element& el, std::string_view key) {
  const std::string* v = el.attribute(key);
  if (!v) structure_error(el, "<" + el.name + "> lacks attribute '" + std::string(key) + "'");
  return *v;
}

FieldList decode_fields(const xml::Element& parent, std::string_view tag) {
  require_container(parent);
  FieldList out;
  std::set<std::string> seen;
  for (const auto& child : parent.children) {
    if (child.name != tag) structure_error(child, "unexpected <" + child.name + "> in <" + parent.name + ">");
    if (!child.children.empty()) structure_error(child, "<" + child.name + "> must hold text only");
    const std::string& name = required_attribute(child, "name");
    if (!seen.insert(name).second) structure_error(child, "duplicate name '" + name + "'");
    out.emplace_back(name, child.text);
  }
  return out;
}

std::string_view trim(std::string_view s) {
  const char* ws = " \t\r\n";
  size_t b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  size_t e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

std::optional<DeviceHeader> decode_header(const xml::Element& header) {
  require_container(header);
  const xml::Element* ident = header.child("IDENTIFICATION");
  if (!ident) return std::nullopt;
  require_container(*ident);
  const xml::Element* device = ident->child("DEVICE");
  if (!device) structure_error(*ident, "IDENTIFICATION without DEVICE");
  if (!device->children.empty()) structure_error(*device, "DEVICE must hold text only");
  auto tag = trim(device->text);
  auto dc = device_from_tag(tag);
  if (!dc) throw DecodeError(Code::UnknownDeviceTag, device->offset, "unknown device tag '" + std::string(tag) + "'");
  return DeviceHeader{*dc};
}

}  // namespace

Envelope decode_envelope(std::string_view bytes) {
  xml::Element root;
  try {
    root = xml::parse(bytes);
  } catch (const xml::XmlError& e) {
    throw DecodeError(Code::Malformed, e.offset(), e.detail());
  }
  if (root.name != "soap:Envelope") structure_error(root, "root element must be soap:Envelope");
  require_container(root);

  Envelope env;
  const xml::Element* body = nullptr;
  bool seen_header = false;
  for (const auto& child : root.children) {
    if (child.name == "soap:Header") {
      if (seen_header || body) structure_error(child, "misplaced soap:Header");
      seen_header = true;
      env.header = decode_header(child);
    } else if (child.name == "soap:Body") {
      if (body) structure_error(child, "duplicate soap:Body");
      body = &child;
    } else {
      structure_error(child, "unexpected <" + child.name + "> in envelope");
    }
  }
  if (!body) structure_error(root, "missing soap:Body");
  require_container(*body);
  if (body->children.size() != 1) structure_error(*body, "soap:Body must hold exactly one element");

  const xml::Element& payload = body->children.front();
  if (payload.name == "call") {
    env.body = Call{required_attribute(payload, "op"), decode_fields(payload, "arg")};
  } else if (payload.name == "response") {
    env.body = Response{required_attribute(payload, "schema"), decode_fields(payload, "field")};
  } else if (payload.name == "error") {
    if (!payload.children.empty()) structure_error(payload, "<error> must hold text only");
    env.body = Fault{required_attribute(payload, "code"), payload.text};
  } else {
    throw DecodeError(Code::UnknownBodyElement, payload.offset, "unknown body element <" + payload.name + ">");
  }
  return env;
}

DeviceClass extract_device(const Envelope& env) {
  return env.header ? env.header->device : DeviceClass::UNSPECIFIED;
}

}  // namespace devaware
