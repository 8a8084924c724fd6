#pragma once

// Minimal XML reader for the wire envelope and preference files: elements,
// attributes, character data, the five predefined entities and numeric
// character references. No DTDs, namespaces are treated as part of the name.

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace devaware::xml {

class XmlError : public std::runtime_error {
 public:
  XmlError(size_t offset, const std::string& message);
  size_t offset() const { return offset_; }
  /// Message without the offset prefix.
  const std::string& detail() const { return detail_; }

 private:
  size_t offset_;
  std::string detail_;
};

struct Element {
  std::string name;
  std::vector<std::pair<std::string, std::string>> attributes;
  std::vector<Element> children;
  /// Concatenated character data directly inside this element.
  std::string text;
  size_t offset = 0;

  const std::string* attribute(std::string_view key) const;
  const Element* child(std::string_view child_name) const;
  bool text_is_blank() const;
};

Element parse(std::string_view document);

std::string escape_text(std::string_view raw);
std::string escape_attribute(std::string_view raw);

}  // namespace devaware::xml
