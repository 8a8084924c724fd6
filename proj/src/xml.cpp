#include "devaware/xml.hpp"

#include <cstdint>

namespace devaware::xml {

XmlError::XmlError(size_t offset, const std::string& message)
    : std::runtime_error("offset " + std::to_string(offset) + ": " + message), offset_(offset), detail_(message) {}

const std::string* Element::attribute(std::string_view key) const {
  for (const auto& [k, v] : attributes)
    if (k == key) return &v;
  return nullptr;
}

const Element* Element::child(std::string_view child_name) const {
  for (const auto& c : children)
    if (c.name == child_name) return &c;
  return nullptr;
}

bool Element::text_is_blank() const { return text.find_first_not_of(" \t\r\n") == std::string::npos; }

namespace {

constexpr int kMaxDepth = 64;

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; }
bool name_start(char c) {
  return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_' || c == ':';
}
bool name_char(char c) { return name_start(c) || (c >= '0' && c <= '9') || c == '-' || c == '.'; }

void append_utf8(std::string& out, uint32_t cp) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

class Reader {
 public:
  explicit Reader(std::string_view doc) : doc_(doc) {}

  Element run() {
    skip_misc();
    if (starts_with("<?xml")) {
      size_t end = doc_.find("?>", pos_);
      if (end == std::string_view::npos) fail("unterminated XML declaration");
      pos_ = end + 2;
    }
    skip_misc();
    if (at_end() || doc_[pos_] != '<') fail("expected root element");
    Element root = element(0);
    skip_misc();
    if (!at_end()) fail("content after root element");
    return root;
  }

 private:
  [[noreturn]] void fail(const std::string& message) const { throw XmlError(pos_, message); }
  bool at_end() const { return pos_ >= doc_.size(); }
  bool starts_with(std::string_view s) const { return doc_.substr(pos_, s.size()) == s; }

  void skip_space() {
    while (!at_end() && is_space(doc_[pos_])) ++pos_;
  }

  void skip_comment() {
    size_t end = doc_.find("-->", pos_ + 4);
    if (end == std::string_view::npos) fail("unterminated comment");
    pos_ = end + 3;
  }

  void skip_misc() {
    while (true) {
      skip_space();
      if (starts_with("<!--"))
        skip_comment();
      else
        return;
    }
  }

  std::string name() {
    if (at_end() || !name_start(doc_[pos_])) fail("expected name");
    size_t start = pos_;
    while (!at_end() && name_char(doc_[pos_])) ++pos_;
    return std::string(doc_.substr(start, pos_ - start));
  }

  void reference(std::string& out) {
    size_t start = pos_;
    size_t semi = doc_.find(';', pos_);
    if (semi == std::string_view::npos || semi - pos_ > 12) fail("malformed entity reference");
    std::string_view ent = doc_.substr(pos_ + 1, semi - pos_ - 1);
    pos_ = semi + 1;
    if (ent == "lt") out += '<';
    else if (ent == "gt") out += '>';
    else if (ent == "amp") out += '&';
    else if (ent == "quot") out += '"';
    else if (ent == "apos") out += '\'';
    else if (ent.size() > 1 && ent[0] == '#') {
      uint32_t cp = 0;
      bool hex = ent[1] == 'x';
      std::string_view digits = ent.substr(hex ? 2 : 1);
      if (digits.empty()) throw XmlError(start, "empty character reference");
      for (char c : digits) {
        int d;
        if (c >= '0' && c <= '9') d = c - '0';
        else if (hex && c >= 'a' && c <= 'f') d = c - 'a' + 10;
        else if (hex && c >= 'A' && c <= 'F') d = c - 'A' + 10;
        else throw XmlError(start, "bad digit in character reference");
        cp = cp * (hex ? 16 : 10) + static_cast<uint32_t>(d);
        if (cp > 0x10FFFF) throw XmlError(start, "character reference out of range");
      }
      if (cp == 0 || (cp >= 0xD800 && cp <= 0xDFFF)) throw XmlError(start, "invalid character reference");
      append_utf8(out, cp);
    } else {
      throw XmlError(start, "unknown entity '" + std::string(ent) + "'");
    }
  }

  std::string attribute_value() {
    if (at_end() || (doc_[pos_] != '"' && doc_[pos_] != '\'')) fail("expected quoted attribute value");
    char quote = doc_[pos_++];
    std::string out;
    while (true) {
      if (at_end()) fail("unterminated attribute value");
      char c = doc_[pos_];
      if (c == quote) {
        ++pos_;
        return out;
      }
      if (c == '<') fail("'<' in attribute value");
      if (c == '&')
        reference(out);
      else
        out += c, ++pos_;
    }
  }

  Element element(int depth) {
    if (depth > kMaxDepth) fail("nesting too deep");
    Element el;
    el.offset = pos_;
    ++pos_;  // '<'
    el.name = name();
    while (true) {
      bool had_space = !at_end() && is_space(doc_[pos_]);
      skip_space();
      if (at_end()) fail("unterminated start tag");
      if (starts_with("/>")) {
        pos_ += 2;
        return el;
      }
      if (doc_[pos_] == '>') {
        ++pos_;
        break;
      }
      if (!had_space) fail("expected whitespace before attribute");
      std::string key = name();
      skip_space();
      if (at_end() || doc_[pos_] != '=') fail("expected '='");
      ++pos_;
      skip_space();
      std::string value = attribute_value();
      if (el.attribute(key)) fail("duplicate attribute '" + key + "'");
      el.attributes.emplace_back(std::move(key), std::move(value));
    }
    content(el, depth);
    return el;
  }

  void content(Element& el, int depth) {
    while (true) {
      if (at_end()) fail("unterminated element '" + el.name + "'");
      char c = doc_[pos_];
      if (c == '<') {
        if (starts_with("</")) {
          pos_ += 2;
          std::string closing = name();
          if (closing != el.name) fail("mismatched end tag '" + closing + "' for '" + el.name + "'");
          skip_space();
          if (at_end() || doc_[pos_] != '>') fail("expected '>'");
          ++pos_;
          return;
        }
        if (starts_with("<!--")) {
          skip_comment();
          continue;
        }
        if (starts_with("<![CDATA[")) {
          size_t end = doc_.find("]]>", pos_);
          if (end == std::string_view::npos) fail("unterminated CDATA section");
          el.text.append(doc_.substr(pos_ + 9, end - pos_ - 9));
          pos_ = end + 3;
          continue;
        }
        el.children.push_back(element(depth + 1));
      } else if (c == '&') {
        reference(el.text);
      } else {
        el.text += c;
        ++pos_;
      }
    }
  }

  std::string_view doc_;
  size_t pos_ = 0;
};

std::string escape(std::string_view raw, bool attribute) {
  std::string out;
  out.reserve(raw.size());
  for (char c : raw) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '\n': out += "&#10;"; break;
      case '\r': out += "&#13;"; break;
      case '\t': out += "&#9;"; break;
      case '"':
        if (attribute) {
          out += "&quot;";
          break;
        }
        [[fallthrough]];
      default: out += c;
    }
  }
  return out;
}

}  // namespace

Element parse(std::string_view document) { return Reader(document).run(); }

std::string escape_text(std::string_view raw) { return escape(raw, false); }
std::string escape_attribute(std::string_view raw) { return escape(raw, true); }

}  // namespace devaware::xml
