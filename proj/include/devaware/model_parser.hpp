#pragma once

// Line-oriented text format for stereotyped class models (`.dam` files).
//
//   model <name>
//     package <name>
//       class <Name> [<<Stereo>>...] [extends <Name>]
//         attr <name>: <Type> [<<cldc>>]
//         op <name>(<p>: <T>, ...): <ReturnType> [<<ws4md>>]
//
// Parsing is driven by the leading keyword; indentation is not significant,
// blank lines and `#` comment lines are skipped. Serialization is canonical:
// two-space indentation per level, children in stored order, LF endings.

#include <stdexcept>
#include <string>
#include <string_view>

#include "devaware/model.hpp"

namespace devaware {

class ModelParseError : public std::runtime_error {
 public:
  enum class Kind { Syntax, DuplicateName, UnresolvedReference };

  ModelParseError(Kind kind, int line, int column, const std::string& message);

  Kind kind() const { return kind_; }
  int line() const { return line_; }
  int column() const { return column_; }
  /// Message without the position prefix.
  const std::string& detail() const { return detail_; }

 private:
  Kind kind_;
  int line_;
  int column_;
  std::string detail_;
};

PimModel parse_model(std::string_view text);

std::string serialize_model(const PimModel& model);

}  // namespace devaware
