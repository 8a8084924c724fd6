#pragma once

// Stereotyped class models: the marked platform-independent model and the
// platform-specific model derived from it share this representation.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace devaware {

enum class Stereotype { WebService, Ws4md, Cldc };

/// Spelling used inside `<<...>>` markers.
std::string_view to_string(Stereotype s);
std::optional<Stereotype> stereotype_from_string(std::string_view name);

enum class PrimitiveType { String, Int, Float, Boolean };

std::string_view to_string(PrimitiveType t);
std::optional<PrimitiveType> primitive_from_string(std::string_view name);

/// Small ordered set; stereotype sets never exceed three members.
class StereotypeSet {
 public:
  StereotypeSet() = default;
  StereotypeSet(std::initializer_list<Stereotype> items);

  bool contains(Stereotype s) const;
  /// Returns false if already present.
  bool insert(Stereotype s);
  void erase(Stereotype s);
  bool empty() const { return items_.empty(); }
  const std::vector<Stereotype>& items() const { return items_; }

  bool operator==(const StereotypeSet&) const = default;

 private:
  std::vector<Stereotype> items_;
};

struct TypeRef {
  enum class Kind { Primitive, ClassRef };

  Kind kind = Kind::Primitive;
  std::string name;

  static TypeRef primitive(PrimitiveType t) { return {Kind::Primitive, std::string(to_string(t))}; }
  static TypeRef class_ref(std::string name) { return {Kind::ClassRef, std::move(name)}; }

  bool is_class() const { return kind == Kind::ClassRef; }
  bool operator==(const TypeRef&) const = default;
};

enum class Direction { In, Return };

struct ParameterNode {
  std::string name;
  Direction direction = Direction::In;
  TypeRef type;

  bool operator==(const ParameterNode&) const = default;
};

inline constexpr std::string_view kReturnParamName = "return";

struct OperationNode {
  std::string name;
  StereotypeSet stereotypes;
  /// Input parameters in declaration order followed by the single return
  /// parameter.
  std::vector<ParameterNode> params;

  /// The return parameter, or nullptr when the operation is malformed.
  const ParameterNode* return_param() const;
  ParameterNode* return_param();
  std::vector<const ParameterNode*> input_params() const;

  bool operator==(const OperationNode&) const = default;
};

struct AttributeNode {
  std::string name;
  TypeRef type;
  StereotypeSet stereotypes;

  bool operator==(const AttributeNode&) const = default;
};

struct ClassNode {
  std::string name;
  StereotypeSet stereotypes;
  std::vector<AttributeNode> attributes;
  std::vector<OperationNode> operations;
  std::optional<std::string> extends;

  bool has(Stereotype s) const { return stereotypes.contains(s); }
  /// A type definition marked for splitting: Ws4md without WebService.
  bool is_ws4md_type() const;

  bool operator==(const ClassNode&) const = default;
};

struct PackageNode {
  std::string name;
  std::vector<ClassNode> classes;

  const ClassNode* find_class(std::string_view name) const;

  bool operator==(const PackageNode&) const = default;
};

struct PimModel {
  std::string name;
  std::vector<PackageNode> packages;

  const PackageNode* find_package(std::string_view name) const;

  bool operator==(const PimModel&) const = default;
};

/// Resolves a `package.Class` name. Returns nullptr when absent.
const ClassNode* lookup_class(const PimModel& model, std::string_view qualified_name);

/// Resolves a class reference as seen from `from_package`: a class in the same
/// package wins, otherwise the first class with that name in document order.
const ClassNode* resolve_class_ref(const PimModel& model, const PackageNode& from_package,
                                   std::string_view class_name);

enum class Severity { Error, Warning };

struct Violation {
  std::string path;     ///< e.g. `bookshop.BookInfo.attr:title`
  std::string rule_id;  ///< e.g. `cldc-owner`
  std::string message;
  Severity severity = Severity::Error;

  bool operator==(const Violation&) const = default;
};

struct ValidationReport {
  std::vector<Violation> entries;

  /// True when no entry has Error severity.
  bool ok() const;
  std::vector<Violation> errors() const;
  std::vector<Violation> warnings() const;

  bool operator==(const ValidationReport&) const = default;
};

/// Checks the stereotype marking rules and structural invariants. Entries are
/// emitted in document order.
ValidationReport validate_pim(const PimModel& model);

}  // namespace devaware
