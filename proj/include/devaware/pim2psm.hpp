#pragma once

// PIM to PSM transformation: every <<ws4md>> type class is split into a
// `<X>_Base` class holding the <<cldc>> attributes and a `<X>_Extended`
// subclass holding the rest plus `convertToBase`; device-aware operations are
// rewritten to return the Base class.

#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "devaware/model.hpp"

namespace devaware {

struct SplitRecord {
  std::string package;
  std::string source_class;
  std::string base_class;
  std::string extended_class;
  std::vector<std::string> base_attrs;
  std::vector<std::string> extended_attrs;

  bool operator==(const SplitRecord&) const = default;
};

struct PsmModel {
  PimModel model;
  /// Splits performed by this transformation, in document order.
  std::vector<SplitRecord> split_records;
};

class TransformError : public std::runtime_error {
 public:
  enum class Kind { Ws4mdWithoutCldc, ReturnTypeNotWs4md, NameCollision, NoSplitRecord, InvalidModel };

  TransformError(Kind kind, std::string element, const std::string& message);

  Kind kind() const { return kind_; }
  const std::string& element() const { return element_; }

 private:
  Kind kind_;
  std::string element_;
};

inline constexpr std::string_view kConvertToBase = "convertToBase";

std::string base_name_for(std::string_view type_name);
std::string extended_name_for(std::string_view type_name);

/// Splits one <<ws4md>> type class. Throws Ws4mdWithoutCldc when no attribute
/// is marked <<cldc>>.
std::tuple<ClassNode, ClassNode, SplitRecord> split_type(const ClassNode& cls, std::string_view package = {});

/// Replaces the return type of a device-aware operation with the Base class of
/// the matching split. Operations without <<ws4md>> come back unchanged. Throws
/// NoSplitRecord when none matches.
OperationNode rewrite_operation(const OperationNode& op, const std::vector<SplitRecord>& splits);

PsmModel transform(const PimModel& pim);

/// Reconstructs split records from an already transformed model: every pair
/// `X_Base` / `X_Extended extends X_Base` in the same package.
std::vector<SplitRecord> recover_splits(const PimModel& psm);

}  // namespace devaware
