#include "devaware/pim2psm.hpp"

#include <map>
#include <optional>

namespace devaware {

TransformError::TransformError(Kind kind, std::string element, const std::string& message)
    : std::runtime_error(element + ": " + message), kind_(kind), element_(std::move(element)) {}

std::string base_name_for(std::string_view type_name) { return std::string(type_name) + "_Base"; }
std::string extended_name_for(std::string_view type_name) { return std::string(type_name) + "_Extended"; }

std::tuple<ClassNode, ClassNode, SplitRecord> split_type(const ClassNode& cls, std::string_view package) {
  std::string element = package.empty() ? cls.name : std::string(package) + "." + cls.name;
  if (!cls.has(Stereotype::Ws4md))
    throw TransformError(TransformError::Kind::InvalidModel, element, "class is not marked <<ws4md>>");

  ClassNode base;
  base.name = base_name_for(cls.name);
  ClassNode extended;
  extended.name = extended_name_for(cls.name);
  extended.extends = base.name;

  SplitRecord record{std::string(package), cls.name, base.name, extended.name, {}, {}};

  // Class2ClassBase / Property2Property and Class2ClassExtended / Property2PropertyExtended.
  for (const auto& attr : cls.attributes) {
    AttributeNode copy = attr;
    if (copy.stereotypes.contains(Stereotype::Cldc)) {
      copy.stereotypes.erase(Stereotype::Cldc);
      base.attributes.push_back(std::move(copy));
      record.base_attrs.push_back(attr.name);
    } else {
      extended.attributes.push_back(std::move(copy));
      record.extended_attrs.push_back(attr.name);
    }
  }
  if (record.base_attrs.empty())
    throw TransformError(TransformError::Kind::Ws4mdWithoutCldc, element, "<<ws4md>> type has no <<cldc>> attribute");

  for (const auto& op : cls.operations) {
    if (op.name == kConvertToBase)
      throw TransformError(TransformError::Kind::NameCollision, element + "." + op.name,
                           "operation name is reserved for the generated conversion");
    extended.operations.push_back(op);
  }

  // Class2Operation.
  OperationNode convert;
  convert.name = std::string(kConvertToBase);
  convert.params.push_back({std::string(kReturnParamName), Direction::Return, TypeRef::class_ref(base.name)});
  extended.operations.push_back(std::move(convert));

  return {std::move(base), std::move(extended), std::move(record)};
}

OperationNode rewrite_operation(const OperationNode& op, const std::vector<SplitRecord>& splits) {
  OperationNode out = op;
  if (!op.stereotypes.contains(Stereotype::Ws4md)) return out;
  auto* ret = out.return_param();
  if (!ret || !ret->type.is_class())
    throw TransformError(TransformError::Kind::NoSplitRecord, op.name, "operation does not return a class");
  for (const auto& split : splits) {
    if (split.source_class == ret->type.name) {
      ret->type.name = split.base_class;
      return out;
    }
  }
  throw TransformError(TransformError::Kind::NoSplitRecord, op.name,
                       "no split record for return type '" + ret->type.name + "'");
}

std::vector<SplitRecord> recover_splits(const PimModel& psm) {
  std::vector<SplitRecord> out;
  for (const auto& pkg : psm.packages) {
    for (const auto& cls : pkg.classes) {
      constexpr std::string_view suffix = "_Extended";
      if (!cls.extends || cls.name.size() <= suffix.size() || !cls.name.ends_with(suffix)) continue;
      std::string source = cls.name.substr(0, cls.name.size() - suffix.size());
      if (*cls.extends != base_name_for(source)) continue;
      const ClassNode* base = pkg.find_class(*cls.extends);
      if (!base) continue;
      SplitRecord rec{pkg.name, source, base->name, cls.name, {}, {}};
      for (const auto& a : base->attributes) rec.base_attrs.push_back(a.name);
      for (const auto& a : cls.attributes) rec.extended_attrs.push_back(a.name);
      out.push_back(std::move(rec));
    }
  }
  return out;
}

namespace {

struct ClassKey {
  std::string package;
  std::string name;
  auto operator<=>(const ClassKey&) const = default;
};

class Transformer {
 public:
  explicit Transformer(const PimModel& pim) : pim_(pim), existing_(recover_splits(pim)) {}

  PsmModel run() {
    plan_splits();
    PsmModel psm;
    psm.model.name = pim_.name;  // Model2Model
    for (const auto& pkg : pim_.packages) psm.model.packages.push_back(convert_package(pkg));
    psm.split_records = splits_;
    return psm;
  }

 private:
  void plan_splits() {
    for (const auto& pkg : pim_.packages) {
      for (const auto& cls : pkg.classes) {
        if (!cls.is_ws4md_type()) continue;
        std::string element = pkg.name + "." + cls.name;
        if (cls.extends)
          throw TransformError(TransformError::Kind::InvalidModel, element,
                               "<<ws4md>> type class with a superclass cannot be split");
        for (const auto& generated : {base_name_for(cls.name), extended_name_for(cls.name)})
          if (pkg.find_class(generated))
            throw TransformError(TransformError::Kind::NameCollision, element,
                                 "class '" + generated + "' already exists in package");
        auto parts = split_type(cls, pkg.name);
        split_index_[{pkg.name, cls.name}] = splits_.size();
        splits_.push_back(std::get<2>(parts));
        split_classes_.emplace(ClassKey{pkg.name, cls.name},
                               std::make_pair(std::move(std::get<0>(parts)), std::move(std::get<1>(parts))));
      }
    }
  }

  const SplitRecord* split_for(const PackageNode& from, const std::string& class_name) const {
    const ClassNode* target = resolve_class_ref(pim_, from, class_name);
    if (!target) return nullptr;
    for (const auto& pkg : pim_.packages) {
      if (pkg.find_class(class_name) != target) continue;
      auto it = split_index_.find({pkg.name, class_name});
      return it == split_index_.end() ? nullptr : &splits_[it->second];
    }
    return nullptr;
  }

  // Type2Type / PrimitiveType2PrimitiveType: references to a split class keep
  // their full meaning by pointing at the Extended class.
  TypeRef convert_type(const PackageNode& from, const TypeRef& type) const {
    if (!type.is_class()) return type;
    if (const auto* split = split_for(from, type.name)) return TypeRef::class_ref(split->extended_class);
    return type;
  }

  bool returns_existing_base(const PackageNode& from, const OperationNode& op) const {
    const auto* ret = op.return_param();
    if (!ret || !ret->type.is_class()) return false;
    const ClassNode* target = resolve_class_ref(pim_, from, ret->type.name);
    for (const auto& rec : existing_) {
      const auto* pkg = pim_.find_package(rec.package);
      if (pkg && pkg->find_class(rec.base_class) == target) return true;
    }
    return false;
  }

  // Operation2Operation / Parameter2Parameter.
  OperationNode convert_operation(const PackageNode& from, const std::string& owner, const OperationNode& op) const {
    OperationNode out = op;
    for (auto& p : out.params) p.type = convert_type(from, p.type);
    if (!op.stereotypes.contains(Stereotype::Ws4md)) return out;

    std::string element = from.name + "." + owner + "." + op.name;
    const auto* ret = op.return_param();
    if (!ret || !ret->type.is_class())
      throw TransformError(TransformError::Kind::ReturnTypeNotWs4md, element, "device-aware operation must return a class");
    if (const auto* split = split_for(from, ret->type.name)) {
      OperationNode rewritten = rewrite_operation(op, {*split});
      for (auto& p : rewritten.params)
        if (p.direction == Direction::In) p.type = convert_type(from, p.type);
      return rewritten;
    }
    if (returns_existing_base(from, op)) return op;
    throw TransformError(TransformError::Kind::ReturnTypeNotWs4md, element,
                         "return type '" + ret->type.name + "' is not a <<ws4md>> type class");
  }

  ClassNode convert_class(const PackageNode& from, const ClassNode& cls) const {
    ClassNode out;
    out.name = cls.name;
    out.stereotypes = cls.stereotypes;
    if (cls.extends) {
      const auto* split = split_for(from, *cls.extends);
      out.extends = split ? split->extended_class : *cls.extends;
    }
    for (const auto& attr : cls.attributes) out.attributes.push_back({attr.name, convert_type(from, attr.type), attr.stereotypes});
    for (const auto& op : cls.operations) out.operations.push_back(convert_operation(from, cls.name, op));
    return out;
  }

  PackageNode convert_package(const PackageNode& pkg) const {
    PackageNode out{pkg.name, {}};
    for (const auto& cls : pkg.classes) {
      auto it = split_classes_.find({pkg.name, cls.name});
      if (it == split_classes_.end()) {
        out.classes.push_back(convert_class(pkg, cls));
        continue;
      }
      const auto& [base, extended] = it->second;
      out.classes.push_back(base);
      ClassNode ext = extended;
      for (auto& attr : ext.attributes) attr.type = convert_type(pkg, attr.type);
      for (auto& attr : out.classes.back().attributes) attr.type = convert_type(pkg, attr.type);
      for (auto& op : ext.operations)
        if (op.name != kConvertToBase) op = convert_operation(pkg, ext.name, op);
      out.classes.push_back(std::move(ext));
    }
    return out;
  }

  const PimModel& pim_;
  std::vector<SplitRecord> existing_;
  std::vector<SplitRecord> splits_;
  std::map<ClassKey, size_t> split_index_;
  std::map<ClassKey, std::pair<ClassNode, ClassNode>> split_classes_;
};

}  // namespace

PsmModel transform(const PimModel& pim) { return Transformer(pim).run(); }

}  // namespace devaware
