#include "devaware/model.hpp"

#include <algorithm>
#include <set>

namespace devaware {

std::string_view to_string(Stereotype s) {
  switch (s) {
    case Stereotype::WebService: return "WebService";
    case Stereotype::Ws4md: return "ws4md";
    case Stereotype::Cldc: return "cldc";
  }
  return "?";
}

std::optional<Stereotype> stereotype_from_string(std::string_view name) {
  if (name == "WebService") return Stereotype::WebService;
  if (name == "ws4md") return Stereotype::Ws4md;
  if (name == "cldc") return Stereotype::Cldc;
  return std::nullopt;
}

std::string_view to_string(PrimitiveType t) {
  switch (t) {
    case PrimitiveType::String: return "String";
    case PrimitiveType::Int: return "Int";
    case PrimitiveType::Float: return "Float";
    case PrimitiveType::Boolean: return "Boolean";
  }
  return "?";
}

std::optional<PrimitiveType> primitive_from_string(std::string_view name) {
  if (name == "String") return PrimitiveType::String;
  if (name == "Int") return PrimitiveType::Int;
  if (name == "Float") return PrimitiveType::Float;
  if (name == "Boolean") return PrimitiveType::Boolean;
  return std::nullopt;
}

StereotypeSet::StereotypeSet(std::initializer_list<Stereotype> items) {
  for (auto s : items) insert(s);
}

bool StereotypeSet::contains(Stereotype s) const {
  return std::find(items_.begin(), items_.end(), s) != items_.end();
}

bool StereotypeSet::insert(Stereotype s) {
  if (contains(s)) return false;
  items_.push_back(s);
  return true;
}

void StereotypeSet::erase(Stereotype s) {
  items_.erase(std::remove(items_.begin(), items_.end(), s), items_.end());
}

const ParameterNode* OperationNode::return_param() const {
  for (const auto& p : params)
    if (p.direction == Direction::Return) return &p;
  return nullptr;
}

ParameterNode* OperationNode::return_param() {
  for (auto& p : params)
    if (p.direction == Direction::Return) return &p;
  return nullptr;
}

std::vector<const ParameterNode*> OperationNode::input_params() const {
  std::vector<const ParameterNode*> out;
  for (const auto& p : params)
    if (p.direction == Direction::In) out.push_back(&p);
  return out;
}

bool ClassNode::is_ws4md_type() const {
  return has(Stereotype::Ws4md) && !has(Stereotype::WebService);
}

const ClassNode* PackageNode::find_class(std::string_view class_name) const {
  for (const auto& c : classes)
    if (c.name == class_name) return &c;
  return nullptr;
}

const PackageNode* PimModel::find_package(std::string_view package_name) const {
  for (const auto& p : packages)
    if (p.name == package_name) return &p;
  return nullptr;
}

const ClassNode* lookup_class(const PimModel& model, std::string_view qualified_name) {
  auto dot = qualified_name.rfind('.');
  if (dot == std::string_view::npos) return nullptr;
  const auto* pkg = model.find_package(qualified_name.substr(0, dot));
  return pkg ? pkg->find_class(qualified_name.substr(dot + 1)) : nullptr;
}

const ClassNode* resolve_class_ref(const PimModel& model, const PackageNode& from_package,
                                   std::string_view class_name) {
  if (const auto* c = from_package.find_class(class_name)) return c;
  for (const auto& pkg : model.packages)
    if (const auto* c = pkg.find_class(class_name)) return c;
  return nullptr;
}

bool ValidationReport::ok() const {
  return std::none_of(entries.begin(), entries.end(),
                      [](const Violation& v) { return v.severity == Severity::Error; });
}

std::vector<Violation> ValidationReport::errors() const {
  std::vector<Violation> out;
  std::copy_if(entries.begin(), entries.end(), std::back_inserter(out),
               [](const Violation& v) { return v.severity == Severity::Error; });
  return out;
}

std::vector<Violation> ValidationReport::warnings() const {
  std::vector<Violation> out;
  std::copy_if(entries.begin(), entries.end(), std::back_inserter(out),
               [](const Violation& v) { return v.severity == Severity::Warning; });
  return out;
}

namespace {

class Validator {
 public:
  explicit Validator(const PimModel& model) : model_(model) {}

  ValidationReport run() {
    std::set<std::string> packages;
    for (const auto& pkg : model_.packages) {
      if (!packages.insert(pkg.name).second)
        error(pkg.name, "dup-package", "duplicate package '" + pkg.name + "'");
      check_package(pkg);
    }
    return std::move(report_);
  }

 private:
  void error(std::string path, std::string rule, std::string message) {
    report_.entries.push_back({std::move(path), std::move(rule), std::move(message), Severity::Error});
  }
  void warning(std::string path, std::string rule, std::string message) {
    report_.entries.push_back({std::move(path), std::move(rule), std::move(message), Severity::Warning});
  }

  void check_package(const PackageNode& pkg) {
    std::set<std::string> names;
    for (const auto& cls : pkg.classes) {
      if (!names.insert(cls.name).second)
        error(pkg.name + "." + cls.name, "dup-class", "duplicate class '" + cls.name + "'");
      check_class(pkg, cls);
    }
  }

  void check_type(const PackageNode& pkg, const std::string& path, const TypeRef& type) {
    if (type.is_class()) {
      if (!resolve_class_ref(model_, pkg, type.name))
        error(path, "unresolved-type", "class reference '" + type.name + "' does not resolve");
    } else if (!primitive_from_string(type.name)) {
      error(path, "unknown-primitive", "'" + type.name + "' is not a primitive type");
    }
  }

  void check_class(const PackageNode& pkg, const ClassNode& cls) {
    const std::string path = pkg.name + "." + cls.name;

    if (cls.has(Stereotype::Cldc))
      error(path, "stereotype-placement", "<<cldc>> applies only to attributes");
    if (cls.has(Stereotype::WebService) && cls.has(Stereotype::Ws4md))
      warning(path, "webservice-ws4md",
              "class carries both <<WebService>> and <<ws4md>>; it is treated as a service and not split");

    if (cls.extends) {
      if (*cls.extends == cls.name)
        error(path, "extends-self", "class extends itself");
      else if (!pkg.find_class(*cls.extends))
        error(path, "extends-unresolved",
              "superclass '" + *cls.extends + "' is not declared in package '" + pkg.name + "'");
    }

    if (cls.is_ws4md_type()) check_split_preconditions(pkg, cls, path);

    std::set<std::string> attr_names;
    for (const auto& attr : cls.attributes) {
      const std::string apath = path + ".attr:" + attr.name;
      if (!attr_names.insert(attr.name).second)
        error(apath, "dup-attribute", "duplicate attribute '" + attr.name + "'");
      if (attr.stereotypes.contains(Stereotype::WebService) || attr.stereotypes.contains(Stereotype::Ws4md))
        error(apath, "stereotype-placement", "only <<cldc>> may mark an attribute");
      if (attr.stereotypes.contains(Stereotype::Cldc) && !cls.has(Stereotype::Ws4md))
        error(apath, "cldc-owner", "<<cldc>> attribute '" + attr.name + "' in class without <<ws4md>>");
      check_type(pkg, apath, attr.type);
    }

    std::set<std::string> op_names;
    for (const auto& op : cls.operations) {
      const std::string opath = path + ".op:" + op.name;
      if (!op_names.insert(op.name).second)
        error(opath, "dup-operation", "duplicate operation '" + op.name + "'");
      check_operation(pkg, cls, op, opath);
    }
  }

  void check_split_preconditions(const PackageNode& pkg, const ClassNode& cls, const std::string& path) {
    if (cls.extends)
      error(path, "ws4md-derived", "<<ws4md>> type class with a superclass cannot be split");
    bool any_cldc = std::any_of(cls.attributes.begin(), cls.attributes.end(), [](const AttributeNode& a) {
      return a.stereotypes.contains(Stereotype::Cldc);
    });
    if (!any_cldc)
      error(path, "ws4md-without-cldc", "<<ws4md>> type class has no <<cldc>> attribute");
    for (const auto& suffix : {"_Base", "_Extended"}) {
      std::string generated = cls.name + suffix;
      if (pkg.find_class(generated))
        error(path, "split-name-collision", "class '" + generated + "' already exists");
    }
    for (const auto& op : cls.operations)
      if (op.name == "convertToBase")
        error(path + ".op:convertToBase", "split-name-collision",
              "operation 'convertToBase' is reserved in <<ws4md>> type classes");
  }

  void check_operation(const PackageNode& pkg, const ClassNode& cls, const OperationNode& op,
                       const std::string& opath) {
    if (op.stereotypes.contains(Stereotype::WebService) || op.stereotypes.contains(Stereotype::Cldc))
      error(opath, "stereotype-placement", "only <<ws4md>> may mark an operation");

    std::set<std::string> param_names;
    int returns = 0;
    for (const auto& p : op.params) {
      if (!param_names.insert(p.name).second)
        error(opath + ".param:" + p.name, "dup-parameter", "duplicate parameter '" + p.name + "'");
      if (p.direction == Direction::Return) {
        ++returns;
        if (p.name != kReturnParamName)
          error(opath, "return-param", "return parameter must be named 'return'");
      }
      check_type(pkg, opath + ".param:" + p.name, p.type);
    }
    if (returns != 1) error(opath, "return-param", "operation must have exactly one return parameter");

    if (!op.stereotypes.contains(Stereotype::Ws4md)) return;
    if (!cls.has(Stereotype::WebService))
      error(opath, "ws4md-op-owner", "<<ws4md>> operation in class without <<WebService>>");
    const auto* ret = op.return_param();
    if (!ret) return;
    const ClassNode* target = ret->type.is_class() ? resolve_class_ref(model_, pkg, ret->type.name) : nullptr;
    if (!target || !target->is_ws4md_type())
      error(opath, "ws4md-op-return",
            "<<ws4md>> operation must return a <<ws4md>> type class, got '" + ret->type.name + "'");
  }

  const PimModel& model_;
  ValidationReport report_;
};

}  // namespace

ValidationReport validate_pim(const PimModel& model) { return Validator(model).run(); }

}  // namespace devaware
