#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "devaware/model_parser.hpp"
#include "devaware/pim2psm.hpp"
#include "support/test_support.hpp"

using namespace devaware;
using testsupport::fixture;
using testsupport::golden;
using testsupport::slurp;

namespace {

std::vector<std::string> attr_names(const ClassNode& c) {
  std::vector<std::string> out;
  for (const auto& a : c.attributes) out.push_back(a.name);
  return out;
}

size_t class_count(const PimModel& m) {
  size_t n = 0;
  for (const auto& p : m.packages) n += p.classes.size();
  return n;
}

size_t ws4md_type_count(const PimModel& m) {
  size_t n = 0;
  for (const auto& p : m.packages)
    for (const auto& c : p.classes) n += c.is_ws4md_type();
  return n;
}

TransformError::Kind transform_error(const std::string& text) {
  try {
    transform(parse_model(text));
  } catch (const TransformError& e) {
    return e.kind();
  }
  FAIL("expected TransformError");
  return TransformError::Kind::InvalidModel;
}

}  // namespace

TEST_CASE("name derivation") {
  CHECK(base_name_for("Info") == "Info_Base");
  CHECK(extended_name_for("Info") == "Info_Extended");
}

TEST_CASE("simple service splits into Info_Base and Info_Extended") {
  PsmModel psm = transform(parse_model(slurp(fixture("simple_service.dam"))));
  const auto& pkg = psm.model.packages.at(0);
  const ClassNode* base = pkg.find_class("Info_Base");
  const ClassNode* ext = pkg.find_class("Info_Extended");
  REQUIRE(base);
  REQUIRE(ext);
  CHECK(pkg.find_class("Info") == nullptr);
  CHECK(attr_names(*base) == std::vector<std::string>{"attribute1", "attribute2", "attribute5"});
  CHECK(attr_names(*ext) == std::vector<std::string>{"attribute3", "attribute4"});
  CHECK(ext->extends == std::optional<std::string>("Info_Base"));
  CHECK_FALSE(base->extends);
  REQUIRE(ext->operations.size() == 1);
  CHECK(ext->operations[0].name == kConvertToBase);
  REQUIRE(ext->operations[0].return_param());
  CHECK(ext->operations[0].return_param()->type == TypeRef::class_ref("Info_Base"));
  CHECK(ext->operations[0].input_params().empty());
  // The marking is consumed by the split.
  CHECK_FALSE(base->has(Stereotype::Ws4md));
  CHECK_FALSE(ext->has(Stereotype::Ws4md));

  const ClassNode* svc = pkg.find_class("Class1");
  REQUIRE(svc);
  const auto& op = svc->operations.at(0);
  CHECK(op.return_param()->type == TypeRef::class_ref("Info_Base"));
  CHECK(op.stereotypes.contains(Stereotype::Ws4md));
  CHECK(op.input_params().size() == 1);

  REQUIRE(psm.split_records.size() == 1);
  CHECK(psm.split_records[0] ==
        SplitRecord{"simple", "Info", "Info_Base", "Info_Extended", {"attribute1", "attribute2", "attribute5"},
                    {"attribute3", "attribute4"}});
}

TEST_CASE("PSM goldens") {
  CHECK(serialize_model(transform(parse_model(slurp(fixture("simple_service.dam")))).model) ==
        slurp(golden("simple_service.psm.dam")));
  CHECK(serialize_model(transform(parse_model(slurp(fixture("bookstore.dam")))).model) ==
        slurp(golden("bookstore.psm.dam")));
}

TEST_CASE("split_type on a type with no extended attributes") {
  ClassNode c{"T", {Stereotype::Ws4md}, {AttributeNode{"a", TypeRef::primitive(PrimitiveType::Int), {Stereotype::Cldc}}},
              {}, std::nullopt};
  auto [base, ext, rec] = split_type(c, "p");
  CHECK(base.name == "T_Base");
  CHECK(ext.attributes.empty());
  CHECK(ext.operations.size() == 1);
  CHECK(rec.base_attrs == std::vector<std::string>{"a"});
  CHECK(rec.extended_attrs.empty());
  CHECK(rec.package == "p");
}

TEST_CASE("split_type refuses a type without cldc attributes") {
  ClassNode c{"T", {Stereotype::Ws4md}, {AttributeNode{"a", TypeRef::primitive(PrimitiveType::Int), {}}}, {},
              std::nullopt};
  CHECK_THROWS_AS(split_type(c, "p"), TransformError);
}

TEST_CASE("rewrite_operation") {
  std::vector<SplitRecord> splits{{"p", "T", "T_Base", "T_Extended", {"a"}, {}}};
  OperationNode op{"get", {Stereotype::Ws4md},
                   {ParameterNode{"k", Direction::In, TypeRef::primitive(PrimitiveType::String)},
                    ParameterNode{std::string(kReturnParamName), Direction::Return, TypeRef::class_ref("T")}}};
  OperationNode out = rewrite_operation(op, splits);
  CHECK(out.return_param()->type == TypeRef::class_ref("T_Base"));
  CHECK(out.params[0] == op.params[0]);
  CHECK(out.name == op.name);

  OperationNode plain{"other", {}, {ParameterNode{std::string(kReturnParamName), Direction::Return,
                                                  TypeRef::class_ref("T")}}};
  CHECK(rewrite_operation(plain, splits) == plain);

  OperationNode orphan{"g", {Stereotype::Ws4md},
                       {ParameterNode{std::string(kReturnParamName), Direction::Return, TypeRef::class_ref("U")}}};
  CHECK_THROWS_AS(rewrite_operation(orphan, splits), TransformError);
}

TEST_CASE("transform errors") {
  using K = TransformError::Kind;
  CHECK(transform_error("model M\n  package p\n    class T <<ws4md>>\n      attr a: Int\n") == K::Ws4mdWithoutCldc);
  CHECK(transform_error("model M\n  package p\n    class S <<WebService>>\n      op f(): Int <<ws4md>>\n") ==
        K::ReturnTypeNotWs4md);
  CHECK(transform_error("model M\n  package p\n    class T <<ws4md>>\n      attr a: Int <<cldc>>\n    class T_Extended\n") ==
        K::NameCollision);
  CHECK(transform_error("model M\n  package p\n    class R\n    class T <<ws4md>> extends R\n      attr a: Int <<cldc>>\n") ==
        K::InvalidModel);
}

TEST_CASE("a model without ws4md classes passes through unchanged") {
  PimModel pim = parse_model("model M\n  package p\n    class A\n      attr x: Int\n    class B extends A\n      op f(a: A): B\n");
  PsmModel psm = transform(pim);
  CHECK(psm.model == pim);
  CHECK(psm.split_records.empty());
}

TEST_CASE("references to the split type elsewhere point at the extended type") {
  PsmModel psm = transform(parse_model(R"(model M
  package p
    class T <<ws4md>>
      attr a: String <<cldc>>
      attr b: String
    class Holder
      attr t: T
    class S <<WebService>>
      op full(): T
      op slim(): T <<ws4md>>
)"));
  const auto& pkg = psm.model.packages[0];
  CHECK(pkg.find_class("Holder")->attributes[0].type == TypeRef::class_ref("T_Extended"));
  CHECK(pkg.find_class("S")->operations[0].return_param()->type == TypeRef::class_ref("T_Extended"));
  CHECK(pkg.find_class("S")->operations[1].return_param()->type == TypeRef::class_ref("T_Base"));
}

TEST_CASE("transformation laws over random models") {
  std::mt19937_64 rng(23);
  for (int iter = 0; iter < 300; ++iter) {
    PimModel pim = testsupport::random_pim(rng);
    PsmModel psm = transform(pim);

    // Class-count law: each ws4md type becomes two classes.
    CHECK(class_count(psm.model) == class_count(pim) + ws4md_type_count(pim));
    CHECK(psm.split_records.size() == ws4md_type_count(pim));

    for (const auto& pkg : pim.packages) {
      const PackageNode* out_pkg = psm.model.find_package(pkg.name);
      REQUIRE(out_pkg);
      for (const auto& cls : pkg.classes) {
        if (!cls.is_ws4md_type()) {
          REQUIRE(out_pkg->find_class(cls.name));
          continue;
        }
        // Conservation: base + extended is exactly the original attribute set,
        // partitioned by the cldc marking.
        auto expect = testsupport::oracle_split(cls);
        const ClassNode* base = out_pkg->find_class(cls.name + "_Base");
        const ClassNode* ext = out_pkg->find_class(cls.name + "_Extended");
        REQUIRE(base);
        REQUIRE(ext);
        CHECK(attr_names(*base) == expect.base);
        CHECK(attr_names(*ext) == expect.extended);
        CHECK(base->attributes.size() + ext->attributes.size() == cls.attributes.size());
        for (const auto& a : cls.attributes) {
          const auto& holder = a.stereotypes.contains(Stereotype::Cldc) ? *base : *ext;
          auto it = std::find_if(holder.attributes.begin(), holder.attributes.end(),
                                 [&](const AttributeNode& x) { return x.name == a.name; });
          REQUIRE(it != holder.attributes.end());
          CHECK(it->type == a.type);
        }
        CHECK(ext->extends == std::optional<std::string>(base->name));
      }
    }

    // Every ws4md operation now returns a base type.
    for (const auto& pkg : psm.model.packages)
      for (const auto& cls : pkg.classes)
        for (const auto& op : cls.operations)
          if (op.stereotypes.contains(Stereotype::Ws4md)) {
            const auto& name = op.return_param()->type.name;
            CHECK(name.size() > 5);
            CHECK(name.substr(name.size() - 5) == "_Base");
          }

    // Determinism.
    CHECK(serialize_model(transform(pim).model) == serialize_model(psm.model));
    // Idempotence: the PSM has no ws4md types left, so transforming again is a no-op.
    PsmModel again = transform(psm.model);
    CHECK(again.model == psm.model);
    CHECK(again.split_records.empty());
    // The split records survive a trip through the text form.
    CHECK(recover_splits(parse_model(serialize_model(psm.model))) == psm.split_records);
  }
}
