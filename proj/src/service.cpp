#include "devaware/service.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "devaware/model_parser.hpp"

namespace devaware {

FixtureTable parse_fixtures(std::string_view json_text) {
  nlohmann::ordered_json doc;
  try {
    doc = nlohmann::ordered_json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(std::string("fixtures: ") + e.what());
  }
  if (!doc.is_array()) throw std::invalid_argument("fixtures: expected a JSON array of records");
  FixtureTable table;
  for (const auto& item : doc) {
    if (!item.is_object()) throw std::invalid_argument("fixtures: every record must be an object");
    FieldList row;
    for (const auto& [key, value] : item.items()) {
      if (value.is_string())
        row.emplace_back(key, value.get<std::string>());
      else if (value.is_number() || value.is_boolean())
        row.emplace_back(key, value.dump());
      else
        throw std::invalid_argument("fixtures: field '" + key + "' must be a scalar");
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

FixtureTable load_fixtures(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_fixtures(buf.str());
}

namespace {

const std::string* find_value(const FieldList& list, std::string_view key) {
  for (const auto& [k, v] : list)
    if (k == key) return &v;
  return nullptr;
}

}  // namespace

Producer table_producer(FixtureTable table, RecordSchema schema, std::string key_field) {
  return [table = std::move(table), schema = std::move(schema), key = std::move(key_field)](const FieldList& args) {
    const std::string* wanted = find_value(args, key);
    if (!wanted) throw ServiceError(error_code::kArgMismatch, "missing argument '" + key + "'");
    for (const auto& row : table.rows) {
      const std::string* v = find_value(row, key);
      if (!v || *v != *wanted) continue;
      Record rec{schema.name, {}};
      rec.values.reserve(schema.fields.size());
      for (const auto& field : schema.fields) {
        const std::string* value = find_value(row, field.first);
        if (!value)
          throw ServiceError(error_code::kInternalError, "fixture row lacks field '" + field.first + "'");
        rec.values.emplace_back(field.first, *value);
      }
      return rec;
    }
    throw ServiceError(error_code::kInternalError, "no record with " + key + "=" + *wanted);
  };
}

std::vector<DeviceAwareOperation> assemble_operations(const std::vector<InterceptorSpec>& specs,
                                                     const std::vector<RecordSchema>& schemas,
                                                     const FixtureTable& fixtures) {
  std::vector<DeviceAwareOperation> ops;
  for (const auto& spec : specs) {
    const RecordSchema* schema = nullptr;
    for (const auto& s : schemas)
      if (s.name == spec.extended_type) schema = &s;
    if (!schema) throw std::invalid_argument(spec.aspect_name + ": no schema named '" + spec.extended_type + "'");
    if (schema->base_name != spec.base_type)
      throw std::invalid_argument(spec.aspect_name + ": schema base '" + schema->base_name + "' differs from '" +
                                  spec.base_type + "'");
    if (spec.input_params.empty())
      throw std::invalid_argument(spec.aspect_name + ": operation has no key parameter");
    ops.push_back({spec, *schema, table_producer(fixtures, *schema, spec.input_params.front().first)});
  }
  return ops;
}

void register_device_aware(ServiceHost& host, const std::vector<DeviceAwareOperation>& ops) {
  for (const auto& op : ops) {
    std::vector<std::string> params;
    for (const auto& p : op.spec.input_params) params.push_back(p.first);
    host.register_operation({op.spec.operation, std::move(params), op.producer, op.schema, op.spec});
  }
}

namespace case_study {

namespace {

constexpr std::string_view kModel = R"(model BookShop
  package bookshop
    class BookStore <<WebService>>
      op getBookInfo(ISBN: String): BookInfo <<ws4md>>
    class BookInfo <<ws4md>>
      attr ISBN: String <<cldc>>
      attr title: String <<cldc>>
      attr author: String <<cldc>>
      attr publisher: String <<cldc>>
      attr price: Float <<cldc>>
      attr index: String
      attr description: String
      attr reviews: String
)";

constexpr std::string_view kFixtures = R"([
  {"ISBN": "123", "title": "Web Services Essentials", "author": "E. Cerami", "publisher": "O'Reilly", "price": 29.95,
   "index": "1. XML-RPC; 2. SOAP; 3. WSDL; 4. UDDI", "description": "A concise guide to distributed application protocols.",
   "reviews": "Clear and practical."},
  {"ISBN": "0-201-63361-2", "title": "Design Patterns", "author": "E. Gamma et al.", "publisher": "Addison-Wesley",
   "price": 54.99, "index": "1. Introduction; 2. A Case Study; 3. Creational Patterns; 4. Structural Patterns",
   "description": "Elements of reusable object-oriented software.", "reviews": "A classic & still relevant."},
  {"ISBN": "978-0-321-12742-6", "title": "Aspect-Oriented Software Development", "author": "R. Filman et al.",
   "publisher": "Addison-Wesley", "price": 49.5, "index": "Part I: Foundations; Part II: Languages",
   "description": "Collected chapters on separating crosscutting concerns.", "reviews": "Broad <survey> of the field."},
  {"ISBN": "978-0-13-235088-4", "title": "Clean Code", "author": "R. C. Martin", "publisher": "Prentice Hall",
   "price": 37.49, "index": "1. Clean Code; 2. Meaningful Names; 3. Functions",
   "description": "A handbook of agile software craftsmanship.", "reviews": "Opinionated; useful."},
  {"ISBN": "978-1-4493-3180-0", "title": "Mobile Web Development", "author": "N. Gomez", "publisher": "Packt",
   "price": 24, "index": "1. Devices; 2. Markup; 3. Adaptation", "description": "Building sites for small screens.",
   "reviews": "Dated but insightful."},
  {"ISBN": "978-84-9964-000-1", "title": "Servicios Web Móviles", "author": "G. Ortega", "publisher": "Ra-Ma",
   "price": 31.2, "index": "1. SOAP; 2. J2ME; 3. Aspectos", "description": "Servicios para dispositivos móviles.",
   "reviews": "Muy completo."}
]
)";

}  // namespace

std::string_view model_text() { return kModel; }

const FixtureTable& fixtures() {
  static const FixtureTable table = parse_fixtures(kFixtures);
  return table;
}

std::vector<DeviceAwareOperation> operations() {
  PsmModel psm = transform(parse_model(kModel));
  std::vector<RecordSchema> schemas;
  for (const auto& split : psm.split_records) schemas.push_back(schema_for_split(psm.model, split));
  return assemble_operations(generate_interceptors(psm), schemas, fixtures());
}

}  // namespace case_study

}  // namespace devaware
