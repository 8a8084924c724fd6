#include "devaware/runtime.hpp"

#include <algorithm>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>

namespace devaware {

bool RecordSchema::has_field(std::string_view field) const {
  return std::any_of(fields.begin(), fields.end(), [&](const auto& f) { return f.first == field; });
}

void RecordSchema::check() const {
  std::set<std::string> names;
  for (const auto& f : fields)
    if (!names.insert(f.first).second) throw std::invalid_argument(name + ": duplicate field '" + f.first + "'");
  size_t cursor = 0;
  for (const auto& b : base_fields) {
    auto it = std::find_if(fields.begin() + static_cast<std::ptrdiff_t>(cursor), fields.end(),
                           [&](const auto& f) { return f.first == b; });
    if (it == fields.end())
      throw std::invalid_argument(name + ": base field '" + b + "' missing or out of order");
    cursor = static_cast<size_t>(it - fields.begin()) + 1;
  }
}

const std::string* Record::get(std::string_view field) const {
  for (const auto& [k, v] : values)
    if (k == field) return &v;
  return nullptr;
}

Record project_to_base(const Record& rec, const RecordSchema& schema) {
  Record out;
  out.schema = schema.base_name;
  out.values.reserve(schema.base_fields.size());
  for (const auto& name : schema.base_fields) {
    const std::string* v = rec.get(name);
    if (!v)
      throw ServiceError(error_code::kInternalError, "record '" + rec.schema + "' lacks base field '" + name + "'");
    out.values.emplace_back(name, *v);
  }
  return out;
}

Record apply_interceptor(const RequestContext& ctx, const InterceptorSpec& spec, const RecordSchema& schema,
                         const std::function<Record()>& produce) {
  Record full = produce();
  if (full.schema != spec.extended_type)
    throw ServiceError(error_code::kInternalError,
                       "producer returned '" + full.schema + "', expected '" + spec.extended_type + "'");
  if (ctx.device == DeviceClass::CLDC) return project_to_base(full, schema);
  return full;
}

Envelope make_fault(std::string_view code, const std::string& message) {
  return Envelope{std::nullopt, Fault{std::string(code), message}};
}

namespace {

void check_record(const Record& rec, const RecordSchema& schema) {
  bool ok = rec.schema == schema.name && rec.values.size() == schema.fields.size();
  for (size_t i = 0; ok && i < rec.values.size(); ++i) ok = rec.values[i].first == schema.fields[i].first;
  if (!ok)
    throw ServiceError(error_code::kInternalError, "producer record does not conform to schema '" + schema.name + "'");
}

}  // namespace

void ServiceHost::register_operation(OperationBinding binding) {
  if (!binding.producer) throw RegistrationError(binding.operation + ": binding without producer");
  try {
    binding.schema.check();
  } catch (const std::invalid_argument& e) {
    throw RegistrationError(e.what());
  }
  if (const auto& spec = binding.interceptor) {
    std::vector<std::string> spec_params;
    for (const auto& p : spec->input_params) spec_params.push_back(p.first);
    if (spec->operation != binding.operation || spec->extended_type != binding.schema.name ||
        spec->base_type != binding.schema.base_name || spec_params != binding.params)
      throw RegistrationError(binding.operation + ": interceptor '" + spec->aspect_name +
                              "' does not match the operation binding");
  }

  Handler handler = [producer = std::move(binding.producer), schema = binding.schema,
                     spec = std::move(binding.interceptor)](const RequestContext& ctx, const FieldList& args) {
    auto produce = [&] {
      Record rec = producer(args);
      check_record(rec, schema);
      return rec;
    };
    if (!spec) return produce();
    return apply_interceptor(ctx, *spec, schema, produce);
  };
  insert(std::move(binding.operation), Entry{std::move(binding.params), std::move(handler)});
}

void ServiceHost::register_handler(std::string operation, std::vector<std::string> params, Handler handler) {
  insert(std::move(operation), Entry{std::move(params), std::move(handler)});
}

void ServiceHost::insert(std::string operation, Entry entry) {
  std::unique_lock lock(mu_);
  if (entries_.contains(operation)) throw RegistrationError("operation '" + operation + "' already registered");
  entries_.emplace(std::move(operation), std::move(entry));
}

bool ServiceHost::has_operation(std::string_view operation) const {
  std::shared_lock lock(mu_);
  return entries_.find(operation) != entries_.end();
}

Record ServiceHost::dispatch(const RequestContext& ctx, const Call& call) const {
  Handler handler;
  {
    std::shared_lock lock(mu_);
    auto it = entries_.find(call.operation);
    if (it == entries_.end())
      throw ServiceError(error_code::kUnknownOperation, "unknown operation '" + call.operation + "'");
    const auto& params = it->second.params;
    bool match = call.args.size() == params.size();
    for (size_t i = 0; match && i < params.size(); ++i)
      match = std::any_of(call.args.begin(), call.args.end(), [&](const auto& a) { return a.first == params[i]; });
    if (!match) throw ServiceError(error_code::kArgMismatch, "arguments do not match '" + call.operation + "'");
    handler = it->second.handler;
  }
  try {
    return handler(ctx, call.args);
  } catch (const ServiceError&) {
    throw;
  } catch (const std::exception& e) {
    throw ServiceError(error_code::kInternalError, e.what());
  }
}

std::string ServiceHost::handle_request(std::string_view raw) const {
  RequestLog entry;
  Envelope reply;
  try {
    Envelope request;
    try {
      request = decode_envelope(raw);
    } catch (const DecodeError& e) {
      throw ServiceError(error_code::kMalformedRequest, e.what());
    }
    const auto* call = std::get_if<Call>(&request.body);
    if (!call) throw ServiceError(error_code::kMalformedRequest, "request body is not a call");
    entry.operation = call->operation;
    RequestContext ctx{extract_device(request), next_request_id_.fetch_add(1, std::memory_order_relaxed)};
    entry.device = ctx.device;
    Record rec = dispatch(ctx, *call);
    entry.result = rec.schema;
    reply = Envelope{std::nullopt, Response{std::move(rec.schema), std::move(rec.values)}};
  } catch (const ServiceError& e) {
    entry.result = "error:" + e.code();
    reply = make_fault(e.code(), e.what());
  } catch (const std::exception& e) {
    entry.result = "error:" + std::string(error_code::kInternalError);
    reply = make_fault(error_code::kInternalError, e.what());
  }
  if (log_) log_(entry);
  try {
    return encode_envelope(reply);
  } catch (const EncodeError& e) {
    return encode_envelope(make_fault(error_code::kInternalError, e.what()));
  }
}

RecordSchema schema_for_split(const PimModel& psm, const SplitRecord& split) {
  const auto* pkg = psm.find_package(split.package);
  const ClassNode* base = pkg ? pkg->find_class(split.base_class) : nullptr;
  const ClassNode* ext = pkg ? pkg->find_class(split.extended_class) : nullptr;
  if (!base || !ext) throw std::invalid_argument("split classes for '" + split.source_class + "' not found");
  RecordSchema schema;
  schema.name = ext->name;
  schema.base_name = base->name;
  for (const auto& a : base->attributes) {
    schema.fields.emplace_back(a.name, a.type.name);
    schema.base_fields.push_back(a.name);
  }
  for (const auto& a : ext->attributes) schema.fields.emplace_back(a.name, a.type.name);
  return schema;
}

std::string render_schema(const RecordSchema& schema) {
  std::string out = "schema " + schema.name + "\nbase " + schema.base_name + "\n";
  for (const auto& [name, type] : schema.fields) {
    out += "field " + name + ": " + type;
    if (std::find(schema.base_fields.begin(), schema.base_fields.end(), name) != schema.base_fields.end())
      out += " base";
    out += "\n";
  }
  return out;
}

RecordSchema parse_schema(std::string_view text) {
  RecordSchema schema;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  auto fail = [&](const std::string& what) {
    throw std::invalid_argument("schema line " + std::to_string(line_no) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream words(line);
    std::string kw;
    if (!(words >> kw) || kw.front() == '#') continue;
    if (kw == "schema") {
      if (!(words >> schema.name)) fail("missing schema name");
    } else if (kw == "base") {
      if (!(words >> schema.base_name)) fail("missing base name");
    } else if (kw == "field") {
      std::string name, type, flag;
      if (!(words >> name >> type) || name.size() < 2 || name.back() != ':') fail("expected 'field <name>: <Type>'");
      name.pop_back();
      schema.fields.emplace_back(name, type);
      if (words >> flag) {
        if (flag != "base") fail("unknown field flag '" + flag + "'");
        schema.base_fields.push_back(name);
      }
    } else {
      fail("unknown keyword '" + kw + "'");
    }
  }
  if (schema.name.empty() || schema.base_name.empty()) fail("schema and base names are required");
  schema.check();
  return schema;
}

std::vector<RecordSchema> load_schemas(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".schema") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  std::vector<RecordSchema> out;
  for (const auto& f : files) {
    std::ifstream in(f, std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    out.push_back(parse_schema(buf.str()));
  }
  return out;
}

}  // namespace devaware
