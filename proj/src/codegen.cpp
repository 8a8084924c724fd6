#include "devaware/codegen.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace devaware {

std::string aspect_name_for(std::string_view package, std::string_view cls, std::string_view operation) {
  std::string out = "Aspect_";
  out.append(package).append("_").append(cls).append("_").append(operation);
  return out;
}

std::string pointcut_name_for(std::string_view cls, std::string_view operation) {
  std::string out = "PC_";
  out.append(cls).append("_").append(operation);
  return out;
}

namespace {

const SplitRecord* find_split_by_base(const std::vector<SplitRecord>& splits, const PimModel& model,
                                      const PackageNode& from, const std::string& base_name) {
  const ClassNode* target = resolve_class_ref(model, from, base_name);
  if (!target) return nullptr;
  for (const auto& rec : splits) {
    const auto* pkg = model.find_package(rec.package);
    if (pkg && pkg->find_class(rec.base_class) == target) return &rec;
  }
  return nullptr;
}

}  // namespace

std::vector<InterceptorSpec> generate_interceptors(const PsmModel& psm) {
  std::vector<SplitRecord> splits = recover_splits(psm.model);
  for (const auto& rec : psm.split_records)
    if (std::find(splits.begin(), splits.end(), rec) == splits.end()) splits.push_back(rec);

  std::vector<InterceptorSpec> specs;
  for (const auto& pkg : psm.model.packages) {
    for (const auto& cls : pkg.classes) {
      for (const auto& op : cls.operations) {
        if (!op.stereotypes.contains(Stereotype::Ws4md)) continue;
        const auto* ret = op.return_param();
        const SplitRecord* split =
            ret && ret->type.is_class() ? find_split_by_base(splits, psm.model, pkg, ret->type.name) : nullptr;
        if (!split)
          throw CodegenError(pkg.name + "." + cls.name + "." + op.name + ": return type '" +
                             (ret ? ret->type.name : std::string("?")) + "' has no split record");

        InterceptorSpec spec;
        spec.aspect_name = aspect_name_for(pkg.name, cls.name, op.name);
        spec.pointcut_name = pointcut_name_for(cls.name, op.name);
        spec.package = pkg.name;
        spec.target_class = cls.name;
        spec.operation = op.name;
        for (const auto* p : op.input_params()) spec.input_params.emplace_back(p->name, p->type.name);
        spec.extended_type = split->extended_class;
        spec.base_type = split->base_class;
        specs.push_back(std::move(spec));
      }
    }
  }
  return specs;
}

GeneratedArtifact render_interceptor(const InterceptorSpec& spec) {
  std::string params = "(";
  for (size_t i = 0; i < spec.input_params.size(); ++i) {
    if (i) params += ", ";
    params += spec.input_params[i].first + ": " + spec.input_params[i].second;
  }
  params += ")";

  std::string text;
  auto line = [&text](std::string_view key, std::string_view value) {
    text.append(key).append(": ").append(value).append("\n");
  };
  line("aspect_name", spec.aspect_name);
  line("pointcut_name", spec.pointcut_name);
  line("package", spec.package);
  line("target_class", spec.target_class);
  line("operation", spec.operation);
  line("input_params", params);
  line("extended_type", spec.extended_type);
  line("base_type", spec.base_type);
  line("advice", spec.advice);
  line("device_branch", spec.device_branch);

  return {std::filesystem::path(spec.package) / (spec.aspect_name + ".icm"), std::move(text)};
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::pair<std::string, std::string>> parse_params(std::string_view value, int line_no) {
  auto fail = [line_no](const std::string& what) {
    throw CodegenError("manifest line " + std::to_string(line_no) + ": " + what);
  };
  if (value.size() < 2 || value.front() != '(' || value.back() != ')') fail("input_params must be parenthesized");
  std::string_view inner = trim(value.substr(1, value.size() - 2));
  std::vector<std::pair<std::string, std::string>> out;
  if (inner.empty()) return out;
  while (true) {
    size_t comma = inner.find(',');
    std::string_view item = trim(inner.substr(0, comma));
    size_t colon = item.find(':');
    if (colon == std::string_view::npos) fail("parameter without ':'");
    auto name = trim(item.substr(0, colon));
    auto type = trim(item.substr(colon + 1));
    if (name.empty() || type.empty()) fail("empty parameter name or type");
    out.emplace_back(std::string(name), std::string(type));
    if (comma == std::string_view::npos) break;
    inner = inner.substr(comma + 1);
  }
  return out;
}

}  // namespace

InterceptorSpec parse_interceptor(std::string_view text) {
  static constexpr std::string_view kFields[] = {"aspect_name", "pointcut_name", "package",   "target_class",
                                                 "operation",   "input_params",  "extended_type",
                                                 "base_type",   "advice",        "device_branch"};
  InterceptorSpec spec;
  size_t next_field = 0;
  int line_no = 0;
  std::istringstream in{std::string(text)};
  std::string raw;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    size_t colon = line.find(':');
    if (colon == std::string_view::npos)
      throw CodegenError("manifest line " + std::to_string(line_no) + ": expected 'key: value'");
    std::string_view key = trim(line.substr(0, colon));
    std::string_view value = trim(line.substr(colon + 1));
    if (next_field >= std::size(kFields) || key != kFields[next_field])
      throw CodegenError("manifest line " + std::to_string(line_no) + ": unexpected key '" + std::string(key) + "'" +
                         (next_field < std::size(kFields) ? ", expected '" + std::string(kFields[next_field]) + "'"
                                                          : std::string()));
    std::string v(value);
    switch (next_field) {
      case 0: spec.aspect_name = v; break;
      case 1: spec.pointcut_name = v; break;
      case 2: spec.package = v; break;
      case 3: spec.target_class = v; break;
      case 4: spec.operation = v; break;
      case 5: spec.input_params = parse_params(value, line_no); break;
      case 6: spec.extended_type = v; break;
      case 7: spec.base_type = v; break;
      case 8:
        if (value != kAdviceAround) throw CodegenError("unsupported advice kind '" + v + "'");
        spec.advice = v;
        break;
      case 9:
        if (value != kCldcBranch) throw CodegenError("unsupported device branch '" + v + "'");
        spec.device_branch = v;
        break;
    }
    ++next_field;
  }
  if (next_field != std::size(kFields))
    throw CodegenError("manifest incomplete: missing '" + std::string(kFields[next_field]) + "'");
  return spec;
}

std::vector<std::filesystem::path> write_artifacts(const std::vector<InterceptorSpec>& specs,
                                                   const std::filesystem::path& out_dir) {
  std::vector<std::filesystem::path> written;
  std::filesystem::create_directories(out_dir);
  for (const auto& spec : specs) {
    auto artifact = render_interceptor(spec);
    auto path = out_dir / artifact.path;
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << artifact.text;
    out.close();
    if (!out) throw std::runtime_error("cannot write " + path.string());
    written.push_back(path);
  }
  return written;
}

std::vector<InterceptorSpec> load_manifests(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".icm") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  std::vector<InterceptorSpec> specs;
  for (const auto& f : files) {
    std::ifstream in(f, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + f.string());
    std::stringstream buf;
    buf << in.rdbuf();
    try {
      specs.push_back(parse_interceptor(buf.str()));
    } catch (const CodegenError& e) {
      throw CodegenError(f.string() + ": " + e.what());
    }
  }
  return specs;
}

}  // namespace devaware
