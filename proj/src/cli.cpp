#include "devaware/cli.hpp"

#include <csignal>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "devaware/client_prefs.hpp"
#include "devaware/codegen.hpp"
#include "devaware/model_parser.hpp"
#include "devaware/pim2psm.hpp"
#include "devaware/service.hpp"
#include "devaware/strategies.hpp"
#include "devaware/transport.hpp"

namespace devaware::cli {

namespace {

struct IoFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoFailure("cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoFailure("cannot read " + path.string());
  return buf.str();
}

void write_file(const std::filesystem::path& path, std::string_view text) {
  std::error_code ec;
  std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  out.close();
  if (!out) throw IoFailure("cannot write " + path.string());
}

}  // namespace

std::filesystem::path psm_path_for(const std::filesystem::path& model_path, const std::filesystem::path& out_dir) {
  return out_dir / (model_path.stem().string() + ".psm.dam");
}

int cmd_transform(const std::filesystem::path& model_path, const std::filesystem::path& out_dir, std::ostream& out,
                  std::ostream& err) {
  try {
    PimModel pim = parse_model(read_file(model_path));
    ValidationReport report = validate_pim(pim);
    for (const auto& w : report.warnings()) err << "warning: " << w.path << ": [" << w.rule_id << "] " << w.message << "\n";
    if (!report.ok()) {
      for (const auto& v : report.errors()) err << "error: " << v.path << ": [" << v.rule_id << "] " << v.message << "\n";
      return kExitInvalid;
    }
    PsmModel psm = transform(pim);
    auto psm_path = psm_path_for(model_path, out_dir);
    write_file(psm_path, serialize_model(psm.model));
    out << psm_path.string() << "\n";
    for (const auto& split : psm.split_records) {
      RecordSchema schema = schema_for_split(psm.model, split);
      auto schema_path = out_dir / (schema.name + ".schema");
      write_file(schema_path, render_schema(schema));
      out << schema_path.string() << "\n";
    }
    return kExitOk;
  } catch (const IoFailure& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const ModelParseError& e) {
    err << model_path.string() << ":" << e.what() << "\n";
    return kExitInvalid;
  } catch (const TransformError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalid;
  }
}

int cmd_generate(const std::filesystem::path& psm_path, const std::filesystem::path& out_dir, std::ostream& out,
                 std::ostream& err) {
  try {
    PsmModel psm{parse_model(read_file(psm_path)), {}};
    auto specs = generate_interceptors(psm);
    if (specs.empty()) {
      err << "notice: no device-aware operations in " << psm_path.string() << "; nothing generated\n";
      return kExitOk;
    }
    std::vector<std::filesystem::path> written;
    try {
      written = write_artifacts(specs, out_dir);
    } catch (const std::exception& e) {
      throw IoFailure(e.what());
    }
    for (const auto& p : written) out << p.string() << "\n";
    return kExitOk;
  } catch (const IoFailure& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const ModelParseError& e) {
    err << psm_path.string() << ":" << e.what() << "\n";
    return kExitInvalid;
  } catch (const CodegenError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalid;
  }
}

std::unique_ptr<ServiceHost> load_service(const SimulateOptions& opts) {
  PsmModel psm{parse_model(read_file(opts.psm)), {}};
  auto specs = load_manifests(opts.icm_dir);
  auto schema_dir = opts.schemas_dir.value_or(opts.psm.parent_path().empty() ? "." : opts.psm.parent_path());
  auto schemas = load_schemas(schema_dir);
  // Manifests must correspond to the PSM they are served with.
  auto expected = generate_interceptors(psm);
  for (const auto& spec : specs)
    if (std::find(expected.begin(), expected.end(), spec) == expected.end())
      throw std::invalid_argument("manifest '" + spec.aspect_name + "' does not match " + opts.psm.string());
  auto host = std::make_unique<ServiceHost>();
  register_device_aware(*host, assemble_operations(specs, schemas, parse_fixtures(read_file(opts.fixtures))));
  return host;
}

std::string format_request_log(const RequestLog& entry) {
  return (entry.operation.empty() ? std::string("?") : entry.operation) + " " + std::string(to_string(entry.device)) +
         " -> " + entry.result;
}

namespace {

std::atomic<bool> g_interrupted{false};

extern "C" void on_signal(int) { g_interrupted.store(true); }

}  // namespace

int cmd_simulate(const SimulateOptions& opts, std::istream& in, std::ostream& out, std::ostream& err,
                 const std::atomic<bool>* stop, const std::function<void(uint16_t)>& on_listening) {
  std::unique_ptr<ServiceHost> host;
  try {
    host = load_service(opts);
  } catch (const IoFailure& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalid;
  }

  std::mutex log_mu;
  host->set_request_log([&](const RequestLog& entry) {
    std::lock_guard lock(log_mu);
    err << format_request_log(entry) << std::endl;
  });

  if (!opts.tcp) {
    std::string line;
    while (std::getline(in, line)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      out << host->handle_request(line) << "\n" << std::flush;
    }
    return kExitOk;
  }

  std::unique_ptr<TcpServer> server;
  try {
    auto hp = parse_host_port(*opts.tcp);
    server = std::make_unique<TcpServer>([&host](std::string_view req) { return host->handle_request(req); }, hp.host,
                                         hp.port);
    {
      std::lock_guard lock(log_mu);
      err << "listening on " << hp.host << ":" << server->port() << std::endl;
    }
  } catch (const TransportError& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  }
  if (on_listening) on_listening(server->port());
  if (!stop) {
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
  }
  while (!(stop ? stop->load() : g_interrupted.load())) std::this_thread::sleep_for(std::chrono::milliseconds(50));
  server->stop();
  return kExitOk;
}

namespace {

std::optional<DeviceClass> parse_device_flag(const std::optional<std::string>& flag) {
  if (!flag) return DeviceClass::UNSPECIFIED;
  std::string upper;
  for (char c : *flag) upper += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return device_from_tag(upper);
}

}  // namespace

int cmd_invoke(const InvokeOptions& opts, std::ostream& out, std::ostream& err) {
  auto device = parse_device_flag(opts.device);
  if (!device) {
    err << "error: --device must be cldc or cdc\n";
    return kExitInvalid;
  }
  FieldList args;
  for (const auto& a : opts.args) {
    auto eq = a.find('=');
    if (eq == std::string::npos || eq == 0) {
      err << "error: --arg expects name=value, got '" << a << "'\n";
      return kExitInvalid;
    }
    args.emplace_back(a.substr(0, eq), a.substr(eq + 1));
  }
  if (opts.prefs && !opts.profile) {
    err << "error: --prefs requires --profile\n";
    return kExitInvalid;
  }

  std::optional<DeviceProfile> profile;
  UserPreferences prefs;
  try {
    if (opts.profile) profile = parse_profile(read_file(*opts.profile));
    if (opts.prefs) prefs = parse_preferences(read_file(*opts.prefs));
  } catch (const IoFailure& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalid;
  }

  Envelope response;
  try {
    auto hp = parse_host_port(opts.addr);
    TcpClientTransport transport(hp.host, hp.port);
    std::string request;
    try {
      request = encode_envelope(build_invocation(*device, opts.op, std::move(args)));
    } catch (const EncodeError& e) {
      err << "error: " << e.what() << "\n";
      return kExitInvalid;
    }
    response = decode_envelope(transport.round_trip(request));
  } catch (const TransportError& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const DecodeError& e) {
    err << "error: malformed response: " << e.what() << "\n";
    return kExitIo;
  }

  if (const auto* fault = std::get_if<Fault>(&response.body)) {
    err << "error response [" << fault->code << "]: " << fault->message << "\n";
    return kExitInvalid;
  }
  const auto* resp = std::get_if<Response>(&response.body);
  if (!resp) {
    err << "error: unexpected response body\n";
    return kExitIo;
  }
  out << "# " << resp->schema_name << "\n";
  for (const auto& [k, v] : resp->fields) out << k << "=" << v << "\n";
  if (profile) {
    try {
      out << build_render_plan(Record{resp->schema_name, resp->fields}, *profile, prefs).to_json();
    } catch (const std::exception& e) {
      err << "error: " << e.what() << "\n";
      return kExitInvalid;
    }
  }
  return kExitOk;
}

int cmd_bench(const std::optional<std::filesystem::path>& config_path, const std::filesystem::path& out_path,
              std::ostream& out, std::ostream& err) {
  BenchConfig cfg;
  try {
    if (config_path) cfg = parse_bench_config(read_file(*config_path));
  } catch (const IoFailure& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalid;
  }

  out << "Quality matrix\n" << format_quality_matrix(quality_matrix()) << "\n";

  auto ops = case_study::operations();
  const auto& fixtures = case_study::fixtures();
  try {
    StrategyHarness harness(ops, cfg.transport);
    auto mismatches =
        check_equivalence(harness, fixtures, {DeviceClass::CLDC, DeviceClass::CDC, DeviceClass::UNSPECIFIED});
    if (!mismatches.empty()) {
      for (const auto& m : mismatches)
        err << "equivalence FAIL: " << to_string(m.strategy) << " " << to_string(m.device) << " key=" << m.key << ": "
            << m.detail << "\n";
      return kExitInvalid;
    }
    out << "Payload equivalence: PASS (" << fixtures.rows.size() << " records x 3 devices x 4 strategies)\n\n";
  } catch (const TransportError& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  }

  BenchReport report = run_bench(cfg, ops, fixtures);
  try {
    auto csv = export_report(report, out_path);
    err << "wrote " << out_path.string() << " and " << csv.string() << "\n";
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  }

  out << "strategy        count    mean ns/call   stddev\n";
  for (const auto& s : report.summarize()) {
    std::ostringstream line;
    line << std::left;
    line.width(16);
    line << to_string(s.strategy);
    line.width(9);
    line << s.count;
    line.width(15);
    line << static_cast<uint64_t>(s.mean_ns_per_invocation);
    line << static_cast<uint64_t>(s.stddev_ns_per_invocation);
    out << line.str() << "\n";
  }
  for (const auto& c : check_timing(report)) {
    out << (c.facade_slower ? "PASS" : "FAIL") << " count=" << c.count << " Facade mean > SoapHeader mean\n";
    out << (c.header_close_to_multi_parameter ? "PASS" : "FAIL") << " count=" << c.count
        << " SoapHeader within 25% of MultiParameter\n";
  }
  if (report.partial) {
    err << "error: bench aborted: " << report.error << "\n";
    return kExitIo;
  }
  return kExitOk;
}

int cmd_render(const std::filesystem::path& response_path, const std::filesystem::path& profile_path,
               const std::optional<std::filesystem::path>& prefs_path, std::ostream& out, std::ostream& err) {
  try {
    Envelope env = decode_envelope(read_file(response_path));
    const auto* resp = std::get_if<Response>(&env.body);
    if (!resp) {
      err << "error: " << response_path.string() << " does not hold a response\n";
      return kExitInvalid;
    }
    DeviceProfile profile = parse_profile(read_file(profile_path));
    UserPreferences prefs = prefs_path ? parse_preferences(read_file(*prefs_path)) : UserPreferences{};
    out << build_render_plan(Record{resp->schema_name, resp->fields}, profile, prefs).to_json();
    return kExitOk;
  } catch (const IoFailure& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalid;
  }
}

int run(int argc, char** argv) {
  CLI::App app{"Device-aware web service pipeline: model transformation, interceptor generation, service "
               "simulation, client invocation and strategy benchmarking."};
  app.require_subcommand(1);

  std::filesystem::path model, out_dir, psm;
  auto* transform_cmd = app.add_subcommand("transform", "Transform a marked model into its platform-specific form");
  transform_cmd->add_option("--model", model, "Input model (.dam)")->required();
  transform_cmd->add_option("--out", out_dir, "Output directory")->required();

  std::filesystem::path gen_out;
  auto* generate_cmd = app.add_subcommand("generate", "Generate interceptor manifests from a PSM");
  generate_cmd->add_option("--psm", psm, "Platform-specific model (.dam)")->required();
  generate_cmd->add_option("--out", gen_out, "Output directory")->required();

  SimulateOptions sim;
  std::string tcp;
  std::filesystem::path schemas;
  auto* simulate_cmd = app.add_subcommand("simulate", "Host the service described by the generated artifacts");
  simulate_cmd->add_option("--psm", sim.psm, "Platform-specific model (.dam)")->required();
  simulate_cmd->add_option("--icm", sim.icm_dir, "Directory of .icm manifests")->required();
  simulate_cmd->add_option("--fixtures", sim.fixtures, "Fixture records (JSON array)")->required();
  simulate_cmd->add_option("--schemas", schemas, "Directory of .schema descriptors (default: PSM directory)");
  simulate_cmd->add_option("--tcp", tcp, "Listen on HOST:PORT instead of reading requests from stdin");

  InvokeOptions inv;
  std::string device;
  std::filesystem::path prefs, profile;
  auto* invoke_cmd = app.add_subcommand("invoke", "Invoke an operation on a running service");
  invoke_cmd->add_option("--addr", inv.addr, "Service address HOST:PORT")->required();
  invoke_cmd->add_option("--op", inv.op, "Operation name")->required();
  invoke_cmd->add_option("--arg", inv.args, "Argument name=value (repeatable)");
  invoke_cmd->add_option("--device", device, "Invoking device class: cldc or cdc");
  invoke_cmd->add_option("--prefs", prefs, "User preferences XML");
  invoke_cmd->add_option("--profile", profile, "Device profile JSON");

  std::filesystem::path bench_config, bench_out;
  auto* bench_cmd = app.add_subcommand("bench", "Compare the four device-awareness strategies");
  bench_cmd->add_option("--config", bench_config, "Bench configuration JSON");
  bench_cmd->add_option("--out", bench_out, "Report path (.json); a .csv mirror is written next to it")->required();

  std::filesystem::path render_response, render_profile, render_prefs;
  auto* render_cmd = app.add_subcommand("render", "Print the render plan for a response document");
  render_cmd->add_option("--response", render_response, "Response envelope document")->required();
  render_cmd->add_option("--profile", render_profile, "Device profile JSON")->required();
  render_cmd->add_option("--prefs", render_prefs, "User preferences XML");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitIo;
  }

  if (transform_cmd->parsed()) return cmd_transform(model, out_dir, std::cout, std::cerr);
  if (generate_cmd->parsed()) return cmd_generate(psm, gen_out, std::cout, std::cerr);
  if (simulate_cmd->parsed()) {
    if (simulate_cmd->count("--tcp")) sim.tcp = tcp;
    if (simulate_cmd->count("--schemas")) sim.schemas_dir = schemas;
    return cmd_simulate(sim, std::cin, std::cout, std::cerr);
  }
  if (invoke_cmd->parsed()) {
    if (invoke_cmd->count("--device")) inv.device = device;
    if (invoke_cmd->count("--prefs")) inv.prefs = prefs;
    if (invoke_cmd->count("--profile")) inv.profile = profile;
    return cmd_invoke(inv, std::cout, std::cerr);
  }
  if (bench_cmd->parsed()) {
    std::optional<std::filesystem::path> cfg;
    if (bench_cmd->count("--config")) cfg = bench_config;
    return cmd_bench(cfg, bench_out, std::cout, std::cerr);
  }
  if (render_cmd->parsed()) {
    std::optional<std::filesystem::path> p;
    if (render_cmd->count("--prefs")) p = render_prefs;
    return cmd_render(render_response, render_profile, p, std::cout, std::cerr);
  }
  return kExitIo;
}

}  // namespace devaware::cli
