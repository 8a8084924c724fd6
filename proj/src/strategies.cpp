#include "devaware/strategies.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

namespace devaware {

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::MultiParameter: return "MultiParameter";
    case Strategy::SoapHeader: return "SoapHeader";
    case Strategy::MultiOperation: return "MultiOperation";
    case Strategy::Facade: return "Facade";
  }
  return "?";
}

std::optional<Strategy> strategy_from_string(std::string_view name) {
  for (auto s : kAllStrategies)
    if (to_string(s) == name) return s;
  return std::nullopt;
}

std::string_view to_string(Mark m) {
  switch (m) {
    case Mark::Zero: return "0";
    case Mark::One: return "1";
    case Mark::Dual: return "0/1";
  }
  return "?";
}

std::string_view to_string(TransportKind t) { return t == TransportKind::Tcp ? "tcp" : "inproc"; }

QualityMatrix quality_matrix() {
  using enum Mark;
  return {{
      {Strategy::MultiParameter, Zero, One, One, Zero, Zero},
      {Strategy::SoapHeader, One, Dual, One, One, One},
      {Strategy::MultiOperation, Zero, One, Zero, Zero, Zero},
      {Strategy::Facade, Zero, One, Zero, Zero, One},
  }};
}

std::string format_quality_matrix(const QualityMatrix& m) {
  std::ostringstream out;
  auto pad = [](std::string_view s, size_t w) {
    std::string r(s);
    r.resize(std::max(w, r.size()), ' ');
    return r;
  };
  out << pad("", 18);
  for (const auto& row : m) out << pad(to_string(row.strategy), 16);
  out << "\n";
  const std::pair<const char*, Mark QualityRow::*> rows[] = {
      {"Transparency", &QualityRow::transparency},         {"Consistency", &QualityRow::consistency},
      {"Non-duplicity", &QualityRow::non_duplicity},       {"Client-Awareness", &QualityRow::client_awareness},
      {"Non-intrusiveness", &QualityRow::non_intrusiveness}};
  for (const auto& [label, member] : rows) {
    out << pad(label, 18);
    for (const auto& row : m) out << pad(to_string(row.*member), 16);
    out << "\n";
  }
  return out.str();
}

namespace {

std::string device_tag(DeviceClass d) { return std::string(to_string(d)); }

Record to_record(const std::string& raw) {
  Envelope env = decode_envelope(raw);
  if (auto* resp = std::get_if<Response>(&env.body)) return Record{std::move(resp->schema_name), std::move(resp->fields)};
  if (auto* fault = std::get_if<Fault>(&env.body)) throw ServiceError(fault->code, fault->message);
  throw ServiceError(error_code::kMalformedRequest, "response body holds a call");
}

struct Endpoint {
  std::unique_ptr<ServiceHost> host = std::make_unique<ServiceHost>();
  std::unique_ptr<TcpServer> server;
  std::unique_ptr<Transport> client;

  void open(TransportKind kind) {
    ServiceHost* h = host.get();
    if (kind == TransportKind::InProc) {
      client = std::make_unique<InProcTransport>([h](std::string_view req) { return h->handle_request(req); });
    } else {
      server = std::make_unique<TcpServer>([h](std::string_view req) { return h->handle_request(req); },
                                           "127.0.0.1", 0);
      client = std::make_unique<TcpClientTransport>("127.0.0.1", server->port());
    }
  }

  ~Endpoint() {
    client.reset();
    if (server) server->stop();
  }
};

std::vector<std::string> param_names(const DeviceAwareOperation& op) {
  std::vector<std::string> out;
  for (const auto& p : op.spec.input_params) out.push_back(p.first);
  return out;
}

}  // namespace

struct StrategyHarness::Impl {
  // Declaration order matters: facades forward to the backend, so they must
  // be torn down first (members are destroyed in reverse order).
  Endpoint backend;
  Endpoint multi_parameter;
  Endpoint soap_header;
  Endpoint multi_operation;
  Endpoint facade_cldc;
  Endpoint facade_full;
  std::map<std::string, size_t, std::less<>> index;

  Impl(const std::vector<DeviceAwareOperation>& ops, TransportKind kind) {
    for (size_t i = 0; i < ops.size(); ++i) {
      const auto& op = ops[i];
      if (!index.emplace(op.spec.operation, i).second)
        throw std::invalid_argument("operation '" + op.spec.operation + "' listed twice");
      auto params = param_names(op);

      backend.host->register_operation({op.spec.operation, params, op.producer, op.schema, std::nullopt});

      auto mp_params = params;
      mp_params.emplace_back(kDeviceTypeArg);
      multi_parameter.host->register_handler(
          op.spec.operation, mp_params, [producer = op.producer, schema = op.schema](const RequestContext&, const FieldList& args) {
            std::string_view device;
            for (const auto& [k, v] : args)
              if (k == kDeviceTypeArg) device = v;
            Record full = producer(args);
            return device == "CLDC" ? project_to_base(full, schema) : full;
          });

      multi_operation.host->register_operation({op.spec.operation, params, op.producer, op.schema, std::nullopt});
      multi_operation.host->register_handler(
          op.spec.operation + std::string(kCldcOperationSuffix), params,
          [producer = op.producer, schema = op.schema](const RequestContext&, const FieldList& args) {
            return project_to_base(producer(args), schema);
          });
    }

    register_device_aware(*soap_header.host, ops);

    backend.open(kind);
    Transport* to_backend = backend.client.get();
    for (const auto& op : ops) {
      auto params = param_names(op);
      for (bool cldc : {true, false}) {
        auto& facade = cldc ? facade_cldc : facade_full;
        facade.host->register_handler(
            op.spec.operation, params,
            [to_backend, cldc, name = op.spec.operation, schema = op.schema](const RequestContext&, const FieldList& args) {
              Record full = to_record(to_backend->round_trip(encode_envelope({std::nullopt, Call{name, args}})));
              return cldc ? project_to_base(full, schema) : full;
            });
      }
    }

    for (auto* e : {&multi_parameter, &soap_header, &multi_operation, &facade_cldc, &facade_full}) e->open(kind);
  }

  std::vector<Transport*> transports() const {
    return {backend.client.get(),     multi_parameter.client.get(), soap_header.client.get(),
            multi_operation.client.get(), facade_cldc.client.get(), facade_full.client.get()};
  }
};

StrategyHarness::StrategyHarness(std::vector<DeviceAwareOperation> ops, TransportKind kind)
    : ops_(std::move(ops)), impl_(std::make_unique<Impl>(ops_, kind)) {}

StrategyHarness::~StrategyHarness() = default;

Record StrategyHarness::invoke_via(Strategy strategy, DeviceClass device, std::string_view operation,
                                   const FieldList& args) {
  if (impl_->index.find(operation) == impl_->index.end())
    throw std::invalid_argument("operation '" + std::string(operation) + "' is not hosted");

  Envelope env{std::nullopt, Call{std::string(operation), args}};
  Transport* transport = nullptr;
  auto& call = std::get<Call>(env.body);
  switch (strategy) {
    case Strategy::MultiParameter:
      call.args.emplace_back(kDeviceTypeArg, device_tag(device));
      transport = impl_->multi_parameter.client.get();
      break;
    case Strategy::SoapHeader:
      if (device != DeviceClass::UNSPECIFIED) env.header = DeviceHeader{device};
      transport = impl_->soap_header.client.get();
      break;
    case Strategy::MultiOperation:
      if (device == DeviceClass::CLDC) call.operation += kCldcOperationSuffix;
      transport = impl_->multi_operation.client.get();
      break;
    case Strategy::Facade:
      transport = device == DeviceClass::CLDC ? impl_->facade_cldc.client.get() : impl_->facade_full.client.get();
      break;
  }
  return to_record(transport->round_trip(encode_envelope(env)));
}

uint64_t StrategyHarness::total_hops() const {
  uint64_t total = 0;
  for (auto* t : impl_->transports()) total += t->hops();
  return total;
}

void StrategyHarness::reset_hops() {
  for (auto* t : impl_->transports()) t->reset_hops();
}

Record oracle_payload(const DeviceAwareOperation& op, const FieldList& row, DeviceClass device) {
  auto lookup = [&row](const std::string& name) -> std::string {
    for (const auto& [k, v] : row)
      if (k == name) return v;
    throw std::invalid_argument("fixture row lacks '" + name + "'");
  };
  Record out;
  if (device == DeviceClass::CLDC) {
    out.schema = op.schema.base_name;
    for (const auto& name : op.schema.base_fields) out.values.emplace_back(name, lookup(name));
  } else {
    out.schema = op.schema.name;
    for (const auto& field : op.schema.fields) out.values.emplace_back(field.first, lookup(field.first));
  }
  return out;
}

std::vector<EquivalenceMismatch> check_equivalence(StrategyHarness& harness, const FixtureTable& fixtures,
                                                   const std::vector<DeviceClass>& devices) {
  std::vector<EquivalenceMismatch> mismatches;
  for (const auto& op : harness.operations()) {
    const std::string& key = op.spec.input_params.front().first;
    for (const auto& row : fixtures.rows) {
      std::string key_value;
      for (const auto& [k, v] : row)
        if (k == key) key_value = v;
      FieldList args{{key, key_value}};
      for (auto device : devices) {
        Record expected = oracle_payload(op, row, device);
        for (auto s : kAllStrategies) {
          try {
            Record got = harness.invoke_via(s, device, op.spec.operation, args);
            if (got.values != expected.values)
              mismatches.push_back({s, device, key_value, "fields differ from oracle"});
          } catch (const std::exception& e) {
            mismatches.push_back({s, device, key_value, e.what()});
          }
        }
      }
    }
  }
  return mismatches;
}

void BenchConfig::check() const {
  if (invocation_counts.empty()) throw std::invalid_argument("bench: invocation_counts must not be empty");
  for (auto c : invocation_counts)
    if (c == 0) throw std::invalid_argument("bench: invocation counts must be positive");
  if (repetitions < 5) throw std::invalid_argument("bench: repetitions must be at least 5");
  if (!(device_mix >= 0.0 && device_mix <= 1.0)) throw std::invalid_argument("bench: device_mix must be in [0, 1]");
}

namespace {

using ojson = nlohmann::ordered_json;

ojson config_to_json(const BenchConfig& cfg) {
  return ojson{{"invocation_counts", cfg.invocation_counts},
               {"repetitions", cfg.repetitions},
               {"device_mix", cfg.device_mix},
               {"transport", to_string(cfg.transport)},
               {"warmup_invocations", cfg.warmup_invocations},
               {"seed", cfg.seed}};
}

BenchConfig config_from_json(const ojson& j) {
  BenchConfig cfg;
  if (!j.is_object()) throw std::invalid_argument("bench config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key == "invocation_counts") cfg.invocation_counts = value.get<std::vector<uint64_t>>();
    else if (key == "repetitions") cfg.repetitions = value.get<int>();
    else if (key == "device_mix") cfg.device_mix = value.get<double>();
    else if (key == "warmup_invocations") cfg.warmup_invocations = value.get<uint64_t>();
    else if (key == "seed") cfg.seed = value.get<uint64_t>();
    else if (key == "transport") {
      auto t = value.get<std::string>();
      if (t == "inproc") cfg.transport = TransportKind::InProc;
      else if (t == "tcp") cfg.transport = TransportKind::Tcp;
      else throw std::invalid_argument("bench: unknown transport '" + t + "'");
    } else {
      throw std::invalid_argument("bench: unknown config key '" + key + "'");
    }
  }
  return cfg;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

BenchConfig parse_bench_config(std::string_view json_text) {
  try {
    BenchConfig cfg = config_from_json(ojson::parse(json_text));
    cfg.check();
    return cfg;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("bench config: ") + e.what());
  }
}

std::vector<BenchSummary> BenchReport::summarize() const {
  std::vector<std::pair<Strategy, uint64_t>> keys;
  for (const auto& s : samples)
    if (std::find(keys.begin(), keys.end(), std::make_pair(s.strategy, s.count)) == keys.end())
      keys.emplace_back(s.strategy, s.count);
  std::vector<BenchSummary> out;
  for (const auto& [strategy, count] : keys) {
    std::vector<double> per_call;
    double total = 0;
    for (const auto& s : samples) {
      if (s.strategy != strategy || s.count != count) continue;
      per_call.push_back(static_cast<double>(s.total_ns) / static_cast<double>(s.count));
      total += static_cast<double>(s.total_ns);
    }
    double n = static_cast<double>(per_call.size());
    double mean = 0;
    for (double v : per_call) mean += v;
    mean /= n;
    double var = 0;
    for (double v : per_call) var += (v - mean) * (v - mean);
    double stddev = per_call.size() > 1 ? std::sqrt(var / (n - 1)) : 0.0;
    out.push_back({strategy, count, static_cast<int>(per_call.size()), total / n, mean, stddev});
  }
  return out;
}

std::optional<BenchSummary> BenchReport::summary(Strategy s, uint64_t count) const {
  for (const auto& row : summarize())
    if (row.strategy == s && row.count == count) return row;
  return std::nullopt;
}

BenchReport run_bench(const BenchConfig& cfg, const std::vector<DeviceAwareOperation>& ops,
                      const FixtureTable& fixtures) {
  cfg.check();
  if (ops.empty() || fixtures.rows.empty()) throw std::invalid_argument("bench: no operations or fixtures");

  struct Invocation {
    DeviceClass device;
    const std::string* operation;
    FieldList args;
  };

  std::mt19937_64 rng(cfg.seed);
  std::bernoulli_distribution is_cldc(cfg.device_mix);
  std::uniform_int_distribution<size_t> pick_row(0, fixtures.rows.size() - 1);
  uint64_t longest = std::max(cfg.warmup_invocations,
                              *std::max_element(cfg.invocation_counts.begin(), cfg.invocation_counts.end()));
  std::vector<Invocation> workload;
  workload.reserve(longest);
  for (uint64_t i = 0; i < longest; ++i) {
    const auto& op = ops[i % ops.size()];
    const std::string& key = op.spec.input_params.front().first;
    const auto& row = fixtures.rows[pick_row(rng)];
    std::string value;
    for (const auto& [k, v] : row)
      if (k == key) value = v;
    workload.push_back({is_cldc(rng) ? DeviceClass::CLDC : DeviceClass::UNSPECIFIED, &op.spec.operation,
                        FieldList{{key, value}}});
  }

  BenchReport report;
  report.config = cfg;
  try {
    StrategyHarness harness(ops, cfg.transport);
    size_t sink = 0;
    auto run = [&](Strategy s, uint64_t n) {
      for (uint64_t i = 0; i < n; ++i) {
        const auto& inv = workload[i];
        sink += harness.invoke_via(s, inv.device, *inv.operation, inv.args).values.size();
      }
    };
    for (uint64_t count : cfg.invocation_counts) {
      for (auto s : kAllStrategies) run(s, cfg.warmup_invocations);
      // Repetitions are interleaved across strategies so slow drift in machine
      // state affects every strategy alike.
      for (int rep = 0; rep < cfg.repetitions; ++rep) {
        for (auto s : kAllStrategies) {
          auto start = std::chrono::steady_clock::now();
          run(s, count);
          auto elapsed = std::chrono::steady_clock::now() - start;
          report.samples.push_back(
              {s, count, rep, static_cast<uint64_t>(std::chrono::duration_cast<std::chrono::nanoseconds>(elapsed).count())});
        }
      }
    }
    if (sink == 0) report.error = "bench produced no payload";
  } catch (const std::exception& e) {
    report.partial = true;
    report.error = e.what();
  }
  return report;
}

std::vector<TimingCheck> check_timing(const BenchReport& report, uint64_t min_count, double tolerance) {
  std::vector<TimingCheck> out;
  for (uint64_t count : report.config.invocation_counts) {
    if (count < min_count) continue;
    auto facade = report.summary(Strategy::Facade, count);
    auto header = report.summary(Strategy::SoapHeader, count);
    auto mp = report.summary(Strategy::MultiParameter, count);
    if (!facade || !header || !mp) continue;
    double f = facade->mean_ns_per_invocation;
    double h = header->mean_ns_per_invocation;
    double m = mp->mean_ns_per_invocation;
    out.push_back({count, f, h, m, f > h, std::abs(h - m) <= tolerance * std::min(h, m)});
  }
  return out;
}

std::string report_to_json(const BenchReport& report) {
  ojson results = ojson::array();
  for (const auto& s : report.samples)
    results.push_back(ojson{{"strategy", to_string(s.strategy)},
                            {"count", s.count},
                            {"repetition", s.repetition},
                            {"total_ns", s.total_ns}});
  ojson doc{{"config", config_to_json(report.config)}, {"results", std::move(results)}};
  if (report.partial) {
    doc["partial"] = true;
    doc["error"] = report.error;
  }
  return doc.dump(2) + "\n";
}

BenchReport report_from_json(std::string_view text) {
  try {
    ojson doc = ojson::parse(text);
    BenchReport report;
    report.config = config_from_json(doc.at("config"));
    for (const auto& r : doc.at("results")) {
      auto strategy = strategy_from_string(r.at("strategy").get<std::string>());
      if (!strategy) throw std::invalid_argument("report: unknown strategy " + r.at("strategy").dump());
      report.samples.push_back({*strategy, r.at("count").get<uint64_t>(), r.at("repetition").get<int>(),
                                r.at("total_ns").get<uint64_t>()});
    }
    report.partial = doc.value("partial", false);
    report.error = doc.value("error", std::string());
    return report;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("report: ") + e.what());
  }
}

std::filesystem::path export_report(const BenchReport& report, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << report_to_json(report);
    if (!out) throw std::runtime_error("cannot write " + path.string());
  }
  auto csv_path = path;
  csv_path.replace_extension(".csv");
  std::ofstream csv(csv_path, std::ios::binary | std::ios::trunc);
  csv << "strategy,count,repetition,total_ns\n";
  for (const auto& s : report.samples)
    csv << to_string(s.strategy) << ',' << s.count << ',' << s.repetition << ',' << s.total_ns << '\n';
  if (!csv) throw std::runtime_error("cannot write " + csv_path.string());
  return csv_path;
}

BenchReport load_report(const std::filesystem::path& path) { return report_from_json(read_file(path)); }

}  // namespace devaware
