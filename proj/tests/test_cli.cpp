#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <fstream>
#include <future>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "devaware/cli.hpp"
#include "devaware/client_prefs.hpp"
#include "devaware/envelope.hpp"
#include "devaware/transport.hpp"
#include "support/test_support.hpp"

using namespace devaware;
using namespace devaware::cli;
using testsupport::fixture;
using testsupport::golden;
using testsupport::slurp;
using testsupport::TempDir;

namespace {

std::filesystem::path data(const std::string& name) { return testsupport::source_dir() / "tests" / "data" / name; }

int count_lines(const std::string& s) { return static_cast<int>(std::count(s.begin(), s.end(), '\n')); }

// Runs transform then generate for the case study into `dir`.
void build_bookstore(const TempDir& dir) {
  std::ostringstream out, err;
  REQUIRE(cmd_transform(fixture("bookstore.dam"), dir.path(), out, err) == kExitOk);
  REQUIRE(cmd_generate(dir / "bookstore.psm.dam", dir / "icm", out, err) == kExitOk);
}

SimulateOptions bookstore_options(const TempDir& dir) {
  SimulateOptions opts;
  opts.psm = dir / "bookstore.psm.dam";
  opts.icm_dir = dir / "icm";
  opts.fixtures = fixture("bookstore.json");
  return opts;
}

// A TCP service running in the background for the lifetime of the object.
class RunningService {
 public:
  explicit RunningService(const SimulateOptions& base) : opts_(base) {
    opts_.tcp = "127.0.0.1:0";
    std::promise<uint16_t> bound;
    auto ready = bound.get_future();
    worker_ = std::thread([this, p = std::move(bound)]() mutable {
      std::istringstream none;
      exit_code_ = cmd_simulate(opts_, none, out_, err_, &stop_, [&p](uint16_t port) { p.set_value(port); });
    });
    REQUIRE(ready.wait_for(std::chrono::seconds(5)) == std::future_status::ready);
    port_ = ready.get();
  }
  ~RunningService() { shutdown(); }

  int shutdown() {
    if (worker_.joinable()) {
      stop_ = true;
      worker_.join();
    }
    return exit_code_;
  }
  std::string addr() const { return "127.0.0.1:" + std::to_string(port_); }
  std::string log() const { return err_.str(); }

 private:
  SimulateOptions opts_;
  std::atomic<bool> stop_{false};
  std::ostringstream out_, err_;
  std::thread worker_;
  uint16_t port_ = 0;
  int exit_code_ = -1;
};

int run_cli(const std::string& args) {
  int status = std::system((std::string(DEVAWARE_CLI) + " " + args + " >/dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("transform writes the PSM and schema descriptors") {
  TempDir dir("transform");
  std::ostringstream out, err;
  CHECK(cmd_transform(fixture("simple_service.dam"), dir.path(), out, err) == kExitOk);
  CHECK(slurp(dir / "simple_service.psm.dam") == slurp(golden("simple_service.psm.dam")));
  CHECK(slurp(dir / "Info_Extended.schema") == slurp(golden("Info_Extended.schema")));
  CHECK(out.str() == (dir / "simple_service.psm.dam").string() + "\n" + (dir / "Info_Extended.schema").string() + "\n");
}

TEST_CASE("transform exit codes") {
  TempDir dir("transform_err");
  std::ostringstream out, err;
  CHECK(cmd_transform(data("invalid.dam"), dir.path(), out, err) == kExitInvalid);
  CHECK(err.str().find("[ws4md-without-cldc]") != std::string::npos);
  CHECK_FALSE(std::filesystem::exists(dir / "invalid.psm.dam"));

  std::ostringstream err2;
  CHECK(cmd_transform(dir / "missing.dam", dir.path(), out, err2) == kExitIo);

  std::ofstream(dir / "garbage.dam") << "model\n  nonsense here\n";
  std::ostringstream err3;
  CHECK(cmd_transform(dir / "garbage.dam", dir.path(), out, err3) == kExitInvalid);
  CHECK(err3.str().find("garbage.dam:") != std::string::npos);

  // Output directory blocked by a regular file.
  std::ofstream(dir / "blocker") << "x";
  std::ostringstream err4;
  CHECK(cmd_transform(fixture("simple_service.dam"), dir / "blocker", out, err4) == kExitIo);
}

TEST_CASE("generate writes one manifest per device-aware operation") {
  TempDir dir("generate");
  std::ostringstream out, err;
  REQUIRE(cmd_transform(fixture("simple_service.dam"), dir.path(), out, err) == kExitOk);
  std::ostringstream gout;
  CHECK(cmd_generate(dir / "simple_service.psm.dam", dir / "icm", gout, err) == kExitOk);
  CHECK(count_lines(gout.str()) == 1);
  CHECK(slurp(dir / "icm" / "simple" / "Aspect_simple_Class1_Operation1.icm") ==
        slurp(golden("Aspect_simple_Class1_Operation1.icm")));
}

TEST_CASE("generate without device-aware operations is a notice") {
  TempDir dir("generate_none");
  std::ostringstream out, err;
  REQUIRE(cmd_transform(data("no_ws4md.dam"), dir.path(), out, err) == kExitOk);
  std::ostringstream gout, gerr;
  CHECK(cmd_generate(dir / "no_ws4md.psm.dam", dir / "icm", gout, gerr) == kExitOk);
  CHECK(gout.str().empty());
  CHECK(gerr.str().find("notice:") != std::string::npos);
  CHECK_FALSE(std::filesystem::exists(dir / "icm"));

  std::ofstream(dir / "bad.dam") << "not a model\n";
  CHECK(cmd_generate(dir / "bad.dam", dir / "icm", gout, gerr) == kExitInvalid);
  CHECK(cmd_generate(dir / "nothing.dam", dir / "icm", gout, gerr) == kExitIo);
}

TEST_CASE("simulate in line mode answers by device") {
  TempDir dir("sim_lines");
  build_bookstore(dir);
  std::string cldc = encode_envelope(build_invocation(DeviceClass::CLDC, "getBookInfo", {{"ISBN", "123"}}));
  std::string plain = encode_envelope(build_invocation(DeviceClass::UNSPECIFIED, "getBookInfo", {{"ISBN", "123"}}));
  std::istringstream in(cldc + "\n\n" + plain + "\n");
  std::ostringstream out, err;
  CHECK(cmd_simulate(bookstore_options(dir), in, out, err) == kExitOk);

  std::istringstream lines(out.str());
  std::string first, second;
  std::getline(lines, first);
  std::getline(lines, second);
  auto r1 = std::get<Response>(decode_envelope(first).body);
  auto r2 = std::get<Response>(decode_envelope(second).body);
  CHECK(r1.schema_name == "BookInfo_Base");
  CHECK(r1.fields.size() == 5);
  CHECK(r2.schema_name == "BookInfo_Extended");
  CHECK(r2.fields.size() == 8);
  CHECK(err.str() == "getBookInfo CLDC -> BookInfo_Base\ngetBookInfo UNSPECIFIED -> BookInfo_Extended\n");
}

TEST_CASE("simulate rejects inconsistent artifacts") {
  TempDir dir("sim_bad");
  build_bookstore(dir);
  std::istringstream in;
  std::ostringstream out, err;

  auto opts = bookstore_options(dir);
  opts.fixtures = dir / "missing.json";
  CHECK(cmd_simulate(opts, in, out, err) == kExitIo);

  // A manifest from a different model.
  TempDir other("sim_other");
  std::ostringstream o2;
  REQUIRE(cmd_transform(fixture("simple_service.dam"), other.path(), o2, err) == kExitOk);
  REQUIRE(cmd_generate(other / "simple_service.psm.dam", dir / "icm", o2, err) == kExitOk);
  CHECK(cmd_simulate(bookstore_options(dir), in, out, err) == kExitInvalid);
}

TEST_CASE("simulate over TCP with invoke as the client") {
  TempDir dir("sim_tcp");
  build_bookstore(dir);
  RunningService svc(bookstore_options(dir));

  InvokeOptions inv;
  inv.addr = svc.addr();
  inv.op = "getBookInfo";
  inv.args = {"ISBN=123"};
  inv.device = "cldc";
  std::ostringstream out, err;
  CHECK(cmd_invoke(inv, out, err) == kExitOk);
  CHECK(out.str() ==
        "# BookInfo_Base\nISBN=123\ntitle=Web Services Essentials\nauthor=E. Cerami\npublisher=O'Reilly\nprice=29.95\n");

  inv.device.reset();
  std::ostringstream full;
  CHECK(cmd_invoke(inv, full, err) == kExitOk);
  CHECK(full.str().rfind("# BookInfo_Extended\n", 0) == 0);
  CHECK(count_lines(full.str()) == 9);

  inv.device = "cdc";
  std::ostringstream cdc;
  CHECK(cmd_invoke(inv, cdc, err) == kExitOk);
  CHECK(cdc.str() == full.str());

  SUBCASE("render plan appended when a profile is given") {
    InvokeOptions r = inv;
    r.device = "CLDC";
    r.profile = fixture("profiles/small.json");
    r.prefs = fixture("prefs/red_large.xml");
    std::ostringstream o;
    REQUIRE(cmd_invoke(r, o, err) == kExitOk);
    auto json_start = o.str().find('{');
    REQUIRE(json_start != std::string::npos);
    auto plan = nlohmann::json::parse(o.str().substr(json_start));
    CHECK(plan["font_size_label"] == "SIZE_SMALL");
    CHECK(plan["foreground"] == nlohmann::json::array({255, 0, 0}));
  }

  SUBCASE("error responses and bad arguments") {
    InvokeOptions r = inv;
    r.args = {"ISBN=unknown"};
    std::ostringstream o, e;
    CHECK(cmd_invoke(r, o, e) == kExitInvalid);
    CHECK(e.str().find("error response") != std::string::npos);
    r.args = {"novalue"};
    CHECK(cmd_invoke(r, o, e) == kExitInvalid);
    r = inv;
    r.device = "phone";
    CHECK(cmd_invoke(r, o, e) == kExitInvalid);
    r = inv;
    r.op = "nosuchop";
    CHECK(cmd_invoke(r, o, e) == kExitInvalid);
    r = inv;
    r.prefs = fixture("prefs/default.xml");
    CHECK(cmd_invoke(r, o, e) == kExitInvalid);
  }

  CHECK(svc.shutdown() == kExitOk);
  CHECK(svc.log().find("listening on 127.0.0.1:") == 0);
  CHECK(svc.log().find("getBookInfo CLDC -> BookInfo_Base\n") != std::string::npos);
}

TEST_CASE("transport failures exit with the I/O code") {
  TempDir dir("sim_port");
  build_bookstore(dir);
  RunningService svc(bookstore_options(dir));

  auto opts = bookstore_options(dir);
  opts.tcp = svc.addr();
  std::istringstream in;
  std::ostringstream out, err;
  std::atomic<bool> stop{true};
  CHECK(cmd_simulate(opts, in, out, err, &stop) == kExitIo);
  svc.shutdown();

  InvokeOptions inv;
  inv.addr = svc.addr();
  inv.op = "getBookInfo";
  CHECK(cmd_invoke(inv, out, err) == kExitIo);
  inv.addr = "no-port";
  CHECK(cmd_invoke(inv, out, err) == kExitIo);
}

TEST_CASE("render matches the golden plan") {
  std::ostringstream out, err;
  CHECK(cmd_render(fixture("responses/book123_cldc.xml"), fixture("profiles/large.json"), std::nullopt, out, err) ==
        kExitOk);
  CHECK(out.str() == slurp(golden("render_book123_large_default.json")));
  std::ostringstream o2;
  CHECK(cmd_render(fixture("responses/book123_cldc.xml"), fixture("profiles/large.json"),
                   fixture("prefs/spanish_flag.xml"), o2, err) == kExitOk);
  CHECK(cmd_render(fixture("missing.xml"), fixture("profiles/large.json"), std::nullopt, o2, err) == kExitIo);
  CHECK(cmd_render(fixture("profiles/large.json"), fixture("profiles/large.json"), std::nullopt, o2, err) ==
        kExitInvalid);
}

TEST_CASE("bench with a small configuration") {
  TempDir dir("bench");
  std::ostringstream out, err;
  CHECK(cmd_bench(data("bench_small.json"), dir / "report.json", out, err) == kExitOk);
  CHECK(out.str().find("Payload equivalence: PASS") != std::string::npos);
  CHECK(std::filesystem::exists(dir / "report.json"));
  CHECK(std::filesystem::exists(dir / "report.csv"));
  auto doc = nlohmann::json::parse(slurp(dir / "report.json"));
  CHECK(doc["results"].size() == 4 * 2 * 5);

  std::ofstream(dir / "bad.json") << R"({"repetitions": 2})";
  CHECK(cmd_bench(dir / "bad.json", dir / "r2.json", out, err) == kExitInvalid);
  CHECK(cmd_bench(dir / "absent.json", dir / "r2.json", out, err) == kExitIo);
}

TEST_CASE("executable exit codes") {
  TempDir dir("exe");
  const std::string out = " --out " + dir.path().string();
  CHECK(run_cli("--help") == kExitOk);
  CHECK(run_cli("") == kExitIo);
  CHECK(run_cli("transform --model " + fixture("simple_service.dam").string() + out) == kExitOk);
  CHECK(slurp(dir / "simple_service.psm.dam") == slurp(golden("simple_service.psm.dam")));
  CHECK(run_cli("transform --model " + data("invalid.dam").string() + out) == kExitInvalid);
  CHECK(run_cli("transform --model " + (dir / "nope.dam").string() + out) == kExitIo);
  CHECK(run_cli("generate --psm " + (dir / "simple_service.psm.dam").string() + out) == kExitOk);
  CHECK(std::filesystem::exists(dir / "simple" / "Aspect_simple_Class1_Operation1.icm"));
  CHECK(run_cli("render --response " + fixture("responses/book123_cldc.xml").string() + " --profile " +
                fixture("profiles/small.json").string()) == kExitOk);
}
