#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cstring>
#include <thread>

#include "devaware/envelope.hpp"
#include "devaware/transport.hpp"
#include "devaware/xml.hpp"
#include "support/test_support.hpp"

using namespace devaware;

namespace {

const std::string kCldcCall =
    "<soap:Envelope><soap:Header><IDENTIFICATION><DEVICE>CLDC</DEVICE></IDENTIFICATION></soap:Header>"
    "<soap:Body><call op=\"getBookInfo\"><arg name=\"ISBN\">123</arg></call></soap:Body></soap:Envelope>";

const std::string kPlainCall =
    "<soap:Envelope><soap:Body><call op=\"getBookInfo\"><arg name=\"ISBN\">123</arg></call></soap:Body></soap:Envelope>";

DecodeError::Code decode_code(const std::string& doc) {
  try {
    decode_envelope(doc);
  } catch (const DecodeError& e) {
    return e.code();
  }
  FAIL("expected DecodeError for " << doc);
  return DecodeError::Code::Malformed;
}

}  // namespace

TEST_CASE("canonical call document, with and without header") {
  Envelope env{DeviceHeader{DeviceClass::CLDC}, Call{"getBookInfo", {{"ISBN", "123"}}}};
  CHECK(encode_envelope(env) == kCldcCall);
  env.header.reset();
  CHECK(encode_envelope(env) == kPlainCall);
}

TEST_CASE("decode and extract_device") {
  Envelope cldc = decode_envelope(kCldcCall);
  REQUIRE(cldc.header);
  CHECK(cldc.header->device == DeviceClass::CLDC);
  CHECK(extract_device(cldc) == DeviceClass::CLDC);
  CHECK(std::get<Call>(cldc.body) == Call{"getBookInfo", {{"ISBN", "123"}}});

  Envelope plain = decode_envelope(kPlainCall);
  CHECK_FALSE(plain.header);
  CHECK(extract_device(plain) == DeviceClass::UNSPECIFIED);
  CHECK(plain.body == cldc.body);

  std::string cdc = kCldcCall;
  cdc.replace(cdc.find("CLDC"), 4, "CDC");
  CHECK(extract_device(decode_envelope(cdc)) == DeviceClass::CDC);
}

TEST_CASE("decode tolerates insignificant whitespace and a prolog") {
  std::string doc = "<?xml version=\"1.0\"?>\n<soap:Envelope>\n  <soap:Header>\n    <IDENTIFICATION>\n"
                    "      <DEVICE> CLDC </DEVICE>\n    </IDENTIFICATION>\n  </soap:Header>\n  <soap:Body>\n"
                    "    <call op=\"getBookInfo\">\n      <arg name=\"ISBN\">123</arg>\n    </call>\n  </soap:Body>\n"
                    "</soap:Envelope>\n";
  CHECK(decode_envelope(doc) == decode_envelope(kCldcCall));
  CHECK(encode_envelope(decode_envelope(doc)) == kCldcCall);
}

TEST_CASE("a header without IDENTIFICATION carries no device") {
  Envelope env = decode_envelope("<soap:Envelope><soap:Header><Other>x</Other></soap:Header><soap:Body>"
                                 "<call op=\"f\"/></soap:Body></soap:Envelope>");
  CHECK_FALSE(env.header);
  CHECK(extract_device(env) == DeviceClass::UNSPECIFIED);
}

TEST_CASE("response and error bodies") {
  Envelope resp{std::nullopt, Response{"BookInfo_Base", {{"title", "A & B <c>"}, {"price", "29.95"}}}};
  std::string text = encode_envelope(resp);
  CHECK(text ==
        "<soap:Envelope><soap:Body><response schema=\"BookInfo_Base\"><field name=\"title\">A &amp; B &lt;c&gt;</field>"
        "<field name=\"price\">29.95</field></response></soap:Body></soap:Envelope>");
  CHECK(decode_envelope(text) == resp);

  Envelope fault{std::nullopt, Fault{"unknown-operation", "no such op"}};
  CHECK(encode_envelope(fault) ==
        "<soap:Envelope><soap:Body><error code=\"unknown-operation\">no such op</error></soap:Body></soap:Envelope>");
  CHECK(decode_envelope(encode_envelope(fault)) == fault);
}

TEST_CASE("decode errors") {
  using C = DecodeError::Code;
  std::string phone = kCldcCall;
  phone.replace(phone.find("CLDC"), 4, "PHONE");
  CHECK(decode_code(phone) == C::UnknownDeviceTag);
  std::string unspecified = kCldcCall;
  unspecified.replace(unspecified.find("CLDC"), 4, "UNSPECIFIED");
  CHECK(decode_code(unspecified) == C::UnknownDeviceTag);
  CHECK(decode_code("<soap:Envelope><soap:Body><ping/></soap:Body></soap:Envelope>") == C::UnknownBodyElement);
  CHECK(decode_code("<soap:Envelope><soap:Body>") == C::Malformed);
  CHECK(decode_code("") == C::Malformed);
  CHECK(decode_code("<Envelope/>") == C::InvalidStructure);
  CHECK(decode_code("<soap:Envelope></soap:Envelope>") == C::InvalidStructure);
  CHECK(decode_code("<soap:Envelope><soap:Body></soap:Body></soap:Envelope>") == C::InvalidStructure);
  CHECK(decode_code("<soap:Envelope><soap:Body><call/></soap:Body></soap:Envelope>") == C::InvalidStructure);
  CHECK(decode_code("<soap:Envelope><soap:Body><call op=\"f\"><arg name=\"a\">1</arg><arg name=\"a\">2</arg></call>"
                    "</soap:Body></soap:Envelope>") == C::InvalidStructure);
  CHECK(decode_code("<soap:Envelope><soap:Body><call op=\"f\"><arg>1</arg></call></soap:Body></soap:Envelope>") ==
        C::InvalidStructure);
  CHECK(decode_code("<soap:Envelope><soap:Header><IDENTIFICATION/></soap:Header><soap:Body><call op=\"f\"/>"
                    "</soap:Body></soap:Envelope>") == C::InvalidStructure);

  try {
    decode_envelope("<soap:Envelope><soap:Body><call op=\"f\"></soap:Body></soap:Envelope>");
    FAIL("expected error");
  } catch (const DecodeError& e) {
    CHECK(e.offset() > 0);
  }
}

TEST_CASE("encode rejects invalid envelopes") {
  CHECK_THROWS_AS(encode_envelope(Envelope{DeviceHeader{DeviceClass::UNSPECIFIED}, Call{"f", {}}}), EncodeError);
  CHECK_THROWS_AS(encode_envelope(Envelope{std::nullopt, Call{"f", {{"a", "1"}, {"a", "2"}}}}), EncodeError);
}

TEST_CASE("xml parser details") {
  auto el = xml::parse("<!-- c --><a x='1' y=\"&lt;&#65;&#x42;\"><![CDATA[<raw>]]>&amp;<b/></a>");
  CHECK(el.name == "a");
  REQUIRE(el.attribute("x"));
  CHECK(*el.attribute("x") == "1");
  CHECK(*el.attribute("y") == "<AB");
  CHECK(el.attribute("z") == nullptr);
  CHECK(el.text == "<raw>&");
  REQUIRE(el.child("b"));
  CHECK_THROWS_AS(xml::parse("<a></b>"), xml::XmlError);
  CHECK_THROWS_AS(xml::parse("<a x='1' x='2'/>"), xml::XmlError);
  CHECK_THROWS_AS(xml::parse("<a>&bogus;</a>"), xml::XmlError);
  CHECK_THROWS_AS(xml::parse("<a/><b/>"), xml::XmlError);
  std::string deep;
  for (int i = 0; i < 200; ++i) deep += "<d>";
  CHECK_THROWS_AS(xml::parse(deep), xml::XmlError);
  CHECK(xml::escape_text("a<b>&\n") == "a&lt;b&gt;&amp;&#10;");
  CHECK(xml::escape_attribute("\"q\"") == "&quot;q&quot;");
}

TEST_CASE("round-trip law on random canonical envelopes") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 2000; ++i) {
    Envelope env = testsupport::random_envelope(rng);
    std::string text = encode_envelope(env);
    Envelope back = decode_envelope(text);
    REQUIRE_MESSAGE(back == env, text);
    CHECK(encode_envelope(back) == text);
  }
}

TEST_CASE("fuzz: decoding mutated documents yields an envelope or a DecodeError") {
  std::mt19937_64 rng(6);
  for (int i = 0; i < 3000; ++i) {
    std::string text = testsupport::mutate(rng, encode_envelope(testsupport::random_envelope(rng)));
    try {
      decode_envelope(text);
    } catch (const DecodeError&) {
    }
  }
}

TEST_CASE("framing and address parsing") {
  std::string frame = encode_frame("abc");
  REQUIRE(frame.size() == 7);
  CHECK(frame.substr(0, 4) == std::string("\0\0\0\3", 4));
  CHECK(frame.substr(4) == "abc");
  CHECK(encode_frame(std::string(300, 'x')).substr(0, 4) == std::string("\0\0\x01\x2c", 4));

  auto hp = parse_host_port("127.0.0.1:8080");
  CHECK(hp.host == "127.0.0.1");
  CHECK(hp.port == 8080);
  CHECK_THROWS_AS(parse_host_port("localhost"), TransportError);
  CHECK_THROWS_AS(parse_host_port("h:99999"), TransportError);
  CHECK_THROWS_AS(parse_host_port("h:abc"), TransportError);
  CHECK_THROWS_AS(parse_host_port(":80"), TransportError);
}

TEST_CASE("in-process transport counts hops") {
  InProcTransport t([](std::string_view req) { return "echo:" + std::string(req); });
  CHECK(t.round_trip("x") == "echo:x");
  CHECK(t.round_trip("y") == "echo:y");
  CHECK(t.hops() == 2);
  t.reset_hops();
  CHECK(t.hops() == 0);
}

TEST_CASE("tcp transport: concurrent clients, address in use, connect failure") {
  TcpServer server([](std::string_view req) { return std::string(req.rbegin(), req.rend()); }, "127.0.0.1", 0);
  REQUIRE(server.port() != 0);

  std::vector<std::thread> threads;
  std::atomic<int> bad{0};
  for (int c = 0; c < 8; ++c)
    threads.emplace_back([&, c] {
      TcpClientTransport client("127.0.0.1", server.port());
      for (int i = 0; i < 50; ++i) {
        std::string msg = "m" + std::to_string(c) + "-" + std::to_string(i) + std::string(i * 37, 'z');
        if (client.round_trip(msg) != std::string(msg.rbegin(), msg.rend())) ++bad;
      }
    });
  for (auto& t : threads) t.join();
  CHECK(bad == 0);

  // Empty payloads are legal frames.
  TcpClientTransport client("127.0.0.1", server.port());
  CHECK(client.round_trip("").empty());

  try {
    TcpServer clash([](std::string_view) { return std::string(); }, "127.0.0.1", server.port());
    FAIL("expected AddressInUse");
  } catch (const TransportError& e) {
    CHECK(e.kind() == TransportError::Kind::AddressInUse);
  }
  server.stop();
  try {
    TcpClientTransport dead("127.0.0.1", server.port());
    dead.round_trip("x");
    FAIL("expected ConnectFailed");
  } catch (const TransportError& e) {
    CHECK((e.kind() == TransportError::Kind::ConnectFailed || e.kind() == TransportError::Kind::Io));
  }
}

TEST_CASE("tcp server rejects an oversized frame header without crashing") {
  TcpServer server([](std::string_view) { return std::string("ok"); }, "127.0.0.1", 0);
  int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  REQUIRE(fd >= 0);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(server.port());
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  REQUIRE(::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) == 0);
  unsigned char hdr[4] = {0xff, 0xff, 0xff, 0xff};
  CHECK(::send(fd, hdr, 4, 0) == 4);
  char buf[8];
  // The server drops the connection: read returns 0 or an error, never data.
  CHECK(::recv(fd, buf, sizeof buf, 0) <= 0);
  ::close(fd);
  // Still serving others.
  TcpClientTransport client("127.0.0.1", server.port());
  CHECK(client.round_trip("x") == "ok");
}
