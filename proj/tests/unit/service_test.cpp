#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "polyvm/service/protocol.hpp"
#include "polyvm/service/server.hpp"
#include "polyvm/service/wire.hpp"
#include "polyvm/vm/vm.hpp"
#include "support/golden.hpp"
#include "support/ws_client.hpp"

using namespace polyvm;
using service::json;

TEST_CASE("golden transcripts cover every op and still match") {
    auto report = testing::golden::run_directory(POLYVM_GOLDEN_DIR);
    CHECK(report.mismatches.empty());
    for (const auto& m : report.mismatches) FAIL_CHECK(m.file << ":" << m.line << " " << m.what);
    std::set<std::string> ops(report.ops.begin(), report.ops.end());
    for (const char* op : {"hello", "eval", "inspect", "inspect_eval", "processes", "interrupt", "stack", "frame",
                           "eval_in_frame", "restart_frame", "proceed", "step_over", "set_budget", "highlight",
                           "pipeline"}) {
        CHECK_MESSAGE(ops.contains(op), op);
    }
}

TEST_CASE("golden matching honours wildcards and exact shapes") {
    using testing::golden::matches;
    CHECK(matches(json::parse(R"({"a": "<any>", "b": [1, 2]})"), json::parse(R"({"a": {"x": 1}, "b": [1, 2]})")));
    CHECK_FALSE(matches(json::parse(R"({"a": 1})"), json::parse(R"({"a": 1, "extra": 2})")));
    CHECK_FALSE(matches(json::parse(R"([1, 2])"), json::parse(R"([1, 2, 3])")));
    CHECK(matches(json(std::uint64_t{3}), json(std::int64_t{3})));
}

TEST_CASE("values survive the wire encoding") {
    vm::Vm machine;
    auto& rt = machine.runtime();
    const std::vector<Value> samples{
        Value::nil(),
        Value::boolean(true),
        Value::integer(-42),
        Value::integer(BigInt("123456789012345678901234567890")),
        Value::integer((std::int64_t{1} << 53)),
        Value::real(2.5),
        Value::real(std::numeric_limits<double>::infinity()),
        Value::text("tab\tand ünïcode"),
        Value::list({Value::integer(1), Value::list({Value::text("x")})}),
    };
    for (const auto& v : samples) {
        CAPTURE(v.kind());
        CHECK(service::decode_value(rt, service::encode_value(rt, v)) == v);
    }
    auto nan = service::decode_value(rt, service::encode_value(rt, Value::real(std::nan(""))));
    CHECK(std::isnan(nan.as_float()));
    CHECK(service::encode_value(rt, Value::integer((std::int64_t{1} << 53))) == json{{"int", "9007199254740992"}});
    CHECK(service::encode_value(rt, Value::integer((std::int64_t{1} << 53) - 1)).is_number());

    CHECK_THROWS_AS(service::decode_value(rt, json{{"ref", {{"lang", "minipy"}, {"handle", 123456}}}}), StaleHandle);
    CHECK_THROWS_AS(service::decode_value(rt, json{{"ref", {{"lang", "cobol"}, {"handle", 1}}}}), UnknownLanguage);
    CHECK_THROWS_AS(service::decode_value(rt, json{{"weird", 1}}), service::BadParams);
}

TEST_CASE("every request gets exactly one reply with its id") {
    vm::Vm machine;
    std::vector<json> pushes;
    service::Protocol protocol(machine, [&](const json& e) { pushes.push_back(e); });
    for (int id = 1; id <= 20; ++id) {
        json request{{"id", id}, {"op", id % 3 == 0 ? "nonsense" : "hello"}};
        auto reply = protocol.handle(request);
        CHECK(reply["id"] == id);
        CHECK(reply.contains("result") != reply.contains("error"));
    }
    CHECK(pushes.empty());
}

TEST_CASE("pushes for one process keep the VM's order") {
    vm::Vm machine;
    std::vector<json> pushes;
    service::Protocol protocol(machine, [&](const json& e) { pushes.push_back(e); });
    protocol.handle(json{{"id", 1}, {"op", "eval"}, {"params", {{"language", "minipy"}, {"source", "1/0"}}}});
    machine.run_until_settled(1);
    auto reply = protocol.handle(json{{"id", 2}, {"op", "proceed"}, {"params", {{"session", 1}}}});
    INFO(reply.dump());
    REQUIRE(pushes.size() == 2);
    CHECK(pushes[0]["event"] == "trap");
    CHECK(pushes[1]["event"] == "completed");
    CHECK(pushes[1]["id"] == 0);
}

TEST_CASE("live server: static page, broadcast traps, several clients") {
    service::ServerOptions options;
    options.port = 0;
    service::Server server(options);
    server.start();
    const auto port = server.port();
    REQUIRE(port != 0);

    auto [status, body] = testing::http_get("127.0.0.1", port, "/");
    CHECK(status == 200);
    CHECK(body.find("polyvm") != std::string::npos);
    CHECK(testing::http_get("127.0.0.1", port, "/nope.js").first == 404);

    testing::WsClient a("127.0.0.1", port);
    testing::WsClient b("127.0.0.1", port);
    auto hello = a.call(json{{"id", 1}, {"op", "hello"}});
    REQUIRE(hello);
    CHECK((*hello)["result"]["version"] == "1");
    CHECK((*hello)["result"]["languages"].size() == 2);
    REQUIRE(b.call(json{{"id", 1}, {"op", "hello"}}));
    CHECK(server.client_count() == 2);

    auto reply = a.call(json{{"id", 2},
                             {"op", "eval"},
                             {"params", {{"language", "minipy"}, {"source", "while True:\n    pass\n"}}}});
    REQUIRE(reply);
    const auto pid = (*reply)["result"]["pid"];
    REQUIRE(b.call(json{{"id", 3}, {"op", "interrupt"}, {"params", {{"pid", pid}}}}));
    auto is_trap = [](const json& m) { return m.value("event", "") == "trap"; };
    auto trap_a = a.wait_for(is_trap);
    auto trap_b = b.wait_for(is_trap);
    REQUIRE(trap_a);
    REQUIRE(trap_b);
    CHECK(*trap_a == *trap_b);
    CHECK((*trap_a)["session"]["title"] == "User Interrupt");

    a.send_text("{oops");
    auto bad = a.wait_for([](const json& m) { return m.contains("error") && m["id"] == 0; });
    REQUIRE(bad);
    CHECK((*bad)["error"]["code"] == "bad_params");
    // the parser's message may split a multi-byte character
    a.send_text("\xc3\xa9\xc3\xa8 nope");
    REQUIRE(a.wait_for([](const json& m) { return m.contains("error") && m["id"] == 0; }));
    REQUIRE(a.call(json{{"id", 4}, {"op", "hello"}}));

    SUBCASE("port already taken") {
        service::ServerOptions same;
        same.port = port;
        service::Server second(same);
        CHECK_THROWS_AS(second.start(), service::PortInUse);
    }
    server.stop();
}

TEST_CASE("live server serves a configured static directory") {
    const auto dir = std::filesystem::temp_directory_path() / "polyvm_static_test";
    std::filesystem::create_directories(dir);
    std::ofstream(dir / "index.html") << "<p>custom ui</p>";
    std::ofstream(dir / "app.js") << "console.log(1)";
    service::ServerOptions options;
    options.port = 0;
    options.static_dir = dir.string();
    service::Server server(options);
    server.start();
    CHECK(testing::http_get("127.0.0.1", server.port(), "/").second == "<p>custom ui</p>");
    CHECK(testing::http_get("127.0.0.1", server.port(), "/app.js").second == "console.log(1)");
    CHECK(testing::http_get("127.0.0.1", server.port(), "/../etc/passwd").first == 404);
    server.stop();
    std::filesystem::remove_all(dir);
}
