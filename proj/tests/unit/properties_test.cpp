#include <doctest.h>

#include <random>

#include "polyvm/vm/vm.hpp"
#include "support/conversion_props.hpp"

using namespace polyvm;
using vm::State;

namespace {

void expect_ok(const testing::props::Report& r) {
    CHECK(r.checked > 0);
    for (const auto& f : r.failures) FAIL_CHECK(f);
}

}  // namespace

TEST_CASE("conversion round trip for plain values") {
    vm::Vm machine;
    expect_ok(testing::props::round_trip(machine, 1, 300));
}

TEST_CASE("references are never wrapped twice and unwrap at home") {
    vm::Vm machine;
    expect_ok(testing::props::wrapping(machine, 2, 200));
}

TEST_CASE("with auto conversion off everything crosses as a reference") {
    vm::Vm machine;
    expect_ok(testing::props::opt_out(machine, 3, 200));
}

TEST_CASE("deep list conversion can be switched off") {
    vm::Vm machine;
    auto& rt = machine.runtime();
    const auto py = rt.language("minipy");
    const auto rb = rt.language("minirb");
    ConversionPolicy shallow;
    shallow.deep_lists = false;
    const auto list = Value::list({Value::integer(1), Value::text("a")});
    auto crossed = rt.convert(list, py, rb, shallow);
    CHECK(crossed.is_foreign());
    CHECK(rt.convert(crossed, rb, py, shallow) == list);
    CHECK(rt.convert(list, py, rb) == list);
}

TEST_CASE("results do not depend on the quantum") {
    const char* programs[][2] = {
        {"minipy", "def fib(n):\n    if n < 2:\n        return n\n    return fib(n - 1) + fib(n - 2)\nfib(15)\n"},
        {"minirb", "s = ''\ni = 0\nwhile i < 50\n  s = s + i.to_s\n  i += 1\nend\ns.length\n"},
        {"minipy", "out = []\nfor i in range(30):\n    try:\n        out.append(10 % (i % 4))\n    except ZeroDivisionError:\n        out.append(-1)\nout\n"},
        {"minirb", "def f(n)\n  if n <= 1\n    return 1\n  end\n  n * f(n - 1)\nend\nf(25)\n"},
        {"minipy", "xeval(\"minirb\", \"t = 0\\nfor x in it\\n  t += x\\nend\\nt\", range(100))\n"},
    };
    for (const auto& [lang, src] : programs) {
        const std::string source = src;
        CAPTURE(source);
        std::optional<Value> first;
        std::optional<std::string> first_out;
        for (std::int64_t q : {1, 3, 7, 64, 10'000}) {
            vm::Vm machine(q);
            auto pid = machine.spawn(lang, src);
            std::optional<vm::Pid> noise;
            if (q == 7) noise = machine.spawn("minipy", "i = 0\nwhile i < 300:\n    i = i + 1\n");
            REQUIRE(machine.run_until_settled(pid) == State::Terminated);
            const auto& r = *machine.process(pid).result;
            if (r.failed()) FAIL_CHECK(r.exception->title());
            if (!first) {
                first = r.value;
                first_out = machine.process(pid).transcript;
            }
            CHECK(r.value == *first);
            CHECK(machine.process(pid).transcript == *first_out);
        }
    }
}

TEST_CASE("round robin gives every runnable process the same number of quanta") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 10; ++trial) {
        const int procs = 2 + static_cast<int>(rng() % 5);
        const int rounds = 1 + static_cast<int>(rng() % 20);
        vm::Vm machine(1 + static_cast<std::int64_t>(rng() % 50));
        std::vector<vm::Pid> pids;
        for (int i = 0; i < procs; ++i) {
            pids.push_back(machine.spawn(i % 2 ? "minirb" : "minipy", i % 2 ? "while true\nend\n" : "while True:\n    pass\n"));
        }
        for (int t = 0; t < procs * rounds; ++t) machine.tick();
        for (auto pid : pids) CHECK(machine.process(pid).quanta == static_cast<std::uint64_t>(rounds));
    }
}
