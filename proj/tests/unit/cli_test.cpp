#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "polyvm/cli/cli.hpp"
#include "support/scenarios.hpp"

using namespace polyvm;

namespace {

struct Outcome {
    int status;
    std::string out;
    std::string err;
};

Outcome invoke(std::vector<std::string> args) {
    args.insert(args.begin(), "polyvm");
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    std::ostringstream out, err;
    const int status = cli::main_entry(static_cast<int>(argv.size()), argv.data(), out, err);
    return {status, out.str(), err.str()};
}

struct TempFile {
    std::filesystem::path path;
    TempFile(const std::string& name, const std::string& content)
        : path(std::filesystem::temp_directory_path() / ("polyvm_cli_" + name)) {
        std::ofstream(path) << content;
    }
    ~TempFile() { std::filesystem::remove(path); }
    std::string str() const { return path.string(); }
};

}  // namespace

TEST_CASE("run prints the transcript and maps results to exit statuses") {
    cli::CliConfig config;
    std::ostringstream out, err;
    CHECK(cli::run_source("minipy", "3", config, out, err) == cli::kOk);
    CHECK(out.str().empty());

    TempFile ok("ok.mpy", "print('hi')\nprint(1 + 1)\n");
    auto r = invoke({"run", ok.str()});
    CHECK(r.status == 0);
    CHECK(r.out == "hi\n2\n");

    TempFile bad("bad.mrb", "10 / 0\n");
    r = invoke({"run", bad.str()});
    CHECK(r.status == 1);
    CHECK(r.err.find("UNHANDLED ZeroDivisionError: integer division by zero") != std::string::npos);
    CHECK(r.err.find("[minirb] line 1") != std::string::npos);

    TempFile avg("avg.mpy", testing::scenarios::kAverage);
    r = invoke({"run", avg.str()});
    CHECK(r.status == 1);
    CHECK(r.err.find("at average [minipy] line 5") != std::string::npos);
}

TEST_CASE("usage errors exit with status 2") {
    TempFile odd("odd.txt", "1");
    CHECK(invoke({}).status == 2);
    CHECK(invoke({"run"}).status == 2);
    CHECK(invoke({"run", odd.str()}).status == 2);
    CHECK(invoke({"run", "/definitely/not/here.mpy"}).status == 2);
    CHECK(invoke({"--budget", "0", "run", odd.str()}).status == 2);
    CHECK(invoke({"--budget", "many", "run", odd.str()}).status == 2);
    CHECK(invoke({"--lang", "cobol", "run", odd.str()}).status == 2);
    CHECK(invoke({"fly"}).status == 2);
    auto r = invoke({"--frobnicate"});
    CHECK(r.status == 2);
    CHECK(r.err.find("usage") != std::string::npos);

    // an explicit language makes any extension runnable
    CHECK(invoke({"--lang", "minipy", "run", odd.str()}).status == 0);
}

TEST_CASE("the budget flag and environment variable are honoured") {
    TempFile loop("loop.mpy", "i = 0\nwhile i < 100:\n    i = i + 1\nprint(i)\n");
    CHECK(invoke({"--budget", "1", "run", loop.str()}).out == "100\n");
    ::setenv("POLYVM_BUDGET", "7", 1);
    CHECK(invoke({"run", loop.str()}).status == 0);
    ::setenv("POLYVM_BUDGET", "zero", 1);
    CHECK(invoke({"run", loop.str()}).status == 2);
    // the flag wins over a bad environment value
    CHECK(invoke({"--budget", "5", "run", loop.str()}).status == 0);
    ::unsetenv("POLYVM_BUDGET");
}

TEST_CASE("pipeline files print each cell and the final value") {
    TempFile words("words.pipe",
                   "word counts\n--- minipy\n'b a b'\n--- minirb\nit.split(' ')\n--- minipy\nlen(it)\n");
    auto r = invoke({"pipeline", words.str()});
    CHECK(r.status == 0);
    CHECK(r.out.find("cell 1: 'b a b'") != std::string::npos);
    CHECK(r.out.find("cell 2: [\"b\", \"a\", \"b\"]") != std::string::npos);
    CHECK(r.out.ends_with("3\n"));

    TempFile one("one.pipe", "--- minipy\nprint('x')\n6 * 7\n");
    r = invoke({"pipeline", one.str()});
    CHECK(r.status == 0);
    CHECK(r.out.find("x\n") == 0);

    TempFile broken("broken.pipe", "--- minipy\n1\n---\n2\n");
    CHECK(invoke({"pipeline", broken.str()}).status == 2);
    TempFile failing("failing.pipe", "--- minipy\n1\n--- minirb\nit / 0\n");
    r = invoke({"pipeline", failing.str()});
    CHECK(r.status == 1);
    CHECK(r.err.find("UNHANDLED ZeroDivisionError") != std::string::npos);
}

TEST_CASE("the word frequency pipeline through the CLI matches the oracle") {
    using namespace testing::scenarios;
    const auto text = word_text();
    std::string file;
    for (const auto& c : word_frequency_cells(text)) file += "--- " + c.language + "\n" + c.source;
    TempFile f("wf.pipe", file);
    auto r = invoke({"pipeline", f.str()});
    REQUIRE(r.status == 0);
    const auto oracle = word_frequency_oracle(text);
    std::string expected = "[";
    for (std::size_t i = 0; i < oracle.size(); ++i) {
        if (i) expected += ", ";
        expected += "['" + oracle[i].first + "', " + std::to_string(oracle[i].second) + "]";
    }
    expected += "]\n";
    CHECK(r.out.ends_with(expected));
}

TEST_CASE("the repl keeps bindings across submissions and languages") {
    cli::CliConfig config;
    cli::Repl repl("minipy", config);
    CHECK(repl.submit("x = 2") == "");
    CHECK(repl.submit("x + 1") == "3\n");
    CHECK(repl.submit(":lang minirb") .find("minirb") != std::string::npos);
    CHECK(repl.language() == "minirb");
    CHECK(repl.submit("x + 1") == "3\n");
    CHECK(repl.submit("1/0").find("ZeroDivisionError") != std::string::npos);
    CHECK(repl.submit("x * 10") == "20\n");
    CHECK(repl.submit(":inspect x").find("Int") != std::string::npos);
    CHECK(repl.submit(":lang cobol").find("unknown language") != std::string::npos);
    CHECK(repl.submit("def (").find("rror") != std::string::npos);

    std::istringstream in("def sq(n):\n    return n * n\n\nsq(9)\n");
    std::ostringstream out;
    cli::Repl py("minipy", config);
    cli::repl_loop(py, in, out, false);
    CHECK(out.str().find("81") != std::string::npos);
}
