#include "doctest.h"
#include "polyvm/kernel/introspection.hpp"
#include "polyvm/minirb/minirb.hpp"
#include "support/harness.hpp"

using namespace polyvm;
using polyvm::testing::World;

TEST_CASE("minirb tokens") {
    using K = TokenKind;
    std::vector<K> kinds;
    for (const auto& t : minirb::tokenize("@x = Foo.new # c\nputs 1")) kinds.push_back(t.kind);
    CHECK(kinds == std::vector<K>{K::IVar, K::Operator, K::Constant, K::Punctuation, K::Identifier, K::Comment,
                                  K::Newline, K::Identifier, K::Number, K::Newline, K::End});
    // a trailing operator continues the statement on the next line
    int newlines = 0;
    for (const auto& t : minirb::tokenize("x = 1 +\n  2\n")) newlines += t.kind == K::Newline;
    CHECK(newlines == 1);
}

TEST_CASE("minirb parses raise of a bare string without a class") {
    auto m = minirb::parse("raise \"boom\"");
    REQUIRE(m.body.size() == 1);
    CHECK(m.body[0]->kind == frontend::StmtKind::Raise);
    CHECK(m.body[0]->name.empty());
    World w;
    CHECK(w.eval(w.rb, "raise \"boom\"") == "!RuntimeError: boom");
    CHECK(w.eval(w.rb, "raise ArgumentError, \"bad\"") == "!ArgumentError: bad");
    CHECK(w.eval(w.rb, "raise ArgumentError") == "!ArgumentError: ArgumentError");
    CHECK(w.eval(w.rb, "raise ArgumentError.new(\"x\")") == "!ArgumentError: x");
}

TEST_CASE("minirb syntax errors") {
    CHECK_THROWS_AS(minirb::parse("def f\n  1\n"), SyntaxError);
    CHECK_THROWS_AS(minirb::parse("x = (1 +"), SyntaxError);
    CHECK_THROWS_AS(minirb::parse("if x\n1\nelse\n"), SyntaxError);
    CHECK_THROWS_AS(minirb::parse("x = $y"), SyntaxError);
    World w;
    CHECK_THROWS_AS(w.runtime.plugin(w.rb).compile("next", w.rb, {}), CompileError);
}

TEST_CASE("minirb arithmetic and truthiness") {
    World w;
    CHECK(w.eval(w.rb, "7 / 2") == "3");
    CHECK(w.eval(w.rb, "-7 / 2") == "-4");
    CHECK(w.eval(w.rb, "7 / 2.0") == "3.5");
    CHECK(w.eval(w.rb, "-7 % 3") == "2");
    CHECK(w.eval(w.rb, "1 / 0") == "!ZeroDivisionError: integer division by zero");
    CHECK(w.eval(w.rb, "1.0 / 0") == "!ZeroDivisionError: float division by zero");
    CHECK(w.eval(w.rb, "1e20 * 1") == "1.0e+20");
    CHECK(w.eval(w.rb, "2.0 * 1") == "2.0");
    CHECK(w.eval(w.rb, "if 0 then 1 else 2 end\n") == "1");
    CHECK(w.eval(w.rb, "x = 2\nif 0\n  x = 1\nend\nx") == "1");
    CHECK(w.eval(w.rb, "x = 2\nif nil\n  x = 1\nend\nx") == "2");
    CHECK(w.eval(w.rb, "nil || \"d\"") == "\"d\"");
    CHECK(w.eval(w.rb, "!false && 3") == "3");
    CHECK(w.eval(w.rb, "1 < \"a\"") == "!ArgumentError: comparison of Integer with String failed");
}

TEST_CASE("minirb control flow") {
    World w;
    CHECK(w.eval(w.rb, "t = 0\ni = 0\nwhile i < 10\n  i += 1\n  next if i % 2 == 0\n  t += i\nend\nt") == "25");
    CHECK(w.eval(w.rb, "t = 0\nfor x in [1, 2, 3] do\n  break if x == 3\n  t += x\nend\nt") == "3");
    CHECK(w.eval(w.rb, "x = 5\nif x < 3\n  y = 1\nelsif x < 6\n  y = 2\nelse\n  y = 3\nend\ny") == "2");
    CHECK(w.eval(w.rb, "n = 3\n\"n=#{n} sq=#{n * n}\"") == "\"n=3 sq=9\"");
}

TEST_CASE("minirb methods, classes and implicit self") {
    World w;
    CHECK(w.eval(w.rb, "def sq(x)\n  x * x\nend\nsq(7)") == "49");
    CHECK(w.eval(w.rb, "def sq x\n  return x * x\nend\nsq 8") == "64");
    CHECK(w.eval(w.rb, "def f(a)\n  a\nend\nf") == "!ArgumentError: wrong number of arguments (given 0, expected 1)");
    const char* cls =
        "class Counter\n"
        "  def initialize(start)\n"
        "    @count = start\n"
        "  end\n"
        "  def bump\n"
        "    @count += step\n"
        "  end\n"
        "  def step\n"
        "    2\n"
        "  end\n"
        "  def count\n"
        "    @count\n"
        "  end\n"
        "end\n"
        "c = Counter.new(1)\n";
    CHECK(w.eval(w.rb, std::string(cls) + "c.bump\nc.bump\nc.count") == "5");
    CHECK(w.eval(w.rb, std::string(cls) + "c") == "#<Counter @count=1>");
    CHECK(w.eval(w.rb, std::string(cls) + "c.nope") == "!NoMethodError: undefined method 'nope' for an instance of Counter");
    CHECK(w.eval(w.rb, "undefined_thing") == "!NameError: undefined local variable or method 'undefined_thing'");
    CHECK_THROWS_AS(w.runtime.plugin(w.rb).compile("@x = 1", w.rb, {}), CompileError);
}

TEST_CASE("minirb exceptions") {
    World w;
    CHECK(w.eval(w.rb, "begin\n  1 / 0\nrescue ZeroDivisionError => e\n  r = e.message\nend\nr") ==
          "\"integer division by zero\"");
    CHECK(w.eval(w.rb, "log = []\nbegin\n  begin\n    raise \"x\"\n  ensure\n    log.push(1)\n  end\n"
                       "rescue => e\n  log.push(e.message)\nend\nlog") == "[1, \"x\"]");
    CHECK(w.eval(w.rb, "def f(x)\n  if x\n    1\n  else\n    2\n  end\nend\n[f(true), f(nil)]") == "[1, 2]");
    CHECK(w.eval(w.rb, "def f\n  begin\n    5\n  ensure\n    puts \"e\"\n  end\nend\nf") == "5");
    CHECK(w.eval(w.rb, "def f\n  raise \"in f\"\nrescue RuntimeError\n  7\nend\nf") == "7");
    CHECK(w.eval(w.rb, "e = ZeroDivisionError.new(\"m\")\ne") == "#<ZeroDivisionError: m>");
}

TEST_CASE("minirb builtins and methods") {
    World w;
    CHECK(w.eval(w.rb, "\"  The quick  brown \".split(\" \")") == "[\"The\", \"quick\", \"brown\"]");
    CHECK(w.eval(w.rb, "\"a,b,,\".split(\",\")") == "[\"a\", \"b\"]");
    CHECK(w.eval(w.rb, "\"HeLLo\".downcase.length") == "5");
    CHECK(w.eval(w.rb, "[1].push(2).push(3).size") == "3");
    CHECK(w.eval(w.rb, "[].pop") == "nil");
    CHECK(w.eval(w.rb, "[1, 2].join(\"-\")") == "\"1-2\"");
    CHECK(w.eval(w.rb, "\"12ab\".to_i + 1") == "13");
    CHECK(w.eval(w.rb, "nil.to_s") == "\"\"");
    w.transcript.clear();
    w.eval(w.rb, "puts \"a\", 1\nputs [2, [3]]\nputs nil\nputs");
    CHECK(w.transcript == "a\n1\n2\n3\n\n\n");
}
