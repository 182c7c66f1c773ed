#include <doctest.h>

#include <iostream>

#include "support/reference.hpp"

using namespace polyvm;
using namespace polyvm::testing::reference;

namespace {

ExprP lit(long n) { return std::make_shared<const Expr>(Expr{Expr::Int, n}); }
ExprP arith(const char* op, ExprP a, ExprP b) {
    return std::make_shared<const Expr>(Expr{Expr::Arith, {}, op, false, {std::move(a), std::move(b)}});
}

}  // namespace

TEST_CASE("oracle floors division and modulo") {
    Program p;
    p.lang = Lang::Rb;
    p.result = arith("/", lit(-7), lit(2));
    CHECK(evaluate(p).value == Value::integer(-4));
    p.result = arith("%", lit(-7), lit(2));
    CHECK(evaluate(p).value == Value::integer(1));
    p.result = arith("%", lit(7), lit(-2));
    CHECK(evaluate(p).value == Value::integer(-1));
    p.result = arith("%", lit(7), lit(0));
    const auto o = evaluate(p);
    CHECK(o.exception_class == "ZeroDivisionError");
    CHECK(o.exception_message == "integer modulo by zero");
}

TEST_CASE("rendering is deterministic per seed") {
    const auto a = make_corpus(11, 6);
    const auto b = make_corpus(11, 6);
    CHECK(a.sources == b.sources);
    CHECK(a.sources[0].find("print(") != std::string::npos);
    CHECK(a.sources[1].find("puts(") != std::string::npos);
}

TEST_CASE("generated programs agree with the oracle") {
    const auto corpus = make_corpus(2024, 120);
    const auto report = compare_with_vm(corpus);
    for (std::size_t i = 0; i < report.mismatches.size() && i < 3; ++i) std::cerr << report.mismatches[i] << "\n";
    CHECK(report.programs == 120);
    CHECK(report.mismatches.empty());
    // both outcomes are exercised
    CHECK(report.raising > 5);
    CHECK(report.raising < 100);
}

TEST_CASE("a swapped source is reported") {
    auto corpus = make_corpus(5, 4);
    // programs 0 and 2 are both MiniPy; their outputs differ
    REQUIRE(!(evaluate(corpus.programs[0]) == evaluate(corpus.programs[2])));
    std::swap(corpus.sources[0], corpus.sources[2]);
    CHECK(compare_with_vm(corpus).mismatches.size() == 2);
}
