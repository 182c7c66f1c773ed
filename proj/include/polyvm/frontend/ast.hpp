#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "polyvm/kernel/isa.hpp"
#include "polyvm/value.hpp"

/// Syntax tree shared by both guest front ends. Each parser builds the
/// subset its language allows; the code generator lowers either one onto the
/// shared instruction set.
namespace polyvm::frontend {

struct Expr;
struct Stmt;
using ExprPtr = std::unique_ptr<Expr>;
using StmtPtr = std::unique_ptr<Stmt>;
using Block = std::vector<StmtPtr>;

enum class ExprKind {
    Literal,
    Name,
    IVar,        // @name, a slot of self
    Self,
    Attribute,   // object.name
    Index,       // object[index]
    Call,        // callee(args)
    MethodCall,  // object.name(args)
    New,         // Class.new(args)
    Binary,
    Unary,       // arithmetic negation
    Not,
    Compare,
    And,
    Or,
    ListLit,
};

struct Expr {
    ExprKind kind;
    int line = 1;
    int column = 1;

    Value literal;
    /// Identifier, slot or selector name.
    std::string name;
    ExprPtr object;  // receiver / left operand / operand / callee
    ExprPtr right;   // right operand / index
    std::vector<ExprPtr> args;  // call arguments or list items
    kernel::BinaryOp binary_op = kernel::BinaryOp::Add;
    kernel::CompareOp compare_op = kernel::CompareOp::Eq;

    Expr(ExprKind k, int l, int c) : kind(k), line(l), column(c) {}
};

enum class StmtKind {
    Expr,
    Assign,
    AugAssign,
    If,
    While,
    For,
    FuncDef,
    ClassDef,
    Try,
    Raise,
    Return,
    Break,
    Continue,
    Pass,
};

struct ExceptClause {
    /// Absent for a catch-all clause.
    std::optional<std::string> class_name;
    std::optional<std::string> bind_name;
    Block body;
    int line = 1;
};

struct Stmt {
    StmtKind kind;
    int line = 1;
    int column = 1;
    /// Last source line the statement spans (definitions are sliced by it).
    int end_line = 1;

    ExprPtr target;  // assignment target
    ExprPtr value;   // expression / assigned value / condition / iterable / raised value / return value
    kernel::BinaryOp aug_op = kernel::BinaryOp::Add;

    /// Function, class or loop variable name; for Raise, the class name.
    std::string name;
    std::vector<std::string> params;
    Block body;
    Block orelse;
    std::vector<ExceptClause> clauses;
    std::optional<Block> finally_body;

    Stmt(StmtKind k, int l, int c) : kind(k), line(l), column(c), end_line(l) {}
};

struct Module {
    Block body;
};

}  // namespace polyvm::frontend
