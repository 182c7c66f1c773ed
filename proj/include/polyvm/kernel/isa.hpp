#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "polyvm/value.hpp"

namespace polyvm::kernel {

/// The instruction set shared by every guest language. Only the compilers differ.
enum class Op : std::uint8_t {
    PushConst,     // a = constant index
    Load,          // a = name index
    Store,         // a = name index; pops
    LoadSlot,      // a = name index; [obj] -> [value]
    StoreSlot,     // a = name index; [obj, value] -> []
    Call,          // a = argc; [callee, args...] -> [result]
    Invoke,        // a = selector name index, b = argc; [receiver, args...] -> [result]
    Return,        // [value] -> frame popped
    Jump,          // a = target
    JumpIfFalse,   // a = target; pops condition
    Binary,        // a = BinaryOp
    Unary,         // a = UnaryOp
    Compare,       // a = CompareOp
    BuildList,     // a = element count
    Index,         // [obj, index] -> [value]
    SetIndex,      // [obj, index, value] -> []
    MakeFunction,  // a = child code index
    MakeClass,     // a = class name index, b = member count; [(name, value) * b] -> [class]
    NewInstance,   // a = argc; [class, args...] -> [instance]
    SetupHandler,  // a = handler ip, b = class name index or -1 for catch-all, c = HandlerKind
    PopHandler,
    Raise,         // a = -1: raise TOS; otherwise class name index with TOS as the message
    Pop,
    Dup,
    IterNew,       // [iterable] -> [iterator]
    IterNext,      // a = exit target; [iterator] -> [iterator, item], or pops iterator and jumps
};

/// `Div` is true division. `IntDiv` floors when both operands are Ints and
/// divides like `Div` otherwise.
enum class BinaryOp : std::int32_t { Add, Sub, Mul, Div, IntDiv, Mod };
enum class UnaryOp : std::int32_t { Neg, Not };
enum class CompareOp : std::int32_t { Eq, Ne, Lt, Le, Gt, Ge };
enum class HandlerKind : std::int32_t { Rescue, Ensure };

std::string_view op_name(Op op);
std::string_view binary_op_symbol(BinaryOp op);
std::string_view compare_op_symbol(CompareOp op);

struct Instruction {
    Op op;
    std::int32_t a = 0;
    std::int32_t b = 0;
    std::int32_t c = 0;
};

enum class CodeKind : std::uint8_t { Module, Function, Method };

/// Compiled guest code. Immutable once built; shared between frames and
/// function objects.
struct CodeUnit {
    std::string name;
    std::vector<std::string> params;
    std::vector<Instruction> instructions;
    std::vector<Value> constants;
    std::vector<std::string> names;
    /// 1-based line in `source` for every instruction.
    std::vector<int> lines;
    std::string source;
    LangId language;
    CodeKind kind = CodeKind::Module;
    /// Python-style methods receive the receiver as their first parameter.
    bool binds_self_param = false;
    std::vector<std::shared_ptr<const CodeUnit>> children;

    int line_at(std::size_t ip) const;
};

using CodePtr = std::shared_ptr<const CodeUnit>;

/// Checks the structural invariants: jump and handler targets in range, line
/// table total, operand indices valid. Throws InternalFault when violated.
void validate(const CodeUnit& code);

/// Human-readable listing, one instruction per line.
std::string disassemble(const CodeUnit& code);

}  // namespace polyvm::kernel
