#include "polyvm/kernel/isa.hpp"

#include <sstream>

#include "polyvm/errors.hpp"

namespace polyvm::kernel {

std::string_view op_name(Op op) {
    switch (op) {
    case Op::PushConst: return "PUSH_CONST";
    case Op::Load: return "LOAD";
    case Op::Store: return "STORE";
    case Op::LoadSlot: return "LOAD_SLOT";
    case Op::StoreSlot: return "STORE_SLOT";
    case Op::Call: return "CALL";
    case Op::Invoke: return "INVOKE";
    case Op::Return: return "RETURN";
    case Op::Jump: return "JUMP";
    case Op::JumpIfFalse: return "JUMP_IF_FALSE";
    case Op::Binary: return "BINARY";
    case Op::Unary: return "UNARY";
    case Op::Compare: return "COMPARE";
    case Op::BuildList: return "BUILD_LIST";
    case Op::Index: return "INDEX";
    case Op::SetIndex: return "SET_INDEX";
    case Op::MakeFunction: return "MAKE_FUNCTION";
    case Op::MakeClass: return "MAKE_CLASS";
    case Op::NewInstance: return "NEW_INSTANCE";
    case Op::SetupHandler: return "SETUP_HANDLER";
    case Op::PopHandler: return "POP_HANDLER";
    case Op::Raise: return "RAISE";
    case Op::Pop: return "POP";
    case Op::Dup: return "DUP";
    case Op::IterNew: return "ITER_NEW";
    case Op::IterNext: return "ITER_NEXT";
    }
    return "?";
}

std::string_view binary_op_symbol(BinaryOp op) {
    switch (op) {
    case BinaryOp::Add: return "+";
    case BinaryOp::Sub: return "-";
    case BinaryOp::Mul: return "*";
    case BinaryOp::Div: return "/";
    case BinaryOp::IntDiv: return "div";
    case BinaryOp::Mod: return "%";
    }
    return "?";
}

std::string_view compare_op_symbol(CompareOp op) {
    switch (op) {
    case CompareOp::Eq: return "==";
    case CompareOp::Ne: return "!=";
    case CompareOp::Lt: return "<";
    case CompareOp::Le: return "<=";
    case CompareOp::Gt: return ">";
    case CompareOp::Ge: return ">=";
    }
    return "?";
}

int CodeUnit::line_at(std::size_t ip) const {
    if (lines.empty()) return 1;
    if (ip >= lines.size()) return lines.back();
    return lines[ip];
}

void validate(const CodeUnit& code) {
    const auto count = static_cast<std::int32_t>(code.instructions.size());
    if (code.lines.size() != code.instructions.size()) {
        throw InternalFault(code.name + ": line table does not cover every instruction");
    }
    auto name_ok = [&](std::int32_t i) { return i >= 0 && i < static_cast<std::int32_t>(code.names.size()); };
    for (std::int32_t ip = 0; ip < count; ++ip) {
        const auto& ins = code.instructions[static_cast<std::size_t>(ip)];
        bool ok = true;
        switch (ins.op) {
        case Op::Jump:
        case Op::JumpIfFalse:
        case Op::IterNext:
        case Op::SetupHandler: ok = ins.a >= 0 && ins.a <= count; break;
        case Op::PushConst: ok = ins.a >= 0 && ins.a < static_cast<std::int32_t>(code.constants.size()); break;
        case Op::Load:
        case Op::Store:
        case Op::LoadSlot:
        case Op::StoreSlot:
        case Op::Invoke:
        case Op::MakeClass: ok = name_ok(ins.a); break;
        case Op::MakeFunction: ok = ins.a >= 0 && ins.a < static_cast<std::int32_t>(code.children.size()); break;
        case Op::Raise: ok = ins.a == -1 || name_ok(ins.a); break;
        default: break;
        }
        if (ok && ins.op == Op::SetupHandler) ok = ins.b == -1 || name_ok(ins.b);
        if (!ok) {
            throw InternalFault(code.name + ": operand out of range at instruction " + std::to_string(ip));
        }
    }
    for (const auto& child : code.children) validate(*child);
}

std::string disassemble(const CodeUnit& code) {
    std::ostringstream out;
    out << "code " << code.name << "(";
    for (std::size_t i = 0; i < code.params.size(); ++i) out << (i ? ", " : "") << code.params[i];
    out << ")\n";
    for (std::size_t ip = 0; ip < code.instructions.size(); ++ip) {
        const auto& ins = code.instructions[ip];
        out << "  " << ip << "\t[" << code.line_at(ip) << "]\t" << op_name(ins.op);
        switch (ins.op) {
        case Op::Load:
        case Op::Store:
        case Op::LoadSlot:
        case Op::StoreSlot: out << " " << code.names[static_cast<std::size_t>(ins.a)]; break;
        case Op::Invoke: out << " " << code.names[static_cast<std::size_t>(ins.a)] << " " << ins.b; break;
        case Op::PushConst: out << " " << debug_string(code.constants[static_cast<std::size_t>(ins.a)]); break;
        case Op::Binary: out << " " << binary_op_symbol(static_cast<BinaryOp>(ins.a)); break;
        case Op::Compare: out << " " << compare_op_symbol(static_cast<CompareOp>(ins.a)); break;
        case Op::SetupHandler:
            out << " " << ins.a << " " << (ins.b < 0 ? std::string("*") : code.names[static_cast<std::size_t>(ins.b)])
                << (ins.c == static_cast<int>(HandlerKind::Ensure) ? " ensure" : " rescue");
            break;
        case Op::Pop:
        case Op::Dup:
        case Op::Return:
        case Op::Index:
        case Op::SetIndex:
        case Op::PopHandler:
        case Op::IterNew: break;
        default: out << " " << ins.a; break;
        }
        out << "\n";
    }
    for (const auto& child : code.children) out << disassemble(*child);
    return out.str();
}

}  // namespace polyvm::kernel
