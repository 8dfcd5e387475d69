#pragma once

// Fixed-width integer value model shared by the Raven interpreter and the
// backend introspection API. A value is a 64-bit payload plus a declared
// width and signedness; every operation wraps modulo 2^width.

#include <cstdint>
#include <stdexcept>
#include <string>

namespace frb {

struct EvalError : std::runtime_error {
    explicit EvalError(const std::string& what) : std::runtime_error(what) {}
};

struct IntType {
    uint8_t width = 32;     // 8, 16, 32 or 64
    bool is_signed = true;

    bool operator==(const IntType&) const = default;

    std::string name() const {
        return (is_signed ? "int" : "uint") + std::to_string(int(width)) + "_t";
    }
};

// Payload invariant: bits beyond `width` are zero for unsigned values and
// sign-extended for signed ones, so as_signed()/as_unsigned() are plain casts.
class Value {
public:
    Value() = default;

    static Value make(uint64_t raw, IntType t) {
        Value v;
        v.type_ = t;
        v.bits_ = normalize(raw, t);
        return v;
    }

    static Value of_u64(uint64_t raw) { return make(raw, {64, false}); }
    static Value of_i32(int64_t raw) { return make(uint64_t(raw), {32, true}); }
    static Value bool_val(bool b) { return make(b ? 1 : 0, {32, true}); }

    IntType type() const { return type_; }
    uint8_t width() const { return type_.width; }
    bool is_signed() const { return type_.is_signed; }

    uint64_t as_unsigned() const {
        return type_.width == 64 ? bits_ : (bits_ & mask(type_.width));
    }
    int64_t as_signed() const { return int64_t(bits_); }
    bool truthy() const { return as_unsigned() != 0; }

    // Raw payload (sign-extended form for signed types).
    uint64_t payload() const { return bits_; }

    // C-style conversion: reduce the mathematical value modulo 2^width of the
    // target type. Starts from the sign-extended payload so widening a
    // negative signed value sign-extends as C requires.
    Value convert_to(IntType t) const { return make(bits_, t); }

    bool operator==(const Value& o) const = default;

private:
    static uint64_t mask(uint8_t w) {
        return w >= 64 ? ~uint64_t(0) : ((uint64_t(1) << w) - 1);
    }
    static uint64_t normalize(uint64_t raw, IntType t) {
        uint64_t m = mask(t.width);
        uint64_t low = raw & m;
        if (t.is_signed && t.width < 64 && (low >> (t.width - 1)) & 1)
            return low | ~m;    // sign-extend into the payload
        return low;
    }

    uint64_t bits_ = 0;
    IntType type_{};
};

// Usual-arithmetic-conversion analogue for the fixed-width subset: equal
// widths combine to unsigned unless both are signed; otherwise the wider
// operand's type wins (a wider signed type can represent the narrower
// unsigned range, matching C's rules without the promotion-to-int step).
inline IntType common_type(IntType a, IntType b) {
    if (a.width == b.width) return {a.width, a.is_signed && b.is_signed};
    return a.width > b.width ? a : b;
}

enum class BinOp {
    Add, Sub, Mul, Div, Mod,
    BitAnd, BitOr, BitXor, Shl, Shr,
    Eq, Ne, Lt, Le, Gt, Ge,
    LogAnd, LogOr,
};

enum class UnOp { Neg, BitNot, LogNot };

inline const char* bin_op_token(BinOp op) {
    switch (op) {
        case BinOp::Add: return "+";   case BinOp::Sub: return "-";
        case BinOp::Mul: return "*";   case BinOp::Div: return "/";
        case BinOp::Mod: return "%";   case BinOp::BitAnd: return "&";
        case BinOp::BitOr: return "|"; case BinOp::BitXor: return "^";
        case BinOp::Shl: return "<<";  case BinOp::Shr: return ">>";
        case BinOp::Eq: return "==";   case BinOp::Ne: return "!=";
        case BinOp::Lt: return "<";    case BinOp::Le: return "<=";
        case BinOp::Gt: return ">";    case BinOp::Ge: return ">=";
        case BinOp::LogAnd: return "&&"; case BinOp::LogOr: return "||";
    }
    return "?";
}

inline Value eval_unary(UnOp op, const Value& v) {
    switch (op) {
        case UnOp::Neg:    return Value::make(uint64_t(0) - v.as_unsigned(), v.type());
        case UnOp::BitNot: return Value::make(~v.as_unsigned(), v.type());
        case UnOp::LogNot: return Value::bool_val(!v.truthy());
    }
    throw EvalError("bad unary op");
}

// Binary evaluation. Division/modulo by zero throws EvalError; the caller
// (the hook evaluator) turns that into a diagnostic and discards the hook.
inline Value eval_binary(BinOp op, const Value& lhs, const Value& rhs) {
    IntType ct = common_type(lhs.type(), rhs.type());
    Value a = lhs.convert_to(ct), b = rhs.convert_to(ct);

    auto wrap = [&](uint64_t raw) { return Value::make(raw, ct); };

    switch (op) {
        case BinOp::Add: return wrap(a.as_unsigned() + b.as_unsigned());
        case BinOp::Sub: return wrap(a.as_unsigned() - b.as_unsigned());
        case BinOp::Mul: return wrap(a.as_unsigned() * b.as_unsigned());
        case BinOp::Div:
        case BinOp::Mod: {
            if (b.as_unsigned() == 0)
                throw EvalError(op == BinOp::Div ? "division by zero" : "modulo by zero");
            if (ct.is_signed) {
                int64_t x = a.as_signed(), y = b.as_signed();
                if (x == INT64_MIN && y == -1)     // lone wrap case of C truncation
                    return wrap(op == BinOp::Div ? uint64_t(x) : 0);
                return wrap(uint64_t(op == BinOp::Div ? x / y : x % y));
            }
            uint64_t x = a.as_unsigned(), y = b.as_unsigned();
            return wrap(op == BinOp::Div ? x / y : x % y);
        }
        case BinOp::BitAnd: return wrap(a.as_unsigned() & b.as_unsigned());
        case BinOp::BitOr:  return wrap(a.as_unsigned() | b.as_unsigned());
        case BinOp::BitXor: return wrap(a.as_unsigned() ^ b.as_unsigned());
        case BinOp::Shl:
        case BinOp::Shr: {
            // Result keeps the left operand's type; the count is masked to the
            // width so every count is defined. >> of a signed value is arithmetic.
            IntType lt = lhs.type();
            unsigned count = unsigned(rhs.as_unsigned() & (lt.width - 1));
            if (op == BinOp::Shl)
                return Value::make(lhs.as_unsigned() << count, lt);
            if (lt.is_signed)
                return Value::make(uint64_t(lhs.as_signed() >> count), lt);
            return Value::make(lhs.as_unsigned() >> count, lt);
        }
        case BinOp::Eq: return Value::bool_val(a.payload() == b.payload());
        case BinOp::Ne: return Value::bool_val(a.payload() != b.payload());
        case BinOp::Lt:
        case BinOp::Le:
        case BinOp::Gt:
        case BinOp::Ge: {
            bool lt_res = ct.is_signed ? a.as_signed() < b.as_signed()
                                       : a.as_unsigned() < b.as_unsigned();
            bool eq_res = a.payload() == b.payload();
            switch (op) {
                case BinOp::Lt: return Value::bool_val(lt_res);
                case BinOp::Le: return Value::bool_val(lt_res || eq_res);
                case BinOp::Gt: return Value::bool_val(!lt_res && !eq_res);
                default:        return Value::bool_val(!lt_res);
            }
        }
        case BinOp::LogAnd: return Value::bool_val(a.truthy() && b.truthy());
        case BinOp::LogOr:  return Value::bool_val(a.truthy() || b.truthy());
    }
    throw EvalError("bad binary op");
}

// Literal typing, mirroring C for 32/64-bit targets: decimal literals prefer
// signed types, hex literals may land on the unsigned type of the same width.
inline Value literal_value(uint64_t raw, bool hex) {
    if (raw <= 0x7fffffffull) return Value::make(raw, {32, true});
    if (hex && raw <= 0xffffffffull) return Value::make(raw, {32, false});
    if (raw <= 0x7fffffffffffffffull) return Value::make(raw, {64, true});
    return Value::make(raw, {64, false});
}

} // namespace frb
