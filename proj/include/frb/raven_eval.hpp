#pragma once

// Tree-walking interpreter for Raven hook functions.
//
// Each hook invocation runs one function body against a step budget. Report
// calls are buffered and forwarded to the intrinsic callbacks in source order
// when the body completes or exhausts its budget; a runtime fault (division
// by zero, bad array index, failing memory read) discards both the buffered
// reports and the invocation's global mutations, leaving only a diagnostic.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "frb/raven_ast.hpp"

namespace frb {

// Thrown by intrinsic callbacks to signal a failed introspection call.
struct IntrinsicError {
    std::string message;
};

struct IntrinsicBinding {
    std::function<Value(uint64_t reg_id)> reg_state;
    std::function<Value(uint64_t addr, uint64_t size)> mem_read;
    std::function<void(const std::string& bug_id)> report_reached;
    std::function<void(const std::string& bug_id)> report_detected_triggered;
};

constexpr uint64_t kDefaultHookStepBudget = 1'000'000;

struct GlobalSlot {
    IntType type;
    std::vector<Value> cells;   // one cell for scalars
    bool is_array = false;
};

using GlobalsState = std::map<std::string, GlobalSlot>;

// Initial global environment for one program; reset between inputs.
inline GlobalsState make_globals(const RavenProgram& prog) {
    GlobalsState g;
    for (const auto& decl : prog.globals) {
        GlobalSlot slot;
        slot.type = decl.type;
        slot.is_array = decl.array_len.has_value();
        size_t n = decl.array_len.value_or(1);
        slot.cells.assign(n, Value::make(0, decl.type));
        for (size_t i = 0; i < decl.init.size() && i < n; i++)
            slot.cells[i] = Value::make(decl.init[i], decl.type);
        g.emplace(decl.name, std::move(slot));
    }
    return g;
}

struct HookReport {
    enum class Kind { Reached, DetectedTriggered };
    Kind kind;
    std::string bug_id;
};

struct HookEvalResult {
    std::vector<HookReport> reports;        // empty if the invocation faulted
    std::optional<std::string> diagnostic;  // fault or budget message
    bool budget_exceeded = false;
    uint64_t steps_used = 0;
};

namespace eval_detail {

struct Fault {
    std::string message;
};

struct BudgetExceeded {};

class Interp {
public:
    Interp(const IntrinsicBinding& intr, GlobalsState& globals, uint64_t budget)
        : intr_(intr), globals_(globals), budget_(budget) {}

    void run_body(const std::vector<StmtPtr>& body) {
        locals_.emplace_back();
        for (const auto& st : body) {
            exec(*st);
            if (returned_) break;
        }
    }

    std::vector<HookReport> reports;
    uint64_t steps = 0;

private:
    void tick() {
        if (++steps > budget_) throw BudgetExceeded{};
    }

    void exec(const Stmt& s) {
        tick();
        switch (s.kind) {
            case Stmt::Kind::Decl: {
                Value v = s.init ? eval(*s.init).convert_to(s.decl_type)
                                 : Value::make(0, s.decl_type);
                locals_.back()[s.name] = v;
                break;
            }
            case Stmt::Kind::Assign:
                assign(s);
                break;
            case Stmt::Kind::ExprStmt:
                eval(*s.expr);
                break;
            case Stmt::Kind::If:
                if (eval(*s.expr).truthy()) run_block(s.body);
                else run_block(s.else_body);
                break;
            case Stmt::Kind::While:
                while (!returned_ && eval(*s.expr).truthy()) run_block(s.body);
                break;
            case Stmt::Kind::For:
                locals_.emplace_back();
                if (s.for_init) exec(*s.for_init);
                while (!returned_ && (!s.expr || eval(*s.expr).truthy())) {
                    run_block(s.body);
                    if (returned_) break;
                    if (s.for_step) exec(*s.for_step);
                }
                locals_.pop_back();
                break;
            case Stmt::Kind::Return:
                returned_ = true;
                break;
            case Stmt::Kind::Block:
                run_block(s.body);
                break;
        }
    }

    // Each block gets its own local frame so declarations scope like C.
    void run_block(const std::vector<StmtPtr>& body) {
        locals_.emplace_back();
        for (const auto& st : body) {
            exec(*st);
            if (returned_) break;
        }
        locals_.pop_back();
    }

    Value* find_local(const std::string& name) {
        for (auto frame = locals_.rbegin(); frame != locals_.rend(); ++frame) {
            auto it = frame->find(name);
            if (it != frame->end()) return &it->second;
        }
        return nullptr;
    }

    void assign(const Stmt& s) {
        Value v = eval(*s.value);
        if (Value* local = find_local(s.name)) {
            *local = v.convert_to(local->type());
            return;
        }
        auto g = globals_.find(s.name);
        if (g == globals_.end()) throw Fault{"unknown identifier '" + s.name + "'"};
        GlobalSlot& slot = g->second;
        size_t idx = 0;
        if (s.index) {
            idx = size_t(eval(*s.index).as_unsigned());
            if (idx >= slot.cells.size())
                throw Fault{"array index " + std::to_string(idx) + " out of bounds for '" +
                            s.name + "[" + std::to_string(slot.cells.size()) + "]'"};
        }
        slot.cells[idx] = v.convert_to(slot.type);
    }

    Value eval(const Expr& e) {
        tick();
        switch (e.kind) {
            case Expr::Kind::IntLit:
                return e.int_value;
            case Expr::Kind::StrLit:
                throw Fault{"string literal used as a value"};
            case Expr::Kind::Var: {
                if (const Value* local = find_local(e.name)) return *local;
                auto g = globals_.find(e.name);
                if (g == globals_.end())
                    throw Fault{"unknown identifier '" + e.name + "'"};
                return g->second.cells[0];
            }
            case Expr::Kind::Index: {
                auto g = globals_.find(e.name);
                if (g == globals_.end())
                    throw Fault{"unknown identifier '" + e.name + "'"};
                size_t idx = size_t(eval(*e.lhs).as_unsigned());
                if (idx >= g->second.cells.size())
                    throw Fault{"array index " + std::to_string(idx) +
                                " out of bounds for '" + e.name + "[" +
                                std::to_string(g->second.cells.size()) + "]'"};
                return g->second.cells[idx];
            }
            case Expr::Kind::Unary:
                return eval_unary(e.un_op, eval(*e.lhs));
            case Expr::Kind::Binary: {
                // Logical operators short-circuit like C.
                if (e.bin_op == BinOp::LogAnd) {
                    if (!eval(*e.lhs).truthy()) return Value::bool_val(false);
                    return Value::bool_val(eval(*e.rhs).truthy());
                }
                if (e.bin_op == BinOp::LogOr) {
                    if (eval(*e.lhs).truthy()) return Value::bool_val(true);
                    return Value::bool_val(eval(*e.rhs).truthy());
                }
                Value l = eval(*e.lhs), r = eval(*e.rhs);
                try {
                    return eval_binary(e.bin_op, l, r);
                } catch (const EvalError& err) {
                    throw Fault{err.what()};
                }
            }
            case Expr::Kind::Call:
                return call_intrinsic(e);
        }
        throw Fault{"bad expression"};
    }

    Value call_intrinsic(const Expr& e) {
        switch (e.intrinsic) {
            case Intrinsic::RegState: {
                uint64_t reg = eval(*e.args[0]).as_unsigned();
                try {
                    return intr_.reg_state(reg);
                } catch (const IntrinsicError& err) {
                    throw Fault{"frb_reg_state: " + err.message};
                }
            }
            case Intrinsic::MemRead: {
                uint64_t addr = eval(*e.args[0]).as_unsigned();
                uint64_t size = eval(*e.args[1]).as_unsigned();
                try {
                    return intr_.mem_read(addr, size);
                } catch (const IntrinsicError& err) {
                    throw Fault{"frb_mem_read: " + err.message};
                }
            }
            case Intrinsic::ReportReached:
                reports.push_back({HookReport::Kind::Reached, e.args[0]->str_value});
                return Value::bool_val(false);
            case Intrinsic::ReportDetectedTriggered:
                reports.push_back({HookReport::Kind::DetectedTriggered, e.args[0]->str_value});
                return Value::bool_val(false);
        }
        throw Fault{"bad intrinsic"};
    }

    const IntrinsicBinding& intr_;
    GlobalsState& globals_;
    uint64_t budget_;
    std::vector<std::map<std::string, Value>> locals_;
    bool returned_ = false;
};

} // namespace eval_detail

// Executes one hook function. Mutates globals_state in place on success (and
// on budget exhaustion); restores it on a fault.
inline HookEvalResult eval_hook(const RavenProgram& prog, const std::string& function_name,
                                const IntrinsicBinding& intrinsics, GlobalsState& globals_state,
                                uint64_t step_budget = kDefaultHookStepBudget) {
    HookEvalResult res;
    const RavenFunction* fn = prog.find_function(function_name);
    if (!fn) {
        res.diagnostic = "no function '" + function_name + "' in " + prog.origin;
        return res;
    }

    GlobalsState snapshot = globals_state;
    eval_detail::Interp interp(intrinsics, globals_state, step_budget);

    auto flush = [&] {
        for (const auto& r : interp.reports) {
            if (r.kind == HookReport::Kind::Reached) {
                if (intrinsics.report_reached) intrinsics.report_reached(r.bug_id);
            } else {
                if (intrinsics.report_detected_triggered)
                    intrinsics.report_detected_triggered(r.bug_id);
            }
        }
        res.reports = std::move(interp.reports);
    };

    try {
        interp.run_body(fn->body);
        flush();
    } catch (const eval_detail::BudgetExceeded&) {
        // Reports emitted before the budget ran out still count.
        flush();
        res.budget_exceeded = true;
        res.diagnostic = "step budget exceeded in " + function_name + " (" +
                         std::to_string(step_budget) + " steps)";
    } catch (const eval_detail::Fault& f) {
        globals_state = std::move(snapshot);
        res.diagnostic = function_name + ": " + f.message;
    }
    res.steps_used = interp.steps;
    return res;
}

} // namespace frb
