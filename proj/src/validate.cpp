#include "lazevm/validate.hpp"

#include <unordered_set>

#include "lazevm/analysis.hpp"
#include "lazevm/detail/overloaded.hpp"
#include "lazevm/errors.hpp"

namespace lazevm {

using detail::Overloaded;

namespace {

void checkConstructors(const Expr& e, const ConstructorTable& table, std::vector<std::string>& out) {
    auto check = [&](const std::string& tag, std::size_t arity) {
        auto it = table.find(tag);
        if (it == table.end()) {
            out.push_back("undeclared constructor " + tag);
        } else if (static_cast<std::size_t>(it->second) != arity) {
            out.push_back("constructor " + tag + " used with " + std::to_string(arity) +
                          " fields, declared " + std::to_string(it->second));
        }
    };
    std::visit(Overloaded{
                   [&](const Lam& n) { checkConstructors(n.body, table, out); },
                   [&](const App& n) { checkConstructors(n.fun, table, out); },
                   [&](const Let& n) {
                       for (const auto& b : n.bindings) {
                           checkConstructors(b.rhs, table, out);
                       }
                       checkConstructors(n.body, table, out);
                   },
                   [&](const Con& n) { check(n.tag, n.args.size()); },
                   [&](const Case& n) {
                       checkConstructors(n.scrutinee, table, out);
                       for (const auto& alt : n.alts) {
                           check(alt.tag, alt.binders.size());
                           checkConstructors(alt.body, table, out);
                       }
                       if (n.fallback) {
                           checkConstructors(n.fallback, table, out);
                       }
                   },
                   [&](const Seq& n) { checkConstructors(n.then, table, out); },
                   [&](const auto&) {},
               },
               e->node);
}

}  // namespace

std::vector<std::string> validateProgram(const Program& p) {
    std::vector<std::string> out;
    if (p.find(p.mainName) == nullptr) {
        out.push_back("main " + p.mainName.render() + " is not defined");
    }
    std::unordered_set<Name, NameHash> top;
    for (const auto& b : p.topLevel) {
        top.insert(b.name);
    }
    std::vector<Name> binders;
    for (const auto& b : p.topLevel) {
        binders.push_back(b.name);
        appendBinders(b.rhs, binders);
    }
    std::unordered_set<Name, NameHash> seen;
    for (const auto& n : binders) {
        if (!seen.insert(n).second) {
            out.push_back("binder " + n.render() + " bound more than once");
        }
        if (n.uniq >= p.nextUniq) {
            out.push_back("binder " + n.render() + " not below nextUniq " + std::to_string(p.nextUniq));
        }
    }
    for (const auto& b : p.topLevel) {
        for (const auto& v : freeVars(b.rhs)) {
            if (!top.contains(v)) {
                out.push_back("free variable " + v.render() + " in " + b.name.render());
            }
        }
        checkConstructors(b.rhs, p.constructors, out);
    }
    return out;
}

void requireValid(const Program& p) {
    auto problems = validateProgram(p);
    if (problems.empty()) {
        return;
    }
    std::string msg;
    for (const auto& s : problems) {
        msg += msg.empty() ? s : "; " + s;
    }
    throw ProgramError(ProgramError::Kind::Malformed, msg);
}

}  // namespace lazevm
