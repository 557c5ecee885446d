#include "sbmiqp/parse.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <json.hpp>
#include <sstream>

#include "sbmiqp/errors.hpp"

namespace sbmiqp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// Infix expression parser (recursive descent).
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' unary)?            (right-associative)
//   primary := number | ident | ident '(' expr ')' | '(' expr ')'
// ---------------------------------------------------------------------------

class ExprParser {
public:
    ExprParser(const std::string& text, const std::map<std::string, int>& vars)
        : text_(text), vars_(vars) {}

    Expr parse() {
        Expr e = parse_expr();
        skip_ws();
        if (pos_ != text_.size()) fail("unexpected trailing input");
        return e;
    }

private:
    [[noreturn]] void fail(const std::string& msg) const {
        std::ostringstream os;
        os << "expression error at column " << (pos_ + 1) << ": " << msg << " in \"" << text_
           << "\"";
        throw ParseError(os.str());
    }

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool eat(char c) {
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    char peek() {
        skip_ws();
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }

    Expr parse_expr() {
        Expr e = parse_term();
        for (;;) {
            if (eat('+')) {
                e = e + parse_term();
            } else if (eat('-')) {
                e = e - parse_term();
            } else {
                return e;
            }
        }
    }

    Expr parse_term() {
        Expr e = parse_unary();
        for (;;) {
            if (eat('*')) {
                e = e * parse_unary();
            } else if (eat('/')) {
                e = e / parse_unary();
            } else {
                return e;
            }
        }
    }

    Expr parse_unary() {
        if (eat('-')) return -parse_unary();
        return parse_power();
    }

    Expr parse_power() {
        Expr base = parse_primary();
        if (eat('^')) {
            // The exponent re-enters at unary level so 2^-1 works and
            // a^b^c associates to the right.
            Expr exponent = parse_unary();
            if (exponent.is_constant()) return pow(base, exponent.constant_value());
            return pow(base, exponent);
        }
        return base;
    }

    Expr parse_primary() {
        skip_ws();
        if (pos_ >= text_.size()) fail("unexpected end of expression");
        char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            Expr e = parse_expr();
            if (!eat(')')) fail("expected ')'");
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_ident();
        fail(std::string("unexpected character '") + c + "'");
    }

    Expr parse_number() {
        std::size_t end = pos_;
        while (end < text_.size() &&
               (std::isdigit(static_cast<unsigned char>(text_[end])) || text_[end] == '.')) {
            ++end;
        }
        if (end < text_.size() && (text_[end] == 'e' || text_[end] == 'E')) {
            std::size_t mark = end + 1;
            if (mark < text_.size() && (text_[mark] == '+' || text_[mark] == '-')) ++mark;
            if (mark < text_.size() && std::isdigit(static_cast<unsigned char>(text_[mark]))) {
                end = mark + 1;
                while (end < text_.size() && std::isdigit(static_cast<unsigned char>(text_[end])))
                    ++end;
            }
        }
        const std::string tok = text_.substr(pos_, end - pos_);
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(tok, &used);
        } catch (const std::exception&) {
            fail("malformed number '" + tok + "'");
        }
        if (used != tok.size()) fail("malformed number '" + tok + "'");
        pos_ = end;
        return Expr::constant(v);
    }

    Expr parse_ident() {
        std::size_t end = pos_;
        while (end < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[end])) || text_[end] == '_')) {
            ++end;
        }
        const std::string name = text_.substr(pos_, end - pos_);
        pos_ = end;
        if (peek() == '(') {
            ++pos_;
            Expr arg = parse_expr();
            if (!eat(')')) fail("expected ')' after argument of " + name);
            if (name == "exp") return exp(arg);
            if (name == "log") return log(arg);
            if (name == "sin") return sin(arg);
            if (name == "cos") return cos(arg);
            if (name == "sqrt") return sqrt(arg);
            fail("unknown function '" + name + "'");
        }
        auto it = vars_.find(name);
        if (it == vars_.end()) fail("unknown identifier '" + name + "'");
        return Expr::variable(it->second);
    }

    const std::string& text_;
    const std::map<std::string, int>& vars_;
    std::size_t pos_ = 0;
};

double bound_from_json(const nlohmann::json& v, const std::string& where) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
        const std::string s = v.get<std::string>();
        if (s == "inf" || s == "+inf") return kInf;
        if (s == "-inf") return -kInf;
    }
    throw SchemaError(where + ": bound must be a number or \"inf\"/\"-inf\"");
}

} // namespace

Expr parse_expression(const std::string& text, const std::map<std::string, int>& vars) {
    return ExprParser(text, vars).parse();
}

ModelMinlp parse_problem_string(const std::string& json_text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("invalid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw SchemaError("problem document must be a JSON object");
    if (!doc.contains("variables") || !doc["variables"].is_array())
        throw SchemaError("missing 'variables' array");
    if (!doc.contains("objective") || !doc["objective"].is_string())
        throw SchemaError("missing 'objective' expression string");

    // First pass over variables: names, kinds, bounds. Continuous variables
    // get indices [0, nx), integers [nx, nx+ny) in declaration order.
    struct VarDecl {
        std::string name;
        bool integer = false;
        double lo = -kInf, hi = kInf;
    };
    std::vector<VarDecl> decls;
    for (const auto& v : doc["variables"]) {
        if (!v.is_object() || !v.contains("name") || !v["name"].is_string())
            throw SchemaError("each variable needs a 'name' string");
        VarDecl d;
        d.name = v["name"].get<std::string>();
        const std::string kind = v.value("kind", std::string("continuous"));
        if (kind == "integer") {
            d.integer = true;
        } else if (kind != "continuous") {
            throw SchemaError("variable '" + d.name + "': kind must be 'continuous' or 'integer'");
        }
        if (v.contains("bounds")) {
            const auto& b = v["bounds"];
            if (!b.is_array() || b.size() != 2)
                throw SchemaError("variable '" + d.name + "': bounds must be [lo, hi]");
            d.lo = bound_from_json(b[0], "variable '" + d.name + "'");
            d.hi = bound_from_json(b[1], "variable '" + d.name + "'");
        } else if (d.integer) {
            throw SchemaError("integer variable '" + d.name + "' must have finite bounds");
        }
        if (d.lo > d.hi)
            throw SchemaError("variable '" + d.name + "': lower bound exceeds upper bound");
        if (d.integer && (!std::isfinite(d.lo) || !std::isfinite(d.hi)))
            throw SchemaError("integer variable '" + d.name + "' must have finite bounds");
        decls.push_back(std::move(d));
    }

    ModelMinlp m;
    std::map<std::string, int> vars;
    std::vector<const VarDecl*> cont, ints;
    for (const auto& d : decls) (d.integer ? ints : cont).push_back(&d);
    m.nx = static_cast<int>(cont.size());
    m.ny = static_cast<int>(ints.size());
    m.x_lo.resize(m.nx);
    m.x_hi.resize(m.nx);
    m.y_lo.resize(m.ny);
    m.y_hi.resize(m.ny);
    for (int i = 0; i < m.nx; ++i) {
        if (!vars.emplace(cont[i]->name, i).second)
            throw SchemaError("duplicate variable name '" + cont[i]->name + "'");
        m.x_names.push_back(cont[i]->name);
        m.x_lo[i] = cont[i]->lo;
        m.x_hi[i] = cont[i]->hi;
    }
    for (int j = 0; j < m.ny; ++j) {
        if (!vars.emplace(ints[j]->name, m.nx + j).second)
            throw SchemaError("duplicate variable name '" + ints[j]->name + "'");
        m.y_names.push_back(ints[j]->name);
        m.y_lo[j] = ints[j]->lo;
        m.y_hi[j] = ints[j]->hi;
    }

    m.objective = parse_expression(doc["objective"].get<std::string>(), vars);

    if (doc.contains("constraints")) {
        if (!doc["constraints"].is_array()) throw SchemaError("'constraints' must be an array");
        int idx = 0;
        for (const auto& c : doc["constraints"]) {
            if (!c.is_object() || !c.contains("expr") || !c["expr"].is_string())
                throw SchemaError("constraint " + std::to_string(idx) + ": needs an 'expr' string");
            const std::string cmp = c.value("cmp", std::string("<="));
            if (cmp != "<=" && cmp != "=")
                throw SchemaError("constraint " + std::to_string(idx) + ": cmp must be '<=' or '='");
            const double rhs = c.value("rhs", 0.0);
            Expr e = parse_expression(c["expr"].get<std::string>(), vars);
            if (rhs != 0.0) e = e - rhs;
            (cmp == "=" ? m.eq : m.ineq).push_back(e);
            ++idx;
        }
    }

    if (doc.contains("objective_split")) {
        const auto& s = doc["objective_split"];
        if (!s.is_object() || !s.contains("f1") || !s["f1"].is_array())
            throw SchemaError("'objective_split' needs an 'f1' array");
        ObjectiveSplit split;
        for (const auto& f : s["f1"]) {
            if (!f.is_string()) throw SchemaError("'objective_split.f1' entries must be strings");
            split.f1.push_back(parse_expression(f.get<std::string>(), vars));
        }
        split.f2 = s.contains("f2") ? parse_expression(s["f2"].get<std::string>(), vars)
                                    : Expr::constant(0.0);
        m.split = std::move(split);
    }

    m.declared_convex = doc.value("convex", false);
    m.validate();
    return m;
}

ModelMinlp parse_problem(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open problem file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_problem_string(buf.str());
}

} // namespace sbmiqp
