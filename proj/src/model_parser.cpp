#include "policymc/model.hpp"

#include <cctype>
#include <map>
#include <set>
#include <sstream>

namespace policymc {

int ModelAst::var_index(const std::string& name) const {
    for (std::size_t i = 0; i < variables.size(); ++i)
        if (variables[i].name == name) return static_cast<int>(i);
    return -1;
}

namespace {

enum class Tok {
    End, Ident, Int, Decimal, String,
    LBracket, RBracket, LParen, RParen,
    Semicolon, Colon, Comma, Prime, Arrow, DotDot,
    Eq, Ne, Lt, Le, Gt, Ge,
    And, Or, Not, Plus, Minus, Star, Slash,
};

struct Token {
    Tok kind = Tok::End;
    std::string text;
    std::int64_t int_value = 0;
    int line = 1;
    int column = 1;
};

class Lexer {
  public:
    explicit Lexer(const std::string& src) : src_(src) { advance(); }

    const Token& peek() const { return current_; }

    Token next() {
        Token t = current_;
        advance();
        return t;
    }

  private:
    void advance() {
        skip_space();
        current_ = Token{};
        current_.line = line_;
        current_.column = column_;
        if (pos_ >= src_.size()) { current_.kind = Tok::End; return; }
        char c = src_[pos_];
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t start = pos_;
            while (pos_ < src_.size() &&
                   (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
                bump();
            current_.kind = Tok::Ident;
            current_.text = src_.substr(start, pos_ - start);
            return;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t start = pos_;
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])))
                bump();
            if (pos_ + 1 < src_.size() && src_[pos_] == '.' && src_[pos_ + 1] != '.') {
                bump();
                while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])))
                    bump();
                current_.kind = Tok::Decimal;
                current_.text = src_.substr(start, pos_ - start);
                return;
            }
            current_.kind = Tok::Int;
            current_.text = src_.substr(start, pos_ - start);
            try {
                current_.int_value = std::stoll(current_.text);
            } catch (const std::exception&) {
                throw ParseError("integer literal out of range", line_, current_.column);
            }
            return;
        }
        if (c == '"') {
            bump();
            std::size_t start = pos_;
            while (pos_ < src_.size() && src_[pos_] != '"') bump();
            if (pos_ >= src_.size())
                throw ParseError("unterminated string literal", current_.line, current_.column);
            current_.kind = Tok::String;
            current_.text = src_.substr(start, pos_ - start);
            bump();
            return;
        }
        bump();
        switch (c) {
        case '[': current_.kind = Tok::LBracket; return;
        case ']': current_.kind = Tok::RBracket; return;
        case '(': current_.kind = Tok::LParen; return;
        case ')': current_.kind = Tok::RParen; return;
        case ';': current_.kind = Tok::Semicolon; return;
        case ':': current_.kind = Tok::Colon; return;
        case ',': current_.kind = Tok::Comma; return;
        case '\'': current_.kind = Tok::Prime; return;
        case '+': current_.kind = Tok::Plus; return;
        case '*': current_.kind = Tok::Star; return;
        case '/': current_.kind = Tok::Slash; return;
        case '&': current_.kind = Tok::And; return;
        case '|': current_.kind = Tok::Or; return;
        case '=': current_.kind = Tok::Eq; return;
        case '-':
            if (pos_ < src_.size() && src_[pos_] == '>') { bump(); current_.kind = Tok::Arrow; }
            else current_.kind = Tok::Minus;
            return;
        case '!':
            if (pos_ < src_.size() && src_[pos_] == '=') { bump(); current_.kind = Tok::Ne; }
            else current_.kind = Tok::Not;
            return;
        case '<':
            if (pos_ < src_.size() && src_[pos_] == '=') { bump(); current_.kind = Tok::Le; }
            else current_.kind = Tok::Lt;
            return;
        case '>':
            if (pos_ < src_.size() && src_[pos_] == '=') { bump(); current_.kind = Tok::Ge; }
            else current_.kind = Tok::Gt;
            return;
        case '.':
            if (pos_ < src_.size() && src_[pos_] == '.') { bump(); current_.kind = Tok::DotDot; return; }
            throw ParseError("unexpected character '.'", current_.line, current_.column);
        default:
            throw ParseError(std::string("unexpected character '") + c + "'",
                             current_.line, current_.column);
        }
    }

    void skip_space() {
        while (pos_ < src_.size()) {
            char c = src_[pos_];
            if (c == '/' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '/') {
                while (pos_ < src_.size() && src_[pos_] != '\n') bump();
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                bump();
            } else {
                break;
            }
        }
    }

    void bump() {
        if (src_[pos_] == '\n') { ++line_; column_ = 1; }
        else ++column_;
        ++pos_;
    }

    const std::string& src_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int column_ = 1;
    Token current_;
};

std::string format_sum(const Rational& r) {
    std::ostringstream os;
    os << r.to_double();
    return os.str();
}

class ModelParser {
  public:
    explicit ModelParser(const std::string& src) : lex_(src) {}

    ModelAst parse() {
        expect_keyword("mdp");
        while (peek_keyword("const")) parse_const();
        expect_keyword("module");
        ast_.module_name = expect(Tok::Ident, "module name").text;
        while (true) {
            const Token& t = lex_.peek();
            if (t.kind == Tok::Ident && t.text == "endmodule") { lex_.next(); break; }
            if (t.kind == Tok::LBracket) parse_command();
            else if (t.kind == Tok::Ident) parse_variable();
            else throw ParseError("expected variable declaration, command or 'endmodule'",
                                  t.line, t.column);
        }
        while (lex_.peek().kind != Tok::End) {
            const Token& t = lex_.peek();
            if (t.kind != Tok::Ident)
                throw ParseError("expected 'label', 'rewards' or end of file", t.line, t.column);
            if (t.text == "label") parse_label();
            else if (t.text == "rewards") parse_rewards();
            else if (t.text == "module")
                throw ParseError("only a single module is supported", t.line, t.column);
            else
                throw ParseError("unexpected '" + t.text + "'", t.line, t.column);
        }
        return std::move(ast_);
    }

  private:
    void parse_const() {
        lex_.next(); // const
        expect_keyword("int");
        Token name = expect(Tok::Ident, "constant name");
        expect(Tok::Eq, "'='");
        ExprPtr e = parse_expr();
        expect(Tok::Semicolon, "';'");
        if (contains_var(*e))
            throw ParseError("constant '" + name.text + "' must be a constant expression",
                             name.line, name.column);
        if (consts_.count(name.text) || ast_.var_index(name.text) >= 0)
            throw ParseError("duplicate declaration of '" + name.text + "'",
                             name.line, name.column);
        consts_[name.text] = eval_expr(*e, {});
    }

    void parse_variable() {
        Token name = lex_.next();
        if (ast_.var_index(name.text) >= 0 || consts_.count(name.text))
            throw ParseError("duplicate variable '" + name.text + "'", name.line, name.column);
        expect(Tok::Colon, "':'");
        expect(Tok::LBracket, "'['");
        std::int64_t lo = parse_const_int();
        expect(Tok::DotDot, "'..'");
        std::int64_t hi = parse_const_int();
        expect(Tok::RBracket, "']'");
        if (lo > hi)
            throw ParseError("empty range for variable '" + name.text + "'",
                             name.line, name.column);
        expect_keyword("init");
        ExprPtr init = parse_expr();
        expect(Tok::Semicolon, "';'");
        if (contains_var(*init))
            throw ParseError("init expression of '" + name.text + "' must be constant",
                             name.line, name.column);
        std::int64_t v = eval_expr(*init, {});
        if (v < lo || v > hi)
            throw ParseError("out-of-range init " + std::to_string(v) + " for variable '" +
                                 name.text + "' with range [" + std::to_string(lo) + ".." +
                                 std::to_string(hi) + "]",
                             name.line, name.column);
        ast_.variables.push_back({name.text, lo, hi, std::move(init)});
    }

    void parse_command() {
        Token open = lex_.next(); // '['
        Token action = expect(Tok::Ident, "action label");
        expect(Tok::RBracket, "']'");
        Command cmd;
        cmd.action = action.text;
        cmd.source_line = open.line;
        cmd.guard = parse_expr();
        expect(Tok::Arrow, "'->'");
        Rational sum(0);
        while (true) {
            Branch br;
            br.prob = parse_probability();
            expect(Tok::Colon, "':'");
            br.updates = parse_update();
            if (br.prob <= Rational(0) || br.prob > Rational(1)) {
                throw ParseError("branch probability " + br.prob.str() + " outside (0,1]",
                                 open.line, open.column);
            }
            sum = sum + br.prob;
            cmd.branches.push_back(std::move(br));
            if (lex_.peek().kind == Tok::Plus) { lex_.next(); continue; }
            break;
        }
        expect(Tok::Semicolon, "';'");
        if (sum != Rational(1))
            throw ParseError("probabilities sum to " + format_sum(sum), open.line, open.column);
        ast_.commands.push_back(std::move(cmd));
    }

    std::vector<UpdateAssign> parse_update() {
        std::vector<UpdateAssign> updates;
        std::set<int> assigned;
        auto parse_assign = [&]() {
            Token name = expect(Tok::Ident, "variable name in update");
            int idx = ast_.var_index(name.text);
            if (idx < 0)
                throw ParseError("undeclared variable '" + name.text + "' in update",
                                 name.line, name.column);
            expect(Tok::Prime, "'''");
            expect(Tok::Eq, "'='");
            ExprPtr e = parse_expr();
            if (!assigned.insert(idx).second)
                throw ParseError("variable '" + name.text + "' assigned twice in one update",
                                 name.line, name.column);
            updates.push_back({idx, name.text, std::move(e)});
        };
        auto parse_group = [&]() {
            if (lex_.peek().kind == Tok::LParen) {
                lex_.next();
                parse_assign();
                while (lex_.peek().kind == Tok::And) { lex_.next(); parse_assign(); }
                expect(Tok::RParen, "')'");
            } else {
                parse_assign();
            }
        };
        parse_group();
        while (lex_.peek().kind == Tok::And) { lex_.next(); parse_group(); }
        return updates;
    }

    void parse_label() {
        lex_.next(); // label
        Token name = expect(Tok::String, "label name string");
        for (const auto& l : ast_.labels)
            if (l.name == name.text)
                throw ParseError("duplicate label \"" + name.text + "\"", name.line, name.column);
        expect(Tok::Eq, "'='");
        ExprPtr e = parse_expr();
        expect(Tok::Semicolon, "';'");
        ast_.labels.push_back({name.text, std::move(e)});
    }

    void parse_rewards() {
        lex_.next(); // rewards
        if (lex_.peek().kind == Tok::String) lex_.next(); // optional structure name
        while (true) {
            const Token& t = lex_.peek();
            if (t.kind == Tok::Ident && t.text == "endrewards") { lex_.next(); break; }
            RewardItem item;
            if (t.kind == Tok::LBracket) {
                lex_.next();
                item.action = expect(Tok::Ident, "action label").text;
                expect(Tok::RBracket, "']'");
            }
            item.guard = parse_expr();
            expect(Tok::Colon, "':'");
            bool negative = false;
            if (lex_.peek().kind == Tok::Minus) { lex_.next(); negative = true; }
            item.value = parse_probability_like();
            if (negative) item.value = Rational(0) - item.value;
            expect(Tok::Semicolon, "';'");
            ast_.rewards.push_back(std::move(item));
        }
    }

    // --- expressions -----------------------------------------------------

    ExprPtr parse_expr() { return parse_or(); }

    ExprPtr parse_or() {
        ExprPtr e = parse_and();
        while (lex_.peek().kind == Tok::Or) {
            lex_.next();
            e = make_binary(ExprOp::Or, std::move(e), parse_and());
        }
        return e;
    }

    ExprPtr parse_and() {
        ExprPtr e = parse_comparison();
        while (lex_.peek().kind == Tok::And) {
            lex_.next();
            e = make_binary(ExprOp::And, std::move(e), parse_comparison());
        }
        return e;
    }

    ExprPtr parse_comparison() {
        ExprPtr e = parse_additive();
        ExprOp op;
        switch (lex_.peek().kind) {
        case Tok::Eq: op = ExprOp::Eq; break;
        case Tok::Ne: op = ExprOp::Ne; break;
        case Tok::Lt: op = ExprOp::Lt; break;
        case Tok::Le: op = ExprOp::Le; break;
        case Tok::Gt: op = ExprOp::Gt; break;
        case Tok::Ge: op = ExprOp::Ge; break;
        default: return e;
        }
        lex_.next();
        return make_binary(op, std::move(e), parse_additive());
    }

    ExprPtr parse_additive() {
        ExprPtr e = parse_multiplicative();
        while (true) {
            Tok k = lex_.peek().kind;
            if (k == Tok::Plus) {
                lex_.next();
                e = make_binary(ExprOp::Add, std::move(e), parse_multiplicative());
            } else if (k == Tok::Minus) {
                lex_.next();
                e = make_binary(ExprOp::Sub, std::move(e), parse_multiplicative());
            } else {
                return e;
            }
        }
    }

    ExprPtr parse_multiplicative() {
        ExprPtr e = parse_unary();
        while (lex_.peek().kind == Tok::Star) {
            lex_.next();
            e = make_binary(ExprOp::Mul, std::move(e), parse_unary());
        }
        return e;
    }

    ExprPtr parse_unary() {
        if (lex_.peek().kind == Tok::Minus) {
            Token t = lex_.next();
            ExprPtr e = parse_unary();
            if (e->op == ExprOp::IntLit) return make_int(-e->value);
            return make_unary(ExprOp::Neg, std::move(e));
        }
        if (lex_.peek().kind == Tok::Not) {
            lex_.next();
            return make_unary(ExprOp::Not, parse_unary());
        }
        return parse_primary();
    }

    ExprPtr parse_primary() {
        Token t = lex_.next();
        switch (t.kind) {
        case Tok::Int:
            return make_int(t.int_value);
        case Tok::LParen: {
            ExprPtr e = parse_expr();
            expect(Tok::RParen, "')'");
            return e;
        }
        case Tok::Ident: {
            if (t.text == "true") return make_int(1);
            if (t.text == "false") return make_int(0);
            if (t.text == "mod" || t.text == "min" || t.text == "max") {
                ExprOp op = t.text == "mod" ? ExprOp::Mod
                          : t.text == "min" ? ExprOp::Min : ExprOp::Max;
                expect(Tok::LParen, "'('");
                ExprPtr a = parse_expr();
                expect(Tok::Comma, "','");
                ExprPtr b = parse_expr();
                expect(Tok::RParen, "')'");
                return make_binary(op, std::move(a), std::move(b));
            }
            auto it = consts_.find(t.text);
            if (it != consts_.end()) return make_int(it->second);
            int idx = ast_.var_index(t.text);
            if (idx < 0)
                throw ParseError("undeclared variable '" + t.text + "'", t.line, t.column);
            return make_var(idx, t.text);
        }
        default:
            throw ParseError("unexpected token in expression", t.line, t.column);
        }
    }

    // Probability literal: integer, fraction of integers, or decimal.
    Rational parse_probability() { return parse_probability_like(); }

    Rational parse_probability_like() {
        Token t = lex_.next();
        if (t.kind == Tok::Int) {
            std::int64_t num = t.int_value;
            if (lex_.peek().kind == Tok::Slash) {
                lex_.next();
                Token d = expect(Tok::Int, "denominator");
                return Rational(num, d.int_value);
            }
            return Rational(num);
        }
        if (t.kind == Tok::Decimal) return decimal_to_rational(t);
        throw ParseError("expected a probability or numeric value", t.line, t.column);
    }

    static Rational decimal_to_rational(const Token& t) {
        auto dot = t.text.find('.');
        std::string digits = t.text.substr(0, dot) + t.text.substr(dot + 1);
        std::size_t frac_len = t.text.size() - dot - 1;
        if (digits.size() > 18)
            throw ParseError("decimal literal has too many digits", t.line, t.column);
        std::int64_t num = digits.empty() ? 0 : std::stoll(digits);
        std::int64_t den = 1;
        for (std::size_t i = 0; i < frac_len; ++i) den *= 10;
        return Rational(num, den);
    }

    std::int64_t parse_const_int() {
        ExprPtr e = parse_expr();
        if (contains_var(*e)) {
            const Token& t = lex_.peek();
            throw ParseError("range bound must be a constant expression", t.line, t.column);
        }
        return eval_expr(*e, {});
    }

    static bool contains_var(const Expr& e) {
        if (e.op == ExprOp::Var) return true;
        if (e.lhs && contains_var(*e.lhs)) return true;
        if (e.rhs && contains_var(*e.rhs)) return true;
        return false;
    }

    Token expect(Tok kind, const std::string& what) {
        Token t = lex_.next();
        if (t.kind != kind)
            throw ParseError("expected " + what, t.line, t.column);
        return t;
    }

    void expect_keyword(const std::string& kw) {
        Token t = lex_.next();
        if (t.kind != Tok::Ident || t.text != kw)
            throw ParseError("expected '" + kw + "'", t.line, t.column);
    }

    bool peek_keyword(const std::string& kw) {
        const Token& t = lex_.peek();
        return t.kind == Tok::Ident && t.text == kw;
    }

    Lexer lex_;
    ModelAst ast_;
    std::map<std::string, std::int64_t> consts_;
};

} // namespace

ModelAst parse_model(const std::string& source_text) {
    return ModelParser(source_text).parse();
}

std::string print_model(const ModelAst& ast) {
    std::ostringstream os;
    os << "mdp\n\nmodule " << ast.module_name << "\n";
    for (const auto& v : ast.variables) {
        os << "  " << v.name << " : [" << v.lo << ".." << v.hi << "] init "
           << print_expr(*v.init) << ";\n";
    }
    for (const auto& c : ast.commands) {
        os << "  [" << c.action << "] " << print_expr(*c.guard) << " -> ";
        for (std::size_t i = 0; i < c.branches.size(); ++i) {
            if (i > 0) os << " + ";
            const Branch& b = c.branches[i];
            os << b.prob.str() << ":";
            for (std::size_t j = 0; j < b.updates.size(); ++j) {
                if (j > 0) os << " & ";
                os << "(" << b.updates[j].var_name << "'=" << print_expr(*b.updates[j].expr)
                   << ")";
            }
        }
        os << ";\n";
    }
    os << "endmodule\n";
    for (const auto& l : ast.labels)
        os << "\nlabel \"" << l.name << "\" = " << print_expr(*l.expr) << ";";
    if (!ast.labels.empty()) os << "\n";
    if (!ast.rewards.empty()) {
        os << "\nrewards\n";
        for (const auto& r : ast.rewards) {
            os << "  ";
            if (!r.action.empty()) os << "[" << r.action << "] ";
            os << print_expr(*r.guard) << " : " << r.value.str() << ";\n";
        }
        os << "endrewards\n";
    }
    return os.str();
}

namespace {

bool updates_equal(const std::vector<UpdateAssign>& a, const std::vector<UpdateAssign>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].var != b[i].var || a[i].var_name != b[i].var_name ||
            !expr_equal(*a[i].expr, *b[i].expr))
            return false;
    }
    return true;
}

} // namespace

bool model_equal(const ModelAst& a, const ModelAst& b) {
    if (a.module_name != b.module_name) return false;
    if (a.variables.size() != b.variables.size() || a.commands.size() != b.commands.size() ||
        a.labels.size() != b.labels.size() || a.rewards.size() != b.rewards.size())
        return false;
    for (std::size_t i = 0; i < a.variables.size(); ++i) {
        const auto& x = a.variables[i];
        const auto& y = b.variables[i];
        if (x.name != y.name || x.lo != y.lo || x.hi != y.hi || !expr_equal(*x.init, *y.init))
            return false;
    }
    for (std::size_t i = 0; i < a.commands.size(); ++i) {
        const auto& x = a.commands[i];
        const auto& y = b.commands[i];
        if (x.action != y.action || !expr_equal(*x.guard, *y.guard) ||
            x.branches.size() != y.branches.size())
            return false;
        for (std::size_t j = 0; j < x.branches.size(); ++j) {
            if (x.branches[j].prob != y.branches[j].prob ||
                !updates_equal(x.branches[j].updates, y.branches[j].updates))
                return false;
        }
    }
    for (std::size_t i = 0; i < a.labels.size(); ++i) {
        if (a.labels[i].name != b.labels[i].name ||
            !expr_equal(*a.labels[i].expr, *b.labels[i].expr))
            return false;
    }
    for (std::size_t i = 0; i < a.rewards.size(); ++i) {
        if (a.rewards[i].action != b.rewards[i].action ||
            a.rewards[i].value != b.rewards[i].value ||
            !expr_equal(*a.rewards[i].guard, *b.rewards[i].guard))
            return false;
    }
    return true;
}

} // namespace policymc
