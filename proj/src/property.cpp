#include "policymc/property.hpp"

#include <cctype>

#include "policymc/errors.hpp"

namespace policymc {

namespace {

class PropScanner {
  public:
    explicit PropScanner(const std::string& s) : s_(s) {}

    void skip_space() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    bool eat(const std::string& lit) {
        skip_space();
        if (s_.compare(pos_, lit.size(), lit) == 0) { pos_ += lit.size(); return true; }
        return false;
    }

    void expect(const std::string& lit) {
        if (!eat(lit)) fail("expected '" + lit + "'");
    }

    std::string string_literal() {
        skip_space();
        if (pos_ >= s_.size() || s_[pos_] != '"') fail("expected a quoted label");
        std::size_t end = s_.find('"', pos_ + 1);
        if (end == std::string::npos) fail("unterminated label string");
        std::string out = s_.substr(pos_ + 1, end - pos_ - 1);
        pos_ = end + 1;
        return out;
    }

    std::int64_t integer() {
        skip_space();
        std::size_t start = pos_;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        if (pos_ == start) fail("expected an integer");
        return std::stoll(s_.substr(start, pos_ - start));
    }

    Rational number() {
        skip_space();
        std::size_t start = pos_;
        while (pos_ < s_.size() &&
               (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.'))
            ++pos_;
        if (pos_ == start) fail("expected a probability bound");
        std::string text = s_.substr(start, pos_ - start);
        auto dot = text.find('.');
        if (dot == std::string::npos) return Rational(std::stoll(text));
        std::string digits = text.substr(0, dot) + text.substr(dot + 1);
        std::int64_t den = 1;
        for (std::size_t i = dot + 1; i < text.size(); ++i) den *= 10;
        return Rational(digits.empty() ? 0 : std::stoll(digits), den);
    }

    bool at_end() {
        skip_space();
        return pos_ >= s_.size();
    }

    [[noreturn]] void fail(const std::string& msg) {
        throw ParseError("property syntax error: " + msg, 1, static_cast<int>(pos_) + 1);
    }

  private:
    const std::string& s_;
    std::size_t pos_ = 0;
};

} // namespace

PctlQuery parse_property(const std::string& text) {
    PropScanner sc(text);
    PctlQuery q;
    sc.expect("P");
    if (sc.eat("=?")) {
        q.kind = QueryKind::ExactProbability;
    } else {
        q.kind = QueryKind::Threshold;
        if (sc.eat("<=")) q.comparator = Comparator::Le;
        else if (sc.eat(">=")) q.comparator = Comparator::Ge;
        else if (sc.eat("<")) q.comparator = Comparator::Lt;
        else if (sc.eat(">")) q.comparator = Comparator::Gt;
        else sc.fail("expected '=?' or a comparison operator");
        q.bound = sc.number();
        if (q.bound < Rational(0) || q.bound > Rational(1))
            sc.fail("probability bound " + q.bound.str() + " outside [0,1]");
    }
    sc.expect("[");
    if (sc.eat("F")) {
        if (sc.eat("<=")) {
            q.path = PathKind::BoundedEventually;
            q.step_bound = sc.integer();
            if (q.step_bound < 0) throw ModelError("negative step bound");
        } else {
            q.path = PathKind::Eventually;
        }
        q.target = sc.string_literal();
    } else {
        q.path = PathKind::Until;
        q.constraint = sc.string_literal();
        sc.expect("U");
        q.target = sc.string_literal();
    }
    sc.expect("]");
    if (!sc.at_end()) sc.fail("trailing characters after property");
    return q;
}

std::string print_property(const PctlQuery& q) {
    std::string out = "P";
    if (q.kind == QueryKind::ExactProbability) {
        out += "=?";
    } else {
        switch (q.comparator) {
        case Comparator::Lt: out += "<"; break;
        case Comparator::Le: out += "<="; break;
        case Comparator::Gt: out += ">"; break;
        case Comparator::Ge: out += ">="; break;
        }
        // Bounds parse from decimals or integers; denominators are powers of
        // ten, so a fraction prints back through the same grammar only via
        // its decimal expansion.
        out += rational_decimal(q.bound);
    }
    out += " [ ";
    switch (q.path) {
    case PathKind::Eventually:
        out += "F \"" + q.target + "\"";
        break;
    case PathKind::BoundedEventually:
        out += "F<=" + std::to_string(q.step_bound) + " \"" + q.target + "\"";
        break;
    case PathKind::Until:
        out += "\"" + q.constraint + "\" U \"" + q.target + "\"";
        break;
    }
    out += " ]";
    return out;
}

bool query_equal(const PctlQuery& a, const PctlQuery& b) {
    if (a.kind != b.kind || a.path != b.path) return false;
    if (a.kind == QueryKind::Threshold &&
        (a.comparator != b.comparator || a.bound != b.bound))
        return false;
    if (a.path == PathKind::BoundedEventually && a.step_bound != b.step_bound) return false;
    if (a.path == PathKind::Until && a.constraint != b.constraint) return false;
    return a.target == b.target;
}

} // namespace policymc
