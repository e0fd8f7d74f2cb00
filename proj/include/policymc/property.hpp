#pragma once

#include <cstdint>
#include <string>

#include "policymc/rational.hpp"

namespace policymc {

enum class QueryKind { ExactProbability, Threshold };
enum class Comparator { Lt, Le, Gt, Ge };
enum class PathKind { Eventually, BoundedEventually, Until };

/// Parsed reachability query: `P=? [ F "goal" ]`, `P<=0.05 [ F<=20 "bad" ]`,
/// `P=? [ "safe" U "goal" ]`.
struct PctlQuery {
    QueryKind kind = QueryKind::ExactProbability;
    Comparator comparator = Comparator::Le; // threshold queries only
    Rational bound = Rational(0);           // threshold queries only
    PathKind path = PathKind::Eventually;
    std::string target;            // F / F<=B target, or the U right operand
    std::string constraint;        // U left operand
    std::int64_t step_bound = 0;   // bounded eventually only
};

PctlQuery parse_property(const std::string& text);

/// Canonical form; `parse_property(print_property(q))` equals `q`.
std::string print_property(const PctlQuery& q);

bool query_equal(const PctlQuery& a, const PctlQuery& b);

} // namespace policymc
