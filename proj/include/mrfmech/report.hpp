#pragma once

// Bound verification reports shared by the check suites.

#include <string>

#include "util.hpp"

namespace mrfmech {

struct BoundReport {
    std::string name;
    double lhs = 0.0;
    double rhs = 0.0;
    double slack = 0.0;  // rhs - lhs
    bool pass = false;
    std::string witness;
};

inline BoundReport make_report(std::string name, double lhs, double rhs, std::string witness = "") {
    BoundReport r;
    r.name = std::move(name);
    r.lhs = lhs;
    r.rhs = rhs;
    r.slack = rhs - lhs;
    r.pass = leq_tol(lhs, rhs);
    r.witness = std::move(witness);
    return r;
}

}  // namespace mrfmech
