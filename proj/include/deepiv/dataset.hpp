#pragma once

#include <optional>
#include <vector>

#include "deepiv/matrix.hpp"

namespace deepiv {

// One estimation sample: response y, endogenous regressors x (n × q),
// instruments z (n × d), and optional exogenous regressors r (n × q2).
struct Dataset {
    std::vector<double> y;
    Matrix x;  // n × q
    Matrix z;  // n × d
    std::optional<Matrix> r;  // n × q2

    std::size_t n() const { return y.size(); }
    std::size_t q() const { return x.cols(); }
    std::size_t d() const { return z.cols(); }

    // Throws ShapeMismatch / DomainError when row counts disagree, the
    // sample is empty, or any entry is non-finite.
    void validate() const;
};

}  // namespace deepiv
