#include "deepiv/dataset.hpp"

#include <cmath>
#include <string>

#include "deepiv/errors.hpp"

namespace deepiv {

void Dataset::validate() const {
    const std::size_t rows = y.size();
    if (rows == 0) throw DomainError("dataset: empty sample");
    if (x.rows() != rows)
        throw ShapeMismatch("dataset: x has " + std::to_string(x.rows()) +
                            " rows, y has " + std::to_string(rows));
    if (z.rows() != rows)
        throw ShapeMismatch("dataset: z has " + std::to_string(z.rows()) +
                            " rows, y has " + std::to_string(rows));
    if (x.cols() < 1 || z.cols() < 1)
        throw DomainError("dataset: q and d must both be >= 1");
    if (r && r->rows() != rows)
        throw ShapeMismatch("dataset: r has " + std::to_string(r->rows()) +
                            " rows, y has " + std::to_string(rows));
    for (double v : y)
        if (!std::isfinite(v)) throw DomainError("dataset: non-finite entry in y");
    if (!all_finite(x)) throw DomainError("dataset: non-finite entry in x");
    if (!all_finite(z)) throw DomainError("dataset: non-finite entry in z");
    if (r && !all_finite(*r)) throw DomainError("dataset: non-finite entry in r");
}

}  // namespace deepiv
