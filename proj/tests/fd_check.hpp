#pragma once

// Central finite-difference gradient checking shared by the unit tests and
// the acceptance gate.

#include <cmath>
#include <functional>
#include <string>

#include "fskg/num/tensor.hpp"

namespace fskg::testutil {

struct FdMismatch {
    bool ok = true;
    std::string where;
    double analytic = 0.0;
    double numeric = 0.0;
};

// Compares `grads` against central differences of `loss_fn` for every scalar
// of every parameter in `ids`. `loss_fn` must recompute the loss from the
// current store values.
inline FdMismatch check_gradients(num::ParamStore& store, const std::vector<num::ParamId>& ids,
                                  const num::GradMap& grads,
                                  const std::function<double()>& loss_fn, double h = 1e-6,
                                  double rel_tol = 1e-4, double abs_tol = 1e-7) {
    for (num::ParamId id : ids) {
        auto& vals = store.values(id);
        for (std::size_t i = 0; i < vals.size(); ++i) {
            const double keep = vals[i];
            vals[i] = keep + h;
            const double up = loss_fn();
            vals[i] = keep - h;
            const double down = loss_fn();
            vals[i] = keep;
            const double numeric = (up - down) / (2.0 * h);
            const double analytic = grads[id][i];
            const double err = std::abs(analytic - numeric);
            const double scale = std::max(std::abs(analytic), std::abs(numeric));
            if (err > abs_tol && err > rel_tol * scale) {
                return {false,
                        store.name(id) + "[" + std::to_string(i) + "]",
                        analytic, numeric};
            }
        }
    }
    return {};
}

} // namespace fskg::testutil
