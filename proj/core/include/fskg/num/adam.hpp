#pragma once

#include <cstdint>
#include <vector>

#include "fskg/num/tensor.hpp"

namespace fskg::num {

struct AdamConfig {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// Adam with bias correction over an explicit parameter registry. The
// registry is the single source of truth for what a training stage may
// update: anything not registered is provably untouched.
class Adam {
public:
    Adam(const ParamStore& store, std::vector<ParamId> registered, AdamConfig cfg = {});

    void step(ParamStore& store, const GradMap& grads, double lr);

    std::uint64_t step_count() const { return step_; }
    const std::vector<ParamId>& registered() const { return registered_; }

    // Total number of scalar learnables under this optimizer's control.
    std::size_t scalar_count() const { return n_scalars_; }

private:
    std::vector<ParamId> registered_;
    std::vector<std::vector<double>> m_;
    std::vector<std::vector<double>> v_;
    std::uint64_t step_ = 0;
    std::size_t n_scalars_ = 0;
    AdamConfig cfg_;
};

} // namespace fskg::num
