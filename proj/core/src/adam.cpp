#include "fskg/num/adam.hpp"

#include <cmath>

namespace fskg::num {

Adam::Adam(const ParamStore& store, std::vector<ParamId> registered, AdamConfig cfg)
    : registered_(std::move(registered)), cfg_(cfg) {
    m_.reserve(registered_.size());
    v_.reserve(registered_.size());
    for (ParamId id : registered_) {
        const std::size_t n = store.values(id).size();
        m_.emplace_back(n, 0.0);
        v_.emplace_back(n, 0.0);
        n_scalars_ += n;
    }
}

void Adam::step(ParamStore& store, const GradMap& grads, double lr) {
    if (lr <= 0.0) throw ContractError("adam_step: lr must be positive");
    ++step_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_));
    for (std::size_t k = 0; k < registered_.size(); ++k) {
        const ParamId id = registered_[k];
        auto& p = store.values(id);
        const auto& g = grads[id];
        if (g.size() != p.size()) throw ShapeError("adam_step: grad shape mismatch");
        auto& m = m_[k];
        auto& v = v_[k];
        for (std::size_t i = 0; i < p.size(); ++i) {
            m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g[i];
            v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g[i] * g[i];
            const double mhat = m[i] / bc1;
            const double vhat = v[i] / bc2;
            p[i] -= lr * mhat / (std::sqrt(vhat) + cfg_.eps);
        }
    }
}

} // namespace fskg::num
