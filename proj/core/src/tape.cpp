#include "fskg/num/tape.hpp"

#include <cmath>
#include <string>

namespace fskg::num {

namespace {

double dot(const Vector& a, const Vector& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(const Vector& a) { return std::sqrt(dot(a, a)); }

constexpr double kNormFloor = 1e-12;

std::string shape_str(std::size_t n) { return "[" + std::to_string(n) + "]"; }

} // namespace

void GradTape::require_same_dim(const char* op, NodeId a, NodeId b) const {
    if (node(a).value.size() != node(b).value.size()) {
        throw ShapeError(std::string(op) + ": dimension mismatch " +
                         shape_str(node(a).value.size()) + " vs " +
                         shape_str(node(b).value.size()));
    }
}

NodeId GradTape::constant(Vector v) {
    Node n;
    n.op = Op::ConstVec;
    n.value = std::move(v);
    return push(std::move(n));
}

NodeId GradTape::param_vec(ParamId id) {
    Node n;
    n.op = Op::ParamVec;
    n.pid = id;
    n.value = params_->values(id);
    return push(std::move(n));
}

NodeId GradTape::param_row(ParamId id, std::size_t row) {
    const std::size_t cols = params_->cols(id);
    const auto& v = params_->values(id);
    Node n;
    n.op = Op::ParamRow;
    n.pid = id;
    n.row = static_cast<std::int32_t>(row);
    n.value.assign(v.begin() + static_cast<std::ptrdiff_t>(row * cols),
                   v.begin() + static_cast<std::ptrdiff_t>((row + 1) * cols));
    return push(std::move(n));
}

NodeId GradTape::linear(NodeId x, ParamId w, ParamId b) {
    const std::size_t rows = params_->rows(w);
    const std::size_t cols = params_->cols(w);
    const Vector& xv = node(x).value;
    if (xv.size() != cols) {
        throw ShapeError("linear_forward: W is [" + std::to_string(rows) + "x" +
                         std::to_string(cols) + "] but x is " + shape_str(xv.size()));
    }
    const auto& wv = params_->values(w);
    const auto& bv = params_->values(b);
    if (bv.size() != rows) {
        throw ShapeError("linear_forward: b is " + shape_str(bv.size()) + " but W has " +
                         std::to_string(rows) + " rows");
    }
    Node n;
    n.op = Op::Linear;
    n.in[0] = x;
    n.pid = w;
    n.pid2 = b;
    n.value.assign(rows, 0.0);
    for (std::size_t r = 0; r < rows; ++r) {
        double s = bv[r];
        const double* wr = wv.data() + r * cols;
        for (std::size_t c = 0; c < cols; ++c) s += wr[c] * xv[c];
        n.value[r] = s;
    }
    return push(std::move(n));
}

NodeId GradTape::relu(NodeId x) {
    Node n;
    n.op = Op::Relu;
    n.in[0] = x;
    n.value = node(x).value;
    for (double& v : n.value) v = v > 0.0 ? v : 0.0;
    return push(std::move(n));
}

NodeId GradTape::leaky_relu(NodeId x, double slope) {
    Node n;
    n.op = Op::LeakyRelu;
    n.in[0] = x;
    n.aux = slope;
    n.value = node(x).value;
    for (double& v : n.value) v = v > 0.0 ? v : slope * v;
    return push(std::move(n));
}

NodeId GradTape::add(const std::vector<NodeId>& xs) {
    if (xs.empty()) throw ContractError("add: empty operand list");
    Node n;
    n.op = Op::AddN;
    n.in_list = xs;
    n.value = node(xs[0]).value;
    for (std::size_t i = 1; i < xs.size(); ++i) {
        require_same_dim("add", xs[0], xs[i]);
        const Vector& v = node(xs[i]).value;
        for (std::size_t j = 0; j < v.size(); ++j) n.value[j] += v[j];
    }
    return push(std::move(n));
}

NodeId GradTape::sub(NodeId a, NodeId b) {
    require_same_dim("sub", a, b);
    Node n;
    n.op = Op::Sub;
    n.in[0] = a;
    n.in[1] = b;
    n.value = node(a).value;
    const Vector& bv = node(b).value;
    for (std::size_t j = 0; j < bv.size(); ++j) n.value[j] -= bv[j];
    return push(std::move(n));
}

NodeId GradTape::scale(NodeId x, double c) {
    Node n;
    n.op = Op::Scale;
    n.in[0] = x;
    n.aux = c;
    n.value = node(x).value;
    for (double& v : n.value) v *= c;
    return push(std::move(n));
}

NodeId GradTape::concat(NodeId a, NodeId b) {
    Node n;
    n.op = Op::Concat;
    n.in[0] = a;
    n.in[1] = b;
    n.value = node(a).value;
    const Vector& bv = node(b).value;
    n.value.insert(n.value.end(), bv.begin(), bv.end());
    n.aux = static_cast<double>(node(a).value.size());
    return push(std::move(n));
}

NodeId GradTape::mean(const std::vector<NodeId>& xs) {
    if (xs.empty()) throw ContractError("mean: empty operand list");
    NodeId s = add(xs);
    return scale(s, 1.0 / static_cast<double>(xs.size()));
}

NodeId GradTape::div_scalar(NodeId v, NodeId s) {
    if (node(s).value.size() != 1) throw ContractError("div_scalar: divisor is not scalar");
    Node n;
    n.op = Op::DivScalar;
    n.in[0] = v;
    n.in[1] = s;
    const double sv = node(s).value[0];
    n.value = node(v).value;
    for (double& x : n.value) x /= sv;
    return push(std::move(n));
}

NodeId GradTape::stop_gradient(NodeId x) {
    Node n;
    n.op = Op::StopGrad;
    n.in[0] = x;
    n.value = node(x).value;
    return push(std::move(n));
}

NodeId GradTape::norm(NodeId v) {
    Node n;
    n.op = Op::Norm;
    n.in[0] = v;
    n.value = Vector{norm2(node(v).value)};
    return push(std::move(n));
}

NodeId GradTape::cosine(NodeId u, NodeId v) {
    require_same_dim("cosine_similarity", u, v);
    const double nu = norm2(node(u).value);
    const double nv = norm2(node(v).value);
    Node n;
    n.op = Op::Cosine;
    n.in[0] = u;
    n.in[1] = v;
    // zero-norm rule: a masked (all-zero) modality row is "similar to nothing"
    n.value = Vector{(nu < kNormFloor || nv < kNormFloor)
                         ? 0.0
                         : dot(node(u).value, node(v).value) / (nu * nv)};
    return push(std::move(n));
}

NodeId GradTape::hinge(NodeId s) {
    if (node(s).value.size() != 1) throw ContractError("hinge: input is not scalar");
    Node n;
    n.op = Op::Hinge;
    n.in[0] = s;
    n.value = Vector{node(s).value[0] > 0.0 ? node(s).value[0] : 0.0};
    return push(std::move(n));
}

NodeId GradTape::scalar_add(NodeId a, NodeId b) {
    require_same_dim("scalar_add", a, b);
    Node n;
    n.op = Op::ScalarAdd;
    n.in[0] = a;
    n.in[1] = b;
    n.value = Vector{node(a).value[0] + node(b).value[0]};
    return push(std::move(n));
}

NodeId GradTape::scalar_sub(NodeId a, NodeId b) {
    require_same_dim("scalar_sub", a, b);
    Node n;
    n.op = Op::ScalarSub;
    n.in[0] = a;
    n.in[1] = b;
    n.value = Vector{node(a).value[0] - node(b).value[0]};
    return push(std::move(n));
}

NodeId GradTape::scalar_add_const(NodeId a, double c) {
    Node n;
    n.op = Op::ScalarAddConst;
    n.in[0] = a;
    n.aux = c;
    n.value = Vector{node(a).value[0] + c};
    return push(std::move(n));
}

NodeId GradTape::scalar_scale(NodeId a, double c) {
    Node n;
    n.op = Op::ScalarScale;
    n.in[0] = a;
    n.aux = c;
    n.value = Vector{node(a).value[0] * c};
    return push(std::move(n));
}

NodeId GradTape::scalar_mean(const std::vector<NodeId>& xs) {
    if (xs.empty()) throw ContractError("scalar_mean: empty operand list");
    Node n;
    n.op = Op::ScalarMeanN;
    n.in_list = xs;
    double s = 0.0;
    for (NodeId x : xs) {
        if (node(x).value.size() != 1) throw ContractError("scalar_mean: non-scalar operand");
        s += node(x).value[0];
    }
    n.value = Vector{s / static_cast<double>(xs.size())};
    return push(std::move(n));
}

double GradTape::scalar_value(NodeId id) const {
    if (node(id).value.size() != 1) throw ContractError("scalar_value: node is not scalar");
    return node(id).value[0];
}

void GradTape::backprop(NodeId loss, std::vector<Vector>& adjoint, GradMap* grads) const {
    if (node(loss).value.size() != 1) throw ContractError("backward: loss is not scalar");
    adjoint.assign(nodes_.size(), Vector{});
    adjoint[static_cast<std::size_t>(loss)] = Vector{1.0};

    auto acc = [&](NodeId id, std::size_t dim) -> Vector& {
        Vector& a = adjoint[static_cast<std::size_t>(id)];
        if (a.empty()) a.assign(dim, 0.0);
        return a;
    };

    for (std::int64_t i = loss; i >= 0; --i) {
        const Node& n = nodes_[static_cast<std::size_t>(i)];
        const Vector& ybar = adjoint[static_cast<std::size_t>(i)];
        if (ybar.empty()) continue;

        switch (n.op) {
        case Op::ConstVec:
            break;
        case Op::ParamVec:
            if (grads) {
                auto& g = (*grads)[n.pid];
                for (std::size_t j = 0; j < ybar.size(); ++j) g[j] += ybar[j];
            }
            break;
        case Op::ParamRow:
            if (grads) {
                auto& g = (*grads)[n.pid];
                const std::size_t off = static_cast<std::size_t>(n.row) * params_->cols(n.pid);
                for (std::size_t j = 0; j < ybar.size(); ++j) g[off + j] += ybar[j];
            }
            break;
        case Op::Linear: {
            const std::size_t rows = params_->rows(n.pid);
            const std::size_t cols = params_->cols(n.pid);
            const auto& wv = params_->values(n.pid);
            const Vector& xv = node(n.in[0]).value;
            Vector& xbar = acc(n.in[0], cols);
            for (std::size_t r = 0; r < rows; ++r) {
                const double yb = ybar[r];
                if (yb == 0.0) continue;
                const double* wr = wv.data() + r * cols;
                for (std::size_t c = 0; c < cols; ++c) xbar[c] += yb * wr[c];
            }
            if (grads) {
                auto& gw = (*grads)[n.pid];
                auto& gb = (*grads)[n.pid2];
                for (std::size_t r = 0; r < rows; ++r) {
                    const double yb = ybar[r];
                    if (yb == 0.0) continue;
                    gb[r] += yb;
                    double* gr = gw.data() + r * cols;
                    for (std::size_t c = 0; c < cols; ++c) gr[c] += yb * xv[c];
                }
            }
            break;
        }
        case Op::Relu: {
            const Vector& xv = node(n.in[0]).value;
            Vector& xbar = acc(n.in[0], xv.size());
            for (std::size_t j = 0; j < xv.size(); ++j)
                if (xv[j] > 0.0) xbar[j] += ybar[j];
            break;
        }
        case Op::LeakyRelu: {
            const Vector& xv = node(n.in[0]).value;
            Vector& xbar = acc(n.in[0], xv.size());
            for (std::size_t j = 0; j < xv.size(); ++j)
                xbar[j] += (xv[j] > 0.0 ? 1.0 : n.aux) * ybar[j];
            break;
        }
        case Op::AddN:
            for (NodeId x : n.in_list) {
                Vector& xbar = acc(x, ybar.size());
                for (std::size_t j = 0; j < ybar.size(); ++j) xbar[j] += ybar[j];
            }
            break;
        case Op::Sub: {
            Vector& abar = acc(n.in[0], ybar.size());
            Vector& bbar = acc(n.in[1], ybar.size());
            for (std::size_t j = 0; j < ybar.size(); ++j) {
                abar[j] += ybar[j];
                bbar[j] -= ybar[j];
            }
            break;
        }
        case Op::Scale: {
            Vector& xbar = acc(n.in[0], ybar.size());
            for (std::size_t j = 0; j < ybar.size(); ++j) xbar[j] += n.aux * ybar[j];
            break;
        }
        case Op::Concat: {
            const std::size_t split = static_cast<std::size_t>(n.aux);
            Vector& abar = acc(n.in[0], split);
            Vector& bbar = acc(n.in[1], ybar.size() - split);
            for (std::size_t j = 0; j < split; ++j) abar[j] += ybar[j];
            for (std::size_t j = split; j < ybar.size(); ++j) bbar[j - split] += ybar[j];
            break;
        }
        case Op::DivScalar: {
            const double sv = node(n.in[1]).value[0];
            const Vector& vv = node(n.in[0]).value;
            Vector& vbar = acc(n.in[0], vv.size());
            Vector& sbar = acc(n.in[1], 1);
            for (std::size_t j = 0; j < vv.size(); ++j) {
                vbar[j] += ybar[j] / sv;
                sbar[0] -= ybar[j] * vv[j] / (sv * sv);
            }
            break;
        }
        case Op::StopGrad:
            break;
        case Op::Norm: {
            const Vector& vv = node(n.in[0]).value;
            const double s = n.value[0];
            if (s >= kNormFloor) {
                Vector& vbar = acc(n.in[0], vv.size());
                for (std::size_t j = 0; j < vv.size(); ++j) vbar[j] += ybar[0] * vv[j] / s;
            }
            break;
        }
        case Op::Cosine: {
            const Vector& uv = node(n.in[0]).value;
            const Vector& vv = node(n.in[1]).value;
            const double nu = norm2(uv);
            const double nv = norm2(vv);
            if (nu >= kNormFloor && nv >= kNormFloor) {
                const double c = n.value[0];
                Vector& ubar = acc(n.in[0], uv.size());
                Vector& vbar = acc(n.in[1], vv.size());
                for (std::size_t j = 0; j < uv.size(); ++j) {
                    ubar[j] += ybar[0] * (vv[j] / (nu * nv) - c * uv[j] / (nu * nu));
                    vbar[j] += ybar[0] * (uv[j] / (nu * nv) - c * vv[j] / (nv * nv));
                }
            }
            break;
        }
        case Op::Hinge:
            if (node(n.in[0]).value[0] > 0.0) acc(n.in[0], 1)[0] += ybar[0];
            break;
        case Op::ScalarAdd:
            acc(n.in[0], 1)[0] += ybar[0];
            acc(n.in[1], 1)[0] += ybar[0];
            break;
        case Op::ScalarSub:
            acc(n.in[0], 1)[0] += ybar[0];
            acc(n.in[1], 1)[0] -= ybar[0];
            break;
        case Op::ScalarAddConst:
            acc(n.in[0], 1)[0] += ybar[0];
            break;
        case Op::ScalarScale:
            acc(n.in[0], 1)[0] += n.aux * ybar[0];
            break;
        case Op::ScalarMeanN: {
            const double w = 1.0 / static_cast<double>(n.in_list.size());
            for (NodeId x : n.in_list) acc(x, 1)[0] += w * ybar[0];
            break;
        }
        }
    }
}

GradMap GradTape::backward(NodeId loss) const {
    GradMap grads(*params_);
    std::vector<Vector> adjoint;
    backprop(loss, adjoint, &grads);
    return grads;
}

Vector GradTape::grad_wrt(NodeId loss, NodeId target) const {
    std::vector<Vector> adjoint;
    backprop(loss, adjoint, nullptr);
    Vector g = adjoint[static_cast<std::size_t>(target)];
    if (g.empty()) g.assign(node(target).value.size(), 0.0);
    return g;
}

} // namespace fskg::num
