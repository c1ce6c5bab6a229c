#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "fskg/num/tensor.hpp"

namespace fskg::num {

using NodeId = std::int32_t;

// Reverse-mode tape over vector-valued nodes. Scalars are 1-wide vectors.
// Operations are evaluated eagerly; backward() replays the tape once and
// accumulates d(loss)/d(param) for every parameter in the store (parameters
// not on a path to the loss get exactly zero).
//
// A tape is single-threaded; build one per concurrent task.
class GradTape {
public:
    explicit GradTape(const ParamStore& params) : params_(&params) {}

    // --- leaves ---
    NodeId constant(Vector v);
    NodeId scalar_constant(double x) { return constant(Vector{x}); }
    NodeId param_vec(ParamId id);              // whole vector parameter (cols == 1)
    NodeId param_row(ParamId id, std::size_t row);  // one row of a matrix parameter

    // --- vector ops ---
    // y = W x + b
    NodeId linear(NodeId x, ParamId w, ParamId b);
    NodeId relu(NodeId x);
    NodeId leaky_relu(NodeId x, double slope);
    NodeId add(const std::vector<NodeId>& xs);
    NodeId sub(NodeId a, NodeId b);
    NodeId scale(NodeId x, double c);
    NodeId concat(NodeId a, NodeId b);
    NodeId mean(const std::vector<NodeId>& xs);
    NodeId div_scalar(NodeId v, NodeId s);     // elementwise v / s
    NodeId stop_gradient(NodeId x);

    // --- vector -> scalar ---
    NodeId norm(NodeId v);                     // ||v||_2, subgradient 0 at v = 0
    NodeId cosine(NodeId u, NodeId v);         // 0 when either norm < 1e-12

    // --- scalar ops ---
    NodeId hinge(NodeId s);                    // max(0, x), subgradient 0 at x = 0
    NodeId scalar_add(NodeId a, NodeId b);
    NodeId scalar_sub(NodeId a, NodeId b);
    NodeId scalar_add_const(NodeId a, double c);
    NodeId scalar_scale(NodeId a, double c);
    NodeId scalar_mean(const std::vector<NodeId>& xs);

    const Vector& value(NodeId id) const { return nodes_[static_cast<std::size_t>(id)].value; }
    double scalar_value(NodeId id) const;

    // Gradient of a scalar loss node w.r.t. every parameter.
    GradMap backward(NodeId loss) const;

    // Gradient of a scalar loss w.r.t. one interior node (used by the
    // relation-meta refinement); parameters are not touched.
    Vector grad_wrt(NodeId loss, NodeId target) const;

    std::size_t node_count() const { return nodes_.size(); }

private:
    enum class Op : std::uint8_t {
        ConstVec,
        ParamVec,
        ParamRow,
        Linear,
        Relu,
        LeakyRelu,
        AddN,
        Sub,
        Scale,
        Concat,
        MeanN,
        DivScalar,
        StopGrad,
        Norm,
        Cosine,
        Hinge,
        ScalarAdd,
        ScalarSub,
        ScalarAddConst,
        ScalarScale,
        ScalarMeanN,
    };

    struct Node {
        Op op;
        std::array<NodeId, 2> in{-1, -1};
        std::vector<NodeId> in_list;  // AddN / MeanN only
        ParamId pid = -1;
        ParamId pid2 = -1;
        std::int32_t row = -1;
        double aux = 0.0;
        Vector value;
    };

    NodeId push(Node n) {
        nodes_.push_back(std::move(n));
        return static_cast<NodeId>(nodes_.size() - 1);
    }

    const Node& node(NodeId id) const { return nodes_[static_cast<std::size_t>(id)]; }
    void require_same_dim(const char* op, NodeId a, NodeId b) const;
    void backprop(NodeId loss, std::vector<Vector>& adjoint, GradMap* grads) const;

    const ParamStore* params_;
    std::vector<Node> nodes_;
};

} // namespace fskg::num
