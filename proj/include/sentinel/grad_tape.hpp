#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "sentinel/tensor.hpp"

namespace sentinel::numerics {

// Reverse-mode tape over the fixed primitive set the capsule network
// needs. Nodes are recorded in creation order, which is topological by
// construction; backward() replays them in reverse and accumulates
// d(loss)/d(node) for every node, leaves included. A tape is single-owner
// and single-use: build one computation rooted at one scalar, call
// backward once, read gradients.
class GradTape {
public:
    struct Ref {
        std::size_t index;
    };

    GradTape() = default;
    GradTape(const GradTape&) = delete;
    GradTape& operator=(const GradTape&) = delete;

    // Leaf tensor (input, parameter or constant). Rejects non-finite data.
    Ref leaf(Tensor value);

    // Generic primitives.
    Ref reshape(Ref x, Shape shape);
    Ref relu(Ref x);
    Ref conv1d(Ref image, Ref filters);
    Ref matvec(Ref m, Ref x);
    Ref add(Ref a, Ref b);
    Ref scale(Ref x, double c);
    Ref sum(Ref x);
    Ref dot(Ref a, Ref b);
    Ref norm(Ref x);
    Ref element(Ref v, std::size_t i);
    Ref squash(Ref s);
    Ref squash_rows(Ref s);
    Ref softmax(Ref x);
    Ref softmax_rows(Ref x);
    Ref sparse_ce(Ref probs, std::size_t label);

    // Capsule-layer primitives. Shapes:
    //   caps_project:    (pc, pcd, f) x (f)        -> (pc, pcd)
    //   caps_predict:    (pc, n, ocd, pcd) x (pc, pcd) -> (pc, n, ocd)
    //   route_combine:   (pc, n) x (pc, n, ocd)    -> (n, ocd)
    //   route_agreement: (pc, n, ocd) x (n, ocd)   -> (pc, n)
    //   col_sum:         (r, c)                    -> (c)
    Ref caps_project(Ref proj, Ref features);
    Ref caps_predict(Ref transform, Ref u);
    Ref route_combine(Ref coupling, Ref predictions);
    Ref route_agreement(Ref predictions, Ref v);
    Ref col_sum(Ref m);

    // Backpropagates from a scalar-valued node. Gradients of nodes not on
    // a path to the loss stay zero.
    void backward(Ref loss);

    const Tensor& value(Ref r) const { return nodes_[r.index].value; }
    const Tensor& grad(Ref r) const { return nodes_[r.index].grad; }
    std::size_t node_count() const { return nodes_.size(); }

private:
    struct Node {
        Tensor value;
        Tensor grad;
        std::function<void(GradTape&, const Node&)> back;
    };

    Ref push(Tensor value, std::function<void(GradTape&, const Node&)> back);
    Tensor& grad_of(Ref r) { return nodes_[r.index].grad; }
    const Tensor& val_of(Ref r) const { return nodes_[r.index].value; }

    std::vector<Node> nodes_;
};

} // namespace sentinel::numerics

