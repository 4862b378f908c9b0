#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "nrdc/tensor.hpp"

namespace nrdc {

struct Node;
using Var = std::shared_ptr<Node>;

// Reverse-mode autodiff node. `backward` pulls this node's grad and
// accumulates into the parents' grads.
struct Node {
    Tensor val;
    Tensor grad;  // allocated lazily during backward()
    bool requires_grad = false;
    std::vector<Var> parents;
    std::function<void(Node&)> backward_fn;
    std::string name;  // non-empty for parameters

    void ensure_grad() {
        if (grad.numel() != val.numel()) grad = Tensor::zeros(val.shape);
    }
    void zero_grad() {
        for (auto& g : grad.d) g = 0.0;
    }
};

// While a NoGradGuard is alive, ops do not record the tape. Used for
// inference/encoding so long sequences don't hold graphs in memory.
struct NoGradGuard {
    NoGradGuard();
    ~NoGradGuard();
    NoGradGuard(const NoGradGuard&) = delete;
};
bool grad_enabled();

Var make_leaf(Tensor val, bool requires_grad = false);
Var make_node(Tensor val, std::vector<Var> parents, std::function<void(Node&)> backward_fn);

// Runs reverse-mode accumulation from `root` (must be scalar-valued).
void backward(const Var& root);

// Leaf copy of `v` that blocks gradient flow.
Var detach(const Var& v);

}  // namespace nrdc
