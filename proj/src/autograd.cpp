#include "nrdc/autograd.hpp"

#include <unordered_set>

namespace nrdc {

namespace {
int g_no_grad_depth = 0;
}

NoGradGuard::NoGradGuard() { ++g_no_grad_depth; }
NoGradGuard::~NoGradGuard() { --g_no_grad_depth; }
bool grad_enabled() { return g_no_grad_depth == 0; }

Var make_leaf(Tensor val, bool requires_grad) {
    auto n = std::make_shared<Node>();
    n->val = std::move(val);
    n->requires_grad = requires_grad && grad_enabled();
    return n;
}

Var make_node(Tensor val, std::vector<Var> parents, std::function<void(Node&)> backward_fn) {
    auto n = std::make_shared<Node>();
    n->val = std::move(val);
    if (grad_enabled()) {
        for (const auto& p : parents)
            if (p->requires_grad) n->requires_grad = true;
        if (n->requires_grad) {
            n->parents = std::move(parents);
            n->backward_fn = std::move(backward_fn);
        }
    }
    return n;
}

void backward(const Var& root) {
    // Topological order by iterative DFS, then reverse sweep.
    std::vector<Node*> order;
    std::unordered_set<Node*> seen;
    std::vector<std::pair<Node*, std::size_t>> stack;
    stack.push_back({root.get(), 0});
    seen.insert(root.get());
    while (!stack.empty()) {
        auto& [n, i] = stack.back();
        if (i < n->parents.size()) {
            Node* p = n->parents[i++].get();
            if (p->requires_grad && !seen.count(p)) {
                seen.insert(p);
                stack.push_back({p, 0});
            }
        } else {
            order.push_back(n);
            stack.pop_back();
        }
    }
    root->ensure_grad();
    root->grad.d[0] = 1.0;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        Node* n = *it;
        if (n->backward_fn) {
            for (const auto& p : n->parents)
                if (p->requires_grad) p->ensure_grad();
            n->backward_fn(*n);
        }
    }
}

Var detach(const Var& v) { return make_leaf(v->val, false); }

}  // namespace nrdc
