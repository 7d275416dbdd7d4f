#include "sar2rgb/nn/autograd.hpp"

#include <unordered_set>

#include "sar2rgb/error.hpp"

namespace sar2rgb::nn {

namespace {
thread_local bool g_grad_enabled = true;
}

std::string Shape::str() const {
  return "[" + std::to_string(n) + "," + std::to_string(c) + "," + std::to_string(h) + "," + std::to_string(w) + "]";
}

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }
bool grad_enabled() { return g_grad_enabled; }

template <typename T>
Var<T> Var<T>::constant(Shape shape, std::vector<T> values) {
  if (values.size() != shape.size()) throw InvalidArgument("value count does not match shape " + shape.str());
  auto node = std::make_shared<Node<T>>();
  node->shape = shape;
  node->value = std::move(values);
  return Var(std::move(node));
}

template <typename T>
Var<T> Var<T>::parameter(Shape shape, std::vector<T> values) {
  auto v = constant(shape, std::move(values));
  v.node_->requires_grad = true;
  return v;
}

template <typename T>
T Var<T>::item() const {
  if (node_->value.size() != 1) throw InvalidArgument("item() on non-scalar of shape " + shape().str());
  return node_->value[0];
}

template <typename T>
void Var<T>::zero_grad() {
  if (node_) std::fill(node_->grad.begin(), node_->grad.end(), T(0));
}

template <typename T>
Var<T> Var<T>::detach() const {
  return constant(node_->shape, node_->value);
}

template <typename T>
void Var<T>::backward() const {
  if (node_->value.size() != 1) throw InvalidArgument("backward() needs a scalar root");
  if (!node_->requires_grad) return;
  // Iterative post-order DFS gives a topological order.
  std::vector<Node<T>*> order;
  std::unordered_set<Node<T>*> visited;
  std::vector<std::pair<Node<T>*, std::size_t>> stack{{node_.get(), 0}};
  visited.insert(node_.get());
  while (!stack.empty()) {
    auto& [n, next] = stack.back();
    if (next < n->parents.size()) {
      Node<T>* p = n->parents[next++].get();
      if (p->requires_grad && visited.insert(p).second) stack.emplace_back(p, 0);
    } else {
      order.push_back(n);
      stack.pop_back();
    }
  }
  node_->ensure_grad()[0] += T(1);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node<T>* n = *it;
    if (n->backward) {
      n->ensure_grad();
      n->backward(*n);
    }
  }
}

template <typename T>
std::shared_ptr<Node<T>> make_result(Shape shape, std::initializer_list<const Var<T>*> inputs) {
  auto node = std::make_shared<Node<T>>();
  node->shape = shape;
  node->value.resize(shape.size());
  if (!g_grad_enabled) return node;
  for (const Var<T>* in : inputs) {
    if (in != nullptr && in->requires_grad()) {
      node->requires_grad = true;
      node->parents.push_back(in->node());
    }
  }
  return node;
}

template class Var<float>;
template class Var<double>;
template std::shared_ptr<Node<float>> make_result(Shape, std::initializer_list<const Var<float>*>);
template std::shared_ptr<Node<double>> make_result(Shape, std::initializer_list<const Var<double>*>);

}  // namespace sar2rgb::nn
