#include "numerics/tape.hpp"

#include <algorithm>
#include <cmath>

#include "common/error.hpp"
#include "numerics/ops.hpp"

namespace graphmem::num {

const Tensor &Var::value() const { return tape_->value(id_); }

Var Tape::push(Node node) {
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

Var Tape::constant(Tensor value) {
  return push(Node{std::move(value), {}, false, {}});
}

Var Tape::variable(Tensor value) {
  return push(Node{std::move(value), {}, true, {}});
}

Var Tape::record(Tensor value, std::initializer_list<Var> inputs,
                 Backward fn) {
  bool needs = std::any_of(inputs.begin(), inputs.end(),
                           [this](Var v) { return needs_grad(v); });
  return push(Node{std::move(value), {}, needs,
                   needs ? std::move(fn) : Backward{}});
}

Var Tape::record(Tensor value, const std::vector<Var> &inputs, Backward fn) {
  bool needs = std::any_of(inputs.begin(), inputs.end(),
                           [this](Var v) { return needs_grad(v); });
  return push(Node{std::move(value), {}, needs,
                   needs ? std::move(fn) : Backward{}});
}

Tensor &Tape::grad(std::size_t id) {
  auto &n = nodes_[id];
  if (n.grad.empty() && !n.value.empty())
    n.grad = Tensor(n.value.rows(), n.value.cols());
  return n.grad;
}

Tensor Tape::grad_of(Var v) const {
  const auto &n = nodes_[v.id()];
  if (n.grad.empty())
    return Tensor(n.value.rows(), n.value.cols());
  return n.grad;
}

void Tape::backward(Var loss) {
  const auto &lv = value(loss);
  if (lv.rows() != 1 || lv.cols() != 1)
    throw DimensionError("backward: loss must be (1x1), got "
                         + lv.shape_string());
  grad(loss.id()).fill(1.0);
  for (std::size_t id = loss.id() + 1; id-- > 0;) {
    auto &n = nodes_[id];
    if (!n.needs_grad || !n.backward || n.grad.empty())
      continue;
    n.backward(*this, id);
  }
}

namespace ad {

namespace {

Tape &tape_of(Var a, Var b) {
  if (&a.tape() != &b.tape())
    throw DimensionError("operands recorded on different tapes");
  return a.tape();
}

} // namespace

Var matmul(Var a, Var b) {
  Tape &t = tape_of(a, b);
  Tensor out = num::matmul(a.value(), b.value());
  std::size_t ia = a.id(), ib = b.id();
  return t.record(std::move(out), {a, b}, [ia, ib](Tape &t, std::size_t self) {
    const Tensor &g = t.grad(self);
    if (t.needs_grad(ia))
      matmul_nt_acc(g, t.value(ib), t.grad(ia));
    if (t.needs_grad(ib))
      matmul_tn_acc(t.value(ia), g, t.grad(ib));
  });
}

Var add(Var a, Var b) {
  Tape &t = tape_of(a, b);
  require_same_shape(a.value(), b.value(), "add");
  Tensor out = a.value();
  out.add_inplace(b.value());
  std::size_t ia = a.id(), ib = b.id();
  return t.record(std::move(out), {a, b}, [ia, ib](Tape &t, std::size_t self) {
    const Tensor &g = t.grad(self);
    if (t.needs_grad(ia))
      t.grad(ia).add_inplace(g);
    if (t.needs_grad(ib))
      t.grad(ib).add_inplace(g);
  });
}

Var add_col(Var a, Var v) {
  Tape &t = tape_of(a, v);
  const Tensor &av = a.value();
  const Tensor &vv = v.value();
  if (vv.cols() != 1 || vv.rows() != av.rows())
    throw DimensionError("add_col: cannot broadcast " + vv.shape_string()
                         + " over " + av.shape_string());
  Tensor out = av;
  for (std::size_t r = 0; r < out.rows(); ++r)
    for (std::size_t c = 0; c < out.cols(); ++c)
      out(r, c) += vv[r];
  std::size_t ia = a.id(), iv = v.id();
  return t.record(std::move(out), {a, v}, [ia, iv](Tape &t, std::size_t self) {
    const Tensor &g = t.grad(self);
    if (t.needs_grad(ia))
      t.grad(ia).add_inplace(g);
    if (t.needs_grad(iv)) {
      Tensor &gv = t.grad(iv);
      for (std::size_t r = 0; r < g.rows(); ++r)
        for (std::size_t c = 0; c < g.cols(); ++c)
          gv[r] += g(r, c);
    }
  });
}

Var affine(Var w, Var x, Var b) {
  Tape &t = tape_of(w, x);
  tape_of(w, b);
  Tensor out = num::affine(w.value(), x.value(), b.value());
  std::size_t iw = w.id(), ix = x.id(), ib = b.id();
  return t.record(std::move(out), {w, x, b},
                  [iw, ix, ib](Tape &t, std::size_t self) {
                    const Tensor &g = t.grad(self);
                    if (t.needs_grad(iw))
                      matmul_nt_acc(g, t.value(ix), t.grad(iw));
                    if (t.needs_grad(ix))
                      matmul_tn_acc(t.value(iw), g, t.grad(ix));
                    if (t.needs_grad(ib)) {
                      Tensor &gb = t.grad(ib);
                      for (std::size_t r = 0; r < g.rows(); ++r)
                        for (std::size_t c = 0; c < g.cols(); ++c)
                          gb[r] += g(r, c);
                    }
                  });
}

Var hadamard(Var a, Var b) {
  Tape &t = tape_of(a, b);
  require_same_shape(a.value(), b.value(), "hadamard");
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] *= b.value()[i];
  std::size_t ia = a.id(), ib = b.id();
  return t.record(std::move(out), {a, b}, [ia, ib](Tape &t, std::size_t self) {
    const Tensor &g = t.grad(self);
    if (t.needs_grad(ia)) {
      Tensor &ga = t.grad(ia);
      const Tensor &bv = t.value(ib);
      for (std::size_t i = 0; i < g.size(); ++i)
        ga[i] += g[i] * bv[i];
    }
    if (t.needs_grad(ib)) {
      Tensor &gb = t.grad(ib);
      const Tensor &av = t.value(ia);
      for (std::size_t i = 0; i < g.size(); ++i)
        gb[i] += g[i] * av[i];
    }
  });
}

Var scale(Var a, double s) {
  Tensor out = a.value();
  out.scale_inplace(s);
  std::size_t ia = a.id();
  return a.tape().record(std::move(out), {a},
                         [ia, s](Tape &t, std::size_t self) {
                           const Tensor &g = t.grad(self);
                           Tensor &ga = t.grad(ia);
                           for (std::size_t i = 0; i < g.size(); ++i)
                             ga[i] += s * g[i];
                         });
}

Var relu(Var a) {
  Tensor out = num::relu(a.value());
  std::size_t ia = a.id();
  return a.tape().record(std::move(out), {a}, [ia](Tape &t, std::size_t self) {
    const Tensor &g = t.grad(self);
    const Tensor &y = t.value(self);
    Tensor &ga = t.grad(ia);
    for (std::size_t i = 0; i < g.size(); ++i)
      if (y[i] > 0)
        ga[i] += g[i];
  });
}

Var tanh(Var a) {
  Tensor out = num::tanh(a.value());
  std::size_t ia = a.id();
  return a.tape().record(std::move(out), {a}, [ia](Tape &t, std::size_t self) {
    const Tensor &g = t.grad(self);
    const Tensor &y = t.value(self);
    Tensor &ga = t.grad(ia);
    for (std::size_t i = 0; i < g.size(); ++i)
      ga[i] += g[i] * (1.0 - y[i] * y[i]);
  });
}

Var sigmoid(Var a) {
  Tensor out = num::sigmoid(a.value());
  std::size_t ia = a.id();
  return a.tape().record(std::move(out), {a}, [ia](Tape &t, std::size_t self) {
    const Tensor &g = t.grad(self);
    const Tensor &y = t.value(self);
    Tensor &ga = t.grad(ia);
    for (std::size_t i = 0; i < g.size(); ++i)
      ga[i] += g[i] * y[i] * (1.0 - y[i]);
  });
}

Var softmax(Var a) {
  const Tensor &av = a.value();
  auto p = num::softmax(av.data());
  Tensor out(av.rows(), av.cols(), std::move(p));
  std::size_t ia = a.id();
  return a.tape().record(std::move(out), {a}, [ia](Tape &t, std::size_t self) {
    const Tensor &g = t.grad(self);
    const Tensor &y = t.value(self);
    double dot = 0;
    for (std::size_t i = 0; i < g.size(); ++i)
      dot += g[i] * y[i];
    Tensor &ga = t.grad(ia);
    for (std::size_t i = 0; i < g.size(); ++i)
      ga[i] += y[i] * (g[i] - dot);
  });
}

Var exp_shifted(Var a) {
  const Tensor &av = a.value();
  Tensor out = av;
  std::size_t arg = 0;
  if (!out.empty()) {
    arg = static_cast<std::size_t>(
        std::max_element(out.data().begin(), out.data().end()) - out.data().begin());
    const double mx = out[arg];
    for (auto &v: out.data())
      v = std::exp(v - mx);
  }
  std::size_t ia = a.id();
  return a.tape().record(std::move(out), {a}, [ia, arg](Tape &t, std::size_t self) {
    const Tensor &g = t.grad(self);
    const Tensor &y = t.value(self);
    Tensor &ga = t.grad(ia);
    double dot = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      ga[i] += g[i] * y[i];
      dot += g[i] * y[i];
    }
    // The shift is the maximum entry, so it contributes to that entry's gradient.
    if (!g.empty())
      ga[arg] -= dot;
  });
}

Var concat_rows(Var top, Var bottom) {
  Tape &t = tape_of(top, bottom);
  Tensor out = num::concat_rows(top.value(), bottom.value());
  std::size_t it = top.id(), ib = bottom.id();
  return t.record(std::move(out), {top, bottom},
                  [it, ib](Tape &t, std::size_t self) {
                    const Tensor &g = t.grad(self);
                    std::size_t split = t.value(it).size();
                    if (t.needs_grad(it)) {
                      Tensor &gt = t.grad(it);
                      for (std::size_t i = 0; i < split; ++i)
                        gt[i] += g[i];
                    }
                    if (t.needs_grad(ib)) {
                      Tensor &gb = t.grad(ib);
                      for (std::size_t i = 0; i < gb.size(); ++i)
                        gb[i] += g[split + i];
                    }
                  });
}

Var transpose(Var a) {
  Tensor out = a.value().transpose();
  std::size_t ia = a.id();
  return a.tape().record(std::move(out), {a}, [ia](Tape &t, std::size_t self) {
    const Tensor &g = t.grad(self);
    Tensor &ga = t.grad(ia);
    for (std::size_t r = 0; r < g.rows(); ++r)
      for (std::size_t c = 0; c < g.cols(); ++c)
        ga(c, r) += g(r, c);
  });
}

Var gate_mix(Var alpha, Var proposal, Var previous) {
  Tape &t = tape_of(alpha, proposal);
  tape_of(alpha, previous);
  const Tensor &al = alpha.value();
  const Tensor &pr = proposal.value();
  const Tensor &pv = previous.value();
  require_same_shape(al, pr, "gate_mix");
  require_same_shape(al, pv, "gate_mix");
  Tensor out(al.rows(), al.cols());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = al[i] * pr[i] + (1.0 - al[i]) * pv[i];
  std::size_t ia = alpha.id(), ip = proposal.id(), iq = previous.id();
  return t.record(
      std::move(out), {alpha, proposal, previous},
      [ia, ip, iq](Tape &t, std::size_t self) {
        const Tensor &g = t.grad(self);
        const Tensor &al = t.value(ia);
        if (t.needs_grad(ia)) {
          Tensor &ga = t.grad(ia);
          const Tensor &pr = t.value(ip);
          const Tensor &pv = t.value(iq);
          for (std::size_t i = 0; i < g.size(); ++i)
            ga[i] += g[i] * (pr[i] - pv[i]);
        }
        if (t.needs_grad(ip)) {
          Tensor &gp = t.grad(ip);
          for (std::size_t i = 0; i < g.size(); ++i)
            gp[i] += g[i] * al[i];
        }
        if (t.needs_grad(iq)) {
          Tensor &gq = t.grad(iq);
          for (std::size_t i = 0; i < g.size(); ++i)
            gq[i] += g[i] * (1.0 - al[i]);
        }
      });
}

Var binary_cross_entropy(Var prob, double label) {
  const Tensor &pv = prob.value();
  if (pv.size() != 1)
    throw DimensionError("binary_cross_entropy: expected (1x1), got "
                         + pv.shape_string());
  constexpr double kLo = 1e-12, kHi = 1.0 - 1e-12;
  const double raw = pv[0];
  const double p = std::clamp(raw, kLo, kHi);
  const double loss = -(label * std::log(p) + (1.0 - label) * std::log1p(-p));
  std::size_t ip = prob.id();
  return prob.tape().record(
      Tensor(1, 1, loss), {prob}, [ip, label, raw, p](Tape &t, std::size_t self) {
        if (raw < kLo || raw > kHi)
          return;
        double g = t.grad(self)[0];
        t.grad(ip)[0] += g * (-label / p + (1.0 - label) / (1.0 - p));
      });
}

Var sum(Var a) {
  double s = 0;
  for (double v: a.value().data())
    s += v;
  std::size_t ia = a.id();
  return a.tape().record(Tensor(1, 1, s), {a}, [ia](Tape &t, std::size_t self) {
    double g = t.grad(self)[0];
    Tensor &ga = t.grad(ia);
    for (auto &v: ga.data())
      v += g;
  });
}

} // namespace ad

} // namespace graphmem::num
