#include "graphmem/model.hpp"

#include <algorithm>

#include "common/error.hpp"
#include "numerics/ops.hpp"

namespace graphmem::model {

using num::Tensor;
using num::Var;
namespace ad = num::ad;

void ModelConfig::validate() const {
  if (input_dim < 1 || link_dim < 0 || relation_count < 1 || query_dim < 1
      || memory_size < 1 || controller_size < 1)
    throw ConfigError("model dimensions must be positive");
  if (embed == EmbedMode::kRaw && memory_size != input_dim)
    throw ConfigError("raw embedding needs memory_size == input_dim ("
                      + std::to_string(memory_size) + " vs "
                      + std::to_string(input_dim) + ")");
}

std::map<std::string, std::string> ModelConfig::to_metadata() const {
  return {
      {"model.input_dim", std::to_string(input_dim)},
      {"model.link_dim", std::to_string(link_dim)},
      {"model.relation_count", std::to_string(relation_count)},
      {"model.query_dim", std::to_string(query_dim)},
      {"model.memory_size", std::to_string(memory_size)},
      {"model.controller_size", std::to_string(controller_size)},
      {"model.embed", embed == EmbedMode::kRaw ? "raw" : "learned"},
      {"model.neighbor_weights",
       neighbor_weights == NeighborWeights::kLearned ? "learned" : "uniform"},
  };
}

ModelConfig
ModelConfig::from_metadata(const std::map<std::string, std::string> &m) {
  auto get = [&](const char *key) -> const std::string & {
    auto it = m.find(key);
    if (it == m.end())
      throw FormatError(std::string("checkpoint metadata lacks '") + key + "'");
    return it->second;
  };
  auto get_int = [&](const char *key) {
    try {
      return std::stoi(get(key));
    } catch (const std::logic_error &) {
      throw FormatError(std::string("checkpoint metadata '") + key
                        + "' is not an integer");
    }
  };
  ModelConfig c;
  c.input_dim = get_int("model.input_dim");
  c.link_dim = get_int("model.link_dim");
  c.relation_count = get_int("model.relation_count");
  c.query_dim = get_int("model.query_dim");
  c.memory_size = get_int("model.memory_size");
  c.controller_size = get_int("model.controller_size");
  c.embed = get("model.embed") == "raw" ? EmbedMode::kRaw : EmbedMode::kLearned;
  c.neighbor_weights = get("model.neighbor_weights") == "learned"
                           ? NeighborWeights::kLearned
                           : NeighborWeights::kUniform;
  return c;
}

Query Query::one_hot(int task, int task_count) {
  if (task < 0 || task >= task_count)
    throw DataError("task id " + std::to_string(task) + " outside [0, "
                    + std::to_string(task_count) + ")");
  Query q;
  q.q.assign(static_cast<std::size_t>(task_count), 0.0);
  q.q[static_cast<std::size_t>(task)] = 1.0;
  return q;
}

Query Query::constant(int size) {
  return Query{std::vector<double>(static_cast<std::size_t>(size), 1.0)};
}

num::ParamSet init_params(const ModelConfig &c, Rng &rng) {
  c.validate();
  const std::size_t km = c.memory_size, kh = c.controller_size;
  const std::size_t ctx = km + static_cast<std::size_t>(c.link_dim);
  num::ParamSet p;
  auto mat = [&](const std::string &name, std::size_t r, std::size_t cols) {
    p.add(name, num::glorot_uniform(r, cols, rng));
  };
  auto bias = [&](const std::string &name, std::size_t r) {
    p.add(name, Tensor(r, 1));
  };

  mat("query.W", kh, static_cast<std::size_t>(c.query_dim));
  bias("query.b", kh);
  if (c.embed == EmbedMode::kLearned) {
    mat("embed.W", km, static_cast<std::size_t>(c.input_dim));
    bias("embed.b", km);
  }
  mat("attn.W", km, km);
  mat("attn.U", km, kh);
  bias("attn.b", km);
  mat("attn.v", 1, km);

  mat("ctrl.W", kh, kh);
  mat("ctrl.U", kh, km);
  bias("ctrl.b", kh);
  mat("ctrl_gate.W", kh, kh);
  mat("ctrl_gate.U", kh, km);
  bias("ctrl_gate.b", kh);

  mat("mem.W", km, km);
  mat("mem.U", km, kh);
  for (int r = 1; r <= c.relation_count; ++r)
    mat("mem.V" + std::to_string(r), km, ctx);
  bias("mem.b", km);
  mat("mem_gate.W", km, km);
  mat("mem_gate.U", km, kh);
  for (int r = 1; r <= c.relation_count; ++r)
    mat("mem_gate.V" + std::to_string(r), km, ctx);
  bias("mem_gate.b", km);

  if (c.neighbor_weights == NeighborWeights::kLearned) {
    mat("nbr.W", km, km);
    mat("nbr.U", km, kh);
    bias("nbr.b", km);
    mat("nbr.v", 1, km);
  }

  mat("out.w", 1, kh);
  p.add("out.b", Tensor(1, 1));
  return p;
}

// ---------------------------------------------------------------------------

Pass::Pass(const ModelConfig &config, const num::BoundParams &params,
           const mol::MolecularGraph &graph, PassOptions options)
    : config_(config), params_(params), graph_(graph), options_(options),
      tape_(&params.tape()) {
  if (options_.training && options_.dropout > 0 && options_.rng == nullptr)
    throw ConfigError("dropout during training needs a random stream");
  if (graph.relation_count() > config.relation_count)
    throw DimensionError("graph has " + std::to_string(graph.relation_count())
                         + " relations but the model was built for "
                         + std::to_string(config.relation_count));
  if (graph.edge_count() > 0 && graph.link_dim() != config.link_dim)
    throw DimensionError("graph link features have width "
                         + std::to_string(graph.link_dim()) + ", model expects "
                         + std::to_string(config.link_dim));
}

Var Pass::p(const char *name) const { return params_[name]; }

Var Pass::maybe_dropout(Var x) {
  if (!options_.training || options_.dropout == 0.0)
    return x;
  const Tensor &v = x.value();
  Var mask = tape_->constant(
      num::dropout_mask(v.rows(), v.cols(), options_.dropout, *options_.rng));
  return ad::hadamard(x, mask);
}

Pass::Init Pass::init_state(const Query &query) {
  const auto &x = graph_.node_features();
  if (static_cast<int>(query.q.size()) != config_.query_dim)
    throw DimensionError("query length " + std::to_string(query.q.size())
                         + " does not match W_q width "
                         + std::to_string(config_.query_dim));
  if (static_cast<int>(x.cols()) != config_.input_dim
      || static_cast<int>(x.rows()) != graph_.node_count())
    throw DimensionError("node features " + x.shape_string()
                         + " do not match embedding input width "
                         + std::to_string(config_.input_dim));

  Var q = tape_->constant(Tensor::column(query.q));
  Var h0 = ad::relu(ad::affine(p("query.W"), q, p("query.b")));

  Var xt = tape_->constant(x.transpose());
  Var m0 = config_.embed == EmbedMode::kLearned
               ? ad::relu(ad::affine(p("embed.W"), xt, p("embed.b")))
               : ad::relu(xt);
  return {maybe_dropout(h0), maybe_dropout(m0)};
}

Pass::Read Pass::attentive_read(Var memory, Var h_prev) {
  if (memory.value().cols() == 0)
    throw DimensionError("attentive read over an empty memory");
  Var pre = ad::tanh(ad::add_col(
      ad::matmul(p("attn.W"), memory),
      ad::affine(p("attn.U"), h_prev, p("attn.b"))));
  Var scores = ad::matmul(p("attn.v"), pre);
  Var attention = ad::softmax(scores);
  Var read = ad::matmul(memory, ad::transpose(attention));
  return {pre, scores, attention, read};
}

Var Pass::controller_step(Var h_prev, Var read) {
  Var proposal = ad::relu(ad::add(ad::matmul(p("ctrl.W"), h_prev),
                                  ad::affine(p("ctrl.U"), read, p("ctrl.b"))));
  Var gate =
      ad::sigmoid(ad::add(ad::matmul(p("ctrl_gate.W"), h_prev),
                          ad::affine(p("ctrl_gate.U"), read, p("ctrl_gate.b"))));
  return ad::gate_mix(gate, proposal, h_prev);
}

// c_r^i = sum_{j in N_r(i)} p_ij [m^j ; b^{ij}], p_ij = w_j / sum_{k in N_r(i)} w_k.
// Without weights every neighbor counts equally.
Var Pass::neighbor_context(Var memory, Var weights, int relation) {
  const Tensor &mem = memory.value();
  const std::size_t km = mem.rows();
  const std::size_t kb = static_cast<std::size_t>(config_.link_dim);
  const int m = graph_.node_count();
  const bool weighted = weights.valid();

  Tensor out(km + kb, static_cast<std::size_t>(m));
  std::vector<double> norm(static_cast<std::size_t>(m), 0.0);
  for (int i = 0; i < m; ++i) {
    auto nbrs = graph_.neighbors(relation, i);
    if (nbrs.empty())
      continue;
    double total = 0;
    for (const auto &nb: nbrs)
      total += weighted ? weights.value()[nb.node] : 1.0;
    norm[i] = total;
    for (const auto &nb: nbrs) {
      const double pj = (weighted ? weights.value()[nb.node] : 1.0) / total;
      for (std::size_t r = 0; r < km; ++r)
        out(r, i) += pj * mem(r, nb.node);
      const auto &b = graph_.edge(nb.edge).link_features;
      for (std::size_t r = 0; r < kb; ++r)
        out(km + r, i) += pj * b[r];
    }
  }

  const auto *graph = &graph_;
  const std::size_t im = memory.id();
  const std::size_t iw = weighted ? weights.id() : 0;
  auto backward = [graph, relation, im, iw, weighted, km, kb,
                   norm = std::move(norm)](num::Tape &t, std::size_t self) {
    const Tensor &g = t.grad(self);
    const Tensor &c = t.value(self);
    const Tensor &mem = t.value(im);
    const bool want_m = t.needs_grad(im);
    const bool want_w = weighted && t.needs_grad(iw);
    const Tensor *w = weighted ? &t.value(iw) : nullptr;
    for (int i = 0; i < graph->node_count(); ++i) {
      auto nbrs = graph->neighbors(relation, i);
      if (nbrs.empty())
        continue;
      double g_dot_c = 0;
      if (want_w)
        for (std::size_t r = 0; r < km + kb; ++r)
          g_dot_c += g(r, i) * c(r, i);
      for (const auto &nb: nbrs) {
        const double wj = weighted ? (*w)[nb.node] : 1.0;
        if (want_m) {
          Tensor &gm = t.grad(im);
          const double pj = wj / norm[i];
          for (std::size_t r = 0; r < km; ++r)
            gm(r, nb.node) += pj * g(r, i);
        }
        if (want_w) {
          const auto &b = graph->edge(nb.edge).link_features;
          double g_dot_x = 0;
          for (std::size_t r = 0; r < km; ++r)
            g_dot_x += g(r, i) * mem(r, nb.node);
          for (std::size_t r = 0; r < kb; ++r)
            g_dot_x += g(km + r, i) * b[r];
          t.grad(iw)[nb.node] += (g_dot_x - g_dot_c) / norm[i];
        }
      }
    }
  };
  if (weighted)
    return tape_->record(std::move(out), {memory, weights}, std::move(backward));
  return tape_->record(std::move(out), {memory}, std::move(backward));
}

Pass::MemoryUpdate Pass::memory_step(Var memory_prev, Var h_t) {
  Var weights;
  if (config_.neighbor_weights == NeighborWeights::kLearned) {
    Var a = ad::tanh(ad::add_col(ad::matmul(p("nbr.W"), memory_prev),
                                 ad::affine(p("nbr.U"), h_t, p("nbr.b"))));
    weights = ad::exp_shifted(ad::matmul(p("nbr.v"), a));
  }

  MemoryUpdate upd;
  Var proposal = ad::matmul(p("mem.W"), memory_prev);
  Var gate = ad::matmul(p("mem_gate.W"), memory_prev);
  for (int r = 1; r <= config_.relation_count; ++r) {
    if (r > graph_.relation_count()) {
      upd.contexts.push_back(tape_->constant(
          Tensor(memory_prev.value().rows() + config_.link_dim,
                 memory_prev.value().cols())));
      continue;
    }
    Var ctx = neighbor_context(memory_prev, weights, r);
    upd.contexts.push_back(ctx);
    const std::string suffix = std::to_string(r);
    proposal = ad::add(proposal, ad::matmul(params_["mem.V" + suffix], ctx));
    gate = ad::add(gate, ad::matmul(params_["mem_gate.V" + suffix], ctx));
  }
  proposal = ad::relu(
      ad::add_col(proposal, ad::affine(p("mem.U"), h_t, p("mem.b"))));
  gate = ad::sigmoid(
      ad::add_col(gate, ad::affine(p("mem_gate.U"), h_t, p("mem_gate.b"))));
  upd.memory = ad::gate_mix(gate, proposal, memory_prev);
  return upd;
}

Var Pass::final_dropout(Var x) { return maybe_dropout(x); }

Var Pass::output(Var h_final) {
  return ad::sigmoid(ad::affine(p("out.w"), h_final, p("out.b")));
}

// ---------------------------------------------------------------------------

namespace {

struct Unrolled {
  Var probability;
  std::vector<HopState> trace;
};

HopState snapshot(int t, Var h, Var memory) {
  HopState s;
  s.t = t;
  s.h = h.value();
  s.memory = memory.value();
  return s;
}

Unrolled unroll(Pass &pass, const Query &query, int hops, bool keep_trace) {
  if (hops < 1)
    throw ConfigError("hop count must be >= 1, got " + std::to_string(hops));
  Unrolled out;
  auto init = pass.init_state(query);
  Var h = init.h, memory = init.memory;
  if (keep_trace)
    out.trace.push_back(snapshot(0, h, memory));
  for (int t = 1; t <= hops; ++t) {
    auto rd = pass.attentive_read(memory, h);
    h = pass.controller_step(h, rd.read);
    auto upd = pass.memory_step(memory, h);
    memory = upd.memory;
    if (t == hops) {
      h = pass.final_dropout(h);
      memory = pass.final_dropout(memory);
    }
    if (keep_trace) {
      HopState s = snapshot(t, h, memory);
      s.read = rd.read.value();
      s.attention = rd.attention.value();
      s.scores = rd.scores.value();
      s.pre = rd.pre.value();
      for (Var c: upd.contexts)
        s.contexts.push_back(c.value());
      out.trace.push_back(std::move(s));
    }
  }
  out.probability = pass.output(h);
  return out;
}

} // namespace

HopState init_state(const ModelConfig &config, const num::ParamSet &params,
                    const mol::MolecularGraph &graph, const Query &query) {
  num::Tape tape;
  num::BoundParams bound(tape, params, false);
  Pass pass(config, bound, graph);
  auto init = pass.init_state(query);
  return snapshot(0, init.h, init.memory);
}

AttentiveRead attentive_read(const ModelConfig &config,
                             const num::ParamSet &params,
                             const HopState &state) {
  num::Tape tape;
  num::BoundParams bound(tape, params, false);
  if (state.memory.cols() == 0)
    throw DimensionError("attentive read over an empty memory");
  Var memory = tape.constant(state.memory);
  Var h = tape.constant(state.h);
  // The read touches no graph structure; a placeholder graph satisfies Pass.
  mol::MolecularGraph placeholder({}, config.relation_count);
  Pass pass(config, bound, placeholder);
  auto rd = pass.attentive_read(memory, h);
  return {rd.read.value(), rd.attention.value()};
}

Tensor controller_step(const ModelConfig &config, const num::ParamSet &params,
                       const HopState &state, const Tensor &read) {
  num::Tape tape;
  num::BoundParams bound(tape, params, false);
  mol::MolecularGraph placeholder({}, config.relation_count);
  Pass pass(config, bound, placeholder);
  return pass.controller_step(tape.constant(state.h), tape.constant(read))
      .value();
}

Tensor memory_step(const ModelConfig &config, const num::ParamSet &params,
                   const mol::MolecularGraph &graph, const HopState &state,
                   const Tensor &h_t) {
  num::Tape tape;
  num::BoundParams bound(tape, params, false);
  Pass pass(config, bound, graph);
  return pass.memory_step(tape.constant(state.memory), tape.constant(h_t))
      .memory.value();
}

ForwardResult forward(const ModelConfig &config, const num::ParamSet &params,
                      const mol::MolecularGraph &graph, const Query &query,
                      int hops, const PassOptions &options, bool keep_trace) {
  num::Tape tape;
  num::BoundParams bound(tape, params, false);
  Pass pass(config, bound, graph, options);
  auto un = unroll(pass, query, hops, keep_trace);
  return {un.probability.value()[0], std::move(un.trace)};
}

LossAndGradients loss_and_gradients(const ModelConfig &config,
                                    const num::ParamSet &params,
                                    const mol::MolecularGraph &graph,
                                    const Query &query, int label, int hops,
                                    const PassOptions &options) {
  num::Tape tape;
  num::BoundParams bound(tape, params, true);
  Pass pass(config, bound, graph, options);
  auto un = unroll(pass, query, hops, false);
  Var loss = ad::binary_cross_entropy(un.probability, label);
  tape.backward(loss);
  return {loss.value()[0], un.probability.value()[0], bound.gradients()};
}

double loss_value(const ModelConfig &config, const num::ParamSet &params,
                  const mol::MolecularGraph &graph, const Query &query,
                  int label, int hops) {
  num::Tape tape;
  num::BoundParams bound(tape, params, false);
  Pass pass(config, bound, graph);
  auto un = unroll(pass, query, hops, false);
  return ad::binary_cross_entropy(un.probability, label).value()[0];
}

} // namespace graphmem::model
