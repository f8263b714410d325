#pragma once

#include <map>
#include <string>
#include <vector>

#include "common/rng.hpp"
#include "molgraph/graph.hpp"
#include "numerics/params.hpp"
#include "numerics/tape.hpp"

namespace graphmem::model {

enum class EmbedMode {
  kLearned, // m_0^i = relu(E x^i + b)
  kRaw,     // m_0^i = relu(x^i); requires memory_size == input_dim
};

enum class NeighborWeights {
  kUniform, // p^j = 1 / |N_r(i)|
  kLearned, // p^j = softmax over N_r(i) of v_n^T tanh(W_n m^j + U_n h_t + b_n)
};

struct ModelConfig {
  int input_dim = 0;      // K_x
  int link_dim = 0;       // width of b^{ij}
  int relation_count = 1; // R
  int query_dim = 1;      // task count n (1 in single-task mode)
  int memory_size = 32;   // K_m
  int controller_size = 32; // K_h
  EmbedMode embed = EmbedMode::kLearned;
  NeighborWeights neighbor_weights = NeighborWeights::kUniform;

  void validate() const;
  std::map<std::string, std::string> to_metadata() const;
  static ModelConfig from_metadata(const std::map<std::string, std::string> &m);

  friend bool operator==(const ModelConfig &, const ModelConfig &) = default;
};

struct Query {
  std::vector<double> q;

  static Query one_hot(int task, int task_count);
  // Single-task query: a constant vector of ones.
  static Query constant(int size = 1);
};

// Glorot-uniform weights (attention vectors included), zero biases.
num::ParamSet init_params(const ModelConfig &config, Rng &rng);

// Values of one reasoning step. Memory columns are cells (K_m x M).
struct HopState {
  int t = 0;
  num::Tensor h;         // (K_h x 1)
  num::Tensor memory;    // (K_m x M)
  num::Tensor read;      // m_t (K_m x 1); empty at t = 0
  num::Tensor attention; // p_t (1 x M); empty at t = 0
  num::Tensor scores;    // v^T a_t^i (1 x M)
  num::Tensor pre;       // a_t^i columns (K_m x M)
  std::vector<num::Tensor> contexts; // c_tr^i per relation ((K_m+K_b) x M)
};

struct PassOptions {
  bool training = false;
  double dropout = 0.0;
  Rng *rng = nullptr; // required when training with dropout > 0
};

// Tape-level building blocks for one pass over one graph.
class Pass {
public:
  Pass(const ModelConfig &config, const num::BoundParams &params,
       const mol::MolecularGraph &graph, PassOptions options = {});

  struct Init {
    num::Var h;
    num::Var memory;
  };
  struct Read {
    num::Var pre;
    num::Var scores;
    num::Var attention;
    num::Var read;
  };
  struct MemoryUpdate {
    std::vector<num::Var> contexts;
    num::Var memory;
  };

  // h_0 = relu(W_q q + b_q); memory cells from node features. Dropout is
  // applied here when training.
  Init init_state(const Query &query);
  Read attentive_read(num::Var memory, num::Var h_prev);
  num::Var controller_step(num::Var h_prev, num::Var read);
  MemoryUpdate memory_step(num::Var memory_prev, num::Var h_t);
  // Dropout at the last step, when training.
  num::Var final_dropout(num::Var x);
  num::Var output(num::Var h_final);

  num::Tape &tape() const { return *tape_; }

private:
  num::Var p(const char *name) const;
  num::Var neighbor_context(num::Var memory, num::Var weights, int relation);
  num::Var maybe_dropout(num::Var x);

  const ModelConfig &config_;
  const num::BoundParams &params_;
  const mol::MolecularGraph &graph_;
  PassOptions options_;
  num::Tape *tape_;
};

// Value-level single steps (each runs on a private tape).
HopState init_state(const ModelConfig &config, const num::ParamSet &params,
                    const mol::MolecularGraph &graph, const Query &query);

struct AttentiveRead {
  num::Tensor read;      // m_t
  num::Tensor attention; // p_t
};
AttentiveRead attentive_read(const ModelConfig &config,
                             const num::ParamSet &params,
                             const HopState &state);
num::Tensor controller_step(const ModelConfig &config,
                            const num::ParamSet &params, const HopState &state,
                            const num::Tensor &read);
// Returns the updated cells (K_m x M).
num::Tensor memory_step(const ModelConfig &config, const num::ParamSet &params,
                        const mol::MolecularGraph &graph,
                        const HopState &state, const num::Tensor &h_t);

struct ForwardResult {
  double probability = 0.0;
  std::vector<HopState> trace; // t = 0..T when requested
};

// init_state, then T hops of read -> controller -> memory, then
// sigmoid(w^T h_T + b).
ForwardResult forward(const ModelConfig &config, const num::ParamSet &params,
                      const mol::MolecularGraph &graph, const Query &query,
                      int hops, const PassOptions &options = {},
                      bool keep_trace = false);

struct LossAndGradients {
  double loss = 0.0;
  double probability = 0.0;
  num::ParamSet gradients;
};

// Cross-entropy of forward() against label, with exact reverse-mode
// gradients for every parameter.
LossAndGradients loss_and_gradients(const ModelConfig &config,
                                    const num::ParamSet &params,
                                    const mol::MolecularGraph &graph,
                                    const Query &query, int label, int hops,
                                    const PassOptions &options = {});

double loss_value(const ModelConfig &config, const num::ParamSet &params,
                  const mol::MolecularGraph &graph, const Query &query,
                  int label, int hops);

} // namespace graphmem::model
