#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "satnn/cnf.hpp"
#include "satnn/graph.hpp"
#include "satnn/optim.hpp"
#include "satnn/rng.hpp"
#include "satnn/solver.hpp"
#include "satnn/tape.hpp"

namespace satnn {

enum class CellKind { RNN, LSTM };

struct ModelConfig {
  GraphKind graph_kind = GraphKind::VCG;
  CellKind cell = CellKind::RNN;
  int d_model = 64;
  std::vector<int> mlp_hidden;  // empty means one hidden layer of d_model
  int t_train = 25;
  bool value_embedding = false;  // learnable boolean embedding (denoiser input)
  bool lcg_message_mlp = false;  // optional MLP on literal->clause messages

  std::vector<int> resolved_hidden() const {
    return mlp_hidden.empty() ? std::vector<int>{d_model} : mlp_hidden;
  }
  void check() const {
    if (d_model < 2) throw std::invalid_argument("d_model must be >= 2");
    if (t_train < 1) throw std::invalid_argument("t_train must be >= 1");
  }
};

// Per-iteration node embeddings; hidden-state rows are unit-norm after every
// round. Cell states are present only for LSTM updates.
template <typename S>
struct MpState {
  MatX<S> h_left;
  MatX<S> h_clause;
  MatX<S> c_left;
  MatX<S> c_clause;
};

template <typename S>
struct Prediction {
  MatX<S> logits;  // n x 2, column 0 scores false, column 1 scores true
  MatX<S> probs;   // row-wise softmax of logits
  Assignment hard; // row-wise argmax, ties resolved to true

  static Prediction from_logits(const MatX<S>& logits) {
    Prediction p;
    p.logits = logits;
    p.probs.resize(logits.rows(), logits.cols());
    for (int i = 0; i < logits.rows(); ++i) {
      auto e = (logits.row(i).array() - logits.row(i).maxCoeff()).exp();
      p.probs.row(i) = e / e.sum();
    }
    p.hard.resize(logits.rows());
    for (int i = 0; i < logits.rows(); ++i)
      p.hard[i] = logits(i, 1) >= logits(i, 0) ? 1 : 0;
    return p;
  }
};

template <typename S>
using Bound = std::unordered_map<std::string, Var<S>>;

template <typename S>
struct StateVars {
  Var<S> h_left, h_clause, c_left, c_clause;
};

// Edge index arrays split by polarity, used by the VCG message functions.
struct EdgeSets {
  std::vector<int> pos_left, pos_clause;
  std::vector<int> neg_left, neg_clause;

  static EdgeSets split(const FormulaGraph& g) {
    EdgeSets es;
    for (int e = 0; e < g.num_edges(); ++e) {
      if (g.edge_polarity[e] > 0) {
        es.pos_left.push_back(g.edge_left[e]);
        es.pos_clause.push_back(g.edge_clause[e]);
      } else {
        es.neg_left.push_back(g.edge_left[e]);
        es.neg_clause.push_back(g.edge_clause[e]);
      }
    }
    return es;
  }
};

// Recurrent message-passing model over LCG or VCG graphs.
template <typename S>
class GnnModel {
 public:
  ModelConfig cfg;
  ParamStore<S> params;

  GnnModel(ModelConfig config, uint64_t seed) : cfg(std::move(config)) {
    cfg.check();
    Rng rng(seed);
    const int d = cfg.d_model;
    if (cfg.graph_kind == GraphKind::VCG) {
      add_mlp(rng, "mvc.pos", d, d);
      add_mlp(rng, "mvc.neg", d, d);
      add_mlp(rng, "mcv.pos", d, d);
      add_mlp(rng, "mcv.neg", d, d);
      add_cell(rng, "cell_c", d);
      add_cell(rng, "cell_v", d);
      add_param(rng, "readout.w", d, 2);
      add_param(rng, "readout.b", 1, 2, true);
    } else {
      if (cfg.lcg_message_mlp) add_mlp(rng, "lmsg", d, d);
      add_cell(rng, "cell_c", d);
      add_cell(rng, "cell_l", 2 * d);
      add_param(rng, "readout.w", d, 1);
      add_param(rng, "readout.b", 1, 1, true);
    }
    add_param(rng, "sat.w", 2 * d, 1);
    add_param(rng, "sat.b", 1, 1, true);
    if (cfg.value_embedding) add_param(rng, "embed", 2, d);
  }

  int mlp_layers() const { return static_cast<int>(cfg.resolved_hidden().size()) + 1; }

 private:
  void add_param(Rng& rng, const std::string& name, int rows, int cols,
                 bool zero = false, double gain = 1.0) {
    MatX<S> w(rows, cols);
    if (zero) {
      w.setZero();
    } else {
      double limit = gain * std::sqrt(6.0 / (rows + cols));
      for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) w(i, j) = S(rng.uniform(-limit, limit));
    }
    params.add(name, std::move(w));
  }
  void add_mlp(Rng& rng, const std::string& prefix, int in, int out) {
    std::vector<int> dims{in};
    for (int h : cfg.resolved_hidden()) dims.push_back(h);
    dims.push_back(out);
    for (size_t l = 0; l + 1 < dims.size(); ++l) {
      add_param(rng, prefix + "." + std::to_string(l) + ".w", dims[l], dims[l + 1]);
      add_param(rng, prefix + "." + std::to_string(l) + ".b", 1, dims[l + 1], true);
    }
  }
  void add_cell(Rng& rng, const std::string& prefix, int in) {
    int gates = cfg.cell == CellKind::LSTM ? 4 * cfg.d_model : cfg.d_model;
    // neighbor sums are unnormalized, so the input weights start an order of
    // magnitude below Glorot to keep the first updates off the tanh plateaus
    add_param(rng, prefix + ".wx", in, gates, false, 0.1);
    add_param(rng, prefix + ".wh", cfg.d_model, gates);
    add_param(rng, prefix + ".b", 1, gates, true);
  }
};

// Puts every parameter on the tape as a differentiable leaf. With `use_ema`
// the shadow weights are bound instead (validation-time evaluation).
template <typename S>
Bound<S> bind(GnnModel<S>& model, Tape<S>& tape, bool use_ema = false) {
  Bound<S> b;
  for (const std::string& name : model.params.names()) {
    const ParamEntry<S>& e = model.params.at(name);
    b.emplace(name, tape.leaf(use_ema ? e.ema : e.value, true));
  }
  return b;
}

// Writes accumulated tape gradients back into the store.
template <typename S>
void harvest_grads(GnnModel<S>& model, Tape<S>& tape, const Bound<S>& bound) {
  for (const auto& [name, var] : bound) {
    if (!tape.has_grad(var.id)) continue;
    ParamEntry<S>& e = model.params.at(name);
    e.grad += tape.grad_of(var.id);
    e.grad_touched = true;
  }
}

// Random initial embeddings: i.i.d. standard normal rows, unit-normalized.
template <typename S>
MpState<S> init_state(const GnnModel<S>& model, int num_left, int num_clauses,
                      uint64_t seed) {
  const int d = model.cfg.d_model;
  Rng rng(seed);
  MpState<S> s;
  auto fill = [&](MatX<S>& m, int rows) {
    m.resize(rows, d);
    for (int i = 0; i < rows; ++i) {
      for (int j = 0; j < d; ++j) m(i, j) = S(rng.normal());
      S n = m.row(i).norm();
      if (n > S(0)) m.row(i) /= n;
    }
  };
  fill(s.h_left, num_left);
  fill(s.h_clause, num_clauses);
  if (model.cfg.cell == CellKind::LSTM) {
    s.c_left = MatX<S>::Zero(num_left, d);
    s.c_clause = MatX<S>::Zero(num_clauses, d);
  }
  return s;
}

template <typename S>
StateVars<S> lift_state(Tape<S>& tape, const MpState<S>& s) {
  StateVars<S> v;
  v.h_left = tape.constant(s.h_left);
  v.h_clause = tape.constant(s.h_clause);
  if (s.c_left.size() != 0) {
    v.c_left = tape.constant(s.c_left);
    v.c_clause = tape.constant(s.c_clause);
  }
  return v;
}

template <typename S>
MpState<S> snapshot_state(const StateVars<S>& v) {
  MpState<S> s;
  s.h_left = v.h_left.value();
  s.h_clause = v.h_clause.value();
  if (v.c_left.tape) {
    s.c_left = v.c_left.value();
    s.c_clause = v.c_clause.value();
  }
  return s;
}

namespace detail {

template <typename S>
Var<S> apply_mlp(const Bound<S>& b, const std::string& prefix, int layers, Var<S> x) {
  for (int l = 0; l < layers; ++l) {
    x = linear(x, b.at(prefix + "." + std::to_string(l) + ".w"),
               b.at(prefix + "." + std::to_string(l) + ".b"));
    if (l + 1 < layers) x = tanh_op(x);
  }
  return x;
}

// Recurrent update followed by row normalization of the hidden state.
template <typename S>
void apply_cell(const Bound<S>& b, const std::string& prefix, CellKind kind, int d,
                Var<S> input, Var<S>& h, Var<S>& c) {
  Var<S> pre = add_rowvec(add(matmul(input, b.at(prefix + ".wx")),
                              matmul(h, b.at(prefix + ".wh"))),
                          b.at(prefix + ".b"));
  if (kind == CellKind::RNN) {
    h = l2_normalize_rows(tanh_op(pre));
    return;
  }
  Var<S> i_g = sigmoid_op(cols_slice(pre, 0, d));
  Var<S> f_g = sigmoid_op(cols_slice(pre, d, d));
  Var<S> g_g = tanh_op(cols_slice(pre, 2 * d, d));
  Var<S> o_g = sigmoid_op(cols_slice(pre, 3 * d, d));
  c = add(mul(f_g, c), mul(i_g, g_g));
  h = l2_normalize_rows(mul(o_g, tanh_op(c)));
}

}  // namespace detail

// One alternating clause/variable (or clause/literal) update.
template <typename S>
void mp_round(const GnnModel<S>& model, const Bound<S>& b, const FormulaGraph& g,
              const EdgeSets& es, StateVars<S>& s) {
  const int d = model.cfg.d_model;
  const int layers = model.mlp_layers();
  const CellKind cell = model.cfg.cell;

  if (model.cfg.graph_kind == GraphKind::VCG) {
    // message MLPs run once per node; edges gather the transformed rows
    Var<S> msg_pos = detail::apply_mlp(b, "mvc.pos", layers, s.h_left);
    Var<S> msg_neg = detail::apply_mlp(b, "mvc.neg", layers, s.h_left);
    Var<S> sum_c =
        add(gather_segment_sum(msg_pos, es.pos_left, es.pos_clause, g.num_clauses),
            gather_segment_sum(msg_neg, es.neg_left, es.neg_clause, g.num_clauses));
    detail::apply_cell(b, "cell_c", cell, d, sum_c, s.h_clause, s.c_clause);

    Var<S> back_pos = detail::apply_mlp(b, "mcv.pos", layers, s.h_clause);
    Var<S> back_neg = detail::apply_mlp(b, "mcv.neg", layers, s.h_clause);
    Var<S> sum_v =
        add(gather_segment_sum(back_pos, es.pos_clause, es.pos_left, g.num_left),
            gather_segment_sum(back_neg, es.neg_clause, es.neg_left, g.num_left));
    detail::apply_cell(b, "cell_v", cell, d, sum_v, s.h_left, s.c_left);
    return;
  }

  // LCG: clause update from raw literal sums, then literal update on
  // [sum of clause messages, Flip(previous literal state)].
  Var<S> lit_msg = s.h_left;
  if (model.cfg.lcg_message_mlp) lit_msg = detail::apply_mlp(b, "lmsg", layers, lit_msg);
  Var<S> sum_c = gather_segment_sum(lit_msg, g.edge_left, g.edge_clause, g.num_clauses);
  detail::apply_cell(b, "cell_c", cell, d, sum_c, s.h_clause, s.c_clause);

  Var<S> sum_l =
      gather_segment_sum(s.h_clause, g.edge_clause, g.edge_left, g.num_left);
  Var<S> flipped = rows_permute(s.h_left, g.flip);
  Var<S> inp = concat_cols(sum_l, flipped);
  detail::apply_cell(b, "cell_l", cell, d, inp, s.h_left, s.c_left);
}

// Variable logits (n x 2). For LCG the true-class score comes from the
// positive literal and the false-class score from its complement through one
// shared scalar head, which makes the negation symmetry exact.
template <typename S>
Var<S> readout_logits(const GnnModel<S>& model, const Bound<S>& b, const FormulaGraph& g,
                      const StateVars<S>& s) {
  if (model.cfg.graph_kind == GraphKind::VCG)
    return linear(s.h_left, b.at("readout.w"), b.at("readout.b"));
  std::vector<int> neg_rows(g.pos_rows.size());
  for (size_t v = 0; v < g.pos_rows.size(); ++v) neg_rows[v] = g.flip[g.pos_rows[v]];
  Var<S> s_pos = linear(gather_rows(s.h_left, g.pos_rows), b.at("readout.w"),
                        b.at("readout.b"));
  Var<S> s_neg = linear(gather_rows(s.h_left, neg_rows), b.at("readout.w"),
                        b.at("readout.b"));
  return concat_cols(s_neg, s_pos);
}

// Per-graph SAT logit from mean-pooled left and clause embeddings.
template <typename S>
Var<S> sat_logits(const Bound<S>& b, const GraphBatch& batch, const StateVars<S>& s) {
  const int B = batch.num_graphs;
  VecX<S> inv_left(B), inv_clause(B);
  std::vector<int> left_count(B, 0), clause_count(B, 0);
  for (int id : batch.left_graph_id) ++left_count[id];
  for (int id : batch.clause_graph_id) ++clause_count[id];
  for (int i = 0; i < B; ++i) {
    inv_left(i) = left_count[i] ? S(1) / S(left_count[i]) : S(0);
    inv_clause(i) = clause_count[i] ? S(1) / S(clause_count[i]) : S(0);
  }
  Var<S> pool_left = row_scale(segment_sum(s.h_left, batch.left_graph_id, B), inv_left);
  Var<S> pool_clause =
      row_scale(segment_sum(s.h_clause, batch.clause_graph_id, B), inv_clause);
  return linear(concat_cols(pool_left, pool_clause), b.at("sat.w"), b.at("sat.b"));
}

// Initial left-node embeddings from boolean values through the learnable
// embedding table. Requires cfg.value_embedding.
template <typename S>
Var<S> embed_state_rows(const GnnModel<S>& model, const Bound<S>& b,
                        const FormulaGraph& g, const Assignment& x) {
  std::vector<int> idx(g.num_left);
  if (model.cfg.graph_kind == GraphKind::VCG) {
    for (int v = 0; v < g.num_left; ++v) idx[v] = x[v] ? 1 : 0;
  } else {
    for (size_t v = 0; v < g.pos_rows.size(); ++v) {
      idx[g.pos_rows[v]] = x[v] ? 1 : 0;
      idx[g.flip[g.pos_rows[v]]] = x[v] ? 0 : 1;
    }
  }
  return l2_normalize_rows(gather_rows(b.at("embed"), idx));
}

// ---------------------------------------------------------------------------
// Losses
// ---------------------------------------------------------------------------

template <typename S>
MatX<S> one_hot(const Assignment& a) {
  MatX<S> t = MatX<S>::Zero(static_cast<int>(a.size()), 2);
  for (size_t i = 0; i < a.size(); ++i) t(static_cast<int>(i), a[i] ? 1 : 0) = S(1);
  return t;
}

enum class AssignmentLossKind { CE, MSE };

// Supervised assignment loss; CE on softmax probabilities or MSE between the
// probabilities and the 0/1 one-hot target, averaged per variable.
template <typename S>
Var<S> loss_assignment(Var<S> logits, const Assignment& target, AssignmentLossKind kind) {
  if (static_cast<int>(target.size()) != logits.value().rows())
    throw std::invalid_argument("assignment target length mismatch");
  Var<S> probs = softmax_rows(logits);
  MatX<S> t = one_hot<S>(target);
  if (kind == AssignmentLossKind::CE) return cross_entropy(probs, t);
  return mse(probs, t);
}

// BCE of the pooled-embedding classifier head against 0/1 labels (B x 1).
template <typename S>
Var<S> loss_sat(const Bound<S>& b, const GraphBatch& batch, const StateVars<S>& s,
                const MatX<S>& labels) {
  Var<S> p = sigmoid_op(sat_logits(b, batch, s));
  return binary_cross_entropy(p, labels);
}

// -sum_c log V_c with V_c = 1 - prod_{i in c+}(1 - x_i) prod_{i in c-} x_i,
// summed per formula and averaged over the batch.
template <typename S>
Var<S> loss_unsupervised(Var<S> logits, const std::vector<const CnfFormula*>& formulas,
                         S clamp_eps = S(1e-6)) {
  std::vector<int> pos_var, pos_clause, neg_var, neg_clause;
  int clause_off = 0, var_off = 0;
  for (const CnfFormula* f : formulas) {
    for (int c = 0; c < f->num_clauses(); ++c) {
      for (const Literal& l : f->clauses[c]) {
        if (l.positive) {
          pos_var.push_back(var_off + l.var);
          pos_clause.push_back(clause_off + c);
        } else {
          neg_var.push_back(var_off + l.var);
          neg_clause.push_back(clause_off + c);
        }
      }
    }
    clause_off += f->num_clauses();
    var_off += f->num_vars;
  }
  Var<S> x_true = clamp_op(cols_slice(softmax_rows(logits), 1, 1), clamp_eps,
                           S(1) - clamp_eps);
  Var<S> log_pos = log_op(rsub_scalar(S(1), x_true));
  Var<S> log_neg = log_op(x_true);
  Var<S> sum_log = add(segment_sum(gather_rows(log_pos, pos_var), pos_clause, clause_off),
                       segment_sum(gather_rows(log_neg, neg_var), neg_clause, clause_off));
  Var<S> violated = exp_op(sum_log);           // prod of "literal false" probabilities
  Var<S> validity = clamp_op(rsub_scalar(S(1), violated), S(1e-7), S(1));
  Var<S> loss = scale(sum_all(log_op(validity)), S(-1));
  return scale(loss, S(1) / S(formulas.size()));
}

template <typename S>
Var<S> loss_unsupervised(Var<S> logits, const CnfFormula& f, S clamp_eps = S(1e-6)) {
  std::vector<const CnfFormula*> one{&f};
  return loss_unsupervised(logits, one, clamp_eps);
}

// Closest-assignment supervision: the target is recomputed from the current
// prediction on every call.
template <typename S>
struct ClosestLoss {
  Var<S> loss;
  Assignment target;
};

template <typename S>
ClosestLoss<S> loss_closest(Var<S> logits, const CnfFormula& f,
                            const SolverBudget& budget = {}) {
  Prediction<S> pred = Prediction<S>::from_logits(logits.value());
  std::vector<double> ref(f.num_vars);
  for (int v = 0; v < f.num_vars; ++v) ref[v] = static_cast<double>(pred.probs(v, 1));
  Assignment target = closest_assignment(f, ref, budget);
  return {loss_assignment(logits, target, AssignmentLossKind::CE), target};
}

// ---------------------------------------------------------------------------
// Forward drivers
// ---------------------------------------------------------------------------

// One denoiser call: variable embeddings come from the boolean state x
// through the embedding table, clause embeddings are seeded random normals.
template <typename S>
Prediction<S> denoise_predict(GnnModel<S>& model, const FormulaGraph& g,
                              const Assignment& x, int gnn_steps, uint64_t seed,
                              bool use_ema = false) {
  if (!model.cfg.value_embedding)
    throw std::invalid_argument("model has no value-embedding layer");
  Tape<S> tape;
  tape.grad_enabled = false;
  Bound<S> b = bind(model, tape, use_ema);
  EdgeSets es = model.cfg.graph_kind == GraphKind::VCG ? EdgeSets::split(g) : EdgeSets{};
  MpState<S> s0 = init_state(model, g.num_left, g.num_clauses, seed);
  StateVars<S> s = lift_state(tape, s0);
  s.h_left = embed_state_rows(model, b, g, x);
  Prediction<S> pred;
  for (int it = 0; it < gnn_steps; ++it) mp_round(model, b, g, es, s);
  return Prediction<S>::from_logits(readout_logits(model, b, g, s).value());
}

struct ForwardOptions {
  int t_steps = 25;
  bool use_ema = false;
};

// Runs `t_steps` rounds without gradients and returns the last prediction.
// `on_iteration` sees every round's state and decode; returning false stops
// the run early.
template <typename S>
Prediction<S> forward(GnnModel<S>& model, const FormulaGraph& g, int t_steps,
                      uint64_t seed,
                      const std::function<bool(int, const MpState<S>&,
                                               const Prediction<S>&)>& on_iteration = {},
                      bool use_ema = false,
                      const MpState<S>* initial = nullptr) {
  if (t_steps < 1) throw std::invalid_argument("t_steps must be >= 1");
  Tape<S> tape;
  tape.grad_enabled = false;
  Bound<S> b = bind(model, tape, use_ema);
  EdgeSets es = model.cfg.graph_kind == GraphKind::VCG ? EdgeSets::split(g) : EdgeSets{};
  MpState<S> s0 = initial ? *initial : init_state(model, g.num_left, g.num_clauses, seed);
  StateVars<S> s = lift_state(tape, s0);
  Prediction<S> pred;
  for (int it = 1; it <= t_steps; ++it) {
    mp_round(model, b, g, es, s);
    if (on_iteration || it == t_steps) {
      Var<S> logits = readout_logits(model, b, g, s);
      pred = Prediction<S>::from_logits(logits.value());
      if (on_iteration && !on_iteration(it, snapshot_state(s), pred)) break;
    }
  }
  return pred;
}

}  // namespace satnn
