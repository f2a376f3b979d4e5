#include "seqembed/lstm.hpp"

#include <cmath>
#include <string>

#include "seqembed/error.hpp"

namespace seqembed {

namespace {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// pre += M * v, with M shaped rows x cols and v of length cols.
inline void add_matvec(const Tensor& m, const double* v, double* pre, std::size_t rows,
                       std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double* m_row = m.row(r);
    double acc = 0.0;
    for (std::size_t c = 0; c < cols; ++c) acc += m_row[c] * v[c];
    pre[r] += acc;
  }
}

// out += M^T * v, accumulating along rows of M.
inline void add_matvec_t(const Tensor& m, const double* v, double* out,
                         std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double s = v[r];
    if (s == 0.0) continue;
    const double* m_row = m.row(r);
    for (std::size_t c = 0; c < cols; ++c) out[c] += s * m_row[c];
  }
}

// dM += outer(u, v).
inline void add_outer(Tensor& m, const double* u, const double* v, std::size_t rows,
                      std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double s = u[r];
    if (s == 0.0) continue;
    double* m_row = m.row(r);
    for (std::size_t c = 0; c < cols; ++c) m_row[c] += s * v[c];
  }
}

void check_lstm_input(const MaskedSequence& input, const LstmParams& params) {
  if (params.hidden_dim() == 0) throw ConfigError("lstm: hidden_dim must be positive");
  if (input.valid_len < 1) throw DataError("lstm: input has no valid steps");
  if (input.channels() != params.input_dim()) {
    throw ConfigError("lstm: input has " + std::to_string(input.channels()) +
                      " channels, weights expect " + std::to_string(params.input_dim()));
  }
}

}  // namespace

LstmParams make_lstm_params(const std::string& name_prefix, std::size_t input_dim,
                            std::size_t hidden_dim) {
  LstmParams p;
  p.w_input = Parameter(name_prefix + ".w_input", {4 * hidden_dim, input_dim});
  p.w_recur = Parameter(name_prefix + ".w_recur", {4 * hidden_dim, hidden_dim});
  p.bias = Parameter(name_prefix + ".bias", {4 * hidden_dim});
  return p;
}

void lstm_forward(const MaskedSequence& input, const LstmParams& params,
                  LstmCache& cache) {
  check_lstm_input(input, params);
  const std::size_t h_dim = params.hidden_dim();
  const std::size_t in_dim = params.input_dim();
  const std::size_t t_total = input.step_count();
  const std::size_t valid = input.valid_len;

  cache.gates = Tensor({t_total, 4 * h_dim});
  cache.cells = Tensor({t_total, h_dim});
  cache.hidden = Tensor({t_total, h_dim});
  cache.valid = valid;

  std::vector<double> pre(4 * h_dim);
  for (std::size_t t = 0; t < valid; ++t) {
    for (std::size_t j = 0; j < 4 * h_dim; ++j) pre[j] = params.bias.value.data[j];
    add_matvec(params.w_input.value, input.steps.row(t), pre.data(), 4 * h_dim, in_dim);
    if (t > 0) {
      add_matvec(params.w_recur.value, cache.hidden.row(t - 1), pre.data(), 4 * h_dim,
                 h_dim);
    }
    double* gate_row = cache.gates.row(t);
    double* cell_row = cache.cells.row(t);
    double* hidden_row = cache.hidden.row(t);
    const double* prev_cell = t > 0 ? cache.cells.row(t - 1) : nullptr;
    for (std::size_t u = 0; u < h_dim; ++u) {
      const double gi = sigmoid(pre[u]);
      const double gf = sigmoid(pre[h_dim + u]);
      const double gc = std::tanh(pre[2 * h_dim + u]);
      const double go = sigmoid(pre[3 * h_dim + u]);
      gate_row[u] = gi;
      gate_row[h_dim + u] = gf;
      gate_row[2 * h_dim + u] = gc;
      gate_row[3 * h_dim + u] = go;
      const double cell = gf * (prev_cell ? prev_cell[u] : 0.0) + gi * gc;
      cell_row[u] = cell;
      hidden_row[u] = go * std::tanh(cell);
    }
  }
}

Tensor lstm_last_hidden(const LstmCache& cache) {
  const std::size_t h_dim = cache.hidden.shape[1];
  Tensor out({h_dim});
  const double* last = cache.hidden.row(cache.valid - 1);
  for (std::size_t u = 0; u < h_dim; ++u) out.data[u] = last[u];
  return out;
}

MaskedSequence lstm_all_hidden(const LstmCache& cache) {
  MaskedSequence out(cache.hidden.shape[0], cache.hidden.shape[1], cache.valid);
  const std::size_t n = cache.valid * cache.hidden.shape[1];
  for (std::size_t i = 0; i < n; ++i) out.steps.data[i] = cache.hidden.data[i];
  return out;
}

void lstm_backward(const MaskedSequence& input, const LstmParams& params,
                   const LstmCache& cache, const Tensor& d_hidden, Tensor& d_w_input,
                   Tensor& d_w_recur, Tensor& d_bias, MaskedSequence* d_input) {
  const std::size_t h_dim = params.hidden_dim();
  const std::size_t in_dim = params.input_dim();
  const std::size_t valid = cache.valid;

  if (d_input) *d_input = MaskedSequence(input.step_count(), in_dim, input.valid_len);

  std::vector<double> dh(h_dim, 0.0);       // dL/dh_t including recurrent carry
  std::vector<double> dc_next(h_dim, 0.0);  // dL/dc_{t} carried from step t+1
  std::vector<double> dpre(4 * h_dim);

  for (std::size_t ti = valid; ti-- > 0;) {
    const double* gate_row = cache.gates.row(ti);
    const double* cell_row = cache.cells.row(ti);
    const double* prev_cell = ti > 0 ? cache.cells.row(ti - 1) : nullptr;
    const double* d_h_row = d_hidden.row(ti);

    for (std::size_t u = 0; u < h_dim; ++u) {
      const double gi = gate_row[u];
      const double gf = gate_row[h_dim + u];
      const double gc = gate_row[2 * h_dim + u];
      const double go = gate_row[3 * h_dim + u];
      const double tanh_c = std::tanh(cell_row[u]);
      const double dht = dh[u] + d_h_row[u];
      const double dct = dht * go * (1.0 - tanh_c * tanh_c) + dc_next[u];

      dpre[u] = dct * gc * gi * (1.0 - gi);
      dpre[h_dim + u] = dct * (prev_cell ? prev_cell[u] : 0.0) * gf * (1.0 - gf);
      dpre[2 * h_dim + u] = dct * gi * (1.0 - gc * gc);
      dpre[3 * h_dim + u] = dht * tanh_c * go * (1.0 - go);
      dc_next[u] = dct * gf;
    }

    add_outer(d_w_input, dpre.data(), input.steps.row(ti), 4 * h_dim, in_dim);
    if (ti > 0) {
      add_outer(d_w_recur, dpre.data(), cache.hidden.row(ti - 1), 4 * h_dim, h_dim);
    }
    for (std::size_t j = 0; j < 4 * h_dim; ++j) d_bias.data[j] += dpre[j];

    if (d_input) {
      add_matvec_t(params.w_input.value, dpre.data(), d_input->steps.row(ti), 4 * h_dim,
                   in_dim);
    }
    if (ti > 0) {
      for (std::size_t u = 0; u < h_dim; ++u) dh[u] = 0.0;
      add_matvec_t(params.w_recur.value, dpre.data(), dh.data(), 4 * h_dim, h_dim);
    }
  }
}

BiLstmParams make_bilstm_params(const std::string& name_prefix, std::size_t input_dim,
                                std::size_t hidden_dim_per_dir) {
  BiLstmParams p;
  p.fwd = make_lstm_params(name_prefix + ".fwd", input_dim, hidden_dim_per_dir);
  p.bwd = make_lstm_params(name_prefix + ".bwd", input_dim, hidden_dim_per_dir);
  return p;
}

namespace {

MaskedSequence reverse_valid_steps(const MaskedSequence& input) {
  MaskedSequence out(input.step_count(), input.channels(), input.valid_len);
  const std::size_t ch = input.channels();
  for (std::size_t t = 0; t < input.valid_len; ++t) {
    const double* src = input.steps.row(input.valid_len - 1 - t);
    double* dst = out.steps.row(t);
    for (std::size_t c = 0; c < ch; ++c) dst[c] = src[c];
  }
  return out;
}

}  // namespace

MaskedSequence bilstm_forward(const MaskedSequence& input, const BiLstmParams& params,
                              BiLstmCache& cache) {
  cache.reversed_input = reverse_valid_steps(input);
  lstm_forward(input, params.fwd, cache.fwd);
  lstm_forward(cache.reversed_input, params.bwd, cache.bwd);

  const std::size_t h_dim = params.fwd.hidden_dim();
  const std::size_t valid = input.valid_len;
  MaskedSequence out(input.step_count(), 2 * h_dim, valid);
  for (std::size_t t = 0; t < valid; ++t) {
    double* out_row = out.steps.row(t);
    const double* f_row = cache.fwd.hidden.row(t);
    // Backward direction consumed reversed steps; its state after reading
    // position t sits at reversed index valid-1-t.
    const double* b_row = cache.bwd.hidden.row(valid - 1 - t);
    for (std::size_t u = 0; u < h_dim; ++u) {
      out_row[u] = f_row[u];
      out_row[h_dim + u] = b_row[u];
    }
  }
  return out;
}

void bilstm_backward(const MaskedSequence& input, const BiLstmParams& params,
                     const BiLstmCache& cache, const MaskedSequence& d_output,
                     Tensor& d_fwd_w_input, Tensor& d_fwd_w_recur, Tensor& d_fwd_bias,
                     Tensor& d_bwd_w_input, Tensor& d_bwd_w_recur, Tensor& d_bwd_bias,
                     MaskedSequence* d_input) {
  const std::size_t h_dim = params.fwd.hidden_dim();
  const std::size_t valid = input.valid_len;
  const std::size_t t_total = input.step_count();

  Tensor d_fwd_h({t_total, h_dim});
  Tensor d_bwd_h({t_total, h_dim});
  for (std::size_t t = 0; t < valid; ++t) {
    const double* d_out_row = d_output.steps.row(t);
    double* df = d_fwd_h.row(t);
    double* db = d_bwd_h.row(valid - 1 - t);
    for (std::size_t u = 0; u < h_dim; ++u) {
      df[u] = d_out_row[u];
      db[u] = d_out_row[h_dim + u];
    }
  }

  MaskedSequence d_in_fwd;
  MaskedSequence d_in_bwd_rev;
  lstm_backward(input, params.fwd, cache.fwd, d_fwd_h, d_fwd_w_input, d_fwd_w_recur,
                d_fwd_bias, d_input ? &d_in_fwd : nullptr);
  lstm_backward(cache.reversed_input, params.bwd, cache.bwd, d_bwd_h, d_bwd_w_input,
                d_bwd_w_recur, d_bwd_bias, d_input ? &d_in_bwd_rev : nullptr);

  if (d_input) {
    *d_input = MaskedSequence(t_total, input.channels(), valid);
    const std::size_t ch = input.channels();
    for (std::size_t t = 0; t < valid; ++t) {
      const double* f = d_in_fwd.steps.row(t);
      const double* b = d_in_bwd_rev.steps.row(valid - 1 - t);
      double* dst = d_input->steps.row(t);
      for (std::size_t c = 0; c < ch; ++c) dst[c] = f[c] + b[c];
    }
  }
}

}  // namespace seqembed
