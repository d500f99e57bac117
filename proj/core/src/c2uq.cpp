#include "stua/c2uq.hpp"

#include "stua/errors.hpp"

namespace stua::c2uq {

Eigen::Index fm_output_width(int categories, int field_width, int interaction_width) {
  if (categories < 1) fail(ErrorKind::InvalidConfig, "fm needs at least one context category");
  const Eigen::Index q = categories;
  return q * field_width + q * (q - 1) / 2 * interaction_width;
}

C2uqParams init_c2uq(const C2uqDims& d, nn::Rng& rng) {
  if (d.regions < 2 || d.p < 1 || d.context_categories < 1 || d.embed_width < 1 || d.field_width < 1 ||
      d.interaction_width < 1 || d.fm_hidden < 1 || d.fm_layers < 1 || d.evolve_hidden < 1 || d.evolve_layers < 1) {
    fail(ErrorKind::InvalidConfig, "uncertainty head dimensions must be positive");
  }
  C2uqParams c;
  c.embed.ex_weights = nn::glorot_uniform(d.p, d.context_width(), rng);
  c.embed.weights = nn::glorot_uniform(d.embed_width, d.p, rng);
  c.embed.bias = Matrix::Zero(d.embed_width, 1);

  // nonnegative start: higher similarity means lower internal uncertainty
  c.internal.weights = nn::glorot_uniform(d.regions, d.regions, rng).cwiseAbs();
  c.internal.bias = Matrix::Zero(d.regions, 1);

  const int q = d.context_categories;
  c.fm.field_weights = nn::glorot_uniform(q, d.field_width, rng);
  c.fm.field_bias = Matrix::Zero(q, d.field_width);
  for (int k = 0; k < q * (q - 1) / 2; ++k) {
    c.fm.interactions.push_back(nn::glorot_uniform(d.field_width, d.interaction_width, rng));
  }
  Eigen::Index in = fm_output_width(q, d.field_width, d.interaction_width);
  for (int k = 0; k < d.fm_layers; ++k) {
    const Eigen::Index out = k + 1 == d.fm_layers ? 1 : d.fm_hidden;
    c.fm.gcn.push_back(nn::glorot_uniform(in, out, rng));
    in = out;
  }

  c.aggr.weights = nn::glorot_uniform(d.regions, 2 * d.regions, rng);

  Eigen::Index lstm_in = d.regions;
  for (int k = 0; k < d.evolve_layers; ++k) {
    c.evolve.lstm.push_back(nn::make_lstm_layer(lstm_in, d.evolve_hidden, rng));
    lstm_in = d.evolve_hidden;
  }
  c.evolve.readout = nn::glorot_uniform(d.evolve_hidden, d.regions, rng);
  c.evolve.readout_bias = Matrix::Zero(1, d.regions);
  return c;
}

Vector embed_period(const Vector& h, const Vector& ex, const EmbedParams& params) {
  if (params.ex_weights.cols() != ex.size() || params.ex_weights.rows() != h.size() ||
      params.weights.cols() != h.size() || params.bias.rows() != params.weights.rows()) {
    fail(ErrorKind::DimensionMismatch, "embed_period: shapes do not match");
  }
  return params.weights * (params.ex_weights * ex + h) + params.bias.col(0);
}

Vector period_similarity(std::span<const Vector> embeddings) {
  if (embeddings.size() < 2) fail(ErrorKind::DimensionMismatch, "period_similarity: need at least two periods");
  const auto count = static_cast<Eigen::Index>(embeddings.size());
  Vector s = Vector::Zero(count);
  for (Eigen::Index m = 0; m < count; ++m) {
    for (Eigen::Index j = 0; j < count; ++j) {
      if (j == m) continue;
      const Vector& a = embeddings[static_cast<std::size_t>(m)];
      const Vector& b = embeddings[static_cast<std::size_t>(j)];
      if (a.size() != b.size()) fail(ErrorKind::DimensionMismatch, "period_similarity: widths differ");
      s(m) += a.dot(b);
    }
  }
  return s / static_cast<double>(count - 1);
}

Vector internal_uncertainty(const Vector& similarity, const InternalParams& params) {
  if (params.weights.cols() != similarity.size() || params.bias.rows() != params.weights.rows()) {
    fail(ErrorKind::DimensionMismatch, "internal_uncertainty: shapes do not match");
  }
  return params.weights * (-similarity.array()).exp().matrix() + params.bias.col(0);
}

Vector pairwise_interactions(std::span<const Vector> fields, std::span<const Matrix> maps) {
  const auto q = fields.size();
  if (q < 1) fail(ErrorKind::InvalidConfig, "fm needs at least one context category");
  if (maps.size() != q * (q - 1) / 2) fail(ErrorKind::DimensionMismatch, "pairwise_interactions: map count");
  Eigen::Index width = 0;
  for (const Vector& e : fields) width += e.size();
  for (const Matrix& w : maps) width += w.cols();
  Vector out(width);
  Eigen::Index at = 0;
  for (const Vector& e : fields) {
    out.segment(at, e.size()) = e;
    at += e.size();
  }
  std::size_t k = 0;
  for (std::size_t u = 0; u < q; ++u) {
    for (std::size_t v = u + 1; v < q; ++v, ++k) {
      const Matrix& w = maps[k];
      if (fields[u].size() != w.rows() || fields[v].size() != w.rows()) {
        fail(ErrorKind::DimensionMismatch, "pairwise_interactions: field width does not match map");
      }
      out.segment(at, w.cols()) = w.transpose() * fields[u].cwiseProduct(fields[v]);
      at += w.cols();
    }
  }
  return out;
}

Vector fm_interactions(const Vector& factors, const FmParams& params) {
  if (factors.size() != params.field_weights.rows()) fail(ErrorKind::DimensionMismatch, "fm_interactions: factor count");
  std::vector<Vector> fields;
  for (Eigen::Index u = 0; u < factors.size(); ++u) {
    fields.push_back((factors(u) * params.field_weights.row(u) + params.field_bias.row(u)).transpose());
  }
  return pairwise_interactions(fields, params.interactions);
}

Vector external_uncertainty(const Matrix& adj, const Matrix& interactions, std::span<const Matrix> kernels) {
  if (kernels.empty()) fail(ErrorKind::DimensionMismatch, "external_uncertainty: no kernels");
  if (adj.rows() != interactions.rows() || adj.cols() != interactions.rows()) {
    fail(ErrorKind::DimensionMismatch, "external_uncertainty: adjacency does not match node count");
  }
  Matrix h = interactions;
  for (std::size_t k = 0; k < kernels.size(); ++k) {
    if (kernels[k].rows() != h.cols()) fail(ErrorKind::DimensionMismatch, "external_uncertainty: kernel widths");
    h = adj * h * kernels[k];
    if (k + 1 < kernels.size()) h = h.cwiseMax(0.0);
  }
  if (h.cols() != 1) fail(ErrorKind::DimensionMismatch, "external_uncertainty: last kernel must output one column");
  return h.col(0);
}

Vector aggregate(const Vector& internal, const Vector& external, const AggrParams& params) {
  if (internal.size() != external.size() || params.weights.cols() != 2 * internal.size()) {
    fail(ErrorKind::DimensionMismatch, "aggregate: shapes do not match");
  }
  Vector joined(2 * internal.size());
  joined << internal, external;
  return params.weights * joined;
}

Vector evolve_uncertainty(std::span<const Vector> steps, const EvolveParams& params) {
  ad::Tape tape;
  std::vector<ad::Var> vars;
  for (const Vector& s : steps) vars.push_back(tape.constant(s));
  return tape.value(evolve_uncertainty(tape, vars, params)).col(0);
}

ad::Var embed_periods(ad::Tape& tape, ad::Var h, ad::Var ex, const EmbedParams& params) {
  ad::Var mixed = tape.add(tape.matmul(ex, tape.transpose(tape.param(params.ex_weights))), h);
  ad::Var projected = tape.matmul(mixed, tape.transpose(tape.param(params.weights)));
  return tape.add_row(projected, tape.transpose(tape.param(params.bias)));
}

std::vector<ad::Var> period_similarity(ad::Tape& tape, std::span<const ad::Var> embeddings) {
  if (embeddings.size() < 2) fail(ErrorKind::DimensionMismatch, "period_similarity: need at least two periods");
  const std::size_t count = embeddings.size();
  // pairwise products are symmetric, compute each once
  std::vector<std::vector<ad::Var>> dots(count, std::vector<ad::Var>(count));
  for (std::size_t m = 0; m < count; ++m) {
    for (std::size_t j = m + 1; j < count; ++j) dots[m][j] = dots[j][m] = tape.row_dot(embeddings[m], embeddings[j]);
  }
  std::vector<ad::Var> out;
  for (std::size_t m = 0; m < count; ++m) {
    ad::Var acc;
    for (std::size_t j = 0; j < count; ++j) {
      if (j == m) continue;
      acc = acc.valid() ? tape.add(acc, dots[m][j]) : dots[m][j];
    }
    out.push_back(tape.scale(acc, 1.0 / static_cast<double>(count - 1)));
  }
  return out;
}

ad::Var internal_uncertainty(ad::Tape& tape, ad::Var similarity, const InternalParams& params) {
  ad::Var decay = tape.exp(tape.scale(similarity, -1.0));
  return tape.add(tape.matmul(tape.param(params.weights), decay), tape.param(params.bias));
}

ad::Var fm_interactions(ad::Tape& tape, ad::Var factors, const FmParams& params) {
  const Eigen::Index q = params.field_weights.rows();
  if (tape.value(factors).cols() != q) fail(ErrorKind::DimensionMismatch, "fm_interactions: factor count");
  ad::Var fw = tape.param(params.field_weights);
  ad::Var fb = tape.param(params.field_bias);
  std::vector<ad::Var> parts;
  for (Eigen::Index u = 0; u < q; ++u) {
    ad::Var e = tape.matmul(tape.slice_cols(factors, u, 1), tape.slice_rows(fw, u, 1));
    parts.push_back(tape.add_row(e, tape.slice_rows(fb, u, 1)));
  }
  std::size_t k = 0;
  for (Eigen::Index u = 0; u < q; ++u) {
    for (Eigen::Index v = u + 1; v < q; ++v, ++k) {
      ad::Var prod = tape.hadamard(parts[static_cast<std::size_t>(u)], parts[static_cast<std::size_t>(v)]);
      parts.push_back(tape.matmul(prod, tape.param(params.interactions.at(k))));
    }
  }
  return parts.size() == 1 ? parts.front() : tape.concat_cols(parts);
}

ad::Var external_uncertainty(ad::Tape& tape, ad::Var adj, ad::Var interactions, std::span<const Matrix> kernels) {
  if (kernels.empty()) fail(ErrorKind::DimensionMismatch, "external_uncertainty: no kernels");
  ad::Var h = interactions;
  for (std::size_t k = 0; k < kernels.size(); ++k) {
    h = nn::graph_conv(tape, adj, h, tape.param(kernels[k]), k + 1 < kernels.size());
  }
  return h;
}

ad::Var aggregate(ad::Tape& tape, ad::Var internal, ad::Var external, const AggrParams& params) {
  const ad::Var parts[] = {internal, external};
  return tape.matmul(tape.param(params.weights), tape.concat_rows(parts));
}

ad::Var evolve_uncertainty(ad::Tape& tape, std::span<const ad::Var> steps, const EvolveParams& params) {
  if (steps.empty()) fail(ErrorKind::DimensionMismatch, "evolve_uncertainty: empty sequence");
  std::vector<ad::Var> rows;
  for (ad::Var s : steps) rows.push_back(tape.transpose(s));
  ad::Var hidden = nn::run_lstm(tape, params.lstm, rows);
  ad::Var out = tape.add(tape.matmul(hidden, tape.param(params.readout)), tape.param(params.readout_bias));
  return tape.transpose(out);
}

}  // namespace stua::c2uq
