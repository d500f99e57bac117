#pragma once

#include "stua/autodiff.hpp"
#include "stua/nn.hpp"

#include <span>
#include <string>
#include <vector>

namespace stua::c2uq {

/// Period embedding I = W * ((W_ex * ex) + h) + b, shared by all regions and
/// periods.
struct EmbedParams {
  Matrix ex_weights;  // p x L_c
  Matrix weights;     // L_e x p
  Matrix bias;        // L_e x 1
};

/// U_I = W_I * exp(-s) + b_I, shared by all periods.
struct InternalParams {
  Matrix weights;  // N x N
  Matrix bias;     // N x 1
};

/// Field embedders, pairwise interaction maps and the FM-GCN kernels.
struct FmParams {
  Matrix field_weights;             // Q x L_ce, row u embeds factor u
  Matrix field_bias;                // Q x L_ce
  std::vector<Matrix> interactions; // Q(Q-1)/2 maps L_ce x L_ie, pairs (0,1), (0,2), .., (Q-2,Q-1)
  std::vector<Matrix> gcn;          // d x G, .., G x 1; the last layer is linear
};

/// U_o = W_agg * [U_I; U_E].
struct AggrParams {
  Matrix weights;  // N x 2N
};

/// Citywide recurrent encoder over the q + 2 overall uncertainties.
struct EvolveParams {
  std::vector<nn::LstmLayer> lstm;
  Matrix readout;       // H x N
  Matrix readout_bias;  // 1 x N
};

struct C2uqParams {
  EmbedParams embed;
  InternalParams internal;
  FmParams fm;
  AggrParams aggr;
  EvolveParams evolve;
};

struct C2uqDims {
  int regions = 6;
  int p = 6;
  int context_categories = 3;
  int embed_width = 8;        // L_e
  int field_width = 4;        // L_ce
  int interaction_width = 4;  // L_ie
  int fm_hidden = 8;
  int fm_layers = 2;
  int evolve_hidden = 16;
  int evolve_layers = 2;

  int context_width() const noexcept { return p * context_categories; }  // L_c
};

/// Q * L_ce + Q(Q-1)/2 * L_ie.
Eigen::Index fm_output_width(int categories, int field_width, int interaction_width);

C2uqParams init_c2uq(const C2uqDims& dims, nn::Rng& rng);

// Per-region reference forms.

Vector embed_period(const Vector& h, const Vector& ex, const EmbedParams& params);

/// s_m = 1/(M-1) * sum_{j != m} <I_m, I_j> over M >= 2 embeddings.
Vector period_similarity(std::span<const Vector> embeddings);

Vector internal_uncertainty(const Vector& similarity, const InternalParams& params);

/// Concatenation of the field embeddings and the pairwise terms
/// (e_u .* e_v) * W_E^{uv}, pairs in lexicographic order.
Vector pairwise_interactions(std::span<const Vector> fields, std::span<const Matrix> maps);

/// Embeds one raw value per factor and forms all pairwise interactions.
Vector fm_interactions(const Vector& factors, const FmParams& params);

/// Graph convolutions over node features `interactions` (N x d) with a
/// normalized adjacency; hidden layers use ReLU, the last one is linear.
Vector external_uncertainty(const Matrix& normalized_adjacency, const Matrix& interactions,
                            std::span<const Matrix> kernels);

Vector aggregate(const Vector& internal, const Vector& external, const AggrParams& params);

/// Steps in chronological order, each an N-vector.
Vector evolve_uncertainty(std::span<const Vector> steps, const EvolveParams& params);

// Batched tape forms, regions along rows.

/// h: N x p, ex: N x L_c -> N x L_e.
ad::Var embed_periods(ad::Tape& tape, ad::Var h, ad::Var ex, const EmbedParams& params);
/// Each embedding N x L_e -> one N x 1 similarity per period.
std::vector<ad::Var> period_similarity(ad::Tape& tape, std::span<const ad::Var> embeddings);
ad::Var internal_uncertainty(ad::Tape& tape, ad::Var similarity, const InternalParams& params);
/// factors: N x Q -> N x d.
ad::Var fm_interactions(ad::Tape& tape, ad::Var factors, const FmParams& params);
ad::Var external_uncertainty(ad::Tape& tape, ad::Var normalized_adjacency, ad::Var interactions,
                             std::span<const Matrix> kernels);
ad::Var aggregate(ad::Tape& tape, ad::Var internal, ad::Var external, const AggrParams& params);
ad::Var evolve_uncertainty(ad::Tape& tape, std::span<const ad::Var> steps, const EvolveParams& params);

template <class F>
void visit_embed(EmbedParams& p, F&& f) {
  f(std::string("c2uq.embed.ex"), p.ex_weights);
  f(std::string("c2uq.embed.w"), p.weights);
  f(std::string("c2uq.embed.b"), p.bias);
}

template <class F>
void visit_internal(InternalParams& p, F&& f) {
  f(std::string("c2uq.internal.w"), p.weights);
  f(std::string("c2uq.internal.b"), p.bias);
}

template <class F>
void visit_fm(FmParams& p, F&& f) {
  f(std::string("c2uq.fm.field_w"), p.field_weights);
  f(std::string("c2uq.fm.field_b"), p.field_bias);
  for (std::size_t k = 0; k < p.interactions.size(); ++k) f("c2uq.fm.pair" + std::to_string(k), p.interactions[k]);
  for (std::size_t k = 0; k < p.gcn.size(); ++k) f("c2uq.fm.gcn" + std::to_string(k), p.gcn[k]);
}

template <class F>
void visit_evolve(EvolveParams& p, F&& f) {
  nn::visit_lstm("c2uq.evolve", p.lstm, f);
  f(std::string("c2uq.evolve.readout.w"), p.readout);
  f(std::string("c2uq.evolve.readout.b"), p.readout_bias);
}

template <class F>
void visit_aggr(AggrParams& p, F&& f) {
  f(std::string("c2uq.aggr.w"), p.weights);
}

}  // namespace stua::c2uq
